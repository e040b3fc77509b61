"""
Frame endpoints: bounds, Naimark complements and Riesz selectors
"""
from typing import List

from fastapi import APIRouter

from src.models.frames import VectorSystem
from src.models.schemas import SystemsPayload
from src.services.frame_service import FrameService
from src.utils.errors import HypothesisError
from src.utils.responses import error_response

router = APIRouter(prefix="/frames")


def _systems(payload: SystemsPayload) -> List[VectorSystem]:
    if not payload.systems:
        raise HypothesisError("At least one system is needed", reason="empty_family")
    return [VectorSystem.from_json(s) for s in payload.systems]


def _blocks(payload: SystemsPayload) -> List[List[int]]:
    if payload.blocks is None:
        raise HypothesisError("Selectors need index blocks", reason="missing_parameter")
    return payload.blocks


@router.post("/bounds")
def bounds(payload: SystemsPayload):
    try:
        return {"status": "ok", "bounds": [FrameService.frame_bounds(s).to_json() for s in _systems(payload)]}
    except Exception as e:
        return error_response(e, "frames/bounds")


@router.post("/naimark")
def naimark(payload: SystemsPayload):
    """Naimark complement of each system after completing it to a Parseval frame"""
    try:
        out = []
        for s in _systems(payload):
            pair = FrameService.naimark_complement(FrameService.complete_to_parseval(s))
            out.append({"parseval": pair.original.to_json(), "complement": pair.complement.to_json()})
        return {"status": "ok", "pairs": out}
    except Exception as e:
        return error_response(e, "frames/naimark")


@router.post("/feichtinger")
def feichtinger(payload: SystemsPayload):
    try:
        cert = FrameService.feichtinger_select(_systems(payload), _blocks(payload), eps=payload.eps, c_bl=payload.constant)
        return {"status": "ok", "certificate": cert.to_json()}
    except Exception as e:
        return error_response(e, "frames/feichtinger")


@router.post("/r-eps")
def r_eps(payload: SystemsPayload):
    try:
        if payload.epsilon is None:
            raise HypothesisError("r-eps needs epsilon", reason="missing_parameter")
        cert = FrameService.r_eps_select(_systems(payload), _blocks(payload), payload.epsilon, constant=payload.constant)
        return {"status": "ok", "certificate": cert.to_json()}
    except Exception as e:
        return error_response(e, "frames/r-eps")
