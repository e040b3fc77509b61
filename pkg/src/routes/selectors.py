"""
Selector endpoints for block-diagonal PSD families
"""
from fastapi import APIRouter

from src.models.schemas import SelectorPayload
from src.models.selection import SelectorInstance
from src.services.selector_service import SelectorService
from src.utils.errors import HypothesisError
from src.utils.responses import error_response

router = APIRouter(prefix="/selectors")


def _r(payload: SelectorPayload) -> int:
    if payload.r is None:
        raise HypothesisError("This selector needs the candidate count r", reason="missing_parameter")
    return payload.r


@router.post("/weaver")
def weaver(payload: SelectorPayload):
    """One element per block with ‖Σ_J T_i‖ ≤ (1/√r + √ε)²"""
    try:
        cert = SelectorService.weaver_ksr_select(SelectorInstance.from_json(payload.instance), _r(payload))
        return {"status": "ok", "certificate": cert.to_json()}
    except Exception as e:
        return error_response(e, "selectors/weaver")


@router.post("/ks2")
def ks2(payload: SelectorPayload):
    try:
        cert = SelectorService.ks2_select(SelectorInstance.from_json(payload.instance))
        return {"status": "ok", "certificate": cert.to_json()}
    except Exception as e:
        return error_response(e, "selectors/ks2")


@router.post("/block")
def block(payload: SelectorPayload):
    try:
        cert = SelectorService.block_weaver_select(SelectorInstance.from_json(payload.instance), _r(payload))
        return {"status": "ok", "certificate": cert.to_json()}
    except Exception as e:
        return error_response(e, "selectors/block")
