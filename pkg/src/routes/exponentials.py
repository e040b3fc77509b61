"""
Exponential system endpoints on the torus
"""
from fastapi import APIRouter

from src.models.exponentials import IntervalUnion
from src.models.schemas import FrameSamplePayload, GramPayload, RemovalPayload, SyndeticPayload
from src.services.exponential_service import ExponentialService
from src.services.linalg_service import LinalgService
from src.utils.responses import error_response

router = APIRouter(prefix="/exponentials")


@router.post("/gram")
def gram(payload: GramPayload):
    """Finite-section Gram matrix of {e_λ}_{λ∈Λ} on S with its extreme eigenvalues"""
    try:
        g = ExponentialService.exp_gram(IntervalUnion.from_json(payload.intervals), payload.frequencies)
        eigs = LinalgService.eigenvalues(g.entries)
        return {"status": "ok", "gram": g.to_json(), "lambda_min": eigs[0], "lambda_max": eigs[-1]}
    except Exception as e:
        return error_response(e, "exponentials/gram")


@router.post("/syndetic")
def syndetic(payload: SyndeticPayload):
    try:
        sel = ExponentialService.syndetic_riesz_select(
            IntervalUnion.from_json(payload.intervals), payload.epsilon, payload.window, payload.constant
        )
        return {"status": "ok", "selection": sel.to_json()}
    except Exception as e:
        return error_response(e, "exponentials/syndetic")


@router.post("/removal")
def removal(payload: RemovalPayload):
    try:
        sel = ExponentialService.unit_norm_removal(
            [IntervalUnion.from_json(s) for s in payload.sets], payload.window, r=payload.r, c_hat=payload.c_hat
        )
        return {"status": "ok", "selection": sel.to_json()}
    except Exception as e:
        return error_response(e, "exponentials/removal")


@router.post("/frame")
def frame(payload: FrameSamplePayload):
    try:
        sel = ExponentialService.bounded_frame_sample(
            IntervalUnion.from_json(payload.intervals), payload.epsilon, payload.window, r=payload.r, c_hat=payload.c_hat
        )
        return {"status": "ok", "selection": sel.to_json()}
    except Exception as e:
        return error_response(e, "exponentials/frame")
