"""
Mixed characteristic polynomial endpoints
"""
import logging

import numpy as np
from fastapi import APIRouter

from src.models.linalg import HermitianMatrix
from src.models.polynomial import RealPolynomial
from src.models.schemas import DiscriminantPayload, MaxrootPayload, MatrixPayload, McpPayload
from src.services.mcp_service import McpService
from src.utils.responses import error_response

logger = logging.getLogger(__name__)

router = APIRouter(prefix="/mcp")


def matrix_of(payload: MatrixPayload) -> np.ndarray:
    return HermitianMatrix.from_json(payload.model_dump()).entries


@router.post("/polynomial")
def polynomial(payload: McpPayload):
    """μ[A_1, ..., A_m] and, on request, the definitional oracle for comparison"""
    try:
        mats = [matrix_of(m) for m in payload.matrices]
        poly = McpService.mcp(mats, dim=payload.dim)
        body = {"status": "ok", "mcp": poly.to_json(), "maxroot": McpService.maxroot(poly).to_json()}
        if payload.oracle:
            body["oracle"] = McpService.mcp_oracle(mats, dim=payload.dim).to_json()
        return body
    except Exception as e:
        return error_response(e, "mcp/polynomial")


@router.post("/maxroot")
def maxroot(payload: MaxrootPayload):
    try:
        result = McpService.maxroot(RealPolynomial.from_coeffs(payload.coeffs))
        return {"status": "ok", **result.to_json()}
    except Exception as e:
        return error_response(e, "mcp/maxroot")


@router.post("/discriminant")
def discriminant(payload: DiscriminantPayload):
    try:
        value = McpService.mixed_discriminant([matrix_of(m) for m in payload.matrices], method=payload.method)
        return {"status": "ok", "value": value, "method": payload.method}
    except Exception as e:
        return error_response(e, "mcp/discriminant")
