"""
Experiment and certificate endpoints
"""
from fastapi import APIRouter

from src.models.schemas import ExperimentConfig, ReverifyPayload
from src.services.certificate_service import CertificateService
from src.utils.responses import error_response, json_response

router = APIRouter()


@router.post("/experiments/run")
def run_experiment(config: ExperimentConfig):
    """Generate and evaluate one experiment; the certificate is returned, never written"""
    try:
        certificate, _ = CertificateService.build(config)
        return json_response({"status": "ok", "certificate": certificate})
    except Exception as e:
        return error_response(e, "experiments/run")


@router.post("/certificates/reverify")
def reverify(payload: ReverifyPayload):
    try:
        return CertificateService.reverify(payload.certificate, tol=payload.tol)
    except Exception as e:
        return error_response(e, "certificates/reverify")
