"""
Health check endpoints
"""
from fastapi import APIRouter

from src.config import settings

router = APIRouter()


@router.get("/healthz")
async def healthcheck():
    """Health check endpoint"""
    return {"status": "ok", "version": settings.VERSION}
