"""
Main FastAPI application
"""
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from src.config import settings
from src.routes import health, mcp, selectors, frames, exponentials, experiments


# Create FastAPI app
app = FastAPI(
    title="mcpsel API",
    description="Mixed characteristic polynomials, selectors and certificates at desk scale",
    version=settings.VERSION
)

# CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=settings.CORS_ORIGINS,
    allow_credentials=settings.CORS_ALLOW_CREDENTIALS,
    allow_methods=settings.CORS_ALLOW_METHODS,
    allow_headers=settings.CORS_ALLOW_HEADERS,
)

# Include routers
app.include_router(health.router, tags=["Health"])
app.include_router(mcp.router, tags=["Mixed characteristic polynomials"])
app.include_router(selectors.router, tags=["Selectors"])
app.include_router(frames.router, tags=["Frames"])
app.include_router(exponentials.router, tags=["Exponentials"])
app.include_router(experiments.router, tags=["Experiments"])
