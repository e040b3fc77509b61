"""
Application configuration
"""
import math
import os
from typing import Optional

from dotenv import load_dotenv

load_dotenv()


def _float(name: str, default: float) -> float:
    return float(os.getenv(f"MCPSEL_{name}", default))


def _int(name: str, default: int) -> int:
    return int(float(os.getenv(f"MCPSEL_{name}", default)))


class Settings:
    """Application settings"""

    # Tolerances
    TOL_PSD: float = _float("TOL_PSD", 1e-9)
    TOL_EQ: float = _float("TOL_EQ", 1e-8)
    TOL_ROOT: float = _float("TOL_ROOT", 1e-7)
    TOL_HERMITIAN: float = _float("TOL_HERMITIAN", 1e-12)
    ROOT_CLUSTER_TOL: float = _float("ROOT_CLUSTER_TOL", 1e-5)

    # Work budgets
    MAX_DISCRIMINANT_DIM: int = _int("MAX_DISCRIMINANT_DIM", 8)
    EXHAUSTIVE_BUDGET: int = _int("EXHAUSTIVE_BUDGET", 100_000)
    EXACT_WORK_BUDGET: float = _float("EXACT_WORK_BUDGET", 2e7)  # subsets * dim^3
    LOCAL_SEARCH_PASSES: int = _int("LOCAL_SEARCH_PASSES", 8)

    # Constants left open by the existence proofs
    C_REPS: float = _float("C_REPS", 12 * (3 + 2 * math.sqrt(2)) + 1)
    C_BL: Optional[float] = float(os.getenv("MCPSEL_C_BL")) if os.getenv("MCPSEL_C_BL") else None
    METRIC_ETA: int = _int("METRIC_ETA", 2)
    WEIGHT_BITS: int = _int("WEIGHT_BITS", 24)

    # Parallelism
    THREADS: int = max(1, int(os.getenv("MCPSEL_THREADS", "1")))

    # CORS settings
    CORS_ORIGINS: list = ["*"]
    CORS_ALLOW_CREDENTIALS: bool = True
    CORS_ALLOW_METHODS: list = ["*"]
    CORS_ALLOW_HEADERS: list = ["*"]

    VERSION: str = "1.0.0"


settings = Settings()
