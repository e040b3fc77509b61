"""
Hermitian linear algebra service
"""
from typing import List, Optional, Union

import numpy as np
import scipy.linalg

from src.config import settings
from src.models.linalg import HermitianMatrix, PsdMatrix
from src.utils.errors import DimensionMismatchError

MatrixLike = Union[HermitianMatrix, PsdMatrix, np.ndarray]


def as_array(m: MatrixLike) -> np.ndarray:
    if isinstance(m, (HermitianMatrix, PsdMatrix)):
        return m.entries
    return np.asarray(m, dtype=np.complex128)


class LinalgService:
    """Spectral helpers shared by every module"""

    @staticmethod
    def eigenvalues(h: MatrixLike) -> List[float]:
        """
        Eigenvalues of a Hermitian matrix

        Args:
            h: Hermitian matrix

        Returns:
            Eigenvalues sorted ascending
        """
        a = as_array(h)
        if a.shape[0] == 0:
            return []
        return scipy.linalg.eigvalsh(a).tolist()

    @staticmethod
    def operator_norm(h: MatrixLike) -> float:
        a = as_array(h)
        if a.size == 0:
            return 0.0
        w = scipy.linalg.eigvalsh(a)
        return float(max(abs(w[0]), abs(w[-1])))

    @staticmethod
    def lambda_max(h: MatrixLike) -> float:
        a = as_array(h)
        if a.size == 0:
            return 0.0
        return float(scipy.linalg.eigvalsh(a)[-1])

    @staticmethod
    def lambda_min(h: MatrixLike) -> float:
        a = as_array(h)
        if a.size == 0:
            return 0.0
        return float(scipy.linalg.eigvalsh(a)[0])

    @staticmethod
    def trace(h: MatrixLike) -> float:
        return float(np.real(np.trace(as_array(h))))

    @staticmethod
    def is_psd(h: MatrixLike, tol: Optional[float] = None) -> bool:
        tol = settings.TOL_PSD if tol is None else tol
        return LinalgService.lambda_min(h) >= -tol

    @staticmethod
    def psd_order_leq(a: MatrixLike, b: MatrixLike, tol: Optional[float] = None) -> bool:
        """
        Test A ⪯ B, i.e. B − A ⪰ −tol·I

        Raises:
            DimensionMismatchError: If A and B differ in dimension
        """
        tol = settings.TOL_PSD if tol is None else tol
        x, y = as_array(a), as_array(b)
        if x.shape != y.shape:
            raise DimensionMismatchError(f"Cannot compare shapes {x.shape} and {y.shape}")
        diff = y - x
        return LinalgService.lambda_min((diff + diff.conj().T) / 2) >= -tol

    @staticmethod
    def psd_sqrt(h: MatrixLike) -> np.ndarray:
        w, q = scipy.linalg.eigh(as_array(h))
        return (q * np.sqrt(np.clip(w, 0.0, None))) @ q.conj().T


eigenvalues = LinalgService.eigenvalues
operator_norm = LinalgService.operator_norm
trace = LinalgService.trace
is_psd = LinalgService.is_psd
psd_order_leq = LinalgService.psd_order_leq
