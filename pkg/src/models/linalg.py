"""
Hermitian and positive semidefinite matrix values
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np
import scipy.linalg

from src.config import settings
from src.utils.errors import DimensionMismatchError, HypothesisError, NotHermitianError

ArrayLike = Union[np.ndarray, Sequence[Sequence[complex]]]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class HermitianMatrix:
    """Dense complex self-adjoint matrix, symmetrized on construction"""

    entries: np.ndarray

    @classmethod
    def from_array(cls, a: ArrayLike, tol: Optional[float] = None) -> "HermitianMatrix":
        """
        Build a Hermitian matrix from raw entries

        Args:
            a: square array-like of complex entries
            tol: allowed deviation from self-adjointness (relative to 1 + max|a|)

        Returns:
            HermitianMatrix with entries (a + a*)/2

        Raises:
            DimensionMismatchError: If a is not square
            NotHermitianError: If a is too far from its adjoint
        """
        tol = settings.TOL_HERMITIAN if tol is None else tol
        arr = np.asarray(a, dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise DimensionMismatchError(f"Expected a nonempty square matrix, got shape {arr.shape}")
        deviation = float(np.max(np.abs(arr - arr.conj().T)))
        if deviation > tol * (1.0 + float(np.max(np.abs(arr)))):
            raise NotHermitianError(f"Matrix deviates from its adjoint by {deviation:.3e}")
        return cls(_frozen((arr + arr.conj().T) / 2))

    @classmethod
    def zeros(cls, dim: int) -> "HermitianMatrix":
        return cls(_frozen(np.zeros((dim, dim))))

    @classmethod
    def identity(cls, dim: int) -> "HermitianMatrix":
        return cls(_frozen(np.eye(dim)))

    @property
    def dim(self) -> int:
        return int(self.entries.shape[0])

    def __add__(self, other: "HermitianMatrix") -> "HermitianMatrix":
        if other.dim != self.dim:
            raise DimensionMismatchError(f"Cannot add dim {self.dim} and dim {other.dim}")
        return HermitianMatrix(_frozen(self.entries + other.entries))

    def scaled(self, s: float) -> "HermitianMatrix":
        return HermitianMatrix(_frozen(float(s) * self.entries))

    def conjugated(self, u: np.ndarray) -> "HermitianMatrix":
        """U H U*"""
        return HermitianMatrix.from_array(u @ self.entries @ u.conj().T, tol=1e-9)

    def to_json(self) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "re": self.entries.real.ravel().tolist(),
            "im": self.entries.imag.ravel().tolist(),
        }

    @classmethod
    def from_json(cls, payload: Dict[str, Any]) -> "HermitianMatrix":
        d = int(payload["dim"])
        re = np.asarray(payload["re"], dtype=float).reshape(d, d)
        im = np.asarray(payload.get("im") or [0.0] * d * d, dtype=float).reshape(d, d)
        return cls.from_array(re + 1j * im)


@dataclass(frozen=True, eq=False)
class PsdMatrix:
    """Positive semidefinite matrix; eigenvalues within -tol_psd are clamped to zero"""

    base: HermitianMatrix

    @classmethod
    def from_hermitian(cls, h: HermitianMatrix, tol: Optional[float] = None) -> "PsdMatrix":
        tol = settings.TOL_PSD if tol is None else tol
        w, q = scipy.linalg.eigh(h.entries)
        scale = max(1.0, float(np.max(np.abs(w))))
        if w[0] < -tol * scale:
            raise HypothesisError(
                f"Matrix is not positive semidefinite (smallest eigenvalue {w[0]:.3e})",
                reason="not_psd",
            )
        if w[0] < 0:
            w = np.clip(w, 0.0, None)
            h = HermitianMatrix.from_array((q * w) @ q.conj().T, tol=1e-9)
        return cls(h)

    @classmethod
    def from_array(cls, a: ArrayLike, tol: Optional[float] = None) -> "PsdMatrix":
        return cls.from_hermitian(HermitianMatrix.from_array(a), tol=tol)

    @classmethod
    def assume_psd(cls, a: np.ndarray) -> "PsdMatrix":
        """Wrap a matrix that is PSD by construction (sums of outer products), skipping the eigen check"""
        arr = np.asarray(a, dtype=np.complex128)
        return cls(HermitianMatrix(_frozen((arr + arr.conj().T) / 2)))

    @classmethod
    def rank_one(cls, u: Iterable[complex]) -> "PsdMatrix":
        """u ⊗ u, the matrix u u*"""
        v = np.asarray(list(u) if not isinstance(u, np.ndarray) else u, dtype=np.complex128)
        return cls(HermitianMatrix.from_array(np.outer(v, v.conj())))

    @classmethod
    def zeros(cls, dim: int) -> "PsdMatrix":
        return cls(HermitianMatrix.zeros(dim))

    @classmethod
    def identity(cls, dim: int) -> "PsdMatrix":
        return cls(HermitianMatrix.identity(dim))

    @classmethod
    def unit(cls, i: int, dim: int) -> "PsdMatrix":
        """Matrix unit E_ii"""
        a = np.zeros((dim, dim))
        a[i, i] = 1.0
        return cls(HermitianMatrix.from_array(a))

    @property
    def entries(self) -> np.ndarray:
        return self.base.entries

    @property
    def dim(self) -> int:
        return self.base.dim

    def __add__(self, other: "PsdMatrix") -> "PsdMatrix":
        return PsdMatrix(self.base + other.base)

    def scaled(self, s: float) -> "PsdMatrix":
        if s < 0:
            raise HypothesisError(f"Negative scaling {s} of a PSD matrix")
        return PsdMatrix(self.base.scaled(s))

    def to_json(self) -> Dict[str, Any]:
        return self.base.to_json()

    @classmethod
    def from_json(cls, payload: Dict[str, Any]) -> "PsdMatrix":
        return cls.from_hermitian(HermitianMatrix.from_json(payload))


@dataclass(frozen=True, eq=False)
class BlockDiagonalPsd:
    """Ordered PSD blocks assembled along the diagonal"""

    blocks: tuple
    block_dims: tuple = field(default=())

    def __post_init__(self):
        dims = tuple(b.dim for b in self.blocks)
        if not self.block_dims:
            object.__setattr__(self, "block_dims", dims)
        elif tuple(self.block_dims) != dims:
            raise DimensionMismatchError(f"Block dims {self.block_dims} do not match blocks {dims}")

    @classmethod
    def from_blocks(cls, blocks: List[PsdMatrix]) -> "BlockDiagonalPsd":
        return cls(tuple(blocks))

    @property
    def dim(self) -> int:
        return int(sum(self.block_dims))

    def block(self, j: int) -> PsdMatrix:
        return self.blocks[j]

    def assembled(self) -> PsdMatrix:
        return PsdMatrix(HermitianMatrix(_frozen(scipy.linalg.block_diag(*[b.entries for b in self.blocks]))))


def block_slices(block_dims: Sequence[int]) -> List[slice]:
    """Index ranges of consecutive diagonal blocks"""
    out, start = [], 0
    for d in block_dims:
        out.append(slice(start, start + d))
        start += d
    return out


def extract_block(m: Union[PsdMatrix, np.ndarray], block_dims: Sequence[int], j: int) -> np.ndarray:
    a = m.entries if isinstance(m, PsdMatrix) else m
    s = block_slices(block_dims)[j]
    return a[s, s]
