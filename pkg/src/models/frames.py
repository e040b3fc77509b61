"""
Finite vector systems and their frame data
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.utils.errors import DimensionMismatchError


@dataclass(frozen=True, eq=False)
class VectorSystem:
    """n vectors in C^d stored as the rows of an n×d array"""

    dim: int
    vectors: np.ndarray

    def __post_init__(self):
        arr = np.array(self.vectors, dtype=np.complex128, copy=True)
        if self.dim == 0:
            arr = np.zeros((arr.shape[0] if arr.ndim else 0, 0), dtype=np.complex128)
        elif arr.size == 0:
            arr = np.zeros((0, self.dim), dtype=np.complex128)
        if arr.ndim != 2 or arr.shape[1] != self.dim:
            raise DimensionMismatchError(f"Vectors of shape {arr.shape} in a system of dimension {self.dim}")
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[complex]], dim: Optional[int] = None) -> "VectorSystem":
        arr = np.asarray(rows, dtype=np.complex128)
        if dim is None:
            if arr.ndim != 2:
                raise DimensionMismatchError("Cannot infer the dimension of an empty system")
            dim = arr.shape[1]
        if arr.size == 0:
            arr = np.zeros((0, dim), dtype=np.complex128)
        return cls(dim=dim, vectors=arr)

    @property
    def n(self) -> int:
        return int(self.vectors.shape[0])

    def norms_squared(self) -> np.ndarray:
        return np.sum(np.abs(self.vectors) ** 2, axis=1)

    def subsystem(self, indices: Sequence[int]) -> "VectorSystem":
        return VectorSystem(dim=self.dim, vectors=self.vectors[list(indices)].reshape(len(indices), self.dim))

    def scaled(self, factors) -> "VectorSystem":
        f = np.asarray(factors, dtype=float).reshape(-1, 1) if np.ndim(factors) else float(factors)
        return VectorSystem(dim=self.dim, vectors=self.vectors * f)

    def to_json(self) -> Dict[str, Any]:
        return {
            "dim": self.dim,
            "vectors": [{"re": v.real.tolist(), "im": v.imag.tolist()} for v in self.vectors],
        }

    @classmethod
    def from_json(cls, payload: Dict[str, Any]) -> "VectorSystem":
        d = int(payload["dim"])
        rows = [np.asarray(v["re"], dtype=float) + 1j * np.asarray(v.get("im") or [0.0] * d, dtype=float) for v in payload["vectors"]]
        return cls(dim=d, vectors=np.array(rows).reshape(len(rows), d))


@dataclass(frozen=True)
class FrameBounds:
    bessel: float
    riesz_lower: float
    riesz_upper: float

    def to_json(self) -> Dict[str, Any]:
        return {"bessel": self.bessel, "riesz_lower": self.riesz_lower, "riesz_upper": self.riesz_upper}


@dataclass(frozen=True, eq=False)
class NaimarkPair:
    original: VectorSystem
    complement: VectorSystem


@dataclass(frozen=True)
class DualityCheck:
    riesz_lower: float
    bessel: float

    @property
    def residual(self) -> float:
        return abs(self.riesz_lower - (1.0 - self.bessel))


@dataclass(frozen=True)
class FeichtingerPlan:
    """Block-size plan of the Feichtinger selector"""

    eps: Tuple[float, ...]
    delta0: float
    r: int
    constant: float
    two_stage: bool
    chunk: int = 1
    chunks_per_block: int = 1

    @property
    def block_size(self) -> int:
        return self.r if not self.two_stage else self.chunk * self.chunks_per_block

    def to_json(self) -> Dict[str, Any]:
        return {
            "eps": list(self.eps),
            "delta0": self.delta0,
            "r": self.r,
            "constant": self.constant,
            "two_stage": self.two_stage,
            "chunk": self.chunk,
            "chunks_per_block": self.chunks_per_block,
            "block_size": self.block_size,
        }


@dataclass(frozen=True)
class REpsPlan:
    """
    Block plan of the (1 ± ε) Riesz selector.

    r is the block size the existence statement asks for; the pipeline
    itself only consumes chunk * chunks_per_block elements of each block.
    """

    eps: Tuple[float, ...]
    epsilon: float
    constant: float
    r: float
    chunk: int
    chunks_per_block: int
    stage_one: bool

    @property
    def block_size(self) -> int:
        return self.chunk * self.chunks_per_block

    def to_json(self) -> Dict[str, Any]:
        return {
            "eps": list(self.eps),
            "epsilon": self.epsilon,
            "constant": self.constant,
            "r": self.r,
            "chunk": self.chunk,
            "chunks_per_block": self.chunks_per_block,
            "stage_one": self.stage_one,
            "block_size": self.block_size,
        }


@dataclass(frozen=True, eq=False)
class MultiPaving:
    parts: Tuple[Tuple[int, ...], ...]
    bessel: List[List[float]]
    promised: float
    details: Dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> Dict[str, Any]:
        return {
            "parts": [list(p) for p in self.parts],
            "bessel": self.bessel,
            "promised": self.promised,
            "details": self.details,
        }
