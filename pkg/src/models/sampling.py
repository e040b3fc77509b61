"""
Weighted operator families, sampling results and quadratures
"""
import csv
import io
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.models.frames import VectorSystem
from src.models.linalg import PsdMatrix
from src.utils.errors import DimensionMismatchError, HypothesisError


@dataclass(frozen=True, eq=False)
class WeightedOperatorFamily:
    """T = Σ a_i T_i with tr T_i ≤ δ"""

    operators: Tuple[PsdMatrix, ...]
    weights: Tuple[float, ...]
    trace_cap: Optional[float] = None

    def __post_init__(self):
        if not self.operators:
            raise HypothesisError("A weighted family needs at least one operator", reason="empty_family")
        if len(self.operators) != len(self.weights):
            raise DimensionMismatchError(f"{len(self.operators)} operators but {len(self.weights)} weights")
        if len({t.dim for t in self.operators}) != 1:
            raise DimensionMismatchError("Operators of a weighted family must share one dimension")
        if any(not w > 0 for w in self.weights):
            raise HypothesisError(f"Weights must be positive, got {list(self.weights)}", reason="nonpositive_weight")
        top = max(float(np.real(np.trace(t.entries))) for t in self.operators)
        if self.trace_cap is None:
            object.__setattr__(self, "trace_cap", top)
        elif top > self.trace_cap + 1e-9:
            raise HypothesisError(f"Largest trace {top:.6g} exceeds δ = {self.trace_cap:.6g}", reason="trace_bound")

    @property
    def dim(self) -> int:
        return self.operators[0].dim

    def total(self) -> np.ndarray:
        return sum((w * t.entries for t, w in zip(self.operators, self.weights)), np.zeros((self.dim, self.dim), dtype=np.complex128))


@dataclass(frozen=True, eq=False)
class SamplingResult:
    """
    Multiset of sampled indices with the scaling a.

    deviation is ‖(1/a)·Σ_samples T − T‖; bracket holds the interval the
    recorded c0 puts around a.
    """

    samples: Dict[int, int]
    a: float
    c0: float
    deviation: float
    epsilon: float
    delta: float
    depth: int
    level: int
    bracket: Tuple[float, float]
    scale: float = 1.0
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return sum(self.samples.values())

    def in_bracket(self, tol: float = 0.0) -> bool:
        lo, hi = self.bracket
        return lo * (1 - tol) <= self.a <= hi * (1 + tol)

    def to_json(self) -> Dict[str, Any]:
        return {
            "samples": [{"index": i, "multiplicity": m} for i, m in sorted(self.samples.items())],
            "a": self.a,
            "c0": self.c0,
            "deviation": self.deviation,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "depth": self.depth,
            "level": self.level,
            "bracket": list(self.bracket),
            "scale": self.scale,
            **self.details,
        }


@dataclass(frozen=True)
class SplitCheck:
    gamma1: float
    gamma2: float
    max_violation: float

    def to_json(self) -> Dict[str, Any]:
        return {"gamma1": self.gamma1, "gamma2": self.gamma2, "max_violation": self.max_violation}


@dataclass(frozen=True, eq=False)
class Quadrature:
    """Finitely supported continuous frame: points t_i, weights μ_i and vectors ψ(t_i)"""

    points: Tuple[float, ...]
    weights: Tuple[float, ...]
    vectors: VectorSystem

    def __post_init__(self):
        if not (len(self.points) == len(self.weights) == self.vectors.n):
            raise DimensionMismatchError(
                f"{len(self.points)} points, {len(self.weights)} weights and {self.vectors.n} vectors"
            )

    @property
    def n(self) -> int:
        return len(self.points)

    def frame_operator(self) -> np.ndarray:
        v = self.vectors.vectors
        return (v.T * np.asarray(self.weights)) @ v.conj()

    @classmethod
    def from_csv(cls, text: str) -> "Quadrature":
        """Rows t, weight, re_1, im_1, ..., re_d, im_d"""
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].lstrip().startswith("#")]
        if rows and not _is_number(rows[0][0]):
            rows = rows[1:]
        if not rows:
            raise HypothesisError("Quadrature CSV has no rows", reason="empty_family")
        width = len(rows[0])
        if width < 4 or width % 2:
            raise DimensionMismatchError(f"Quadrature rows need t, weight and re/im pairs, got {width} columns")
        data = np.asarray([[float(x) for x in r] for r in rows])
        comps = data[:, 2::2] + 1j * data[:, 3::2]
        return cls(points=tuple(data[:, 0]), weights=tuple(data[:, 1]), vectors=VectorSystem(dim=comps.shape[1], vectors=comps))

    def to_json(self) -> Dict[str, Any]:
        return {"points": list(self.points), "weights": list(self.weights), "vectors": self.vectors.to_json()}

    @classmethod
    def from_json(cls, payload: Dict[str, Any]) -> "Quadrature":
        return cls(
            points=tuple(float(t) for t in payload["points"]),
            weights=tuple(float(w) for w in payload["weights"]),
            vectors=VectorSystem.from_json(payload["vectors"]),
        )


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


@dataclass(frozen=True, eq=False)
class DiscretizedFrame:
    """Sample points with multiplicities and the frame bounds of the sampled system"""

    sampling: SamplingResult
    points: Tuple[float, ...]
    lower: float
    upper: float
    continuous_bounds: Tuple[float, float]

    @property
    def promised(self) -> Tuple[float, float]:
        a_lo, a_hi = self.continuous_bounds
        eps, a = self.sampling.epsilon, self.sampling.a
        return (a_lo - eps) * a, (a_hi + eps) * a

    def sample_points(self) -> List[float]:
        return [self.points[i] for i, m in sorted(self.sampling.samples.items()) for _ in range(m)]

    def to_json(self) -> Dict[str, Any]:
        lo, hi = self.promised
        return {
            "sampling": self.sampling.to_json(),
            "support": [{"t": self.points[i], "multiplicity": m} for i, m in sorted(self.sampling.samples.items())],
            "lower": self.lower,
            "upper": self.upper,
            "continuous_bounds": list(self.continuous_bounds),
            "promised": [lo, hi],
        }
