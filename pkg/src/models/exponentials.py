"""
Interval unions on the torus, frequency windows and their certificates
"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.utils.errors import HypothesisError


@dataclass(frozen=True)
class IntervalUnion:
    """Finite union of disjoint half-open intervals [a, b) ⊂ [0, 1)"""

    intervals: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        parts = tuple(sorted((float(a), float(b)) for a, b in self.intervals))
        prev = 0.0
        for a, b in parts:
            if not 0.0 <= a < b <= 1.0:
                raise HypothesisError(f"Interval [{a}, {b}) is empty or leaves [0, 1)", reason="invalid_interval")
            if a < prev:
                raise HypothesisError(f"Interval [{a}, {b}) overlaps its predecessor", reason="invalid_interval")
            prev = b
        object.__setattr__(self, "intervals", parts)

    @classmethod
    def of(cls, *pairs: Sequence[float]) -> "IntervalUnion":
        return cls(intervals=tuple((p[0], p[1]) for p in pairs))

    @classmethod
    def from_json(cls, payload: Any) -> "IntervalUnion":
        if isinstance(payload, dict):
            payload = payload["intervals"]
        return cls(intervals=tuple((p[0], p[1]) for p in payload))

    @property
    def measure(self) -> float:
        return float(sum(b - a for a, b in self.intervals))

    @property
    def complement_measure(self) -> float:
        return 1.0 - self.measure

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        inside = np.zeros(x.shape, dtype=bool)
        for a, b in self.intervals:
            inside |= (x >= a) & (x < b)
        return inside

    def grid_points(self, m: int) -> np.ndarray:
        """Indices j with j/m ∈ S"""
        return np.flatnonzero(self.contains(np.arange(m) / m))

    def to_json(self) -> List[List[float]]:
        return [[a, b] for a, b in self.intervals]


@dataclass(frozen=True)
class FrequencySet:
    """Selected integers Λ inside the window [−W, W] ∩ ℤ"""

    window: int
    selected: Tuple[int, ...]

    def __post_init__(self):
        if self.window < 0:
            raise HypothesisError(f"Window half-width must be nonnegative, got {self.window}", reason="invalid_parameter")
        chosen = tuple(sorted(int(k) for k in self.selected))
        if len(set(chosen)) != len(chosen):
            raise HypothesisError("Selected frequencies must be distinct", reason="invalid_parameter")
        if chosen and (chosen[0] < -self.window or chosen[-1] > self.window):
            raise HypothesisError(f"Frequencies {chosen[0]}..{chosen[-1]} leave the window ±{self.window}", reason="outside_window")
        object.__setattr__(self, "selected", chosen)

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(-self.window, self.window + 1)

    @property
    def size(self) -> int:
        return 2 * self.window + 1

    def complement(self) -> Tuple[int, ...]:
        chosen = set(self.selected)
        return tuple(int(k) for k in self.frequencies if k not in chosen)

    def gaps(self) -> List[int]:
        return [b - a for a, b in zip(self.selected, self.selected[1:])]

    @property
    def min_gap(self) -> float:
        g = self.gaps()
        return float(min(g)) if g else math.inf

    @property
    def max_gap(self) -> float:
        g = self.gaps()
        return float(max(g)) if g else 0.0

    def to_json(self) -> Dict[str, Any]:
        return {"window": self.window, "selected": list(self.selected)}


@dataclass(frozen=True)
class ExponentialCertificate:
    """
    Finite-section bounds for one interval union

    The numbers refer to the window's principal Gram submatrix only and
    say nothing about the infinite system.
    """

    lambda_min: float
    lambda_max: float
    target_lo: float
    target_hi: float
    min_gap: float
    r: float
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.target_lo <= self.lambda_min and self.lambda_max <= self.target_hi

    def to_json(self) -> Dict[str, Any]:
        return {
            "lambda_min": self.lambda_min,
            "lambda_max": self.lambda_max,
            "target_lo": self.target_lo,
            "target_hi": self.target_hi,
            "min_gap": None if math.isinf(self.min_gap) else self.min_gap,
            "r": self.r,
            "finite_section": True,
            **self.details,
        }


@dataclass(frozen=True)
class ExponentialSelection:
    """Selected or removed frequencies with one certificate per interval union"""

    frequencies: FrequencySet
    sets: Tuple[IntervalUnion, ...]
    epsilon: Optional[float]
    certificates: Tuple[ExponentialCertificate, ...]
    method: str
    details: Dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> Dict[str, Any]:
        return {
            "frequencies": self.frequencies.to_json(),
            "sets": [s.to_json() for s in self.sets],
            "epsilon": self.epsilon,
            "certificates": [c.to_json() for c in self.certificates],
            "method": self.method,
            **self.details,
        }
