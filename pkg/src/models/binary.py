"""
Binary selector trees, point sets and separation certificates
"""
import csv
import io
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.spatial.distance

from src.utils.errors import DimensionMismatchError, HypothesisError

Multiset = Dict[int, int]


@dataclass(frozen=True)
class BjSequence:
    """B_0, ..., B_N of B_{j+1} = B_j + 4√(2^j δ B_j) + 2^{j+1} δ"""

    delta: float
    depth: int
    values: Tuple[float, ...]
    partial_sum: float
    leaf_bound: float
    constant: float
    certified: bool
    closed_form_ok: bool

    def to_json(self) -> Dict[str, Any]:
        return {
            "delta": self.delta,
            "depth": self.depth,
            "values": list(self.values),
            "partial_sum": self.partial_sum,
            "leaf_bound": self.leaf_bound,
            "constant": self.constant,
            "certified": self.certified,
            "closed_form_ok": self.closed_form_ok,
        }


@dataclass(frozen=True, eq=False)
class BinarySelectorTree:
    """
    Nodes keyed by binary strings; "" is the root.

    nodes holds every visited node as a multiset of indices, schedule the
    pairs used to split each internal node and deviations the value
    ‖2^|b| Σ_{I_b} T_i − T‖ per node.
    """

    depth: int
    nodes: Dict[str, Multiset]
    leaves: Tuple[str, ...]
    schedule: Dict[str, Tuple[Tuple[int, int], ...]]
    deviations: Dict[str, float]
    bj: Tuple[float, ...]
    complete: bool = True
    phantom_count: int = 0
    methods: Dict[str, str] = field(default_factory=dict)

    @property
    def bound(self) -> float:
        return self.bj[self.depth] - 1.0

    def indices(self, b: str) -> Tuple[int, ...]:
        return tuple(sorted(i for i, c in self.nodes[b].items() if c > 0))

    def leaf_sets(self) -> Dict[str, Tuple[int, ...]]:
        return {b: self.indices(b) for b in self.leaves}

    def to_json(self) -> Dict[str, Any]:
        def node(b: str) -> Dict[str, Any]:
            counts = self.nodes[b]
            payload: Dict[str, Any] = {
                "b": b,
                "indices": list(self.indices(b)),
                "bound": self.bj[len(b)] - 1.0,
                "deviation": self.deviations.get(b),
            }
            if any(c != 1 for c in counts.values()):
                payload["multiplicity"] = {str(i): c for i, c in sorted(counts.items())}
            kids = [b + s for s in "01" if b + s in self.nodes]
            if kids:
                payload["children"] = [node(k) for k in kids]
            return payload

        return {
            "depth": self.depth,
            "complete": self.complete,
            "phantom_count": self.phantom_count,
            "bj": list(self.bj),
            "root": node(""),
        }

    def leaf_rows(self) -> List[Tuple[str, int, float, float]]:
        return [(b, sum(self.nodes[b].values()), self.deviations.get(b, float("nan")), self.bound) for b in self.leaves]

    def leaves_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["b", "size", "deviation", "bound"])
        for b, size, dev, bound in self.leaf_rows():
            writer.writerow([b or "-", size, repr(float(dev)), repr(float(bound))])
        return out.getvalue()


@dataclass(frozen=True, eq=False)
class DoublingPointSet:
    """Finite metric space given by a distance matrix"""

    distances: np.ndarray
    doubling_constant: float = 2.0

    def __post_init__(self):
        d = np.array(self.distances, dtype=float, copy=True)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise DimensionMismatchError(f"Distance matrix must be square, got {d.shape}")
        if np.any(d < 0) or np.any(np.abs(np.diag(d)) > 0) or not np.allclose(d, d.T, atol=1e-12, rtol=0):
            raise HypothesisError("Distances must be symmetric, nonnegative and vanish on the diagonal", reason="not_metric")
        d.setflags(write=False)
        object.__setattr__(self, "distances", d)

    @classmethod
    def from_points(cls, points: Sequence[Sequence[float]], doubling_constant: Optional[float] = None) -> "DoublingPointSet":
        coords = np.asarray(points, dtype=float)
        if coords.ndim == 1:
            coords = coords.reshape(-1, 1)
        dist = scipy.spatial.distance.cdist(coords, coords) if len(coords) else np.zeros((0, 0))
        space = cls(distances=dist)
        if doubling_constant is None:
            doubling_constant = space.empirical_doubling_constant()
        return cls(distances=dist, doubling_constant=doubling_constant)

    @classmethod
    def integer_interval(cls, start: int, stop: int) -> "DoublingPointSet":
        """ℤ ∩ [start, stop) with the usual distance"""
        return cls.from_points(np.arange(start, stop, dtype=float), doubling_constant=3.0)

    @property
    def n(self) -> int:
        return int(self.distances.shape[0])

    def ball(self, x: int, r: float) -> np.ndarray:
        """Indices of the open ball B(x, r)"""
        return np.flatnonzero(self.distances[x] < r)

    def ball_counts(self, r: float) -> np.ndarray:
        return np.sum(self.distances < r, axis=1)

    def sup_ball(self, r: float) -> int:
        return int(np.max(self.ball_counts(r))) if self.n else 0

    def empirical_doubling_constant(self, radii: Optional[Sequence[float]] = None) -> float:
        """max over sampled (x, r) of #B(x, 2r) / #B(x, r)"""
        if self.n < 2:
            return 1.0
        if radii is None:
            positive = np.unique(self.distances[self.distances > 0])
            radii = positive[:: max(1, len(positive) // 16)]
        worst = 1.0
        for r in radii:
            worst = max(worst, float(np.max(self.ball_counts(2 * r) / self.ball_counts(r))))
        return worst

    def satisfies_triangle(self) -> bool:
        d = self.distances
        if self.n > 256:
            return True
        return bool(np.all(d[:, None, :] <= d[:, :, None] + d[None, :, :] + 1e-9))

    def min_distance(self, indices: Sequence[int]) -> float:
        idx = list(indices)
        if len(idx) < 2:
            return math.inf
        sub = self.distances[np.ix_(idx, idx)]
        return float(np.min(sub[~np.eye(len(idx), dtype=bool)]))


@dataclass(frozen=True)
class SeparationCertificate:
    r: float
    min_distance: Dict[str, float]
    phantom_count: int

    @property
    def separated(self) -> bool:
        return all(d >= self.r for d in self.min_distance.values())

    def to_json(self) -> Dict[str, Any]:
        return {
            "r": self.r,
            "min_distance": {b: (None if math.isinf(d) else d) for b, d in self.min_distance.items()},
            "phantom_count": self.phantom_count,
            "separated": self.separated,
        }

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["leaf", "min_dist", "r"])
        for b, d in sorted(self.min_distance.items()):
            writer.writerow([b or "-", "inf" if math.isinf(d) else repr(float(d)), repr(float(self.r))])
        return out.getvalue()


@dataclass(frozen=True, eq=False)
class SeparatedSchedule:
    """Pair partitions per node together with the leaves they produce"""

    tree: BinarySelectorTree
    certificate: SeparationCertificate
    net: Tuple[int, ...]
    cells: Dict[int, Tuple[int, ...]]


@dataclass(frozen=True, eq=False)
class SparsePartition:
    tree: BinarySelectorTree
    separation: SeparationCertificate
    epsilon: float
    delta: float
    deviations: Dict[str, float]

    def to_json(self) -> Dict[str, Any]:
        return {
            "depth": self.tree.depth,
            "leaves": {b: list(ix) for b, ix in self.tree.leaf_sets().items()},
            "deviations": self.deviations,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "separation": self.separation.to_json(),
        }


@dataclass(frozen=True, eq=False)
class SparseRemoval:
    removed: Tuple[int, ...]
    riesz_lower: List[Optional[float]]
    certified_lower: List[float]
    dyadic_lower: float
    formula_lower: float
    partition: Optional[SparsePartition]
    epsilon: float = 0.5

    def to_json(self) -> Dict[str, Any]:
        return {
            "removed": list(self.removed),
            "riesz_lower": self.riesz_lower,
            "certified_lower": self.certified_lower,
            "dyadic_lower": self.dyadic_lower,
            "formula_lower": self.formula_lower,
            "epsilon": self.epsilon,
            "depth": self.partition.tree.depth if self.partition else 0,
            "separation": self.partition.separation.to_json() if self.partition else None,
        }
