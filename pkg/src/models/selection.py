"""
Random PSD families, selector instances and certificates
"""
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.models.linalg import PsdMatrix
from src.models.polynomial import RealPolynomial
from src.utils.errors import DimensionMismatchError, HypothesisError


@dataclass(frozen=True, eq=False)
class FiniteRandomPsd:
    """Finitely supported distribution over PSD matrices"""

    outcomes: Tuple[Tuple[PsdMatrix, float], ...]

    def __post_init__(self):
        if not self.outcomes:
            raise HypothesisError("A random matrix needs at least one outcome")
        dims = {m.dim for m, _ in self.outcomes}
        if len(dims) != 1:
            raise DimensionMismatchError(f"Outcomes have mixed dimensions {sorted(dims)}")
        probs = [p for _, p in self.outcomes]
        if any(p <= 0 or p > 1 for p in probs):
            raise HypothesisError(f"Probabilities must lie in (0, 1], got {probs}")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise HypothesisError(f"Probabilities sum to {sum(probs)!r}, not 1")

    @classmethod
    def uniform(cls, matrices: Sequence[PsdMatrix]) -> "FiniteRandomPsd":
        p = 1.0 / len(matrices)
        return cls(tuple((m, p) for m in matrices))

    @classmethod
    def deterministic(cls, matrix: PsdMatrix) -> "FiniteRandomPsd":
        return cls(((matrix, 1.0),))

    @property
    def dim(self) -> int:
        return self.outcomes[0][0].dim

    @property
    def support(self) -> int:
        return len(self.outcomes)

    def matrix(self, k: int) -> PsdMatrix:
        return self.outcomes[k][0]

    def mean(self) -> np.ndarray:
        return sum(p * m.entries for m, p in self.outcomes)


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def sha256_of(payload: Any) -> str:
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


@dataclass(frozen=True, eq=False)
class SelectorInstance:
    """
    Ground set, operators T_i, disjoint blocks J_k and trace bounds.

    block_dims is set when every operator is block diagonal with the
    given diagonal block sizes; block_eps then holds one ε_j per block.
    """

    ground: Tuple[int, ...]
    operators: Dict[int, PsdMatrix]
    blocks: Tuple[Tuple[int, ...], ...]
    epsilon: float
    block_eps: Optional[Tuple[float, ...]] = None
    block_dims: Optional[Tuple[int, ...]] = None

    @property
    def dim(self) -> int:
        return next(iter(self.operators.values())).dim

    def total(self) -> np.ndarray:
        return sum(self.operators[i].entries for i in self.ground)

    def to_json(self) -> Dict[str, Any]:
        return {
            "ground": list(self.ground),
            "operators": {str(i): self.operators[i].to_json() for i in self.ground},
            "blocks": [list(b) for b in self.blocks],
            "epsilon": self.epsilon,
            "block_eps": list(self.block_eps) if self.block_eps is not None else None,
            "block_dims": list(self.block_dims) if self.block_dims is not None else None,
        }

    @classmethod
    def from_json(cls, payload: Dict[str, Any]) -> "SelectorInstance":
        return cls(
            ground=tuple(int(i) for i in payload["ground"]),
            operators={int(k): PsdMatrix.from_json(v) for k, v in payload["operators"].items()},
            blocks=tuple(tuple(int(i) for i in b) for b in payload["blocks"]),
            epsilon=float(payload["epsilon"]),
            block_eps=tuple(payload["block_eps"]) if payload.get("block_eps") is not None else None,
            block_dims=tuple(payload["block_dims"]) if payload.get("block_dims") is not None else None,
        )

    def hash(self) -> str:
        digest = hashlib.sha256()
        digest.update(canonical_json({
            "ground": list(self.ground),
            "blocks": [list(b) for b in self.blocks],
            "epsilon": self.epsilon,
            "block_eps": list(self.block_eps) if self.block_eps is not None else None,
            "block_dims": list(self.block_dims) if self.block_dims is not None else None,
        }).encode("utf-8"))
        for i in self.ground:
            digest.update(np.ascontiguousarray(self.operators[i].entries).tobytes())
        return digest.hexdigest()


@dataclass(frozen=True, eq=False)
class GreedySelection:
    assignment: Tuple[int, ...]
    witness: RealPolynomial
    method: str
    step_maxroots: Tuple[float, ...] = ()
    initial_maxroot: Optional[float] = None


@dataclass(frozen=True, eq=False)
class ExhaustiveResult:
    assignment: Tuple[int, ...]
    maxroot: float
    witness: RealPolynomial


@dataclass(frozen=True, eq=False)
class SelectorCertificate:
    """Selected set J with achieved versus promised bounds"""

    selected: Tuple[int, ...]
    achieved_norm: Any
    promised_bound: Any
    bound_formula: str
    witness_polynomial: RealPolynomial
    instance_hash: str
    method: str = "interlacing"
    witness_kind: str = "mixed_characteristic"
    details: Dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> Dict[str, Any]:
        return {
            "selected": list(self.selected),
            "achieved_norm": self.achieved_norm,
            "promised_bound": self.promised_bound,
            "bound_formula": self.bound_formula,
            "witness_polynomial": self.witness_polynomial.to_json(),
            "witness_kind": self.witness_kind,
            "instance_hash": self.instance_hash,
            "method": self.method,
            "details": self.details,
        }


@dataclass(frozen=True, eq=False)
class PartitionResult:
    parts: Tuple[Tuple[int, ...], ...]
    achieved: List[Any]
    promised: List[Any]
    certificate: Optional[SelectorCertificate] = None
