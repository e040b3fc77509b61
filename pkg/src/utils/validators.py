"""
Validation utilities
"""
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.config import settings
from src.models.linalg import PsdMatrix, extract_block
from src.services.linalg_service import LinalgService
from src.utils.errors import DimensionMismatchError, HypothesisError


def validate_shared_dimension(mats: Iterable[PsdMatrix]) -> int:
    """
    Check that all matrices share one dimension

    Returns:
        The shared dimension

    Raises:
        DimensionMismatchError: If dimensions differ or the family is empty
    """
    dims = {m.dim for m in mats}
    if len(dims) != 1:
        raise DimensionMismatchError(f"Expected one shared dimension, got {sorted(dims)}")
    return dims.pop()


def validate_blocks(ground: Sequence[int], blocks: Sequence[Sequence[int]]) -> None:
    """
    Check that blocks are pairwise disjoint subsets of the ground set

    Raises:
        HypothesisError: If a block leaves the ground set or two blocks overlap
    """
    universe = set(ground)
    seen: set = set()
    for k, block in enumerate(blocks):
        for i in block:
            if i not in universe:
                raise HypothesisError(f"Block {k} contains index {i} outside the ground set", reason="block_outside_ground")
            if i in seen:
                raise HypothesisError(f"Index {i} appears in more than one block", reason="blocks_not_disjoint")
            seen.add(i)


def validate_block_sizes(blocks: Sequence[Sequence[int]], r: int) -> None:
    for k, block in enumerate(blocks):
        if len(block) < r:
            raise HypothesisError(
                f"Block {k} has {len(block)} elements, fewer than the required {r}",
                reason="block_too_small",
                block=k,
                required=r,
            )


def validate_pair_partition(ground: Sequence[int], blocks: Sequence[Sequence[int]]) -> None:
    """
    Check that blocks partition the ground set into 2-element sets

    Raises:
        HypothesisError: If some block is not a pair or the pairs miss indices
    """
    validate_blocks(ground, blocks)
    if any(len(b) != 2 for b in blocks):
        raise HypothesisError("Blocks must all be pairs", reason="not_pair_partition")
    covered = {i for b in blocks for i in b}
    if covered != set(ground):
        raise HypothesisError("Pairs do not cover the ground set", reason="not_pair_partition")


def validate_trace_cap(operators: Dict[int, PsdMatrix], epsilon: float, tol: Optional[float] = None) -> None:
    tol = settings.TOL_EQ if tol is None else tol
    for i, t in operators.items():
        tr = LinalgService.trace(t)
        if tr > epsilon + tol:
            raise HypothesisError(f"tr T_{i} = {tr:.6g} exceeds the trace bound {epsilon:.6g}", reason="trace_bound", index=i)


def validate_block_trace_caps(
    operators: Dict[int, PsdMatrix], block_dims: Sequence[int], block_eps: Sequence[float], tol: Optional[float] = None
) -> None:
    tol = settings.TOL_EQ if tol is None else tol
    if len(block_dims) != len(block_eps):
        raise DimensionMismatchError(f"{len(block_dims)} blocks but {len(block_eps)} trace bounds")
    for i, t in operators.items():
        for j, eps in enumerate(block_eps):
            tr = float(np.real(np.trace(extract_block(t, block_dims, j))))
            if tr > eps + tol:
                raise HypothesisError(
                    f"tr T_{i} on block {j} = {tr:.6g} exceeds ε_{j} = {eps:.6g}", reason="trace_bound", index=i, block=j
                )


def validate_sum_below_identity(total: np.ndarray, tol: Optional[float] = None, what: str = "Σ T_i") -> None:
    """
    Check Σ T_i ⪯ I

    Raises:
        HypothesisError: If the largest eigenvalue of the sum exceeds 1 + tol
    """
    tol = settings.TOL_EQ if tol is None else tol
    top = LinalgService.lambda_max(total)
    if top > 1.0 + tol:
        raise HypothesisError(f"{what} has norm {top:.6g} > 1", reason="sum_exceeds_identity")


def validate_positive_int(value: int, name: str, minimum: int = 1) -> int:
    if int(value) != value or value < minimum:
        raise HypothesisError(f"{name} must be an integer ≥ {minimum}, got {value}", reason="invalid_parameter")
    return int(value)


def validate_unit_interval(value: float, name: str, closed_right: bool = False) -> float:
    ok = 0 < value <= 1 if closed_right else 0 < value < 1
    if not ok:
        raise HypothesisError(f"{name} must lie in (0, 1{']' if closed_right else ')'}, got {value}", reason="invalid_parameter")
    return float(value)


def pairs_consecutive(indices: Sequence[int]) -> List[Tuple[int, ...]]:
    """Pair sorted indices as (i0, i1), (i2, i3), ...; an odd tail stays a singleton"""
    ordered = list(indices)
    return [tuple(ordered[k:k + 2]) for k in range(0, len(ordered), 2)]
