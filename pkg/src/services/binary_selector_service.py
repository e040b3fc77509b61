"""
Iterated two-sided selectors and the bound recursion behind them
"""
import functools
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.config import settings
from src.models.binary import BinarySelectorTree, BjSequence, Multiset
from src.models.linalg import PsdMatrix
from src.models.selection import SelectorInstance
from src.services.linalg_service import LinalgService
from src.services.selector_service import SelectorService
from src.utils.errors import DimensionMismatchError, HypothesisError, SelectionFailedError
from src.utils.parallel import ordered_map
from src.utils.validators import validate_pair_partition, validate_shared_dimension, validate_sum_below_identity

logger = logging.getLogger(__name__)

Pair = Tuple[int, int]
DescendPolicy = Callable[[int, str, Dict[str, Multiset]], int]
StopPredicate = Callable[[int, Dict[str, Multiset]], bool]

CLOSED_FORM_RATE = 6 * (2 + math.sqrt(2))
GRID_LEVELS = range(2, 25)
CONSTANT_MARGIN = 1.1


class PairSupplier:
    """
    Chooses the pair-partition that splits a node.

    Elements a supplier adds to make a set even are phantoms: they get
    negative ids from new_phantom() and carry zero operators.
    """

    def __init__(self):
        self._last_phantom = 0

    def new_phantom(self) -> int:
        self._last_phantom -= 1
        return self._last_phantom

    def start_level(self, level: int, frontier: Dict[str, Multiset]) -> None:
        """Called once per level before any node of that level is split"""

    def __call__(self, level: int, b: str, items: Tuple[int, ...]) -> Sequence[Pair]:
        raise NotImplementedError


class ConsecutivePairSupplier(PairSupplier):
    """(i0, i1), (i2, i3), ... with a phantom after an odd tail"""

    def __call__(self, level: int, b: str, items: Tuple[int, ...]) -> Sequence[Pair]:
        ordered = list(items)
        if len(ordered) % 2:
            ordered.append(self.new_phantom())
        return [(ordered[k], ordered[k + 1]) for k in range(0, len(ordered), 2)]


class _CallableSupplier(PairSupplier):
    def __init__(self, fn: Callable[[int, str, Tuple[int, ...]], Sequence[Pair]]):
        super().__init__()
        self._fn = fn

    def __call__(self, level: int, b: str, items: Tuple[int, ...]) -> Sequence[Pair]:
        return self._fn(level, b, items)


def _bj_values(delta: float, depth: int) -> List[float]:
    values = [1.0]
    for j in range(depth):
        b = values[-1]
        values.append(b + 4 * math.sqrt(2 ** j * delta * b) + 2 ** (j + 1) * delta)
    return values


@functools.lru_cache(maxsize=None)
def _numer_constant() -> float:
    worst = 0.0
    for k in GRID_LEVELS:
        delta = 2.0 ** -k
        for n in range(1, k):
            values = _bj_values(delta, n)
            partial = sum(b - 1.0 for b in values[:n])
            worst = max(worst, max(partial, values[n] - 1.0) / math.sqrt(2 ** n * delta))
    return worst * CONSTANT_MARGIN


def _closed_form_ok(values: Sequence[float], delta: float) -> bool:
    for k, b in enumerate(values):
        x = CLOSED_FORM_RATE * math.sqrt(2 ** k * delta)
        if b > math.exp(x) * (1 + settings.TOL_EQ):
            return False
        if x <= 1 and b - 1.0 > 2 * x + settings.TOL_EQ:
            return False
    return True


class BinarySelectorService:
    """Service for binary selector trees"""

    @staticmethod
    def derive_numer_constant() -> float:
        """
        Absolute constant C with Σ_{j<N}(B_j − 1) and B_N − 1 ≤ C√(2^N δ)

        The supremum of the ratio over δ = 2^{−k} (k = 2..24) and every
        admissible N, enlarged by 10%.
        """
        return _numer_constant()

    @staticmethod
    def bj_sequence(delta: float, depth: int) -> BjSequence:
        """
        B_0 = 1, B_{j+1} = B_j + 4√(2^j δ B_j) + 2^{j+1} δ

        Args:
            delta: trace cap δ ≥ 0
            depth: N with 2^N δ < 1

        Returns:
            BjSequence with the values, Σ_{j<N}(B_j − 1), the leaf bound
            B_N − 1 and whether both fit under C√(2^N δ)

        Raises:
            HypothesisError: If δ < 0, N < 0 or N > 0 with 2^N δ ≥ 1
        """
        if delta < 0 or depth < 0 or int(depth) != depth:
            raise HypothesisError(f"Need δ ≥ 0 and an integer N ≥ 0, got δ={delta}, N={depth}", reason="invalid_parameter")
        depth = int(depth)
        if depth > 0 and 2 ** depth * delta >= 1:
            raise HypothesisError(
                f"Depth {depth} is too large for δ = {delta:.6g}: 2^N δ = {2 ** depth * delta:.6g} ≥ 1",
                reason="depth_too_large",
            )
        values = _bj_values(delta, depth)
        partial = sum(b - 1.0 for b in values[:depth])
        leaf = values[depth] - 1.0
        constant = _numer_constant()
        ceiling = constant * math.sqrt(2 ** depth * delta)
        return BjSequence(
            delta=float(delta),
            depth=depth,
            values=tuple(values),
            partial_sum=partial,
            leaf_bound=leaf,
            constant=constant,
            certified=max(partial, leaf) <= ceiling + settings.TOL_ROOT,
            closed_form_ok=_closed_form_ok(values, delta),
        )

    @staticmethod
    def sse_depth(delta: float, epsilon: float) -> Optional[int]:
        """Largest N with B_N − 1 ≤ ε and 2^N δ < 1; None when δ = 0 leaves N unbounded"""
        if delta <= 0:
            return None
        n = 0
        b = 1.0
        while 2 ** (n + 1) * delta < 1:
            nxt = b + 4 * math.sqrt(2 ** n * delta * b) + 2 ** (n + 1) * delta
            if nxt - 1.0 > epsilon:
                break
            b = nxt
            n += 1
        return n

    @staticmethod
    def iterate_ks2(
        operators: Sequence[PsdMatrix],
        depth: int,
        partition_supplier: Union[PairSupplier, Callable, None] = None,
        delta: Optional[float] = None,
        multiplicities: Optional[Sequence[int]] = None,
        descend: Optional[DescendPolicy] = None,
        stop: Optional[StopPredicate] = None,
        threads: Optional[int] = None,
    ) -> BinarySelectorTree:
        """
        Split the index multiset N times with the two-sided selector.

        A node b at level j holding I_b is split by applying the two-sided
        selector to (2^j/β)·T_i, β = max(B_j, ‖2^j Σ_{I_b} T_i‖), over the
        supplier's pair-partition. Indices present with even multiplicity
        are split evenly; only the odd leftovers are paired.

        Args:
            operators: T_i with Σ m_i T_i ⪯ I
            depth: N with 2^N δ < 1
            partition_supplier: PairSupplier or callable (level, b, items) -> pairs
            delta: trace cap; defaults to the largest trace
            multiplicities: m_i copies of T_i, default 1
            descend: (level, b, children) -> 0 or 1; expands only that child
            stop: (level, frontier) -> bool, checked before each level

        Returns:
            BinarySelectorTree whose nodes all satisfy
            ‖2^|b| Σ_{I_b} T_i − T‖ ≤ B_|b| − 1

        Raises:
            HypothesisError: On violated hypotheses or a malformed pair-partition
            SelectionFailedError: If a node misses its deviation bound
        """
        ops = list(operators)
        if not ops:
            raise HypothesisError("iterate_ks2 needs at least one operator", reason="empty_family")
        d = validate_shared_dimension(ops)
        mult = [1] * len(ops) if multiplicities is None else [int(m) for m in multiplicities]
        if len(mult) != len(ops) or any(m < 0 for m in mult):
            raise DimensionMismatchError(f"{len(mult)} multiplicities for {len(ops)} operators")
        entries = np.stack([t.entries for t in ops])
        total = np.einsum("i,ijk->jk", np.asarray(mult, dtype=float), entries)
        validate_sum_below_identity(total)
        traces = [LinalgService.trace(t) for t, m in zip(ops, mult) if m > 0]
        top = max(traces, default=0.0)
        if delta is None:
            delta = top
        elif top > delta + settings.TOL_EQ:
            raise HypothesisError(f"Largest trace {top:.6g} exceeds δ = {delta:.6g}", reason="trace_bound")
        bj = BinarySelectorService.bj_sequence(delta, depth).values
        supplier = partition_supplier if isinstance(partition_supplier, PairSupplier) else (
            _CallableSupplier(partition_supplier) if partition_supplier is not None else ConsecutivePairSupplier()
        )

        nodes: Dict[str, Multiset] = {"": {i: m for i, m in enumerate(mult) if m > 0}}
        frontier = [""]
        schedule: Dict[str, Tuple[Pair, ...]] = {}
        methods: Dict[str, str] = {}
        phantoms = 0
        reached = 0
        for level in range(depth):
            view = {b: nodes[b] for b in frontier}
            if stop is not None and stop(level, view):
                break
            supplier.start_level(level, view)
            tasks = []
            for b in frontier:
                odd = tuple(sorted(i for i, c in nodes[b].items() if c % 2))
                pairs = tuple((int(x), int(y)) for x, y in supplier(level, b, odd)) if odd else ()
                phantoms += _check_schedule(odd, pairs)
                schedule[b] = pairs
                tasks.append((b, pairs))

            def split(task):
                b, pairs = task
                return _split(entries, nodes[b], pairs, level, bj[level], delta, d)

            results = ordered_map(split, tasks, threads)
            next_frontier = []
            for (b, _), (child0, child1, method) in zip(tasks, results):
                methods[b] = method
                nodes[b + "0"], nodes[b + "1"] = child0, child1
                if descend is None:
                    next_frontier += [b + "0", b + "1"]
                else:
                    k = descend(level, b, {b + "0": child0, b + "1": child1})
                    if k not in (0, 1):
                        raise HypothesisError(f"descend policy returned {k!r}, expected 0 or 1", reason="invalid_parameter")
                    next_frontier.append(b + str(k))
            frontier = next_frontier
            reached = level + 1
            logger.debug("level %d split into %d nodes", reached, len(frontier))

        def deviation(b: str) -> float:
            counts = nodes[b]
            part = sum((c * entries[i] for i, c in counts.items()), np.zeros((d, d), dtype=np.complex128))
            return LinalgService.operator_norm(2 ** len(b) * part - total)

        keys = list(nodes)
        deviations = dict(zip(keys, ordered_map(deviation, keys, threads)))
        for b, dev in deviations.items():
            bound = bj[len(b)] - 1.0
            if dev > bound + settings.TOL_ROOT:
                raise SelectionFailedError(f"Node '{b}' deviates by {dev:.6g} > B_{len(b)} − 1 = {bound:.6g}", node=b)
        return BinarySelectorTree(
            depth=reached,
            nodes=nodes,
            leaves=tuple(frontier),
            schedule=schedule,
            deviations=deviations,
            bj=tuple(bj[: reached + 1]),
            complete=descend is None,
            phantom_count=phantoms,
            methods=methods,
        )


def _check_schedule(items: Tuple[int, ...], pairs: Tuple[Pair, ...]) -> int:
    """Validate a supplied pair-partition of items; returns the number of phantoms"""
    flat = [x for p in pairs for x in p]
    validate_pair_partition(flat, pairs)
    real = sorted(x for x in flat if x >= 0)
    if real != list(items):
        raise HypothesisError("Supplied pairs do not partition the node", reason="not_pair_partition")
    return len(flat) - len(real)


def _split(
    entries: np.ndarray,
    counts: Multiset,
    pairs: Tuple[Pair, ...],
    level: int,
    b_level: float,
    delta: float,
    d: int,
) -> Tuple[Multiset, Multiset, str]:
    child0 = {i: c // 2 for i, c in counts.items() if c // 2}
    child1 = dict(child0)
    if not pairs:
        return child0, child1, "even"
    node_sum = sum((c * entries[i] for i, c in counts.items()), np.zeros((d, d), dtype=np.complex128))
    beta = max(b_level, LinalgService.lambda_max(2 ** level * node_sum))
    scale = 2 ** level / beta
    zero = PsdMatrix.zeros(d)
    operators = {x: (PsdMatrix.assume_psd(scale * entries[x]) if x >= 0 else zero) for p in pairs for x in p}
    instance = SelectorInstance(
        ground=tuple(x for p in pairs for x in p),
        operators=operators,
        blocks=pairs,
        epsilon=scale * delta,
    )
    cert = SelectorService.ks2_select(instance)
    chosen = set(cert.selected)
    for x, y in pairs:
        first, second = (x, y) if x in chosen else (y, x)
        if first >= 0:
            child0[first] = child0.get(first, 0) + 1
        if second >= 0:
            child1[second] = child1.get(second, 0) + 1
    return child0, child1, cert.method


bj_sequence = BinarySelectorService.bj_sequence
derive_numer_constant = BinarySelectorService.derive_numer_constant
sse_depth = BinarySelectorService.sse_depth
iterate_ks2 = BinarySelectorService.iterate_ks2
