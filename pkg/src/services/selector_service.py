"""
Derandomized interlacing selection and the Weaver-type selectors built on it
"""
import itertools
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from src.config import settings
from src.models.linalg import BlockDiagonalPsd, PsdMatrix, block_slices
from src.models.polynomial import RealPolynomial
from src.models.selection import (
    ExhaustiveResult,
    FiniteRandomPsd,
    GreedySelection,
    PartitionResult,
    SelectorCertificate,
    SelectorInstance,
)
from src.services.linalg_service import LinalgService
from src.services.mcp_service import (
    McpService,
    characteristic_polynomial,
    is_rank_at_most_one,
    subset_work,
)
from src.utils.errors import BudgetExceededError, HypothesisError, SelectionFailedError
from src.utils.parallel import ordered_map
from src.utils.validators import (
    validate_block_sizes,
    validate_block_trace_caps,
    validate_blocks,
    validate_pair_partition,
    validate_positive_int,
    validate_sum_below_identity,
    validate_trace_cap,
)

logger = logging.getLogger(__name__)

INTERLACING = "interlacing"
BARRIER = "barrier"


class _ExactEvaluator:
    """
    Evaluates μ[fixed..., E X_{i+1}, ..., E X_m] exactly.

    Rank-one families average characteristic polynomials over the joint
    outcomes of the unfixed variables; other families use the subset form
    on the expectations. The cheaper route is taken.
    """

    def __init__(self, family: Sequence[FiniteRandomPsd]):
        self.family = list(family)
        self.dim = family[0].dim
        self.means = [x.mean() for x in family]
        self._rank_one: Optional[bool] = None

    @property
    def rank_one(self) -> bool:
        if self._rank_one is None:
            self._rank_one = all(is_rank_at_most_one(m.entries) for x in self.family for m, _ in x.outcomes)
        return self._rank_one

    def cost(self, step: int) -> float:
        rest = self.family[step + 1:]
        subset = subset_work(len(self.family), self.dim)
        enum = float(np.prod([float(x.support) for x in rest])) * self.dim ** 3 if rest else float(self.dim ** 3)
        if enum >= subset or not self.rank_one:
            return subset
        return enum

    def evaluate(self, fixed: List[np.ndarray], step: int) -> RealPolynomial:
        rest = self.family[step + 1:]
        base = sum(fixed) if fixed else np.zeros((self.dim, self.dim), dtype=np.complex128)
        if self.rank_one:
            enum = float(np.prod([x.support for x in rest])) if rest else 1.0
            if enum * self.dim ** 3 <= subset_work(len(self.family), self.dim):
                if not rest:
                    return characteristic_polynomial(base)
                total = np.zeros(self.dim + 1)
                for choice in itertools.product(*[range(x.support) for x in rest]):
                    p = 1.0
                    s = base
                    for x, k in zip(rest, choice):
                        m, pk = x.outcomes[k]
                        s = s + m.entries
                        p *= pk
                    total += p * characteristic_polynomial(s).array
                return RealPolynomial.from_coeffs(total)
        mats = list(fixed) + self.means[step + 1:]
        return McpService.mcp(mats, dim=self.dim, budget=float("inf"))


def _outcomes_identical(x: FiniteRandomPsd) -> bool:
    first = x.matrix(0).entries
    return all(np.allclose(m.entries, first, atol=1e-14, rtol=0) for m, _ in x.outcomes[1:])


def _block_lambda_max(m: np.ndarray, slices: List[slice]) -> np.ndarray:
    return np.array([scipy.linalg.eigvalsh(m[s, s])[-1] if s.stop > s.start else 0.0 for s in slices])


class SelectorService:
    """Service for derandomized selection"""

    @staticmethod
    def expected_matrix(x: FiniteRandomPsd) -> PsdMatrix:
        return PsdMatrix.from_array(x.mean())

    @staticmethod
    def exact_feasible(family: Sequence[FiniteRandomPsd], budget: Optional[float] = None) -> bool:
        budget = settings.EXACT_WORK_BUDGET if budget is None else budget
        if not family:
            return True
        return _ExactEvaluator(family).cost(0) <= budget

    @staticmethod
    def greedy_interlacing_select(
        family: Sequence[FiniteRandomPsd],
        method: str = "auto",
        block_dims: Optional[Sequence[int]] = None,
        targets: Optional[Sequence[float]] = None,
    ) -> GreedySelection:
        """
        Fix X_1, ..., X_m one at a time by minimal conditional maxroot

        Args:
            family: independent finitely supported PSD random matrices
            method: "interlacing", "barrier" or "auto" (exact within budget)
            block_dims: diagonal block sizes used by the barrier potential
            targets: per-block upper targets for the barrier potential

        Returns:
            GreedySelection with chosen outcome indices and witness polynomial
        """
        family = list(family)
        if not family:
            raise HypothesisError("Nothing to select from an empty family", reason="empty_family")
        dim = family[0].dim
        if any(x.dim != dim for x in family):
            raise HypothesisError("Random matrices have mixed dimensions", reason="dimension_mismatch")
        if method == "auto":
            method = INTERLACING if SelectorService.exact_feasible(family) else BARRIER
        if method == INTERLACING:
            return SelectorService._interlacing(family)
        logger.info("Exact μ evaluation over budget for %d variables in dim %d; using barrier greedy", len(family), dim)
        return SelectorService._barrier(family, block_dims or (dim,), targets)

    @staticmethod
    def _interlacing(family: List[FiniteRandomPsd]) -> GreedySelection:
        evaluator = _ExactEvaluator(family)
        initial = McpService.maxroot(evaluator.evaluate([], -1)).value
        fixed: List[np.ndarray] = []
        chosen: List[int] = []
        steps: List[float] = []
        previous = initial
        witness = None
        for i, x in enumerate(family):
            if x.support == 1 or (_outcomes_identical(x) and i < len(family) - 1):
                pick = 0
                poly = None
            else:
                polys = ordered_map(lambda k: evaluator.evaluate(fixed + [x.matrix(k).entries], i), range(x.support))
                roots = [McpService.maxroot(p).value for p in polys]
                best = min(roots)
                pick = next(k for k, v in enumerate(roots) if v <= best + 1e-12 * max(1.0, abs(best)))
                poly = polys[pick]
            fixed.append(x.matrix(pick).entries)
            chosen.append(pick)
            if poly is None:
                poly = evaluator.evaluate(fixed, i) if i == len(family) - 1 else None
            value = McpService.maxroot(poly).value if poly is not None else previous
            if value > previous + settings.TOL_ROOT:
                logger.warning("Greedy step %d raised the maxroot from %.9g to %.9g", i, previous, value)
            steps.append(value)
            logger.debug("Greedy step %d picked outcome %d (maxroot %.9g)", i, pick, value)
            previous = value
            witness = poly
        return GreedySelection(
            assignment=tuple(chosen),
            witness=witness,
            method=INTERLACING,
            step_maxroots=tuple(steps),
            initial_maxroot=initial,
        )

    @staticmethod
    def _barrier(family: List[FiniteRandomPsd], block_dims: Sequence[int], targets: Optional[Sequence[float]]) -> GreedySelection:
        slices = block_slices(block_dims)
        means = [x.mean() for x in family]
        remaining = sum(means)
        if targets is None:
            widest = max(
                (max(LinalgService.trace(m.entries[s, s]) for m, _ in x.outcomes) for x in family for s in slices),
                default=0.0,
            )
            targets = _block_lambda_max(remaining, slices) + widest + 1e-9
        u = np.asarray(targets, dtype=float)
        fixed = np.zeros_like(remaining)
        chosen: List[int] = []

        def score(m: np.ndarray) -> Tuple[int, float]:
            worst, potential = 0.0, 0.0
            for j, s in enumerate(slices):
                w = scipy.linalg.eigvalsh(m[s, s])
                gap = u[j] - w
                if np.any(gap <= 0):
                    worst = max(worst, float(w[-1] / u[j]) if u[j] > 0 else float("inf"))
                else:
                    potential += float(np.sum(1.0 / gap))
            return (1, worst) if worst > 0 else (0, potential)

        for i, x in enumerate(family):
            remaining = remaining - means[i]
            if x.support == 1 or _outcomes_identical(x):
                pick = 0
            else:
                scores = ordered_map(lambda k: score(fixed + x.matrix(k).entries + remaining), range(x.support))
                best = min(scores)
                pick = next(k for k, s in enumerate(scores) if s[0] == best[0] and s[1] <= best[1] + 1e-12 * max(1.0, abs(best[1])))
            chosen.append(pick)
            fixed = fixed + x.matrix(pick).entries
        chosen = SelectorService._local_search(family, chosen, slices, u)
        total = sum(x.matrix(k).entries for x, k in zip(family, chosen))
        return GreedySelection(assignment=tuple(chosen), witness=characteristic_polynomial(total), method=BARRIER)

    @staticmethod
    def _local_search(family: List[FiniteRandomPsd], chosen: List[int], slices: List[slice], u: np.ndarray) -> List[int]:
        chosen = list(chosen)
        total = sum(x.matrix(k).entries for x, k in zip(family, chosen))
        safe_u = np.where(u > 0, u, 1.0)
        ratio = float(np.max(_block_lambda_max(total, slices) / safe_u))
        for _ in range(settings.LOCAL_SEARCH_PASSES):
            if ratio <= 1.0:
                break
            improved = False
            for i, x in enumerate(family):
                if x.support == 1:
                    continue
                for k in range(x.support):
                    if k == chosen[i]:
                        continue
                    candidate = total - x.matrix(chosen[i]).entries + x.matrix(k).entries
                    r = float(np.max(_block_lambda_max(candidate, slices) / safe_u))
                    if r < ratio - 1e-12:
                        total, ratio, chosen[i], improved = candidate, r, k, True
            if not improved:
                break
        return chosen

    @staticmethod
    def exhaustive_select(family: Sequence[FiniteRandomPsd]) -> ExhaustiveResult:
        """
        Global minimizer of maxroot μ over all joint outcomes

        Raises:
            BudgetExceededError: If the number of assignments exceeds EXHAUSTIVE_BUDGET
        """
        family = list(family)
        count = math.prod(x.support for x in family)
        if count > settings.EXHAUSTIVE_BUDGET:
            raise BudgetExceededError(f"{count} assignments exceed the exhaustive budget {settings.EXHAUSTIVE_BUDGET}")
        best: Optional[Tuple[float, Tuple[int, ...], RealPolynomial]] = None
        for assignment in itertools.product(*[range(x.support) for x in family]):
            poly = McpService.mcp([x.matrix(k) for x, k in zip(family, assignment)], dim=family[0].dim)
            value = McpService.maxroot(poly).value
            if best is None or value < best[0] - 1e-12 * max(1.0, abs(best[0])):
                best = (value, tuple(assignment), poly)
        return ExhaustiveResult(assignment=best[1], maxroot=best[0], witness=best[2])

    @staticmethod
    def witness_for(mats: Sequence[PsdMatrix], dim: int) -> Tuple[RealPolynomial, str]:
        """μ of the selected operators when affordable, else their characteristic polynomial"""
        try:
            return McpService.mcp(list(mats), dim=dim), "mixed_characteristic"
        except BudgetExceededError:
            total = sum((m.entries for m in mats), np.zeros((dim, dim), dtype=np.complex128))
            return characteristic_polynomial(total), "characteristic"

    @staticmethod
    def weaver_ksr_select(instance: SelectorInstance, r: int) -> SelectorCertificate:
        """
        Selector J with ‖Σ_{i∈J} T_i‖ ≤ (1/√r + √ε)²

        Args:
            instance: operators with Σ T_i ⪯ I and tr T_i ≤ ε, blocks of size ≥ r
            r: number of candidates kept per block (blocks are truncated to their first r)

        Returns:
            SelectorCertificate

        Raises:
            HypothesisError: If a hypothesis of the construction fails
            SelectionFailedError: If the achieved norm misses the bound
        """
        r = validate_positive_int(r, "r", minimum=2)
        validate_blocks(instance.ground, instance.blocks)
        validate_block_sizes(instance.blocks, r)
        validate_trace_cap(instance.operators, instance.epsilon)
        validate_sum_below_identity(instance.total())
        promised = (1.0 / math.sqrt(r) + math.sqrt(instance.epsilon)) ** 2
        truncated = [tuple(b[:r]) for b in instance.blocks]
        selected, method = SelectorService._select_uniform(instance, truncated, r, (instance.dim,), [promised])
        mats = [instance.operators[i] for i in selected]
        achieved = LinalgService.operator_norm(sum((m.entries for m in mats), np.zeros((instance.dim, instance.dim))))
        witness, kind = SelectorService.witness_for(mats, instance.dim)
        if achieved > promised + settings.TOL_ROOT:
            raise SelectionFailedError(f"Selector norm {achieved:.6g} exceeds (1/√r + √ε)² = {promised:.6g}")
        return SelectorCertificate(
            selected=tuple(sorted(selected)),
            achieved_norm=achieved,
            promised_bound=promised,
            bound_formula="(1/sqrt(r)+sqrt(eps))^2",
            witness_polynomial=witness,
            witness_kind=kind,
            instance_hash=instance.hash(),
            method=method,
            details={"r": r, "epsilon": instance.epsilon, "blocks": [list(b) for b in truncated]},
        )

    @staticmethod
    def _select_uniform(
        instance: SelectorInstance,
        blocks: Sequence[Sequence[int]],
        r: int,
        block_dims: Sequence[int],
        targets: Sequence[float],
        block_eps: Optional[Sequence[float]] = None,
    ) -> Tuple[List[int], str]:
        """Greedy over X_k uniform on {r·T_i : i ∈ J_k}; returns selected indices and method"""
        if not blocks:
            return [], INTERLACING
        family = [FiniteRandomPsd.uniform([instance.operators[i].scaled(r) for i in b]) for b in blocks]
        scaled_targets = [r * t for t in targets]
        if block_eps is not None:
            augmented = _equalized_family(family, block_dims, [r * e for e in block_eps])
            if SelectorService.exact_feasible(augmented):
                result = SelectorService.greedy_interlacing_select(augmented, method=INTERLACING)
            else:
                result = SelectorService.greedy_interlacing_select(family, method=BARRIER, block_dims=block_dims, targets=scaled_targets)
        else:
            result = SelectorService.greedy_interlacing_select(family, block_dims=block_dims, targets=scaled_targets)
        return [b[k] for b, k in zip(blocks, result.assignment)], result.method

    @staticmethod
    def ks2_select(instance: SelectorInstance) -> SelectorCertificate:
        """
        Two-sided selector for a pair partition:
        ‖Σ_{i∈J} T_i − T/2‖ and ‖Σ_{i∉J} T_i − T/2‖ ≤ 2√ε + ε

        The random model puts 2·diag(T_i, T_i') or 2·diag(T_i', T_i) on
        each pair with probability 1/2, padded by deterministic
        diag(T'_k, T'_k) with Σ T'_k = I − T and tr T'_k ≤ 2ε.
        """
        validate_pair_partition(instance.ground, instance.blocks)
        validate_trace_cap(instance.operators, instance.epsilon)
        total = instance.total()
        validate_sum_below_identity(total)
        eps = instance.epsilon
        d = instance.dim
        bound = 2 * math.sqrt(eps) + eps
        if eps <= 0:
            return SelectorService._ks2_certificate(instance, [b[0] for b in instance.blocks], total, bound, INTERLACING, [])
        family = []
        for i, i2 in instance.blocks:
            a, b = instance.operators[i].scaled(2), instance.operators[i2].scaled(2)
            family.append(FiniteRandomPsd.uniform([
                BlockDiagonalPsd.from_blocks([a, b]).assembled(),
                BlockDiagonalPsd.from_blocks([b, a]).assembled(),
            ]))
        for piece, count in _identity_padding(total, 2 * eps):
            pad = PsdMatrix.assume_psd(piece)
            family += [FiniteRandomPsd.deterministic(BlockDiagonalPsd.from_blocks([pad, pad]).assembled())] * count
        block_dims = (d, d)
        target = 1 + 4 * math.sqrt(eps) + 2 * eps
        # equalizing only grows the work, so an over-budget family stays over budget
        augmented = _equalized_family(family, block_dims, [2 * eps, 2 * eps]) if SelectorService.exact_feasible(family) else None
        if augmented is not None and SelectorService.exact_feasible(augmented):
            result = SelectorService.greedy_interlacing_select(augmented, method=INTERLACING)
        else:
            result = SelectorService.greedy_interlacing_select(family, method=BARRIER, block_dims=block_dims, targets=[target, target])
        selected = [pair[k] for pair, k in zip(instance.blocks, result.assignment[: len(instance.blocks)])]
        model = [x.matrix(k) for x, k in zip(family, result.assignment)]
        return SelectorService._ks2_certificate(instance, selected, total, bound, result.method, model)

    @staticmethod
    def _ks2_certificate(
        instance: SelectorInstance, selected: List[int], total: np.ndarray, bound: float, method: str, model: List[PsdMatrix]
    ) -> SelectorCertificate:
        d = instance.dim
        chosen = sum((instance.operators[i].entries for i in selected), np.zeros((d, d), dtype=np.complex128))
        dev_in = LinalgService.operator_norm(chosen - total / 2)
        dev_out = LinalgService.operator_norm(total - chosen - total / 2)
        if max(dev_in, dev_out) > bound + settings.TOL_ROOT:
            raise SelectionFailedError(f"KS2 deviation {max(dev_in, dev_out):.6g} exceeds 2√ε + ε = {bound:.6g}")
        if model:
            witness, kind = SelectorService.witness_for(model, 2 * d)
        else:
            witness, kind = characteristic_polynomial(np.eye(2 * d) + scipy.linalg.block_diag(2 * chosen - total, total - 2 * chosen)), "characteristic"
        return SelectorCertificate(
            selected=tuple(sorted(selected)),
            achieved_norm=[dev_in, dev_out],
            promised_bound=[bound, bound],
            bound_formula="2*sqrt(eps)+eps",
            witness_polynomial=witness,
            witness_kind=kind,
            instance_hash=instance.hash(),
            method=method,
            details={"epsilon": instance.epsilon, "witness_offset": 1.0, "witness_scale": 2.0},
        )

    @staticmethod
    def block_weaver_select(
        instance: SelectorInstance, r: int, targets: Optional[Sequence[float]] = None
    ) -> SelectorCertificate:
        """
        One selector J with ‖Σ_{i∈J} T_i^{(j)}‖ ≤ 1/r + ε_j + 2√(Σ_l ε_l / r) for every block j

        targets, when given, tighten the per-block goals of the barrier
        fallback; the certificate still checks the promised bounds.

        Raises:
            HypothesisError: On missing block structure or violated hypotheses
            SelectionFailedError: If some block misses its bound
        """
        if instance.block_dims is None or instance.block_eps is None:
            raise HypothesisError("Block selection needs block_dims and block_eps", reason="missing_blocks")
        r = validate_positive_int(r, "r", minimum=1)
        validate_blocks(instance.ground, instance.blocks)
        validate_block_sizes(instance.blocks, r)
        validate_block_trace_caps(instance.operators, instance.block_dims, instance.block_eps)
        total = instance.total()
        slices = block_slices(instance.block_dims)
        for j, s in enumerate(slices):
            validate_sum_below_identity(total[s, s], what=f"Σ T_i on block {j}")
        promised = [1.0 / r + e + 2 * math.sqrt(sum(instance.block_eps) / r) for e in instance.block_eps]
        truncated = [tuple(b[:r]) for b in instance.blocks]
        selected, method = SelectorService._select_uniform(
            instance, truncated, r, instance.block_dims, list(targets) if targets is not None else promised,
            block_eps=instance.block_eps,
        )
        return SelectorService.block_certificate(instance, selected, promised, method, r, truncated)

    @staticmethod
    def block_certificate(
        instance: SelectorInstance,
        selected: Sequence[int],
        promised: Sequence[float],
        method: str,
        r: int,
        blocks: Sequence[Sequence[int]],
        bound_formula: str = "1/r+eps_j+2*sqrt(sum(eps)/r)",
    ) -> SelectorCertificate:
        d = instance.dim
        mats = [instance.operators[i] for i in selected]
        chosen = sum((m.entries for m in mats), np.zeros((d, d), dtype=np.complex128))
        achieved = [float(v) for v in _block_lambda_max(chosen, block_slices(instance.block_dims))]
        for j, (a, p) in enumerate(zip(achieved, promised)):
            if a > p + settings.TOL_ROOT:
                raise SelectionFailedError(f"Block {j} norm {a:.6g} exceeds its bound {p:.6g}", block=j)
        witness, kind = SelectorService.witness_for(mats, d)
        return SelectorCertificate(
            selected=tuple(sorted(selected)),
            achieved_norm=achieved,
            promised_bound=list(promised),
            bound_formula=bound_formula,
            witness_polynomial=witness,
            witness_kind=kind,
            instance_hash=instance.hash(),
            method=method,
            details={"r": r, "block_eps": list(instance.block_eps), "blocks": [list(b) for b in blocks]},
        )

    @staticmethod
    def partition_from_selector(operators: Sequence[PsdMatrix], n: int, epsilon: Optional[float] = None) -> PartitionResult:
        """
        Partition {S_1, ..., S_n} from a selector on n duplicated copies

        Copy (i, k) is T_i placed in the k-th of n orthogonal compartments;
        i goes to S_k when the selector keeps copy (i, k). For n = 2 the
        parts satisfy ‖Σ_{S_k} T_i − T/2‖ ≤ 2√ε + ε, for n ≥ 3 the
        compartment bound 1/n + ε + 2√ε applies to ‖Σ_{S_k} T_i‖.
        """
        n = validate_positive_int(n, "n")
        ops = list(operators)
        if not ops:
            return PartitionResult(parts=tuple(() for _ in range(n)), achieved=[0.0] * n, promised=[0.0] * n)
        d = ops[0].dim
        eps = max(LinalgService.trace(t) for t in ops) if epsilon is None else epsilon
        total = sum(t.entries for t in ops)
        if n == 1:
            norm = LinalgService.operator_norm(total)
            return PartitionResult(parts=(tuple(range(len(ops))),), achieved=[norm], promised=[norm])

        def copy(i: int, k: int) -> PsdMatrix:
            return BlockDiagonalPsd.from_blocks([ops[i] if c == k else PsdMatrix.zeros(d) for c in range(n)]).assembled()

        ground = tuple(i * n + k for i in range(len(ops)) for k in range(n))
        operators_dup = {i * n + k: copy(i, k) for i in range(len(ops)) for k in range(n)}
        blocks = tuple(tuple(i * n + k for k in range(n)) for i in range(len(ops)))
        if n == 2:
            instance = SelectorInstance(ground=ground, operators=operators_dup, blocks=blocks, epsilon=eps)
            cert = SelectorService.ks2_select(instance)
        else:
            instance = SelectorInstance(
                ground=ground, operators=operators_dup, blocks=blocks, epsilon=eps,
                block_eps=tuple([eps] * n), block_dims=tuple([d] * n),
            )
            cert = SelectorService.block_weaver_select(instance, n)
        parts = tuple(tuple(sorted(j // n for j in cert.selected if j % n == k)) for k in range(n))
        if n == 2:
            bound = 2 * math.sqrt(eps) + eps
            achieved = [LinalgService.operator_norm(sum((ops[i].entries for i in p), np.zeros((d, d))) - total / 2) for p in parts]
            promised = [bound, bound]
        else:
            achieved = [LinalgService.operator_norm(sum((ops[i].entries for i in p), np.zeros((d, d)))) for p in parts]
            promised = list(cert.promised_bound)
        return PartitionResult(parts=parts, achieved=achieved, promised=promised, certificate=cert)


def _identity_padding(total: np.ndarray, cap: float) -> List[Tuple[np.ndarray, int]]:
    """Split I − T into PSD pieces of trace ≤ cap along its eigenvectors; (piece, copies) per eigenvector"""
    w, q = scipy.linalg.eigh(np.eye(total.shape[0]) - total)
    pieces = []
    for lam, vec in zip(w, q.T):
        if lam <= settings.TOL_EQ:
            continue
        count = max(1, math.ceil(lam / cap - 1e-12))
        pieces.append(((lam / count) * np.outer(vec, vec.conj()), count))
    return pieces


def _equalized_family(
    family: Sequence[FiniteRandomPsd], block_dims: Sequence[int], taus: Sequence[float]
) -> List[FiniteRandomPsd]:
    """
    Append ξ·I_{e_j} to every block so each outcome has block trace exactly τ_j

    e_j ≥ Σ_k (τ_j − E tr X_k^{(j)}) keeps Σ_k E of the appended parts below I.
    """
    slices = block_slices(block_dims)
    extra = []
    for j, s in enumerate(slices):
        deficit = sum(taus[j] - LinalgService.trace(x.mean()[s, s]) for x in family)
        extra.append(max(1, math.ceil(taus[j] - 1e-12), math.ceil(deficit - 1e-12)))
    out = []
    for x in family:
        outcomes = []
        for m, p in x.outcomes:
            parts = []
            for j, s in enumerate(slices):
                block = m.entries[s, s]
                xi = max(0.0, (taus[j] - LinalgService.trace(block)) / extra[j])
                parts.extend([block, xi * np.eye(extra[j])])
            outcomes.append((PsdMatrix.assume_psd(scipy.linalg.block_diag(*parts)), p))
        out.append(FiniteRandomPsd(tuple(outcomes)))
    return out


expected_matrix = SelectorService.expected_matrix
greedy_interlacing_select = SelectorService.greedy_interlacing_select
exhaustive_select = SelectorService.exhaustive_select
weaver_ksr_select = SelectorService.weaver_ksr_select
ks2_select = SelectorService.ks2_select
block_weaver_select = SelectorService.block_weaver_select
partition_from_selector = SelectorService.partition_from_selector
