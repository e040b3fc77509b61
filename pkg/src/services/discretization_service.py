"""
Sampling of weighted operator families and discretization of continuous frames
"""
import logging
import math
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import scipy.linalg

from src.config import settings
from src.models.linalg import PsdMatrix
from src.models.sampling import DiscretizedFrame, Quadrature, SamplingResult, SplitCheck, WeightedOperatorFamily
from src.services.binary_selector_service import BinarySelectorService
from src.services.linalg_service import LinalgService, as_array
from src.utils.errors import DimensionMismatchError, HypothesisError, SelectionFailedError
from src.utils.validators import validate_sum_below_identity

logger = logging.getLogger(__name__)

Exponents = Union[int, Sequence[int]]


def _exponent(w: Fraction) -> int:
    """r with w = 2^{−r}"""
    return (w.denominator.bit_length() - 1) - (w.numerator.bit_length() - 1)


def weight_bits(mass: float, epsilon: float) -> int:
    """Fewest bits b ≥ 1 with 2^{−b}·mass ≤ ε/4"""
    if mass <= 0:
        return 1
    return max(1, math.ceil(math.log2(4 * mass / epsilon) - 1e-12))


def _projector(subspace: Optional[np.ndarray], dim: int) -> np.ndarray:
    if subspace is None:
        return np.zeros((dim, dim), dtype=np.complex128)
    q = np.asarray(subspace, dtype=np.complex128).reshape(dim, -1)
    if q.shape[1] and np.max(np.abs(q.conj().T @ q - np.eye(q.shape[1]))) > 1e-8:
        raise HypothesisError("Subspace columns must be orthonormal", reason="not_orthonormal")
    return q @ q.conj().T


class DiscretizationService:
    """Service for dyadic sampling"""

    @staticmethod
    def binary_expand(a: float, precision_bits: Optional[int] = None) -> List[Fraction]:
        """
        Greedy dyadic weights 2^{−r_k}, largest first, with
        Σ 2^{−r_k} ≤ a < Σ 2^{−r_k} + 2^{−precision_bits}

        Raises:
            HypothesisError: If a ≤ 0 or a ≥ 2^precision_bits
        """
        bits = settings.WEIGHT_BITS if precision_bits is None else int(precision_bits)
        if not a > 0:
            raise HypothesisError(f"Cannot expand a nonpositive weight {a}", reason="nonpositive_weight")
        if a >= 2 ** bits:
            raise HypothesisError(f"Weight {a} is not below 2^{bits}", reason="invalid_parameter")
        rest = Fraction(a)
        r = (rest.denominator.bit_length() - 1) - rest.numerator.bit_length()
        out = []
        while r <= bits and rest > 0:
            w = Fraction(1, 2 ** r) if r >= 0 else Fraction(2 ** -r)
            if w <= rest:
                out.append(w)
                rest -= w
            r += 1
        return out

    @staticmethod
    def projection_split_check(t: Union[PsdMatrix, np.ndarray], subspace: Optional[np.ndarray]) -> SplitCheck:
        """
        γ₁ = ‖P T P‖, γ₂ = ‖P⊥ T P⊥‖ and ‖T − P T P − P⊥ T P⊥‖ − √(γ₁γ₂)

        Args:
            t: positive semidefinite T
            subspace: orthonormal columns spanning K, None for K = {0}
        """
        m = as_array(t)
        p = _projector(subspace, m.shape[0])
        q = np.eye(m.shape[0]) - p
        inner, outer = p @ m @ p, q @ m @ q
        g1, g2 = LinalgService.operator_norm(inner), LinalgService.operator_norm(outer)
        off = LinalgService.operator_norm(m - inner - outer)
        return SplitCheck(gamma1=g1, gamma2=g2, max_violation=off - math.sqrt(g1 * g2))

    @staticmethod
    def scaf_sample(
        operators: Sequence[PsdMatrix],
        exponents: Sequence[Exponents],
        epsilon: float,
        subspace: Optional[np.ndarray] = None,
        delta: Optional[float] = None,
        constant: Optional[float] = None,
    ) -> SamplingResult:
        """
        Sample a family with dyadic weights Σ_k 2^{−r_ik} on T_i.

        Every term is replicated to the common level r, the iterated
        selector runs to the depth N with 2^N < 2^r ε²/(C²δ) ≤ 2^{N+1},
        and the leaf with least trace on K is followed. With a = 2^{r−N}
        the result satisfies
        −εP_{K⊥} − 4√γ I ⪯ (1/a)Σ − T ⪯ εP_{K⊥} + 4√γ I.

        Args:
            operators: T_i with tr T_i ≤ δ
            exponents: r_i, or a list of r_ik, per operator
            epsilon: ε > 0
            subspace: orthonormal columns spanning K with γ = tr(P_K T P_K) ≤ 1
            constant: C, defaults to the derived constant

        Raises:
            HypothesisError: On violated hypotheses
            SelectionFailedError: If the sandwich does not hold
        """
        ops = list(operators)
        if not ops or len(ops) != len(exponents):
            raise DimensionMismatchError(f"{len(ops)} operators for {len(exponents)} exponent lists")
        if not epsilon > 0:
            raise HypothesisError(f"epsilon must be positive, got {epsilon}", reason="invalid_parameter")
        terms = [[int(e)] if np.ndim(e) == 0 else [int(x) for x in e] for e in exponents]
        d = ops[0].dim
        traces = [LinalgService.trace(t) for t in ops]
        delta = max(traces) if delta is None else float(delta)
        if max(traces) > delta + settings.TOL_EQ:
            raise HypothesisError(f"Largest trace {max(traces):.6g} exceeds δ = {delta:.6g}", reason="trace_bound")
        c = BinarySelectorService.derive_numer_constant() if constant is None else float(constant)
        if epsilon >= c:
            raise HypothesisError(f"epsilon {epsilon} must stay below C = {c:.6g}", reason="invalid_parameter")
        total = sum((sum(2.0 ** -r for r in rs) * t.entries for t, rs in zip(ops, terms)), np.zeros((d, d), dtype=np.complex128))
        validate_sum_below_identity(total)
        p = _projector(subspace, d)
        gamma = float(np.real(np.trace(p @ total @ p)))
        if gamma > 1 + settings.TOL_EQ:
            raise HypothesisError(f"tr(P_K T P_K) = {gamma:.6g} exceeds 1", reason="subspace_trace")

        if delta > 0:
            level = max(max(max(rs) for rs in terms), math.floor(math.log2(c * c * delta / epsilon ** 2)) + 1)
            target = 2.0 ** level * epsilon ** 2 / (c * c * delta)
            depth = max(0, math.ceil(math.log2(target)) - 1)
        else:
            level, target, depth = max(max(rs) for rs in terms), math.inf, 0
        mult = [sum(2 ** (level - r) for r in rs) for rs in terms]
        scaled = [PsdMatrix.assume_psd(2.0 ** -level * t.entries) for t in ops]
        traces_on_k = [float(np.real(np.trace(p @ t.entries))) for t in scaled]

        def least_trace(lvl: int, b: str, children: Dict[str, Dict[int, int]]) -> int:
            load = [sum(cnt * traces_on_k[i] for i, cnt in children[b + s].items()) for s in "01"]
            return 0 if load[0] <= load[1] else 1

        tree = BinarySelectorService.iterate_ks2(
            scaled, depth, delta=2.0 ** -level * delta, multiplicities=mult, descend=least_trace
        )
        leaf = tree.leaves[0]
        samples = dict(sorted(tree.nodes[leaf].items()))
        a = 2.0 ** (level - tree.depth)
        sampled = sum((cnt * ops[i].entries for i, cnt in samples.items()), np.zeros((d, d), dtype=np.complex128))
        gap = sampled / a - total
        slack = epsilon * (np.eye(d) - p) + 4 * math.sqrt(max(gamma, 0.0)) * np.eye(d)
        upper_ok = LinalgService.psd_order_leq(gap, slack, tol=settings.TOL_ROOT)
        lower_ok = LinalgService.psd_order_leq(-gap, slack, tol=settings.TOL_ROOT)
        if not (upper_ok and lower_ok):
            raise SelectionFailedError("Sampled operator leaves the ε/√γ sandwich", reason="sandwich_failed", leaf=leaf)
        c0 = c * c
        logger.debug("scaf sample: level %d, depth %d, a = %g, %d distinct indices", level, tree.depth, a, len(samples))
        return SamplingResult(
            samples=samples,
            a=a,
            c0=c0,
            deviation=LinalgService.operator_norm(gap),
            epsilon=float(epsilon),
            delta=delta,
            depth=tree.depth,
            level=level,
            bracket=(c0 * delta / epsilon ** 2, 2 * c0 * delta / epsilon ** 2),
            details={"gamma": gamma, "leaf": leaf, "leaf_bound": tree.bound},
        )

    @staticmethod
    def scal_sample(
        family: WeightedOperatorFamily,
        epsilon: float,
        precision_bits: Optional[int] = None,
        constant: Optional[float] = None,
    ) -> SamplingResult:
        """
        Sampling function π with ‖(1/a)Σ_n T_{π(n)} − T‖ < ε

        Weights are expanded in binary; when ‖T‖ > 1 they are divided by
        ‖T‖ first and the result is rescaled. The expansion uses the fewest
        bits b with 2^{−b}·‖T‖·Σ‖T_i‖ ≤ ε/4, never more than precision_bits,
        so the common level stays near log₂(C²δ/ε²).

        Every multiplicity obeys m_i‖T_i‖ ≤ a(‖T‖ + ε), which is a(1 + ε)
        whenever ‖T‖ ≤ 1.

        Raises:
            HypothesisError: If the weight truncation alone uses up ε;
                the error reports the bits that would be needed
            SelectionFailedError: If the recomputed deviation reaches ε
        """
        if not epsilon > 0:
            raise HypothesisError(f"epsilon must be positive, got {epsilon}", reason="invalid_parameter")
        cap = settings.WEIGHT_BITS if precision_bits is None else int(precision_bits)
        total = family.total()
        norm = LinalgService.operator_norm(total)
        scale = max(1.0, norm)
        norms = [LinalgService.operator_norm(t) for t in family.operators]
        top = max(family.weights) / scale
        bits = min(cap, max(weight_bits(scale * sum(norms), epsilon), math.floor(math.log2(top)) + 1))
        expansions = [DiscretizationService.binary_expand(w / scale, bits) for w in family.weights]
        truncation = 2.0 ** -bits * sum(norms)
        eps_inner = epsilon / scale - truncation
        if eps_inner <= 0:
            needed = math.ceil(math.log2(scale * sum(norms) / epsilon)) + 1
            raise HypothesisError(
                f"{bits} weight bits leave no room for ε = {epsilon}; about {needed} bits are needed",
                reason="precision_insufficient",
                needed_bits=needed,
            )
        keep = [i for i, ws in enumerate(expansions) if ws]
        inner = DiscretizationService.scaf_sample(
            [family.operators[i] for i in keep],
            [[_exponent(w) for w in expansions[i]] for i in keep],
            eps_inner,
            delta=family.trace_cap,
            constant=constant,
        )
        samples = {keep[j]: m for j, m in inner.samples.items()}
        a = inner.a / scale
        sampled = sum((m * family.operators[i].entries for i, m in samples.items()), np.zeros((family.dim, family.dim), dtype=np.complex128))
        deviation = LinalgService.operator_norm(sampled / a - total)
        if deviation >= epsilon:
            raise SelectionFailedError(f"Sampling deviation {deviation:.6g} is not below ε = {epsilon}", reason="sampling_failed")
        worst = max((m * norms[i] / a for i, m in samples.items()), default=0.0)
        if worst > norm + epsilon + settings.TOL_ROOT:
            raise SelectionFailedError(f"Multiplicity bound violated ({worst:.6g} > ‖T‖ + ε)", reason="sampling_failed")
        lo, hi = inner.bracket
        return SamplingResult(
            samples=samples,
            a=a,
            c0=inner.c0,
            deviation=deviation,
            epsilon=float(epsilon),
            delta=float(family.trace_cap),
            depth=inner.depth,
            level=inner.level,
            bracket=(lo / scale, hi / scale),
            scale=scale,
            details={
                "truncation": truncation,
                "precision_bits": bits,
                "inner_epsilon": eps_inner,
                "multiplicity_ratio": worst,
            },
        )

    @staticmethod
    def discretize_continuous_frame(quadrature: Quadrature, epsilon: float, **kwargs) -> DiscretizedFrame:
        """
        Sample points whose system has frame bounds within ((A − ε)a, (B + ε)a)

        A and B are the frame bounds of the finitely supported continuous
        frame Σ μ_i ψ(t_i) ⊗ ψ(t_i).
        """
        family = WeightedOperatorFamily(
            operators=tuple(PsdMatrix.assume_psd(np.outer(v, v.conj())) for v in quadrature.vectors.vectors),
            weights=tuple(quadrature.weights),
        )
        w = scipy.linalg.eigvalsh(quadrature.frame_operator())
        bounds = (float(w[0]), float(w[-1]))
        sampling = DiscretizationService.scal_sample(family, epsilon, **kwargs)
        v = quadrature.vectors.vectors
        counts = np.zeros(quadrature.n)
        for i, m in sampling.samples.items():
            counts[i] = m
        sampled = scipy.linalg.eigvalsh((v.T * counts) @ v.conj())
        result = DiscretizedFrame(
            sampling=sampling,
            points=tuple(quadrature.points),
            lower=float(sampled[0]),
            upper=float(sampled[-1]),
            continuous_bounds=bounds,
        )
        lo, hi = result.promised
        tol = settings.TOL_ROOT * max(1.0, sampling.a)
        if result.lower < lo - tol or result.upper > hi + tol:
            raise SelectionFailedError(
                f"Sampled frame bounds ({result.lower:.6g}, {result.upper:.6g}) leave ({lo:.6g}, {hi:.6g})",
                reason="sampling_failed",
            )
        return result


binary_expand = DiscretizationService.binary_expand
projection_split_check = DiscretizationService.projection_split_check
scaf_sample = DiscretizationService.scaf_sample
scal_sample = DiscretizationService.scal_sample
discretize_continuous_frame = DiscretizationService.discretize_continuous_frame
