"""
Exponential systems on finite unions of intervals of the torus
"""
import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from src.config import settings
from src.models.binary import DoublingPointSet
from src.models.exponentials import ExponentialCertificate, ExponentialSelection, FrequencySet, IntervalUnion
from src.models.frames import VectorSystem
from src.models.linalg import HermitianMatrix, PsdMatrix
from src.services.binary_selector_service import BinarySelectorService
from src.services.frame_service import FrameService
from src.services.linalg_service import LinalgService
from src.services.metric_service import REMOVAL_EPSILON, MetricService
from src.utils.errors import HypothesisError, SelectionFailedError
from src.utils.validators import validate_unit_interval

logger = logging.getLogger(__name__)


def _window(window: int) -> np.ndarray:
    if window < 0:
        raise HypothesisError(f"Window half-width must be nonnegative, got {window}", reason="invalid_parameter")
    return np.arange(-int(window), int(window) + 1)


def _gram_array(s: IntervalUnion, freqs: Sequence[int]) -> np.ndarray:
    lam = np.asarray(freqs, dtype=np.int64)
    return ExponentialService.indicator_fourier(s, lam[None, :] - lam[:, None])


def _section_system(s: IntervalUnion, freqs: Sequence[int]) -> VectorSystem:
    """Vectors with Gram equal to the window's Gram section, up to conjugation"""
    g = _gram_array(s, freqs)
    return VectorSystem(dim=len(freqs), vectors=LinalgService.psd_sqrt(g))


def _periodic_system(s: IntervalUnion, freqs: Sequence[int]) -> VectorSystem:
    """
    e_k sampled on the grid points j/M inside S, scaled by M^{−1/2}

    With M = #window the system is exactly Parseval for ℓ²(S ∩ M^{−1}ℤ).
    """
    m = len(freqs)
    grid = s.grid_points(m)
    phase = np.exp(-2j * np.pi * np.outer(np.asarray(freqs), grid) / m)
    return VectorSystem(dim=len(grid), vectors=phase / math.sqrt(m))


def _spectrum(g: np.ndarray) -> Tuple[float, float]:
    w = scipy.linalg.eigvalsh(g)
    return float(w[0]), float(w[-1])


def _c_hat(c_hat: Optional[float], eta: Optional[int]) -> float:
    if c_hat is not None:
        return float(c_hat)
    eta = settings.METRIC_ETA if eta is None else int(eta)
    return 2.0 ** (eta - 1) / BinarySelectorService.derive_numer_constant() ** 2


def _radii(space: DoublingPointSet, limit: float, depth: Optional[int]) -> List[int]:
    """
    Integer radii r ≥ 1 with sup #B(x, r) ≤ limit, largest first

    A radius is skipped when the points of some B(x, r/2) outnumber the
    2^N leaves, since those points are pairwise closer than r.
    """
    out = []
    r = 1
    while r <= space.n and space.sup_ball(r) <= limit:
        if depth is None or space.sup_ball(r / 2) <= 2 ** depth:
            out.append(r)
        r += 1
    return out[::-1]


class ExponentialService:
    """Service for Gram sections and selectors of exponential systems"""

    @staticmethod
    def indicator_fourier(s: IntervalUnion, k):
        """
        ∫_S e^{−2πikx} dx in closed form

        Args:
            s: interval union
            k: integer or integer array

        Returns:
            complex, or a complex array shaped like k
        """
        k_arr = np.asarray(k, dtype=np.int64)
        out = np.zeros(k_arr.shape, dtype=np.complex128)
        zero = k_arr == 0
        out[zero] = s.measure
        nz = ~zero
        if np.any(nz):
            kk = k_arr[nz].astype(float)
            acc = np.zeros(kk.shape, dtype=np.complex128)
            for a, b in s.intervals:
                acc += (np.exp(-2j * np.pi * kk * b) - np.exp(-2j * np.pi * kk * a)) / (-2j * np.pi * kk)
            out[nz] = acc
        if np.ndim(k) == 0:
            return complex(out)
        return out

    @staticmethod
    def exp_gram(s: IntervalUnion, frequencies: Sequence[int]) -> HermitianMatrix:
        """Gram section with entry (λ, μ) = ∫_S e^{2πi(λ−μ)x} dx"""
        if len(frequencies) == 0:
            raise HypothesisError("Gram section of an empty frequency set", reason="empty_system")
        return HermitianMatrix.from_array(_gram_array(s, frequencies), tol=1e-12)

    @staticmethod
    def section_certificate(
        s: IntervalUnion, frequencies: Sequence[int], target: Tuple[float, float], r: float, **details: Any
    ) -> ExponentialCertificate:
        """Recompute λ_min/λ_max and the minimal gap of a frequency set"""
        lo, hi = _spectrum(_gram_array(s, frequencies)) if len(frequencies) else (math.nan, math.nan)
        freqs = sorted(int(k) for k in frequencies)
        gaps = [b - a for a, b in zip(freqs, freqs[1:])]
        return ExponentialCertificate(
            lambda_min=lo,
            lambda_max=hi,
            target_lo=float(target[0]),
            target_hi=float(target[1]),
            min_gap=float(min(gaps)) if gaps else math.inf,
            r=float(r),
            details={"max_gap": max(gaps) if gaps else 0, "measure": s.measure, **details},
        )

    @staticmethod
    def syndetic_riesz_select(
        s: IntervalUnion, epsilon: float, window: int, constant: Optional[float] = None
    ) -> ExponentialSelection:
        """
        Syndetic Λ whose Gram section lies within (1 ± ε)|S|

        The window is cut into consecutive blocks of length
        r = ⌈C/(|S|ε²)⌉ and the R_ε selector picks one frequency per block
        from the normalized section vectors.

        Raises:
            HypothesisError: If the window holds fewer than two blocks
            SelectionFailedError: If the recomputed certificate misses its targets
        """
        epsilon = validate_unit_interval(epsilon, "epsilon")
        c = settings.C_REPS if constant is None else float(constant)
        freqs = _window(window)
        measure = s.measure
        target = ((1 - epsilon) * measure, (1 + epsilon) * measure)
        r = math.ceil(c / (measure * epsilon ** 2) - 1e-12)
        g = _gram_array(s, freqs)
        lo, hi = _spectrum(g)
        tol = settings.TOL_EQ * max(1.0, measure)
        if lo >= target[0] - tol and hi <= target[1] + tol:
            logger.info("Whole window ±%d already within (1 ± %.3g)|S|", window, epsilon)
            selected = [int(k) for k in freqs]
            method = "whole_window"
            details: Dict[str, Any] = {}
        else:
            n_blocks = len(freqs) // r
            if n_blocks < 2:
                raise HypothesisError(
                    f"Window of {len(freqs)} frequencies holds {n_blocks} blocks of length r = {r}",
                    reason="window_too_small",
                    r=r,
                )
            blocks = [tuple(range(t * r, (t + 1) * r)) for t in range(n_blocks)]
            system = VectorSystem(dim=len(freqs), vectors=LinalgService.psd_sqrt(g) / math.sqrt(measure))
            cert = FrameService.r_eps_select([system], blocks, epsilon, constant=c, enforce_block_rule=False)
            selected = [int(freqs[i]) for i in cert.selected]
            method = cert.method
            details = {"blocks": n_blocks, "witness_kind": cert.witness_kind, "plan": cert.details.get("plan")}
        certificate = ExponentialService.section_certificate(s, selected, target, r, gap_bound=2 * r - 1)
        if certificate.lambda_min < target[0] - tol or certificate.lambda_max > target[1] + tol:
            raise SelectionFailedError(
                f"Gram section bounds ({certificate.lambda_min:.6g}, {certificate.lambda_max:.6g}) leave (1 ± ε)|S|"
            )
        if certificate.details["max_gap"] > 2 * r - 1:
            raise SelectionFailedError(f"Gap {certificate.details['max_gap']} exceeds 2r − 1 = {2 * r - 1}")
        return ExponentialSelection(
            frequencies=FrequencySet(window=int(window), selected=tuple(selected)),
            sets=(s,),
            epsilon=epsilon,
            certificates=(certificate,),
            method=method,
            details={"r": r, "constant": c, **details},
        )

    @staticmethod
    def unit_norm_removal(
        sets: Sequence[IntervalUnion],
        window: int,
        r: Optional[int] = None,
        c_hat: Optional[float] = None,
        eta: Optional[int] = None,
    ) -> ExponentialSelection:
        """
        Separated Λ^c such that E(window ∖ Λ^c) is Riesz in every L²(S_n)

        Runs remove_sparse_set on the Gram-section systems of all sets at
        once. Without an explicit r the largest admissible integer radius
        that separates the leaves is used.

        Raises:
            HypothesisError: If no radius satisfies the ball-count condition
                or Σ|S_n^c| leaves no room for a nontrivial removal
        """
        sets = tuple(sets)
        if not sets:
            raise HypothesisError("unit_norm_removal needs at least one set", reason="empty_family")
        freqs = _window(window)
        space = DoublingPointSet.integer_interval(-int(window), int(window) + 1)
        systems = [_section_system(s, freqs) for s in sets]
        delta0 = float(sum(s.complement_measure for s in sets))
        c_hat = _c_hat(c_hat, eta)
        epsilon = REMOVAL_EPSILON
        depth = BinarySelectorService.sse_depth(delta0, epsilon)
        if depth == 0:
            first = 4 * math.sqrt(delta0) + 2 * delta0
            if first + 1e-9 >= 1 or 2 * delta0 >= 1:
                raise HypothesisError(
                    f"Σ|S^c| = {delta0:.6g} is too large for a removal below the full window",
                    reason="complement_too_large",
                )
            # smallest ε admitting one level; the certificate degrades to (1 − ε)/2
            epsilon = first + 1e-9
            depth = BinarySelectorService.sse_depth(delta0, epsilon)
            logger.info("Σ|S^c| = %.4g needs ε = %.6g for a depth-one removal", delta0, epsilon)
        if r is not None:
            radii = [int(r)]
        elif delta0 <= 0:
            radii = [1]
        else:
            radii = _radii(space, c_hat * epsilon ** 2 / delta0, depth)
            if not radii:
                raise HypothesisError(
                    f"No radius satisfies sup #B(x, r) ≤ ĉε²/δ₀ = {c_hat * epsilon ** 2 / delta0:.6g}", reason="mpa2_violated"
                )
        removal = None
        used = radii[0]
        for k, rr in enumerate(radii):
            try:
                removal = MetricService.remove_sparse_set(space, systems, rr, c_hat=c_hat, eta=eta, epsilon=epsilon)
                used = rr
                break
            except SelectionFailedError as exc:
                if exc.reason != "not_separated" or k == len(radii) - 1:
                    raise
                logger.warning("Radius %d does not separate at depth %s; trying %d", rr, depth, radii[k + 1])
        removed = sorted(int(freqs[i]) for i in removal.removed)
        kept = sorted(set(int(k) for k in freqs) - set(removed))
        certificates = []
        for n, s in enumerate(sets):
            cert = ExponentialService.section_certificate(
                s, kept, (removal.certified_lower[n], 1.0), used,
                removed_min_gap=_min_gap(removed),
                dyadic_lower=removal.dyadic_lower,
            )
            if kept and cert.lambda_min < removal.certified_lower[n] - settings.TOL_ROOT:
                raise SelectionFailedError(
                    f"Set {n}: λ_min {cert.lambda_min:.6g} below the certified {removal.certified_lower[n]:.6g}", system=n
                )
            certificates.append(cert)
        if _min_gap(removed) < used:
            raise SelectionFailedError(f"Removed frequencies are closer than r = {used}", reason="not_separated")
        return ExponentialSelection(
            frequencies=FrequencySet(window=int(window), selected=tuple(removed)),
            sets=sets,
            epsilon=epsilon,
            certificates=tuple(certificates),
            method="remove_sparse_set",
            details={"r": used, "c_hat": c_hat, "delta0": delta0, "removal": removal.to_json()},
        )

    @staticmethod
    def bounded_frame_sample(
        s: IntervalUnion,
        epsilon: float,
        window: int,
        r: Optional[int] = None,
        c_hat: Optional[float] = None,
        eta: Optional[int] = None,
    ) -> ExponentialSelection:
        """
        Separated Λ with frame bounds (1 ± ε)·a|S|/ε² on the periodic section

        The exponentials sampled on S ∩ M^{−1}ℤ, M = #window, form a
        Parseval frame; the sparse partition at ε then yields leaves with
        ‖2^N Σ_Λ e_k ⊗ e_k − I‖ ≤ ε, so a = 2^{−N}ε²/|S|.

        Raises:
            HypothesisError: If no grid point lies in S or the ball-count condition fails
        """
        epsilon = validate_unit_interval(epsilon, "epsilon")
        freqs = _window(window)
        system = _periodic_system(s, freqs)
        if system.dim == 0:
            raise HypothesisError(f"No grid point of step 1/{len(freqs)} lies in S", reason="empty_system")
        measure = system.dim / len(freqs)
        space = DoublingPointSet.integer_interval(-int(window), int(window) + 1)
        operators = [PsdMatrix.rank_one(u) for u in system.vectors]
        c_hat = _c_hat(c_hat, eta)
        depth = BinarySelectorService.sse_depth(measure, epsilon)
        if r is not None:
            radii = [int(r)]
        else:
            radii = _radii(space, c_hat * epsilon ** 2 / measure, depth)
            if not radii:
                raise HypothesisError(
                    f"No radius satisfies sup #B(x, r) ≤ ĉε²/|S| = {c_hat * epsilon ** 2 / measure:.6g}",
                    reason="tx2_violated",
                )
        partition = None
        used = radii[0]
        for k, rr in enumerate(radii):
            try:
                partition = MetricService.sparse_selector_partition(
                    space, operators, epsilon, rr, c_hat=c_hat, delta=measure, eta=eta, full_depth=True
                )
                used = rr
                break
            except SelectionFailedError as exc:
                if exc.reason != "not_separated" or k == len(radii) - 1:
                    raise
                logger.warning("Radius %d does not separate at depth %s; trying %d", rr, depth, radii[k + 1])
        tree = partition.tree
        leaf = min(tree.leaves, key=lambda b: (partition.deviations[b], b))
        chosen = list(tree.indices(leaf))
        n = tree.depth
        a = 2.0 ** (-n) * epsilon ** 2 / measure
        target = ((1 - epsilon) * a * measure / epsilon ** 2, (1 + epsilon) * a * measure / epsilon ** 2)
        lo, hi = _spectrum(FrameService.frame_operator(system.subsystem(chosen)).entries)
        if lo < target[0] - settings.TOL_ROOT or hi > target[1] + settings.TOL_ROOT:
            raise SelectionFailedError(f"Frame bounds ({lo:.6g}, {hi:.6g}) leave ({target[0]:.6g}, {target[1]:.6g})")
        selected = [int(freqs[i]) for i in chosen]
        certificate = ExponentialCertificate(
            lambda_min=lo,
            lambda_max=hi,
            target_lo=target[0],
            target_hi=target[1],
            min_gap=_min_gap(selected),
            r=float(used),
            details={"a": a, "depth": n, "leaf": leaf, "grid": len(freqs), "measure": measure},
        )
        return ExponentialSelection(
            frequencies=FrequencySet(window=int(window), selected=tuple(selected)),
            sets=(s,),
            epsilon=epsilon,
            certificates=(certificate,),
            method="sparse_selector_partition",
            details={"r": used, "c_hat": c_hat, "a": a, "depth": n, "deviation": partition.deviations[leaf]},
        )


def _min_gap(freqs: Sequence[int]) -> float:
    f = sorted(freqs)
    return float(min(b - a for a, b in zip(f, f[1:]))) if len(f) > 1 else math.inf


indicator_fourier = ExponentialService.indicator_fourier
exp_gram = ExponentialService.exp_gram
syndetic_riesz_select = ExponentialService.syndetic_riesz_select
unit_norm_removal = ExponentialService.unit_norm_removal
bounded_frame_sample = ExponentialService.bounded_frame_sample
