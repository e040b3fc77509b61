"""
Finite frame analysis and the Riesz-sequence selectors
"""
import hashlib
import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from src.config import settings
from src.models.frames import (
    DualityCheck,
    FeichtingerPlan,
    FrameBounds,
    MultiPaving,
    NaimarkPair,
    REpsPlan,
    VectorSystem,
)
from src.models.linalg import BlockDiagonalPsd, HermitianMatrix, PsdMatrix
from src.models.polynomial import RealPolynomial
from src.models.selection import SelectorCertificate, SelectorInstance, canonical_json
from src.services.selector_service import SelectorService
from src.utils.errors import DimensionMismatchError, HypothesisError, SelectionFailedError
from src.utils.parallel import ordered_map
from src.utils.validators import validate_block_sizes, validate_blocks, validate_unit_interval

logger = logging.getLogger(__name__)

SMALL_DELTA0 = 1.5 - math.sqrt(2)


def _gram_array(system: VectorSystem) -> np.ndarray:
    return system.vectors.conj() @ system.vectors.T


def _frame_operator_array(system: VectorSystem) -> np.ndarray:
    return system.vectors.T @ system.vectors.conj()


def _bessel(system: VectorSystem) -> float:
    if system.n == 0 or system.dim == 0:
        return 0.0
    m = _frame_operator_array(system) if system.dim <= system.n else _gram_array(system)
    return float(scipy.linalg.eigvalsh(m)[-1])


def _bl2_rule(eps: Sequence[float]) -> Tuple[int, float, float]:
    """Block size, δ₀ and the lower-bound constant of the single-stage selector"""
    delta0 = float(sum(1.0 - e for e in eps))
    if delta0 < SMALL_DELTA0:
        return 2, delta0, 0.5 - delta0 - math.sqrt(2 * delta0)
    e0 = min(eps)
    r = max(2, math.ceil(21 * delta0 / e0 ** 2 - 1e-12))
    return r, delta0, 1.0 - 1.0 / (21 * delta0) - 2.0 / math.sqrt(21)


def _block_instance(
    parts: Sequence[VectorSystem],
    labels: Sequence[int],
    blocks: Sequence[Sequence[int]],
    block_eps: Sequence[float],
) -> SelectorInstance:
    """Operators T_i = ⊕_j u_i^{(j)} ⊗ u_i^{(j)}; row k of every part belongs to labels[k]"""
    operators = {}
    for pos, label in enumerate(labels):
        operators[label] = BlockDiagonalPsd.from_blocks([PsdMatrix.rank_one(p.vectors[pos]) for p in parts]).assembled()
    return SelectorInstance(
        ground=tuple(labels),
        operators=operators,
        blocks=tuple(tuple(b) for b in blocks),
        epsilon=max(block_eps),
        block_eps=tuple(float(e) for e in block_eps),
        block_dims=tuple(p.dim for p in parts),
    )


def _systems_hash(systems: Sequence[VectorSystem], blocks: Sequence[Sequence[int]], extra: Dict[str, Any]) -> str:
    digest = hashlib.sha256()
    digest.update(canonical_json({"blocks": [list(b) for b in blocks], **extra}).encode("utf-8"))
    for s in systems:
        digest.update(str(s.dim).encode("utf-8"))
        digest.update(np.ascontiguousarray(s.vectors).tobytes())
    return digest.hexdigest()


def _trivial_witness() -> RealPolynomial:
    return RealPolynomial.monomial(1)


class FrameService:
    """Service for finite vector systems"""

    @staticmethod
    def gram(system: VectorSystem) -> HermitianMatrix:
        """
        Gram matrix with entries ⟨u_j, u_i⟩

        Raises:
            HypothesisError: If the system is empty
        """
        if system.n == 0:
            raise HypothesisError("The Gram matrix of an empty system is undefined", reason="empty_system")
        return HermitianMatrix.from_array(_gram_array(system), tol=1e-9)

    @staticmethod
    def frame_operator(system: VectorSystem) -> HermitianMatrix:
        """S = Σ u_i ⊗ u_i"""
        if system.dim == 0:
            raise HypothesisError("A system in dimension 0 has no frame operator", reason="empty_system")
        return HermitianMatrix.from_array(_frame_operator_array(system), tol=1e-9)

    @staticmethod
    def frame_bounds(system: VectorSystem) -> FrameBounds:
        if system.n == 0:
            raise HypothesisError("Frame bounds of an empty system are undefined", reason="empty_system")
        w = scipy.linalg.eigvalsh(_gram_array(system))
        return FrameBounds(bessel=float(w[-1]), riesz_lower=max(0.0, float(w[0])), riesz_upper=float(w[-1]))

    @staticmethod
    def complete_to_parseval(system: VectorSystem, tol: Optional[float] = None) -> VectorSystem:
        """
        Append √λ_k·w_k for the spectral decomposition I − S = Σ λ_k w_k ⊗ w_k

        Raises:
            HypothesisError: If the Bessel bound exceeds 1
        """
        tol = settings.TOL_EQ if tol is None else tol
        s = _frame_operator_array(system)
        w, q = scipy.linalg.eigh(np.eye(system.dim) - s)
        if w.size and w[0] < -tol:
            raise HypothesisError(f"Bessel bound {1 - w[0]:.6g} exceeds 1", reason="bessel_exceeds_one")
        keep = w > tol
        added = (q[:, keep] * np.sqrt(w[keep])).T
        return VectorSystem(dim=system.dim, vectors=np.vstack([system.vectors, added]))

    @staticmethod
    def naimark_complement(parseval: VectorSystem, tol: Optional[float] = None) -> NaimarkPair:
        """
        Complement v_i with Gram(u) + Gram(v) = I_n

        Raises:
            HypothesisError: If the system is not Parseval
        """
        tol = settings.TOL_EQ if tol is None else tol
        n, d = parseval.n, parseval.dim
        drift = float(np.max(np.abs(_frame_operator_array(parseval) - np.eye(d)))) if d else 0.0
        if drift > tol:
            raise HypothesisError(f"System is not Parseval (frame operator off identity by {drift:.3e})", reason="not_parseval")
        if n == d:
            return NaimarkPair(original=parseval, complement=VectorSystem(dim=0, vectors=np.zeros((n, 0))))
        w, q = scipy.linalg.eigh(np.eye(n) - _gram_array(parseval))
        basis = q[:, w > 0.5]
        return NaimarkPair(original=parseval, complement=VectorSystem(dim=basis.shape[1], vectors=basis.conj()))

    @staticmethod
    def complement_vectors(system: VectorSystem) -> VectorSystem:
        """Naimark complement of a Bessel-1 system, restricted to its own n indices"""
        pair = FrameService.naimark_complement(FrameService.complete_to_parseval(system))
        return pair.complement.subsystem(range(system.n))

    @staticmethod
    def riesz_bessel_duality_check(pair: NaimarkPair, subset: Sequence[int]) -> DualityCheck:
        subset = list(subset)
        if not subset:
            raise HypothesisError("Duality check needs a nonempty index set", reason="empty_system")
        lower = FrameService.frame_bounds(pair.original.subsystem(subset)).riesz_lower
        bessel = _bessel(pair.complement.subsystem(subset)) if pair.complement.dim else 0.0
        return DualityCheck(riesz_lower=lower, bessel=bessel)

    @staticmethod
    def norm_reduce(system: VectorSystem, eps: float) -> VectorSystem:
        """Scale every u with ‖u‖² > ε down to ‖u‖² = ε"""
        norms = system.norms_squared()
        factors = np.where(norms > eps, np.sqrt(eps / np.where(norms > 0, norms, 1.0)), 1.0)
        return system.scaled(factors)

    @staticmethod
    def feichtinger_block_plan(eps: Sequence[float], c_bl: Optional[float] = None) -> FeichtingerPlan:
        """
        Block sizes for the Feichtinger selector

        All ε_j ≥ 1/2 use a single stage with r = 2 when δ₀ < 3/2 − √2 and
        r = ⌈21δ₀/ε_min²⌉ otherwise. Smaller ε_j add a first stage whose
        chunks of size ⌈6Σ_{ε_l<1/2} ε_l / ε_min²⌉ lift them above 1/2.

        Args:
            eps: lower bounds ε_j on ‖u_i^{(j)}‖²
            c_bl: optional constant C fixing the number of chunks per block

        Returns:
            FeichtingerPlan
        """
        eps = tuple(validate_unit_interval(e, "ε_j", closed_right=True) for e in eps)
        if not eps:
            raise HypothesisError("At least one system is needed", reason="empty_family")
        small = [e for e in eps if e < 0.5]
        if not small:
            r, delta0, c = _bl2_rule(eps)
            return FeichtingerPlan(eps=eps, delta0=delta0, r=r, constant=c, two_stage=False)
        e0 = min(eps)
        mass = sum(small)
        chunk = math.ceil(6 * mass / e0 ** 2 - 1e-12)
        lifted = [e / (1.0 / chunk + e + 2 * math.sqrt(mass / chunk)) if e < 0.5 else e for e in eps]
        r2, _, c = _bl2_rule(lifted)
        q = r2
        if c_bl is not None:
            q = math.ceil((c_bl / 6) * (sum(e0 / e for e in small) + sum(1 - e for e in eps if e >= 0.5)) - 1e-12)
            if q < r2:
                raise HypothesisError(
                    f"C = {c_bl} yields {q} chunks per block, fewer than the {r2} the second stage needs",
                    reason="constant_too_small",
                )
        return FeichtingerPlan(
            eps=eps, delta0=float(sum(1 - e for e in eps)), r=r2, constant=c, two_stage=True, chunk=chunk, chunks_per_block=q
        )

    @staticmethod
    def _weave_complements(
        systems: Sequence[VectorSystem], labels: Sequence[int], blocks: Sequence[Sequence[int]], eps: Sequence[float], r: int
    ) -> Tuple[List[int], Optional[SelectorCertificate]]:
        """Selector whose complements have small Bessel bounds; systems have norms² exactly ε_j"""
        comps = ordered_map(FrameService.complement_vectors, systems)
        parts = [(c, max(0.0, 1.0 - e)) for c, e in zip(comps, eps) if c.dim > 0]
        if not parts:
            return [b[0] for b in blocks], None
        instance = _block_instance([c for c, _ in parts], labels, blocks, [e for _, e in parts])
        cert = SelectorService.block_weaver_select(instance, r)
        return list(cert.selected), cert

    @staticmethod
    def feichtinger_select(
        systems: Sequence[VectorSystem],
        blocks: Sequence[Sequence[int]],
        eps: Optional[Sequence[float]] = None,
        c_bl: Optional[float] = None,
    ) -> SelectorCertificate:
        """
        Selector J with every {u_i^{(j)}}_{i∈J} Riesz with lower bound ≥ c·ε_j

        Args:
            systems: Bessel-1 systems over the same index set
            blocks: disjoint index blocks J_k
            eps: ε_j ≤ min ‖u_i^{(j)}‖²; defaults to the smallest squared norm
            c_bl: optional constant for the two-stage chunk count

        Raises:
            HypothesisError: On Bessel bounds above 1, small norms or small blocks
            SelectionFailedError: If a system misses its lower Riesz bound
        """
        systems = list(systems)
        if not systems:
            raise HypothesisError("At least one system is needed", reason="empty_family")
        n = systems[0].n
        if any(s.n != n for s in systems):
            raise DimensionMismatchError("Systems must share one index set")
        for j, s in enumerate(systems):
            b = _bessel(s)
            if b > 1 + settings.TOL_EQ:
                raise HypothesisError(f"System {j} has Bessel bound {b:.6g} > 1", reason="bessel_exceeds_one", system=j)
        if eps is None:
            eps = [float(np.min(s.norms_squared())) for s in systems]
        for j, (s, e) in enumerate(zip(systems, eps)):
            if float(np.min(s.norms_squared())) < e - settings.TOL_EQ:
                raise HypothesisError(f"System {j} has a vector with ‖u‖² below ε = {e:.6g}", reason="norm_below_eps", system=j)
        validate_blocks(range(n), blocks)
        plan = FrameService.feichtinger_block_plan(eps, settings.C_BL if c_bl is None else c_bl)
        validate_block_sizes(blocks, plan.block_size)
        logger.info("Feichtinger plan: two_stage=%s block_size=%d constant=%.6g", plan.two_stage, plan.block_size, plan.constant)
        reduced = [FrameService.norm_reduce(s, e) for s, e in zip(systems, plan.eps)]
        details: Dict[str, Any] = {"plan": plan.to_json()}
        if not plan.two_stage:
            selected, cert = FrameService._weave_complements(reduced, list(range(n)), blocks, plan.eps, plan.r)
            constant = plan.constant
        else:
            small = [j for j, e in enumerate(plan.eps) if e < 0.5]
            chunks = [tuple(b[t * plan.chunk:(t + 1) * plan.chunk]) for b in blocks for t in range(plan.chunks_per_block)]
            labels = sorted(i for c in chunks for i in c)
            stage1 = _block_instance([reduced[j].subsystem(labels) for j in small], labels, chunks, [plan.eps[j] for j in small])
            cert1 = SelectorService.block_weaver_select(stage1, plan.chunk)
            tilde = sorted(cert1.selected)
            kept = set(tilde)
            lifted_bessel = {j: _bessel(reduced[j].subsystem(tilde)) for j in small}
            lifted = [plan.eps[j] / lifted_bessel[j] if j in lifted_bessel else plan.eps[j] for j in range(len(systems))]
            stage2 = [
                reduced[j].subsystem(tilde).scaled(1.0 / math.sqrt(lifted_bessel[j])) if j in lifted_bessel else reduced[j].subsystem(tilde)
                for j in range(len(systems))
            ]
            blocks2 = [tuple(i for i in b if i in kept) for b in blocks]
            r2, _, constant = _bl2_rule(lifted)
            if any(len(b) < r2 for b in blocks2):
                raise SelectionFailedError(f"First stage left fewer than {r2} candidates in some block")
            logger.info("First stage kept %d indices; second stage r = %d", len(tilde), r2)
            selected, cert = FrameService._weave_complements(stage2, tilde, blocks2, lifted, r2)
            details.update({"stage_one_bessel": [lifted_bessel[j] for j in small], "lifted_eps": lifted, "stage_one_selected": tilde})
        lower, upper = [], []
        for s in systems:
            fb = FrameService.frame_bounds(s.subsystem(sorted(selected)))
            lower.append(fb.riesz_lower)
            upper.append(fb.riesz_upper)
        promised = [constant * e for e in plan.eps]
        for j, (a, p) in enumerate(zip(lower, promised)):
            if a < p - settings.TOL_EQ:
                raise SelectionFailedError(f"System {j} lower Riesz bound {a:.6g} is below c·ε_j = {p:.6g}", system=j)
        details.update({"constant": constant, "riesz_upper": upper})
        return SelectorCertificate(
            selected=tuple(sorted(selected)),
            achieved_norm=lower,
            promised_bound=promised,
            bound_formula="c*eps_j (lower Riesz bound)",
            witness_polynomial=cert.witness_polynomial if cert else _trivial_witness(),
            witness_kind=cert.witness_kind if cert else "trivial",
            instance_hash=_systems_hash(systems, blocks, {"eps": list(plan.eps)}),
            method=cert.method if cert else "trivial",
            details=details,
        )

    @staticmethod
    def r_eps_block_rule(eps: Sequence[float], epsilon: float, constant: Optional[float] = None) -> REpsPlan:
        """
        Block plan for unit-norm systems with ε_j = 1/B_j

        r = (C/ε²)(1 + Σ_{ε_j<1/2} ε_j / ε_min²)·max(1, Σ_{ε_j<1/(1+ε)} ε_j + Σ_j (1 − ε_j))
        """
        epsilon = validate_unit_interval(epsilon, "ε")
        c = settings.C_REPS if constant is None else float(constant)
        eps = tuple(float(e) for e in eps)
        if not eps:
            raise HypothesisError("At least one system is needed", reason="empty_family")
        small = [e for e in eps if e < 0.5]
        e0 = min(eps)
        mass = max(1.0, sum(e for e in eps if e < 1 / (1 + epsilon)) + sum(1 - e for e in eps))
        r = c / epsilon ** 2 * (1 + sum(small) / e0 ** 2) * mass
        chunks = math.ceil(c / (6 * epsilon ** 2) * mass - 1e-12)
        chunk = math.ceil(6 * sum(small) / e0 ** 2 - 1e-12) if small else 1
        return REpsPlan(eps=eps, epsilon=epsilon, constant=c, r=r, chunk=chunk, chunks_per_block=max(1, chunks), stage_one=bool(small))

    @staticmethod
    def r_eps_select(
        systems: Sequence[VectorSystem],
        blocks: Sequence[Sequence[int]],
        epsilon: float,
        constant: Optional[float] = None,
        enforce_block_rule: bool = True,
    ) -> SelectorCertificate:
        """
        Selector J with every unit-norm system Riesz with bounds 1 − ε and 1 + ε

        Systems with Bessel bound above 2 are first thinned by a redundant
        selector; the rest runs one block selection over the scaled systems
        and their Naimark complements.

        Raises:
            HypothesisError: On non-unit vectors or blocks below the plan
            SelectionFailedError: If some system misses the (1 ± ε) bounds
        """
        systems = list(systems)
        if not systems:
            raise HypothesisError("At least one system is needed", reason="empty_family")
        n = systems[0].n
        if any(s.n != n for s in systems):
            raise DimensionMismatchError("Systems must share one index set")
        for j, s in enumerate(systems):
            drift = float(np.max(np.abs(s.norms_squared() - 1.0))) if s.n else 0.0
            if drift > settings.TOL_EQ:
                raise HypothesisError(f"System {j} is not unit-norm (drift {drift:.3e})", reason="not_unit_norm", system=j)
        validate_blocks(range(n), blocks)
        bessel = [max(1.0, _bessel(s)) for s in systems]
        plan = FrameService.r_eps_block_rule([1.0 / b for b in bessel], epsilon, constant)
        validate_block_sizes(blocks, plan.block_size)
        if enforce_block_rule:
            validate_block_sizes(blocks, math.ceil(plan.r - 1e-12))
        logger.info("R_eps plan: r=%.6g chunk=%d chunks=%d stage_one=%s", plan.r, plan.chunk, plan.chunks_per_block, plan.stage_one)
        details: Dict[str, Any] = {"plan": plan.to_json(), "bessel": bessel}
        q = plan.chunks_per_block
        small = [j for j, e in enumerate(plan.eps) if e < 0.5]
        if small:
            chunks = [tuple(b[t * plan.chunk:(t + 1) * plan.chunk]) for b in blocks for t in range(q)]
            labels = sorted(i for c in chunks for i in c)
            stage1 = _block_instance(
                [systems[j].subsystem(labels).scaled(math.sqrt(plan.eps[j])) for j in small],
                labels, chunks, [plan.eps[j] for j in small],
            )
            tilde = sorted(SelectorService.block_weaver_select(stage1, plan.chunk).selected)
        else:
            tilde = sorted(i for b in blocks for i in b[:q])
        kept = set(tilde)
        eps_prime = list(plan.eps)
        for j in small:
            eps_prime[j] = min(0.5, 1.0 / max(1e-300, _bessel(systems[j].subsystem(tilde))))
        details.update({"stage_one_selected": tilde if small else None, "eps_prime": eps_prime})
        scaled = [systems[j].subsystem(tilde).scaled(math.sqrt(eps_prime[j])) for j in range(len(systems))]
        tight = [j for j in range(len(systems)) if eps_prime[j] < 1 / (1 + epsilon)]
        comps = ordered_map(FrameService.complement_vectors, scaled)
        parts, part_eps, desired = [], [], []
        for j in tight:
            parts.append(scaled[j])
            part_eps.append(eps_prime[j])
            desired.append(eps_prime[j] * (1 + epsilon))
        for j, c in enumerate(comps):
            if c.dim == 0:
                continue
            parts.append(c)
            part_eps.append(1.0 - eps_prime[j])
            desired.append(1.0 - eps_prime[j] * (1 - epsilon))
        blocks2 = [tuple(i for i in b if i in kept)[:q] for b in blocks]
        if parts:
            instance = _block_instance(parts, tilde, blocks2, part_eps)
            total = sum(part_eps)
            promised = [1.0 / q + e + 2 * math.sqrt(total / q) for e in part_eps]
            targets = [min(p, t) for p, t in zip(promised, desired)]
            cert = SelectorService.block_weaver_select(instance, q, targets=targets)
            selected = list(cert.selected)
        else:
            cert = None
            selected = [b[0] for b in blocks2]
        bounds = [FrameService.frame_bounds(s.subsystem(sorted(selected))) for s in systems]
        achieved = [[fb.riesz_lower, fb.riesz_upper] for fb in bounds]
        for j, (lo, hi) in enumerate(achieved):
            if lo < 1 - epsilon - settings.TOL_EQ or hi > 1 + epsilon + settings.TOL_EQ:
                raise SelectionFailedError(
                    f"System {j} Riesz bounds ({lo:.6g}, {hi:.6g}) leave (1 − ε, 1 + ε) for ε = {epsilon}", system=j
                )
        return SelectorCertificate(
            selected=tuple(sorted(selected)),
            achieved_norm=achieved,
            promised_bound=[[1 - epsilon, 1 + epsilon] for _ in systems],
            bound_formula="[1-eps, 1+eps]",
            witness_polynomial=cert.witness_polynomial if cert else _trivial_witness(),
            witness_kind=cert.witness_kind if cert else "trivial",
            instance_hash=_systems_hash(systems, blocks, {"epsilon": epsilon, "constant": plan.constant}),
            method=cert.method if cert else "trivial",
            details=details,
        )

    @staticmethod
    def dual_riesz_basis(basis: VectorSystem) -> VectorSystem:
        """
        Biorthogonal system u*_i with ⟨u_i, u*_j⟩ = δ_ij

        Raises:
            DimensionMismatchError: If the system is not square
            HypothesisError: If the Gram matrix is singular
        """
        if basis.n != basis.dim or basis.n == 0:
            raise DimensionMismatchError(f"A basis of C^{basis.dim} needs exactly {basis.dim} vectors, got {basis.n}")
        smallest = float(scipy.linalg.svdvals(basis.vectors)[-1])
        if smallest < math.sqrt(settings.TOL_EQ):
            raise HypothesisError(f"Gram matrix is singular (smallest singular value {smallest:.3e})", reason="singular_gram")
        inverse = scipy.linalg.inv(basis.vectors)
        return VectorSystem(dim=basis.dim, vectors=inverse.conj().T)

    @staticmethod
    def dual_bounds_pair(basis: VectorSystem, dual: VectorSystem, subset: Sequence[int]) -> Dict[str, Any]:
        """
        Riesz bounds of u_J and u*_J

        The reciprocity (A*, B*) = (1/B, 1/A) is exact for the full index
        set; for proper subsets the residual is reported as None.
        """
        subset = sorted(subset)
        mine = FrameService.frame_bounds(basis.subsystem(subset))
        theirs = FrameService.frame_bounds(dual.subsystem(subset))
        residual = None
        if len(subset) == basis.n and mine.riesz_lower > 0:
            residual = max(abs(theirs.riesz_lower - 1 / mine.bessel), abs(theirs.bessel - 1 / mine.riesz_lower))
        return {"basis": mine, "dual": theirs, "reciprocity_residual": residual}

    @staticmethod
    def multi_pave_projections(systems: Sequence[VectorSystem], epsilon: float, r: Optional[int] = None) -> MultiPaving:
        """
        Partition S_1, ..., S_r with every {u_i^{(j)}}_{i∈S_k} Bessel ≤ (1 + ε)/2

        Copy (i, k) carries u_i^{(j)} in the k-th compartment of (C^{d_j})^{⊕r}
        for every system j; a block selector over {(i, k)}_k assigns i to S_k.

        Raises:
            HypothesisError: On norms other than 1/2, non-Parseval input or r too small
            SelectionFailedError: If some part misses the bound
        """
        systems = list(systems)
        if not systems:
            raise HypothesisError("At least one system is needed", reason="empty_family")
        epsilon = validate_unit_interval(epsilon, "ε")
        n = systems[0].n
        if any(s.n != n for s in systems):
            raise DimensionMismatchError("Systems must share one index set")
        for j, s in enumerate(systems):
            if s.n and float(np.max(np.abs(s.norms_squared() - 0.5))) > settings.TOL_EQ:
                raise HypothesisError(f"System {j} does not have ‖u_i‖² = 1/2", reason="norms_not_half", system=j)
            drift = float(np.max(np.abs(_frame_operator_array(s) - np.eye(s.dim)))) if s.dim else 0.0
            if drift > settings.TOL_EQ:
                raise HypothesisError(f"System {j} is not Parseval", reason="not_parseval", system=j)
        count = len(systems)
        r_min = math.ceil(9 * count / epsilon ** 2 - 1e-12)
        r = r_min if r is None else int(r)
        if r < r_min:
            raise HypothesisError(f"r = {r} is below 18m/ε² = {r_min}", reason="r_too_small", required=r_min)
        bound = (1 + epsilon) / 2
        if n == 0:
            return MultiPaving(parts=tuple(() for _ in range(r)), bessel=[[0.0] * count for _ in range(r)], promised=bound)
        dims = [s.dim for s in systems]
        operators = {}
        for i in range(n):
            for k in range(r):
                pieces = []
                for s, d in zip(systems, dims):
                    v = np.zeros(r * d, dtype=np.complex128)
                    v[k * d:(k + 1) * d] = s.vectors[i]
                    pieces.append(PsdMatrix.rank_one(v))
                operators[i * r + k] = BlockDiagonalPsd.from_blocks(pieces).assembled()
        instance = SelectorInstance(
            ground=tuple(range(n * r)),
            operators=operators,
            blocks=tuple(tuple(i * r + k for k in range(r)) for i in range(n)),
            epsilon=0.5,
            block_eps=tuple([0.5] * count),
            block_dims=tuple(r * d for d in dims),
        )
        cert = SelectorService.block_weaver_select(instance, r, targets=[bound] * count)
        parts = tuple(tuple(sorted(c // r for c in cert.selected if c % r == k)) for k in range(r))
        bessel = [[_bessel(s.subsystem(p)) for s in systems] for p in parts]
        for k, row in enumerate(bessel):
            for j, b in enumerate(row):
                if b > bound + settings.TOL_EQ:
                    raise SelectionFailedError(f"Part {k} of system {j} has Bessel bound {b:.6g} > (1 + ε)/2", part=k, system=j)
        logger.info("Multi-paving into %d parts; worst Bessel bound %.6g", r, max((max(row) for row in bessel), default=0.0))
        return MultiPaving(
            parts=parts,
            bessel=bessel,
            promised=bound,
            details={"r": r, "method": cert.method, "selector_promised": cert.promised_bound},
        )


gram = FrameService.gram
frame_operator = FrameService.frame_operator
frame_bounds = FrameService.frame_bounds
complete_to_parseval = FrameService.complete_to_parseval
naimark_complement = FrameService.naimark_complement
complement_vectors = FrameService.complement_vectors
riesz_bessel_duality_check = FrameService.riesz_bessel_duality_check
norm_reduce = FrameService.norm_reduce
feichtinger_block_plan = FrameService.feichtinger_block_plan
feichtinger_select = FrameService.feichtinger_select
r_eps_block_rule = FrameService.r_eps_block_rule
r_eps_select = FrameService.r_eps_select
dual_riesz_basis = FrameService.dual_riesz_basis
dual_bounds_pair = FrameService.dual_bounds_pair
multi_pave_projections = FrameService.multi_pave_projections
