"""
Separated binary partitions of finite doubling metric spaces
"""
import logging
import math
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from src.config import settings
from src.models.binary import (
    DoublingPointSet,
    Multiset,
    SeparatedSchedule,
    SeparationCertificate,
    SparsePartition,
    SparseRemoval,
)
from src.models.frames import VectorSystem
from src.models.linalg import BlockDiagonalPsd, PsdMatrix
from src.services.binary_selector_service import BinarySelectorService, PairSupplier
from src.services.frame_service import FrameService
from src.utils.errors import DimensionMismatchError, HypothesisError, SelectionFailedError
from src.utils.validators import validate_unit_interval

logger = logging.getLogger(__name__)

REMOVAL_EPSILON = 0.5


class SeparatedPairSupplier(PairSupplier):
    """
    Pairs that drive every leaf towards r-separation.

    While some node holds two points of one cell, points are paired
    inside their cells and a cell's orphan gets a phantom partner.
    Afterwards each point is matched to its nearest unmatched neighbour
    closer than r, in index order; the rest are paired consecutively.
    """

    def __init__(self, space: DoublingPointSet, r: float):
        super().__init__()
        self.space = space
        self.r = float(r)
        self.net = MetricService.net(space, r)
        self.cells = MetricService.cells(space, r, self.net)
        self.cell_of = np.empty(space.n, dtype=int)
        for x, members in self.cells.items():
            self.cell_of[list(members)] = x
        self.stage = 1

    def start_level(self, level: int, frontier: Dict[str, Multiset]) -> None:
        crowded = False
        for counts in frontier.values():
            labels = self.cell_of[[i for i in counts]] if counts else np.zeros(0, dtype=int)
            if len(np.unique(labels)) < len(labels):
                crowded = True
                break
        self.stage = 1 if crowded else 2

    def __call__(self, level: int, b: str, items: Tuple[int, ...]) -> List[Tuple[int, int]]:
        if self.stage == 1:
            return self._within_cells(items)
        return self._proximity_first(items)

    def _within_cells(self, items: Tuple[int, ...]) -> List[Tuple[int, int]]:
        groups: Dict[int, List[int]] = {}
        for i in items:
            groups.setdefault(int(self.cell_of[i]), []).append(i)
        pairs = []
        for x in sorted(groups):
            members = groups[x]
            if len(members) % 2:
                members = members + [self.new_phantom()]
            pairs += [(members[k], members[k + 1]) for k in range(0, len(members), 2)]
        return pairs

    def _proximity_first(self, items: Tuple[int, ...]) -> List[Tuple[int, int]]:
        d = self.space.distances
        matched = set()
        pairs = []
        rest = []
        for x in items:
            if x in matched:
                continue
            close = [y for y in items if y != x and y not in matched and d[x, y] < self.r]
            if close:
                y = min(close, key=lambda z: (d[x, z], z))
                matched.update((x, y))
                pairs.append((x, y))
            else:
                rest.append(x)
        if len(rest) % 2:
            rest.append(self.new_phantom())
        pairs += [(rest[k], rest[k + 1]) for k in range(0, len(rest), 2)]
        return pairs


def _separation(space: DoublingPointSet, r: float, leaves: Dict[str, Tuple[int, ...]], phantoms: int) -> SeparationCertificate:
    return SeparationCertificate(
        r=float(r),
        min_distance={b: space.min_distance(ix) for b, ix in leaves.items()},
        phantom_count=phantoms,
    )


class MetricService:
    """Service for nets, cells and separated selector partitions"""

    @staticmethod
    def net(space: DoublingPointSet, r: float) -> Tuple[int, ...]:
        """Maximal set with pairwise disjoint open balls B(x, r), chosen greedily by index"""
        inside = space.distances < r
        covered = np.zeros(space.n, dtype=bool)
        chosen = []
        for x in range(space.n):
            if not np.any(inside[x] & covered):
                chosen.append(x)
                covered |= inside[x]
        return tuple(chosen)

    @staticmethod
    def cells(space: DoublingPointSet, r: float, net: Sequence[int]) -> Dict[int, Tuple[int, ...]]:
        """
        Partition {K_x} with B(x, r) ⊆ K_x ⊆ B(x, 2r)

        A point outside every net ball joins the nearest net point, ties
        broken by index.
        """
        centers = np.asarray(net, dtype=int)
        members: Dict[int, List[int]] = {int(x): [] for x in centers}
        for p in range(space.n):
            dist = space.distances[p, centers]
            own = np.flatnonzero(dist < r)
            if own.size:
                members[int(centers[own[0]])].append(p)
                continue
            k = int(np.argmin(dist))
            if dist[k] >= 2 * r:
                raise SelectionFailedError(f"Point {p} is not within 2r of the net", reason="net_not_maximal")
            members[int(centers[k])].append(p)
        return {x: tuple(m) for x, m in members.items()}

    @staticmethod
    def separated_pair_partitions(
        space: DoublingPointSet, r: float, depth: Optional[int] = None, eta: Optional[int] = None
    ) -> SeparatedSchedule:
        """
        Depth-N schedule of pair-partitions whose leaves are r-separated

        The first element of each pair goes to the 0-child, so the tree
        is the combinatorial one; any other choice per pair would need
        the same schedule.

        Args:
            space: finite metric space
            r: separation radius
            depth: N with sup #B(x, r) ≤ 2^{N−η}; the smallest such N by default
            eta: defaults to MCPSEL_METRIC_ETA

        Raises:
            HypothesisError: If the ball-count condition fails for N
            SelectionFailedError: If a leaf is not r-separated
        """
        if r <= 0:
            raise HypothesisError(f"r must be positive, got {r}", reason="invalid_parameter")
        eta = settings.METRIC_ETA if eta is None else int(eta)
        top = space.sup_ball(r)
        if depth is None:
            depth = max(0, math.ceil(math.log2(max(top, 1)))) + eta
        if top > 2 ** (depth - eta):
            raise HypothesisError(
                f"sup #B(x, r) = {top} exceeds 2^(N−η) = {2.0 ** (depth - eta):g}", reason="cep_violated", depth=depth, eta=eta
            )
        if space.n == 0:
            raise HypothesisError("The point set is empty", reason="empty_family")
        supplier = SeparatedPairSupplier(space, r)
        tree = BinarySelectorService.iterate_ks2([PsdMatrix.zeros(1)] * space.n, depth, supplier, delta=0.0)
        certificate = _separation(space, r, tree.leaf_sets(), tree.phantom_count)
        if not certificate.separated:
            raise SelectionFailedError(f"Leaves are not {r}-separated after {depth} levels", reason="not_separated")
        return SeparatedSchedule(tree=tree, certificate=certificate, net=supplier.net, cells=supplier.cells)

    @staticmethod
    def sparse_selector_partition(
        space: DoublingPointSet,
        operators: Sequence[PsdMatrix],
        epsilon: float,
        r: float,
        c_hat: Optional[float] = None,
        delta: Optional[float] = None,
        eta: Optional[int] = None,
        full_depth: bool = False,
    ) -> SparsePartition:
        """
        r-separated sets I_b with ‖2^N Σ_{x∈I_b} T_x − T‖ ≤ ε

        The tree grows until every leaf is r-separated, at most to the
        largest depth N with B_N − 1 ≤ ε.

        Args:
            space: points indexing the operators
            operators: T_x with Σ T_x ⪯ I
            epsilon: 0 < ε < 1
            r: separation radius with sup #B(x, r) ≤ ĉ ε²/δ
            c_hat: ĉ, default 2^{η−1}/C²
            delta: trace cap, default the largest trace
            full_depth: grow to N even when an earlier level is already separated

        Raises:
            HypothesisError: If the ball-count condition fails
            SelectionFailedError: If the leaves are not separated at the final depth
        """
        if len(operators) != space.n:
            raise DimensionMismatchError(f"{len(operators)} operators for {space.n} points")
        epsilon = validate_unit_interval(epsilon, "epsilon")
        eta = settings.METRIC_ETA if eta is None else int(eta)
        if delta is None:
            delta = max((float(np.real(np.trace(t.entries))) for t in operators), default=0.0)
        constant = BinarySelectorService.derive_numer_constant()
        if c_hat is None:
            c_hat = 2.0 ** (eta - 1) / constant ** 2
        top = space.sup_ball(r)
        if delta > 0 and top > c_hat * epsilon ** 2 / delta:
            raise HypothesisError(
                f"sup #B(x, r) = {top} exceeds ĉ ε²/δ = {c_hat * epsilon ** 2 / delta:.6g}", reason="tx2_violated"
            )
        depth = BinarySelectorService.sse_depth(delta, epsilon)
        if depth is None:
            depth = math.ceil(math.log2(max(space.n, 1))) + 1

        def separated(level: int, frontier: Dict[str, Multiset]) -> bool:
            return all(space.min_distance(list(counts)) >= r for counts in frontier.values())

        tree = BinarySelectorService.iterate_ks2(
            operators, depth, SeparatedPairSupplier(space, r), delta=delta, stop=None if full_depth else separated
        )
        certificate = _separation(space, r, tree.leaf_sets(), tree.phantom_count)
        if not certificate.separated:
            raise SelectionFailedError(
                f"Leaves are not {r}-separated at depth {tree.depth}", reason="not_separated", depth=tree.depth
            )
        deviations = {b: tree.deviations[b] for b in tree.leaves}
        logger.info("sparse partition: depth %d, %d leaves, worst deviation %.3g", tree.depth, len(tree.leaves), max(deviations.values()))
        return SparsePartition(tree=tree, separation=certificate, epsilon=epsilon, delta=delta, deviations=deviations)

    @staticmethod
    def remove_sparse_set(
        space: DoublingPointSet,
        systems: Sequence[VectorSystem],
        r: float,
        c_hat: Optional[float] = None,
        eta: Optional[int] = None,
        epsilon: float = REMOVAL_EPSILON,
    ) -> SparseRemoval:
        """
        r-separated X′ such that every {u_x^{(j)}}_{x∉X′} is a Riesz sequence

        The Naimark complements v^{(j)} of the Bessel-1 systems give block
        operators T_x = ⊕_j v_x^{(j)} ⊗ v_x^{(j)} with Σ T_x ⪯ I; for Parseval
        systems the sum is I. X′ is the leaf of the
        sparse partition at ε (1/2 by default) with the largest 1 − ‖Σ_{x∉X′} T_x‖,
        which bounds the lower Riesz bound of each remainder.

        Raises:
            HypothesisError: On a Bessel bound above 1 or a violated ball-count condition
            SelectionFailedError: If a recomputed bound misses its certificate
        """
        if not systems:
            raise HypothesisError("remove_sparse_set needs at least one system", reason="empty_family")
        for k, s in enumerate(systems):
            if s.n != space.n:
                raise DimensionMismatchError(f"System {k} has {s.n} vectors for {space.n} points")
            bessel = FrameService.frame_bounds(s).bessel if s.n and s.dim else 0.0
            if bessel > 1 + settings.TOL_EQ * 100:
                raise HypothesisError(f"System {k} has Bessel bound {bessel:.6g} above 1", reason="bessel_exceeds_one", system=k)
        eps = [float(np.min(s.norms_squared())) for s in systems]
        delta0 = float(sum(1.0 - e for e in eps))
        constant = BinarySelectorService.derive_numer_constant()
        eta = settings.METRIC_ETA if eta is None else int(eta)
        if c_hat is None:
            c_hat = 2.0 ** (eta - 1) / constant ** 2
        top = space.sup_ball(r)
        if delta0 > 0 and top > c_hat * epsilon ** 2 / delta0:
            raise HypothesisError(
                f"sup #B(x, r) = {top} exceeds ĉε²/δ₀ = {c_hat * epsilon ** 2 / delta0:.6g}", reason="mpa2_violated"
            )
        complements = [FrameService.complement_vectors(s) for s in systems]
        dims = [c.dim for c in complements]
        total_dim = sum(dims)
        if total_dim == 0:
            partition = None
            removed: Tuple[int, ...] = ()
            certified = [1.0] * len(systems)
            depth = 0
        else:
            operators = [
                BlockDiagonalPsd.from_blocks([PsdMatrix.assume_psd(np.outer(c.vectors[x], c.vectors[x].conj())) for c in complements]).assembled()
                for x in range(space.n)
            ]
            partition = MetricService.sparse_selector_partition(
                space, operators, epsilon, r, c_hat=c_hat, eta=eta, full_depth=True
            )
            tree = partition.tree

            total = sum((t.entries for t in operators), np.zeros((total_dim, total_dim), dtype=np.complex128))

            def blockwise(b: str) -> List[float]:
                # λ_min of the remainder's Gram is 1 − λ_max(Σ_{x∉X′} T_x) per block
                part = sum((operators[x].entries for x in tree.indices(b)), np.zeros_like(total))
                rest_sum = total - part
                out, offset = [], 0
                for dj in dims:
                    block = rest_sum[offset:offset + dj, offset:offset + dj]
                    out.append(1.0 - float(scipy.linalg.eigvalsh(block)[-1]) if dj else 1.0)
                    offset += dj
                return out

            scores = {b: blockwise(b) for b in tree.leaves}
            best = max(tree.leaves, key=lambda b: min(scores[b]))
            removed = tree.indices(best)
            certified = scores[best]
            depth = tree.depth
        dyadic = 2.0 ** (-depth) * (1 - epsilon)
        if min(certified) < dyadic - settings.TOL_ROOT:
            raise SelectionFailedError(f"Certified lower bound {min(certified):.6g} below 2^(−N)(1 − ε) = {dyadic:.6g}")
        rest = [x for x in range(space.n) if x not in set(removed)]
        riesz: List[Optional[float]] = []
        for j, s in enumerate(systems):
            if not rest:
                riesz.append(None)
                continue
            value = FrameService.frame_bounds(s.subsystem(rest)).riesz_lower
            if value < certified[j] - settings.TOL_ROOT:
                raise SelectionFailedError(
                    f"System {j}: lower Riesz bound {value:.6g} below the certified {certified[j]:.6g}", system=j
                )
            riesz.append(value)
        return SparseRemoval(
            removed=tuple(removed),
            riesz_lower=riesz,
            certified_lower=certified,
            dyadic_lower=dyadic,
            formula_lower=2 * constant ** 2 * delta0,
            partition=partition,
            epsilon=epsilon,
        )


net = MetricService.net
cells = MetricService.cells
separated_pair_partitions = MetricService.separated_pair_partitions
sparse_selector_partition = MetricService.sparse_selector_partition
remove_sparse_set = MetricService.remove_sparse_set
