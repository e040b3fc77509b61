import math

import numpy as np
import pytest
import scipy.linalg

from src.models.binary import DoublingPointSet
from src.models.frames import VectorSystem
from src.models.linalg import PsdMatrix
from src.services.metric_service import MetricService
from src.utils.errors import HypothesisError, SelectionFailedError


def twins(count):
    return DoublingPointSet.from_points([10.0 * k + s for k in range(count) for s in (0.0, 0.5)])


def test_point_set_rejects_non_metric():
    with pytest.raises(HypothesisError):
        DoublingPointSet(distances=np.array([[0.0, 1.0], [2.0, 0.0]]))


def test_net_and_cells_cover_space():
    space = DoublingPointSet.integer_interval(0, 40)
    r = 3.0
    net = MetricService.net(space, r)
    assert all(space.distances[x, y] >= r for x in net for y in net if x != y)
    cells = MetricService.cells(space, r, net)
    assert sorted(p for members in cells.values() for p in members) == list(range(40))
    for x, members in cells.items():
        assert set(space.ball(x, r)) <= set(members)
        assert all(space.distances[x, p] < 2 * r for p in members)


@pytest.mark.parametrize("stop,r,depth", [(16, 1.0, 2), (256, 2.0, 4), (256, 4.0, 5), (256, 8.0, 6)])
def test_separated_pair_partitions_integer_interval(stop, r, depth):
    schedule = MetricService.separated_pair_partitions(DoublingPointSet.integer_interval(0, stop), r)
    assert schedule.tree.depth == depth
    assert len(schedule.tree.leaves) == 2 ** depth
    assert schedule.certificate.separated
    leaves = schedule.tree.leaf_sets()
    assert sorted(i for ix in leaves.values() for i in ix) == list(range(stop))
    for ix in leaves.values():
        pts = np.asarray(ix, dtype=float)
        gaps = np.abs(pts[:, None] - pts[None, :])[~np.eye(len(pts), dtype=bool)]
        assert gaps.size == 0 or gaps.min() >= r


def test_separated_pair_partitions_rejects_short_depth():
    with pytest.raises(HypothesisError) as e:
        MetricService.separated_pair_partitions(DoublingPointSet.integer_interval(0, 64), 4.0, depth=3)
    assert e.value.reason == "cep_violated"


def test_sparse_selector_partition_on_twins(frame):
    ops = [PsdMatrix.rank_one(u) for u in frame(128, 2).vectors]
    part = MetricService.sparse_selector_partition(twins(64), ops, 0.6, 1.0, c_hat=1.0)
    assert part.tree.depth == 1
    assert part.separation.separated
    assert max(part.deviations.values()) <= 0.6 + 1e-7
    assert part.to_json()["separation"]["separated"]


def test_sparse_selector_partition_too_shallow(frame):
    ops = [PsdMatrix.rank_one(u) for u in frame(128, 2).vectors]
    with pytest.raises(SelectionFailedError) as e:
        MetricService.sparse_selector_partition(twins(64), ops, 0.5, 1.0, c_hat=1.0)
    assert e.value.reason == "not_separated"


def test_sparse_selector_partition_ball_condition(frame):
    ops = [PsdMatrix.rank_one(u) for u in frame(128, 2).vectors]
    with pytest.raises(HypothesisError) as e:
        MetricService.sparse_selector_partition(twins(64), ops, 0.6, 1.0, c_hat=1e-3)
    assert e.value.reason == "tx2_violated"


def test_remove_sparse_set_on_twins():
    columns = scipy.linalg.dft(128)[:, :127] / math.sqrt(128)
    system = VectorSystem(dim=127, vectors=columns)
    removal = MetricService.remove_sparse_set(twins(64), [system], 1.0, c_hat=1.0)
    assert len(removal.removed) == 64
    assert removal.certified_lower[0] == pytest.approx(0.5)
    assert removal.dyadic_lower == pytest.approx(0.25)
    assert removal.riesz_lower[0] >= 0.5 - 1e-7
    space = twins(64)
    assert space.min_distance(removal.removed) >= 1.0


def test_remove_sparse_set_orthonormal_basis_removes_nothing():
    system = VectorSystem(dim=4, vectors=np.eye(4))
    removal = MetricService.remove_sparse_set(DoublingPointSet.integer_interval(0, 4), [system], 1.0)
    assert removal.removed == ()
    assert removal.riesz_lower == [pytest.approx(1.0)]


def test_remove_sparse_set_rejects_large_bessel():
    system = VectorSystem(dim=1, vectors=np.ones((4, 1)))
    with pytest.raises(HypothesisError) as e:
        MetricService.remove_sparse_set(DoublingPointSet.integer_interval(0, 4), [system], 1.0)
    assert e.value.reason == "bessel_exceeds_one"
