import math

import numpy as np
import pytest

from src.models.linalg import PsdMatrix
from src.services.binary_selector_service import BinarySelectorService, ConsecutivePairSupplier
from src.utils.errors import HypothesisError


def rank_ones(frame):
    return [PsdMatrix.rank_one(u) for u in frame.vectors]


def test_bj_first_step():
    seq = BinarySelectorService.bj_sequence(1 / 16, 1)
    assert seq.values == pytest.approx((1.0, 2.125))
    assert seq.leaf_bound == pytest.approx(1.125)
    assert seq.partial_sum == pytest.approx(0.0)


def test_bj_is_certified_and_monotone():
    for k in range(3, 16):
        delta = 2.0 ** -k
        for depth in range(0, k):
            seq = BinarySelectorService.bj_sequence(delta, depth)
            assert seq.certified
            assert all(b <= c for b, c in zip(seq.values, seq.values[1:]))


def test_bj_depth_zero_allowed_at_delta_one():
    seq = BinarySelectorService.bj_sequence(1.0, 0)
    assert seq.values == (1.0,)
    assert seq.leaf_bound == 0.0


def test_bj_rejects_deep_tree():
    with pytest.raises(HypothesisError) as e:
        BinarySelectorService.bj_sequence(0.25, 2)
    assert e.value.reason == "depth_too_large"


def test_numer_constant_is_stable():
    c = BinarySelectorService.derive_numer_constant()
    assert c == BinarySelectorService.derive_numer_constant()
    assert 0 < c < 100


def test_sse_depth():
    assert BinarySelectorService.sse_depth(0.0, 0.5) is None
    shallow = BinarySelectorService.sse_depth(1e-3, 0.5)
    deep = BinarySelectorService.sse_depth(1e-6, 0.5)
    assert 0 <= shallow <= deep
    seq = BinarySelectorService.bj_sequence(1e-6, deep)
    assert seq.leaf_bound <= 0.5


def test_consecutive_supplier_adds_phantom():
    supplier = ConsecutivePairSupplier()
    assert list(supplier(0, "", (3, 5, 7))) == [(3, 5), (7, -1)]


def test_iterate_ks2_tree(frame):
    ops = rank_ones(frame(32, 2))
    tree = BinarySelectorService.iterate_ks2(ops, depth=3)
    assert tree.depth == 3 and tree.complete
    assert len(tree.leaves) == 8
    leaves = tree.leaf_sets()
    assert sorted(i for ix in leaves.values() for i in ix) == list(range(32))
    for b, dev in tree.deviations.items():
        assert dev <= tree.bj[len(b)] - 1.0 + 1e-7
    ceiling = BinarySelectorService.derive_numer_constant() * math.sqrt(2 ** 3 / 16)
    assert max(tree.deviations[b] for b in tree.leaves) <= ceiling
    assert tree.leaves_csv().splitlines()[0] == "b,size,deviation,bound"


def test_iterate_ks2_even_multiplicities_split_without_pairs(frame):
    ops = [t.scaled(0.5) for t in rank_ones(frame(16, 2))]
    tree = BinarySelectorService.iterate_ks2(ops, depth=1, multiplicities=[2] * 16)
    assert tree.methods[""] == "even"
    assert tree.nodes["0"] == tree.nodes["1"]
    assert tree.deviations["0"] == pytest.approx(0.0, abs=1e-12)


def test_iterate_ks2_descend_and_stop(frame):
    ops = rank_ones(frame(32, 2))
    single = BinarySelectorService.iterate_ks2(ops, depth=3, descend=lambda level, b, kids: 0)
    assert single.leaves == ("000",)
    assert not single.complete
    stopped = BinarySelectorService.iterate_ks2(ops, depth=3, stop=lambda level, frontier: level == 1)
    assert stopped.depth == 1
    assert len(stopped.leaves) == 2


def test_iterate_ks2_rejects_bad_supplier(frame):
    ops = rank_ones(frame(8, 2))
    with pytest.raises(HypothesisError) as e:
        BinarySelectorService.iterate_ks2(ops, depth=1, partition_supplier=lambda level, b, items: [(0, 1)])
    assert e.value.reason == "not_pair_partition"


def test_iterate_ks2_rejects_trace_above_delta(frame):
    ops = rank_ones(frame(8, 2))
    with pytest.raises(HypothesisError) as e:
        BinarySelectorService.iterate_ks2(ops, depth=1, delta=0.1)
    assert e.value.reason == "trace_bound"


def test_iterate_ks2_rejects_sum_above_identity(frame):
    ops = rank_ones(frame(8, 2).scaled(2.0))
    with pytest.raises(HypothesisError):
        BinarySelectorService.iterate_ks2(ops, depth=1)


def test_iterate_ks2_json_tree(frame):
    tree = BinarySelectorService.iterate_ks2(rank_ones(frame(16, 2)), depth=2)
    payload = tree.to_json()
    assert payload["root"]["b"] == ""
    assert [c["b"] for c in payload["root"]["children"]] == ["0", "1"]
    assert math.isclose(payload["bj"][0], 1.0)
    assert np.isclose(tree.bound, tree.bj[2] - 1.0)
