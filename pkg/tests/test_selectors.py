import math

import numpy as np
import pytest
import scipy.linalg

from src.models.linalg import PsdMatrix
from src.models.selection import FiniteRandomPsd, SelectorInstance
from src.services.linalg_service import LinalgService
from src.services.mcp_service import McpService
from src.services.selector_service import SelectorService
from src.utils.errors import BudgetExceededError, HypothesisError


def rank_one_instance(frame, block_size):
    n = frame.n
    return SelectorInstance(
        ground=tuple(range(n)),
        operators={i: PsdMatrix.rank_one(u) for i, u in enumerate(frame.vectors)},
        blocks=tuple(tuple(range(k, k + block_size)) for k in range(0, n, block_size)),
        epsilon=float(np.max(frame.norms_squared())),
    )


def selected_norm(instance, selected):
    return LinalgService.operator_norm(sum(instance.operators[i].entries for i in selected))


def test_greedy_is_sound_against_exhaustive(psd, rng):
    for _ in range(5):
        family = [
            FiniteRandomPsd.uniform([PsdMatrix.from_array(psd(2, rank=1, trace=0.3)) for _ in range(2)])
            for _ in range(4)
        ]
        greedy = SelectorService.greedy_interlacing_select(family, method="interlacing")
        best = SelectorService.exhaustive_select(family)
        final = McpService.maxroot(greedy.witness).value
        assert final <= greedy.initial_maxroot + 1e-7
        assert greedy.initial_maxroot >= best.maxroot - 1e-7
        previous = greedy.initial_maxroot
        for value in greedy.step_maxroots:
            assert value <= previous + 1e-7
            previous = value


def test_exhaustive_budget(psd):
    family = [FiniteRandomPsd.uniform([PsdMatrix.from_array(psd(2, trace=0.1))] * 10) for _ in range(6)]
    with pytest.raises(BudgetExceededError):
        SelectorService.exhaustive_select(family)


def test_weaver_meets_bound(frame):
    instance = rank_one_instance(frame(16, 4), 2)
    cert = SelectorService.weaver_ksr_select(instance, 2)
    promised = (1 / math.sqrt(2) + math.sqrt(instance.epsilon)) ** 2
    assert cert.promised_bound == pytest.approx(promised)
    assert len(cert.selected) == 8
    assert selected_norm(instance, cert.selected) == pytest.approx(cert.achieved_norm)
    assert cert.achieved_norm <= promised + 1e-7
    assert cert.instance_hash == instance.hash()


def test_weaver_truncates_blocks_to_r(frame):
    instance = rank_one_instance(frame(16, 4), 4)
    cert = SelectorService.weaver_ksr_select(instance, 2)
    for block, i in zip(instance.blocks, sorted(cert.selected)):
        assert i in block[:2]


def test_weaver_rejects_small_blocks(frame):
    instance = rank_one_instance(frame(16, 4), 2)
    with pytest.raises(HypothesisError):
        SelectorService.weaver_ksr_select(instance, 3)


def test_weaver_rejects_sum_above_identity(frame):
    f = frame(8, 2)
    instance = rank_one_instance(f.scaled(2.0), 2)
    with pytest.raises(HypothesisError) as e:
        SelectorService.weaver_ksr_select(instance, 2)
    assert e.value.reason in {"sum_exceeds_identity", "trace_bound"}


def test_ks2_meets_bound(frame):
    instance = rank_one_instance(frame(32, 2), 2)
    cert = SelectorService.ks2_select(instance)
    bound = 2 * math.sqrt(instance.epsilon) + instance.epsilon
    total = instance.total()
    chosen = sum(instance.operators[i].entries for i in cert.selected)
    assert LinalgService.operator_norm(chosen - total / 2) <= bound + 1e-7
    assert LinalgService.operator_norm(total - chosen - total / 2) <= bound + 1e-7
    assert len(cert.selected) == 16
    for a, b in instance.blocks:
        assert (a in cert.selected) != (b in cert.selected)


def test_ks2_needs_pairs(frame):
    instance = rank_one_instance(frame(12, 2), 3)
    with pytest.raises(HypothesisError) as e:
        SelectorService.ks2_select(instance)
    assert e.value.reason == "not_pair_partition"


def test_block_selector_meets_per_block_bounds(rng, frame):
    n, dims, r = 16, (2, 2), 2
    frames = [frame(n, d) for d in dims]
    ops = {
        i: PsdMatrix.assume_psd(scipy.linalg.block_diag(*[np.outer(f.vectors[i], f.vectors[i].conj()) for f in frames]))
        for i in range(n)
    }
    block_eps = tuple(d / n for d in dims)
    instance = SelectorInstance(
        ground=tuple(range(n)),
        operators=ops,
        blocks=tuple(tuple(range(k, k + r)) for k in range(0, n, r)),
        epsilon=max(block_eps),
        block_eps=block_eps,
        block_dims=dims,
    )
    cert = SelectorService.block_weaver_select(instance, r)
    chosen = sum(ops[i].entries for i in cert.selected)
    for j, e in enumerate(block_eps):
        s = slice(2 * j, 2 * j + 2)
        bound = 1 / r + e + 2 * math.sqrt(sum(block_eps) / r)
        assert LinalgService.operator_norm(chosen[s, s]) <= bound + 1e-7


def test_block_selector_requires_block_structure(frame):
    instance = rank_one_instance(frame(16, 4), 2)
    with pytest.raises(HypothesisError):
        SelectorService.block_weaver_select(instance, 2)


def test_instance_json_preserves_hash(frame):
    instance = rank_one_instance(frame(8, 2), 2)
    assert SelectorInstance.from_json(instance.to_json()).hash() == instance.hash()


def test_partition_into_two_halves(frame):
    ops = [PsdMatrix.rank_one(u) for u in frame(16, 2).vectors]
    result = SelectorService.partition_from_selector(ops, 2)
    assert sorted(result.parts[0] + result.parts[1]) == list(range(16))
    for achieved, promised in zip(result.achieved, result.promised):
        assert achieved <= promised + 1e-7


def test_partition_single_part_keeps_everything(frame):
    ops = [PsdMatrix.rank_one(u) for u in frame(8, 2).vectors]
    result = SelectorService.partition_from_selector(ops, 1)
    assert result.parts == (tuple(range(8)),)
    assert result.achieved == pytest.approx([1.0])
