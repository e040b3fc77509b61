import math

import numpy as np
import pytest

from src.models.frames import VectorSystem
from src.services.frame_service import FrameService
from src.utils.errors import DimensionMismatchError, HypothesisError


def gram(system):
    return system.vectors.conj() @ system.vectors.T


def test_frame_bounds_of_orthonormal_basis():
    fb = FrameService.frame_bounds(VectorSystem(dim=2, vectors=np.eye(2)))
    assert (fb.riesz_lower, fb.riesz_upper, fb.bessel) == pytest.approx((1.0, 1.0, 1.0))


def test_frame_operator_of_parseval_frame(frame):
    s = FrameService.frame_operator(frame(12, 5))
    assert np.allclose(s.entries, np.eye(5), atol=1e-12)


def test_empty_system_has_no_bounds():
    with pytest.raises(HypothesisError):
        FrameService.frame_bounds(VectorSystem(dim=2, vectors=np.zeros((0, 2))))


def test_naimark_exactness(frame, rng):
    for _ in range(10):
        n = int(rng.integers(3, 25))
        d = int(rng.integers(1, min(n, 12) + 1))
        pair = FrameService.naimark_complement(frame(n, d))
        assert np.allclose(gram(pair.original) + gram(pair.complement), np.eye(n), atol=1e-10)
        subset = sorted(rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False))
        check = FrameService.riesz_bessel_duality_check(pair, subset)
        assert check.residual < 1e-9


def test_naimark_requires_parseval(frame):
    with pytest.raises(HypothesisError) as e:
        FrameService.naimark_complement(frame(8, 3).scaled(0.5))
    assert e.value.reason == "not_parseval"


def test_complete_to_parseval(frame):
    partial = frame(10, 4).scaled(0.8)
    completed = FrameService.complete_to_parseval(partial)
    assert np.allclose(FrameService.frame_operator(completed).entries, np.eye(4), atol=1e-10)
    assert np.allclose(completed.vectors[:10], partial.vectors)


def test_complete_rejects_large_bessel(frame):
    with pytest.raises(HypothesisError) as e:
        FrameService.complete_to_parseval(frame(10, 4).scaled(2.0))
    assert e.value.reason == "bessel_exceeds_one"


def test_complement_vectors_keep_index_set(frame):
    comp = FrameService.complement_vectors(frame(10, 4).scaled(0.9))
    assert comp.n == 10


def test_norm_reduce():
    s = VectorSystem(dim=1, vectors=np.array([[1.0], [0.5]]))
    reduced = FrameService.norm_reduce(s, 0.5)
    assert reduced.norms_squared() == pytest.approx([0.5, 0.25])


def test_dual_riesz_basis_is_biorthogonal(rng):
    x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    basis = VectorSystem(dim=4, vectors=x)
    dual = FrameService.dual_riesz_basis(basis)
    cross = dual.vectors.conj() @ basis.vectors.T
    assert np.allclose(cross, np.eye(4), atol=1e-9)
    record = FrameService.dual_bounds_pair(basis, dual, range(4))
    assert record["reciprocity_residual"] < 1e-8
    assert FrameService.dual_bounds_pair(basis, dual, [0, 1])["reciprocity_residual"] is None


def test_dual_requires_square_basis(frame):
    with pytest.raises(DimensionMismatchError):
        FrameService.dual_riesz_basis(frame(6, 3))


def test_feichtinger_plan_small_deficit_uses_pairs():
    plan = FrameService.feichtinger_block_plan([0.95])
    assert not plan.two_stage
    assert plan.r == 2
    assert plan.block_size == 2


def test_feichtinger_plan_large_deficit():
    plan = FrameService.feichtinger_block_plan([0.5])
    assert plan.r == math.ceil(21 * 0.5 / 0.25)


def test_feichtinger_plan_two_stage():
    plan = FrameService.feichtinger_block_plan([0.25, 0.9])
    assert plan.two_stage
    assert plan.chunk == math.ceil(6 * 0.25 / 0.25 ** 2)


def test_feichtinger_select_lower_bound(frame):
    system = frame(20, 19)
    blocks = [(k, k + 1) for k in range(0, 20, 2)]
    cert = FrameService.feichtinger_select([system], blocks)
    assert len(cert.selected) == 10
    lower = FrameService.frame_bounds(system.subsystem(list(cert.selected))).riesz_lower
    assert lower == pytest.approx(cert.achieved_norm[0])
    assert lower >= cert.promised_bound[0] - 1e-8
    assert cert.details["constant"] == pytest.approx(cert.promised_bound[0] / 0.95)


def test_feichtinger_rejects_bessel_above_one(frame):
    with pytest.raises(HypothesisError) as e:
        FrameService.feichtinger_select([frame(20, 19).scaled(1.5)], [(k, k + 1) for k in range(0, 20, 2)])
    assert e.value.reason == "bessel_exceeds_one"


def test_r_eps_block_rule():
    plan = FrameService.r_eps_block_rule([0.5], 0.5, constant=6.0)
    assert plan.r == pytest.approx(24.0)
    assert not plan.stage_one


def test_r_eps_select_unit_norm(frame):
    system = frame(48, 24).scaled(math.sqrt(2.0))
    blocks = [tuple(range(0, 24)), tuple(range(24, 48))]
    cert = FrameService.r_eps_select([system], blocks, 0.5, constant=6.0)
    lo, hi = cert.achieved_norm[0]
    assert lo >= 0.5 - 1e-8
    assert hi <= 1.5 + 1e-8
    assert cert.promised_bound == [[0.5, 1.5]]


def test_r_eps_requires_unit_norm(frame):
    with pytest.raises(HypothesisError) as e:
        FrameService.r_eps_select([frame(48, 24)], [tuple(range(24)), tuple(range(24, 48))], 0.5, constant=6.0)
    assert e.value.reason == "not_unit_norm"


def test_multi_pave_projections(frame):
    paving = FrameService.multi_pave_projections([frame(4, 2)], 0.9)
    assert sorted(i for part in paving.parts for i in part) == [0, 1, 2, 3]
    assert max(max(row) for row in paving.bessel) <= paving.promised + 1e-8


def test_multi_pave_rejects_small_r(frame):
    with pytest.raises(HypothesisError) as e:
        FrameService.multi_pave_projections([frame(4, 2)], 0.9, r=2)
    assert e.value.reason == "r_too_small"
