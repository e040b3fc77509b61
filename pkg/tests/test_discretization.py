import math
from fractions import Fraction

import numpy as np
import pytest

from src.config import settings
from src.models.frames import VectorSystem
from src.models.linalg import PsdMatrix
from src.models.sampling import Quadrature, WeightedOperatorFamily
from src.services.binary_selector_service import BinarySelectorService
from src.services.discretization_service import DiscretizationService
from src.services.linalg_service import LinalgService
from src.utils.errors import HypothesisError


def test_binary_expand_exact():
    assert DiscretizationService.binary_expand(0.75) == [Fraction(1, 2), Fraction(1, 4)]
    assert DiscretizationService.binary_expand(1.5) == [Fraction(1), Fraction(1, 2)]


def test_binary_expand_truncates():
    bits = 10
    weights = DiscretizationService.binary_expand(0.3, bits)
    total = sum(weights)
    assert total <= Fraction(0.3) < total + Fraction(1, 2 ** bits)
    assert weights == sorted(weights, reverse=True)
    assert len(set(weights)) == len(weights)


def test_binary_expand_rejects_nonpositive():
    with pytest.raises(HypothesisError) as e:
        DiscretizationService.binary_expand(0.0)
    assert e.value.reason == "nonpositive_weight"


def test_projection_split_inequality(psd, rng):
    for _ in range(20):
        d = int(rng.integers(2, 6))
        k = int(rng.integers(1, d))
        q, _ = np.linalg.qr(rng.standard_normal((d, k)) + 1j * rng.standard_normal((d, k)))
        check = DiscretizationService.projection_split_check(psd(d), q)
        assert check.max_violation <= 1e-10


def test_projection_split_trivial_subspace(psd):
    check = DiscretizationService.projection_split_check(psd(3), None)
    assert check.gamma1 == 0.0
    assert check.max_violation == pytest.approx(0.0, abs=1e-12)


def test_projection_split_rejects_non_orthonormal(psd):
    with pytest.raises(HypothesisError):
        DiscretizationService.projection_split_check(psd(3), np.ones((3, 1)))


def test_scal_sample_deviation_below_epsilon(frame):
    ops = tuple(PsdMatrix.rank_one(u) for u in frame(64, 2).vectors)
    family = WeightedOperatorFamily(operators=ops, weights=(1.0,) * 64)
    result = DiscretizationService.scal_sample(family, 0.9)
    assert result.deviation < 0.9
    assert result.a > 0
    counts = np.zeros(64)
    for i, m in result.samples.items():
        counts[i] = m
    sampled = sum(c * t.entries for c, t in zip(counts, ops))
    assert np.linalg.norm(sampled / result.a - family.total(), 2) == pytest.approx(result.deviation, abs=1e-9)


def test_scal_sample_rescales_large_totals(frame):
    ops = tuple(PsdMatrix.rank_one(u) for u in frame(16, 2).vectors)
    family = WeightedOperatorFamily(operators=ops, weights=(3.0,) * 16)
    result = DiscretizationService.scal_sample(family, 0.9)
    assert result.scale == pytest.approx(3.0)
    assert result.deviation < 0.9


def test_scal_sample_reports_needed_bits(frame):
    ops = tuple(PsdMatrix.rank_one(u) for u in frame(64, 2).vectors)
    family = WeightedOperatorFamily(operators=ops, weights=(1.0,) * 64)
    with pytest.raises(HypothesisError) as e:
        DiscretizationService.scal_sample(family, 0.5, precision_bits=1)
    assert e.value.reason == "precision_insufficient"
    assert e.value.context["needed_bits"] > 1


def test_weighted_family_rejects_nonpositive_weight(psd):
    with pytest.raises(HypothesisError):
        WeightedOperatorFamily(operators=(PsdMatrix.from_array(psd(2)),), weights=(0.0,))


def test_discretize_continuous_frame():
    n, d = 32, 3
    t = np.arange(n) / n
    vectors = np.exp(2j * math.pi * np.outer(t, np.arange(d)))
    quadrature = Quadrature(points=tuple(t), weights=(1.0 / n,) * n, vectors=VectorSystem(dim=d, vectors=vectors))
    result = DiscretizationService.discretize_continuous_frame(quadrature, 0.5)
    assert result.continuous_bounds == pytest.approx((1.0, 1.0))
    lo, hi = result.promised
    assert lo - 1e-7 <= result.lower <= result.upper <= hi + 1e-7
    assert len(result.sample_points()) == result.sampling.size


def test_quadrature_from_csv():
    text = "t,weight,re1,im1\n0.0,0.5,1,0\n0.5,0.5,0,1\n"
    q = Quadrature.from_csv(text)
    assert q.n == 2
    assert np.allclose(q.frame_operator(), [[1.0]])


def _random_family(psd, rng, d, n):
    ops = tuple(PsdMatrix.from_array(psd(d, rank=1, trace=float(rng.uniform(0.1, 1.0)))) for _ in range(n))
    weights = tuple(float(w) for w in rng.uniform(0.2, 1.0, size=n))
    return WeightedOperatorFamily(operators=ops, weights=weights)


def test_scal_sample_random_weights_at_default_precision(psd, rng):
    c0 = BinarySelectorService.derive_numer_constant() ** 2
    eps = 0.5
    for _ in range(20):
        family = _random_family(psd, rng, int(rng.integers(2, 4)), int(rng.integers(6, 16)))
        result = DiscretizationService.scal_sample(family, eps)
        norm = LinalgService.operator_norm(family.total())
        norms = [LinalgService.operator_norm(t) for t in family.operators]
        assert result.deviation < eps

        bits = result.details["precision_bits"]
        assert bits < settings.WEIGHT_BITS
        assert 2.0 ** -bits * result.scale * sum(norms) <= eps / 4

        assert result.c0 == pytest.approx(c0)
        lo, hi = result.bracket
        assert lo <= result.a <= hi
        assert c0 * family.trace_cap / eps ** 2 <= result.a

        for i, m in result.samples.items():
            assert m * norms[i] <= result.a * (norm + eps) + 1e-9
        assert result.details["multiplicity_ratio"] <= norm + eps + 1e-9


def test_scal_sample_multiplicity_bound_on_normalized_family(frame, rng):
    ops = tuple(PsdMatrix.rank_one(u) for u in frame(64, 2).vectors)
    family = WeightedOperatorFamily(operators=ops, weights=tuple(float(w) for w in rng.uniform(0.3, 1.0, size=64)))
    eps = 0.5
    result = DiscretizationService.scal_sample(family, eps)
    assert result.scale == 1.0
    assert result.deviation < eps
    for i, m in result.samples.items():
        assert m * LinalgService.operator_norm(ops[i]) <= result.a * (1 + eps) + 1e-9
    lo, hi = result.bracket
    assert lo <= result.a <= hi


def test_scaf_sample_runs_the_iterated_selector(frame):
    ops = [PsdMatrix.rank_one(u) for u in frame(64, 2).vectors]
    eps, delta = 0.9, max(LinalgService.trace(t) for t in ops)
    c = BinarySelectorService.derive_numer_constant()
    level = math.floor(math.log2(c * c * delta / eps ** 2)) + 2
    result = DiscretizationService.scaf_sample(ops, [level] * 64, eps)
    assert result.level == level
    assert result.depth == 1
    assert result.a == 2.0 ** (level - 1)
    lo, hi = result.bracket
    assert lo < result.a <= hi
    assert result.size == 32
    assert result.deviation <= eps
