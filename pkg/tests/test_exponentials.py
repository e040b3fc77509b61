import math

import numpy as np
import pytest
import scipy.integrate

from src.models.exponentials import FrequencySet, IntervalUnion
from src.services.exponential_service import ExponentialService
from src.utils.errors import HypothesisError


def test_interval_union_rejects_overlap():
    with pytest.raises(HypothesisError) as e:
        IntervalUnion.of((0.0, 0.5), (0.4, 0.6))
    assert e.value.reason == "invalid_interval"


def test_frequency_set_must_fit_window():
    with pytest.raises(HypothesisError):
        FrequencySet(window=2, selected=(0, 3))
    assert FrequencySet(window=2, selected=(1, -2)).complement() == (-1, 0, 2)


def test_gram_of_half_interval():
    gram = ExponentialService.exp_gram(IntervalUnion.of((0.0, 0.5)), [0, 1]).entries
    expected = np.array([[0.5, -1j / math.pi], [1j / math.pi, 0.5]])
    assert np.allclose(gram, expected, atol=1e-14)


def test_indicator_fourier_matches_quadrature():
    s = IntervalUnion.of((0.1, 0.3), (0.5, 0.8))
    for k in (-3, 0, 1, 7):
        re = sum(scipy.integrate.quad(lambda x: math.cos(2 * math.pi * k * x), a, b)[0] for a, b in s.intervals)
        im = sum(scipy.integrate.quad(lambda x: -math.sin(2 * math.pi * k * x), a, b)[0] for a, b in s.intervals)
        assert ExponentialService.indicator_fourier(s, k) == pytest.approx(complex(re, im), abs=1e-10)


def test_gram_spectrum_grows_with_the_set():
    freqs = list(range(-6, 7))
    small = ExponentialService.exp_gram(IntervalUnion.of((0.0, 0.3)), freqs).entries
    large = ExponentialService.exp_gram(IntervalUnion.of((0.0, 0.6)), freqs).entries
    assert np.all(np.linalg.eigvalsh(large - small) >= -1e-12)
    full = ExponentialService.exp_gram(IntervalUnion.of((0.0, 1.0)), freqs).entries
    assert np.allclose(full, np.eye(len(freqs)), atol=1e-12)


def test_empty_frequency_set_rejected():
    with pytest.raises(HypothesisError):
        ExponentialService.exp_gram(IntervalUnion.of((0.0, 0.5)), [])


def test_syndetic_riesz_select():
    s = IntervalUnion.of((0.0, 0.5))
    sel = ExponentialService.syndetic_riesz_select(s, 0.5, 128, constant=6.0)
    assert sel.details["r"] == 48
    assert sel.details["blocks"] == 5
    assert len(sel.frequencies.selected) == 5
    cert = sel.certificates[0]
    assert cert.lambda_min >= 0.25 - 1e-8
    assert cert.lambda_max <= 0.75 + 1e-8
    assert sel.frequencies.max_gap <= 2 * 48 - 1


def test_syndetic_window_too_small():
    with pytest.raises(HypothesisError) as e:
        ExponentialService.syndetic_riesz_select(IntervalUnion.of((0.0, 0.5)), 0.5, 40, constant=6.0)
    assert e.value.reason == "window_too_small"


def test_removal_on_full_torus_removes_nothing():
    sel = ExponentialService.unit_norm_removal([IntervalUnion.of((0.0, 1.0))], 8)
    assert sel.frequencies.selected == ()
    assert sel.certificates[0].lambda_min == pytest.approx(1.0)


def test_removal_small_complement_uses_one_level():
    sel = ExponentialService.unit_norm_removal([IntervalUnion.of((0.0, 0.99))], 16, c_hat=1.0)
    assert sel.details["removal"]["depth"] == 1
    assert sel.epsilon == pytest.approx(0.5)
    cert = sel.certificates[0]
    assert cert.lambda_min >= cert.target_lo - 1e-7
    assert sel.frequencies.min_gap >= sel.details["r"]


def test_removal_falls_back_to_larger_epsilon():
    s = IntervalUnion.of((0.0, 0.95))
    sel = ExponentialService.unit_norm_removal([s], 16, c_hat=1.0)
    assert sel.epsilon == pytest.approx(4 * math.sqrt(0.05) + 0.1, abs=1e-6)
    cert = sel.certificates[0]
    assert cert.lambda_min >= cert.target_lo - 1e-7


def test_removal_rejects_large_complement():
    with pytest.raises(HypothesisError) as e:
        ExponentialService.unit_norm_removal([IntervalUnion.of((0.0, 0.5))], 8, c_hat=1.0)
    assert e.value.reason == "complement_too_large"


def test_bounded_frame_sample_one_level():
    sel = ExponentialService.bounded_frame_sample(IntervalUnion.of((0.0, 1 / 64)), 0.9, 128, c_hat=1.0)
    assert sel.details["depth"] == 1
    cert = sel.certificates[0]
    assert cert.target_lo - 1e-7 <= cert.lambda_min <= cert.lambda_max <= cert.target_hi + 1e-7
    assert sel.frequencies.min_gap >= sel.details["r"]


def test_bounded_frame_sample_full_torus():
    sel = ExponentialService.bounded_frame_sample(IntervalUnion.of((0.0, 1.0)), 0.5, 16, c_hat=4.0)
    assert sel.details["depth"] == 0
    cert = sel.certificates[0]
    assert (cert.lambda_min, cert.lambda_max) == pytest.approx((1.0, 1.0))
    assert len(sel.frequencies.selected) == 33
