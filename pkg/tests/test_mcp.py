import math

import numpy as np
import pytest

from src.models.polynomial import RealPolynomial
from src.services.mcp_service import McpService
from src.utils.errors import BudgetExceededError, DimensionMismatchError, McpSelError

E11 = np.diag([1.0, 0.0])
E22 = np.diag([0.0, 1.0])


def coeffs(p, n):
    out = np.zeros(n)
    out[: len(p.coeffs)] = p.coeffs
    return out


def test_mcp_of_identity():
    p = McpService.mcp([np.eye(2)])
    assert coeffs(p, 3) == pytest.approx([0.0, -2.0, 1.0])
    assert McpService.maxroot(p).value == pytest.approx(2.0)


def test_mcp_of_matrix_units():
    p = McpService.mcp([E11, E22])
    assert coeffs(p, 3) == pytest.approx([1.0, -2.0, 1.0])
    assert McpService.maxroot(p).value == pytest.approx(1.0, abs=1e-7)


def test_mcp_of_zero_matrices():
    p = McpService.mcp([np.zeros((2, 2)), np.zeros((2, 2))])
    assert coeffs(p, 3) == pytest.approx([0.0, 0.0, 1.0])


def test_empty_family_needs_dimension():
    assert coeffs(McpService.mcp([], dim=3), 4) == pytest.approx([0, 0, 0, 1])
    with pytest.raises(McpSelError):
        McpService.mcp([])


def test_mixed_dimensions_rejected():
    with pytest.raises(DimensionMismatchError):
        McpService.mcp([np.eye(2), np.eye(3)])


def test_mcp_matches_oracle(psd, rng):
    for _ in range(20):
        d = int(rng.integers(1, 4))
        m = int(rng.integers(1, 4))
        mats = [psd(d, rank=int(rng.integers(1, d + 1)), trace=1.0) for _ in range(m)]
        p = McpService.mcp(mats)
        q = McpService.mcp_oracle(mats)
        n = d + 1
        assert np.max(np.abs(coeffs(p, n) - coeffs(q, n))) < 1e-8


def test_rank_one_shortcut_agrees_with_subset_form(rng):
    vecs = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    mats = [np.outer(v, v.conj()) / 4 for v in vecs]
    fast = McpService.mcp(mats)
    slow = McpService._subset_mcp(np.stack(mats))
    assert np.max(np.abs(coeffs(fast, 4) - coeffs(slow, 4))) < 1e-9


def test_reduced_mcp():
    assert McpService.reduced_mcp([E11], 2).coeffs == pytest.approx((-1.0, 1.0))
    assert McpService.reduced_mcp([np.eye(1)], 1).coeffs == pytest.approx((-1.0, 1.0))
    assert McpService.reduced_mcp([], 3).coeffs == pytest.approx((1.0,))
    with pytest.raises(DimensionMismatchError):
        McpService.reduced_mcp([E11, E22, E11], 2)


def test_maxroot_double_root():
    r = McpService.maxroot(RealPolynomial.from_coeffs([1.0, -2.0, 1.0]))
    assert r.value == pytest.approx(1.0, abs=1e-7)
    assert r.all_real


def test_maxroot_flags_complex_roots():
    r = McpService.maxroot(RealPolynomial.from_coeffs([1.0, 0.0, 1.0]))
    assert not r.all_real
    assert r.max_imag_residual == pytest.approx(1.0)


def test_maxroot_rejects_constants():
    with pytest.raises(McpSelError):
        McpService.maxroot(RealPolynomial.from_coeffs([3.0]))


def test_maxroot_of_single_matrix_is_trace(psd):
    b = psd(4, trace=2.5)
    assert McpService.maxroot(McpService.mcp([b])).value == pytest.approx(2.5, abs=1e-7)


def test_discriminant_small_cases(psd):
    a = psd(3)
    assert McpService.mixed_discriminant([a]) == pytest.approx(np.real(np.trace(a)), abs=1e-9)
    assert McpService.mixed_discriminant([np.eye(2), np.eye(2)]) == pytest.approx(2.0)
    det = float(np.real(np.linalg.det(a)))
    assert McpService.mixed_discriminant([a, a, a]) == pytest.approx(math.factorial(3) * det, rel=1e-9, abs=1e-9)


def test_discriminant_methods_agree(rng):
    for _ in range(10):
        d = int(rng.integers(2, 5))
        k = int(rng.integers(1, d + 1))
        mats = []
        for _ in range(k):
            x = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            mats.append((x + x.conj().T) / 2)
        a = McpService.mixed_discriminant(mats, method="permutation")
        b = McpService.mixed_discriminant(mats, method="polarization")
        assert a == pytest.approx(b, abs=1e-8 * max(1.0, abs(a)))


def test_discriminant_limits():
    with pytest.raises(DimensionMismatchError):
        McpService.mixed_discriminant([np.eye(2)] * 3)
    with pytest.raises(BudgetExceededError):
        McpService.mixed_discriminant([np.eye(9)])


def test_subset_form_budget():
    with pytest.raises(BudgetExceededError):
        McpService.mcp([np.eye(3)] * 3, budget=1.0)
