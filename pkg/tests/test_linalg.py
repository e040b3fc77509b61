import numpy as np
import pytest

from src.models.linalg import BlockDiagonalPsd, HermitianMatrix, PsdMatrix, block_slices, extract_block
from src.services.linalg_service import LinalgService
from src.utils.errors import DimensionMismatchError, HypothesisError, NotHermitianError


def test_hermitian_symmetrizes_small_noise():
    a = np.array([[1.0, 2.0 + 1e-14], [2.0, 3.0]])
    h = HermitianMatrix.from_array(a)
    assert np.allclose(h.entries, h.entries.conj().T)


def test_hermitian_rejects_non_self_adjoint():
    with pytest.raises(NotHermitianError):
        HermitianMatrix.from_array([[0.0, 1.0], [0.0, 0.0]])


def test_hermitian_rejects_non_square():
    with pytest.raises(DimensionMismatchError):
        HermitianMatrix.from_array(np.zeros((2, 3)))


def test_json_keeps_complex_entries():
    h = HermitianMatrix.from_array([[1.0, 1j], [-1j, 2.0]])
    back = HermitianMatrix.from_json(h.to_json())
    assert np.allclose(back.entries, h.entries)


def test_psd_rejects_negative_eigenvalue():
    with pytest.raises(HypothesisError) as e:
        PsdMatrix.from_array(np.diag([1.0, -0.5]))
    assert e.value.reason == "not_psd"


def test_psd_clamps_roundoff():
    p = PsdMatrix.from_array(np.diag([1.0, -1e-12]))
    assert LinalgService.lambda_min(p.entries) >= 0.0


def test_rank_one_outer_product():
    u = np.array([1.0, 1j]) / np.sqrt(2)
    p = PsdMatrix.rank_one(u)
    assert LinalgService.trace(p.entries) == pytest.approx(1.0)
    assert LinalgService.operator_norm(p.entries) == pytest.approx(1.0)


def test_psd_order(psd):
    a = psd(3, trace=1.0)
    assert LinalgService.psd_order_leq(a, a + np.eye(3))
    assert not LinalgService.psd_order_leq(a + np.eye(3), a)


def test_eigenvalues_ascending():
    assert LinalgService.eigenvalues(np.diag([3.0, 1.0, 2.0])) == pytest.approx([1.0, 2.0, 3.0])


def test_psd_sqrt_squares_back(psd):
    a = psd(4)
    r = LinalgService.psd_sqrt(a)
    assert np.allclose(r @ r, a, atol=1e-9)


def test_block_helpers():
    slices = block_slices([2, 1])
    assert slices == [slice(0, 2), slice(2, 3)]
    m = np.diag([1.0, 2.0, 3.0])
    assert np.allclose(extract_block(m, [2, 1], 1), [[3.0]])


def test_block_diagonal_assembly(psd):
    a, b = PsdMatrix.from_array(psd(2)), PsdMatrix.from_array(psd(3))
    m = BlockDiagonalPsd.from_blocks([a, b])
    assert m.block_dims == (2, 3)
    assert m.dim == 5
    full = m.assembled()
    assert np.allclose(extract_block(full, m.block_dims, 0), a.entries)
    assert np.allclose(extract_block(full, m.block_dims, 1), b.entries)
    assert np.allclose(full.entries[:2, 2:], 0.0)


def test_block_diagonal_rejects_wrong_dims(psd):
    with pytest.raises(DimensionMismatchError):
        BlockDiagonalPsd((PsdMatrix.from_array(psd(2)),), block_dims=(3,))
