"""
Mixed discriminants and mixed characteristic polynomials
"""
import itertools
import logging
import math
from typing import List, Optional, Sequence

import numpy as np
import scipy.linalg

from src.config import settings
from src.models.linalg import HermitianMatrix, PsdMatrix
from src.models.polynomial import MaxrootResult, RealPolynomial
from src.services.linalg_service import MatrixLike, as_array
from src.utils.errors import BudgetExceededError, DimensionMismatchError, McpSelError
from src.utils.parallel import ordered_map

logger = logging.getLogger(__name__)

_PERMUTATION_CHUNK = 5040


def _stack(mats: Sequence[MatrixLike], dim: Optional[int] = None) -> np.ndarray:
    arrays = [as_array(m) for m in mats]
    if not arrays:
        if dim is None:
            raise McpSelError("An empty family needs an explicit dimension", reason="missing_dimension")
        return np.zeros((0, dim, dim), dtype=np.complex128)
    d = arrays[0].shape[0]
    for a in arrays:
        if a.shape != (d, d):
            raise DimensionMismatchError(f"Matrix of shape {a.shape} in a family of dimension {d}")
    if dim is not None and dim != d:
        raise DimensionMismatchError(f"Family has dimension {d}, expected {dim}")
    return np.stack(arrays)


def elementary_symmetric(eigs: np.ndarray) -> np.ndarray:
    """e_0, ..., e_d of the given eigenvalues"""
    c = np.poly(np.asarray(eigs, dtype=float)) if len(eigs) else np.ones(1)
    signs = (-1.0) ** np.arange(len(c))
    return np.real(c) * signs


def subset_work(m: int, d: int) -> float:
    """Eigen-solver work of the subset formula: #subsets of size ≤ min(m, d) times d³"""
    count = sum(math.comb(m, j) for j in range(min(m, d) + 1))
    return float(count) * float(max(d, 1)) ** 3


def is_rank_at_most_one(a: np.ndarray, tol: Optional[float] = None) -> bool:
    tol = settings.TOL_EQ if tol is None else tol
    w = scipy.linalg.eigvalsh(a)
    scale = max(1.0, float(np.max(np.abs(w))))
    return bool(np.all(np.abs(w[:-1]) <= tol * scale))


def characteristic_polynomial(a: MatrixLike) -> RealPolynomial:
    """det(zI − A) for Hermitian A, carried with its roots"""
    arr = as_array(a)
    return RealPolynomial.from_roots(scipy.linalg.eigvalsh(arr))


class McpService:
    """Service for mixed discriminant and μ computations"""

    @staticmethod
    def mixed_discriminant(mats: Sequence[MatrixLike], method: str = "permutation") -> float:
        """
        Mixed discriminant D(A_1, ..., A_k), padded with identities when k < d

        Column convention: the i-th column of the assembled matrix is the
        i-th column of A_σ(i).

        Args:
            mats: k Hermitian matrices of a common dimension d, k ≤ d
            method: "permutation" (sum over S_d) or "polarization"
                (alternating sum of elementary symmetric functions)

        Returns:
            Real value of the mixed discriminant

        Raises:
            DimensionMismatchError: On mixed dimensions or k > d
            BudgetExceededError: If d exceeds MAX_DISCRIMINANT_DIM for the permutation method
        """
        stack = _stack(mats)
        k, d = stack.shape[0], stack.shape[1]
        if k > d:
            raise DimensionMismatchError(f"{k} matrices exceed dimension {d}")
        if method == "polarization":
            return McpService._polarized_discriminant(stack)
        if d > settings.MAX_DISCRIMINANT_DIM:
            raise BudgetExceededError(
                f"Permutation expansion capped at d = {settings.MAX_DISCRIMINANT_DIM}, got {d}"
            )
        padded = np.concatenate([stack, np.broadcast_to(np.eye(d), (d - k, d, d))]) if k < d else stack
        perms = np.array(list(itertools.permutations(range(d))), dtype=np.intp)
        cols = np.arange(d)

        def chunk_sum(start: int) -> complex:
            p = perms[start:start + _PERMUTATION_CHUNK]
            assembled = np.stack([padded[p[:, i], :, cols[i]] for i in range(d)], axis=-1)
            return np.sum(np.linalg.det(assembled))

        partial = ordered_map(chunk_sum, range(0, len(perms), _PERMUTATION_CHUNK))
        total = np.sum(np.array(partial))
        return float(np.real(total)) / math.factorial(d - k)

    @staticmethod
    def _polarized_discriminant(stack: np.ndarray) -> float:
        k, d = stack.shape[0], stack.shape[1]
        total = 0.0
        for size in range(k + 1):
            for t in itertools.combinations(range(k), size):
                s = stack[list(t)].sum(axis=0) if t else np.zeros((d, d))
                e = elementary_symmetric(scipy.linalg.eigvalsh(s))
                total += (-1.0) ** (k - size) * e[k]
        return float(total)

    @staticmethod
    def mcp(mats: Sequence[MatrixLike], dim: Optional[int] = None, budget: Optional[float] = None) -> RealPolynomial:
        """
        μ[A_1, ..., A_m](z) = Σ_k z^{d−k} (−1)^k Σ_{|S|=k} D(A_S)

        Rank-one families take the expected characteristic polynomial
        identity μ = det(zI − Σ A_i); otherwise the subset form
        Σ_T (−1)^{|T|} C(m−|T|, k−|T|) e_k(Σ_{i∈T} A_i) is used.

        Args:
            mats: Hermitian matrices of a shared dimension
            dim: Required when mats is empty
            budget: Work cap for the subset form (defaults to EXACT_WORK_BUDGET)

        Returns:
            Monic RealPolynomial of degree d

        Raises:
            BudgetExceededError: If the subset form exceeds the budget
        """
        stack = _stack(mats, dim)
        d = stack.shape[1]
        if stack.shape[0] == 0:
            return RealPolynomial.monomial(d)
        nonzero = [a for a in stack if np.max(np.abs(a)) > 0]
        if not nonzero:
            return RealPolynomial.monomial(d)
        if all(is_rank_at_most_one(a) for a in nonzero):
            return characteristic_polynomial(np.sum(nonzero, axis=0))
        return McpService._subset_mcp(np.stack(nonzero), budget)

    @staticmethod
    def _subset_mcp(stack: np.ndarray, budget: Optional[float] = None) -> RealPolynomial:
        budget = settings.EXACT_WORK_BUDGET if budget is None else budget
        m, d = stack.shape[0], stack.shape[1]
        work = subset_work(m, d)
        if work > budget:
            raise BudgetExceededError(f"Subset evaluation of μ needs {work:.3g} work units (budget {budget:.3g})")
        top = min(m, d)

        def row(size: int) -> np.ndarray:
            acc = np.zeros(d + 1)
            weights = np.array([math.comb(m - size, k - size) if k >= size else 0 for k in range(d + 1)], dtype=float)
            for t in itertools.combinations(range(m), size):
                s = stack[list(t)].sum(axis=0) if t else np.zeros((d, d))
                acc += weights * elementary_symmetric(scipy.linalg.eigvalsh(s))
            return (-1.0) ** size * acc

        c = np.sum(np.stack(ordered_map(row, range(top + 1))), axis=0)
        # c[k] multiplies z^{d−k}
        return RealPolynomial.from_coeffs(c[::-1])

    @staticmethod
    def mcp_oracle(mats: Sequence[MatrixLike], dim: Optional[int] = None) -> RealPolynomial:
        """
        Definitional μ: interpolate det(zI + Σ z_i A_i) on an integer lattice,
        apply ∏(1 − ∂_{z_i}) and set z_i = 0
        """
        stack = _stack(mats, dim)
        m, d = stack.shape[0], stack.shape[1]
        nodes = np.arange(d + 1, dtype=float)
        evaluations = (d + 1) ** (m + 1)
        if evaluations > settings.EXHAUSTIVE_BUDGET * 10:
            raise BudgetExceededError(f"Lattice oracle needs {evaluations} determinants")
        vander = np.vander(nodes, d + 1, increasing=True)
        functional = np.zeros(d + 1)
        functional[0], functional[1] = 1.0, -1.0
        # f(0) − f'(0) for a degree-d polynomial from its values on the nodes
        weights = np.linalg.solve(vander.T, functional)
        eye = np.eye(d)
        values = np.zeros(d + 1)
        for point in itertools.product(range(d + 1), repeat=m):
            w = float(np.prod(weights[list(point)])) if m else 1.0
            if w == 0.0:
                continue
            s = np.tensordot(nodes[list(point)], stack, axes=1) if m else np.zeros((d, d))
            for zi, z in enumerate(nodes):
                values[zi] += w * float(np.real(np.linalg.det(z * eye + s)))
        coeffs = np.linalg.solve(vander, values)
        return RealPolynomial.from_coeffs(coeffs)

    @staticmethod
    def reduced_mcp(mats: Sequence[MatrixLike], dim: int) -> RealPolynomial:
        """μ(z) / z^{d−m} for m ≤ d"""
        m = len(mats)
        if m > dim:
            raise DimensionMismatchError(f"{m} matrices exceed dimension {dim}")
        return McpService.mcp(mats, dim=dim).deflate(dim - m)

    @staticmethod
    def maxroot(p: RealPolynomial, tol: Optional[float] = None) -> MaxrootResult:
        """
        Largest real part among the roots of p

        Roots come from companion-matrix eigenvalues; nearby roots are
        averaged into clusters so that perturbed multiple real roots are
        not mistaken for complex pairs.

        Raises:
            McpSelError: For the zero polynomial or degree 0
        """
        tol = settings.TOL_ROOT if tol is None else tol
        if p.is_zero or p.degree < 1:
            raise McpSelError("maxroot needs a polynomial of degree at least 1", reason="degenerate_polynomial")
        if p.roots is not None:
            return MaxrootResult(value=float(max(p.roots)), all_real=True, max_imag_residual=0.0)
        roots = np.polynomial.polynomial.polyroots(p.array)
        means = _cluster_means(roots, settings.ROOT_CLUSTER_TOL)
        residual = float(np.max(np.abs(means.imag)))
        return MaxrootResult(value=float(np.max(means.real)), all_real=residual <= tol, max_imag_residual=residual)


def _cluster_means(roots: np.ndarray, rel_tol: float) -> np.ndarray:
    order = np.argsort(roots.real, kind="stable")
    ordered = roots[order]
    scale = max(1.0, float(np.max(np.abs(roots))))
    means, group = [], [ordered[0]]
    for r in ordered[1:]:
        if abs(r - group[0]) <= rel_tol * scale:
            group.append(r)
        else:
            means.append(np.mean(group))
            group = [r]
    means.append(np.mean(group))
    return np.array(means)


mixed_discriminant = McpService.mixed_discriminant
mcp = McpService.mcp
mcp_oracle = McpService.mcp_oracle
reduced_mcp = McpService.reduced_mcp
maxroot = McpService.maxroot
