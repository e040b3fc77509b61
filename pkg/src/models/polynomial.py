"""
Real univariate polynomials and maxroot results
"""
from dataclasses import dataclass
from typing import Any, Dict, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P


@dataclass(frozen=True, eq=False)
class RealPolynomial:
    """
    Real-coefficient polynomial, coefficients in ascending degree.

    When built from known real roots the roots are kept so that maxroot
    does not have to go through the companion matrix.
    """

    coeffs: tuple
    roots: Optional[tuple] = None

    @classmethod
    def from_coeffs(cls, coeffs: Sequence[float]) -> "RealPolynomial":
        c = np.real_if_close(np.asarray(coeffs, dtype=np.complex128), tol=1e6)
        c = np.asarray(np.real(c), dtype=float)
        c = np.trim_zeros(c, "b") if c.size else c
        if c.size == 0:
            c = np.zeros(1)
        return cls(tuple(float(x) for x in c))

    @classmethod
    def from_roots(cls, roots: Sequence[float]) -> "RealPolynomial":
        r = np.sort(np.asarray(roots, dtype=float))
        c = P.polyfromroots(r) if r.size else np.ones(1)
        return cls(tuple(float(x) for x in np.real(c)), roots=tuple(float(x) for x in r))

    @classmethod
    def monomial(cls, d: int) -> "RealPolynomial":
        return cls.from_roots([0.0] * d)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    @property
    def is_zero(self) -> bool:
        return not np.any(self.array)

    def __call__(self, z):
        return P.polyval(z, self.array)

    def __add__(self, other: "RealPolynomial") -> "RealPolynomial":
        return RealPolynomial.from_coeffs(P.polyadd(self.array, other.array))

    def __mul__(self, other: "RealPolynomial") -> "RealPolynomial":
        if self.roots is not None and other.roots is not None:
            return RealPolynomial.from_roots(list(self.roots) + list(other.roots))
        return RealPolynomial.from_coeffs(P.polymul(self.array, other.array))

    def scaled(self, s: float) -> "RealPolynomial":
        return RealPolynomial.from_coeffs(self.array * s)

    def shifted(self, delta: float) -> "RealPolynomial":
        """p(z − δ)"""
        if self.roots is not None:
            return RealPolynomial.from_roots([r + delta for r in self.roots])
        q = np.polynomial.Polynomial(self.array)(np.polynomial.Polynomial([-delta, 1.0]))
        return RealPolynomial.from_coeffs(q.coef)

    def deflate(self, k: int) -> "RealPolynomial":
        """p(z) / z^k, dropping the k lowest coefficients"""
        if k <= 0:
            return self
        if self.roots is not None:
            return RealPolynomial.from_roots(sorted(self.roots, key=abs)[k:])
        return RealPolynomial(self.coeffs[k:])

    def allclose(self, other: "RealPolynomial", tol: float) -> bool:
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(n)
        b = np.zeros(n)
        a[: len(self.coeffs)] = self.coeffs
        b[: len(other.coeffs)] = other.coeffs
        return bool(np.max(np.abs(a - b)) <= tol)

    def to_json(self) -> Dict[str, Any]:
        return {"coeffs": list(self.coeffs)}

    @classmethod
    def from_json(cls, payload: Dict[str, Any]) -> "RealPolynomial":
        return cls(tuple(float(x) for x in payload["coeffs"]))


@dataclass(frozen=True)
class MaxrootResult:
    value: float
    all_real: bool
    max_imag_residual: float

    def to_json(self) -> Dict[str, Any]:
        return {"value": self.value, "all_real": self.all_real, "max_imag_residual": self.max_imag_residual}
