"""Homogeneous polynomials of degree n and their duals V_n.

Polynomials store the coefficients of x^i y^(n-i) for i = 0..n.  Duals store
their values on the same monomials, so pairing is a dot product.  Coefficients
are Fractions (or ints) over Q, or ints reduced mod ``modulus`` over Z/p^M.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Optional, Sequence, Tuple

from .groups import Mat


@lru_cache(maxsize=None)
def _binom_expand(a: int, b: int, e: int) -> Tuple[int, ...]:
    """Coefficients of (a x + b y)^e on x^j y^(e-j), j = 0..e."""
    return tuple(comb(e, j) * a ** j * b ** (e - j) for j in range(e + 1))


def _poly_mul(f: Sequence[int], g: Sequence[int]) -> list:
    out = [0] * (len(f) + len(g) - 1)
    for i, x in enumerate(f):
        if x:
            for j, y in enumerate(g):
                out[i + j] += x * y
    return out


@lru_cache(maxsize=4096)
def substitution_matrix(g: Mat, n: int) -> Tuple[Tuple[int, ...], ...]:
    """Row i holds the coefficients of (x^i y^(n-i)) | g on the monomial basis."""
    a, b, c, d = g
    rows = []
    for i in range(n + 1):
        rows.append(tuple(_poly_mul(_binom_expand(a, b, i), _binom_expand(c, d, n - i))))
    return tuple(rows)


def _reduce(vals, modulus: Optional[int]):
    if modulus is None:
        return tuple(vals)
    return tuple(int(v) % modulus for v in vals)


@dataclass(frozen=True)
class HomPoly:
    n: int
    coeffs: Tuple

    def __post_init__(self):
        if len(self.coeffs) != self.n + 1:
            raise ValueError("coefficient list must have length n + 1")

    def __add__(self, other: "HomPoly") -> "HomPoly":
        return HomPoly(self.n, tuple(x + y for x, y in zip(self.coeffs, other.coeffs)))

    def __mul__(self, other: "HomPoly") -> "HomPoly":
        return HomPoly(self.n + other.n, tuple(_poly_mul(self.coeffs, other.coeffs)))

    def __pow__(self, e: int) -> "HomPoly":
        out = HomPoly(0, (1,))
        for _ in range(e):
            out = out * self
        return out

    def __call__(self, x, y):
        return sum(c * x ** i * y ** (self.n - i) for i, c in enumerate(self.coeffs))


def quadratic(A: int, B: int, C: int) -> HomPoly:
    return HomPoly(2, (C, B, A))


@dataclass(frozen=True)
class PolyDual:
    n: int
    values: Tuple
    modulus: Optional[int] = None

    def __post_init__(self):
        if len(self.values) != self.n + 1:
            raise ValueError("value list must have length n + 1")

    @classmethod
    def zero(cls, n: int, modulus: Optional[int] = None) -> "PolyDual":
        return cls(n, (0,) * (n + 1), modulus)

    def __add__(self, other: "PolyDual") -> "PolyDual":
        return PolyDual(self.n, _reduce([x + y for x, y in zip(self.values, other.values)], self.modulus), self.modulus)

    def __sub__(self, other: "PolyDual") -> "PolyDual":
        return PolyDual(self.n, _reduce([x - y for x, y in zip(self.values, other.values)], self.modulus), self.modulus)

    def __neg__(self) -> "PolyDual":
        return PolyDual(self.n, _reduce([-x for x in self.values], self.modulus), self.modulus)

    def scale(self, c) -> "PolyDual":
        return PolyDual(self.n, _reduce([c * x for x in self.values], self.modulus), self.modulus)

    def pair(self, P: HomPoly):
        if P.n != self.n:
            raise ValueError(f"degree mismatch: dual of degree {self.n}, polynomial of degree {P.n}")
        s = sum(v * c for v, c in zip(self.values, P.coeffs))
        return s % self.modulus if self.modulus is not None else s


def act_poly(g: Mat, P: HomPoly) -> HomPoly:
    """P | g, i.e. P(a x + b y, c x + d y)."""
    M = substitution_matrix(tuple(g), P.n)
    out = [0] * (P.n + 1)
    for i, c in enumerate(P.coeffs):
        if c:
            for j, m in enumerate(M[i]):
                out[j] += c * m
    return HomPoly(P.n, tuple(out))


def act_dual(g: Mat, phi: PolyDual) -> PolyDual:
    """(g . phi)(P) = phi(P | g)."""
    M = substitution_matrix(tuple(g), phi.n)
    vals = [sum(m * v for m, v in zip(row, phi.values)) for row in M]
    return PolyDual(phi.n, _reduce(vals, phi.modulus), phi.modulus)


def dual_action_matrix(g: Mat, n: int):
    """Matrix of phi -> g . phi in the monomial-value coordinates."""
    return substitution_matrix(tuple(g), n)


def as_fractions(phi: PolyDual) -> PolyDual:
    return PolyDual(phi.n, tuple(Fraction(v) for v in phi.values), None)
