"""Classical Shintani lifts from cohomology classes, and q-expansion operators."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import bqf
from .bqf import CharacterData, FormClass, is_square, legendre
from .cohomology import PolyModule, word_operator
from .groups import GroupPresentation
from .polyweight import quadratic


class WeightError(ValueError):
    pass


class OrdinarityError(ValueError):
    pass


class UnsupportedOperator(ValueError):
    pass


@dataclass
class ClassicalEigenform:
    N: int
    weight: int
    eigenvalues: Dict[int, int]
    p: Optional[int] = None
    r: int = 0

    def check_weil(self) -> None:
        for ell, a in self.eigenvalues.items():
            if (self.N * (self.p or 1)) % ell == 0:
                continue
            if a * a > 4 * ell ** (self.weight - 1):
                raise ValueError(f"a_{ell} = {a} violates the Weil bound in weight {self.weight}")


@dataclass
class HalfIntQExpansion:
    """sum a_xi q^xi of weight k + 1/2; coefficients are Fractions or ints mod ``modulus``."""
    k: int
    level: int
    psi: CharacterData
    coeffs: Dict[int, object]
    window: int
    modulus: Optional[int] = None
    meta: Dict = field(default_factory=dict)

    def __getitem__(self, xi: int):
        if xi < 1 or xi > self.window:
            raise IndexError(f"xi = {xi} outside the window 1..{self.window}")
        return self.coeffs.get(xi, 0)

    def _red(self, x):
        return x % self.modulus if self.modulus is not None else x

    def scale(self, c) -> "HalfIntQExpansion":
        return self.replace({xi: self._red(c * v) for xi, v in self.coeffs.items()})

    def replace(self, coeffs: Dict[int, object], window: Optional[int] = None, **kw) -> "HalfIntQExpansion":
        d = dict(k=self.k, level=self.level, psi=self.psi, coeffs=coeffs,
                 window=self.window if window is None else window, modulus=self.modulus,
                 meta=dict(self.meta))
        d.update(kw)
        return HalfIntQExpansion(**d)

    def is_zero(self) -> bool:
        return all(self._red(v) == 0 for v in self.coeffs.values())

    def to_json(self) -> dict:
        coeffs = []
        for xi in range(1, self.window + 1):
            v = Fraction(self.coeffs.get(xi, 0))
            coeffs.append({"xi": str(xi), "num": str(v.numerator), "den": str(v.denominator)})
        out = {
            "weight_num": str(2 * self.k + 1),
            "weight_den": "2",
            "level": str(self.level),
            "character": self.psi.to_json(),
            "window": str(self.window),
            "coefficients": coeffs,
        }
        if self.modulus is not None:
            out["modulus"] = str(self.modulus)
        out["normalization"] = self.meta.get("normalization", "primitive integral eigenclass, t_Q = 2")
        return out


def period_value(phi, cls: FormClass, G: GroupPresentation, module: PolyModule, k: int):
    """phi(gamma_Q) evaluated on Q^(k-1)."""
    if module.n != 2 * (k - 1):
        raise WeightError(f"module degree {module.n} does not match Q^{k - 1}")
    word = cls.word
    if not word and cls.automorph != (1, 0, 0, 1):
        from .groups import decompose_word
        word, _ = decompose_word(cls.automorph, G)
    val = word_operator(G, module, word).dot(np.asarray(phi, dtype=object))
    P = quadratic(*cls.form.form) ** (k - 1)
    s = sum(v * c for v, c in zip(val, P.coeffs))
    return s % module.modulus if module.modulus is not None else s


def lift_coefficient(phi, G, module, N, p, n, xi, psi: CharacterData, k: int, classes=None):
    """a_xi = sum over classes of eta / t_Q * period."""
    if is_square(xi):
        return 0
    L = N * p ** n
    cls_list = classes if classes is not None else bqf.enumerate_classes(N, p, n, xi, G)
    total = 0
    for cls in cls_list:
        e = bqf.eta(cls, psi, N * p)
        if e == 0:
            continue
        total += e * period_value(phi, cls, G, module, k)
    if module.modulus is None:
        return Fraction(total, 2)
    return total * pow(2, -1, module.modulus) % module.modulus


def classical_lift(phi, G: GroupPresentation, module: PolyModule, N: int, p: int, n: int,
                   psi: CharacterData, window: int) -> HalfIntQExpansion:
    k = module.n // 2 + 1
    L = N * p ** n
    coeffs = {}
    for xi in range(1, window + 1):
        coeffs[xi] = lift_coefficient(phi, G, module, N, p, n, xi, psi, k)
    return HalfIntQExpansion(k=k, level=4 * L, psi=psi, coeffs=coeffs, window=window,
                             modulus=module.modulus,
                             meta={"normalization": "primitive integral eigenclass, t_Q = 2",
                                   "b_alpha": "-C mod N p^n"})


def halfint_Tq2(h: HalfIntQExpansion, q: int) -> HalfIntQExpansion:
    """Shimura's T(q^2) on a weight k + 1/2 expansion, truncated to window // q^2."""
    if h.level % q == 0 or q == 2:
        raise UnsupportedOperator(f"T({q}^2) needs q prime to the level {h.level}")
    k = h.k
    chi_q = h.psi(q)
    W = h.window // (q * q)
    out = {}
    for xi in range(1, W + 1):
        v = h.coeffs.get(q * q * xi, 0)
        v += chi_q * legendre(xi, q) * q ** (k - 1) * h.coeffs.get(xi, 0)
        if xi % (q * q) == 0:
            v += chi_q * chi_q * q ** (2 * k - 1) * h.coeffs.get(xi // (q * q), 0)
        out[xi] = h._red(v)
    return h.replace(out, window=W)


def tp_on_qexp(h: HalfIntQExpansion, p: int) -> HalfIntQExpansion:
    """a(xi) -> a(p xi); the character picks up the quadratic symbol at p."""
    W = h.window // p
    out = {xi: h.coeffs.get(p * xi, 0) for xi in range(1, W + 1)}
    primes = tuple(sorted(set(h.psi.primes) ^ {p})) if p % 2 else h.psi.primes
    return h.replace(out, window=W, psi=CharacterData(h.psi.modulus, primes))


def hecke_check(h: HalfIntQExpansion, q: int, a_q) -> Tuple[bool, int]:
    """h | T(q^2) == a_q h on the valid window; returns (ok, window)."""
    hq = halfint_Tq2(h, q)
    ok = all(hq._red(hq.coeffs[xi] - a_q * h.coeffs.get(xi, 0)) == 0 for xi in range(1, hq.window + 1))
    return ok, hq.window


# ---- p-stabilization --------------------------------------------------------

def p_stabilize(a_p: int, p: int, w: int, M: int, eps_p: int = 1) -> Tuple[int, int]:
    """(alpha, beta) mod p^M: unit and non-unit roots of X^2 - a_p X + eps p^(w-1)."""
    if a_p % p == 0:
        raise OrdinarityError(f"a_{p} = {a_p} is not a p-adic unit")
    mod = p ** M
    c = eps_p * p ** (w - 1)
    x = a_p % mod
    for _ in range(4 * M + 4):
        f = (x * x - a_p * x + c) % mod
        if f == 0:
            break
        df = (2 * x - a_p) % mod
        x = (x - f * pow(df, -1, mod)) % mod
    if (x * x - a_p * x + c) % mod:
        raise OrdinarityError("Hensel iteration failed")
    beta = (a_p - x) % mod
    return x, beta


def to_json_file(h: HalfIntQExpansion, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(h.to_json(), fh, indent=1, sort_keys=True)
