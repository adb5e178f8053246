"""Truncated p-adic numbers, Teichmueller lifts and measures on Z_p^x.

An IwasawaMeasure stores, for each unit residue a mod p, the normalized moments
c_{a,j} = int_{a + pZ_p} ((t - omega(a)) / p)^j dnu, with c_{a,j} known modulo
p^(M - j).  This is the same information as the raw moments about omega(a)
modulo p^M, and every affine map t -> lambda t acts on it exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Dict, List, Optional, Sequence, Tuple


class UnitError(ValueError):
    pass


class ScopeError(ValueError):
    pass


def valuation(x: int, p: int) -> int:
    if x == 0:
        raise ValueError("valuation of 0")
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


@dataclass(frozen=True)
class ZpApprox:
    value: int
    prec: int
    p: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.p ** self.prec if self.prec > 0 else 0)

    @property
    def modulus(self) -> int:
        return self.p ** self.prec

    def _coerce(self, other) -> "ZpApprox":
        if isinstance(other, ZpApprox):
            if other.p != self.p:
                raise ValueError("mixing primes")
            return other
        return ZpApprox(int(other), self.prec, self.p)

    def __add__(self, other):
        o = self._coerce(other)
        return ZpApprox(self.value + o.value, min(self.prec, o.prec), self.p)

    __radd__ = __add__

    def __neg__(self):
        return ZpApprox(-self.value, self.prec, self.p)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        va, vb = self.val(), o.val()
        prec = min(self.prec + (vb if vb is not None else o.prec), o.prec + (va if va is not None else self.prec))
        return ZpApprox(self.value * o.value, prec, self.p)

    __rmul__ = __mul__

    def val(self) -> Optional[int]:
        """Valuation, or None if the value is 0 to the known precision."""
        if self.value == 0:
            return None
        return valuation(self.value, self.p)

    def is_unit(self) -> bool:
        return self.value % self.p != 0

    def inverse(self) -> "ZpApprox":
        if not self.is_unit():
            raise UnitError(f"{self.value} is not a unit mod {self.p}")
        return ZpApprox(pow(self.value, -1, self.modulus), self.prec, self.p)

    def __truediv__(self, other):
        o = self._coerce(other)
        v = o.val()
        if v is None:
            raise ZeroDivisionError("division by an approximate zero")
        u = o.value // self.p ** v
        num_v = self.val()
        if num_v is not None and num_v < v:
            raise UnitError("quotient is not integral")
        num = self.value // self.p ** v
        prec = min(self.prec, o.prec) - v
        return ZpApprox(num * pow(u, -1, self.p ** max(prec, 1)), prec, self.p)

    def equals(self, other, depth: Optional[int] = None) -> bool:
        o = self._coerce(other)
        d = min(self.prec, o.prec) if depth is None else depth
        return (self.value - o.value) % self.p ** d == 0

    def to_json(self) -> dict:
        return {"value": str(self.value), "prec": str(self.prec), "p": str(self.p)}


@lru_cache(maxsize=None)
def _teich_table(p: int, M: int) -> Tuple[int, ...]:
    mod = p ** M
    out = [0]
    for a in range(1, p):
        x = a
        for _ in range(M + 1):
            x = pow(x, p, mod)
        out.append(x)
    return tuple(out)


def teichmuller(a: int, p: int, M: int) -> int:
    """The (p-1)-st root of unity congruent to a mod p, modulo p^M."""
    if a % p == 0:
        raise UnitError(f"{a} is divisible by {p}")
    return _teich_table(p, M)[a % p]


def teichmuller_approx(a: int, p: int, M: int) -> ZpApprox:
    return ZpApprox(teichmuller(a, p, M), M, p)


def affine_moments(moments: List[int], c0: int, lam: int, p: int, M: int) -> List[int]:
    """Normalized moments of s -> c0 + lam s, each reduced mod p^(M - j)."""
    out = []
    for j in range(M):
        mod = p ** (M - j)
        s = 0
        for m in range(j + 1):
            if moments[m]:
                s += comb(j, m) * pow(c0, j - m, mod) * pow(lam, m, mod) * moments[m]
        out.append(s % mod)
    return out


@dataclass
class IwasawaMeasure:
    p: int
    M: int
    moments: Dict[int, List[int]] = field(default_factory=dict)

    def __post_init__(self):
        for a in range(1, self.p):
            m = self.moments.get(a, [0] * self.M)
            self.moments[a] = [int(x) % self.p ** (self.M - j) for j, x in enumerate(m)]

    @classmethod
    def zero(cls, p: int, M: int) -> "IwasawaMeasure":
        return cls(p, M, {})

    @classmethod
    def point_mass(cls, t0: int, p: int, M: int, mass: int = 1) -> "IwasawaMeasure":
        a = t0 % p
        s = (t0 - teichmuller(a, p, M + 1)) // p
        mom = [mass * pow(s, j) for j in range(M)]
        return cls(p, M, {a: mom})

    def __add__(self, other: "IwasawaMeasure") -> "IwasawaMeasure":
        return IwasawaMeasure(self.p, self.M, {a: [x + y for x, y in zip(self.moments[a], other.moments[a])] for a in self.moments})

    def __sub__(self, other: "IwasawaMeasure") -> "IwasawaMeasure":
        return IwasawaMeasure(self.p, self.M, {a: [x - y for x, y in zip(self.moments[a], other.moments[a])] for a in self.moments})

    def scale(self, c: int) -> "IwasawaMeasure":
        return IwasawaMeasure(self.p, self.M, {a: [c * x for x in m] for a, m in self.moments.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, IwasawaMeasure) and self.moments == other.moments

    def equals(self, other: "IwasawaMeasure", loss: int = 0) -> bool:
        """Equality with each moment compared modulo p^(M - j - loss)."""
        for a in self.moments:
            for j, (x, y) in enumerate(zip(self.moments[a], other.moments[a])):
                e = self.M - j - loss
                if e > 0 and (x - y) % self.p ** e:
                    return False
        return True

    def is_zero(self) -> bool:
        return all(x == 0 for m in self.moments.values() for x in m)

    def total_mass(self) -> int:
        return sum(m[0] for m in self.moments.values()) % self.p ** self.M

    def to_json(self) -> dict:
        return {
            "p": str(self.p),
            "M": str(self.M),
            "branches": [{"a": str(a), "moments": [str(x) for x in self.moments[a]]} for a in sorted(self.moments)],
        }

    @classmethod
    def from_json(cls, d: dict) -> "IwasawaMeasure":
        return cls(int(d["p"]), int(d["M"]), {int(b["a"]): [int(x) for x in b["moments"]] for b in d["branches"]})


def specialize_iwasawa(nu: IwasawaMeasure, i: int, e: int) -> ZpApprox:
    """int omega^i(t) t^e dnu, exact modulo p^M."""
    if e < 0:
        raise ValueError("exponent must be non-negative")
    p, M = nu.p, nu.M
    mod = p ** M
    total = 0
    for a, mom in nu.moments.items():
        w = teichmuller(a, p, M)
        s = 0
        for j in range(min(M, e + 1)):
            if mom[j]:
                s += comb(e, j) * pow(w, e - j, mod) * p ** j * mom[j]
        total += pow(w, i % (p - 1), mod) * s
    return ZpApprox(total, M, p)


def grouplike_mult(lam: int, nu: IwasawaMeasure) -> IwasawaMeasure:
    """Pushforward under t -> lam t."""
    p, M = nu.p, nu.M
    if lam % p == 0:
        raise UnitError(f"{lam} is not a unit")
    out: Dict[int, List[int]] = {a: [0] * M for a in range(1, p)}
    for a, mom in nu.moments.items():
        b = (lam * a) % p
        c0 = (lam * teichmuller(a, p, M + 1) - teichmuller(b, p, M + 1)) // p
        new = affine_moments(mom, c0, lam, p, M)
        out[b] = [x + y for x, y in zip(out[b], new)]
    return IwasawaMeasure(p, M, out)


@dataclass(frozen=True)
class ArithPoint:
    """Weight w with tame character omega^i; ``half_tame`` is the metaplectic exponent i'.

    The integral-weight character is omega^(2 i'), so i == 2 i' mod (p - 1).
    """
    p: int
    w: int
    half_tame: int = 0
    r: int = 1

    def __post_init__(self):
        if self.w % 2 or self.w < 2:
            raise ValueError("weight must be even and at least 2")
        if self.r != 1:
            raise ScopeError("only wild level r = 1 is supported")

    @property
    def i(self) -> int:
        return (2 * self.half_tame) % (self.p - 1)

    @property
    def n(self) -> int:
        return self.w - 2

    @property
    def e(self) -> int:
        return self.n // 2

    @property
    def k(self) -> int:
        return self.w // 2


# ---- polynomials over Z/p^P (coefficient lists, constant term first) --------

def _trim(f: List[int]) -> List[int]:
    while len(f) > 1 and f[-1] == 0:
        f = f[:-1]
    return f


def poly_mul(f: List[int], g: List[int], mod: int) -> List[int]:
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a:
            for j, b in enumerate(g):
                out[i + j] = (out[i + j] + a * b) % mod
    return _trim(out)


def poly_add(f: List[int], g: List[int], mod: int) -> List[int]:
    n = max(len(f), len(g))
    return _trim([((f[i] if i < len(f) else 0) + (g[i] if i < len(g) else 0)) % mod for i in range(n)])


def poly_scale(f: List[int], c: int, mod: int) -> List[int]:
    return _trim([c * a % mod for a in f])


def poly_divmod(f: List[int], g: List[int], mod: int) -> Tuple[List[int], List[int]]:
    """Division by g whose leading coefficient is a unit mod ``mod``."""
    f = [a % mod for a in f]
    g = _trim([a % mod for a in g])
    lead = pow(g[-1], -1, mod)
    q = [0] * max(len(f) - len(g) + 1, 1)
    while len(f) >= len(g) and any(f):
        c = f[-1] * lead % mod
        shift = len(f) - len(g)
        q[shift] = c
        for i, b in enumerate(g):
            f[shift + i] = (f[shift + i] - c * b) % mod
        f = f[:-1] if len(f) > 1 else [0]
        f = _trim(f) if len(f) >= len(g) else f
    return _trim(q), _trim(f or [0])


def _poly_xgcd_mod_p(f: List[int], g: List[int], p: int) -> Tuple[List[int], List[int], List[int]]:
    """(d, s, t) with s f + t g = d over F_p, d monic."""
    r0, r1 = _trim([a % p for a in f]), _trim([a % p for a in g])
    s0, s1, t0, t1 = [1], [0], [0], [1]
    while any(r1):
        q, r = poly_divmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, poly_add(s0, poly_scale(poly_mul(q, s1, p), -1, p), p)
        t0, t1 = t1, poly_add(t0, poly_scale(poly_mul(q, t1, p), -1, p), p)
    inv = pow(r0[-1], -1, p)
    return poly_scale(r0, inv, p), poly_scale(s0, inv, p), poly_scale(t0, inv, p)


def hensel_split(chi: Sequence[int], p: int, P: int, residues: Sequence[int]) -> Tuple[List[int], List[int]]:
    """Factor a monic integral chi as g h over Z/p^P, with g mod p = prod (x - r)^m over ``residues``."""
    chi = [int(a) for a in chi]
    g0, h0 = [1], [a % p for a in chi]
    for r in residues:
        while True:
            q, rem = poly_divmod(h0, [-r % p, 1], p)
            if any(rem):
                break
            g0, h0 = poly_mul(g0, [-r % p, 1], p), q
    d, s, t = _poly_xgcd_mod_p(g0, h0, p)
    if d != [1]:
        raise ValueError("factors are not coprime mod p")
    g, h = g0, h0
    for k in range(1, P):
        mod = p ** (k + 1)
        err = poly_add([a % mod for a in chi], poly_scale(poly_mul(g, h, mod), -1, mod), mod)
        e = [(a // p ** k) % p for a in err]
        q, a = poly_divmod(poly_mul(e, t, p), g0, p)
        b = poly_add(poly_mul(e, s, p), poly_mul(q, h0, p), p)
        g = poly_add(g, poly_scale(a, p ** k, mod), mod)
        h = poly_add(h, poly_scale(b, p ** k, mod), mod)
    return g, h


# ---- extensions of Q_p of degree <= 2 -----------------------------------------

@dataclass(frozen=True)
class PadicExt:
    """Q_p(r) with r a root of the monic x^d + ... (d = 1 or 2), elements mod p^P."""
    p: int
    P: int
    modpoly: Tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.modpoly) - 1

    def elem(self, coeffs: Sequence[int], s: int = 0) -> "PadicElem":
        c = list(coeffs) + [0] * (self.degree - len(coeffs))
        return PadicElem(self, tuple(x % self.p ** self.P for x in c[:self.degree]), s)

    def from_rational(self, x) -> "PadicElem":
        from fractions import Fraction
        x = Fraction(x)
        den, s = x.denominator, 0
        while den % self.p == 0:
            den //= self.p
            s += 1
        return self.elem([x.numerator * pow(den, -1, self.p ** self.P)], s)

    def gen(self) -> "PadicElem":
        if self.degree == 1:
            return self.elem([-self.modpoly[0]])
        return self.elem([0, 1])

    def from_poly(self, coeffs: Sequence) -> "PadicElem":
        """sum c_j r^j with rational c_j."""
        out = self.elem([0])
        rp = self.elem([1])
        r = self.gen()
        for c in coeffs:
            if c:
                out = out + self.from_rational(c) * rp
            rp = rp * r
        return out


@dataclass(frozen=True)
class PadicElem:
    K: PadicExt
    c: Tuple[int, ...]
    s: int = 0  # the value is (c_0 + c_1 r) / p^s

    def _align(self, other: "PadicElem"):
        if not isinstance(other, PadicElem):
            other = self.K.from_rational(other)
        s = max(self.s, other.s)
        a = tuple(x * self.K.p ** (s - self.s) for x in self.c)
        b = tuple(x * self.K.p ** (s - other.s) for x in other.c)
        return a, b, s

    def __add__(self, other):
        a, b, s = self._align(other)
        return self.K.elem([x + y for x, y in zip(a, b)], s)

    __radd__ = __add__

    def __neg__(self):
        return self.K.elem([-x for x in self.c], self.s)

    def __sub__(self, other):
        a, b, s = self._align(other)
        return self.K.elem([x - y for x, y in zip(a, b)], s)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, PadicElem):
            other = self.K.from_rational(other)
        K = self.K
        if K.degree == 1:
            return K.elem([self.c[0] * other.c[0]], self.s + other.s)
        a0, a1 = self.c
        b0, b1 = other.c
        g0, g1 = K.modpoly[0], K.modpoly[1]
        # r^2 = -g1 r - g0
        t2 = a1 * b1
        return K.elem([a0 * b0 - g0 * t2, a0 * b1 + a1 * b0 - g1 * t2], self.s + other.s)

    __rmul__ = __mul__

    def conj(self) -> "PadicElem":
        if self.K.degree == 1:
            return self
        a0, a1 = self.c
        g1 = self.K.modpoly[1]
        return self.K.elem([a0 - g1 * a1, -a1], self.s)

    def _cofactor(self) -> Tuple[int, ...]:
        """c' with (c_0 + c_1 r) c' = norm."""
        return (1,) if self.K.degree == 1 else self.conj().c

    def norm_numerator(self) -> int:
        """Norm of c_0 + c_1 r, mod p^P."""
        if self.K.degree == 1:
            return self.c[0] % self.K.p ** self.K.P
        a0, a1 = self.c
        g0, g1 = self.K.modpoly[0], self.K.modpoly[1]
        return (a0 * a0 - g1 * a0 * a1 + g0 * a1 * a1) % self.K.p ** self.K.P

    def val(self):
        """Valuation normalized by v(p) = 1 (a Fraction); None if zero to the known precision."""
        from fractions import Fraction
        n = self.norm_numerator()
        if n == 0:
            return None
        return Fraction(valuation(n, self.K.p), self.K.degree) - self.s

    def inverse(self) -> "PadicElem":
        n = self.norm_numerator()
        if n % self.K.p == 0:
            raise UnitError("only units are inverted")
        ni = pow(n, -1, self.K.p ** self.K.P)
        return self.K.elem([x * ni for x in self._cofactor()], -self.s)

    def __truediv__(self, other):
        if not isinstance(other, PadicElem):
            other = self.K.from_rational(other)
        n = other.norm_numerator()
        if n == 0:
            raise ZeroDivisionError("division by an approximate zero")
        v = valuation(n, self.K.p)
        u = pow(n // self.K.p ** v, -1, self.K.p ** self.K.P)
        num = self * PadicElem(self.K, other._cofactor(), 0)
        return self.K.elem([x * u for x in num.c], num.s + v - other.s)

    def truncate(self, depth) -> "PadicElem":
        """Reduce to the residue mod p^depth (depth may be fractional; rounded up)."""
        from math import ceil
        m = self.K.p ** max(0, ceil(depth) + self.s)
        return PadicElem(self.K, tuple(x % m for x in self.c), self.s)

    def is_zero(self, depth: int) -> bool:
        v = self.val()
        return v is None or v >= depth

    def to_json(self) -> dict:
        return {"coeffs": [str(x) for x in self.c], "p_power_denominator": str(self.s)}


def hensel_root(K: PadicExt, f, df, x0: PadicElem, steps: int) -> PadicElem:
    """Newton iteration for a simple root with f'(x0) a unit."""
    x = x0
    for _ in range(steps):
        x = x - f(x) * df(x).inverse()
    return x
