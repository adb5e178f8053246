"""Indefinite binary quadratic forms with level structure.

A form [A, B, C] is Q(x, y) = A x^2 + B x y + C y^2.  At level L it must have
L | A and 2L | B; its invariant is xi = (B^2 - 4AC) / (2L)^2.  Matrices act
on the right, Q | g (x, y) = Q(a x + b y, c x + d y), so that Gamma_0(L)
preserves the level conditions.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd, isqrt
from typing import Dict, List, Optional, Sequence, Tuple

from .groups import (
    GroupPresentation,
    Mat,
    Word,
    decompose_word,
    det,
    in_gamma0,
    inv,
    mat_pow,
    mul,
    neg,
)

Form = Tuple[int, int, int]


class SplitFormError(ValueError):
    pass


def disc(Q: Form) -> int:
    A, B, C = Q
    return B * B - 4 * A * C


def act(Q: Form, g: Mat) -> Form:
    A, B, C = Q
    a, b, c, d = g
    return (
        A * a * a + B * a * c + C * c * c,
        2 * A * a * b + B * (a * d + b * c) + 2 * C * c * d,
        A * b * b + B * b * d + C * d * d,
    )


def evaluate(Q: Form, x, y):
    A, B, C = Q
    return A * x * x + B * x * y + C * y * y


def content(Q: Form) -> int:
    return gcd(gcd(Q[0], Q[1]), Q[2])


def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


# ---- Pell and automorphs --------------------------------------------------

@lru_cache(maxsize=None)
def pell_minimal(D: int) -> Tuple[int, int]:
    """Smallest t, u > 0 with t^2 - D u^2 = 4, from the continued fraction of (s + sqrt D)/2."""
    if D <= 0 or is_square(D):
        raise SplitFormError(f"discriminant {D} is not a positive non-square")
    s = D % 2
    P, Q = s, 2
    h1, h2 = 1, 0
    k1, k2 = 0, 1
    for _ in range(10 ** 6):
        a = _floor_quad(P, Q, D)
        h1, h2 = a * h1 + h2, h1
        k1, k2 = a * k1 + k2, k1
        t, u = 2 * h1 - s * k1, k1
        nrm = t * t - D * u * u
        if u > 0 and nrm == 4:
            return t, u
        if u > 0 and nrm == -4:
            return (t * t + D * u * u) // 2, t * u
        P = a * Q - P
        Q = (D - P * P) // Q
    raise RuntimeError(f"Pell search did not terminate for D={D}")


def _floor_quad(P: int, Q: int, D: int) -> int:
    """floor((P + sqrt D) / Q)."""
    r = isqrt(D)
    if Q > 0:
        return (P + r) // Q
    # Q < 0: (P + sqrt D)/Q, sqrt D irrational so floor = -ceil((P + sqrt D)/|Q|)
    return -((P + r) // (-Q)) - 1


def pell_bruteforce(D: int, umax: int = 10 ** 6) -> Tuple[int, int]:
    for u in range(1, umax):
        t2 = 4 + D * u * u
        t = isqrt(t2)
        if t * t == t2:
            return t, u
    raise RuntimeError("no Pell solution in range")


def primitive_automorph(Q: Form) -> Mat:
    """Generator of the SL_2(Z) stabilizer of Q modulo +-1, with t, u > 0."""
    g = content(Q)
    A, B, C = (x // g for x in Q)
    t, u = pell_minimal(B * B - 4 * A * C)
    return ((t - B * u) // 2, -C * u, A * u, (t + B * u) // 2)


def automorph(Q: Form, L: int) -> Tuple[Mat, int]:
    """(gamma_Q, t_Q): generator of Stab_{Gamma_0(L)}(Q)/{+-1} and the torsion order."""
    if disc(Q) <= 0 or is_square(disc(Q)):
        raise SplitFormError(f"{Q} has square or non-positive discriminant")
    g0 = primitive_automorph(Q)
    g = g0
    m = 1
    while g[2] % L:
        g = mul(g, g0)
        m += 1
        if m > 10 * L * L + 10:
            raise RuntimeError("automorph power search did not terminate")
    return g, 2


# ---- reduction theory -----------------------------------------------------

def is_reduced(Q: Form) -> bool:
    A, B, C = Q
    D = disc(Q)
    r = isqrt(D)
    # 0 < B < sqrt D and sqrt D - B < 2|A| < sqrt D + B, with sqrt D irrational
    return 0 < B <= r and (r - B) < 2 * abs(A) <= r + B


def _normalize_shift(Q: Form) -> int:
    """Translation s making Q | T^s normalized."""
    A, B, C = Q
    D = disc(Q)
    r = isqrt(D)
    # B' = B + 2 A s must land in (r - 2|A|, r] when |A| <= sqrt D, else in (-|A|, |A|]
    if abs(A) <= r:
        lo, hi = r - 2 * abs(A), r
    else:
        lo, hi = -abs(A), abs(A)
    step = 2 * A
    # B' = B + step * s ; solve lo < B + step*s <= hi
    if step > 0:
        s = (hi - B) // step
    else:
        s = -((hi - B) // (-step))
    while not (lo < B + step * s <= hi):
        if B + step * s > hi:
            s += -1 if step > 0 else 1
        else:
            s += 1 if step > 0 else -1
    return s


def rho(Q: Form) -> Tuple[Form, Mat]:
    """One reduction step: Q -> (Q | S) | T^s, returned with the matrix S T^s."""
    Q1 = act(Q, (0, -1, 1, 0))
    s = _normalize_shift(Q1)
    g = (0, -1, 1, s)
    return act(Q, g), g


def reduce_form(Q: Form) -> Tuple[Form, Mat]:
    """(R, g) with R reduced and Q | g = R."""
    g: Mat = (1, 0, 0, 1)
    s = _normalize_shift(Q)
    T = (1, s, 0, 1)
    Q = act(Q, T)
    g = mul(g, T)
    for _ in range(10000):
        if is_reduced(Q):
            return Q, g
        Q, h = rho(Q)
        g = mul(g, h)
    raise RuntimeError("reduction did not terminate")


def cycle(R: Form) -> List[Tuple[Form, Mat]]:
    """The rho-cycle of a reduced form, each entry with the matrix from R."""
    out = [(R, (1, 0, 0, 1))]
    Q, g = R, (1, 0, 0, 1)
    for _ in range(100000):
        Q, h = rho(Q)
        g = mul(g, h)
        if Q == R:
            return out
        out.append((Q, g))
    raise RuntimeError("cycle did not close")


def canonical(Q: Form) -> Tuple[Form, Mat]:
    """(Q0, g) with Q0 the minimal reduced form in the SL_2(Z)-class and Q | g = Q0."""
    R, g = reduce_form(Q)
    best = min(cycle(R), key=lambda e: e[0])
    return best[0], mul(g, best[1])


def reduced_forms(D: int) -> List[Form]:
    if D <= 0 or is_square(D):
        raise SplitFormError(f"discriminant {D} is a square or non-positive")
    r = isqrt(D)
    out = []
    for B in range(1, r + 1):
        if (B - D) % 2:
            continue
        num = B * B - D
        if num % 4:
            continue
        AC = num // 4  # negative
        n = -AC
        for a in _divisors(n):
            for A in (a, -a):
                C = AC // A
                if is_reduced((A, B, C)):
                    out.append((A, B, C))
    return sorted(set(out))


def _divisors(n: int) -> List[int]:
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            if i * i != n:
                out.append(n // i)
        i += 1
    return out


def sl2_classes(D: int) -> List[Form]:
    """Canonical representatives of SL_2(Z)-classes of forms of discriminant D."""
    seen = set()
    reps = []
    for R in reduced_forms(D):
        if R in seen:
            continue
        cyc = cycle(R)
        for F, _ in cyc:
            seen.add(F)
        reps.append(min(F for F, _ in cyc))
    return sorted(reps)


# ---- P^1(Z/L) on columns --------------------------------------------------

def _col_key(a: int, c: int, L: int) -> Tuple[int, int]:
    if L == 1:
        return (0, 0)
    units = [u for u in range(1, L) if gcd(u, L) == 1]
    return min(((u * a) % L, (u * c) % L) for u in units)


def _p1_columns(L: int) -> List[Tuple[int, int]]:
    if L == 1:
        return [(0, 0)]
    pts = set()
    for a in range(L):
        for c in range(L):
            if gcd(gcd(a, c), L) == 1:
                pts.add(_col_key(a, c, L))
    return sorted(pts)


def lift_column(a: int, c: int, L: int) -> Mat:
    """g in SL_2(Z) whose first column is congruent to (a, c) mod L."""
    if L == 1:
        return (1, 0, 0, 1)
    a, c = a % L, c % L
    # find coprime integer lift (a', c') of (a, c)
    for k in range(0, 10 * L + 10):
        a1 = a + k * L
        for j in range(0, 10 * L + 10):
            c1 = c + j * L
            if gcd(a1, c1) == 1:
                # complete to SL_2 via extended gcd
                x, y = _ext_gcd(a1, c1)  # a1 x + c1 y = 1
                return (a1, -y, c1, x)
    raise RuntimeError("no coprime lift found")


def _ext_gcd(a: int, b: int) -> Tuple[int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_s, old_t = -old_s, -old_t
    return old_s, old_t


# ---- level structure ------------------------------------------------------

@dataclass(frozen=True)
class IndefiniteForm:
    A: int
    B: int
    C: int
    L: int

    @property
    def form(self) -> Form:
        return (self.A, self.B, self.C)

    @property
    def disc(self) -> int:
        return disc(self.form)

    @property
    def xi(self) -> int:
        return self.disc // (4 * self.L * self.L)

    def check(self) -> None:
        if self.A % self.L or self.B % (2 * self.L):
            raise ValueError(f"{self.form} violates the level-{self.L} divisibility conditions")
        if self.disc % (4 * self.L * self.L):
            raise ValueError(f"{self.form} has non-integral invariant at level {self.L}")
        if is_square(self.disc):
            raise SplitFormError(f"{self.form} has square discriminant")


@dataclass
class FormClass:
    form: IndefiniteForm
    automorph: Mat
    word: Word
    t: int
    b_alpha: int
    key: Tuple = field(default=(), compare=False)

    def to_json(self) -> dict:
        return {
            "A": str(self.form.A), "B": str(self.form.B), "C": str(self.form.C),
            "automorph": [str(x) for x in self.automorph],
            "word": [str(x) for x in self.word],
            "t": str(self.t),
            "b_alpha": str(self.b_alpha),
        }


def level_ok(Q: Form, L: int) -> bool:
    return Q[0] % L == 0 and Q[1] % (2 * L) == 0


def class_key(Q: Form, L: int) -> Tuple:
    """Gamma_0(L)-class invariant: (canonical SL_2 form, orbit-minimal column)."""
    Q0, g = canonical(Q)  # Q | g = Q0, so Q = Q0 | g^{-1}
    h = inv(g)
    gamma0 = primitive_automorph(Q0)
    pt = _col_key(h[0], h[2], L)
    orbit = _orbit(pt, gamma0, L)
    return (Q0, min(orbit))


def _orbit(pt, gamma0: Mat, L: int) -> List[Tuple[int, int]]:
    out = [pt]
    cur = pt
    while True:
        a, c = cur
        nxt = _col_key(gamma0[0] * a + gamma0[1] * c, gamma0[2] * a + gamma0[3] * c, L)
        if nxt == pt:
            return out
        out.append(nxt)
        cur = nxt


def gamma0_classes(D: int, L: int) -> List[Tuple[Tuple, Form]]:
    """(key, representative) for Gamma_0(L)-classes of level-L forms of discriminant D."""
    out = []
    cols = _p1_columns(L)
    for Q0 in sl2_classes(D):
        gamma0 = primitive_automorph(Q0)
        seen = set()
        for pt in cols:
            if pt in seen:
                continue
            orb = _orbit(pt, gamma0, L)
            seen.update(orb)
            rep_pt = min(orb)
            g = lift_column(rep_pt[0], rep_pt[1], L)
            Q = act(Q0, g)
            if level_ok(Q, L):
                out.append(((Q0, rep_pt), Q))
    return out


def make_class(Q: Form, L: int, G: Optional[GroupPresentation] = None, key=None) -> FormClass:
    F = IndefiniteForm(*Q, L)
    gam, t = automorph(Q, L)
    word: Word = ()
    if G is not None:
        w, sign = decompose_word(gam, G)
        word = w
    return FormClass(F, gam, word, t, (-Q[2]) % L, key if key is not None else ())


_CLASS_CACHE: Dict[Tuple[int, int, bool], List[FormClass]] = {}


def enumerate_classes(N: int, p: int, n: int, xi: int, G: Optional[GroupPresentation] = None) -> List[FormClass]:
    """One FormClass per Gamma_0(N p^n)-class of level forms with invariant xi."""
    L = N * p ** n
    D = xi * 4 * L * L
    if is_square(D):
        raise SplitFormError(f"xi = {xi} gives square discriminant {D}")
    ck = (L, xi, G is not None and not G.external)
    if ck in _CLASS_CACHE and G is not None and G.level == L:
        return list(_CLASS_CACHE[ck])
    out = [make_class(Q, L, G, key) for key, Q in gamma0_classes(D, L)]
    out.sort(key=lambda c: c.key)
    if G is not None and G.level == L:
        _CLASS_CACHE[ck] = list(out)
    return out


# ---- characters and eta ---------------------------------------------------

def legendre(a: int, q: int) -> int:
    a %= q
    if a == 0:
        return 0
    r = pow(a, (q - 1) // 2, q)
    return -1 if r == q - 1 else 1


def kronecker(a: int, n: int) -> int:
    """Kronecker symbol (a / n) for n > 0."""
    if n == 1:
        return 1
    if gcd(a, n) != 1:
        return 0
    out = 1
    m = n
    while m % 2 == 0:
        m //= 2
        a8 = a % 8
        out *= 1 if a8 in (1, 7) else -1
    q = 3
    while m > 1:
        while m % q == 0:
            m //= q
            out *= legendre(a, q)
        q += 2
    return out


@dataclass(frozen=True)
class CharacterData:
    """Product of Legendre symbols at the listed odd primes; 0 off the units mod ``modulus``."""
    modulus: int
    primes: Tuple[int, ...] = ()

    def __call__(self, x: int) -> int:
        if gcd(x, self.modulus) != 1:
            return 0
        out = 1
        for q in self.primes:
            out *= legendre(x, q)
        return out

    @property
    def is_trivial(self) -> bool:
        return not self.primes

    def parity(self) -> int:
        return self(-1) if gcd(self.modulus, 1) == 1 else 0

    def to_json(self) -> dict:
        return {"modulus": str(self.modulus), "primes": [str(q) for q in self.primes]}


def eta(cls: FormClass, psi: CharacterData, Np: int) -> int:
    """psi(b_alpha), and 0 unless b_alpha is a unit mod N p."""
    b = cls.b_alpha
    if gcd(b, Np) != 1:
        return 0
    return psi(b)


# ---- level-changing comparison map ------------------------------------------

def _sq_class(x: int, L: int) -> int:
    """Minimal representative of x (Z/L)^{x2}."""
    squares = {(u * u) % L for u in range(1, L) if gcd(u, L) == 1} if L > 1 else {0}
    return min((x * s) % L for s in squares) if L > 1 else 0


def level_m_to_one(N: int, p: int, m: int, xi: int, t: Optional[int] = None):
    """Classes of F_{m, xi, t} and F_{1, xi p^(2(m-1)), t} and the induced map.

    Only classes with C a unit mod N p are included; ``t`` restricts to classes
    with -C in the square class of t mod N p.
    """
    Lm, L1 = N * p ** m, N * p
    xi1 = xi * p ** (2 * (m - 1))

    def keep(Q):
        if gcd(Q[2], N * p) != 1:
            return False
        return t is None or _sq_class(-Q[2], L1) == _sq_class(t, L1)

    src = [(k, Q) for k, Q in gamma0_classes(4 * Lm * Lm * xi, Lm) if keep(Q)]
    tgt = [(k, Q) for k, Q in gamma0_classes(4 * L1 * L1 * xi1, L1) if keep(Q)]
    tgt_keys = {k for k, _ in tgt}
    mapping = {}
    for k, Q in src:
        mapping[k] = class_key(Q, L1)
    return src, tgt, mapping, tgt_keys


@dataclass
class FamilyMapReport:
    m: int
    xi: int
    t: Optional[int]
    n_source: int
    n_target: int
    injective: bool
    surjective: bool
    well_defined: bool

    @property
    def bijective(self) -> bool:
        return self.injective and self.surjective and self.well_defined


def family_map_pi(N: int, p: int, m: int, xi: int, t: Optional[int] = None, conj_samples: int = 3, seed: int = 0) -> FamilyMapReport:
    import random

    rng = random.Random(seed)
    src, tgt, mapping, tgt_keys = level_m_to_one(N, p, m, xi, t)
    images = list(mapping.values())
    injective = len(set(images)) == len(images)
    surjective = set(images) == tgt_keys and all(im in tgt_keys for im in images)
    well_defined = True
    Lm, L1 = N * p ** m, N * p
    for k, Q in src:
        for _ in range(conj_samples):
            g = random_gamma0(Lm, rng)
            if class_key(act(Q, g), L1) != mapping[k]:
                well_defined = False
    return FamilyMapReport(m, xi, t, len(src), len(tgt), injective, surjective, well_defined)


def random_gamma0(L: int, rng, bound: int = 6) -> Mat:
    g: Mat = (1, 0, 0, 1)
    for _ in range(bound):
        k = rng.randint(-3, 3)
        if rng.random() < 0.5:
            g = mul(g, (1, k, 0, 1))
        else:
            g = mul(g, (1, 0, k * L, 1))
    return g


# ---- cache -----------------------------------------------------------------

def save_class_cache(path: str, key: Tuple[int, int, int, int], classes: Sequence[FormClass]) -> None:
    import os

    data = {}
    if os.path.exists(path):
        with open(path) as fh:
            data = json.load(fh)
    data["|".join(map(str, key))] = [c.to_json() for c in classes]
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
