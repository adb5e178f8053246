"""Measures on Z_p x Z_p^x by disc moments, and the Lambda-adic Shintani lift.

A PrimMeasure keeps, for every disc (x0, y0) with 0 <= x0 < p and y0 a unit,
the normalized moments

    mu_ij = int ((x - x0) / p)^i ((y - omega(y0)) / p)^j dnu,   i + j < M,

with mu_ij known modulo p^(M - i - j).  Every integral matrix preserving the
set of y-unit vectors acts on this data exactly, and degree-d moments of an
image only involve source moments of degree <= d, so the filtration is stable.

Measures are stored flat (disc-major) so that the generic cochain code in
``cohomology`` works unchanged with MeasureModule as coefficient module.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb, factorial, gcd, lcm
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .cohomology import hecke_cochain_matrix
from .groups import Mat, coset_decomposition, inv
from .padic import IwasawaMeasure, UnitError, specialize_iwasawa, teichmuller, valuation


class SupportError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, msg: str, depth: int):
        super().__init__(msg)
        self.depth = depth


def _poly2_mul(f: Dict[Tuple[int, int], int], g: Dict[Tuple[int, int], int], cap: int) -> Dict[Tuple[int, int], int]:
    out: Dict[Tuple[int, int], int] = {}
    for (a, b), x in f.items():
        for (c, d), y in g.items():
            if a + b + c + d < cap:
                out[(a + c, b + d)] = out.get((a + c, b + d), 0) + x * y
    return out


def _poly2_pow(f, e: int, cap: int):
    out = {(0, 0): 1}
    for _ in range(e):
        out = _poly2_mul(out, f, cap)
    return out


class MeasureModule:
    """Coefficient module for cochains with values in PrimMeasures mod p^M."""

    def __init__(self, p: int, M: int):
        if p == 2:
            raise ValueError("p must be odd")
        self.p, self.M = p, M
        self.discs = [(x0, y0) for x0 in range(p) for y0 in range(1, p)]
        self.disc_index = {d: i for i, d in enumerate(self.discs)}
        self.monos = [(i, d - i) for d in range(M) for i in range(d, -1, -1)]
        self.mono_index = {m: k for k, m in enumerate(self.monos)}
        self.nm = len(self.monos)
        self.dim = len(self.discs) * self.nm
        self.tag = f"D{p}^{M}"
        self.modulus = p ** M
        self.deg = np.array([i + j for _ in self.discs for (i, j) in self.monos], dtype=np.int64)
        self.moduli = np.array([p ** (M - d) for d in self.deg], dtype=np.int64)
        self.centers = {(x0, y0): (x0, teichmuller(y0, p, M + 1)) for (x0, y0) in self.discs}

    def reduce(self, arr: np.ndarray) -> np.ndarray:
        arr = np.asarray(arr)
        if arr.dtype == object:
            arr = np.array(arr, dtype=np.int64)
        if arr.ndim == 1:
            return arr % self.moduli
        if arr.shape[0] == self.dim:
            return arr % self.moduli[:, None]
        # stacked blocks of rows, one module copy per block
        reps = arr.shape[0] // self.dim
        return arr % np.tile(self.moduli, reps)[:, None]

    def zero_matrix(self, rows: int, cols: int) -> np.ndarray:
        return np.zeros((rows, cols), dtype=np.int64)

    def act_matrix(self, g: Mat) -> np.ndarray:
        A, bad = _act_matrix(self.p, self.M, tuple(int(x) for x in g))
        if bad:
            raise SupportError(f"{tuple(g)} sends discs {list(bad)} off Z_p x Z_p^x")
        return A

    def image_disc(self, g: Mat, disc) -> Optional[Tuple[int, int]]:
        a, b, c, d = g
        x0, y0 = disc
        y1 = (c * x0 + d * y0) % self.p
        if y1 == 0:
            return None
        return ((a * x0 + b * y0) % self.p, y1)


@lru_cache(maxsize=None)
def _shift_maps(M: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Index maps for multiplication by u and by v on polynomials of degree < M."""
    monos = [(i, d - i) for d in range(M) for i in range(d, -1, -1)]
    index = {m: k for k, m in enumerate(monos)}
    src, du, dv = [], [], []
    for k, (i, j) in enumerate(monos):
        if i + j + 1 < M:
            src.append(k)
            du.append(index[(i + 1, j)])
            dv.append(index[(i, j + 1)])
    return np.array(src), np.array(du), np.array(dv)


def _times_linear(f: np.ndarray, c0: int, cu: int, cv: int, M: int, P: int) -> np.ndarray:
    src, du, dv = _shift_maps(M)
    out = f * c0
    out[du] += f[src] * cu
    out[dv] += f[src] * cv
    return out % P


@lru_cache(maxsize=20000)
def _act_matrix(p: int, M: int, g: Mat) -> Tuple[np.ndarray, Tuple]:
    """Action matrix, with columns of discs leaving the support left at zero."""
    mod = _cached_module(p, M)
    P = p ** M
    a, b, c, d = g
    nm = mod.nm
    out = np.zeros((mod.dim, mod.dim), dtype=np.int64)
    bad = []
    one = np.zeros(nm, dtype=np.int64)
    one[0] = 1
    for si, disc in enumerate(mod.discs):
        img = mod.image_disc(g, disc)
        if img is None:
            bad.append(disc)
            continue
        X0, Y0 = mod.centers[disc]
        X1, Y1 = mod.centers[img]
        ti = mod.disc_index[img]
        U = ((a * X0 + b * Y0 - X1) // p % P, a % P, b % P)
        V = ((c * X0 + d * Y0 - Y1) // p % P, c % P, d % P)
        Upow = [one]
        for _ in range(1, M):
            Upow.append(_times_linear(Upow[-1], *U, M, P))
        block = np.zeros((nm, nm), dtype=np.int64)
        for i in range(M):
            f = Upow[i]
            for j in range(M - i):
                block[mod.mono_index[(i, j)]] = f
                f = _times_linear(f, *V, M, P)
        out[ti * nm:(ti + 1) * nm, si * nm:(si + 1) * nm] = block % mod.moduli[:nm, None]
    out.setflags(write=False)
    return out, tuple(bad)


_MODULES: Dict[Tuple[int, int], MeasureModule] = {}


def _cached_module(p: int, M: int) -> MeasureModule:
    key = (p, M)
    if key not in _MODULES:
        _MODULES[key] = MeasureModule(p, M)
    return _MODULES[key]


@dataclass
class PrimMeasure:
    p: int
    M: int
    data: np.ndarray

    @property
    def module(self) -> MeasureModule:
        return _cached_module(self.p, self.M)

    @classmethod
    def zero(cls, p: int, M: int) -> "PrimMeasure":
        return cls(p, M, np.zeros(_cached_module(p, M).dim, dtype=np.int64))

    @classmethod
    def point_mass(cls, x: int, y: int, p: int, M: int, mass: int = 1) -> "PrimMeasure":
        mod = _cached_module(p, M)
        if y % p == 0:
            raise SupportError("point mass must have unit y")
        disc = (x % p, y % p)
        X0, Y0 = mod.centers[disc]
        u, v = (x - X0) // p, (y - Y0) // p
        data = np.zeros(mod.dim, dtype=np.int64)
        base = mod.disc_index[disc] * mod.nm
        for k, (i, j) in enumerate(mod.monos):
            data[base + k] = mass * pow(u, i, mod.modulus) * pow(v, j, mod.modulus) % int(mod.moduli[base + k])
        return cls(p, M, data)

    def moment(self, disc, i: int, j: int) -> int:
        mod = self.module
        return int(self.data[mod.disc_index[disc] * mod.nm + mod.mono_index[(i, j)]])

    def __add__(self, other: "PrimMeasure") -> "PrimMeasure":
        return PrimMeasure(self.p, self.M, self.module.reduce(self.data + other.data))

    def __sub__(self, other: "PrimMeasure") -> "PrimMeasure":
        return PrimMeasure(self.p, self.M, self.module.reduce(self.data - other.data))

    def scale(self, c: int) -> "PrimMeasure":
        return PrimMeasure(self.p, self.M, self.module.reduce(self.data * (c % self.p ** self.M)))

    def __eq__(self, other) -> bool:
        return isinstance(other, PrimMeasure) and bool(np.array_equal(self.module.reduce(self.data), self.module.reduce(other.data)))

    def is_zero(self) -> bool:
        return not self.module.reduce(self.data).any()

    def to_json(self) -> dict:
        return {"p": str(self.p), "M": str(self.M), "moments": [str(int(x)) for x in self.data]}

    @classmethod
    def from_json(cls, d: dict) -> "PrimMeasure":
        return cls(int(d["p"]), int(d["M"]), np.array([int(x) for x in d["moments"]], dtype=np.int64))


def act_measure(s: Mat, nu: PrimMeasure) -> PrimMeasure:
    """Pushforward of nu under the column action (x, y) -> s (x, y)."""
    mod = nu.module
    A, bad = _act_matrix(nu.p, nu.M, tuple(int(x) for x in s))
    data = mod.reduce(nu.data)
    for disc in bad:
        base = mod.disc_index[disc] * mod.nm
        if data[base:base + mod.nm].any():
            raise SupportError(f"{tuple(s)} sends mass on disc {disc} off Z_p x Z_p^x")
    return PrimMeasure(nu.p, nu.M, mod.reduce(A.dot(data)))


def weight_scalar_act(t: int, nu: PrimMeasure) -> PrimMeasure:
    if t % nu.p == 0:
        raise UnitError(f"{t} is not a unit")
    return act_measure((t, 0, 0, t), nu)


def symmetrize(nu: PrimMeasure) -> PrimMeasure:
    """(nu + (-1) . nu) / 2, the part on which -1 acts trivially."""
    half = pow(2, -1, nu.p ** nu.M)
    return (nu + act_measure((-1, 0, 0, -1), nu)).scale(half)


# ---- specialization ---------------------------------------------------------

@lru_cache(maxsize=256)
def rho_matrix(p: int, M: int, n: int, i: int) -> np.ndarray:
    """Matrix of nu -> (x^a y^(n-a) -> int_{y unit} omega^i(y) x^a y^(n-a) dnu), mod p^M."""
    mod = _cached_module(p, M)
    P = p ** M
    out = np.zeros((n + 1, mod.dim), dtype=object)
    for di, disc in enumerate(mod.discs):
        X0, Y0 = mod.centers[disc]
        tw = pow(Y0, i % (p - 1), P)
        for a in range(n + 1):
            for k in range(a + 1):
                cx = comb(a, k) * X0 ** (a - k) * p ** k
                for l in range(n - a + 1):
                    if k + l >= M:
                        continue
                    cy = comb(n - a, l) * pow(Y0, n - a - l, P) * p ** l
                    col = di * mod.nm + mod.mono_index[(k, l)]
                    out[a, col] = (out[a, col] + tw * cx * cy) % P
    return np.array(out, dtype=np.int64)


def _gbinom(a: int, l: int) -> int:
    """Binomial coefficient C(a, l) for any integer a."""
    out = 1
    for t in range(l):
        out = out * (a - t)
    return out // factorial(l)


@lru_cache(maxsize=64)
def fiber_matrix(p: int, M: int, n: int, i: int) -> np.ndarray:
    """Matrix of nu -> (int_{y unit} omega^i(y) y^n (x/y)^j dnu)_{0 <= j < M}, mod p^M.

    This is the image of nu in the weight (n, i) distributions on Z_p, where
    the j-th moment is meaningful mod p^(M - j).
    """
    mod = _cached_module(p, M)
    P = p ** M
    out = np.zeros((M, mod.dim), dtype=object)
    for di, disc in enumerate(mod.discs):
        X0, Y0 = mod.centers[disc]
        tw = pow(Y0, i % (p - 1), P)
        Yi = pow(Y0, -1, P)
        for j in range(M):
            lead = tw * pow(Y0, n - j, P) if n >= j else tw * pow(Yi, j - n, P)
            for k in range(j + 1):
                cx = comb(j, k) * X0 ** (j - k) * p ** k
                for l in range(M - k):
                    cy = _gbinom(n - j, l) * pow(p * Yi, l, P)
                    col = di * mod.nm + mod.mono_index[(k, l)]
                    out[j, col] = (out[j, col] + lead * cx * cy) % P
    return np.array(out, dtype=np.int64)


def rho_k(nu: PrimMeasure, n: int, i: int = 0) -> Tuple[int, ...]:
    """Values of the specialized functional on the monomials x^a y^(n-a), mod p^M."""
    R = rho_matrix(nu.p, nu.M, n, i)
    return tuple(int(v) for v in (R.dot(nu.module.reduce(nu.data)) % nu.p ** nu.M))


def rho_cochain(Psi: np.ndarray, p: int, M: int, ngens: int, n: int, i: int = 0) -> np.ndarray:
    mod = _cached_module(p, M)
    R = rho_matrix(p, M, n, i)
    blocks = [R.dot(Psi[g * mod.dim:(g + 1) * mod.dim]) % p ** M for g in range(ngens)]
    return np.concatenate(blocks)


# ---- pushforward to Z_p^x ---------------------------------------------------

@lru_cache(maxsize=4096)
def _j_matrix(p: int, M: int, Q: Tuple[int, int, int]) -> Tuple[np.ndarray, Tuple]:
    """Matrix from PrimMeasure data to IwasawaMeasure moments (branch-major)."""
    mod = _cached_module(p, M)
    A, B, C = Q
    out = np.zeros(((p - 1) * M, mod.dim), dtype=np.int64)
    bad = []
    for di, disc in enumerate(mod.discs):
        X0, Y0 = mod.centers[disc]
        q0 = A * X0 * X0 + B * X0 * Y0 + C * Y0 * Y0
        a = q0 % p
        if a == 0:
            bad.append(disc)
            continue
        c0 = (q0 - teichmuller(a, p, M + 1)) // p
        s = {(0, 0): c0, (1, 0): 2 * A * X0 + B * Y0, (0, 1): B * X0 + 2 * C * Y0,
             (2, 0): p * A, (1, 1): p * B, (0, 2): p * C}
        sj = {(0, 0): 1}
        for j in range(M):
            if j:
                sj = _poly2_mul(sj, s, M)
            m = p ** (M - j)
            row = (a - 1) * M + j
            for (k, l), coef in sj.items():
                col = di * mod.nm + mod.mono_index[(k, l)]
                out[row, col] = (int(out[row, col]) + coef) % m
    out.setflags(write=False)
    return out, tuple(bad)


def _iwasawa_from_flat(v: np.ndarray, p: int, M: int) -> IwasawaMeasure:
    return IwasawaMeasure(p, M, {a: [int(x) for x in v[(a - 1) * M:a * M]] for a in range(1, p)})


def j_alpha(nu: PrimMeasure, Q: Tuple[int, int, int]) -> IwasawaMeasure:
    """Pushforward of nu restricted to y-unit discs under (x, y) -> Q(x, y)."""
    mod = nu.module
    J, bad = _j_matrix(nu.p, nu.M, tuple(Q))
    data = mod.reduce(nu.data)
    for disc in bad:
        base = mod.disc_index[disc] * mod.nm
        if data[base:base + mod.nm].any():
            raise UnitError(f"form {tuple(Q)} is not a unit on disc {disc}, which carries mass")
    return _iwasawa_from_flat(J.dot(data), nu.p, nu.M)


# ---- measure-valued cochains ------------------------------------------------

@dataclass
class DistSymbol:
    """Cochain on the generators of G with PrimMeasure values, stored flat."""
    G: object
    p: int
    M: int
    data: np.ndarray

    @property
    def module(self) -> MeasureModule:
        return _cached_module(self.p, self.M)

    @property
    def moduli(self) -> np.ndarray:
        return np.tile(self.module.moduli, self.G.ngens)

    def value(self, idx: int) -> PrimMeasure:
        d = self.module.dim
        return PrimMeasure(self.p, self.M, self.data[idx * d:(idx + 1) * d].copy())

    def evaluate(self, word) -> PrimMeasure:
        """Value of the cocycle on a word, peeling letters off from the right.

        c(g w) = c(g) + g c(w) and c(g^-1 w) = g^-1 (c(w) - c(g)), so only the
        generator matrices and their inverses are ever needed.
        """
        mod = self.module
        d = mod.dim
        acc = np.zeros(d, dtype=np.int64)
        for letter in reversed(word):
            idx = abs(letter) - 1
            g = self.G.generators[idx]
            cg = self.data[idx * d:(idx + 1) * d]
            if letter > 0:
                acc = (cg + mod.act_matrix(g).dot(acc)) % mod.moduli
            else:
                acc = mod.act_matrix(inv(g)).dot((acc - cg) % mod.moduli) % mod.moduli
        return PrimMeasure(self.p, self.M, acc)

    def replace(self, data: np.ndarray) -> "DistSymbol":
        return DistSymbol(self.G, self.p, self.M, data % self.moduli)

    def __eq__(self, other) -> bool:
        return isinstance(other, DistSymbol) and bool(np.array_equal(self.data % self.moduli, other.data % other.moduli))

    def to_json(self, kappa0: Optional[dict] = None) -> dict:
        d = self.module.dim
        return {
            "N": str(self.G.level),
            "p": str(self.p),
            "M": str(self.M),
            "kappa0": kappa0 or {},
            "generators": [self.value(g).to_json() for g in range(self.G.ngens)],
        }

    @classmethod
    def from_json(cls, d: dict, G) -> "DistSymbol":
        data = np.concatenate([PrimMeasure.from_json(m).data for m in d["generators"]])
        return cls(G, int(d["p"]), int(d["M"]), data)


_OPS: Dict[Tuple, np.ndarray] = {}


def cochain_operator(G, p: int, M: int, s: Mat) -> np.ndarray:
    """Cochain-level matrix of the Hecke operator attached to s (cached per level)."""
    key = (G.level, G.ngens, p, M, tuple(s))
    if key not in _OPS:
        mod = _cached_module(p, M)
        _OPS[key] = hecke_cochain_matrix(G, mod, coset_decomposition(tuple(s), G))
    return _OPS[key]


def apply_operator(Psi: DistSymbol, s: Mat, scalar: int = 1) -> DistSymbol:
    T = cochain_operator(Psi.G, Psi.p, Psi.M, s)
    mods = Psi.moduli
    return Psi.replace((T.dot(Psi.data % mods) % mods) * (scalar % Psi.p ** Psi.M))


def up_apply(Psi: DistSymbol, a_p: int) -> DistSymbol:
    """One application of a_p^(-1) U_p."""
    P = Psi.p ** Psi.M
    return apply_operator(Psi, (1, 0, 0, Psi.p), pow(a_p, -1, P))


def _mm(X: np.ndarray, Y: np.ndarray, mods: np.ndarray) -> np.ndarray:
    """X Y reduced by row moduli; exact in float64 while the sums stay below 2^53."""
    bound = int(mods.max()) ** 2 * X.shape[1]
    if bound < 2 ** 53:
        Z = np.rint(X.astype(np.float64) @ Y.astype(np.float64)).astype(np.int64)
    else:
        Z = X.dot(Y)
    return Z % (mods[:, None] if Z.ndim == 2 else mods)


def _matpow(X: np.ndarray, e: int, mods: np.ndarray) -> np.ndarray:
    R = np.identity(X.shape[0], dtype=np.int64)
    B = X % mods[:, None]
    while e:
        if e & 1:
            R = _mm(R, B, mods)
        B = _mm(B, B, mods)
        e >>= 1
    return R


def unit_projector(T: np.ndarray, v: np.ndarray, mods: np.ndarray, p: int, cap: int) -> Tuple[np.ndarray, List[int]]:
    """lim T^(L p^m) v: the component of v on which T acts invertibly mod p.

    L is the lcm of p^f - 1 for small f, so the limit exists once the residue
    fields of T restricted to the orbit of v are covered.  Returns the limit
    and the log of changed-entry counts between successive m; raises
    ConvergenceError past ``cap`` refinements.
    """
    L = 1
    for f in range(1, 9):
        L = lcm(L, p ** f - 1)
    E = _matpow(T, L, mods)
    x = E.dot(v) % mods
    log = []
    for m in range(cap):
        E = _matpow(E, p, mods)
        y = E.dot(v) % mods
        changed = int(np.count_nonzero((y - x) % mods))
        log.append(changed)
        x = y
        if changed == 0 and m > 0:
            return x, log
    raise ConvergenceError(f"projection did not stabilize after {cap} refinements", depth=len(log))


@dataclass
class LiftReport:
    log: List[int]
    t2_log: List[int]
    rho_ok: bool
    ordinary_fixed: bool
    up_fixed_depth: Dict[int, Optional[int]]
    fiber_fixed: bool = False

    @property
    def up_fixed(self) -> bool:
        return all(v is None for v in self.up_fixed_depth.values())


def lift_ordinary(G, phi_alpha: Sequence[int], n0: int, p: int, M: int, a_p: int,
                  sign: int = -1, clean_ell: Optional[int] = 2, cap: Optional[int] = None
                  ) -> Tuple[DistSymbol, LiftReport]:
    """Measure-valued lift Phi of a U_p-eigen cocycle with rho(Phi) = phi_alpha.

    phi_alpha holds the V_{n0} values (mod p^M) on the generators of G; it must
    be an a_p-eigenvector of U_p with a_p a unit.  Phi is the image of a naive
    lift under the ordinary projector, the iota-sign projector and the
    projector onto the part where T_ell is a unit (this removes the Eisenstein
    part, on which T_ell is topologically nilpotent in the families used here).
    """
    if a_p % p == 0:
        from .shintani import OrdinarityError
        raise OrdinarityError(f"a_p = {a_p} is not a unit")
    cap = 8 * M if cap is None else cap
    P = p ** M
    mod = _cached_module(p, M)
    d = n0 + 1
    vals = [tuple(int(x) % P for x in phi_alpha[g * d:(g + 1) * d]) for g in range(G.ngens)]
    data = np.concatenate([symmetrize(naive_lift(v, p, M)).data for v in vals])
    Psi = DistSymbol(G, p, M, data)
    mods = Psi.moduli
    half = pow(2, -1, P)
    iota = cochain_operator(G, p, M, G.omega_inf)
    Psi = Psi.replace((Psi.data + sign * iota.dot(Psi.data)) * half)
    A = cochain_operator(G, p, M, (1, 0, 0, p)) * pow(a_p, -1, P) % mods[:, None]
    x, log = unit_projector(A, Psi.data, mods, p, cap)
    Phi = Psi.replace(x)
    t2_log: List[int] = []
    if clean_ell is not None:
        T = cochain_operator(G, p, M, (1, 0, 0, clean_ell))
        x, t2_log = unit_projector(T, Phi.data, mods, p, cap)
        Phi = Phi.replace(x)
    rho = rho_cochain(Phi.data, p, M, G.ngens, n0)
    target = np.array([x for v in vals for x in v], dtype=np.int64)
    rho_ok = bool(np.array_equal(rho % P, target % P))
    fixed = bool(np.array_equal(unit_projector(A, Phi.data, mods, p, cap)[0], Phi.data))
    diff = (A.dot(Phi.data) - Phi.data) % mods
    deg = np.tile(mod.deg, G.ngens)
    depth: Dict[int, Optional[int]] = {}
    for k in range(M):
        nz = [int(x) for x in diff[deg == k] if x]
        depth[k] = min(valuation(x, p) for x in nz) if nz else None
    F = fiber_matrix(p, M, n0, 0)
    fmods = np.array([p ** (M - j) for j in range(M)], dtype=np.int64)
    AF = A.dot(Phi.data) % mods
    fiber_fixed = all(
        np.array_equal(F.dot(AF[g * mod.dim:(g + 1) * mod.dim]) % P % fmods,
                       F.dot(Phi.data[g * mod.dim:(g + 1) * mod.dim]) % P % fmods)
        for g in range(G.ngens))
    return Phi, LiftReport(log, t2_log, rho_ok, fixed, depth, fiber_fixed)


def naive_lift(values: Sequence[int], p: int, M: int) -> PrimMeasure:
    """A measure nu with rho_k(nu, n) = values, built from point masses at (k, 1)."""
    n = len(values) - 1
    P = p ** M
    if n >= p:
        raise ValueError(f"naive lifts need n < p (got n = {n})")
    # values on binomial polynomials C(x, b) y^(n-b), then invert the unitriangular system
    stir = _stirling_first(n)
    target = []
    for b in range(n + 1):
        num = sum(stir[b][a] * values[a] for a in range(b + 1))
        target.append(num * pow(factorial(b), -1, P) % P)
    # solve sum_j masses[j] C(j, b) = target[b], lower-triangular in b <= j
    masses = [0] * (n + 1)
    for b in range(n, -1, -1):
        masses[b] = (target[b] - sum(masses[j] * comb(j, b) for j in range(b + 1, n + 1))) % P
    nu = PrimMeasure.zero(p, M)
    for k, m in enumerate(masses):
        if m:
            nu = nu + PrimMeasure.point_mass(k, 1, p, M, m)
    return nu


def _stirling_first(n: int) -> List[List[int]]:
    """s[b][a]: coefficients with C(x, b) b! = sum_a s[b][a] x^a."""
    s = [[0] * (n + 1) for _ in range(n + 1)]
    s[0][0] = 1
    for b in range(1, n + 1):
        for a in range(1, b + 1):
            s[b][a] = s[b - 1][a - 1] - (b - 1) * s[b - 1][a]
    return s


# ---- the Lambda-adic lift -----------------------------------------------------

def tame_parts(psi, p: int) -> Tuple[object, int]:
    """Split a quadratic character into its prime-to-p part and the exponent i' of omega."""
    from .bqf import CharacterData
    half = (p - 1) // 2 if p in psi.primes else 0
    rest = CharacterData(psi.modulus, tuple(q for q in psi.primes if q != p))
    return rest, half


def class_prefactor(cls, psi, p: int) -> int:
    """psi_M(b) omega^(i')(-1) for b = b_alpha; zero when b is not prime to N p."""
    rest, half = tame_parts(psi, p)
    b = cls.b_alpha
    if gcd(b, psi.modulus * p) != 1:
        return 0
    return rest(b) * (-1) ** half


@dataclass
class LambdaQExpansion:
    N: int
    p: int
    M: int
    psi: object
    coeffs: Dict[int, IwasawaMeasure]
    window: int

    def __getitem__(self, xi: int) -> IwasawaMeasure:
        if xi < 1 or xi > self.window:
            raise IndexError(f"xi = {xi} outside the window 1..{self.window}")
        return self.coeffs.get(xi, IwasawaMeasure.zero(self.p, self.M))

    def to_json(self) -> dict:
        return {
            "N": str(self.N), "p": str(self.p), "M": str(self.M),
            "character": self.psi.to_json(), "window": str(self.window),
            "coefficients": [{"xi": str(xi), "measure": self[xi].to_json()} for xi in range(1, self.window + 1)],
        }


def theta_xi(Phi: DistSymbol, xi: int, psi, classes=None, N: Optional[int] = None) -> IwasawaMeasure:
    """sum over classes of prefactor * j_alpha(Phi(gamma_Q)) / t_Q with t_Q = 2."""
    from . import bqf
    p, M = Phi.p, Phi.M
    P = p ** M
    out = IwasawaMeasure.zero(p, M)
    if bqf.is_square(xi):
        return out
    if classes is None:
        N = Phi.G.level // p if N is None else N
        classes = bqf.enumerate_classes(N, p, 1, xi, Phi.G)
    half = pow(2, -1, P)
    for cls in classes:
        c = class_prefactor(cls, psi, p)
        if c == 0:
            continue
        word = cls.word
        if not word:
            from .groups import decompose_word
            word, _ = decompose_word(cls.automorph, Phi.G)
        nu = Phi.evaluate(word)
        out = out + j_alpha(nu, cls.form.form).scale(c * half)
    return out


def theta_series(Phi: DistSymbol, window: int, psi, N: Optional[int] = None) -> LambdaQExpansion:
    N = Phi.G.level // Phi.p if N is None else N
    coeffs = {xi: theta_xi(Phi, xi, psi, N=N) for xi in range(1, window + 1)}
    return LambdaQExpansion(N, Phi.p, Phi.M, psi, coeffs, window)


def specialize_theta(Theta: LambdaQExpansion, half_tame: int, e: int, r: int = 1) -> Dict[int, "object"]:
    from .padic import ScopeError
    if r != 1:
        raise ScopeError("only wild level r = 1 is supported")
    return {xi: specialize_iwasawa(Theta[xi], half_tame, e) for xi in range(1, Theta.window + 1)}


def up_squared_relation(Theta: LambdaQExpansion, a_p: int, xi_max: int, loss: int = 0) -> Dict:
    """theta_{xi p^2} == a_p theta_xi for xi <= xi_max, moment j compared mod p^(M - j - loss)."""
    p = Theta.p
    if Theta.window < p * p * xi_max:
        raise ValueError(f"window {Theta.window} is smaller than p^2 * {xi_max}")
    failures = [xi for xi in range(1, xi_max + 1)
                if not Theta[p * p * xi].equals(Theta[xi].scale(a_p), loss)]
    return {"pass": not failures, "failures": failures, "xi_max": xi_max, "loss": loss}


def up_squared_operator_relation(Theta: LambdaQExpansion, Theta_up: LambdaQExpansion, xi_max: int,
                                 loss: int = 0) -> Dict:
    """theta_{p^2 xi}(Phi) = theta_xi(U_p Phi) for xi <= xi_max.

    This is the relation with a_p acting through the Hecke algebra on Phi,
    which is what a_p means when the family is not of rank one over Lambda.
    """
    p = Theta.p
    if Theta.window < p * p * xi_max:
        raise ValueError(f"window {Theta.window} is smaller than p^2 * {xi_max}")
    if Theta_up.window < xi_max:
        raise ValueError(f"window {Theta_up.window} is smaller than {xi_max}")
    failures = [xi for xi in range(1, xi_max + 1) if not Theta[p * p * xi].equals(Theta_up[xi], loss)]
    return {"pass": not failures, "failures": failures, "xi_max": xi_max, "loss": loss}
