"""Family members at a given weight and the interpolation comparison.

A family member is located p-adically: on the sign part of H^1(Gamma_0(N), V_n)
the characteristic polynomial chi of T_p is split over Z_p into the factor g
whose roots reduce to the base eigenvalue mod p and its complement.  Roots of g
live in K = Q_p[x]/g (degree 1 or 2 in scope).  An eigenvector for a root r is
written as sum_j r^j c_j with rational cochains c_j, so classical lifts are
computed over Q and only combined in K at the end.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import bqf, linalg
from .cohomology import (
    H1,
    PolyModule,
    T_ell,
    compute_h1,
    hecke_cochain_matrix,
    involution_split,
    restrict_cocycle,
)
from .groups import GroupPresentation, build_presentation, coset_decomposition
from .padic import PadicElem, PadicExt, hensel_root, hensel_split, valuation
from .shintani import OrdinarityError, lift_coefficient


class FamilyMatchError(ValueError):
    pass


@dataclass
class FamilyMember:
    N: int
    p: int
    w: int
    sign: int
    K: PadicExt
    r: PadicElem                       # T_p eigenvalue at level N
    alpha: PadicElem                   # unit root of x^2 - r x + p^(w-1)
    components: List[np.ndarray]       # rational cochains c_j at level N p, already U_p-stabilized pieces
    stab_components: List[np.ndarray]  # U_p c_j at level N p
    chi: List[int]
    hecke: Dict[int, PadicElem] = field(default_factory=dict)

    @property
    def beta(self) -> PadicElem:
        return self.r - self.alpha

    def combine(self, values: Sequence, stab_values: Sequence) -> PadicElem:
        """sum_j r^j (stab_j - beta value_j) for per-component rational data."""
        out = self.K.elem([0])
        rp = self.K.elem([1])
        for v, u in zip(values, stab_values):
            out = out + rp * (self.K.from_rational(u) - self.beta * self.K.from_rational(v))
            rp = rp * self.r
        return out

    def stabilized_cochain(self) -> List[PadicElem]:
        """phi_alpha = U_p phi - beta phi, entrywise in K."""
        return [self.combine([c[k] for c in self.components], [u[k] for u in self.stab_components])
                for k in range(len(self.components[0]))]


def _sign_basis(H: H1, sign: int) -> List[List[Fraction]]:
    plus, minus = involution_split(H)
    return plus if sign == 1 else minus


def _to_cochain(H: H1, coords: Sequence[Fraction]) -> np.ndarray:
    return H.cochain(coords)


def locate_member(N: int, p: int, w: int, sign: int, a_p_residue: int, P: int = 40,
                  clean_ell: Optional[int] = 2, G_N: Optional[GroupPresentation] = None,
                  G_Np: Optional[GroupPresentation] = None) -> FamilyMember:
    """The weight-w member(s) of the family through the base system with a_p = a_p_residue mod p."""
    if a_p_residue % p == 0:
        raise OrdinarityError("the base eigenvalue is not a unit")
    G_N = G_N or build_presentation(N)
    G_Np = G_Np or build_presentation(N * p)
    n = w - 2
    H = compute_h1(G_N, PolyModule(n))
    B = _sign_basis(H, sign)
    Tp = linalg.restrict_operator(T_ell(H, p), B)
    chi_q = linalg.charpoly(Tp)
    if any(c.denominator != 1 for c in chi_q):
        raise FamilyMatchError("T_p has a non-integral characteristic polynomial")
    chi = [int(c) for c in chi_q]
    g, _h = hensel_split(chi, p, P, [a_p_residue % p])
    d = len(g) - 1
    if d == 0:
        roots = sorted({x for x in range(p) if sum(c * x ** i for i, c in enumerate(chi)) % p == 0})
        raise FamilyMatchError(f"no T_{p} root is congruent to {a_p_residue % p} mod {p}; residues of roots: {roots}")
    if d > 2:
        raise FamilyMatchError(f"the congruent part has rank {d}; only ranks 1 and 2 are supported")
    K = PadicExt(p, P, tuple(g))
    if d == 2 and _splits(g, p, P):
        raise FamilyMatchError("the congruent part splits over Q_p; pass the root explicitly")
    r = K.gen()
    # eigen-components: v(lambda) = sum_j lambda^j c_j with c_j = sum_{k > j} chi_k T^(k-1-j) w
    D = len(B)
    found = None
    for start in range(D):
        wv = [Fraction(int(i == start)) for i in range(D)]
        powers = [wv]
        for _ in range(D):
            powers.append(linalg.matvec(Tp, powers[-1]))
        comps = []
        for j in range(D):
            acc = [Fraction(0)] * D
            for k in range(j + 1, D + 1):
                if chi[k]:
                    acc = [a + chi[k] * b for a, b in zip(acc, powers[k - 1 - j])]
            comps.append(acc)
        vr = _eval_components(K, r, comps)
        if any(x.val() is not None for x in vr):
            found = comps
            break
    if found is None:
        raise FamilyMatchError("could not produce a nonzero eigenvector")
    # coordinates in B -> H^1 coordinates -> cochains at level N
    hcoords = [[sum(c[i] * B[i][m] for i in range(D)) for m in range(H.dim)] for c in found]
    cochains = [_to_cochain(H, hc) for hc in hcoords]
    mod = PolyModule(n)
    restricted = [restrict_cocycle(c, G_N, G_Np, mod) for c in cochains]
    U = hecke_cochain_matrix(G_Np, mod, coset_decomposition((1, 0, 0, p), G_Np))
    stab = [U.dot(c) for c in restricted]
    alpha = hensel_root(K, lambda x: x * x - r * x + p ** (w - 1), lambda x: 2 * x - r, r, 2 * P)
    member = FamilyMember(N, p, w, sign, K, r, alpha, restricted, stab, chi)
    if clean_ell is not None:
        member.hecke[clean_ell] = _eigenvalue(H, B, found, K, r, clean_ell)
    return member


def _splits(g: Sequence[int], p: int, P: int) -> bool:
    g0, g1 = g[0], g[1]
    disc = (g1 * g1 - 4 * g0) % p ** P
    if disc == 0:
        return True
    v = valuation(disc, p)
    if v % 2:
        return False
    u = disc // p ** v
    return pow(u % p, (p - 1) // 2, p) == 1


def _eval_components(K: PadicExt, r: PadicElem, comps) -> List[PadicElem]:
    out = [K.elem([0]) for _ in comps[0]]
    rp = K.elem([1])
    for c in comps:
        out = [o + rp * K.from_rational(x) for o, x in zip(out, c)]
        rp = rp * r
    return out


def _eigenvalue(H: H1, B, comps, K: PadicExt, r: PadicElem, ell: int) -> PadicElem:
    T = linalg.restrict_operator(T_ell(H, ell), B)
    v = _eval_components(K, r, comps)
    Tv = _eval_components(K, r, [linalg.matvec(T, c) for c in comps])
    i = min((k for k in range(len(v)) if v[k].val() is not None), key=lambda k: v[k].val())
    return Tv[i] / v[i]


def member_lift(member: FamilyMember, xis: Sequence[int], psi: bqf.CharacterData,
                G_Np: GroupPresentation) -> Dict[int, PadicElem]:
    """a_xi of the classical lift of the p-stabilized member, in K."""
    N, p, w = member.N, member.p, member.w
    k = w // 2
    mod = PolyModule(w - 2)
    out = {}
    for xi in xis:
        vals = [lift_coefficient(c, G_Np, mod, N, p, 1, xi, psi, k) for c in member.components]
        svals = [lift_coefficient(c, G_Np, mod, N, p, 1, xi, psi, k) for c in member.stab_components]
        out[xi] = member.combine(vals, svals)
    return out


# ---- ratio constancy ----------------------------------------------------------

@dataclass
class InterpolationReport:
    status: str  # "pass", "fail" or "inconclusive"
    usable: List[int]
    reference: Optional[int]
    depths: Dict[int, Fraction]
    min_depth: Optional[Fraction]
    required: int
    omega: Optional[PadicElem] = None
    omega_valuation: Optional[float] = None

    def to_json(self) -> dict:
        def fmt(v):
            return None if v is None else str(v)
        return {
            "status": self.status,
            "usable_xi": [str(x) for x in self.usable],
            "reference_xi": None if self.reference is None else str(self.reference),
            "depths": {str(k): fmt(v) for k, v in sorted(self.depths.items())},
            "min_depth": fmt(self.min_depth),
            "required_depth": str(self.required),
            "omega": None if self.omega is None else self.omega.to_json(),
            "omega_valuation": None if self.omega_valuation is None else str(self.omega_valuation),
        }


def ratio_constancy(special: Dict[int, PadicElem], classical: Dict[int, PadicElem],
                    M: int, loss: int, min_usable: int = 3) -> InterpolationReport:
    """Check special[xi] = Omega * classical[xi] for one Omega, to depth M - loss.

    special values are known mod p^M; xi is usable when classical[xi] is
    nonzero.  The comparison avoids division: with a reference xi0 of minimal
    valuation, depth(xi) = v(s_xi c_xi0 - s_xi0 c_xi) - v(c_xi0).  Depths are
    capped at M, the most the data can show.
    """
    required = M - loss
    usable = [xi for xi in sorted(classical) if classical[xi].val() is not None]
    if len(usable) < min_usable:
        return InterpolationReport("inconclusive", usable, None, {}, None, required)
    ref = min(usable, key=lambda xi: (classical[xi].val(), xi))
    vref = classical[ref].val()
    depths: Dict[int, Optional[float]] = {}
    for xi in usable:
        if xi == ref:
            continue
        diff = special[xi] * classical[ref] - special[ref] * classical[xi]
        v = diff.val()
        depths[xi] = M if v is None else min(M, v - vref)
    md = min(depths.values()) if depths else M
    ok = md >= required
    omega = (special[ref] / classical[ref]).truncate(M - vref)
    ov = omega.val()
    return InterpolationReport("pass" if ok else "fail", usable, ref, depths, md, required, omega, ov)
