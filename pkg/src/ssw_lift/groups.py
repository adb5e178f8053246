"""Presentations of Gamma_0(N)/{+-1} and word problems in them.

Matrices are 4-tuples ``(a, b, c, d)`` of Python ints standing for
[[a, b], [c, d]].  A word is a tuple of nonzero ints: ``k`` means generator
``k - 1`` and ``-k`` its inverse.

Presentations come from Reidemeister-Schreier applied to
PSL_2(Z) = <S> * <R> with S = [[0,-1],[1,0]] (order 2) and R = ST (order 3),
followed by elimination of the tree generators and of one generator per
non-degenerate relator.  The result is a free product of cyclic groups of
order 2, 3 and infinity, as for a Farey symbol.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

Mat = Tuple[int, int, int, int]
Word = Tuple[int, ...]

IDENTITY: Mat = (1, 0, 0, 1)
MINUS_ONE: Mat = (-1, 0, 0, -1)
S_MAT: Mat = (0, -1, 1, 0)
T_MAT: Mat = (1, 1, 0, 1)
R_MAT: Mat = (0, -1, 1, 1)  # S * T


class MembershipError(ValueError):
    pass


class DecompositionError(RuntimeError):
    pass


def mul(x: Mat, y: Mat) -> Mat:
    a, b, c, d = x
    e, f, g, h = y
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def det(x: Mat) -> int:
    return x[0] * x[3] - x[1] * x[2]


def adjugate(x: Mat) -> Mat:
    """det(x) * x^{-1}; this is the star involution s -> s*."""
    a, b, c, d = x
    return (d, -b, -c, a)


def inv(x: Mat) -> Mat:
    if det(x) != 1:
        raise ValueError("inverse of a non-unimodular matrix")
    return adjugate(x)


def neg(x: Mat) -> Mat:
    return tuple(-v for v in x)  # type: ignore[return-value]


def mat_pow(x: Mat, k: int) -> Mat:
    if k < 0:
        x, k = inv(x), -k
    out = IDENTITY
    while k:
        if k & 1:
            out = mul(out, x)
        x = mul(x, x)
        k >>= 1
    return out


def projectively_equal(x: Mat, y: Mat) -> bool:
    return x == y or x == neg(y)


# ---- P^1(Z/N) ---------------------------------------------------------------

class P1:
    """Points of P^1(Z/N), used as right cosets Gamma_0(N) g <-> bottom row of g."""

    def __init__(self, N: int):
        self.N = N
        units = [u for u in range(N) if gcd(u, N) == 1] if N > 1 else [0]
        canon: Dict[Tuple[int, int], Tuple[int, int]] = {}
        for c in range(N):
            for d in range(N):
                if gcd(gcd(c, d), N) != 1:
                    continue
                if (c, d) in canon:
                    continue
                orbit = [((u * c) % N, (u * d) % N) for u in units] if N > 1 else [(0, 0)]
                rep = min(orbit)
                for pt in orbit:
                    canon[pt] = rep
        self._canon = canon
        self.points = sorted(set(canon.values()))
        self.index = {pt: i for i, pt in enumerate(self.points)}

    def __len__(self):
        return len(self.points)

    def normalize(self, c: int, d: int) -> int:
        if self.N == 1:
            return 0
        return self.index[self._canon[(c % self.N, d % self.N)]]

    def act(self, i: int, x: Mat) -> int:
        """Right action of x on the coset with bottom row points[i]."""
        c, d = self.points[i]
        return self.normalize(c * x[0] + d * x[2], c * x[1] + d * x[3])


def in_gamma0(x: Mat, N: int) -> bool:
    return det(x) == 1 and x[2] % N == 0


def check_member(x: Mat, N: int) -> None:
    if det(x) != 1:
        raise MembershipError(f"{x} has determinant {det(x)}, not 1")
    if x[2] % N != 0:
        raise MembershipError(f"lower-left entry {x[2]} of {x} is not 0 mod {N}")


# ---- presentation ---------------------------------------------------------

@dataclass
class GroupPresentation:
    level: int
    generators: List[Mat]
    relations: List[Word]
    omega_inf: Mat = (1, 0, 0, -1)
    contains_minus_one: bool = True
    external: bool = False
    automorph_words: Dict[str, Word] = field(default_factory=dict)
    # Schreier rewriting data; absent for external bundles
    _cosets: Optional[P1] = field(default=None, repr=False)
    _rep: Optional[List[Mat]] = field(default=None, repr=False)
    _schreier: Optional[Dict[Tuple[int, int], Word]] = field(default=None, repr=False)

    @property
    def ngens(self) -> int:
        return len(self.generators)

    def evaluate(self, word: Iterable[int]) -> Mat:
        out = IDENTITY
        for letter in word:
            g = self.generators[abs(letter) - 1]
            out = mul(out, g if letter > 0 else inv(g))
        return out

    def is_member(self, x: Mat) -> bool:
        return in_gamma0(x, self.level)

    def elliptic_orders(self) -> Dict[int, int]:
        """generator index -> order in the projective group, for torsion generators."""
        out = {}
        for rel in self.relations:
            if len(set(rel)) == 1 and rel[0] > 0:
                out[rel[0] - 1] = len(rel)
        return out

    def abelianization(self) -> Tuple[int, List[int]]:
        from .linalg import abelian_invariants

        rows = []
        for rel in self.relations:
            row = [0] * self.ngens
            for letter in rel:
                row[abs(letter) - 1] += 1 if letter > 0 else -1
            rows.append(row)
        return abelian_invariants(rows, self.ngens)

    # -- serialization
    def to_json(self) -> dict:
        return {
            "level": self.level,
            "generators": [list(g) for g in self.generators],
            "relations": [list(r) for r in self.relations],
            "omega_inf": list(self.omega_inf),
            "external": self.external,
            "automorph_words": {k: list(v) for k, v in self.automorph_words.items()},
        }

    @classmethod
    def from_json(cls, data: dict) -> "GroupPresentation":
        G = cls(
            level=int(data["level"]),
            generators=[tuple(int(v) for v in g) for g in data["generators"]],
            relations=[tuple(int(v) for v in r) for r in data["relations"]],
            omega_inf=tuple(int(v) for v in data["omega_inf"]),
            external=bool(data.get("external", True)),
            automorph_words={k: tuple(v) for k, v in data.get("automorph_words", {}).items()},
        )
        for rel in G.relations:
            if not projectively_equal(G.evaluate(rel), IDENTITY):
                raise ValueError(f"relation {rel} does not evaluate to +-1")
        return G


def free_reduce(word: Iterable[int]) -> Word:
    out: List[int] = []
    for letter in word:
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def invert_word(word: Sequence[int]) -> Word:
    return tuple(-x for x in reversed(word))


def build_presentation(N: int) -> GroupPresentation:
    """Presentation of Gamma_0(N)/{+-1} by Reidemeister-Schreier."""
    if N < 1:
        raise ValueError("level must be positive")
    P = P1(N)
    n = len(P)
    letters = (S_MAT, R_MAT)
    start = P.normalize(0, 1)
    rep: List[Optional[Mat]] = [None] * n
    rep[start] = IDENTITY
    tree = set()
    queue = deque([start])
    while queue:
        r = queue.popleft()
        for xi, x in enumerate(letters):
            t = P.act(r, x)
            if rep[t] is None:
                rep[t] = mul(rep[r], x)
                tree.add((r, xi))
                queue.append(t)

    def schreier(r: int, xi: int) -> Mat:
        t = P.act(r, letters[xi])
        return mul(mul(rep[r], letters[xi]), inv(rep[t]))

    # expression of each Schreier generator as a word in the kept generators;
    # keys (coset, letter), values words over provisional labels
    kept: List[Tuple[int, int]] = []
    label: Dict[Tuple[int, int], int] = {}
    expr: Dict[Tuple[int, int], Word] = {}
    relations: List[Word] = []

    def keep(key):
        label[key] = len(kept) + 1
        kept.append(key)
        expr[key] = (label[key],)

    # S-relators
    seen = set()
    for r in range(n):
        if r in seen:
            continue
        r2 = P.act(r, S_MAT)
        seen.update((r, r2))
        if r2 == r:
            if (r, 0) in tree:
                expr[(r, 0)] = ()
            else:
                keep((r, 0))
                relations.append((label[(r, 0)],) * 2)
            continue
        a, b = (r, 0), (r2, 0)
        if a in tree or b in tree:
            expr[a] = ()
            expr[b] = ()
        else:
            keep(a)
            expr[b] = (-label[a],)
    # R-relators
    seen = set()
    for r in range(n):
        if r in seen:
            continue
        cyc = [r, P.act(r, R_MAT)]
        cyc.append(P.act(cyc[1], R_MAT))
        seen.update(cyc)
        if cyc[1] == r:
            if (r, 1) in tree:
                expr[(r, 1)] = ()
            else:
                keep((r, 1))
                relations.append((label[(r, 1)],) * 3)
            continue
        keys = [(c, 1) for c in cyc]
        nontriv = [k for k in keys if k not in tree]
        for k in keys:
            if k in tree:
                expr[k] = ()
        # product of the nontrivial ones in cyclic order is +-1
        for k in nontriv[:-1]:
            keep(k)
        last = nontriv[-1]
        prefix: List[int] = []
        for k in nontriv[:-1]:
            prefix.extend(expr[k])
        expr[last] = invert_word(prefix)

    gens = [schreier(r, xi) for (r, xi) in kept]
    G = GroupPresentation(level=N, generators=gens, relations=relations)
    G._cosets = P
    G._rep = rep  # type: ignore[assignment]
    G._schreier = expr
    return G


def st_word(x: Mat) -> List[Tuple[str, int]]:
    """Write x in SL_2(Z) as +-T^{q1} S T^{q2} S ... T^{qk} (sign dropped)."""
    if det(x) != 1:
        raise MembershipError(f"{x} has determinant {det(x)}, not 1")
    a, b, c, d = x
    out: List[Tuple[str, int]] = []
    while c != 0:
        q = a // c
        if q:
            out.append(("T", q))
        a, b = a - q * c, b - q * d
        # x = S * [[c, d], [-a, -b]]
        out.append(("S", 1))
        a, b, c, d = c, d, -a, -b
    # now x = [[a, b], [0, d]] with a = d = +-1
    q = b * a
    if q:
        out.append(("T", q))
    return out


def _sr_letters(x: Mat) -> List[int]:
    """Projective word in S (0) and R (1) with nonnegative exponents."""
    letters: List[int] = []
    for kind, e in st_word(x):
        if kind == "S":
            letters.append(0)
        elif e > 0:
            letters.extend([0, 1] * e)  # T = S R
        else:
            letters.extend([1, 1, 0] * (-e))  # T^-1 = R^2 S
    return letters


def decompose_word(x: Mat, G: GroupPresentation) -> Tuple[Word, int]:
    """Word w with G.evaluate(w) == sign * x; returns (w, sign)."""
    check_member(x, G.level)
    if G._cosets is None:
        raise DecompositionError("external presentation has no word-problem solver")
    P = G._cosets
    letters = (S_MAT, R_MAT)
    r = P.normalize(0, 1)
    out: List[int] = []
    for xi in _sr_letters(x):
        out.extend(G._schreier[(r, xi)])
        r = P.act(r, letters[xi])
    w = free_reduce(out)
    # reduce powers of torsion generators
    w = _reduce_torsion(w, G.elliptic_orders())
    val = G.evaluate(w)
    if val == x:
        return w, 1
    if val == neg(x):
        return w, -1
    raise DecompositionError(f"word evaluation mismatch for {x}")


def _reduce_torsion(w: Word, orders: Dict[int, int]) -> Word:
    if not orders:
        return w
    changed = True
    w = list(w)
    while changed:
        changed = False
        out: List[int] = []
        i = 0
        while i < len(w):
            letter = w[i]
            j = i
            while j < len(w) and w[j] == letter:
                j += 1
            g = abs(letter) - 1
            run = (j - i) * (1 if letter > 0 else -1)
            if g in orders:
                o = orders[g]
                red = run % o
                if red > o // 2:
                    red -= o
                if red != run:
                    changed = True
                out.extend([abs(letter) if red > 0 else -abs(letter)] * abs(red))
            else:
                out.extend(w[i:j])
            i = j
        w = list(free_reduce(out))
    return tuple(w)


# ---- Hecke cosets ---------------------------------------------------------

@dataclass
class CosetData:
    s: Mat
    reps: List[Mat]
    # perm[g][i] = j and t[g][i] = t_i(g) for each generator index g
    perm: List[List[int]]
    t: List[List[Mat]]

    @property
    def stars(self) -> List[Mat]:
        return [adjugate(si) for si in self.reps]


def hecke_reps(s: Mat, N: int) -> List[Mat]:
    """Left coset representatives of Gamma_0(N) s Gamma_0(N) for s diagonal-type."""
    D = det(s)
    if abs(D) == 1:
        return [s]
    if D < 0:
        raise DecompositionError("negative determinant other than -1 unsupported")
    reps = []
    for a in range(1, D + 1):
        if D % a:
            continue
        d = D // a
        for b in range(d):
            if gcd(gcd(a, b), d) != 1 or gcd(a, N) != 1:
                continue
            reps.append((a, b, 0, d))
    # sanity bound: psi(D) for squarefree-ish D
    if not reps:
        raise DecompositionError(f"no coset representatives for {s}")
    return reps


def _member_after(si: Mat, g: Mat, sj: Mat, N: int) -> Optional[Mat]:
    x = mul(mul(si, g), adjugate(sj))
    D = det(sj)
    if any(v % D for v in x):
        return None
    # adjugate(sj)/det(sj) is sj^{-1}
    y = tuple(v // D for v in x)
    if det(y) == 1 and y[2] % N == 0:
        return y  # type: ignore[return-value]
    return None


def t_elements(reps: Sequence[Mat], g: Mat, N: int) -> Tuple[List[int], List[Mat]]:
    perm, ts = [], []
    for si in reps:
        found = None
        for j, sj in enumerate(reps):
            y = _member_after(si, g, sj, N)
            if y is not None:
                found = (j, y)
                break
        if found is None:
            raise DecompositionError(f"no matching coset for {si} * {g}")
        perm.append(found[0])
        ts.append(found[1])
    if sorted(perm) != list(range(len(reps))):
        raise DecompositionError("coset action is not a permutation")
    return perm, ts


def coset_decomposition(s: Mat, G: GroupPresentation) -> CosetData:
    reps = hecke_reps(s, G.level)
    perm, t = [], []
    for g in G.generators:
        pg, tg = t_elements(reps, g, G.level)
        perm.append(pg)
        t.append(tg)
    return CosetData(s=s, reps=reps, perm=perm, t=t)


def save_bundle(G: GroupPresentation, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(G.to_json(), fh, indent=1, sort_keys=True)


def load_bundle(path: str) -> GroupPresentation:
    with open(path) as fh:
        return GroupPresentation.from_json(json.load(fh))
