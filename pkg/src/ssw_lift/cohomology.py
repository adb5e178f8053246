"""H^1 of presented groups with coefficients, Hecke operators on cochains.

A cochain is stored by its values on the generators, flattened into one vector
of length ngens * dim.  Coefficient modules expose ``dim``, ``act_matrix(g)``
(a numpy array, left action) and ``reduce(arr)``; everything else here is
module-agnostic, so the same code serves V_n(Q) and measure modules mod p^M.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import linalg
from .groups import (
    CosetData,
    GroupPresentation,
    Mat,
    Word,
    adjugate,
    coset_decomposition,
    decompose_word,
    inv,
    mul,
)
from .polyweight import substitution_matrix


class NotFoundError(ValueError):
    pass


class AmbiguityError(ValueError):
    def __init__(self, dim: int):
        super().__init__(f"eigenspace has dimension {dim}, expected 1")
        self.dim = dim


class ConsistencyError(RuntimeError):
    pass


class PolyModule:
    """V_n over Q (modulus None) or over Z/modulus."""

    def __init__(self, n: int, modulus: Optional[int] = None):
        if n % 2:
            raise ValueError("only even degrees are supported")
        self.n = n
        self.dim = n + 1
        self.modulus = modulus
        self.tag = f"V{n}" + ("" if modulus is None else f"mod{modulus}")

    def act_matrix(self, g: Mat) -> np.ndarray:
        M = np.array(substitution_matrix(tuple(g), self.n), dtype=object)
        return self.reduce(M)

    def reduce(self, arr: np.ndarray) -> np.ndarray:
        if self.modulus is None:
            return arr
        return arr % self.modulus

    def zero_matrix(self, rows: int, cols: int) -> np.ndarray:
        return np.zeros((rows, cols), dtype=object)


# ---- Fox calculus ---------------------------------------------------------

def fox_terms(G: GroupPresentation, word: Sequence[int]) -> List[Tuple[int, int, Mat]]:
    """c(w) = sum sign * h . c(g_idx) over the returned (sign, idx, h)."""
    out = []
    prefix = (1, 0, 0, 1)
    for letter in word:
        idx = abs(letter) - 1
        g = G.generators[idx]
        if letter > 0:
            out.append((1, idx, prefix))
            prefix = mul(prefix, g)
        else:
            gi = inv(g)
            prefix = mul(prefix, gi)
            out.append((-1, idx, prefix))
    return out


def word_operator(G, module, word, left: Mat = (1, 0, 0, 1)) -> np.ndarray:
    """Matrix of c -> left . c(word) on flattened cochains (dim x ngens*dim)."""
    d = module.dim
    out = module.zero_matrix(d, G.ngens * d)
    for sign, idx, h in fox_terms(G, word):
        A = module.act_matrix(mul(left, h))
        out[:, idx * d:(idx + 1) * d] += sign * A
    return module.reduce(out)


def evaluate_cocycle(G, module, cochain: np.ndarray, g: Mat) -> np.ndarray:
    """Value of the cocycle at an arbitrary group element, via word decomposition."""
    word, _sign = decompose_word(g, G)
    return module.reduce(word_operator(G, module, word).dot(cochain))


def relation_matrix(G, module) -> np.ndarray:
    rows = [word_operator(G, module, rel) for rel in G.relations]
    if not rows:
        return module.zero_matrix(0, G.ngens * module.dim)
    return np.vstack(rows)


def coboundary_matrix(G, module) -> np.ndarray:
    """Matrix of m -> (g -> (g - 1) m)."""
    d = module.dim
    blocks = []
    eye = np.identity(d, dtype=object)
    for g in G.generators:
        blocks.append(module.act_matrix(g) - eye)
    return module.reduce(np.vstack(blocks))


def coboundary(G, module, m) -> np.ndarray:
    return module.reduce(coboundary_matrix(G, module).dot(np.array(m, dtype=object)))


# ---- H^1 over Q -----------------------------------------------------------

@dataclass
class H1:
    G: GroupPresentation
    module: PolyModule
    z_basis: List[List[Fraction]]
    b_basis: List[List[Fraction]]
    reps: List[List[Fraction]]  # cocycles projecting to a basis of H^1
    _hecke: Dict = field(default_factory=dict, repr=False)

    @property
    def dim(self) -> int:
        return len(self.reps)

    def coords(self, cochain: Sequence) -> List[Fraction]:
        """Coordinates of the class of ``cochain`` in the basis ``reps``."""
        full = linalg.solve_in_span(self.b_basis + self.reps, list(cochain))
        return full[len(self.b_basis):]

    def cochain(self, coords: Sequence) -> np.ndarray:
        out = [Fraction(0)] * (self.G.ngens * self.module.dim)
        for c, r in zip(coords, self.reps):
            if c:
                out = [x + c * y for x, y in zip(out, r)]
        return np.array(out, dtype=object)

    def is_coboundary(self, cochain) -> bool:
        return all(c == 0 for c in self.coords(cochain))

    def operator(self, cochain_op: np.ndarray) -> List[List[Fraction]]:
        """Matrix on H^1 coordinates induced by a cochain operator (columns = images)."""
        cols = [self.coords(list(cochain_op.dot(np.array(r, dtype=object)))) for r in self.reps]
        return linalg.transpose(cols) if cols else []


def compute_h1(G: GroupPresentation, module: PolyModule) -> H1:
    if module.modulus is not None:
        raise ValueError("compute_h1 works over Q; use free presentations for Z/p^M")
    n = G.ngens * module.dim
    R = relation_matrix(G, module)
    Z = linalg.nullspace(R.tolist(), n) if R.shape[0] else linalg.identity(n)
    Bmat = coboundary_matrix(G, module)
    B = linalg.row_space(linalg.transpose(Bmat.tolist()))
    # extend a basis of B^1 to one of Z^1
    reps: List[List[Fraction]] = []
    current = [list(b) for b in B]
    r0 = linalg.rank(current) if current else 0
    for z in Z:
        trial = current + [z]
        r1 = linalg.rank(trial)
        if r1 > r0:
            current, r0 = trial, r1
            reps.append(list(z))
    return H1(G, module, [list(z) for z in Z], [list(b) for b in B], reps)


# ---- Hecke operators --------------------------------------------------------

def hecke_cochain_matrix(G: GroupPresentation, module, cd: CosetData) -> np.ndarray:
    """Cochain-level matrix of c -> (g -> sum_i s_i^* c(t_i(g)))."""
    d = module.dim
    out = module.zero_matrix(G.ngens * d, G.ngens * d)
    for j in range(G.ngens):
        block = module.zero_matrix(d, G.ngens * d)
        for i, si in enumerate(cd.reps):
            t = cd.t[j][i]
            word, _sign = decompose_word(t, G)
            block = block + word_operator(G, module, word, left=adjugate(si))
        out[j * d:(j + 1) * d, :] = module.reduce(block)
    return out


def hecke_on_cocycle(cd: CosetData, c, G: GroupPresentation, module) -> np.ndarray:
    T = hecke_cochain_matrix(G, module, cd)
    return module.reduce(T.dot(np.array(c, dtype=T.dtype)))


def hecke_matrix(H: H1, s: Mat) -> List[List[Fraction]]:
    key = tuple(s)
    if key not in H._hecke:
        cd = coset_decomposition(s, H.G)
        H._hecke[key] = H.operator(hecke_cochain_matrix(H.G, H.module, cd))
    return H._hecke[key]


def T_ell(H: H1, ell: int):
    return hecke_matrix(H, (1, 0, 0, ell))


def involution(H: H1):
    return hecke_matrix(H, H.G.omega_inf)


def involution_split(H: H1) -> Tuple[List[List[Fraction]], List[List[Fraction]]]:
    """Bases (as H^1 coordinate vectors) of the +1 and -1 eigenspaces of iota."""
    iota = involution(H)
    n = H.dim
    if n == 0:
        return [], []
    if linalg.matmul(iota, iota) != linalg.identity(n):
        raise ConsistencyError("iota does not square to the identity")
    I = linalg.identity(n)
    plus = linalg.nullspace([[a - b for a, b in zip(r, e)] for r, e in zip(iota, I)], n)
    minus = linalg.nullspace([[a + b for a, b in zip(r, e)] for r, e in zip(iota, I)], n)
    if len(plus) + len(minus) != n:
        raise ConsistencyError("iota is not diagonalizable")
    return plus, minus


def eigen_locate(H: H1, eigenvalues: Sequence[Tuple[int, int]], sign: int = 1) -> np.ndarray:
    """Primitive integral cocycle spanning the simultaneous eigenspace in the sign part."""
    n = H.dim
    I = linalg.identity(n)
    rows = []
    iota = involution(H)
    rows += [[a - sign * b for a, b in zip(r, e)] for r, e in zip(iota, I)]
    for ell, a in eigenvalues:
        T = T_ell(H, ell)
        rows += [[x - a * y for x, y in zip(r, e)] for r, e in zip(T, I)]
    ker = linalg.nullspace(rows, n)
    if not ker:
        raise NotFoundError(f"no class with eigenvalues {list(eigenvalues)} and sign {sign:+d}")
    if len(ker) > 1:
        raise AmbiguityError(len(ker))
    c = H.cochain(ker[0])
    return np.array(linalg.primitive_integral(list(c)), dtype=object)


def restrict_cocycle(c, G_big: GroupPresentation, G_small: GroupPresentation, module) -> np.ndarray:
    """Restriction of a cocycle on G_big to the finite-index subgroup G_small."""
    vals = [evaluate_cocycle(G_big, module, np.array(c, dtype=object), g) for g in G_small.generators]
    return np.concatenate(vals)


# ---- Hecke matrix cache -----------------------------------------------------

def save_hecke_cache(path: str, N: int, tag: str, ell: int, M: List[List]) -> None:
    data = {}
    if os.path.exists(path):
        with open(path) as fh:
            data = json.load(fh)
    flat = [str(Fraction(x)) for row in M for x in row]
    data[f"{N}|{tag}|{ell}"] = {"rows": len(M), "cols": len(M[0]) if M else 0, "entries": flat}
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)


def load_hecke_cache(path: str, N: int, tag: str, ell: int) -> Optional[List[List[Fraction]]]:
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        data = json.load(fh)
    rec = data.get(f"{N}|{tag}|{ell}")
    if rec is None:
        return None
    vals = [Fraction(x) for x in rec["entries"]]
    c = rec["cols"]
    return [vals[i * c:(i + 1) * c] for i in range(rec["rows"])]


def cuspidal_basis(H: H1, sign: int, ell: int = 2) -> List[List[Fraction]]:
    """Basis of the cuspidal part of the sign eigenspace, in H^1 coordinates.

    Eisenstein classes have T_ell eigenvalue 1 + ell^(n+1), which no cusp form
    reaches (Ramanujan bound), so the cuspidal part is the image of
    (T_ell - 1 - ell^(n+1))^D on the D-dimensional sign part.
    """
    if H.G.level % ell == 0:
        raise ValueError(f"ell = {ell} divides the level")
    B = involution_split(H)[0 if sign == 1 else 1]
    D = len(B)
    if D == 0:
        return []
    T = linalg.restrict_operator(T_ell(H, ell), B)
    e = 1 + ell ** (H.module.n + 1)
    A = [[x - (e if i == j else 0) for j, x in enumerate(row)] for i, row in enumerate(T)]
    Ak = linalg.identity(D)
    for _ in range(D):
        Ak = linalg.matmul(A, Ak)
    image = linalg.row_space(linalg.transpose(Ak))
    return [[sum(c * b[m] for c, b in zip(v, B)) for m in range(H.dim)] for v in image]
