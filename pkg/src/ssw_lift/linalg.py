"""Exact linear algebra over Q, Z and Z/p^M.

Matrices are lists of rows. Rational work uses ``fractions.Fraction``;
integer work uses plain ``int``.
"""
from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence

Matrix = List[List]


def to_fraction_matrix(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def rref(rows: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form over Q; returns (matrix, pivot columns)."""
    A = to_fraction_matrix(rows)
    if not A:
        return A, []
    nrows, ncols = len(A), len(A[0])
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(nrows):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                Ai, Ar = A[i], A[r]
                A[i] = [a - f * b for a, b in zip(Ai, Ar)]
        pivots.append(c)
        r += 1
    return A[:r], pivots


def rank(rows: Sequence[Sequence]) -> int:
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> Matrix:
    """Basis of {v : A v = 0} over Q, as a list of vectors."""
    if not rows:
        if ncols is None:
            raise ValueError("ncols required for an empty matrix")
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    ncols = len(rows[0])
    R, pivots = rref(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, pc in zip(R, pivots):
            v[pc] = -row[f]
        basis.append(v)
    return basis


def row_space(rows: Sequence[Sequence]) -> Matrix:
    return rref(rows)[0] if rows else []


def transpose(A: Sequence[Sequence]) -> Matrix:
    return [list(col) for col in zip(*A)]


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> Matrix:
    Bt = transpose(B)
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def matvec(A: Sequence[Sequence], v: Sequence) -> list:
    return [sum(a * b for a, b in zip(row, v)) for row in A]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def solve_in_span(basis: Sequence[Sequence], v: Sequence) -> list[Fraction]:
    """Coordinates of v in the span of ``basis`` (rows); raises if absent."""
    A = transpose(basis)
    aug = [list(row) + [x] for row, x in zip(A, v)]
    R, pivots = rref(aug)
    n = len(basis)
    if n in pivots:
        raise ValueError("vector not in span")
    coords = [Fraction(0)] * n
    for row, pc in zip(R, pivots):
        coords[pc] = row[n]
    return coords


def primitive_integral(v: Sequence[Fraction]) -> list[int]:
    """Scale v to a primitive integer vector with first nonzero entry positive."""
    from math import gcd, lcm

    den = 1
    for x in v:
        den = lcm(den, Fraction(x).denominator)
    w = [int(Fraction(x) * den) for x in v]
    g = 0
    for x in w:
        g = gcd(g, x)
    if g == 0:
        raise ValueError("zero vector")
    w = [x // g for x in w]
    first = next(x for x in w if x != 0)
    return [-x for x in w] if first < 0 else w


def smith_diagonal(rows: Sequence[Sequence[int]]) -> list[int]:
    """Nonzero invariant factors of an integer matrix (Smith normal form)."""
    A = [list(map(int, r)) for r in rows]
    if not A or not A[0]:
        return []
    m, n = len(A), len(A[0])
    diag = []
    t = 0
    while t < min(m, n):
        # pick the smallest nonzero entry in the remaining block
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if A[i][j] != 0 and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i, j = best
        A[t], A[i] = A[i], A[t]
        for row in A:
            row[t], row[j] = row[j], row[t]
        while True:
            done = True
            piv = A[t][t]
            for i in range(t + 1, m):
                q = A[i][t] // piv
                if q:
                    A[i] = [a - q * b for a, b in zip(A[i], A[t])]
                if A[i][t] != 0:
                    done = False
            for j in range(t + 1, n):
                q = A[t][j] // piv
                if q:
                    for row in A:
                        row[j] -= q * row[t]
                if A[t][j] != 0:
                    done = False
            if done:
                # enforce divisibility of the rest of the block
                bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                            if A[i][j] % piv != 0), None)
                if bad is None:
                    break
                A[t] = [a + b for a, b in zip(A[t], A[bad[0]])]
                continue
            # move the smallest remaining entry of row/column t onto the pivot
            cands = [(abs(A[i][t]), i, t) for i in range(t, m) if A[i][t] != 0]
            cands += [(abs(A[t][j]), t, j) for j in range(t, n) if A[t][j] != 0]
            _, i, j = min(cands)
            if i != t:
                A[t], A[i] = A[i], A[t]
            if j != t:
                for row in A:
                    row[t], row[j] = row[j], row[t]
        diag.append(abs(A[t][t]))
        t += 1
    return diag


def abelian_invariants(relation_matrix: Sequence[Sequence[int]], ngens: int) -> tuple[int, list[int]]:
    """(free rank, torsion invariants) of Z^ngens / rowspan(relation_matrix)."""
    diag = smith_diagonal(relation_matrix) if relation_matrix else []
    free = ngens - len(diag)
    return free, [d for d in diag if d > 1]


# ---- Z/p^M ---------------------------------------------------------------

def inverse_mod(a: int, mod: int) -> int:
    return pow(a, -1, mod)


def nullspace_mod_prime(rows: Sequence[Sequence[int]], p: int, ncols: int) -> list[list[int]]:
    """Kernel basis over F_p."""
    A = [[x % p for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(A)) if A[i][c]), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = pow(A[r][c], -1, p)
        A[r] = [x * inv % p for x in A[r]]
        for i in range(len(A)):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [(a - f * b) % p for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
    basis = []
    for f in (c for c in range(ncols) if c not in pivots):
        v = [0] * ncols
        v[f] = 1
        for row, pc in zip(A, pivots):
            v[pc] = -row[f] % p
        basis.append(v)
    return basis


def charpoly(A: Sequence[Sequence]) -> list[Fraction]:
    """Coefficients c_0..c_n of det(x I - A), by Faddeev-LeVerrier."""
    n = len(A)
    A = to_fraction_matrix(A)
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    Mk = [[Fraction(0)] * n for _ in range(n)]
    for k in range(1, n + 1):
        AM = matmul(A, Mk) if k > 1 else [[Fraction(0)] * n for _ in range(n)]
        Mk = [[AM[i][j] + (coeffs[n - k + 1] if i == j else 0) for j in range(n)] for i in range(n)]
        AMk = matmul(A, Mk)
        coeffs[n - k] = -sum(AMk[i][i] for i in range(n)) / k
    return coeffs


def restrict_operator(T: Sequence[Sequence], basis: Sequence[Sequence]) -> Matrix:
    """Matrix of T (acting on column vectors) on the invariant span of ``basis``."""
    cols = [solve_in_span(basis, matvec(T, b)) for b in basis]
    return transpose(cols)
