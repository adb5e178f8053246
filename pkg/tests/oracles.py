"""Independent reference computations used by the tests.

Nothing here imports the package; each function recomputes a quantity from
first principles by a different route.
"""
from fractions import Fraction
from math import gcd, isqrt


def factor(n):
    out, q = {}, 2
    while q * q <= n:
        while n % q == 0:
            out[q] = out.get(q, 0) + 1
            n //= q
        q += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def kronecker(d, q):
    """Kronecker symbol (d/q) for a prime q."""
    if q == 2:
        if d % 2 == 0:
            return 0
        return 1 if d % 8 in (1, 7) else -1
    d %= q
    if d == 0:
        return 0
    return 1 if pow(d, (q - 1) // 2, q) == 1 else -1


def gamma0_invariants(N):
    """(index, nu2, nu3, cusps) of Gamma_0(N) from the factorization of N."""
    f = factor(N)
    mu = N
    for q in f:
        mu = mu * (q + 1) // q
    if N % 4 == 0:
        nu2 = 0
    else:
        nu2 = 1
        for q in f:
            nu2 *= 1 + kronecker(-4, q)
    if N % 9 == 0:
        nu3 = 0
    else:
        nu3 = 1
        for q in f:
            nu3 *= 1 + kronecker(-3, q)
    cusps = 0
    for d in range(1, N + 1):
        if N % d == 0:
            g = gcd(d, N // d)
            cusps += sum(1 for x in range(1, g + 1) if gcd(x, g) == 1)
    return mu, nu2, nu3, cusps


def genus(N):
    mu, nu2, nu3, c = gamma0_invariants(N)
    g = 1 + Fraction(mu, 12) - Fraction(nu2, 4) - Fraction(nu3, 3) - Fraction(c, 2)
    assert g.denominator == 1
    return int(g)


def dim_cusp_forms(N, k):
    """dim S_k(Gamma_0(N)) for even k >= 2 (Riemann-Roch with elliptic corrections)."""
    mu, nu2, nu3, c = gamma0_invariants(N)
    if k == 2:
        return genus(N)
    g = genus(N)
    return ((k - 1) * (g - 1) + (k // 2 - 1) * c + nu2 * (k // 4) + nu3 * (k // 3))


def count_points_11a(q):
    """#E(F_q) for y^2 + y = x^3 - x^2 - 10x - 20, by brute force."""
    n = 1
    for x in range(q):
        rhs = (x ** 3 - x * x - 10 * x - 20) % q
        n += sum(1 for y in range(q) if (y * y + y - rhs) % q == 0)
    return n


def a_11a(q):
    return q + 1 - count_points_11a(q)


def count_points_33a(q):
    """#E(F_q) for 33a1: y^2 + xy = x^3 + x^2 - 11x."""
    n = 1
    for x in range(q):
        for y in range(q):
            if (y * y + x * y - x ** 3 - x * x + 11 * x) % q == 0:
                n += 1
    return n


def _ext_gcd(a, b):
    if b == 0:
        return (1, 0) if a >= 0 else (-1, 0)
    x, y = _ext_gcd(b, a % b)
    return y, x - (a // b) * y


def act_form(Q, g):
    """Q | g (x, y) = Q(a x + b y, c x + d y)."""
    A, B, C = Q
    a, b, c, d = g
    return (A * a * a + B * a * c + C * c * c,
            2 * A * a * b + B * (a * d + b * c) + 2 * C * c * d,
            A * b * b + B * b * d + C * d * d)


def _normalize(Q):
    """T-translate of Q with -|A| < B <= |A|."""
    A, B, C = Q
    m = 2 * abs(A)
    B1 = (B + abs(A) - 1) % m - abs(A) + 1
    return (A, B1, (B1 * B1 - (B * B - 4 * A * C)) // (4 * A))


def sl2_orbits_box(D, X):
    """SL_2(Z)-orbits of forms of discriminant D met by normalized forms with |A| <= X.

    Nodes are the forms with 0 < |A| <= X and -|A| < B <= |A|; each node f is
    joined to the normalization of S T^k f for every k with |C(T^k f)| <= X,
    S = (0, -1; 1, 0).  Returns one node per connected component.
    """
    nodes = []
    for A in range(-X, X + 1):
        if A == 0:
            continue
        for B in range(-abs(A) + 1, abs(A) + 1):
            if (B * B - D) % (4 * A) == 0:
                nodes.append((A, B, (B * B - D) // (4 * A)))
    parent = {f: f for f in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for f in nodes:
        A, B, C = f
        for sgn in (1, -1):
            k = 0 if sgn == 1 else -1
            while True:
                Ck = A * k * k + B * k + C
                if abs(Ck) > X:
                    if (2 * A * k + B) * sgn * A > 0:  # |C_k| only grows from here
                        break
                else:
                    h = _normalize((Ck, -(2 * A * k + B), A))
                    if h in parent:
                        parent[find(h)] = find(f)
                k += sgn
    roots = {}
    for f in nodes:
        roots.setdefault(find(f), f)
    return sorted(roots.values())


def pell_unit(D):
    """Smallest t, u > 0 with t^2 - D u^2 = 4, via sympy's generalized Pell solver."""
    from sympy.solvers.diophantine.diophantine import diop_DN

    sols = [(abs(t), abs(u)) for t, u in diop_DN(D, 4) if u != 0]
    return min(sols, key=lambda s: s[1])


def gamma0_class_count(L, xi, X=None, keep=None):
    """Number of Gamma_0(L)-classes of level-L forms with B^2 - 4AC = 4 L^2 xi.

    Each SL_2(Z)-class [Q0] contributes the number of orbits of its unit
    epsilon on the right cosets g Gamma_0(L) with Q0 | g of level L; cosets
    are first columns mod L up to unit scaling.  ``keep`` filters classes by a
    class-invariant predicate on forms.
    """
    D = 4 * L * L * xi
    X = X or isqrt(D) + 1
    total = 0
    units = [u for u in range(1, L + 1) if gcd(u, L) == 1] if L > 1 else [1]
    cols = set()
    for a in range(L):
        for c in range(L):
            if gcd(gcd(a, c), L) == 1:
                cols.add(min(((u * a) % L, (u * c) % L) for u in units))
    for Q0 in sl2_orbits_box(D, X):
        g0 = gcd(gcd(*Q0[:2]), Q0[2])
        A, B, C = (x // g0 for x in Q0)
        t, u = pell_unit(D // (g0 * g0))
        eps = ((t - B * u) // 2, -C * u, A * u, (t + B * u) // 2)
        level = set()
        for a, c in cols:
            a1, c1 = a, c
            while gcd(a1, c1) != 1:
                a1 += L
            x, y = _ext_gcd(a1, c1)
            F = act_form(Q0, (a1, -y, c1, x))
            if F[0] % L == 0 and F[1] % (2 * L) == 0 and (keep is None or keep(F)):
                level.add((a, c))
        seen = set()
        for pt in level:
            if pt in seen:
                continue
            total += 1
            cur = pt
            while cur not in seen:
                seen.add(cur)
                a, c = cur
                a, c = (eps[0] * a + eps[1] * c) % L, (eps[2] * a + eps[3] * c) % L
                cur = min(((v * a) % L, (v * c) % L) for v in units)
    return total
