from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from ssw_lift.padic import (
    ArithPoint,
    IwasawaMeasure,
    PadicExt,
    ScopeError,
    UnitError,
    ZpApprox,
    grouplike_mult,
    hensel_root,
    hensel_split,
    poly_mul,
    specialize_iwasawa,
    teichmuller,
    valuation,
)

primes = st.sampled_from([3, 5, 7])


def teich_oracle(a, p, M):
    # search the lifts of a mod p for the (p-1)-st root of unity
    mod = p ** M
    return next(x for x in range(a % p, mod, p) if pow(x, p - 1, mod) == 1)


@given(primes, st.integers(1, 5), st.integers(1, 400))
def test_teichmuller(p, M, a):
    assume(a % p)
    assert teichmuller(a, p, M) == teich_oracle(a, p, M)


def test_teichmuller_rejects_multiples():
    with pytest.raises(UnitError):
        teichmuller(6, 3, 4)


@given(primes, st.integers(1, 6), st.integers(-10 ** 6, 10 ** 6), st.integers(-10 ** 6, 10 ** 6))
def test_zp_ring_ops(p, k, a, b):
    x, y = ZpApprox(a, k, p), ZpApprox(b, k, p)
    m = p ** k
    assert (x + y).value == (a + b) % m
    assert (x - y).value == (a - b) % m
    assert (x * y).value == (a * b) % (p ** (x * y).prec)
    assert (x * y).prec >= k
    if b % p:
        assert (x / y * y).equals(x)
        assert (y * y.inverse()).value == 1 % m


def test_zp_precision_and_errors():
    x = ZpApprox(9, 4, 3)
    assert x.val() == 2 and not x.is_unit()
    assert (x * ZpApprox(3, 4, 3)).prec == 5
    assert (x / 3).value == 3 and (x / 3).prec == 3
    with pytest.raises(UnitError):
        x.inverse()
    with pytest.raises(UnitError):
        ZpApprox(3, 4, 3) / 9
    with pytest.raises(ZeroDivisionError):
        x / ZpApprox(0, 4, 3)
    assert ZpApprox(0, 4, 3).val() is None
    assert x.equals(0, 2) and not x.equals(0, 3)
    with pytest.raises(ValueError):
        x + ZpApprox(1, 4, 5)
    assert valuation(-162, 3) == 4


def riemann_oracle(points, p, M, i, e):
    # int omega^i(t) t^e d(sum m delta_t) mod p^M, computed pointwise
    mod = p ** M
    return sum(m * pow(teich_oracle(t, p, M), i, mod) * pow(t, e, mod) for t, m in points) % mod


points_st = st.lists(st.tuples(st.integers(1, 10 ** 5), st.integers(-50, 50)), min_size=1, max_size=6)


def _measure(points, p, M):
    nu = IwasawaMeasure.zero(p, M)
    for t, m in points:
        nu = nu + IwasawaMeasure.point_mass(t, p, M, m)
    return nu


@given(primes, st.integers(1, 5), points_st, st.integers(0, 5), st.integers(0, 12))
def test_specialization_matches_riemann_sum(p, M, points, i, e):
    points = [(t, m) for t, m in points if t % p]
    assume(points)
    nu = _measure(points, p, M)
    assert specialize_iwasawa(nu, i, e).value == riemann_oracle(points, p, M, i, e)


@given(primes, st.integers(1, 5), points_st, st.integers(1, 10 ** 4), st.integers(0, 5), st.integers(0, 8))
def test_grouplike_pushforward(p, M, points, lam, i, e):
    points = [(t, m) for t, m in points if t % p]
    assume(points and lam % p)
    nu = _measure(points, p, M)
    moved = grouplike_mult(lam, nu)
    assert moved == _measure([(lam * t, m) for t, m in points], p, M)
    mod = p ** M
    factor = pow(teich_oracle(lam, p, M), i, mod) * pow(lam, e, mod)
    assert specialize_iwasawa(moved, i, e).value == factor * specialize_iwasawa(nu, i, e).value % mod


def test_measure_basics():
    nu = IwasawaMeasure.point_mass(4, 3, 4, 5)
    assert nu.total_mass() == 5
    assert (nu - nu).is_zero()
    assert IwasawaMeasure.from_json(nu.to_json()) == nu
    # moment j is only known mod p^(M - j)
    assert nu.scale(3).equals(IwasawaMeasure.zero(3, 4), 3)
    assert not nu.scale(3).equals(IwasawaMeasure.zero(3, 4), 2)
    with pytest.raises(ValueError):
        specialize_iwasawa(nu, 0, -1)
    with pytest.raises(UnitError):
        grouplike_mult(3, nu)


def test_arith_point():
    k = ArithPoint(3, 6, 1)
    assert (k.n, k.e, k.k, k.i) == (4, 2, 3, 0)
    assert ArithPoint(5, 4, 1).i == 2
    with pytest.raises(ValueError):
        ArithPoint(3, 3)
    with pytest.raises(ScopeError):
        ArithPoint(3, 4, 0, 2)


@given(primes, st.lists(st.integers(0, 20), min_size=1, max_size=3), st.lists(st.integers(-20, 20), min_size=1, max_size=3),
       st.integers(2, 8))
def test_hensel_split(p, roots, tail, P):
    # chi = prod (x - r) * (x^d + tail) with the tail coprime to the roots mod p
    r0 = roots[0] % p
    if r0 == 0:
        r0 = 1
    roots = [r0 + p * r for r in roots]
    h = list(tail) + [1]
    assume(sum(c * r0 ** j for j, c in enumerate(h)) % p)
    chi = [1]
    for r in roots:
        chi = poly_mul(chi, [-r, 1], 10 ** 30)
    chi = poly_mul(chi, h, 10 ** 30)
    chi = [c if c < 10 ** 29 else c - 10 ** 30 for c in chi]
    g, hh = hensel_split(chi, p, P, [r0])
    mod = p ** P
    assert len(g) - 1 == len(roots)
    assert poly_mul(g, hh, mod) == [c % mod for c in chi]
    # g mod p is (x - r0)^m
    lin = [1]
    for _ in roots:
        lin = poly_mul(lin, [-r0, 1], p)
    assert [c % p for c in g] == lin


K2 = PadicExt(3, 12, (7, 1, 1))  # x^2 + x + 7 is irreducible mod 3
K1 = PadicExt(3, 12, (-5, 1))

elems = st.tuples(st.integers(-10 ** 6, 10 ** 6), st.integers(-10 ** 6, 10 ** 6))


@given(elems, elems, elems)
def test_quadratic_ring_axioms(a, b, c):
    x, y, z = K2.elem(a), K2.elem(b), K2.elem(c)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert (x * y).conj() == x.conj() * y.conj()
    assert (x * x.conj()).c[1] == 0
    assert (x * x.conj()).c[0] == x.norm_numerator()
    if x.norm_numerator() % 3:
        assert x * x.inverse() == K2.elem([1])
        assert (y / x) * x == y


def test_root_and_valuations():
    r = K2.gen()
    assert r * r + r + 7 == K2.elem([0])
    assert K1.gen() == K1.elem([5])
    three = K2.from_rational(3)
    assert three.val() == 1 and K2.from_rational(Fraction(1, 9)).val() == -2
    assert K2.elem([0]).val() is None
    assert (K2.from_rational(Fraction(2, 3)) * 3 - 2).is_zero(10)
    x = K2.elem([5, 2])
    assert x.truncate(1).c == (2, 2) and x.truncate(1).val() == 0
    assert K2.from_poly([1, 2]) == K2.elem([1, 2])


def test_ramified_quotient():
    # x^2 - 3x + 3 is Eisenstein, so r has valuation 1/2
    K = PadicExt(3, 10, (3, -3, 1))
    r = K.gen()
    assert r.val() == Fraction(1, 2)
    q = K.elem([1]) / r
    assert q.val() == Fraction(-1, 2)
    assert (q * r - 1).is_zero(8)


def test_hensel_root_unit_root():
    # unit root of x^2 - a x + p for a = -1, p = 3
    K = PadicExt(3, 10, (1, 1))
    alpha = hensel_root(K, lambda x: x * x + x + 3, lambda x: 2 * x + 1, K.elem([-1]), 12)
    assert (alpha * alpha + alpha + 3).is_zero(10)
    assert alpha.val() == 0
