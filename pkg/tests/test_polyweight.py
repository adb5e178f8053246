from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ssw_lift.groups import mul
from ssw_lift.polyweight import HomPoly, PolyDual, act_dual, act_poly, as_fractions, quadratic

ent = st.integers(-5, 5)
mats = st.tuples(ent, ent, ent, ent)


def polys(n):
    return st.lists(st.integers(-9, 9), min_size=n + 1, max_size=n + 1).map(lambda c: HomPoly(n, tuple(c)))


@given(st.integers(0, 5).flatmap(lambda n: st.tuples(polys(n), mats, mats)), ent, ent)
def test_act_poly_is_substitution(data, x, y):
    P, g, _ = data
    a, b, c, d = g
    assert act_poly(g, P)(x, y) == P(a * x + b * y, c * x + d * y)


@given(st.integers(0, 5).flatmap(lambda n: st.tuples(polys(n), mats, mats)))
def test_act_poly_composition(data):
    P, g, h = data
    assert act_poly(mul(g, h), P) == act_poly(h, act_poly(g, P))


@given(st.integers(0, 4).flatmap(lambda n: st.tuples(polys(n), polys(n), mats, mats)))
def test_dual_action_is_left_action_and_pairing(data):
    P, V, g, h = data
    phi = PolyDual(V.n, V.coeffs)
    assert act_dual(mul(g, h), phi) == act_dual(g, act_dual(h, phi))
    assert act_dual(g, phi).pair(P) == phi.pair(act_poly(g, P))


def test_quadratic_fixed_by_its_automorph():
    Q = quadratic(1, 1, -1)
    assert act_poly((1, 1, 1, 2), Q) == Q
    assert Q(1, 0) == 1 and Q(0, 1) == -1


def test_modular_duals():
    phi = PolyDual(2, (5, 6, 7), modulus=9)
    assert (phi + phi).values == (1, 3, 5)
    assert phi.scale(3).values == (6, 0, 3)
    assert (-phi).values == (4, 3, 2)
    assert as_fractions(phi).values == (Fraction(5), Fraction(6), Fraction(7))
    with pytest.raises(ValueError):
        phi.pair(HomPoly(1, (1, 1)))
    with pytest.raises(ValueError):
        HomPoly(2, (1,))
