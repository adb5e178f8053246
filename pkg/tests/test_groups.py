import json

import pytest
from hypothesis import given, strategies as st

from ssw_lift.groups import (
    DecompositionError,
    GroupPresentation,
    MembershipError,
    build_presentation,
    coset_decomposition,
    decompose_word,
    det,
    in_gamma0,
    inv,
    mul,
    neg,
    projectively_equal,
)

from oracles import gamma0_invariants, genus

LEVELS = [1, 2, 3, 4, 5, 7, 11, 13, 33, 37]


@pytest.fixture(scope="module")
def groups():
    return {N: build_presentation(N) for N in LEVELS}


@pytest.mark.parametrize("N", LEVELS)
def test_generators_and_relations(groups, N):
    G = groups[N]
    assert all(in_gamma0(g, N) for g in G.generators)
    for rel in G.relations:
        assert projectively_equal(G.evaluate(rel), (1, 0, 0, 1))


@pytest.mark.parametrize("N", LEVELS)
def test_index_matches_formula(groups, N):
    mu, _, _, _ = gamma0_invariants(N)
    assert len(groups[N]._cosets) == mu


@pytest.mark.parametrize("N", LEVELS)
def test_free_rank_of_abelianization(groups, N):
    # rank of Gamma_0(N)^ab = 2g + cusps - 1
    _, _, _, cusps = gamma0_invariants(N)
    rank, _ = groups[N].abelianization()
    assert rank == 2 * genus(N) + cusps - 1


@pytest.mark.parametrize("N,nu2,nu3", [(1, 1, 1), (2, 1, 0), (3, 0, 1), (13, 2, 2), (37, 2, 2), (11, 0, 0)])
def test_elliptic_generators(groups, N, nu2, nu3):
    orders = list(groups[N].elliptic_orders().values())
    assert orders.count(2) == nu2 and orders.count(3) == nu3
    _, n2, n3, _ = gamma0_invariants(N)
    assert (n2, n3) == (nu2, nu3)


def test_level_one_and_free_levels(groups):
    assert groups[1].relations == [(1, 1), (2, 2, 2)]
    assert groups[1].abelianization() == (0, [6])
    assert groups[11].ngens == 3 and groups[11].relations == []
    assert groups[33].ngens == 9 and groups[33].relations == []


@st.composite
def gamma0_element(draw, N):
    g = (1, 0, 0, 1)
    for _ in range(draw(st.integers(1, 6))):
        k = draw(st.integers(-4, 4))
        g = mul(g, (1, k, 0, 1) if draw(st.booleans()) else (1, 0, k * N, 1))
    if draw(st.booleans()):
        g = neg(g)
    return g


@pytest.mark.parametrize("N", [1, 5, 11, 33])
@given(data=st.data())
def test_decompose_word_roundtrip(groups, N, data):
    G = groups[N]
    x = data.draw(gamma0_element(N))
    w, sign = decompose_word(x, G)
    assert G.evaluate(w) == (x if sign == 1 else neg(x))


@given(st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50),
       st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50), st.integers(-50, 50))
def test_matrix_arithmetic(a, b, c, d, e, f, g, h):
    x, y = (a, b, c, d), (e, f, g, h)
    assert det(mul(x, y)) == det(x) * det(y)
    if det(x) == 1:
        assert mul(x, inv(x)) == (1, 0, 0, 1)


def test_membership_errors(groups):
    with pytest.raises(MembershipError):
        decompose_word((1, 0, 1, 1), groups[11])
    with pytest.raises(MembershipError):
        decompose_word((2, 0, 0, 1), groups[11])


def test_external_bundle_has_no_solver(groups):
    data = json.loads(json.dumps(groups[11].to_json()))
    G = GroupPresentation.from_json(data)
    assert G.generators == groups[11].generators
    with pytest.raises(DecompositionError):
        decompose_word(G.generators[0], G)


def test_bad_bundle_relation_rejected(groups):
    data = groups[5].to_json()
    data["relations"] = [[1, 2]]
    with pytest.raises(ValueError):
        GroupPresentation.from_json(data)


@pytest.mark.parametrize("N,s,count", [(33, (1, 0, 0, 3), 3), (33, (1, 0, 0, 2), 3), (11, (1, 0, 0, 5), 6),
                                        (11, (1, 0, 0, -1), 1)])
def test_hecke_cosets(groups, N, s, count):
    G = groups[N]
    cd = coset_decomposition(s, G)
    assert len(cd.reps) == count
    # s_i g = t_i(g) s_j for the permuted index j
    for gi, g in enumerate(G.generators):
        for i, si in enumerate(cd.reps):
            j = cd.perm[gi][i]
            t = cd.t[gi][i]
            assert in_gamma0(t, N)
            assert mul(si, g) == mul(t, cd.reps[j])
