"""End-to-end acceptance checks; each test prints one PASS/FAIL line."""
import json
import os
import random
import time
from fractions import Fraction

import numpy as np
import pytest
from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_form

from ssw_lift import bqf, linalg
from ssw_lift.bqf import CharacterData
from ssw_lift.cli import CACHE_ENV, main
from ssw_lift.cohomology import (
    PolyModule,
    T_ell,
    coboundary,
    compute_h1,
    cuspidal_basis,
    involution,
)
from ssw_lift.dist import (
    MeasureModule,
    PrimMeasure,
    act_measure,
    j_alpha,
    rho_k,
    symmetrize,
    theta_xi,
)
from ssw_lift.family import locate_member
from ssw_lift.groups import build_presentation
from ssw_lift.padic import specialize_iwasawa, teichmuller
from ssw_lift.shintani import lift_coefficient

from oracles import a_11a, gamma0_class_count, gamma0_invariants, genus

PSI = CharacterData(33, (3,))


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    """Two cold runs each of the classical and family commands, with no lift cache."""
    saved = os.environ.pop(CACHE_ENV, None)
    root = tmp_path_factory.mktemp("acceptance")
    out, times = {}, {}
    try:
        for cmd, args in (("classical", ["classical"]), ("family", ["family"])):
            for k in (1, 2):
                path = root / f"{cmd}{k}" / "report.json"
                t = time.perf_counter()
                code = main(args + ["--output", str(path)])
                times[cmd, k] = time.perf_counter() - t
                out[cmd, k] = (code, path)
    finally:
        if saved is not None:
            os.environ[CACHE_ENV] = saved
    return out, times


def _report(runs, cmd, k=1):
    code, path = runs[0][cmd, k]
    with open(path) as fh:
        return code, json.load(fh)


def _abelian_rank(G):
    # exponent-sum matrix of the relations, rank read off the Smith form
    rows = []
    for rel in G.relations:
        row = [0] * G.ngens
        for letter in rel:
            row[abs(letter) - 1] += 1 if letter > 0 else -1
        rows.append(row)
    if not rows:
        return G.ngens
    S = smith_normal_form(Matrix(rows))
    return G.ngens - sum(1 for i in range(min(S.shape)) if S[i, i] != 0)


def test_substrate_dimensions(G11, criterion):
    t = time.perf_counter()
    H = compute_h1(G11, PolyModule(0))
    plus = cuspidal_basis(H, 1, ell=2)
    mu, nu2, nu3, cusps = gamma0_invariants(11)
    g = genus(11)
    dt = time.perf_counter() - t
    ok = H.dim == 3 == _abelian_rank(G11) == 2 * g + cusps - 1 and len(plus) == g == 1 and dt < 1
    criterion(1, "H^1(Gamma_0(11)) has dimension 3, cuspidal plus part dimension 1", ok,
              f"dim={H.dim}, smith rank={_abelian_rank(G11)}, genus={g}, cusps={cusps}, {dt:.2f}s")
    assert ok


def test_hecke_eigenvalues_and_commutation(G11, criterion):
    t = time.perf_counter()
    H = compute_h1(G11, PolyModule(0))
    B = cuspidal_basis(H, 1, ell=2) + cuspidal_basis(H, -1, ell=2)
    eig = {}
    for q in (2, 3, 5, 7):
        T = linalg.restrict_operator(T_ell(H, q), B)
        eig[q] = (T[0][0], T == [[T[0][0] if i == j else 0 for j in range(len(B))] for i in range(len(B))])
    Ts = {q: T_ell(H, q) for q in (2, 3, 5)}
    iota = involution(H)
    commute = all(linalg.matmul(Ts[a], Ts[b]) == linalg.matmul(Ts[b], Ts[a]) for a in Ts for b in Ts)
    iota_ok = all(linalg.matmul(Ts[a], iota) == linalg.matmul(iota, Ts[a]) for a in Ts)
    dt = time.perf_counter() - t
    ok = all(scalar and ev == a_11a(q) for q, (ev, scalar) in eig.items()) and commute and iota_ok and dt < 10
    criterion(2, "T_q on the cuspidal part equals q + 1 - #E(F_q); T_l commute with each other and iota", ok,
              ", ".join(f"a_{q}={ev}" for q, (ev, _) in eig.items()) + f", {dt:.2f}s")
    assert ok


CLASS_CASES = [(11, 3, 1, 2), (11, 3, 1, 3), (11, 3, 1, 5), (5, 3, 1, 2), (7, 3, 1, 3), (2, 3, 1, 5),
               (1, 3, 1, 2), (1, 5, 1, 3), (11, 3, 0, 6), (13, 3, 1, 2), (5, 7, 1, 3), (11, 3, 1, 7)]
MAP_CASES = [(11, 3, 2, xi) for xi in (2, 3, 5, 6, 7, 8, 10, 11)] + [(5, 3, 2, xi) for xi in (2, 3, 5, 6, 7)] + \
            [(7, 3, 2, 2), (2, 3, 2, 5), (1, 3, 2, 2), (1, 3, 2, 5)]


def test_quadratic_form_engine(criterion):
    t = time.perf_counter()
    counts_ok, autos_ok = True, True
    for N, p, n, xi in CLASS_CASES:
        L = N * p ** n
        classes = bqf.enumerate_classes(N, p, n, xi)
        counts_ok &= len(classes) == gamma0_class_count(L, xi)
        for c in classes:
            a, b, cc, d = c.automorph
            A, B, C = c.form.form
            moved = (A * a * a + B * a * cc + C * cc * cc,
                     2 * A * a * b + B * (a * d + b * cc) + 2 * C * cc * d,
                     A * b * b + B * b * d + C * d * d)
            autos_ok &= moved == (A, B, C) and cc % L == 0 and a * d - b * cc == 1
    tested, maps_ok = 0, True
    for N, p, m, xi in MAP_CASES:
        rep = bqf.family_map_pi(N, p, m, xi)
        if max(rep.n_source, rep.n_target) > 50:
            continue
        tested += 1
        maps_ok &= rep.bijective
    dt = time.perf_counter() - t
    ok = counts_ok and autos_ok and maps_ok and tested >= 10 and dt < 120
    criterion(3, "class counts match the orbit oracle, automorphs fix forms, level-change map is bijective", ok,
              f"{len(CLASS_CASES)} count instances, {tested} map instances, {dt:.1f}s")
    assert ok


def test_classical_lift_hecke(runs, criterion):
    code, rep = _report(runs, "classical")
    checks = rep["checks"]
    ok = code == 0
    parts = []
    for q in (7, 13):
        c, s = checks[f"hecke_T{q}^2"], checks[f"hecke_T{q}^2_sparse"]
        ok &= c["status"] == "pass" and Fraction(c["a_q"]) == a_11a(q) and s["status"] == "pass"
        parts.append(f"q={q}: window {c['valid_window']}, extra xi {','.join(s['xi'])}")
    dt = runs[1]["classical", 1]
    ok &= dt < 300 and rep["config"]["window"] == "200"
    criterion(4, "classical lift at window 200 is a T(q^2) eigenform for q = 7, 13", ok,
              "; ".join(parts) + f", {dt:.1f}s")
    assert ok


def _coboundary_shift_measure(Phi, nu):
    d = Phi.module.dim
    data = Phi.data.copy()
    for k, g in enumerate(Phi.G.generators):
        data[k * d:(k + 1) * d] += (act_measure(g, nu) - nu).data
    return Phi.replace(data)


def test_invariance_suite(G11, G33, base_lift, criterion):
    t = time.perf_counter()
    rng = random.Random(5)
    m6 = locate_member(11, 3, 6, -1, -1, G_N=G11, G_Np=G33)
    mod = PolyModule(4)
    c = m6.components[0]
    shifted = c + coboundary(G33, mod, [Fraction(rng.randint(-9, 9)) for _ in range(mod.dim)])
    Phi = base_lift[1]
    Phi_shift = _coboundary_shift_measure(Phi, symmetrize(PrimMeasure(3, 4, MeasureModule(3, 4).reduce(
        np.array([rng.randrange(81) for _ in range(MeasureModule(3, 4).dim)], dtype=np.int64)))))
    results = {"coboundary": True, "conjugation": True, "order": True}
    nonzero = 0
    for xi in (5, 14, 20, 23):
        classes = bqf.enumerate_classes(11, 3, 1, xi, G33)
        moved = [bqf.make_class(bqf.act(k.form.form, bqf.random_gamma0(33, rng)), 33, G33) for k in classes]
        rng.shuffle(moved)
        rev = list(reversed(classes))
        a = lift_coefficient(c, G33, mod, 11, 3, 1, xi, PSI, 3)
        nonzero += a != 0
        results["coboundary"] &= lift_coefficient(shifted, G33, mod, 11, 3, 1, xi, PSI, 3) == a
        results["conjugation"] &= lift_coefficient(c, G33, mod, 11, 3, 1, xi, PSI, 3, moved) == a
        results["order"] &= lift_coefficient(c, G33, mod, 11, 3, 1, xi, PSI, 3, rev) == a
        th = theta_xi(Phi, xi, PSI)
        nonzero += not th.is_zero()
        results["coboundary"] &= theta_xi(Phi_shift, xi, PSI) == th
        results["conjugation"] &= theta_xi(Phi, xi, PSI, moved) == th
        results["order"] &= theta_xi(Phi, xi, PSI, rev) == th
    dt = time.perf_counter() - t
    ok = all(results.values()) and nonzero == 8 and dt < 120
    criterion(5, "classical and measure-valued coefficients are invariant under coboundaries, "
                 "conjugation and reordering", ok,
              ", ".join(f"{k}={'ok' if v else 'BROKEN'}" for k, v in results.items()) + f", {dt:.1f}s")
    assert ok


def _q_power(Q, e):
    A, B, C = Q
    out = [1]
    for _ in range(e):
        nxt = [0] * (len(out) + 2)
        for a, x in enumerate(out):
            nxt[a] += C * x
            nxt[a + 1] += B * x
            nxt[a + 2] += A * x
        out = nxt
    return out


def test_two_path_identity(criterion):
    t = time.perf_counter()
    rng = random.Random(11)
    mod = MeasureModule(3, 4)
    pairs = []
    for xi in (2, 5, 7, 14):
        # classes with eta = 0 never enter theta, so only b_alpha prime to 33 is relevant
        pairs += [c.form.form for c in bqf.enumerate_classes(11, 3, 1, xi) if bqf.eta(c, PSI, 33)][:8]
    bad = 0
    for Q in pairs:
        nu = PrimMeasure(3, 4, mod.reduce(np.array([rng.randrange(81) for _ in range(mod.dim)], dtype=np.int64)))
        for half in (0, 1):
            for e in (0, 1, 2):
                lhs = specialize_iwasawa(j_alpha(nu, Q), half, e).value
                r = rho_k(nu, 2 * e, 2 * half)
                eta = pow(teichmuller(Q[2], 3, 4), half, 81)
                rhs = eta * sum(x * y for x, y in zip(_q_power(Q, e), r)) % 81
                bad += lhs != rhs
    dt = time.perf_counter() - t
    ok = bad == 0 and len(pairs) >= 20 and dt < 60
    criterion(6, "specialized pushforward equals tame factor times rho_k(nu)(Q^e)", ok,
              f"{len(pairs)} (measure, class) pairs x 6 weights, {bad} mismatches, {dt:.1f}s")
    assert ok


def test_ordinary_lifting(base_lift, runs, criterion):
    _, Phi, rep, alpha, phia = base_lift
    code, fam = _report(runs, "family")
    lift = fam["checks"]["lift"]
    converged = rep.log[-1] == 0 and len(rep.log) <= 8 * 4
    ok = converged and rep.rho_ok and rep.ordinary_fixed and rep.fiber_fixed and lift["status"] == "pass"
    scalar = {k: v for k, v in rep.up_fixed_depth.items()}
    criterion(7, "ordinary lift at M=4 converges, reproduces the eigenclass, and is U_p-fixed in its fiber", ok,
              f"refinements {rep.log}, rho exact={rep.rho_ok}, projector fixed={rep.ordinary_fixed}, "
              f"fiber fixed={rep.fiber_fixed}; full-measure a_p^-1 U_p defect valuation by degree {scalar}")
    assert ok


def test_theta_up_squared(runs, criterion):
    code, fam = _report(runs, "family")
    up = fam["checks"]["up_squared"]
    ok = up["status"] == "pass" and int(up["xi_max"]) >= 10 and fam["config"]["window"] == "90"
    criterion(8, "theta_{9 xi}(Phi) = theta_xi(U_3 Phi) for xi <= 10 at loss 0", ok,
              f"xi_max={up['xi_max']}; scalar alpha reading fails at xi={','.join(up['scalar_alpha_failures']) or 'none'}")
    assert ok


def test_interpolation(runs, criterion):
    code, fam = _report(runs, "family")
    ch = fam["checks"]
    w2, w6, unit = ch["interpolation_w2"], ch["interpolation_w6"], ch["base_period_unit"]
    dt = runs[1]["family", 1]
    ok = (code == 0 and w2["status"] == "pass" and w6["status"] == "pass" and unit["status"] == "pass"
          and len(w2["usable_xi"]) >= 3 and len(w6["usable_xi"]) >= 3
          and w2["required_depth"] == "2" and fam["config"]["interp_window"] == "50" and dt < 1800)
    criterion(9, "theta specializations are constant multiples of the classical lifts at weights 2 and 6", ok,
              f"w2 depth {w2['min_depth']} over {len(w2['usable_xi'])} xi, w6 depth {w6['min_depth']} over "
              f"{len(w6['usable_xi'])} xi (field degree {w6['field_degree']}), omega_2 valuation "
              f"{unit['omega_valuation']}, {dt:.1f}s")
    assert ok


def test_determinism(runs, criterion):
    same, files = True, 0
    for cmd in ("classical", "family"):
        d1 = runs[0][cmd, 1][1].parent
        d2 = runs[0][cmd, 2][1].parent
        names = sorted(os.listdir(d1))
        same &= names == sorted(os.listdir(d2))
        for name in names:
            files += 1
            same &= (d1 / name).read_bytes() == (d2 / name).read_bytes()
    ok = same and files == 4
    criterion(10, "repeated cold runs of the classical and family commands give byte-identical JSON", ok,
              f"{files} files compared")
    assert ok
