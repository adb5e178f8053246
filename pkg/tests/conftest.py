import os

import pytest
from hypothesis import HealthCheck, settings

from ssw_lift.groups import build_presentation

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=15, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def G11():
    return build_presentation(11)


@pytest.fixture(scope="session")
def G33():
    return build_presentation(33)


@pytest.fixture(scope="session")
def base_lift(G11, G33):
    """(member, Phi, report, alpha) for 11a at p = 3, M = 4."""
    from ssw_lift.dist import lift_ordinary
    from ssw_lift.family import locate_member

    M, P = 4, 3 ** 4
    m = locate_member(11, 3, 2, -1, -1, G_N=G11, G_Np=G33)
    phia = [int(x.c[0]) % P for x in m.stabilized_cochain()]
    alpha = int(m.alpha.c[0]) % P
    Phi, rep = lift_ordinary(G33, phia, 0, 3, M, alpha)
    return m, Phi, rep, alpha, phia


@pytest.fixture(scope="session")
def eigen11(G11, G33):
    """Minus-part eigencocycle of 11a at level 11, its restriction to level 33, and psi = (./3)."""
    from ssw_lift.bqf import CharacterData
    from ssw_lift.cohomology import PolyModule, compute_h1, eigen_locate, restrict_cocycle

    mod = PolyModule(0)
    H = compute_h1(G11, mod)
    phi = eigen_locate(H, [(2, -2)], -1)
    return H, phi, restrict_cocycle(phi, G11, G33, mod), mod, CharacterData(33, (3,))


_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """record(number, title, ok, detail): one summary line per acceptance criterion."""
    def record(number, title, ok, detail=""):
        line = f"[{number:2d}] {'PASS' if ok else 'FAIL'}  {title}" + (f"  ({detail})" if detail else "")
        _ACCEPTANCE[number] = line
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])
