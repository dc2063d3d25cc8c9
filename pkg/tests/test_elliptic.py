import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import logistic_bvp_dirichlet
from pdeident.elliptic import (
    NonlinearVerdict,
    Regime,
    classify_nonlinear_pair,
    default_shoot_range,
    profile_csv,
    shoot_count,
)
from pdeident.errors import InvalidParameter, IntegratorBlowUp, SamePoint
from pdeident.operators import BoundaryCondition
from pdeident.solve import HeteroLogistic, Logistic, fd_grid, solve_nonlinear_fd

PI2 = math.pi**2
DIR = BoundaryCondition.dirichlet()
NEU = BoundaryCondition.neumann()


def test_neumann_constant_state_is_the_only_nonnegative_solution():
    res = shoot_count(0.1, Logistic(1.0, 1.0), NEU, nonnegative_only=True)
    assert res.regime is Regime.UNIQUE
    (p,) = res.solutions
    assert np.max(np.abs(p.psi - 1.0)) < 1e-10


def test_neumann_sign_changing_solutions_exist():
    # d pi^2 < a, so the first cosine mode bifurcates from zero
    res = shoot_count(0.1, Logistic(1.0, 1.0), NEU)
    signs = sorted(p.sign for p in res.solutions)
    assert signs == [0, 0, 1]
    assert res.regime is Regime.DISCRETE


def test_dirichlet_positive_profile_above_threshold():
    d, a, b = 0.05, 1.0, 1.0
    assert d * PI2 < a
    res = shoot_count(d, Logistic(a, b), DIR)
    assert res.regime is Regime.UNIQUE
    (p,) = res.solutions
    assert p.sign == 1
    ref = logistic_bvp_dirichlet(d, a, b)
    assert np.max(np.abs(ref.sol(p.x)[0] - p.psi)) < 1e-7
    assert np.max(p.psi) == pytest.approx(0.58865, abs=1e-5)


def test_dirichlet_below_threshold_has_no_nonnegative_profile():
    d, a, b = 0.2, 1.5, 1.0
    assert d * PI2 >= a
    assert shoot_count(d, Logistic(a, b), DIR, nonnegative_only=True).count == 0
    # without the sign filter a negative solution of -d psi'' = a psi - b psi^2 remains
    res = shoot_count(d, Logistic(a, b), DIR)
    assert [p.sign for p in res.solutions] == [-1]


@pytest.mark.parametrize("d,a,b", [(0.05, 1.0, 1.0), (0.2, 1.5, 1.0), (0.1, 2.0, 0.5)])
def test_negative_drift_negates_profiles(d, a, b):
    plus = shoot_count(d, Logistic(a, b), DIR)
    minus = shoot_count(d, Logistic(a, -b), DIR)
    assert plus.count == minus.count
    for p, q in zip(sorted(plus.solutions, key=lambda p: p.shoot),
                    sorted(minus.solutions, key=lambda p: -p.shoot)):
        assert np.max(np.abs(p.psi + q.psi)) < 1e-8


@pytest.mark.parametrize("bc", [DIR, NEU, BoundaryCondition.robin(0.5)], ids=lambda b: b.kind.value)
@pytest.mark.parametrize("d,a,b", [(0.05, 1.0, 1.0), (0.1, 2.0, 0.5), (0.03, 1.0, 2.0)])
def test_profile_residuals(bc, d, a, b):
    for p in shoot_count(d, Logistic(a, b), bc).solutions:
        assert p.residual < 1e-8


@pytest.mark.parametrize("bc", [DIR, NEU], ids=lambda b: b.kind.value)
@pytest.mark.parametrize("d,a,b", [(0.05, 1.0, 1.0), (0.2, 1.5, 1.0), (0.1, 2.0, 0.5)])
def test_scan_doubling_is_stable(bc, d, a, b):
    r1 = shoot_count(d, Logistic(a, b), bc, n_scan=4000)
    r2 = shoot_count(d, Logistic(a, b), bc, n_scan=8000)
    assert r1.count == r2.count


@pytest.mark.parametrize("d,a,b", [(0.05, 1.0, 1.0), (0.2, 1.5, 1.0), (0.1, 2.0, 0.5)])
def test_unique_profiles_are_stationary_under_dynamics(d, a, b):
    res = shoot_count(d, Logistic(a, b), DIR)
    assert res.regime is Regime.UNIQUE
    x = fd_grid(DIR, 201)
    for p in res.solutions:
        u0 = np.interp(x, p.x, p.psi)
        f = solve_nonlinear_fd(d, Logistic(a, b), DIR, u0, np.linspace(0, 1, 11))
        assert np.max(np.abs(f.values - u0)) < 1e-4


def test_hetero_logistic_profile():
    # linear interpolation of m leaves kinks that the fourth-order residual
    # stencil sees, so the bound is looser than for the smooth logistic case
    coarse, fine = np.linspace(0, 1, 21), np.linspace(0, 1, 2001)
    residuals = []
    for mx in (coarse, fine):
        r = HeteroLogistic(1.0 + 0.5 * np.cos(np.pi * mx), 1.0, mx)
        res = shoot_count(0.05, r, DIR, nonnegative_only=True)
        assert res.count == 1 and res.solutions[0].sign == 1
        residuals.append(res.solutions[0].residual)
    assert residuals[1] < 1e-7
    assert residuals[1] < residuals[0] / 50


def test_default_range_floor_and_cap():
    lo, hi = default_shoot_range(0.1, Logistic(1e-6, 1.0), DIR)
    assert hi == pytest.approx(100 * 0.1 / 1.0) and lo == -hi
    assert default_shoot_range(1e-4, Logistic(100.0, 1e-3), DIR)[1] == 1e3


def test_shoot_validation():
    with pytest.raises(InvalidParameter):
        shoot_count(0.0, Logistic(1, 1), DIR)
    with pytest.raises(InvalidParameter):
        shoot_count(0.1, Logistic(1, 1), DIR, n_scan=10)
    with pytest.raises(InvalidParameter):
        shoot_count(0.1, Logistic(1, 1), DIR, shoot_range=(1.0, -1.0))


def test_blow_up_everywhere():
    with pytest.raises(IntegratorBlowUp):
        shoot_count(1e-3, Logistic(1.0, -1.0), NEU, shoot_range=(50.0, 60.0))


def test_profile_csv_header():
    p = shoot_count(0.05, Logistic(1, 1), DIR).solutions[0]
    lines = profile_csv(p).splitlines()
    assert lines[0] == "x,psi" and len(lines) == p.x.size + 1


# -- pairs -----------------------------------------------------------------------

def test_pair_constant_auxiliary_solution():
    res = classify_nonlinear_pair((1, 2, 3), (1, 1, 1), NEU)
    assert res.verdict is NonlinearVerdict.IDENTIFIABLE
    (p,) = res.classification.solutions
    assert np.all(p.psi == 0.5)


def test_pair_same_point():
    with pytest.raises(SamePoint):
        classify_nonlinear_pair((1, 2, 3), (1, 2, 3), DIR)


def test_pair_stationary_observation_undetermined():
    res = classify_nonlinear_pair((0.2, 2, 2), (0.1, 1, 1), DIR, assume_nonstationary=False)
    assert res.verdict is NonlinearVerdict.UNDETERMINED


@settings(max_examples=12)
@given(st.floats(0.05, 0.5), st.floats(0.05, 0.5), st.floats(-1.0, 1.5), st.floats(0.1, 2.0))
def test_pairs_with_positive_drift_gap_have_at_most_one_root(d2, dd, da, db):
    # below the second Dirichlet eigenvalue no sign-changing branch exists
    if da / dd >= 4 * PI2 * 0.9:
        return
    res = classify_nonlinear_pair((d2 + dd, 1.0 + da, 1.0 + db), (d2, 1.0, 1.0), DIR, n_scan=2000)
    assert res.classification.count <= 1
    assert res.verdict is NonlinearVerdict.IDENTIFIABLE


def test_large_ratio_gives_several_roots():
    # past 4 pi^2 the sweep finds sign-changing solutions too
    res = shoot_count(0.01, Logistic(1.0, 1.0), DIR)
    assert res.count == 3
    assert res.regime is Regime.DISCRETE
