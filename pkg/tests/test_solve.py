import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import trapezoid

from oracles import logistic_closed_form
from pdeident.classify import SystemParams
from pdeident.errors import (
    BasisMismatch,
    BlowUp,
    GridMismatch,
    InvalidParameter,
    StepSizeRejected,
    ValidationError,
)
from pdeident.operators import BoundaryCondition, OperatorParams
from pdeident.solve import (
    EigenExpansionIC,
    Field,
    HeteroLogistic,
    Logistic,
    divergence_metric,
    fd_grid,
    fields_to_csv,
    solve_linear_fd,
    solve_linear_spectral,
    solve_nonlinear_fd,
    solve_system_fd,
)

PI2 = math.pi**2
DIR = BoundaryCondition.dirichlet()
NEU = BoundaryCondition.neumann()
X = np.linspace(0, 1, 101)
T = np.linspace(0, 2, 21)


# -- spectral --------------------------------------------------------------------

def test_spectral_single_mode_closed_form():
    f = solve_linear_spectral(OperatorParams(0.05, 0, 1), DIR, EigenExpansionIC((1.0,), DIR), X, T)
    exact = np.exp((1 - 0.05 * PI2) * T)[:, None] * np.sin(np.pi * X)[None, :]
    assert np.max(np.abs(f.values - exact)) < 1e-13


@pytest.mark.parametrize("bc", [DIR, NEU, BoundaryCondition.robin(0.4), BoundaryCondition.periodic()],
                         ids=lambda b: b.kind.value)
def test_spectral_zero_ic(bc):
    ic = EigenExpansionIC((0.0, 0.0, 0.0), bc)
    x = np.linspace(0, bc.length, 31)
    assert np.all(solve_linear_spectral(OperatorParams(0.3, 0, 0), bc, ic, x, T).values == 0)


def test_spectral_twins_identical():
    ic = EigenExpansionIC((1.0,), DIR)
    f1 = solve_linear_spectral(OperatorParams(0.05, 0, 1), DIR, ic, X, T)
    f2 = solve_linear_spectral(OperatorParams(0.15, 0, 1 + 0.1 * PI2), DIR, ic, X, T)
    assert divergence_metric(f1, f2) < 1e-14


def test_spectral_basis_mismatch():
    with pytest.raises(BasisMismatch):
        solve_linear_spectral(OperatorParams(0.1, 0, 0), NEU, EigenExpansionIC((1.0,), DIR), X, T)


def test_ic_satisfies_boundary_condition():
    ic = EigenExpansionIC((0.3, -1.2, 0.7, 0.1), DIR, d_ref=0.4, b_ref=0.5)
    assert np.max(np.abs(ic(np.array([0.0, 1.0])))) < 1e-15
    with pytest.raises(ValidationError):
        EigenExpansionIC((), DIR)
    with pytest.raises(ValidationError):
        EigenExpansionIC((float("nan"),), DIR)


# -- divergence ------------------------------------------------------------------

def test_divergence_self_is_zero():
    f = solve_linear_spectral(OperatorParams(0.05, 0, 1), DIR, EigenExpansionIC((1.0,), DIR), X, T)
    assert divergence_metric(f, f) == 0.0


def test_divergence_rate_pair():
    ic = EigenExpansionIC((1.0,), DIR)
    t = np.array([0.0, 1.0])
    f1 = solve_linear_spectral(OperatorParams(0.05, 0, 1.0), DIR, ic, X, t)
    f2 = solve_linear_spectral(OperatorParams(0.05, 0, 1.5), DIR, ic, X, t)
    mu1, mu2 = 1 - 0.05 * PI2, 1.5 - 0.05 * PI2
    assert divergence_metric(f1, f2) >= abs(math.exp(mu1) - math.exp(mu2)) * 1.0 - 1e-14


def test_divergence_grid_mismatch():
    f = Field(X, T, np.zeros((T.size, X.size)))
    g = Field(X[:-1], T, np.zeros((T.size, X.size - 1)))
    with pytest.raises(GridMismatch):
        divergence_metric(f, g)
    with pytest.raises(GridMismatch):
        Field(X, T, np.zeros((2, 2)))


def test_field_csv_layout():
    f = Field([0.0, 1.0], [0.0, 0.5], [[1.0, 2.0], [3.0, 4.0]])
    text = fields_to_csv([f])
    assert text.splitlines() == ["x,t,u", "0,0,1", "1,0,2", "0,0.5,3", "1,0.5,4"]
    assert fields_to_csv([f, f]).splitlines()[0] == "x,t,u,v"


# -- nonlinear FD ----------------------------------------------------------------

def test_logistic_uniform_neumann():
    t = np.linspace(0, 1, 11)
    f = solve_nonlinear_fd(0.1, Logistic(1.0, 1.0), NEU, np.full(201, 0.5), t)
    assert np.max(np.abs(f.values[-1] - 1 / (1 + math.e**-1))) < 1e-4
    ref = logistic_closed_form(0.5, 1.0, 1.0, t)
    assert np.max(np.abs(f.values - ref[:, None])) < 1e-4


@pytest.mark.parametrize("bc", [DIR, NEU, BoundaryCondition.periodic()], ids=lambda b: b.kind.value)
def test_logistic_zero_stays_zero(bc):
    f = solve_nonlinear_fd(0.2, Logistic(2.0, 1.0), bc, np.zeros(101), np.linspace(0, 1, 5), nx=101)
    assert np.all(f.values == 0)


def test_logistic_carrying_capacity_is_steady():
    f = solve_nonlinear_fd(0.1, Logistic(1.0, 1.0), NEU, np.ones(201), np.linspace(0, 2, 5))
    assert np.max(np.abs(f.values - 1)) < 1e-12


@given(st.floats(0.01, 0.5), st.floats(0.2, 3.0), st.floats(0.2, 3.0), st.floats(0.0, 1.0))
def test_logistic_positivity(d, a, b, frac):
    x = fd_grid(DIR, 101)
    u0 = frac * a / b * np.sin(np.pi * x) ** 2
    f = solve_nonlinear_fd(d, Logistic(a, b), DIR, u0, np.linspace(0, 1, 5), nx=101)
    assert f.values.min() >= -1e-10
    assert f.values.max() <= a / b + 1e-10


def test_hetero_logistic_runs_and_stays_bounded():
    mx = np.linspace(0, 1, 11)
    r = HeteroLogistic(1 + 0.5 * np.sin(2 * np.pi * mx), 1.0, mx)
    x = fd_grid(NEU, 101)
    f = solve_nonlinear_fd(0.05, r, NEU, 0.2 + 0.1 * x, np.linspace(0, 2, 5), nx=101)
    assert 0 <= f.values.min() and f.values.max() <= 1.5 + 1e-10


def test_step_size_rejected():
    with pytest.raises(StepSizeRejected):
        solve_nonlinear_fd(0.1, Logistic(5.0, 1.0), NEU, np.full(101, 0.5), [0.0, 1.0], nx=101, dt=0.5)


def test_blow_up():
    x = fd_grid(NEU, 101)
    with pytest.raises(BlowUp):
        solve_linear_fd(OperatorParams(0.1, 0, 20.0), NEU, np.ones_like(x), [0.0, 1.0], nx=101)


def test_input_validation():
    with pytest.raises(InvalidParameter):
        solve_nonlinear_fd(0.1, Logistic(1, 1), NEU, np.ones(21), [0, 1], nx=21)
    with pytest.raises(ValidationError):
        # IC violates the Dirichlet condition
        solve_nonlinear_fd(0.1, Logistic(1, 1), DIR, np.ones(101), [0, 1], nx=101)


# -- cross validation ------------------------------------------------------------

ICS = {
    "dirichlet": EigenExpansionIC((1.0, 0.5, 0.3), DIR),
    "neumann": EigenExpansionIC((0.2, 1.0, 0.5), NEU),
    "robin": EigenExpansionIC((1.0, 0.5), BoundaryCondition.robin(0.5)),
    "periodic": EigenExpansionIC((0.1, 1.0, 0.3, 0.2, 0.4), BoundaryCondition.periodic()),
}


@pytest.mark.parametrize("name", list(ICS))
def test_fd_matches_spectral_second_order(name):
    ic = ICS[name]
    bc = ic.bc
    t = np.linspace(0, 1, 11)
    A = OperatorParams(0.1, 0.0, 0.7)
    gaps = []
    for nx in (201, 401):
        x = fd_grid(bc, nx)
        fd = solve_nonlinear_fd(A.d, Logistic(A.c, 0.0), bc, ic(x), t, nx=nx)
        gaps.append(divergence_metric(fd, solve_linear_spectral(A, bc, ic, x, t)))
    assert gaps[0] < 1e-3
    assert gaps[0] / gaps[1] >= 3.5


@pytest.mark.parametrize("name", ["dirichlet", "neumann", "robin"])
def test_crank_nicolson_with_drift_matches_spectral(name):
    ic = ICS[name]
    bc = ic.bc
    A = OperatorParams(0.1, 0.3, 0.5)
    ic = EigenExpansionIC(ic.coefficients, bc, d_ref=A.d, b_ref=A.b)
    x = fd_grid(bc, 201)
    t = np.linspace(0, 1, 11)
    fd = solve_linear_fd(A, bc, ic(x), t, nx=201)
    assert divergence_metric(fd, solve_linear_spectral(A, bc, ic, x, t)) < 1e-3


def test_neumann_mass_conservation():
    x = fd_grid(NEU, 201)
    u0 = 1 + 0.5 * np.cos(np.pi * x)
    t = np.linspace(0, 1, 11)
    for f in (solve_linear_fd(OperatorParams(0.1, 0, 0), NEU, u0, t),
              solve_nonlinear_fd(0.1, Logistic(0.0, 0.0), NEU, u0, t)):
        mass = np.array([trapezoid(v, x) for v in f.values])
        assert np.ptp(mass) / mass[0] < 1e-6


# -- systems ---------------------------------------------------------------------

def test_decoupled_system_matches_scalar_spectral():
    p = SystemParams(0.1, 0.2, 0.5, 0.0, 0.0, -0.3)
    x = fd_grid(DIR, 201)
    t = np.linspace(0, 1, 11)
    fu, fv = solve_system_fd(p, DIR, (np.sin(np.pi * x), np.sin(2 * np.pi * x)), t)
    su = solve_linear_spectral(OperatorParams(0.1, 0, 0.5), DIR, EigenExpansionIC((1.0,), DIR), x, t)
    sv = solve_linear_spectral(OperatorParams(0.2, 0, -0.3), DIR, EigenExpansionIC((0.0, 1.0), DIR), x, t)
    assert divergence_metric(fu, su) < 1e-4
    assert divergence_metric(fv, sv) < 1e-4


def test_system_zero_ic():
    p = SystemParams(0.1, 0.2, 0.5, 1.0, 1.0, -0.3)
    z = np.zeros(101)
    fu, fv = solve_system_fd(p, NEU, (z, z), [0.0, 1.0], nx=101)
    assert np.all(fu.values == 0) and np.all(fv.values == 0)
