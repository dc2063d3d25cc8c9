import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import collocation_eigenvalues, robin_no_drift_eigenvalues, trapezoid_inner
from pdeident.errors import (
    DegenerateOperator,
    InvalidDomain,
    InvalidParameter,
    InvalidSigma,
    OutOfDomain,
    RootScanExhausted,
    UnsupportedDrift,
)
from pdeident.operators import (
    BoundaryCondition,
    OperatorParams,
    analytic_residual,
    boundary_residual,
    dirichlet_eigenpairs,
    eigenfunction_sample,
    eigenpairs,
    fd_residual,
    neumann_eigenpairs,
    periodic_eigenpairs,
    robin_eigenpairs,
)

PI2 = math.pi**2


# -- Dirichlet -------------------------------------------------------------------

def test_dirichlet_unit_interval():
    assert dirichlet_eigenpairs(1.0, 0.0, 1.0, 1)[0].lam == pytest.approx(PI2, rel=1e-14)


def test_dirichlet_length_pi_second_mode():
    assert dirichlet_eigenpairs(1.0, 0.0, math.pi, 2)[1].lam == pytest.approx(4.0, rel=1e-14)


def test_dirichlet_drift_shift():
    assert dirichlet_eigenpairs(1.0, 2.0, 1.0, 1)[0].lam == pytest.approx(1 + PI2, rel=1e-14)


def test_dirichlet_zero_diffusion_is_degenerate():
    with pytest.raises(DegenerateOperator):
        dirichlet_eigenpairs(0.0, 1.0, 1.0, 2)


@given(st.floats(0.01, 5), st.floats(-5, 5), st.floats(0.2, 4), st.integers(1, 12))
def test_dirichlet_closed_form(d, b, length, n):
    lam = dirichlet_eigenpairs(d, b, length, n)[-1].lam
    assert lam == pytest.approx(b * b / (4 * d) + d * n * n * PI2 / length**2, rel=1e-12)


def test_dirichlet_eigenfunction_values():
    p1, p2 = dirichlet_eigenpairs(1.0, 0.0, 1.0, 2)
    assert eigenfunction_sample(p1, [0.5])[0] == pytest.approx(1.0, abs=1e-15)
    assert eigenfunction_sample(p2, [0.5])[0] == pytest.approx(0.0, abs=1e-15)


def test_dirichlet_drift_eigenfunction_normalised_by_maximum():
    # phi = exp(-x) sin(pi x) peaks where tan(pi x) = pi
    p = dirichlet_eigenpairs(1.0, 2.0, 1.0, 1)[0]
    xs = math.atan(math.pi) / math.pi
    Z = math.exp(-xs) * math.sin(math.pi * xs)
    assert eigenfunction_sample(p, [0.5])[0] == pytest.approx(math.exp(-0.5) / Z, rel=1e-12)
    x = np.linspace(0, 1, 20001)
    assert np.max(eigenfunction_sample(p, x)) == pytest.approx(1.0, rel=1e-8)


def test_sample_outside_domain():
    p = dirichlet_eigenpairs(1.0, 0.0, 1.0, 1)[0]
    with pytest.raises(OutOfDomain):
        eigenfunction_sample(p, [1.5])


# -- Neumann ---------------------------------------------------------------------

def test_neumann_no_drift():
    lams = [p.lam for p in neumann_eigenpairs(1.0, 0.0, 1.0, 1)]
    assert lams == pytest.approx([0.0, PI2], rel=1e-14)


def test_neumann_zero_diffusion_keeps_constant_only():
    pairs = neumann_eigenpairs(0.0, 3.0, 1.0, 4)
    assert len(pairs) == 1 and pairs[0].lam == 0.0 and pairs[0].family == "constant"


@pytest.mark.parametrize("d,b", [(1.0, 1.0), (0.3, -0.8), (0.1, 0.5), (2.0, 4.0)])
def test_neumann_drift_matches_collocation(d, b):
    pairs = neumann_eigenpairs(d, b, 1.0, 4)
    ref = collocation_eigenvalues(d, b, 1.0, (0.0, 1.0), (0.0, 1.0), n=90, count=5)
    assert [p.lam for p in pairs] == pytest.approx(ref, rel=1e-7, abs=1e-7)


def test_neumann_drift_first_mode_residual():
    p = neumann_eigenpairs(1.0, 1.0, 1.0, 1)[1]
    assert p.lam > 0
    assert fd_residual(p) / (1 + p.lam) < 1e-6
    assert boundary_residual(p) < 1e-10


# -- Robin -----------------------------------------------------------------------

def test_robin_zero_diffusion_pair():
    (p,) = robin_eigenpairs(0.0, 2.0, 1.0)
    assert p.lam == 2.0
    x = np.linspace(0, 1, 11)
    assert np.allclose(eigenfunction_sample(p, x), np.exp(-x), rtol=1e-14)
    assert robin_eigenpairs(0.0, 0.0, 1.0)[0].lam == 0.0


def test_robin_zero_sigma_rejected():
    with pytest.raises(InvalidSigma):
        robin_eigenpairs(1.0, 0.0, 0.0)


@pytest.mark.parametrize("sigma", [0.05, 0.5, 1.0, 3.0, 20.0])
def test_robin_no_drift_matches_transcendental_roots(sigma):
    got = [p.lam for p in robin_eigenpairs(1.0, 0.0, sigma, 1.0, 4)][:4]
    ref = robin_no_drift_eigenvalues(1.0, sigma, 1.0, 4)
    assert got == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("d,b,sigma", [(1.0, 1.0, 1.0), (0.5, -1.0, 0.3), (0.2, 2.0, 2.0), (1.0, 0.5, -0.4)])
def test_robin_drift_matches_collocation(d, b, sigma):
    got = [p.lam for p in robin_eigenpairs(d, b, sigma, 1.0, 4)][:4]
    ref = collocation_eigenvalues(d, b, 1.0, (1.0, -sigma), (1.0, sigma), n=90, count=4)
    assert got == pytest.approx(ref, rel=1e-7, abs=1e-8)


def test_robin_large_sigma_approaches_neumann():
    lam1 = robin_eigenpairs(1.0, 0.0, 1e4, 1.0, 2)[0].lam
    assert 0 < lam1 < 1e-3


def test_robin_first_eigenvalue_monotone_in_sigma():
    sig = np.logspace(-3, 4, 40)
    lam = np.array([robin_eigenpairs(1.0, 0.0, s, 1.0, 1)[0].lam for s in sig])
    assert np.all(np.diff(lam) < 0)
    assert np.all((lam > 0) & (lam < PI2))


@pytest.mark.parametrize("sigma", [1e2, 1.0, 0.01, -0.5])
def test_robin_residual_invariant(sigma):
    for p in robin_eigenpairs(1.0, 0.5, sigma, 1.0, 6):
        assert fd_residual(p) / (1 + abs(p.lam)) < 1e-6
        assert boundary_residual(p) < 1e-9


def test_robin_negative_sigma_can_give_negative_eigenvalue():
    assert robin_eigenpairs(1.0, 0.0, -0.5, 1.0, 1)[0].lam < 0


# -- periodic --------------------------------------------------------------------

def test_periodic_spectrum():
    pairs = periodic_eigenpairs(1.0, 0.0, 2)
    assert [p.lam for p in pairs] == [0.0, 1.0, 4.0]
    assert [p.multiplicity for p in pairs] == [1, 2, 2]
    assert periodic_eigenpairs(2.0, 0.0, 1)[1].lam == 2.0


def test_periodic_cos3x_residual():
    p = periodic_eigenpairs(1.0, 0.0, 3)[3]
    x = np.linspace(0, 2 * math.pi, 401)
    h = x[1] - x[0]
    phi = np.cos(3 * x)
    r = -(phi[2:] - 2 * phi[1:-1] + phi[:-2]) / h**2 - p.lam * phi[1:-1]
    assert np.max(np.abs(r)) < 1e-2  # O(h^2) truncation of the three-point stencil
    assert analytic_residual(p, x) < 1e-12
    assert fd_residual(p, 401) < 1e-6


def test_periodic_drift_unsupported():
    with pytest.raises(UnsupportedDrift):
        periodic_eigenpairs(1.0, 0.5, 2)


# -- validation ------------------------------------------------------------------

def test_parameter_validation():
    with pytest.raises(InvalidParameter):
        OperatorParams(-1.0, 0.0, 0.0)
    with pytest.raises(InvalidDomain):
        BoundaryCondition.dirichlet(0.0)
    with pytest.raises(InvalidParameter):
        dirichlet_eigenpairs(1.0, 0.0, 1.0, 0)


# -- invariants ------------------------------------------------------------------

BCS = [BoundaryCondition.dirichlet(), BoundaryCondition.neumann(), BoundaryCondition.robin(0.7)]


@pytest.mark.parametrize("bc", BCS, ids=lambda b: b.kind.value)
@pytest.mark.parametrize("d,b", [(1.0, 0.0), (0.5, 0.8), (0.2, -0.6)])
def test_weighted_orthogonality(bc, d, b):
    # drift operators are self-adjoint under the weight exp(b x / d)
    pairs = eigenpairs(d, b, bc, 4)
    x = np.linspace(0, bc.length, 1001)
    w = np.exp(b * x / d)
    phis = [eigenfunction_sample(p, x) for p in pairs]
    for i in range(len(phis)):
        for j in range(i):
            num = trapezoid_inner(w * phis[i], phis[j], x)
            den = math.sqrt(trapezoid_inner(w * phis[i], phis[i], x) * trapezoid_inner(w * phis[j], phis[j], x))
            assert abs(num) / den < 1e-5  # trapezoid error at h = 1e-3


@pytest.mark.parametrize("bc", [BoundaryCondition.dirichlet(), BoundaryCondition.neumann(),
                                BoundaryCondition.periodic()], ids=lambda b: b.kind.value)
def test_orthogonality_no_drift_tight(bc):
    pairs = eigenpairs(0.7, 0.0, bc, 5)
    x = np.linspace(0, bc.length, 1001)
    phis = [row for p in pairs for row in p.basis(x)[: p.multiplicity]]
    for i in range(len(phis)):
        for j in range(i):
            assert abs(trapezoid_inner(phis[i], phis[j], x)) < 1e-8


@given(st.sampled_from(BCS), st.floats(0.05, 3), st.floats(-2, 2))
def test_strict_ordering_and_single_positive_mode(bc, d, b):
    pairs = eigenpairs(d, b, bc, 6)
    lams = [p.lam for p in pairs]
    assert all(l1 < l2 for l1, l2 in zip(lams, lams[1:]))
    assert sum(p.positive for p in pairs) == 1
    assert pairs[0].positive


@given(st.floats(0.05, 3), st.floats(-3, 3), st.floats(0.3, 3))
def test_drift_shift_exact(d, b, length):
    with_drift = dirichlet_eigenpairs(d, b, length, 3)
    without = dirichlet_eigenpairs(d, 0.0, length, 3)
    for p, q in zip(with_drift, without):
        assert p.lam - q.lam == pytest.approx(b * b / (4 * d), rel=1e-10, abs=1e-12)


@given(st.sampled_from(BCS), st.floats(0.1, 2), st.floats(-1, 1))
def test_positive_mode_has_no_interior_zero(bc, d, b):
    p = eigenpairs(d, b, bc, 2)[0]
    x = np.linspace(0, bc.length, 501)[1:-1]
    v = eigenfunction_sample(p, x)
    assert np.all(v > 0) or np.all(v < 0)


@pytest.mark.parametrize("bc", [BoundaryCondition.neumann(), BoundaryCondition.robin(0.8)],
                         ids=lambda b: b.kind.value)
def test_drift_dominated_operators_are_refused(bc):
    assert eigenpairs(1e-8, 1.0, bc, 3)[-1].lam == pytest.approx(2.5e7, rel=1e-6)
    with pytest.raises(RootScanExhausted):
        eigenpairs(1e-9, 1.0, bc, 3)


def test_dirichlet_shift_overflow_is_rejected():
    with pytest.raises(InvalidParameter):
        dirichlet_eigenpairs(5e-324, 1.0)
