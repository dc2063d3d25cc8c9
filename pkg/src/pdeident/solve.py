"""Forward solvers.

``solve_linear_spectral`` evaluates the separated-variables solution exactly.
The finite-difference solvers use second-order central differences in space
with ghost-node boundary closures, and a Crank-Nicolson treatment of diffusion
combined with an explicit Heun (trapezoidal predictor-corrector) treatment of
the reaction, which keeps the IMEX step second order in time.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import linalg

from .errors import (
    BasisMismatch,
    BlowUp,
    GridMismatch,
    InvalidParameter,
    StepSizeRejected,
)
from .operators import TWO_PI, BCKind, BoundaryCondition, EigenPair, OperatorParams, eigenpairs

BLOWUP = 1e6


# -- data types -----------------------------------------------------------------

@dataclass(frozen=True)
class EigenExpansionIC:
    """``u0 = sum_n C_n phi_n`` in the eigenbasis of a reference operator ``(d_ref, b_ref)``.

    Coefficients follow the order of :func:`operators.eigenpairs`, so Neumann
    starts with the constant mode. Periodic coefficients are flattened as
    ``[C_0, a_1, b_1, a_2, b_2, ...]`` for ``1, cos x, sin x, cos 2x, ...``.
    """

    coefficients: tuple[float, ...]
    bc: BoundaryCondition
    d_ref: float = 1.0
    b_ref: float = 0.0
    _pairs: tuple = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        coeffs = tuple(float(c) for c in np.asarray(self.coefficients, dtype=float).ravel())
        if len(coeffs) < 1:
            raise InvalidParameter("an expansion needs at least one coefficient")
        if not all(math.isfinite(c) for c in coeffs):
            raise InvalidParameter("coefficients must be finite")
        if not self.d_ref > 0:
            raise InvalidParameter("reference diffusion must be > 0")
        object.__setattr__(self, "coefficients", coeffs)
        object.__setattr__(self, "_pairs", tuple(self._basis_pairs()))

    @property
    def N(self) -> int:
        return len(self.coefficients)

    def _basis_pairs(self) -> list[EigenPair]:
        n = self.N
        if self.bc.kind is BCKind.PERIODIC:
            return eigenpairs(self.d_ref, 0.0, self.bc, max(1, n // 2))
        if self.bc.kind is BCKind.NEUMANN:
            return eigenpairs(self.d_ref, self.b_ref, self.bc, max(1, n - 1))[:n]
        return eigenpairs(self.d_ref, self.b_ref, self.bc, n)

    def modes(self):
        """Yield ``(pair, coefficient, basis_index)`` for every coefficient."""
        if self.bc.kind is BCKind.PERIODIC:
            pairs = self._pairs
            yield pairs[0], self.coefficients[0], 0
            for j, c in enumerate(self.coefficients[1:]):
                yield pairs[1 + j // 2], c, j % 2
            return
        for p, c in zip(self._pairs, self.coefficients):
            yield p, c, 0

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for p, c, k in self.modes():
            out += c * p.basis(x)[k]
        return out


@dataclass(frozen=True)
class Field:
    """Values ``u(x_i, t_j)`` stored with shape ``(len(t), len(x))``."""

    x: np.ndarray
    t: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.shape != (t.size, x.size):
            raise GridMismatch(f"values have shape {v.shape}, grids give {(t.size, x.size)}")
        for name, arr in (("x", x), ("t", t), ("values", v)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def at(self, t: float) -> np.ndarray:
        j = int(np.argmin(np.abs(self.t - t)))
        return self.values[j]


def fields_to_csv(fields: list[Field], names: list[str] | None = None) -> str:
    """CSV text with header ``x,t,<names>``, rows ordered by t then x."""
    if not fields:
        raise InvalidParameter("no fields to write")
    names = names or (["u", "v", "w"][: len(fields)])
    base = fields[0]
    for f in fields[1:]:
        _same_grid(base, f)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "t", *names])
    for j, t in enumerate(base.t):
        for i, x in enumerate(base.x):
            w.writerow([f"{x:.17g}", f"{t:.17g}", *(f"{f.values[j, i]:.17g}" for f in fields)])
    return buf.getvalue()


def _same_grid(f1: Field, f2: Field) -> None:
    if f1.x.shape != f2.x.shape or f1.t.shape != f2.t.shape:
        raise GridMismatch("fields live on grids of different sizes")
    if not (np.array_equal(f1.x, f2.x) and np.array_equal(f1.t, f2.t)):
        raise GridMismatch("fields live on different grids")


def divergence_metric(f1: Field, f2: Field) -> float:
    """Max-norm distance between two fields on identical grids."""
    _same_grid(f1, f2)
    return float(np.max(np.abs(f1.values - f2.values)))


# -- spectral ---------------------------------------------------------------------

def _check_grids(bc: BoundaryCondition, x_grid, t_grid):
    x = np.asarray(x_grid, dtype=float).ravel()
    t = np.asarray(t_grid, dtype=float).ravel()
    if x.size == 0 or t.size == 0:
        raise InvalidParameter("grids must be nonempty")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(t))):
        raise InvalidParameter("grids must be finite")
    if not bc.contains(x):
        raise InvalidParameter(f"x grid leaves [0, {bc.length}]")
    return x, t


def solve_linear_spectral(A: OperatorParams, bc: BoundaryCondition, ic: EigenExpansionIC,
                          x_grid, t_grid) -> Field:
    """Exact ``u = sum_n C_n exp((c - lam_n(d, b)) t) phi_n`` on the grid.

    The initial condition's basis must consist of eigenfunctions of ``A``'s
    operator: same boundary condition and the same ratio ``b/d`` (periodic modes
    accept any drift through the shift ``x -> x + b t``).
    """
    if ic.bc != bc:
        raise BasisMismatch(f"expansion built for {ic.bc.kind.value}, solving with {bc.kind.value}")
    x, t = _check_grids(bc, x_grid, t_grid)
    tt = t[:, None]
    if A.d == 0:
        if A.b != 0:
            raise BasisMismatch("with d = 0 the eigenbasis only carries the drift-free flow")
        # u_t = c u: every profile is carried unchanged
        vals = np.exp(A.c * tt) * ic(x)[None, :]
        return Field(x, t, vals, {"A": A.astuple(), "bc": bc.kind.value, "method": "spectral"})

    periodic = bc.kind is BCKind.PERIODIC
    if not periodic:
        ratio_ic = ic.b_ref / ic.d_ref
        ratio = A.b / A.d
        if abs(ratio - ratio_ic) > 1e-12 * max(1.0, abs(ratio)):
            raise BasisMismatch(
                f"expansion basis has b/d = {ratio_ic:g}, operator has {ratio:g}"
            )
    scale = A.d / ic.d_ref
    vals = np.zeros((t.size, x.size))
    for p, coeff, k in ic.modes():
        if coeff == 0.0:
            continue
        mu = A.c - scale * p.lam
        growth = np.exp(mu * tt)
        if periodic and p.family == "fourier":
            arg = p.params["k"] * (x[None, :] + A.b * tt)
            shape = np.cos(arg) if k == 0 else np.sin(arg)
            vals += coeff * growth * shape
        else:
            vals += coeff * growth * p.basis(x)[k][None, :]
    return Field(x, t, vals, {"A": A.astuple(), "bc": bc.kind.value, "method": "spectral"})


# -- finite differences ---------------------------------------------------------------

@dataclass(frozen=True)
class Logistic:
    """``f(u) = a u - b u^2``."""

    a: float
    b: float

    def __call__(self, x, u):
        return self.a * u - self.b * u * u

    def du(self, x, u):
        return self.a - 2 * self.b * u


@dataclass(frozen=True)
class HeteroLogistic:
    """``f(x, u) = m(x) u - b u^2`` with ``m`` a callable or samples on ``m_grid``.

    Samples are linearly interpolated.
    """

    m: Callable | np.ndarray
    b: float
    m_grid: np.ndarray | None = None

    def m_at(self, x):
        x = np.asarray(x, dtype=float)
        if callable(self.m):
            return np.asarray(self.m(x), dtype=float) * np.ones_like(x)
        if self.m_grid is None:
            raise InvalidParameter("sampled m(x) needs m_grid")
        return np.interp(x, self.m_grid, np.asarray(self.m, dtype=float))

    def __call__(self, x, u):
        return self.m_at(x) * u - self.b * u * u

    def du(self, x, u):
        return self.m_at(x) - 2 * self.b * u


def fd_grid(bc: BoundaryCondition, nx: int) -> np.ndarray:
    """Nodes of the FD grid; the periodic grid omits the duplicate endpoint."""
    if nx < 3:
        raise InvalidParameter(f"nx must be >= 3, got {nx}")
    if bc.kind is BCKind.PERIODIC:
        return np.arange(nx) * (TWO_PI / nx)
    return np.linspace(0.0, bc.length, nx)


def _operator_bands(bc: BoundaryCondition, nx: int, d: float, b: float = 0.0, c: float = 0.0):
    """Rows of ``d D2 + b D1 + c`` on the unknowns as (lower, diag, upper, corner_lo, corner_hi).

    Dirichlet unknowns are the interior nodes; the other kinds carry every node
    and close the stencil with a ghost value.
    """
    x = fd_grid(bc, nx)
    h = x[1] - x[0]
    kind = bc.kind
    m = nx - 2 if kind is BCKind.DIRICHLET else nx
    lo = np.full(m, d / h**2 - b / (2 * h))
    up = np.full(m, d / h**2 + b / (2 * h))
    di = np.full(m, -2 * d / h**2 + c)
    corner = (0.0, 0.0)
    if kind is BCKind.NEUMANN:
        # ghost u_{-1} = u_1, u_{N+1} = u_{N-1}: the drift stencil vanishes
        up[0] = 2 * d / h**2
        lo[-1] = 2 * d / h**2
    elif kind is BCKind.ROBIN:
        s = bc.sigma
        # u - s u' = 0 at 0: u_{-1} = u_1 - 2h u_0 / s
        up[0] = 2 * d / h**2
        di[0] += -(d / h**2 - b / (2 * h)) * 2 * h / s
        # u + s u' = 0 at l: u_{N+1} = u_{N-1} - 2h u_N / s
        lo[-1] = 2 * d / h**2
        di[-1] += -(d / h**2 + b / (2 * h)) * 2 * h / s
    elif kind is BCKind.PERIODIC:
        corner = (lo[0], up[-1])
    return lo, di, up, corner


def _dense(bands) -> np.ndarray:
    lo, di, up, (c_lo, c_hi) = bands
    m = di.size
    M = np.diag(di) + np.diag(up[:-1], 1) + np.diag(lo[1:], -1)
    M[0, -1] += c_lo
    M[-1, 0] += c_hi
    return M


class _CNSolver:
    """Solves ``(I - theta L) y = r`` for a tridiagonal or cyclic tridiagonal ``L``."""

    def __init__(self, bands, theta: float):
        lo, di, up, (c_lo, c_hi) = bands
        self.bands = bands
        self.theta = theta
        m = di.size
        ab = np.zeros((3, m))
        ab[0, 1:] = -theta * up[:-1]
        ab[1] = 1.0 - theta * di
        ab[2, :-1] = -theta * lo[1:]
        self.cyclic = c_lo != 0.0 or c_hi != 0.0
        if self.cyclic:
            # Sherman-Morrison: A = T + w v^T with corners -theta*c_lo, -theta*c_hi
            a_c, b_c = -theta * c_lo, -theta * c_hi
            gamma = -ab[1, 0]
            ab[1, 0] -= gamma
            ab[1, -1] -= a_c * b_c / gamma
            self.w = np.zeros(m)
            self.w[0], self.w[-1] = gamma, b_c
            self.v = np.zeros(m)
            self.v[0], self.v[-1] = 1.0, a_c / gamma
            self.ab = ab
            self.z = linalg.solve_banded((1, 1), ab, self.w)
            self.denom = 1.0 + self.v @ self.z
        else:
            self.ab = ab

    def apply(self, y):
        """``L y``."""
        lo, di, up, (c_lo, c_hi) = self.bands
        out = di * y
        out[:-1] += up[:-1] * y[1:]
        out[1:] += lo[1:] * y[:-1]
        out[0] += c_lo * y[-1]
        out[-1] += c_hi * y[0]
        return out

    def solve(self, r):
        y = linalg.solve_banded((1, 1), self.ab, r)
        if self.cyclic:
            y = y - self.z * (self.v @ y) / self.denom
        return y


def _as_samples(u0, x: np.ndarray, name: str) -> np.ndarray:
    if callable(u0):
        v = np.asarray(u0(x), dtype=float) * np.ones_like(x)
    else:
        v = np.asarray(u0, dtype=float).ravel()
        if v.size != x.size:
            raise GridMismatch(f"{name} has {v.size} samples, grid has {x.size}")
    if not np.all(np.isfinite(v)):
        raise InvalidParameter(f"{name} must be finite")
    return v.copy()


def _check_ic_bc(bc: BoundaryCondition, v: np.ndarray, name: str) -> None:
    if bc.kind is BCKind.DIRICHLET and max(abs(v[0]), abs(v[-1])) > 1e-8:
        raise InvalidParameter(f"{name} violates the Dirichlet condition at an endpoint")


def _time_steps(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float).ravel()
    if t.size == 0 or not np.all(np.isfinite(t)):
        raise InvalidParameter("t grid must be finite and nonempty")
    if t[0] < 0 or np.any(np.diff(t) < 0):
        raise InvalidParameter("t grid must be nonnegative and nondecreasing")
    return t


def _substeps(span: float, dt_max: float) -> tuple[int, float]:
    if span == 0:
        return 0, 0.0
    n = max(1, math.ceil(span / dt_max - 1e-12))
    return n, span / n


def _imex_integrate(x, t, states, solvers, rhs, jac_bound, dt_user, h):
    """Shared CN/Heun time loop. ``states`` is a list of full-grid arrays."""
    interior = [s.interior for s in solvers]
    out = [[st.copy()] for st in states]
    y = [st[sl].copy() for st, sl in zip(states, interior)]
    t_now = 0.0
    if t[0] > 0:
        t_targets = t
    else:
        t_targets = t[1:]
    if t[0] > 0:
        out = [[] for _ in states]
    for target in t_targets:
        span = target - t_now
        full = [s.expand(v) for s, v in zip(solvers, y)]
        bound = jac_bound(full)
        if dt_user is None:
            dt_max = min(0.5 / bound if bound > 0 else math.inf, h)
        else:
            if dt_user * bound > 1:
                raise StepSizeRejected(
                    f"dt * max|df/du| = {dt_user * bound:.3g} exceeds 1; lower dt"
                )
            dt_max = dt_user
        n, dt = _substeps(span, dt_max)
        for _ in range(n):
            full = [s.expand(v) for s, v in zip(solvers, y)]
            f0 = [fv[sl] for fv, sl in zip(rhs(full), interior)]
            pred = []
            for s, v, f in zip(solvers, y, f0):
                r = v + 0.5 * dt * s.cn.apply(v) + dt * f
                pred.append(s.solve(r, dt))
            full_p = [s.expand(v) for s, v in zip(solvers, pred)]
            f1 = [fv[sl] for fv, sl in zip(rhs(full_p), interior)]
            y = [s.solve(v + 0.5 * dt * s.cn.apply(v) + 0.5 * dt * (a + b), dt)
                 for s, v, a, b in zip(solvers, y, f0, f1)]
            if dt_user is not None:
                full = [s.expand(v) for s, v in zip(solvers, y)]
                if dt_user * jac_bound(full) > 1:
                    raise StepSizeRejected("reaction stiffened beyond the explicit stability bound")
            if any(np.max(np.abs(v)) > BLOWUP for v in y):
                raise BlowUp(f"|u| exceeded {BLOWUP:g} before t = {target:g}")
        t_now = target
        for o, s, v in zip(out, solvers, y):
            o.append(s.expand(v))
    return [np.array(o) for o in out]


class _Component:
    """One diffusing species: CN operator plus boundary bookkeeping."""

    def __init__(self, bc: BoundaryCondition, nx: int, d: float, b: float = 0.0):
        self.bc = bc
        self.nx = nx
        self.bands = _operator_bands(bc, nx, d, b)
        self.dirichlet = bc.kind is BCKind.DIRICHLET
        self.interior = slice(1, nx - 1) if self.dirichlet else slice(0, nx)
        self.cn = _CNSolver(self.bands, 0.5)
        self._dt = None
        self._solver = None

    def solve(self, r, dt):
        if self._dt != dt:
            self._solver = _CNSolver(self.bands, 0.5 * dt)
            self._dt = dt
        return self._solver.solve(r)

    def expand(self, y):
        if not self.dirichlet:
            return y
        full = np.zeros(self.nx)
        full[1:-1] = y
        return full


def _reaction_bound(reaction, x):
    def bound(full):
        u = full[0]
        return float(np.max(np.abs(reaction.du(x, u))))
    return bound


def solve_nonlinear_fd(d: float, reaction, bc: BoundaryCondition, u0, t_grid, nx: int = 201,
                       dt: float | None = None) -> Field:
    """IMEX finite-difference solve of ``u_t = d u'' + f(x, u)``.

    ``dt`` defaults to ``min(0.5 / max|df/du|, h)``, re-evaluated at every
    output time and shortened so that each output time is hit exactly.
    """
    if not (math.isfinite(d) and d > 0):
        raise InvalidParameter(f"d must be > 0, got {d}")
    if nx < 51:
        raise InvalidParameter(f"nx must be >= 51, got {nx}")
    if dt is not None and not (math.isfinite(dt) and dt > 0):
        raise InvalidParameter(f"dt must be > 0, got {dt}")
    x = fd_grid(bc, nx)
    t = _time_steps(t_grid)
    v0 = _as_samples(u0, x, "u0")
    _check_ic_bc(bc, v0, "u0")
    comp = _Component(bc, nx, d)
    (vals,) = _imex_integrate(
        x, t, [v0], [comp],
        rhs=lambda full: [reaction(x, full[0])],
        jac_bound=_reaction_bound(reaction, x),
        dt_user=dt,
        h=x[1] - x[0],
    )
    return Field(x, t, vals, {"d": d, "reaction": repr(reaction), "bc": bc.kind.value, "method": "fd"})


def solve_system_fd(params, bc: BoundaryCondition, u0v0, t_grid, nx: int = 201,
                    dt: float | None = None) -> tuple[Field, Field]:
    """``u_t = d_u u'' + a11 u - a12 v``, ``v_t = d_v v'' - a21 u + a22 v``.

    ``params`` is any object with attributes ``d_u, d_v, a11, a12, a21, a22``.
    """
    p = params
    for name in ("d_u", "d_v"):
        v = getattr(p, name)
        if not (math.isfinite(v) and v > 0):
            raise InvalidParameter(f"{name} must be > 0, got {v}")
    if nx < 51:
        raise InvalidParameter(f"nx must be >= 51, got {nx}")
    x = fd_grid(bc, nx)
    t = _time_steps(t_grid)
    u0, v0 = u0v0
    su, sv = _as_samples(u0, x, "u0"), _as_samples(v0, x, "v0")
    _check_ic_bc(bc, su, "u0")
    _check_ic_bc(bc, sv, "v0")
    K = np.array([[p.a11, -p.a12], [-p.a21, p.a22]], dtype=float)
    kb = float(np.max(np.sum(np.abs(K), axis=1)))
    cu, cv = _Component(bc, nx, p.d_u), _Component(bc, nx, p.d_v)
    uvals, vvals = _imex_integrate(
        x, t, [su, sv], [cu, cv],
        rhs=lambda full: [K[0, 0] * full[0] + K[0, 1] * full[1],
                          K[1, 0] * full[0] + K[1, 1] * full[1]],
        jac_bound=lambda full: kb,
        dt_user=dt,
        h=x[1] - x[0],
    )
    meta = {"params": {k: getattr(p, k) for k in ("d_u", "d_v", "a11", "a12", "a21", "a22")},
            "bc": bc.kind.value, "method": "fd"}
    return Field(x, t, uvals, meta), Field(x, t, vvals, meta)


def solve_linear_fd(A: OperatorParams, bc: BoundaryCondition, u0, t_grid, nx: int = 201,
                    dt: float | None = None) -> Field:
    """Crank-Nicolson solve of the full linear model ``u_t = d u'' + b u' + c u``.

    The step matrix is formed once and applied repeatedly, which makes this
    the fast path for sweeps over many parameter points.
    """
    if not A.d > 0:
        raise InvalidParameter("the FD solver needs d > 0")
    x = fd_grid(bc, nx)
    t = _time_steps(t_grid)
    v0 = _as_samples(u0, x, "u0")
    _check_ic_bc(bc, v0, "u0")
    bands = _operator_bands(bc, nx, A.d, A.b, A.c)
    L = _dense(bands)
    I = np.eye(L.shape[0])
    h = x[1] - x[0]
    step = dt if dt is not None else h
    dirichlet = bc.kind is BCKind.DIRICHLET
    y = v0[1:-1].copy() if dirichlet else v0.copy()

    def full(v):
        if not dirichlet:
            return v
        out = np.zeros(nx)
        out[1:-1] = v
        return out

    cache: dict[float, np.ndarray] = {}

    def step_matrix(k):
        key = round(k, 15)
        if key not in cache:
            cache[key] = linalg.solve(I - 0.5 * k * L, I + 0.5 * k * L)
        return cache[key]

    rows = []
    t_now = 0.0
    for target in t:
        n, k = _substeps(target - t_now, step)
        if n:
            S = step_matrix(k)
            for _ in range(n):
                y = S @ y
            if np.max(np.abs(y)) > BLOWUP:
                raise BlowUp(f"|u| exceeded {BLOWUP:g} before t = {target:g}")
        t_now = target
        rows.append(full(y))
    return Field(x, t, np.array(rows), {"A": A.astuple(), "bc": bc.kind.value, "method": "fd-cn"})
