"""Pairwise structural identifiability for the linear model ``u_t = L[A] u``.

Two parameter points ``A1`` and ``A2`` can only share a solution if that
solution lies in the kernel of the auxiliary operator ``L[A1 - A2]``. For a
constant-coefficient operator the kernel is an eigenspace of ``-L_1``, so the
question reduces to whether the auxiliary rate ``c`` is an eigenvalue of the
auxiliary ``(d, b)``. A match is only a candidate: a solution shared by both
models must also be an eigenfunction of each model separately, which with drift
requires ``b1/d1 = b2/d2``.

Also contains the two-species construction and the 2x2 ODE commutant demo.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import linalg

from .errors import (
    InvalidParameter,
    InvalidScale,
    NonCommuting,
    NonSingular,
    NotConstructible,
    SamePoint,
    TrivialCommutant,
)
from .operators import (
    BCKind,
    BoundaryCondition,
    EigenPair,
    OperatorParams,
    eigenpairs,
    robin_eigenpairs,
)

MATCH_RTOL = 1e-9
RATIO_RTOL = 1e-12
DEFAULT_N_MAX = 32


class Verdict(str, Enum):
    R = "DistinguishableR"
    AI = "DistinguishableAI"
    ANI = "IndistinguishableANI"


@dataclass(frozen=True)
class PairClassification:
    verdict: Verdict
    witness: EigenPair | None
    auxiliary: OperatorParams
    notes: tuple[str, ...]
    A1: OperatorParams
    A2: OperatorParams
    bc: BoundaryCondition
    nearest_gap: float | None = None

    def to_dict(self) -> dict:
        out = {
            "verdict": self.verdict.value,
            "A1": dict(zip("dbc", self.A1.astuple())),
            "A2": dict(zip("dbc", self.A2.astuple())),
            "auxiliary": dict(zip("dbc", self.auxiliary.astuple())),
            "bc": _bc_dict(self.bc),
            "notes": list(self.notes),
            "nearest_gap": self.nearest_gap,
            "witness": None,
        }
        if self.witness is not None:
            w = self.witness
            out["witness"] = {
                "n": w.n,
                "lambda": w.lam,
                "multiplicity": w.multiplicity,
                "positive": w.positive,
                "eigenfunction": {k: float(v) for k, v in w.descriptor.items() if k != "family"}
                | {"family": w.family},
            }
        return out


def _bc_dict(bc: BoundaryCondition) -> dict:
    return {"kind": bc.kind.value, "sigma": bc.sigma, "length": bc.length}


def canonical_order(A1: OperatorParams, A2: OperatorParams):
    """Order a pair so that ``d1 >= d2``; ties are broken lexicographically.

    Using a total order (rather than swapping only when ``d1 < d2``) makes the
    classification of ``(A1, A2)`` and ``(A2, A1)`` literally identical.
    """
    if A1.astuple() < A2.astuple():
        return A2, A1
    return A1, A2


def drift_ratio_holds(A1: OperatorParams, A2: OperatorParams) -> bool:
    """``d1/d2 = b1/b2`` in cross-multiplied form."""
    p, q = A1.d * A2.b, A2.d * A1.b
    return abs(p - q) < RATIO_RTOL * max(abs(p), abs(q), 1.0)


def _matches(c: float, lam: float) -> bool:
    return abs(c - lam) / max(1.0, abs(lam)) < MATCH_RTOL


def classify_pair(
    A1: OperatorParams,
    A2: OperatorParams,
    bc: BoundaryCondition,
    n_max: int = DEFAULT_N_MAX,
    nonnegative_only: bool = False,
) -> PairClassification:
    """Place ``(A1, A2)`` in R, A_I or A_NI.

    ``nonnegative_only`` keeps only witnesses with a sign-definite eigenfunction,
    for observables known to be nonnegative.
    """
    if A1 == A2:
        raise SamePoint("A1 and A2 are the same parameter point")
    if n_max < 1:
        raise InvalidParameter(f"n_max must be >= 1, got {n_max}")
    A1, A2 = canonical_order(A1, A2)
    aux = OperatorParams(A1.d - A2.d, A1.b - A2.b, A1.c - A2.c)
    d, b, c = aux.astuple()

    def done(verdict, witness=None, notes=(), gap=None):
        return PairClassification(verdict, witness, aux, tuple(notes), A1, A2, bc, gap)

    def finish(witness, gap=None, extra=()):
        if nonnegative_only and not witness.positive:
            return done(Verdict.AI, witness, (*extra, "nonpositive_witness_filtered"), gap)
        return done(Verdict.ANI, witness, extra, gap)

    kind = bc.kind
    if d == 0:
        if kind is BCKind.DIRICHLET:
            # b u' + c u = 0 with u(0) = u(l) = 0 forces u = 0
            return done(Verdict.R, notes=("degenerate_dirichlet_trivial_kernel",))
        if kind is BCKind.ROBIN:
            w = robin_eigenpairs(0.0, b, bc.sigma, bc.length)[0]
            if _matches(c, w.lam):
                return finish(w, abs(c - w.lam), ("robin_degenerate_pair",))
            return done(Verdict.R, notes=("no_eigenvalue_match",), gap=abs(c - w.lam))
        # Neumann and periodic: only constants survive b u' = -c u
        if c == 0:
            return finish(_constant_pair(d, b, bc), 0.0, ("constant_mode",))
        return done(Verdict.R, notes=("no_eigenvalue_match",), gap=abs(c))

    if kind is BCKind.PERIODIC and b != 0:
        # the nonconstant spectrum is complex and cannot equal a real c
        if c == 0:
            return finish(_constant_pair(d, b, bc), 0.0, ("constant_mode",))
        return done(Verdict.R, notes=("periodic_drift_complex_spectrum",), gap=abs(c))

    pairs = eigenpairs(d, b, bc, n_max)
    lams = np.array([p.lam for p in pairs])
    rel = np.abs(c - lams) / np.maximum(1.0, np.abs(lams))
    j = int(np.argmin(rel))
    gap = float(rel[j])
    notes = []
    if c > lams[-1] and not _matches(c, lams[-1]):
        notes.append("search_depth_exceeded")
    if not _matches(c, lams[j]):
        return done(Verdict.R, notes=("no_eigenvalue_match", *notes), gap=gap)

    w = pairs[j]
    if w.family == "constant":
        return finish(w, gap, ("constant_mode", *notes))
    if kind is BCKind.PERIODIC:
        # b1 = b2 here, so a common shift x -> x + b t serves both models
        return finish(w, gap, ("travelling_fourier_family", *notes))
    if not drift_ratio_holds(A1, A2):
        return done(Verdict.AI, w, ("drift_ratio_violated", *notes), gap)
    return finish(w, gap, notes)


def _constant_pair(d: float, b: float, bc: BoundaryCondition) -> EigenPair:
    return EigenPair(0, 0.0, "constant", {}, 1, True, d, b, bc)


# -- set A ----------------------------------------------------------------------

@dataclass(frozen=True)
class ASetSample:
    n: int
    d: float
    b: float
    c: float
    positive: bool


def indistinguishable_set(bc: BoundaryCondition, n_max: int, d_grid, b_grid) -> list[ASetSample]:
    """Samples ``c = lam_n(d, b)`` of the candidate set over a ``(d, b)`` grid.

    Nodes where the auxiliary operator has no eigenpairs of the requested kind
    (Dirichlet with ``d = 0``, periodic nonconstant modes with drift) are skipped.
    """
    d_grid = np.asarray(d_grid, dtype=float).ravel()
    b_grid = np.asarray(b_grid, dtype=float).ravel()
    if not (np.all(np.isfinite(d_grid)) and np.all(np.isfinite(b_grid))):
        raise InvalidParameter("grids must be finite")
    if np.any(d_grid < 0):
        raise InvalidParameter("d grid must be >= 0")
    if n_max < 1:
        raise InvalidParameter(f"n_max must be >= 1, got {n_max}")
    out = []
    for d in d_grid:
        for b in b_grid:
            if bc.kind is BCKind.DIRICHLET and d == 0:
                continue
            if bc.kind is BCKind.PERIODIC and (d == 0 or b != 0):
                ps = [_constant_pair(d, b, bc)]
            else:
                ps = eigenpairs(float(d), float(b), bc, n_max)
            for p in ps:
                out.append(ASetSample(p.n, float(d), float(b), p.lam, p.positive))
    return out


# -- constructions ---------------------------------------------------------------

@dataclass(frozen=True)
class NonIdentifiableSolution:
    """``u(x, t) = c0 exp(mu t) phi_n(x)`` solving both models.

    For periodic modes the solution is ``exp(mu t) [g1 cos n(x + v t) + g2 sin n(x + v t)]``
    with ``v`` the shared drift; ``gamma`` holds ``(g1, g2)``.
    """

    mode: EigenPair
    growth_rate: float
    amplitude: float
    params_pair: tuple[OperatorParams, OperatorParams]
    positive: bool
    bc: BoundaryCondition
    gamma: tuple[float, float] | None = None
    speed: float = 0.0

    @property
    def formula(self) -> str:
        if self.gamma is not None:
            k = self.mode.params["k"]
            return (f"exp({self.growth_rate:.17g} t) * ({self.gamma[0]:.17g} cos({k:g}(x + {self.speed:.17g} t))"
                    f" + {self.gamma[1]:.17g} sin({k:g}(x + {self.speed:.17g} t)))")
        return f"{self.amplitude:.17g} * exp({self.growth_rate:.17g} t) * phi_{self.mode.n}(x)"

    def rates(self) -> tuple[float, float]:
        """Characteristic inverse time and inverse length of the solution."""
        w = self.mode
        if w.family == "constant":
            kx = 0.0
        elif w.family == "exponential":
            kx = 1.0 / abs(w.params["sigma"])
        else:
            kx = math.sqrt(abs(w.lam) / w.d) + abs(w.b / w.d)
        return abs(self.growth_rate) + abs(self.speed) * kx, kx

    def __call__(self, x, t):
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        growth = np.exp(self.growth_rate * t)
        if self.gamma is not None:
            k = self.mode.params["k"]
            arg = k * (x + self.speed * t)
            return growth * (self.gamma[0] * np.cos(arg) + self.gamma[1] * np.sin(arg))
        return self.amplitude * growth * self.mode(x)


def growth_rate(A1: OperatorParams, w: EigenPair, bc: BoundaryCondition) -> float:
    """Exponent of the shared solution seen from model ``A1``."""
    if w.family == "constant":
        return A1.c
    if w.family == "exponential":
        s = bc.sigma
        return A1.d / s**2 - A1.b / s + A1.c
    # eigenvalues scale with d at fixed b/d, which both models share with the witness
    return A1.c - A1.d / w.d * w.lam


def construct_nonidentifiable(
    A1: OperatorParams,
    A2: OperatorParams,
    bc: BoundaryCondition,
    c0: float = 1.0,
    n_max: int = DEFAULT_N_MAX,
    nonnegative_only: bool = False,
    gamma: tuple[float, float] | None = None,
) -> NonIdentifiableSolution:
    """Closed-form solution shared by ``A1`` and ``A2`` (requires verdict A_NI)."""
    cls = classify_pair(A1, A2, bc, n_max, nonnegative_only)
    if cls.verdict is not Verdict.ANI:
        raise NotConstructible(
            f"pair is {cls.verdict.value} ({', '.join(cls.notes) or 'no witness'})"
        )
    w = cls.witness
    B1, B2 = cls.A1, cls.A2
    mu = growth_rate(B1, w, bc)
    mu2 = growth_rate(B2, w, bc)
    # the two exponents differ only by the eigenvalue match error
    if abs(mu - mu2) > 10 * MATCH_RTOL * max(1.0, abs(w.lam), abs(mu)):
        raise NotConstructible(f"growth rates disagree: {mu} vs {mu2}")
    if w.family == "fourier":
        g = (float(c0), 0.0) if gamma is None else (float(gamma[0]), float(gamma[1]))
        return NonIdentifiableSolution(w, mu, float(c0), (B1, B2), w.positive, bc, g, B1.b)
    return NonIdentifiableSolution(w, mu, float(c0), (B1, B2), w.positive, bc)


def pde_residual(sol, A: OperatorParams, n_x: int = 201, n_t: int = 201,
                 t_end: float = 1.0, step_t: float = 5e-3, step_x: float = 5e-3) -> float:
    """Max of ``|u_t - L[A] u|`` at the nodes of an ``n_x`` by ``n_t`` grid.

    Derivatives are fourth-order central differences of the closed form with
    spacings ``step_t`` and ``step_x`` measured in units of the solution's own
    time and length scales; the defaults balance truncation against roundoff.
    """
    length = sol.bc.length
    x = np.linspace(0.0, length, n_x)[:, None]
    t = np.linspace(0.0, t_end, n_t)[None, :]
    rt, rx = sol.rates()
    hx = step_x * min(length, 1.0 / max(rx, 1e-300))
    ht = step_t / max(1.0, rt)
    u = sol(x, t)
    ut = (-sol(x, t + 2 * ht) + 8 * sol(x, t + ht) - 8 * sol(x, t - ht) + sol(x, t - 2 * ht)) / (12 * ht)
    up, um = sol(x + hx, t), sol(x - hx, t)
    upp, umm = sol(x + 2 * hx, t), sol(x - 2 * hx, t)
    ux = (-upp + 8 * up - 8 * um + umm) / (12 * hx)
    uxx = (-upp + 16 * up - 30 * u + 16 * um - umm) / (12 * hx**2)
    r = ut - (A.d * uxx + A.b * ux + A.c * u)
    return float(np.max(np.abs(r)))


# -- two species -------------------------------------------------------------------

@dataclass(frozen=True)
class SystemParams:
    d_u: float
    d_v: float
    a11: float
    a12: float
    a21: float
    a22: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("d_u", "d_v", "a11", "a12", "a21", "a22")}


@dataclass(frozen=True)
class SystemNonIdentifiable:
    params: SystemParams
    scalar: NonIdentifiableSolution
    kappa_u: float
    kappa_v: float
    delta: tuple[float, float]

    def __call__(self, x, t):
        w = self.scalar(x, t)
        return self.kappa_u * w, self.kappa_v * w


def construct_system_nonidentifiable(
    A1: OperatorParams,
    A2: OperatorParams,
    bc: BoundaryCondition,
    kappa_u: float,
    kappa_v: float,
    delta1: float,
    delta2: float,
    c0: float = 1.0,
) -> SystemNonIdentifiable:
    """Two-species system whose solution ``(kappa_u w, kappa_v w)`` carries the scalar twin ``w``.

    ``w`` solves ``w_t = d1 w'' + c1 w`` and ``w_t = d2 w'' + c2 w``; the
    coupling ``(delta1, delta2)`` is free, giving a continuous family.
    """
    for name, v in (("kappa_u", kappa_u), ("kappa_v", kappa_v), ("delta1", delta1), ("delta2", delta2)):
        if not (math.isfinite(v) and v > 0):
            raise InvalidScale(f"{name} must be a positive finite number, got {v}")
    if A1.b != 0 or A2.b != 0:
        raise InvalidParameter("the two-species construction needs b = 0 in both points")
    sol = construct_nonidentifiable(A1, A2, bc, c0)
    # species u follows A1 and species v follows A2, in the caller's order
    p = SystemParams(
        d_u=A1.d,
        d_v=A2.d,
        a11=A1.c + delta1,
        a12=delta1 * kappa_u / kappa_v,
        a21=delta2 * kappa_v / kappa_u,
        a22=A2.c + delta2,
    )
    return SystemNonIdentifiable(p, sol, float(kappa_u), float(kappa_v), (float(delta1), float(delta2)))


def system_residual(sys_sol: SystemNonIdentifiable, n_x: int = 201, n_t: int = 201,
                    t_end: float = 1.0, step_t: float = 1e-5, step_x: float = 2e-4) -> float:
    """Max residual of both equations of the coupled system on a space-time grid."""
    p = sys_sol.params
    length = sys_sol.scalar.bc.length
    x = np.linspace(0.0, length, n_x)[:, None]
    t = np.linspace(0.0, t_end, n_t)[None, :]
    rt, rx = sys_sol.scalar.rates()
    hx = step_x * min(length, 1.0 / max(rx, 1e-300))
    ht = step_t / max(1.0, rt)
    u, v = sys_sol(x, t)
    up, vp = sys_sol(x, t + ht)
    um, vm = sys_sol(x, t - ht)
    ul, vl = sys_sol(x - hx, t)
    ur, vr = sys_sol(x + hx, t)
    ru = (up - um) / (2 * ht) - p.d_u * (ur - 2 * u + ul) / hx**2 - (p.a11 * u - p.a12 * v)
    rv = (vp - vm) / (2 * ht) - p.d_v * (vr - 2 * v + vl) / hx**2 - (-p.a21 * u + p.a22 * v)
    return float(max(np.max(np.abs(ru)), np.max(np.abs(rv))))


# -- 2x2 ODE commutant demo ----------------------------------------------------------

def commutant_basis(M1) -> np.ndarray:
    """Basis of ``{M : M1 M = M M1}`` as an array of 2x2 matrices."""
    M1 = np.asarray(M1, dtype=float)
    if M1.shape != (2, 2):
        raise InvalidParameter("only 2x2 matrices are supported")
    eye = np.eye(2)
    # row-major vec: vec(M1 M) = (M1 kron I) vec M, vec(M M1) = (I kron M1^T) vec M
    K = np.kron(M1, eye) - np.kron(eye, M1.T)
    N = linalg.null_space(K)
    return np.array([N[:, j].reshape(2, 2) for j in range(N.shape[1])])


def singular_commutant_params(M1, b: float = 1.0) -> tuple[float, float]:
    """Both values of ``a`` making ``a I + b (M1 - M1[0,0] I)`` singular."""
    M1 = np.asarray(M1, dtype=float)
    K = M1 - M1[0, 0] * np.eye(2)
    tr, det = np.trace(K), np.linalg.det(K)
    disc = tr * tr - 4 * det
    if disc < 0:
        raise NonSingular("no real singular member of the form a I + b K exists")
    r = math.sqrt(disc)
    return b * (-tr + r) / 2, b * (-tr - r) / 2


def ode_commutant_pair(M1, free: tuple[float, float]) -> tuple[np.ndarray, np.ndarray]:
    """Singular commuting ``M = a I + b (M1 - M1[0,0] I)`` and a unit kernel vector.

    ``free = (a, b)`` must make ``det M`` vanish; for ``M1 = [[2,3],[1,4]]`` this
    is ``a (a + 2b) = 3 b^2``.
    """
    M1 = np.asarray(M1, dtype=float)
    a, b = map(float, free)
    M = a * np.eye(2) + b * (M1 - M1[0, 0] * np.eye(2))
    return M, kernel_vector(M1, M)


def kernel_vector(M1, M) -> np.ndarray:
    M1 = np.asarray(M1, dtype=float)
    M = np.asarray(M, dtype=float)
    scale = max(1.0, float(np.max(np.abs(M))), float(np.max(np.abs(M1))))
    if float(np.max(np.abs(M))) == 0.0:
        raise TrivialCommutant("M = 0 gives no second model")
    if np.max(np.abs(M1 @ M - M @ M1)) > 1e-12 * scale**2:
        raise NonCommuting("M does not commute with M1")
    if abs(np.linalg.det(M)) > 1e-12 * scale**2:
        raise NonSingular(f"det M = {np.linalg.det(M):.3g} is not zero")
    x0 = linalg.null_space(M, rcond=1e-10)[:, 0]
    i = int(np.argmax(np.abs(x0)))
    return x0 * math.copysign(1.0, x0[i])


def ode_trajectories(M, X0, t_grid) -> np.ndarray:
    """``exp(M t) X0`` at each time, shape ``(len(t), 2)``."""
    M = np.asarray(M, dtype=float)
    X0 = np.asarray(X0, dtype=float)
    return np.array([linalg.expm(M * t) @ X0 for t in np.asarray(t_grid, dtype=float)])


def ode_twin(M1, M2, X0, t_grid) -> tuple[np.ndarray, np.ndarray]:
    """Trajectories of ``x' = M1 x`` and ``x' = M2 x`` from the same ``X0``."""
    return ode_trajectories(M1, X0, t_grid), ode_trajectories(M2, X0, t_grid)
