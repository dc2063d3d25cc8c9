"""Practical identifiability of ``(c, d)`` from noisy snapshots of the linear
Dirichlet model.

Observations are ``y(x_i, t_j) = u(x_i, t_j) + eps`` with noise that is
Gaussian, correlated in space through ``sigma^2 exp(-eta |x - x'|)`` and
independent across times. The mean is linear in the eigen-coefficients ``C``,
so for each ``(c, d)`` the likelihood is maximised over ``C`` in closed form by
generalised least squares, giving a profile likelihood surface.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, linalg, optimize, stats

from .errors import CholeskyFailure, GridMismatch, InvalidParameter
from .operators import BoundaryCondition, OperatorParams
from .solve import EigenExpansionIC, solve_linear_spectral

#: chi-square(2) 95% quantile halved: likelihood-ratio cut for a 2D region
THRESHOLD_95 = float(stats.chi2.ppf(0.95, 2) / 2)
COND_LIMIT = 1e12


@dataclass(frozen=True)
class NoiseModel:
    sigma: float
    eta: float

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise InvalidParameter(f"noise sigma must be > 0, got {self.sigma}")
        if not (math.isfinite(self.eta) and self.eta >= 0):
            raise InvalidParameter(f"noise eta must be >= 0, got {self.eta}")

    def covariance(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.sigma**2 * np.exp(-self.eta * np.abs(x[:, None] - x[None, :]))

    def cholesky(self, x) -> np.ndarray:
        """Lower Cholesky factor of one time slice's covariance."""
        x = np.asarray(x, dtype=float)
        if np.unique(x).size != x.size:
            raise CholeskyFailure("repeated observation positions make the covariance singular")
        try:
            return np.linalg.cholesky(self.covariance(x))
        except np.linalg.LinAlgError as exc:
            raise CholeskyFailure(str(exc)) from exc


@dataclass(frozen=True)
class Dataset:
    x_obs: np.ndarray
    t_obs: np.ndarray
    y: np.ndarray  # shape (len(t_obs), len(x_obs))
    seed: int | None
    truth: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.shape != (np.size(self.t_obs), np.size(self.x_obs)):
            raise GridMismatch("observation matrix does not match the grids")
        if not np.all(np.isfinite(y)):
            raise InvalidParameter("observations must be finite")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "t", "y"])
        for j, t in enumerate(self.t_obs):
            for i, x in enumerate(self.x_obs):
                w.writerow([f"{x:.17g}", f"{t:.17g}", f"{self.y[j, i]:.17g}"])
        return buf.getvalue()


def default_x_obs() -> np.ndarray:
    return np.round(np.arange(11) * 0.1, 12)


def default_t_obs() -> np.ndarray:
    return np.round(np.arange(21) * 0.1, 12)


def default_c_grid() -> np.ndarray:
    return np.linspace(0.0, 4.0, 81)


def default_d_grid() -> np.ndarray:
    return np.logspace(-3, 0, 81)


# -- initial condition -----------------------------------------------------------

def gaussian_bump(omega: float, length: float = 1.0):
    """``g(x)`` shifted and scaled so ``g(0) = g(l) = 0`` and ``g(l/2) = 1``."""
    if not (math.isfinite(omega) and omega > 0):
        raise InvalidParameter(f"omega must be > 0, got {omega}")
    mid = 0.5 * length
    G0 = math.exp(-(mid**2) / (2 * omega**2))
    denom = 1.0 - G0

    def g(x):
        x = np.asarray(x, dtype=float)
        return (np.exp(-((x - mid) ** 2) / (2 * omega**2)) - G0) / denom

    return g


def gaussian_ic_coefficients(omega: float, N: int = 8, length: float = 1.0) -> EigenExpansionIC:
    """Sine coefficients ``C_n = (2/l) int_0^l g(x) sin(n pi x / l) dx``, ``n = 1..N``."""
    if N < 1:
        raise InvalidParameter(f"N must be >= 1, got {N}")
    if not (math.isfinite(length) and length > 0):
        raise InvalidParameter(f"length must be > 0, got {length}")
    g = gaussian_bump(omega, length)
    coeffs = []
    for n in range(1, N + 1):
        k = n * math.pi / length
        val, _ = integrate.quad(lambda x: float(g(x)) * math.sin(k * x), 0.0, length,
                                epsabs=1e-14, epsrel=1e-10, limit=200)
        coeffs.append(2.0 / length * val)
    return EigenExpansionIC(tuple(coeffs), BoundaryCondition.dirichlet(length))


# -- data ---------------------------------------------------------------------------

def slice_rng(seed: int, j: int) -> np.random.Generator:
    """Counter-based generator for time slice ``j``; independent of draw order."""
    return np.random.Generator(np.random.Philox(key=int(seed), counter=[0, 0, 0, int(j)]))


def generate_dataset(A: OperatorParams, ic: EigenExpansionIC, noise: NoiseModel | None,
                     x_obs=None, t_obs=None, seed: int = 0) -> Dataset:
    """Exact solution on the observation grid plus correlated Gaussian noise.

    ``noise=None`` gives noiseless data.
    """
    if A.b != 0:
        raise InvalidParameter("data generation models the drift-free Dirichlet problem")
    if ic.bc.kind.value != "dirichlet":
        raise InvalidParameter("data generation needs a Dirichlet expansion")
    x = default_x_obs() if x_obs is None else np.asarray(x_obs, dtype=float)
    t = default_t_obs() if t_obs is None else np.asarray(t_obs, dtype=float)
    if seed is None or int(seed) < 0:
        raise InvalidParameter("seed must be a nonnegative integer")
    mean = solve_linear_spectral(A, ic.bc, ic, x, t).values
    y = mean.copy()
    if noise is not None:
        L = noise.cholesky(x)
        for j in range(t.size):
            z = slice_rng(seed, j).standard_normal(x.size)
            y[j] += L @ z
    truth = {"c": A.c, "d": A.d, "C": list(ic.coefficients),
             "sigma": None if noise is None else noise.sigma,
             "eta": None if noise is None else noise.eta}
    return Dataset(x, t, y, int(seed), truth)


# -- likelihood -------------------------------------------------------------------------

def _basis(x, N, length):
    n = np.arange(1, N + 1)
    k = n * math.pi / length
    return np.sin(np.outer(x, k)), k * k


def _mean(x, t, c, d, C, length):
    Phi, lam = _basis(x, len(C), length)
    E = np.exp(np.outer(t, c - d * lam))
    return (E * np.asarray(C)[None, :]) @ Phi.T


def log_likelihood(data: Dataset, c: float, d: float, C, noise: NoiseModel,
                   length: float = 1.0) -> float:
    """Exact Gaussian log-likelihood, one Cholesky factor shared by all slices."""
    C = np.asarray(C, dtype=float)
    L = noise.cholesky(data.x_obs)
    r = data.y - _mean(data.x_obs, data.t_obs, c, d, C, length)
    w = linalg.solve_triangular(L, r.T, lower=True)
    T, n = data.y.shape
    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    return float(-0.5 * np.sum(w * w) - 0.5 * T * logdet - 0.5 * T * n * math.log(2 * math.pi))


@dataclass
class _Whitened:
    Phi: np.ndarray      # (K|1, nx, N)
    Y: np.ndarray        # (K|1, nx, nt)
    logdet: np.ndarray   # (K|1,)


def _whiten(data: Dataset, L: np.ndarray, N: int, length: float) -> _Whitened:
    Phi, _ = _basis(data.x_obs, N, length)
    if L.ndim == 2:
        L = L[None]
    Pw = np.linalg.solve(L, np.broadcast_to(Phi, (L.shape[0],) + Phi.shape))
    Yw = np.linalg.solve(L, np.broadcast_to(data.y.T, (L.shape[0],) + data.y.T.shape))
    logdet = 2.0 * np.sum(np.log(np.diagonal(L, axis1=1, axis2=2)), axis=1)
    return _Whitened(Pw, Yw, logdet)


def _gls(wh: _Whitened, t, lam, c, d):
    """Profile log-likelihood and GLS coefficients for each node ``(c[k], d[k])``."""
    c = np.asarray(c, dtype=float)
    d = np.asarray(d, dtype=float)
    mu = c[:, None] - d[:, None] * lam[None, :]
    E = np.exp(t[None, :, None] * mu[:, None, :])          # (K, nt, N)
    G = np.einsum("kin,kim->knm", wh.Phi, wh.Phi)          # (K|1, N, N)
    M = G * np.einsum("kjn,kjm->knm", E, E)
    P = np.einsum("kin,kij->knj", wh.Phi, wh.Y)           # (K|1, N, nt)
    r = np.einsum("knj,kjn->kn", np.broadcast_to(P, (len(c),) + P.shape[1:]), E)
    yy = np.einsum("kij,kij->k", wh.Y, wh.Y)
    cond = np.linalg.cond(M)
    ill = ~np.isfinite(cond) | (cond > COND_LIMIT)
    Ms = M.copy()
    if np.any(ill):
        top = np.linalg.eigvalsh(M[ill])[:, -1]
        ridge = np.maximum(top, np.finfo(float).tiny) / COND_LIMIT
        idx = np.nonzero(ill)[0]
        Ms[idx] += ridge[:, None, None] * np.eye(M.shape[-1])[None]
    C = np.linalg.solve(Ms, r[..., None])[..., 0]
    rss = yy - 2 * np.einsum("kn,kn->k", C, r) + np.einsum("kn,knm,km->k", C, M, C)
    rss = np.maximum(rss, 0.0)
    T = t.size
    nx = wh.Y.shape[1]
    ll = -0.5 * rss - 0.5 * T * wh.logdet - 0.5 * T * nx * math.log(2 * math.pi)
    return ll, C, ill


@dataclass(frozen=True)
class ProfileSurface:
    c_grid: np.ndarray
    d_grid: np.ndarray
    loglik: np.ndarray          # (len(c), len(d)), max 0
    mask95: np.ndarray
    mle: dict
    ill_conditioned: np.ndarray
    raw_max: float
    threshold: float = THRESHOLD_95
    noise_profiled: bool = False

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["c", "d", "loglik", "in95"])
        for i, c in enumerate(self.c_grid):
            for j, d in enumerate(self.d_grid):
                w.writerow([f"{c:.17g}", f"{d:.17g}", f"{self.loglik[i, j]:.17g}",
                            int(self.mask95[i, j])])
        return buf.getvalue()

    def mle_json(self) -> str:
        return json.dumps(self.mle, indent=2, sort_keys=True) + "\n"


class _Profiler:
    """Evaluates the (c, d) profile for one dataset, optionally maximising over noise."""

    def __init__(self, data: Dataset, noise: NoiseModel, N: int, length: float,
                 profile_noise: bool = False, eta_bounds=(1e-2, 1e3)):
        self.data = data
        self.noise = noise
        self.N = N
        self.length = length
        self.t = np.asarray(data.t_obs, dtype=float)
        self.lam = (np.arange(1, N + 1) * math.pi / length) ** 2
        self.profile_noise = profile_noise
        self.eta_bounds = eta_bounds
        if not profile_noise:
            self.wh = _whiten(data, noise.cholesky(data.x_obs), N, length)

    def __call__(self, c, d):
        c = np.atleast_1d(np.asarray(c, dtype=float))
        d = np.atleast_1d(np.asarray(d, dtype=float))
        if not self.profile_noise:
            return _gls(self.wh, self.t, self.lam, c, d)
        return self._joint(c, d)

    def _joint_at(self, eta, c, d):
        """Profile over C and sigma at per-node ``eta``."""
        x = self.data.x_obs
        R = np.exp(-eta[:, None, None] * np.abs(x[None, :, None] - x[None, None, :]))
        L = np.linalg.cholesky(R)
        wh = _whiten(self.data, L, self.N, self.length)
        ll_unit, C, ill = _gls(wh, self.t, self.lam, c, d)
        T, nx = self.data.y.shape
        n = T * nx
        # with sigma = 1 the profile is -rss/2 - T logdet/2 - n log(2 pi)/2
        rss = -2 * (ll_unit + 0.5 * T * wh.logdet + 0.5 * n * math.log(2 * math.pi))
        s2 = np.maximum(rss / n, np.finfo(float).tiny)
        ll = -0.5 * n * np.log(2 * math.pi * s2) - 0.5 * T * wh.logdet - 0.5 * n
        return ll, C, ill, s2

    def _joint(self, c, d, iters: int = 60):
        lo = np.full(c.size, math.log(self.eta_bounds[0]))
        hi = np.full(c.size, math.log(self.eta_bounds[1]))
        phi = (math.sqrt(5) - 1) / 2
        a = hi - phi * (hi - lo)
        b = lo + phi * (hi - lo)
        fa = self._joint_at(np.exp(a), c, d)[0]
        fb = self._joint_at(np.exp(b), c, d)[0]
        for _ in range(iters):
            left = fa > fb
            hi = np.where(left, b, hi)
            lo = np.where(left, lo, a)
            na = hi - phi * (hi - lo)
            nb = lo + phi * (hi - lo)
            a, b = na, nb
            fa = self._joint_at(np.exp(a), c, d)[0]
            fb = self._joint_at(np.exp(b), c, d)[0]
        eta = np.exp(0.5 * (lo + hi))
        ll, C, ill, s2 = self._joint_at(eta, c, d)
        self.last_noise = (np.sqrt(s2), eta)
        return ll, C, ill

    def refine(self, c0: float, d0: float):
        """Continuous maximiser starting from a grid node, in ``(c, log d)``."""
        def neg(p):
            return -float(self(p[0], math.exp(p[1]))[0][0])

        res = optimize.minimize(neg, [c0, math.log(d0)], method="Nelder-Mead",
                                options={"xatol": 1e-9, "fatol": 1e-11, "maxiter": 4000})
        c, d = float(res.x[0]), math.exp(float(res.x[1]))
        ll, C, _ = self(c, d)
        return c, d, C[0], float(ll[0])


def profile_likelihood(data: Dataset, c_grid=None, d_grid=None, noise: NoiseModel | None = None,
                       N: int = 8, length: float = 1.0, profile_noise: bool = False,
                       refine: bool = True) -> ProfileSurface:
    """Bivariate profile likelihood over ``(c, d)`` with ``C`` (and optionally noise) profiled out."""
    c_grid = default_c_grid() if c_grid is None else np.asarray(c_grid, dtype=float).ravel()
    d_grid = default_d_grid() if d_grid is None else np.asarray(d_grid, dtype=float).ravel()
    if not (np.all(np.isfinite(c_grid)) and np.all(np.isfinite(d_grid))):
        raise InvalidParameter("grids must be finite")
    if np.any(d_grid <= 0):
        raise InvalidParameter("d grid must be > 0")
    if N < 1:
        raise InvalidParameter(f"N must be >= 1, got {N}")
    if noise is None:
        if data.truth.get("sigma") is None:
            raise InvalidParameter("noise model required")
        noise = NoiseModel(data.truth["sigma"], data.truth["eta"])
    prof = _Profiler(data, noise, N, length, profile_noise)
    cc, dd = np.meshgrid(c_grid, d_grid, indexing="ij")
    ll, C, ill = prof(cc.ravel(), dd.ravel())
    ll = ll.reshape(cc.shape)
    ill = ill.reshape(cc.shape)
    i, j = np.unravel_index(int(np.argmax(ll)), ll.shape)
    top = float(ll[i, j])
    norm = ll - top
    mle = {"c": float(c_grid[i]), "d": float(d_grid[j]),
           "C": [float(v) for v in C.reshape(cc.shape + (N,))[i, j]],
           "loglik": top, "threshold": THRESHOLD_95, "refined": False}
    if refine:
        c_r, d_r, C_r, ll_r = prof.refine(float(c_grid[i]), float(d_grid[j]))
        if ll_r >= top:
            mle = {"c": c_r, "d": d_r, "C": [float(v) for v in C_r], "loglik": ll_r,
                   "threshold": THRESHOLD_95, "refined": True}
    mle["ill_conditioned_nodes"] = int(np.count_nonzero(ill))
    if profile_noise:
        mle["noise_profiled"] = True
    return ProfileSurface(c_grid, d_grid, norm, norm >= -THRESHOLD_95, mle, ill, top,
                          THRESHOLD_95, profile_noise)


def profile_value(data: Dataset, c: float, d: float, noise: NoiseModel, N: int = 8,
                  length: float = 1.0) -> float:
    """Profile log-likelihood at a single ``(c, d)``."""
    prof = _Profiler(data, noise, N, length)
    return float(prof(c, d)[0][0])


def covers(data: Dataset, c: float, d: float, noise: NoiseModel, N: int = 8,
           length: float = 1.0, surface: ProfileSurface | None = None) -> bool:
    """Whether ``(c, d)`` lies in the 95% likelihood-ratio region.

    The reference maximum is the refined MLE of ``surface`` (computed if absent).
    """
    if surface is None:
        surface = profile_likelihood(data, noise=noise, N=N, length=length)
    return profile_value(data, c, d, noise, N, length) - surface.mle["loglik"] >= -THRESHOLD_95
