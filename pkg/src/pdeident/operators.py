"""Constant-coefficient operator ``L[A] = d u'' + b u' + c u`` on a 1D domain.

Eigenpairs are those of ``-L_1[A] phi = -d phi'' - b phi' = lam phi`` under one
of four boundary conditions. Closed forms are used where they exist; otherwise
eigenvalues are bracketed by a sign-change scan of a characteristic function
built from the fundamental solutions and refined by Brent's bracketed method.

Every eigenfunction is normalised so that ``max |phi| = 1`` and ``phi`` is
positive at its first extremum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import optimize

from .errors import (
    DegenerateOperator,
    InvalidDomain,
    InvalidParameter,
    InvalidSigma,
    OutOfDomain,
    RootScanExhausted,
    UnsupportedDrift,
)

TWO_PI = 2.0 * math.pi

SCAN_POINTS = 10_000
ROOT_RTOL = 1e-12
# extra mesh refinements tried when the oscillation count reveals missed roots
SCAN_REFINEMENTS = (10, 100)
# beyond this |b| l / d the boundary layer is below double-precision resolution
PECLET_MAX = 1e8


class BCKind(str, Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    ROBIN = "robin"
    PERIODIC = "periodic"


@dataclass(frozen=True)
class OperatorParams:
    """Parameter point ``(d, b, c)``: diffusion, drift, low-order rate."""

    d: float
    b: float = 0.0
    c: float = 0.0

    def __post_init__(self):
        for name in ("d", "b", "c"):
            v = getattr(self, name)
            if not isinstance(v, (int, float, np.floating, np.integer)) or not math.isfinite(v):
                raise InvalidParameter(f"{name} must be a finite real, got {v!r}")
            object.__setattr__(self, name, float(v))
        if self.d < 0:
            raise InvalidParameter(f"diffusion d must be >= 0, got {self.d}")

    def astuple(self) -> tuple[float, float, float]:
        return (self.d, self.b, self.c)


@dataclass(frozen=True)
class BoundaryCondition:
    """Boundary operator plus the domain it lives on.

    Robin uses ``u + sigma du/dnu`` with the outward normal, i.e.
    ``u - sigma u' = 0`` at ``x = 0`` and ``u + sigma u' = 0`` at ``x = length``.
    Periodic always lives on the torus of circumference ``2 pi``.
    """

    kind: BCKind
    sigma: float | None = None
    length: float = 1.0

    def __post_init__(self):
        kind = BCKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is BCKind.PERIODIC:
            if not math.isclose(self.length, 1.0) and not math.isclose(self.length, TWO_PI):
                raise InvalidDomain("periodic domain is fixed to the torus R/2piZ")
            object.__setattr__(self, "length", TWO_PI)
        elif not (math.isfinite(self.length) and self.length > 0):
            raise InvalidDomain(f"domain length must be > 0, got {self.length}")
        if kind is BCKind.ROBIN:
            if self.sigma is None or not math.isfinite(self.sigma) or self.sigma == 0:
                raise InvalidSigma(
                    f"Robin needs a finite nonzero sigma, got {self.sigma!r}; "
                    "use the Dirichlet or Neumann kind for the limits"
                )
            object.__setattr__(self, "sigma", float(self.sigma))
        elif self.sigma is not None:
            raise InvalidSigma(f"sigma only applies to Robin, not {kind.value}")
        object.__setattr__(self, "length", float(self.length))

    @classmethod
    def dirichlet(cls, length: float = 1.0) -> BoundaryCondition:
        return cls(BCKind.DIRICHLET, length=length)

    @classmethod
    def neumann(cls, length: float = 1.0) -> BoundaryCondition:
        return cls(BCKind.NEUMANN, length=length)

    @classmethod
    def robin(cls, sigma: float, length: float = 1.0) -> BoundaryCondition:
        return cls(BCKind.ROBIN, sigma=sigma, length=length)

    @classmethod
    def periodic(cls) -> BoundaryCondition:
        return cls(BCKind.PERIODIC, length=TWO_PI)

    def contains(self, x, atol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        tol = atol * max(1.0, self.length)
        return bool(np.all((x >= -tol) & (x <= self.length + tol)))


# -- fundamental solutions ----------------------------------------------------
#
# Write phi = exp(-alpha x) g(x) with alpha = b / 2d. Then g'' + s g = 0 with
# s = lam/d - alpha^2. C and S are the solutions with C(0)=1, C'(0)=0 and
# S(0)=0, S'(0)=1; they are continuous in s across s = 0, so one scan covers the
# oscillatory (s > 0) and hyperbolic (s < 0) regimes alike. In the hyperbolic
# regime they are returned up to a positive factor, which is all a sign scan needs.

def _cs(x, s):
    x = np.asarray(x, dtype=float)
    s = np.asarray(s, dtype=float)
    x, s = np.broadcast_arrays(x, s)
    C = np.ones_like(x)
    S = x.copy()
    pos = s > 0
    neg = s < 0
    if np.any(pos):
        k = np.sqrt(s[pos])
        C[pos] = np.cos(k * x[pos])
        S[pos] = np.sin(k * x[pos]) / k
    if np.any(neg):
        # cosh and sinh scaled by exp(-k x): a positive factor shared by C, S
        # and their derivatives at each x, so sign tests are unaffected
        k = np.sqrt(-s[neg])
        e = np.exp(-2.0 * k * x[neg])
        C[neg] = 0.5 * (1.0 + e)
        S[neg] = 0.5 * (1.0 - e) / k
    return C, S


def _g(x, s, g0, g1):
    """g, g' for g(0)=g0, g'(0)=g1."""
    C, S = _cs(x, s)
    return g0 * C + g1 * S, -s * g0 * S + g1 * C


def _bounded_basis(x, alpha, s, length):
    """Two solutions of ``phi'' + 2 alpha phi' + (alpha^2 + s) phi = 0``.

    Each is bounded by one on ``[0, length]``: exponentials are anchored at the
    endpoint where they peak, and the oscillatory pair carries a shifted
    ``exp(-alpha x)`` factor. Returns ``[(phi, phi', phi''), ...]``.
    """
    x = np.asarray(x, dtype=float)
    if s < 0:
        k = math.sqrt(-s)
        out = []
        for r in (-alpha - k, -alpha + k):
            z = np.exp(r * (x - (length if r > 0 else 0.0)))
            out.append((z, r * z, r * r * z))
        return out
    x_ref = length if alpha < 0 else 0.0
    e = np.exp(-alpha * (x - x_ref))
    if s > 0:
        k = math.sqrt(s)
        ys = [(np.cos(k * x), -k * np.sin(k * x)), (np.sin(k * x), k * np.cos(k * x))]
    else:
        ys = [(np.ones_like(x), np.zeros_like(x)), (x / length, np.ones_like(x) / length)]
    out = []
    for y, dy in ys:
        d2y = -s * y
        out.append((e * y, e * (dy - alpha * y), e * (d2y - 2 * alpha * dy + alpha * alpha * y)))
    return out


def _null_coefficients(alpha, s, length, left, right):
    """Coefficients ``(p, q)`` of the bounded basis meeting both boundary rows.

    ``left`` and ``right`` map ``(phi, phi')`` at an endpoint to the boundary
    functional.
    """
    z = _bounded_basis(np.array([0.0, length]), alpha, s, length)
    M = np.array([
        [left(z[0][0][0], z[0][1][0]), left(z[1][0][0], z[1][1][0])],
        [right(z[0][0][1], z[0][1][1]), right(z[1][0][1], z[1][1][1])],
    ])
    _, _, vt = np.linalg.svd(M)
    return float(vt[-1, 0]), float(vt[-1, 1])


# -- eigenpairs ---------------------------------------------------------------

@dataclass(frozen=True)
class EigenPair:
    """One eigenvalue of ``-L_1`` with a closed-form eigenfunction descriptor.

    ``family`` selects the formula; ``params`` holds its numbers. For periodic
    modes with ``n >= 1`` the eigenspace is ``{cos nx, sin nx}`` and
    :meth:`basis` returns both functions.
    """

    n: int
    lam: float
    family: str
    params: dict = field(compare=False)
    multiplicity: int
    positive: bool
    d: float
    b: float
    bc: BoundaryCondition
    # None defers the max-normalisation until the eigenfunction is first needed
    scale: float | None = field(default=1.0, compare=False)

    @property
    def norm(self) -> float:
        if self.scale is None:
            object.__setattr__(self, "scale", _normalise(self._raw_value, self.bc.length))
        return self.scale

    @property
    def descriptor(self) -> dict:
        return {"family": self.family, **self.params, "scale": self.norm}

    def _raw(self, x):
        p = self.params
        fam = self.family
        if fam == "constant":
            return np.ones_like(x), np.zeros_like(x), np.zeros_like(x)
        if fam == "exponential":
            sig = p["sigma"]
            v = np.exp(-x / sig)
            return v, -v / sig, v / sig**2
        if fam == "cosine":
            k = p["k"]
            return np.cos(k * x), -k * np.sin(k * x), -k * k * np.cos(k * x)
        if fam == "sine":
            k, a = p["k"], p["alpha"]
            e = np.exp(-a * x)
            sn, cs = np.sin(k * x), np.cos(k * x)
            v = e * sn
            dv = e * (k * cs - a * sn)
            d2v = e * ((a * a - k * k) * sn - 2 * a * k * cs)
            return v, dv, d2v
        if fam == "fundamental":
            z = _bounded_basis(x, p["alpha"], p["s"], self.bc.length)
            return tuple(p["p"] * u + p["q"] * w for u, w in zip(*z))
        raise ValueError(f"unknown eigenfunction family {fam!r}")

    def _raw_value(self, x):
        return self._raw(np.asarray(x, dtype=float))[0]

    def derivatives(self, x):
        """Return ``(phi, phi', phi'')`` of the first basis function at ``x``."""
        x = np.asarray(x, dtype=float)
        if self.family == "fourier":
            k = self.params["k"]
            return np.cos(k * x), -k * np.sin(k * x), -k * k * np.cos(k * x)
        v, dv, d2v = self._raw(x)
        k = self.norm
        return k * v, k * dv, k * d2v

    def __call__(self, x):
        return self.derivatives(x)[0]

    def basis(self, x) -> np.ndarray:
        """All eigenfunctions spanning the eigenspace, shape ``(multiplicity, len(x))``."""
        x = np.asarray(x, dtype=float)
        if self.family == "fourier":
            k = self.params["k"]
            return np.stack([np.cos(k * x), np.sin(k * x)])
        return self(x)[None, :]

    def sample(self, n_nodes: int = 1001) -> tuple[np.ndarray, np.ndarray]:
        x = np.linspace(0.0, self.bc.length, n_nodes)
        return x, self(x)


def _normalise(fn, length: float) -> float:
    """Scale making max|f| = 1 and f > 0 at its first extremum."""
    x = np.linspace(0.0, length, 4001)
    v = fn(x)
    av = np.abs(v)
    i = int(np.argmax(av))
    lo, hi = x[max(i - 1, 0)], x[min(i + 1, len(x) - 1)]
    res = optimize.minimize_scalar(
        lambda t: -abs(float(fn(np.array([t]))[0])),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-13 * length},
    )
    vmax = max(-res.fun, av[i])
    # first local maximum of |f| (endpoints count) that is not numerically zero
    floor = 1e-8 * vmax
    sign = 1.0
    for j in range(len(x)):
        left = av[j - 1] if j > 0 else -np.inf
        right = av[j + 1] if j + 1 < len(x) else -np.inf
        if av[j] > floor and av[j] >= left and av[j] >= right:
            sign = math.copysign(1.0, v[j])
            break
    return sign / vmax


def _check_common(d: float, length: float, n_max: int) -> None:
    if not (math.isfinite(length) and length > 0):
        raise InvalidDomain(f"domain length must be > 0, got {length}")
    if not math.isfinite(d) or d < 0:
        raise InvalidParameter(f"diffusion d must be finite and >= 0, got {d}")
    if n_max < 1:
        raise InvalidParameter(f"n_max must be >= 1, got {n_max}")


def _check_peclet(d: float, b: float, length: float) -> None:
    if abs(b) * length > PECLET_MAX * d:
        raise RootScanExhausted(
            f"drift-dominated operator (|b| l / d = {abs(b) * length / d:.3g} > {PECLET_MAX:.0e}); "
            "eigenpairs are not resolvable in double precision"
        )


def dirichlet_eigenpairs(d: float, b: float, length: float = 1.0, n_max: int = 8) -> list[EigenPair]:
    """Closed-form Dirichlet pairs ``exp(-bx/2d) sin(n pi x / l)``, ``n = 1..n_max``."""
    _check_common(d, length, n_max)
    if d == 0:
        raise DegenerateOperator(
            "Dirichlet with d = 0 has no nontrivial kernel unless b = c = 0"
        )
    bc = BoundaryCondition.dirichlet(length)
    alpha = b / (2 * d)
    shift = b * b / (4 * d)
    if not math.isfinite(shift):
        raise InvalidParameter(f"b^2/4d overflows for d = {d!r}, b = {b!r}")
    pairs = []
    for n in range(1, n_max + 1):
        k = n * math.pi / length
        lam = shift + d * k * k
        params = {"k": k, "alpha": alpha}
        pairs.append(EigenPair(n, lam, "sine", params, 1, n == 1, d, b, bc, 1.0 if b == 0 else None))
    return pairs


def _scan_mesh(s_lo: float, k_hi: float, n_points: int, include_lo: bool) -> np.ndarray:
    """Mesh in ``s = lam/d - alpha^2``, uniform in ``sqrt(-s)`` below zero and ``sqrt(s)`` above.

    Roots are spaced by roughly ``pi / length`` in either square root, whatever
    the size of ``d`` or ``alpha``.
    """
    parts = []
    if s_lo < 0:
        kap = np.linspace(math.sqrt(-s_lo), 0.0, n_points + 1)
        hyp = -kap * kap
        parts.append(hyp if include_lo else hyp[1:])
    k = np.linspace(0.0, k_hi, n_points + 1)
    osc = k * k
    parts.append(osc if (s_lo < 0 or include_lo) else osc[1:])
    return np.unique(np.concatenate(parts))


def _scan_roots(F, mesh: np.ndarray, limit: int) -> list[float]:
    """Lowest ``limit`` roots of ``F`` bracketed on ``mesh``, refined by Brent's method."""
    vals = F(mesh)
    sgn = np.sign(vals)
    exact = np.nonzero(sgn == 0)[0]
    brackets = np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]
    events = sorted([(mesh[i], None) for i in exact] + [(mesh[i], i) for i in brackets])
    roots = []
    for t, i in events[:limit]:
        if i is None:
            roots.append(float(t))
            continue
        r = optimize.brentq(lambda z: float(F(np.array([z]))[0]), mesh[i], mesh[i + 1],
                            rtol=ROOT_RTOL, xtol=1e-15, maxiter=400)
        roots.append(float(r))
    roots.sort()
    return roots


def _interior_zeros(alpha, s, p, q, length) -> int:
    """Zeros in ``(0, length)`` of ``p u + q w`` for the bounded basis ``(u, w)``.

    Both basis functions share a positive factor, so the count comes from the
    remaining trigonometric, exponential or affine combination in closed form;
    no sampling, hence no missed zeros inside boundary layers.
    """
    if s > 0:
        k = math.sqrt(s)
        # p cos kx + q sin kx = R cos(kx - theta)
        theta = math.atan2(q, p)
        first = (theta + 0.5 * math.pi) / k
        step = math.pi / k
        m_lo = math.floor(-first / step) + 1
        m_hi = math.ceil((length - first) / step) - 1
        return max(0, m_hi - m_lo + 1)
    if s == 0:
        if q == 0:
            return 0
        x0 = -p * length / q
        return int(0.0 < x0 < length)
    if p == 0 or q == 0 or (p > 0) == (q > 0):
        return 0
    kap = math.sqrt(-s)
    r1, r2 = -alpha - kap, -alpha + kap
    a1 = length if r1 > 0 else 0.0
    a2 = length if r2 > 0 else 0.0
    x0 = (math.log(-q / p) + r1 * a1 - r2 * a2) / (r1 - r2)
    return int(0.0 < x0 < length)


def _mode_pair(n, d, b, bc, alpha, s, bc_rows, positive) -> EigenPair:
    pc, qc = _null_coefficients(alpha, s, bc.length, *bc_rows)
    params = {"alpha": alpha, "s": s, "p": pc, "q": qc}
    return EigenPair(n, d * alpha * alpha + d * s, "fundamental", params, 1, positive,
                     d, b, bc, None)


def _root_found_pairs(d, b, bc, n_max, F, bc_rows, s_lo, zeros_below, include_lo=False):
    """Scan ``F(s)``, refine, build normalised pairs; re-scan finer if a mode is missed."""
    length = bc.length
    alpha = b / (2 * d)
    # the window spans 4 (n_max + 2)^2 pi^2 / l^2 in s above its lower end
    k_hi = 2 * (n_max + 2) * math.pi / length
    for factor in (1, *SCAN_REFINEMENTS):
        roots = _scan_roots(F, _scan_mesh(s_lo, k_hi, SCAN_POINTS * factor, include_lo), n_max)
        found = []
        complete = True
        for j, s in enumerate(roots[:n_max]):
            n = 1 + j
            # the eigenfunction comes from the boundary null vector in a bounded
            # basis; shooting data from x = 0 would lose boundary layers
            pc, qc = _null_coefficients(alpha, s, length, *bc_rows)
            # Sturm oscillation count pins the index of every root found
            if _interior_zeros(alpha, s, pc, qc, length) != n - zeros_below:
                complete = False
                break
            found.append(s)
        if complete and len(found) == n_max:
            return [_mode_pair(1 + j, d, b, bc, alpha, s, bc_rows, j == 0 and zeros_below == 1)
                    for j, s in enumerate(found)]
        if complete and len(roots) < n_max:
            break
    lam_lo = d * alpha * alpha + d * s_lo
    lam_hi = d * alpha * alpha + d * k_hi * k_hi
    raise RootScanExhausted(
        f"resolved {len(found)} of {n_max} eigenvalues in [{lam_lo:.6g}, {lam_hi:.6g}]"
    )


def neumann_eigenpairs(d: float, b: float, length: float = 1.0, n_max: int = 8) -> list[EigenPair]:
    """Constant mode ``lam_0 = 0`` followed by ``n_max`` nonconstant modes.

    With drift the nonconstant eigenvalues are ``d (alpha^2 + (n pi / l)^2)``
    with ``alpha = b / 2d``; the hyperbolic regime holds only the constant mode.
    ``d = 0`` leaves only the constant mode.
    """
    _check_common(d, length, n_max)
    bc = BoundaryCondition.neumann(length)
    const = EigenPair(0, 0.0, "constant", {}, 1, True, d, b, bc)
    if d == 0:
        return [const]
    if b == 0:
        pairs = [const]
        for n in range(1, n_max + 1):
            k = n * math.pi / length
            pairs.append(EigenPair(n, d * k * k, "cosine", {"k": k}, 1, False, d, b, bc))
        return pairs

    _check_peclet(d, b, length)
    # phi = exp(-alpha x) (cos kx + (alpha/k) sin kx) has zero flux at x = 0,
    # and zero flux at x = l exactly when sin kl = 0
    alpha = b / (2 * d)

    def flux(v, dv):
        return dv

    pairs = [const]
    for n in range(1, n_max + 1):
        k = n * math.pi / length
        pairs.append(_mode_pair(n, d, b, bc, alpha, k * k, (flux, flux), False))
    return pairs


def robin_eigenpairs(d: float, b: float, sigma: float, length: float = 1.0,
                     n_max: int = 8) -> list[EigenPair]:
    """Robin pairs; ``d = 0`` gives the single pair ``(exp(-x/sigma), b/sigma)``."""
    _check_common(d, length, n_max)
    bc = BoundaryCondition.robin(sigma, length)
    if d == 0:
        return [EigenPair(0, b / sigma, "exponential", {"sigma": sigma}, 1, True, d, b, bc, None)]
    _check_peclet(d, b, length)

    alpha = b / (2 * d)
    # phi(0) = sigma, phi'(0) = 1 satisfies u - sigma u' = 0 at x = 0
    g0, g1 = sigma, 1.0 + alpha * sigma

    def F(s):
        g, dg = _g(length, s, g0, g1)
        return g + sigma * (dg - alpha * g)

    # lower spectral bound from the Rayleigh quotient of the symmetrised problem
    h0 = 1.0 / sigma + alpha
    h1 = 1.0 / sigma - alpha
    H = max(0.0, -h0, -h1)
    s_lo = -2 * H * (2 * H + 1.0 / length)
    s_lo -= 1e-9 * max(1.0, abs(s_lo))

    def left(v, dv):
        return v - sigma * dv

    def right(v, dv):
        return v + sigma * dv

    return _root_found_pairs(d, b, bc, n_max, F, (left, right), s_lo, 1, include_lo=True)


def periodic_eigenpairs(d: float, b: float, n_max: int = 8) -> list[EigenPair]:
    """Torus pairs: constant ``lam_0 = 0`` and ``lam_n = d n^2`` (multiplicity 2)."""
    _check_common(d, TWO_PI, n_max)
    if d == 0:
        raise DegenerateOperator("periodic eigenpairs need d > 0")
    if b != 0:
        raise UnsupportedDrift(
            "periodic problem with drift has no real nonconstant eigenpairs; "
            "only lam_0 = 0 is available"
        )
    bc = BoundaryCondition.periodic()
    pairs = [EigenPair(0, 0.0, "constant", {}, 1, True, d, b, bc)]
    for n in range(1, n_max + 1):
        pairs.append(EigenPair(n, float(d * n * n), "fourier", {"k": float(n)}, 2, False, d, b, bc))
    return pairs


def eigenpairs(d: float, b: float, bc: BoundaryCondition, n_max: int = 8) -> list[EigenPair]:
    """Dispatch on the boundary kind."""
    if bc.kind is BCKind.DIRICHLET:
        return dirichlet_eigenpairs(d, b, bc.length, n_max)
    if bc.kind is BCKind.NEUMANN:
        return neumann_eigenpairs(d, b, bc.length, n_max)
    if bc.kind is BCKind.ROBIN:
        return robin_eigenpairs(d, b, bc.sigma, bc.length, n_max)
    return periodic_eigenpairs(d, b, n_max)


def eigenfunction_sample(pair: EigenPair, grid) -> np.ndarray:
    """Evaluate the normalised eigenfunction at ``grid``."""
    grid = np.asarray(grid, dtype=float)
    if not pair.bc.contains(grid):
        raise OutOfDomain(f"grid leaves [0, {pair.bc.length}]")
    return pair(grid)


# -- checks -------------------------------------------------------------------

def boundary_residual(pair: EigenPair) -> float:
    """Max violation of the boundary condition at the two endpoints."""
    bc = pair.bc
    ends = np.array([0.0, bc.length])
    if pair.family == "fourier":
        B = pair.basis(ends)
        return float(np.max(np.abs(B[:, 0] - B[:, 1])))
    v, dv, _ = pair.derivatives(ends)
    if bc.kind is BCKind.DIRICHLET:
        return float(np.max(np.abs(v)))
    if bc.kind is BCKind.NEUMANN:
        return float(np.max(np.abs(dv)))
    if bc.kind is BCKind.ROBIN:
        # u + sigma u' is measured relative to max(1, |sigma|) so the check
        # does not grow with sigma as the condition tends to zero flux
        w = max(1.0, abs(bc.sigma))
        if pair.family == "exponential":
            # first-order operator: only the outflow end carries a condition
            return float(abs(v[1] + bc.sigma * dv[1])) / w
        return float(max(abs(v[0] - bc.sigma * dv[0]), abs(v[1] + bc.sigma * dv[1]))) / w
    return float(max(abs(v[0] - v[1]), abs(dv[0] - dv[1])))


def _central(phi, h, m):
    """Three-point first and second differences at spacing ``m h``, on nodes 4..N-5."""
    lo, hi = 4, len(phi) - 4
    c = phi[lo:hi]
    p = phi[lo + m:hi + m]
    q = phi[lo - m:hi - m]
    H = m * h
    return (p - q) / (2 * H), (p - 2 * c + q) / H**2


def fd_residual(pair: EigenPair, n_nodes: int = 1001) -> float:
    """Max interior residual of ``-d phi'' - b phi' - lam phi`` by central differences.

    Second-order central differences at spacings ``h``, ``2h`` and ``4h`` on the
    same uniform grid, combined by two Richardson steps (sixth order).
    """
    x = np.linspace(0.0, pair.bc.length, n_nodes)
    h = x[1] - x[0]
    worst = 0.0
    for phi in pair.basis(x):
        (a1, a2), (b1, b2), (c1, c2) = (_central(phi, h, m) for m in (1, 2, 4))
        r1 = ((4 * a1 - b1) / 3, (4 * a2 - b2) / 3)
        r2 = ((4 * b1 - c1) / 3, (4 * b2 - c2) / 3)
        d1 = (16 * r1[0] - r2[0]) / 15
        d2 = (16 * r1[1] - r2[1]) / 15
        r = -pair.d * d2 - pair.b * d1 - pair.lam * phi[4:-4]
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def fd_residual_second_order(pair: EigenPair, n_nodes: int = 1001) -> float:
    """Plain three-point residual; accurate only while ``k h`` is small."""
    x = np.linspace(0.0, pair.bc.length, n_nodes)
    h = x[1] - x[0]
    worst = 0.0
    for phi in pair.basis(x):
        d2 = (phi[2:] - 2 * phi[1:-1] + phi[:-2]) / h**2
        d1 = (phi[2:] - phi[:-2]) / (2 * h)
        r = -pair.d * d2 - pair.b * d1 - pair.lam * phi[1:-1]
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def analytic_residual(pair: EigenPair, x) -> float:
    """Residual of the eigen-equation using exact derivatives of the descriptor."""
    v, dv, d2v = pair.derivatives(np.asarray(x, dtype=float))
    return float(np.max(np.abs(-pair.d * d2v - pair.b * dv - pair.lam * v)))
