"""Nontrivial solutions of ``-d psi'' = f(x, psi; B)`` by shooting.

The reaction is the quadratic family ``f = a psi - b psi^2`` with ``a`` a
constant or a function ``m(x)``. A one-parameter family of initial-value
problems is integrated by RK4 (vectorised over the shooting parameter), sign
changes of the far-end boundary functional are bracketed, and each bracket is
refined by Brent's method on a scalar integration.

Counts are numerical evidence at the scan's range and resolution, not proofs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import optimize

from .errors import IntegratorBlowUp, InvalidParameter, RangeTooNarrow, SamePoint
from .operators import BCKind, BoundaryCondition
from .solve import HeteroLogistic, Logistic

RK4_STEPS = 2000
ESCAPE = 1e6
FLAT_TOL = 1e-10
ROOT_FTOL = 1e-12
DEFAULT_N_SCAN = 4000
RANGE_CAP = 1e3


class Regime(str, Enum):
    UNIQUE = "UniqueSolution"
    DISCRETE = "DiscreteSolutions"
    CONTINUOUS = "ContinuousSpectrum"


@dataclass(frozen=True)
class Profile:
    x: np.ndarray
    psi: np.ndarray
    shoot: float
    residual: float

    @property
    def sign(self) -> int:
        """1 if nonnegative, -1 if nonpositive, 0 if the profile changes sign."""
        hi, lo = float(np.max(self.psi)), float(np.min(self.psi))
        if lo >= -1e-12 * max(1.0, hi):
            return 1
        if hi <= 1e-12 * max(1.0, -lo):
            return -1
        return 0


@dataclass(frozen=True)
class EllipticClassification:
    regime: Regime
    solutions: tuple[Profile, ...]
    d: float
    B: tuple
    notes: tuple[str, ...] = ()
    shoot_range: tuple[float, float] | None = None
    n_scan: int = 0

    @property
    def count(self) -> int:
        return len(self.solutions)

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "count": self.count,
            "d": self.d,
            "B": [x if isinstance(x, (int, float)) else repr(x) for x in self.B],
            "notes": list(self.notes),
            "shoot_range": list(self.shoot_range) if self.shoot_range else None,
            "n_scan": self.n_scan,
            "solutions": [
                {"shoot": p.shoot, "max": float(np.max(p.psi)), "min": float(np.min(p.psi)),
                 "residual": p.residual}
                for p in self.solutions
            ],
        }


# -- reaction plumbing ---------------------------------------------------------------

def _reaction_arrays(reaction, length: float, steps: int):
    """``a`` at the RK4 nodes and half nodes, and ``b``."""
    h = length / steps
    xs = np.arange(steps + 1) * h
    xm = xs[:-1] + 0.5 * h
    if isinstance(reaction, Logistic):
        return np.full(steps + 1, float(reaction.a)), np.full(steps, float(reaction.a)), float(reaction.b)
    if isinstance(reaction, HeteroLogistic):
        return reaction.m_at(xs), reaction.m_at(xm), float(reaction.b)
    raise InvalidParameter(f"unsupported reaction {reaction!r}")


def _initial_state(bc: BoundaryCondition, s):
    s = np.asarray(s, dtype=float)
    if bc.kind is BCKind.DIRICHLET:
        return np.zeros_like(s), s.copy()
    if bc.kind in (BCKind.NEUMANN, BCKind.PERIODIC):
        return s.copy(), np.zeros_like(s)
    # u - sigma u' = 0 at x = 0
    return bc.sigma * s, s.copy()


def _target(bc: BoundaryCondition, psi, dpsi):
    if bc.kind is BCKind.DIRICHLET:
        return psi
    if bc.kind in (BCKind.NEUMANN, BCKind.PERIODIC):
        return dpsi
    return psi + bc.sigma * dpsi


def _integrate(d, a_nodes, a_mid, b, length, psi, dpsi, keep=False):
    """RK4 for ``psi'' = -(a psi - b psi^2)/d``; escaped entries are clamped."""
    steps = a_mid.size
    h = length / steps
    inv = 1.0 / d
    psi = np.array(psi, dtype=float)
    dpsi = np.array(dpsi, dtype=float)
    escaped = np.zeros(psi.shape, dtype=bool)
    path = [psi.copy()] if keep else None
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps):
            a0, am, a1 = a_nodes[k], a_mid[k], a_nodes[k + 1]
            k1p, k1v = dpsi, -inv * (a0 * psi - b * psi * psi)
            p2 = psi + 0.5 * h * k1p
            k2p, k2v = dpsi + 0.5 * h * k1v, -inv * (am * p2 - b * p2 * p2)
            p3 = psi + 0.5 * h * k2p
            k3p, k3v = dpsi + 0.5 * h * k2v, -inv * (am * p3 - b * p3 * p3)
            p4 = psi + h * k3p
            k4p, k4v = dpsi + h * k3v, -inv * (a1 * p4 - b * p4 * p4)
            psi = psi + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
            dpsi = dpsi + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
            bad = ~np.isfinite(psi) | ~np.isfinite(dpsi) | (np.abs(psi) > ESCAPE)
            if np.any(bad & ~escaped):
                new = bad & ~escaped
                escaped |= new
            if np.any(escaped):
                # freeze escaped trajectories at the clamp, keeping their sign
                sgn = np.where(np.isfinite(psi), np.sign(psi), 1.0)
                psi = np.where(escaped, sgn * ESCAPE, psi)
                dpsi = np.where(escaped, 0.0, dpsi)
            if keep:
                path.append(psi.copy())
    if keep:
        return psi, dpsi, escaped, np.array(path)
    return psi, dpsi, escaped


def _scalar_integrate(d, a_nodes, a_mid, b, length, psi, dpsi):
    steps = a_mid.size
    h = length / steps
    inv = 1.0 / d
    an = a_nodes.tolist()
    am_ = a_mid.tolist()
    for k in range(steps):
        a0, am, a1 = an[k], am_[k], an[k + 1]
        k1p, k1v = dpsi, -inv * (a0 * psi - b * psi * psi)
        p2 = psi + 0.5 * h * k1p
        k2p, k2v = dpsi + 0.5 * h * k1v, -inv * (am * p2 - b * p2 * p2)
        p3 = psi + 0.5 * h * k2p
        k3p, k3v = dpsi + 0.5 * h * k2v, -inv * (am * p3 - b * p3 * p3)
        p4 = psi + h * k3p
        k4p, k4v = dpsi + h * k3v, -inv * (a1 * p4 - b * p4 * p4)
        psi = psi + h / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        dpsi = dpsi + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        if not (abs(psi) <= ESCAPE):
            return math.copysign(ESCAPE, psi) if psi == psi else ESCAPE, 0.0
    return psi, dpsi


def _dedupe(roots, width):
    out = []
    for r in roots:
        if not out or abs(r - out[-1]) > 1e-10 * max(1.0, width):
            out.append(r)
    return out


def default_shoot_range(d: float, reaction, bc: BoundaryCondition) -> tuple[float, float]:
    """Symmetric range for the shooting parameter.

    Based on ``max f / d`` over the carrying range of the logistic term,
    ``10 a^2 / (4 |b| d) * l``, floored at ``100 d / (|b| l^2)`` so that small
    ``a`` still leaves room for profiles of the opposite sign, and capped at 1e3.
    """
    length = bc.length
    if isinstance(reaction, Logistic):
        a = abs(reaction.a)
    else:
        a = float(np.max(np.abs(reaction.m_at(np.linspace(0, length, 201)))))
    b = abs(reaction.b)
    if b == 0:
        return (-1.0, 1.0)
    if bc.kind in (BCKind.NEUMANN, BCKind.PERIODIC):
        r = max(10 * a / b, 100 * d / (b * length**2))
    else:
        r = max(10 * a * a / (4 * b * d) * length, 100 * d / (b * length**2))
    r = min(r, RANGE_CAP)
    return (-r, r)


def _residual(d, reaction, x, psi) -> float:
    """Fourth-order central-difference residual of ``-d psi'' - f``."""
    h = x[1] - x[0]
    d2 = (-psi[4:] + 16 * psi[3:-1] - 30 * psi[2:-2] + 16 * psi[1:-3] - psi[:-4]) / (12 * h * h)
    r = -d * d2 - reaction(x[2:-2], psi[2:-2])
    return float(np.max(np.abs(r)))


def shoot_count(
    d: float,
    reaction,
    bc: BoundaryCondition,
    shoot_range: tuple[float, float] | None = None,
    n_scan: int = DEFAULT_N_SCAN,
    nonnegative_only: bool = False,
) -> EllipticClassification:
    """Count nontrivial solutions by a shooting sweep.

    ``nonnegative_only`` drops profiles that take negative values, which is the
    relevant count when the modelled quantity is a density.
    """
    if not (math.isfinite(d) and d > 0):
        raise InvalidParameter(f"d must be > 0 for shooting, got {d}")
    if n_scan < 1000:
        raise InvalidParameter(f"n_scan must be >= 1000, got {n_scan}")
    if bc.kind is BCKind.PERIODIC and isinstance(reaction, HeteroLogistic):
        raise InvalidParameter("periodic shooting assumes a translation-invariant reaction")
    if shoot_range is None:
        shoot_range = default_shoot_range(d, reaction, bc)
    lo, hi = map(float, shoot_range)
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise InvalidParameter(f"invalid shoot_range {shoot_range}")

    length = bc.length
    a_nodes, a_mid, b = _reaction_arrays(reaction, length, RK4_STEPS)
    s = np.linspace(lo, hi, n_scan)
    psi0, dpsi0 = _initial_state(bc, s)
    psi, dpsi, escaped = _integrate(d, a_nodes, a_mid, b, length, psi0, dpsi0)
    if np.all(escaped):
        raise IntegratorBlowUp("every trajectory left |psi| < 1e6; shrink the shooting range")
    F = _target(bc, psi, dpsi)
    F = np.where(escaped, np.sign(psi) * ESCAPE, F)
    periodic = bc.kind is BCKind.PERIODIC

    def Fs(v):
        p0, q0 = _initial_state(bc, np.array([v]))
        p, q = _scalar_integrate(d, a_nodes, a_mid, b, length, float(p0[0]), float(q0[0]))
        return _target(bc, p, q)

    notes = []
    # flat stretches: the whole cell is a root
    flat = (np.abs(F) < FLAT_TOL) & ~escaped
    run, best = 0, 0
    for v in flat:
        run = run + 1 if v else 0
        best = max(best, run)
    roots = []
    if best >= 3:
        notes.append("flat_root_interval")
    else:
        exact = np.nonzero(F == 0.0)[0]
        roots.extend(float(s[i]) for i in exact)
        sg = np.sign(F)
        idx = np.nonzero(sg[:-1] * sg[1:] < 0)[0]
        for i in idx:
            if escaped[i] or escaped[i + 1]:
                # the sign flip comes from the clamp, not a continuous crossing
                if escaped[i] and escaped[i + 1]:
                    continue
            if i == 0 or i == n_scan - 2:
                raise RangeTooNarrow(f"root bracketed in the edge cell [{s[i]:.6g}, {s[i + 1]:.6g}]")
            try:
                r = optimize.brentq(Fs, s[i], s[i + 1], xtol=1e-15 * max(1.0, abs(s[i])),
                                    rtol=4 * np.finfo(float).eps, maxiter=200)
            except ValueError:
                continue
            # a root on the edge of the escape set (a saddle equilibrium) may be
            # returned from the escaped side; keep the best neighbouring float
            cands = [r, np.nextafter(r, -np.inf), np.nextafter(r, np.inf)]
            roots.append(float(min(cands, key=lambda v: abs(Fs(v)))))
        if isinstance(reaction, Logistic) and reaction.b != 0 and \
                bc.kind in (BCKind.NEUMANN, BCKind.PERIODIC):
            c = reaction.a / reaction.b
            if lo < c < hi and Fs(c) == 0.0:
                roots.append(c)

    profiles = []
    x = np.linspace(0.0, length, RK4_STEPS + 1)
    for r in _dedupe(sorted(roots), hi - lo):
        p0, q0 = _initial_state(bc, np.array([r]))
        _, _, esc, path = _integrate(d, a_nodes, a_mid, b, length, p0, q0, keep=True)
        if esc[0]:
            continue
        prof = path[:, 0]
        scale = float(np.max(np.abs(prof)))
        if scale < 1e-8:
            continue
        if abs(Fs(r)) > max(ROOT_FTOL, 1e-12 * scale) * 1e3:
            # a sign change through an escaped neighbour is a pole, not a root
            continue
        if periodic and abs(prof[-1] - prof[0]) > 1e-8 * max(1.0, scale):
            continue
        res = _residual(d, reaction, x, prof)
        profiles.append(Profile(x, prof, r, res))
    if nonnegative_only:
        profiles = [p for p in profiles if p.sign == 1]
        notes.append("nonnegative_only")

    B = (reaction.a if isinstance(reaction, Logistic) else "m(x)", reaction.b)
    if best >= 3:
        regime = Regime.CONTINUOUS
    elif periodic and any(np.ptp(p.psi) > 1e-8 * max(1.0, float(np.max(np.abs(p.psi)))) for p in profiles):
        # any nonconstant periodic profile comes with all of its translates
        regime = Regime.CONTINUOUS
        notes.append("translation_family")
    elif len(profiles) <= 1:
        regime = Regime.UNIQUE
    else:
        regime = Regime.DISCRETE
    notes.append("no further solution found within range/resolution")
    return EllipticClassification(regime, tuple(profiles), d, B, tuple(notes), (lo, hi), n_scan)


# -- pairs -------------------------------------------------------------------------------

class NonlinearVerdict(str, Enum):
    IDENTIFIABLE = "Identifiable"
    NOT_IDENTIFIABLE = "NotIdentifiable"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class NonlinearPairResult:
    verdict: NonlinearVerdict
    classification: EllipticClassification
    P1: tuple[float, float, float]
    P2: tuple[float, float, float]
    notes: tuple[str, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "P1": list(self.P1),
            "P2": list(self.P2),
            "notes": list(self.notes),
            "auxiliary": self.classification.to_dict(),
        }


def _constant_profile(bc, value, d, reaction):
    x = np.linspace(0.0, bc.length, RK4_STEPS + 1)
    psi = np.full_like(x, value)
    return Profile(x, psi, value, _residual(max(d, 0.0), reaction, x, psi) if d > 0 else
                   float(np.max(np.abs(reaction(x, psi)))))


def classify_nonlinear_pair(P1, P2, bc: BoundaryCondition, assume_nonstationary: bool = True,
                            n_scan: int = DEFAULT_N_SCAN, shoot_range=None) -> NonlinearPairResult:
    """Identifiability of logistic models ``P = (d, a, b)`` through their auxiliary problem."""
    P1 = tuple(float(v) for v in P1)
    P2 = tuple(float(v) for v in P2)
    if len(P1) != 3 or len(P2) != 3:
        raise InvalidParameter("parameter points are (d, a, b)")
    if not all(math.isfinite(v) for v in P1 + P2):
        raise InvalidParameter("parameters must be finite")
    if P1[0] < 0 or P2[0] < 0:
        raise InvalidParameter("diffusion must be >= 0")
    if P1 == P2:
        raise SamePoint("P1 and P2 are the same parameter point")
    if P1 < P2:
        P1, P2 = P2, P1
    d, a, b = (P1[0] - P2[0], P1[1] - P2[1], P1[2] - P2[2])
    reaction = Logistic(a, b)
    notes = []
    if d == 0:
        if b != 0 and bc.kind in (BCKind.NEUMANN, BCKind.PERIODIC) and a != 0:
            cls = EllipticClassification(Regime.UNIQUE, (_constant_profile(bc, a / b, 0.0, reaction),),
                                         0.0, (a, b), ("constant_a_over_b",))
        else:
            why = "only_trivial_solution"
            cls = EllipticClassification(Regime.UNIQUE, (), 0.0, (a, b), (why,))
    else:
        cls = shoot_count(d, reaction, bc, shoot_range, n_scan)
    if cls.regime is Regime.CONTINUOUS:
        verdict = NonlinearVerdict.NOT_IDENTIFIABLE
    elif assume_nonstationary:
        verdict = NonlinearVerdict.IDENTIFIABLE
    else:
        verdict = NonlinearVerdict.UNDETERMINED
        notes.append("stationary_observation_not_excluded")
    return NonlinearPairResult(verdict, cls, P1, P2, tuple(notes))


def profile_csv(profile: Profile) -> str:
    lines = ["x,psi"]
    lines += [f"{x:.17g},{p:.17g}" for x, p in zip(profile.x, profile.psi)]
    return "\n".join(lines) + "\n"
