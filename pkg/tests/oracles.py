"""Reference computations that share no code with the package."""
from __future__ import annotations

import math

import numpy as np
from scipy import integrate, linalg, optimize


def cheb(n: int):
    """Chebyshev differentiation matrix and nodes on [-1, 1] (Trefethen)."""
    x = np.cos(np.pi * np.arange(n + 1) / n)
    c = np.hstack([2.0, np.ones(n - 1), 2.0]) * (-1.0) ** np.arange(n + 1)
    X = np.tile(x, (n + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    return D, x


def collocation_eigenvalues(d, b, length, left, right, n=80, count=6):
    """Smallest real eigenvalues of ``-d u'' - b u' = lam u`` by Chebyshev collocation.

    ``left`` and ``right`` are ``(alpha, beta)`` rows imposing ``alpha u + beta u' = 0``.
    """
    D, x = cheb(n)
    D = D * (2.0 / length)  # x in [-1,1] -> [0, length] (reversed order is harmless)
    A = -d * D @ D - b * D
    B = np.eye(n + 1)
    # x[0] = +1 maps to length, x[-1] = -1 maps to 0
    for row, (al, be) in ((n, left), (0, right)):
        A[row] = be * D[row]
        A[row, row] += al
        B[row] = 0.0
    w = linalg.eigvals(A, B)
    w = w[np.isfinite(w)]
    w = np.sort(w[np.abs(w.imag) < 1e-6 * np.maximum(1.0, np.abs(w.real))].real)
    return w[:count]


def robin_no_drift_eigenvalues(d, sigma, length, count):
    """Roots of ``2 s k cos kl + (1 - s^2 k^2) sin kl = 0`` for ``sigma > 0``."""
    def F(k):
        return 2 * sigma * k * math.cos(k * length) + (1 - sigma**2 * k**2) * math.sin(k * length)

    ks = np.linspace(1e-9, (count + 2) * math.pi / length, 20000)
    vals = [F(k) for k in ks]
    roots = []
    for a, b, fa, fb in zip(ks[:-1], ks[1:], vals[:-1], vals[1:]):
        if fa * fb < 0:
            roots.append(optimize.brentq(F, a, b, xtol=1e-15, rtol=1e-14))
        if len(roots) == count:
            break
    return [d * k * k for k in roots]


def trapezoid_inner(f, g, x):
    return float(integrate.trapezoid(f * g, x))


def simpson_sine_coefficients(g, n_modes, length=1.0, nodes=20001):
    """``(2/l) int g sin(n pi x / l)`` by composite Simpson on a fine grid."""
    x = np.linspace(0.0, length, nodes)
    gx = g(x)
    return np.array([2.0 / length * integrate.simpson(gx * np.sin(n * np.pi * x / length), x=x)
                     for n in range(1, n_modes + 1)])


def logistic_closed_form(u0, a, b, t):
    """Solution of ``u' = a u - b u^2``."""
    K = a / b
    return K / (1.0 + (K / u0 - 1.0) * np.exp(-a * t))


def logistic_bvp_dirichlet(d, a, b, length=1.0, guess_amp=0.5):
    """Positive solution of ``-d psi'' = a psi - b psi^2``, ``psi(0) = psi(l) = 0``."""
    x = np.linspace(0.0, length, 401)
    y0 = np.vstack([guess_amp * np.sin(np.pi * x / length),
                    guess_amp * np.pi / length * np.cos(np.pi * x / length)])

    def rhs(_x, y):
        return np.vstack([y[1], -(a * y[0] - b * y[0] ** 2) / d])

    def bc(ya, yb):
        return np.array([ya[0], yb[0]])

    sol = integrate.solve_bvp(rhs, bc, x, y0, tol=1e-10, max_nodes=200000)
    assert sol.success, sol.message
    return sol


def ode_reference(M, X0, t_grid):
    """Trajectories of ``x' = M x`` by a tight-tolerance Runge-Kutta integration."""
    M = np.asarray(M, dtype=float)
    sol = integrate.solve_ivp(lambda _t, y: M @ y, (0.0, float(t_grid[-1])), np.asarray(X0, float),
                              t_eval=t_grid, rtol=1e-12, atol=1e-14, method="DOP853")
    return sol.y.T
