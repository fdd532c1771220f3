"""Shared generators and independent reference solvers."""

import math

import numpy as np
import pytest
from scipy.linalg import eigh, expm
from scipy.optimize import brentq

from plyap.weights import PiecewiseWeight, cumulative_power_integral, primitive, weight_range


def random_sign_changing_weight(rng, L=1.0, n_min=2, n_max=8, allow_smooth=True):
    """Piecewise weight on [0, L] that takes both signs."""
    while True:
        n = int(rng.integers(n_min, n_max + 1))
        cuts = np.sort(rng.uniform(0.05, 0.95, n - 1)) * L
        ends = np.r_[cuts, L]
        starts = np.r_[0.0, cuts]
        kinds, rows = [], []
        for lo, hi in zip(starts, ends):
            kind = rng.choice(["constant", "constant", "linear", "sinusoid"]) if allow_smooth else "constant"
            if kind == "constant":
                rows.append([rng.uniform(-3, 3), 0, 0, 0, 0])
            elif kind == "linear":
                v0, v1 = rng.uniform(-3, 3, 2)
                s = (v1 - v0) / (hi - lo)
                rows.append([v0 - s * lo, s, 0, 0, 0])
            else:
                rows.append([rng.uniform(-1, 1), 0, rng.uniform(0.2, 2), rng.uniform(1, 20) / L, rng.uniform(0, 6)])
            kinds.append(str(kind))
        w = PiecewiseWeight(np.r_[0.0, ends], tuple(kinds), np.array(rows, dtype=float))
        lo_val, hi_val = weight_range(w)
        if lo_val < -0.05 and hi_val > 0.05:
            return w


def random_coefficient(rng, L=1.0):
    """Positive coefficient bounded away from zero."""
    choice = rng.integers(0, 4)
    if choice == 0:
        return PiecewiseWeight.constant(1.0, L)
    if choice == 1:
        n = int(rng.integers(2, 5))
        ends = np.r_[np.sort(rng.uniform(0.1, 0.9, n - 1)) * L, L]
        return PiecewiseWeight.step(rng.uniform(0.5, 2.0, n), ends)
    if choice == 2:
        v0, v1 = rng.uniform(0.5, 2.0, 2)
        return PiecewiseWeight.linear(v0, (v1 - v0) / L, L)
    return PiecewiseWeight.sinusoid(rng.uniform(0.1, 0.6), rng.uniform(1, 12) / L, rng.uniform(0, 6), 1.2, L)


def fd_eigenvalues(a, rho, n=2000, count=5, sign="+"):
    """Second-order finite-difference eigenvalues of -(a u')' = lam rho u, u(0) = u(L) = 0.

    Uses harmonic cell averages of ``a`` between nodes and cell averages of
    ``rho`` around nodes, and solves the dense symmetric pencil ``B u = mu A u``
    with LAPACK; ``lam = 1/mu``.
    """
    L = a.L
    h = L / (n + 1)
    x = np.linspace(0.0, L, n + 2)
    inv_a = np.diff(cumulative_power_integral(a, -1.0, x))
    a_mid = h / inv_a  # n + 1 values
    A = (np.diag(a_mid[:-1] + a_mid[1:]) - np.diag(a_mid[1:-1], 1) - np.diag(a_mid[1:-1], -1)) / h**2
    Q = primitive(rho)
    # cell around node i is [x_i - h/2, x_i + h/2]
    b = (Q(x[1:-1] + 0.5 * h) - Q(x[1:-1] - 0.5 * h)) / h
    window = (n - count, n - 1) if sign == "+" else (0, count - 1)
    mu = eigh(np.diag(b), A, eigvals_only=True, subset_by_index=window)
    mu = mu[mu > 0] if sign == "+" else mu[mu < 0]
    return np.sort(1.0 / mu) if sign == "+" else np.sort(1.0 / mu)[::-1]


def clamped_beam_beta():
    """Smallest positive root of cos(b) cosh(b) = 1."""
    return brentq(lambda b: math.cos(b) * math.cosh(b) - 1.0, 4.0, 5.0, xtol=1e-15)


def clamped_eigenvalue(m, L=1.0, lam_hi=1e7):
    """First eigenvalue of (-1)^m u^(2m) = lam u with u^(j)(0) = u^(j)(L) = 0, j < m.

    Shoots with the matrix exponential of the companion matrix: the free
    initial data u^(m..2m-1)(0) must produce vanishing u^(0..m-1)(L).
    """
    n = 2 * m

    def det(lam):
        C = np.diag(np.ones(n - 1), 1)
        C[-1, 0] = (-1) ** m * lam
        Phi = expm(C * L)
        block = Phi[:m, m:]
        scale = np.max(np.abs(block))
        return np.linalg.det(block / scale)

    grid = np.geomspace(1.0, lam_hi, 4000)
    vals = np.array([det(t) for t in grid])
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0][0]
    return brentq(det, grid[idx], grid[idx + 1], xtol=1e-12, rtol=1e-14)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
