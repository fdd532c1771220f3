"""Clamped 2m-th order eigenproblem ``(-1)^m u^(2m) = lam rho u`` at p = 2.

The pencil ``A u = lam B u`` comes from uniform B-splines of degree ``m``
on ``n + m`` cells. Splines touching the boundary are dropped, which imposes
``u^(j)(0) = u^(j)(L) = 0`` for ``0 <= j <= m-1``. The kept splines are all
translates of one uniform spline, so ``A`` is the banded Toeplitz matrix built
from the autocorrelation of the m-th difference stencil, ``A = D^T D``:
``tridiag(-1, 2, -1)/h^2`` for ``m = 1`` and ``(1, -4, 6, -4, 1)/h^4`` for
``m = 2``. The mass is lumped (row sums), giving ``B = diag(int rho N_i / h)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numba import njit
from scipy.interpolate import BSpline
from scipy.linalg import qr, solve_triangular
from scipy.special import comb

from .errors import DomainError, NoEigenvalueError
from .lyapunov import BoundReport, bound_higher_order
from .weights import PiecewiseWeight, evaluate

__all__ = [
    "BeamProblem",
    "DensePencil",
    "assemble",
    "jacobi_eigh",
    "pencil_spectrum",
    "smallest_positive_eigenvalue",
    "verify_lyapi2",
]

JACOBI_TOL = 1e-12
_GAUSS_ORDER = 8


@dataclass(frozen=True)
class BeamProblem:
    m: int
    L: float
    rho: PiecewiseWeight
    n: int = 400

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise DomainError(f"m must be a positive integer, got {self.m!r}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise DomainError(f"L must be positive, got {self.L!r}")
        if int(self.n) != self.n or self.n < 8 * self.m:
            raise DomainError(f"need n >= 8m = {8 * self.m}, got {self.n}")
        rho = self.rho
        if not isinstance(rho, PiecewiseWeight):
            rho = PiecewiseWeight.constant(float(rho), self.L)
            object.__setattr__(self, "rho", rho)
        if not math.isclose(rho.L, self.L, rel_tol=1e-12):
            raise DomainError(f"rho lives on [0, {rho.L}] but L = {self.L}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "n", int(self.n))

    @property
    def h(self) -> float:
        return self.L / (self.n + self.m)

    @property
    def nodes(self) -> np.ndarray:
        """Centres of the kept splines, used as the nodal positions of ``u``."""
        return (np.arange(self.n) + 0.5 * (self.m + 1)) * self.h


@dataclass(frozen=True)
class DensePencil:
    A: np.ndarray
    b: np.ndarray  # diagonal of B
    x: np.ndarray
    h: float
    m: int
    D: np.ndarray | None = None  # A = D^T D when available

    @property
    def B(self) -> np.ndarray:
        return np.diag(self.b)


def _difference_stencil(m: int) -> np.ndarray:
    return np.array([(-1) ** j * comb(m, j, exact=True) for j in range(m + 1)], dtype=float)


@lru_cache(maxsize=8)
def _reference_basis(m: int):
    nodes, weights = np.polynomial.legendre.leggauss(_GAUSS_ORDER)
    return nodes, weights, BSpline.basis_element(np.arange(m + 2, dtype=float), extrapolate=False)


def _lumped_mass(bp: BeamProblem) -> np.ndarray:
    m, n, h = bp.m, bp.n, bp.h
    ncell = n + m
    edges = np.linspace(0.0, bp.L, ncell + 1)
    inner = bp.rho.breaks[1:-1]
    pts = np.union1d(edges, inner)
    lo, hi = pts[:-1], pts[1:]
    keep = hi - lo > 1e-14 * bp.L
    lo, hi = lo[keep], hi[keep]
    cell = np.clip(np.floor(0.5 * (lo + hi) / h).astype(int), 0, ncell - 1)

    gx, gw, ref = _reference_basis(m)
    mid = 0.5 * (lo + hi)[:, None]
    half = 0.5 * (hi - lo)[:, None]
    x = mid + half * gx[None, :]
    w = half * gw[None, :]
    rx = evaluate(bp.rho, x.ravel()).reshape(x.shape)
    t = x / h - cell[:, None]

    b = np.zeros(n)
    for j in range(m + 1):
        # basis i covers cells i..i+m; cell c is its j-th cell
        idx = cell - j
        ok = (idx >= 0) & (idx < n)
        vals = np.nan_to_num(ref(j + t[ok]))
        np.add.at(b, idx[ok], np.sum(w[ok] * rx[ok] * vals, axis=1))
    return b / h


def assemble(bp: BeamProblem) -> DensePencil:
    """Stiffness ``A`` (SPD, banded) and lumped weight ``b``, both divided by ``h``."""
    m, n, h = bp.m, bp.n, bp.h
    # D maps spline coefficients to the (constant) m-th derivative on each cell
    D = np.zeros((n + m, n))
    cols = np.arange(n)
    for j, val in enumerate(_difference_stencil(m) / h**m):
        D[cols + j, cols] = val
    A = D.T @ D
    return DensePencil(A=A, b=_lumped_mass(bp), x=bp.nodes, h=h, m=m, D=D)


@njit(cache=True)
def _jacobi(C, tol, max_sweeps):
    n = C.shape[0]
    A = C.copy()
    V = np.eye(n)
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro += A[i, j] * A[i, j]
    fro = math.sqrt(fro)
    threshold = tol * fro
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += A[i, j] * A[i, j]
        off = math.sqrt(2.0 * off)
        if off <= threshold:
            return A, V, sweep, off / fro
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) < 1e-300:
                    continue
                # skip entries already negligible next to both diagonals
                if abs(apq) < 1e-18 * math.sqrt(abs(A[p, p] * A[q, q])):
                    A[p, q] = 0.0
                    A[q, p] = 0.0
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = c * akp - s * akq
                    A[k, q] = s * akp + c * akq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = c * apk - s * aqk
                    A[q, k] = s * apk + c * aqk
                A[p, q] = 0.0
                A[q, p] = 0.0
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = c * vkp - s * vkq
                    V[k, q] = s * vkp + c * vkq
    off = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            off += A[i, j] * A[i, j]
    return A, V, max_sweeps, math.sqrt(2.0 * off) / fro


def jacobi_eigh(C: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = 50):
    """Eigenvalues and orthonormal eigenvectors of a symmetric matrix by cyclic Jacobi.

    Stops once the off-diagonal Frobenius norm is below ``tol`` times the
    Frobenius norm of ``C``. Eigenvalues are returned in ascending order.
    """
    C = np.ascontiguousarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise DomainError("expected a square matrix")
    if C.size == 0:
        return np.empty(0), np.empty((0, 0))
    fro = np.linalg.norm(C)
    if fro == 0.0:
        return np.zeros(C.shape[0]), np.eye(C.shape[0])
    D, V, _, rel_off = _jacobi(0.5 * (C + C.T), tol, max_sweeps)
    if rel_off > tol:
        raise DomainError(f"Jacobi did not converge (relative off-diagonal {rel_off:.2e})")
    w = np.diag(D).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def _congruence(pencil: DensePencil):
    if pencil.D is not None:
        # R from QR of D satisfies R^T R = A with conditioning sqrt(cond(A))
        R = qr(pencil.D, mode="r")[0][: pencil.D.shape[1]]
    else:
        try:
            R = np.linalg.cholesky(pencil.A).T
        except np.linalg.LinAlgError as exc:
            raise DomainError("stiffness matrix is not positive definite") from exc
    d = np.abs(np.diag(R))
    if not np.all(d > 1e-14 * d.max()):
        raise DomainError("stiffness matrix is not positive definite")
    Rinv = solve_triangular(R, np.eye(R.shape[0]), lower=False)
    C = Rinv.T @ (pencil.b[:, None] * Rinv)
    return 0.5 * (C + C.T), Rinv


def pencil_spectrum(pencil: DensePencil) -> np.ndarray:
    """All finite eigenvalues ``lam = 1/mu`` of ``A u = lam B u``, ascending.

    Nodes where ``B`` vanishes contribute infinite eigenvalues, which are omitted.
    """
    C, _ = _congruence(pencil)
    mu, _ = jacobi_eigh(C)
    cut = JACOBI_TOL * max(np.abs(mu).max(initial=0.0), 1e-300)
    mu = mu[np.abs(mu) > cut]
    return np.sort(1.0 / mu)


def smallest_positive_eigenvalue(pencil: DensePencil) -> tuple[float, np.ndarray]:
    """Smallest ``lam > 0`` and its eigenvector, scaled to ``max |u| = 1`` with positive peak.

    Raises:
        NoEigenvalueError: ``B`` has no positive entry, so no positive eigenvalue exists.
    """
    if not np.any(pencil.b > 0.0):
        raise NoEigenvalueError("weight has no positive part; no positive eigenvalue")
    C, Rinv = _congruence(pencil)
    mu, Y = jacobi_eigh(C)
    if not mu[-1] > 0.0:
        raise NoEigenvalueError("congruence-transformed pencil has no positive eigenvalue")
    u = Rinv @ Y[:, -1]
    u = u / u[np.argmax(np.abs(u))]
    return float(1.0 / mu[-1]), u


def verify_lyapi2(bp: BeamProblem) -> BoundReport:
    """Check the p = 2 higher-order inequality on the computed first eigenpair.

    ``u`` solves the problem with weight ``lam_1 * rho``, so the report compares
    ``(m-1) [(m-2)!]^2 / (2 L^(2m-1))`` with ``sup_x int_0^x lam_1 rho``.
    """
    if bp.m < 2:
        raise DomainError("the inequality needs m >= 2")
    lam, _ = smallest_positive_eigenvalue(assemble(bp))
    report = bound_higher_order(bp.m, 2.0, PiecewiseWeight.constant(1.0, bp.L), bp.L, bp.rho.scale(lam))
    report.inputs.update({"lambda": lam, "n": bp.n})
    return report
