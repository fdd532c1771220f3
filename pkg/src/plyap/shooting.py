"""Eigenvalue ladders of ``-(a |u'|^(p-2) u')' = lam rho |u|^(p-2) u`` with Dirichlet data.

The problem is written as the first-order system for ``(u, v)`` with
``v = a |u'|^(p-2) u'`` and integrated from ``u(0) = 0, v(0) = 1``. The number of
sign changes of ``u`` in ``(0, L]`` is nondecreasing in ``lam > 0``, so the k-th
positive eigenvalue is found by bracketing on that count and then refining the
root of the terminal value ``u(L; lam)``. Negative eigenvalues of ``rho`` are the
negated positive eigenvalues of ``-rho``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np
from scipy import optimize
from scipy.ndimage import maximum_filter1d

from . import _integrator
from .errors import (
    DegenerateDenominatorError,
    DomainError,
    IntegrationError,
    NoEigenvalueError,
    SearchError,
)
from .pmath import _check_p, pi_p
from .weights import (
    PiecewiseWeight,
    aligned_coefficients,
    positive_part_power_integral,
    split_parts,
    weight_range,
)

__all__ = [
    "ProblemSpec",
    "IVPResult",
    "EigenPair",
    "integrate_ivp",
    "eigenvalue",
    "eigenvalues",
    "rayleigh_quotient",
    "weyl_estimate",
    "default_tolerance",
]

log = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-8
DEFAULT_LAMBDA_MAX = 1e12
DEFAULT_MAX_STEPS = 5_000_000


def _as_weight(w, L: float) -> PiecewiseWeight:
    if isinstance(w, PiecewiseWeight):
        return w
    if hasattr(w, "to_piecewise"):
        return w.to_piecewise()
    if isinstance(w, (int, float)):
        return PiecewiseWeight.constant(float(w), L)
    raise DomainError(f"cannot interpret {w!r} as a weight")


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """Data ``(p, L, a, rho)`` of one Dirichlet eigenvalue problem.

    ``a`` and ``rho`` accept a :class:`~plyap.weights.PiecewiseWeight`, a sampled
    weight with a ``to_piecewise`` method, or a number (constant weight).
    """

    p: float
    L: float
    a: PiecewiseWeight = None
    rho: PiecewiseWeight = None

    def __post_init__(self):
        p = _check_p(self.p)
        L = float(self.L)
        if not L > 0.0 or not math.isfinite(L):
            raise DomainError(f"interval length must be positive, got {self.L!r}")
        a = _as_weight(1.0 if self.a is None else self.a, L)
        rho = _as_weight(1.0 if self.rho is None else self.rho, L)
        for name, w in (("a", a), ("rho", rho)):
            if not math.isclose(w.L, L, rel_tol=1e-12, abs_tol=0.0):
                raise DomainError(f"weight {name} lives on [0, {w.L}], problem on [0, {L}]")
        amin, _ = weight_range(a)
        if amin <= 0.0:
            raise DomainError(f"coefficient a must be bounded below by a positive constant (min {amin:g})")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "rho", rho)

    @cached_property
    def _aligned(self):
        br, (ac, rc) = aligned_coefficients(self.a, self.rho)
        br = br.copy()
        br[-1] = self.L
        return br, ac, rc

    @property
    def breakpoints(self) -> np.ndarray:
        return self._aligned[0]

    @property
    def a_min(self) -> float:
        return weight_range(self.a)[0]

    def with_rho(self, rho) -> "ProblemSpec":
        return ProblemSpec(self.p, self.L, self.a, rho)

    def negated(self) -> "ProblemSpec":
        return ProblemSpec(self.p, self.L, self.a, -self.rho)

    def reflected(self) -> "ProblemSpec":
        """The same problem in the variable ``L - x``."""
        return ProblemSpec(self.p, self.L, self.a.reflect(), self.rho.reflect())

    def to_dict(self) -> dict:
        return {"p": self.p, "L": self.L, "a": self.a.to_dict(), "rho": self.rho.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "ProblemSpec":
        try:
            p = float(data["p"])
            L = float(data["L"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError(f"problem needs numeric 'p' and 'L': {data!r}") from exc

        def weight(obj):
            if obj is None:
                return 1.0
            if isinstance(obj, (int, float)):
                return float(obj)
            return PiecewiseWeight.from_dict(obj)

        return cls(p, L, weight(data.get("a")), weight(data.get("rho")))


def default_tolerance(p: float) -> float:
    """Integrator tolerance: ``1e-10``, widened to ``1e-8`` for ``p < 1.5``."""
    return 1e-8 if p < 1.5 else 1e-10


@dataclass
class IVPResult:
    """Outcome of one shot from ``x = 0``.

    ``u_L`` and the samples are normalized so that the sampled ``max |u| = 1``.
    ``zeros`` are the interior zeros; ``zero_count`` adds ``x = 0`` and, when
    ``|u(L)|`` is below the residual tolerance, ``x = L``.
    """

    lam: float
    u_L: float
    v_L: float
    zero_count: int
    zeros: np.ndarray
    x: np.ndarray
    u: np.ndarray
    sign_changes: int
    n_steps: int

    @property
    def samples(self):
        return list(zip(self.x.tolist(), self.u.tolist()))


def _sample_grid(spec: ProblemSpec, n_samples: int) -> np.ndarray:
    grid = np.linspace(0.0, spec.L, max(int(n_samples), 2))
    br = spec.breakpoints
    if br.size <= 20 * n_samples:
        grid = np.union1d(grid, br)
    if br.size <= n_samples // 8:
        # short pieces can carry a localized eigenfunction; give each a few points
        t = np.linspace(0.0, 1.0, 17)[1:-1]
        grid = np.union1d(grid, (br[:-1, None] + np.diff(br)[:, None] * t).ravel())
    return grid


def _shoot(spec: ProblemSpec, lam: float, tol: float, sample_x: np.ndarray, max_zeros: int, max_steps: int):
    br, ac, rc = spec._aligned
    out = _integrator.shoot(br, ac, rc, spec.p, float(lam), tol, tol, 1.0, sample_x, max_zeros, max_steps)
    status, x_reached = out[0], out[1]
    if status == _integrator.STATUS_UNDERFLOW:
        raise IntegrationError(f"step size underflow at lambda={lam:.6g}", x_reached)
    if status == _integrator.STATUS_MAXSTEPS:
        raise IntegrationError(f"step budget of {max_steps} exhausted at lambda={lam:.6g}", x_reached)
    return out


def integrate_ivp(
    spec: ProblemSpec,
    lam: float,
    tol: float | None = None,
    n_samples: int = 2001,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> IVPResult:
    """Shoot from ``u(0) = 0, v(0) = 1`` across ``[0, L]`` at parameter ``lam``.

    Raises:
        IntegrationError: the adaptive step size underflowed (typically a huge
            ``|lam|``) or the step budget ran out; carries the reached ``x``.
    """
    tol = default_tolerance(spec.p) if tol is None else float(tol)
    sample_x = _sample_grid(spec, n_samples)
    max_zeros = 4096
    out = _shoot(spec, lam, tol, sample_x, max_zeros, max_steps)
    _, _, u_end, v_end, ls_end, n_zeros, zeros, su, sls, n_steps, _ = out
    if n_zeros > max_zeros:
        out = _shoot(spec, lam, tol, sample_x, n_zeros, max_steps)
        _, _, u_end, v_end, ls_end, n_zeros, zeros, su, sls, n_steps, _ = out
    zeros = zeros[:n_zeros].copy()

    with np.errstate(divide="ignore"):
        logmag = np.where(su != 0.0, np.log(np.abs(su)) + sls, -np.inf)
    ref = float(np.max(logmag))
    u = su * np.exp(sls - ref)
    u_L = u_end * math.exp(ls_end - ref)
    v_L = v_end * math.exp((spec.p - 1.0) * (ls_end - ref))

    L = spec.L
    near_end = zeros >= L * (1.0 - 1e-9)
    endpoint = abs(u_L) <= RESIDUAL_TOL
    interior = zeros[~near_end] if endpoint else zeros[zeros < L]
    zero_count = 1 + interior.size + (1 if endpoint else 0)
    return IVPResult(
        lam=float(lam),
        u_L=float(u_L),
        v_L=float(v_L),
        zero_count=int(zero_count),
        zeros=interior,
        x=sample_x,
        u=u,
        sign_changes=int(n_zeros),
        n_steps=int(n_steps),
    )


@dataclass
class EigenPair:
    """An eigenvalue with its sampled eigenfunction.

    ``u`` is normalized to ``max |u| = 1`` on the sample grid with ``u'(0) > 0``;
    ``nodal_count`` counts zeros in ``[0, L]`` including both endpoints.
    """

    lam: float
    sign: str
    k: int
    nodal_count: int
    x: np.ndarray
    u: np.ndarray
    zeros: np.ndarray
    terminal_residual: float
    n_evaluations: int = 0
    spec: ProblemSpec = field(default=None, repr=False)

    @property
    def samples(self):
        return list(zip(self.x.tolist(), self.u.tolist()))

    @property
    def nodes(self) -> np.ndarray:
        """All zeros ``0 = x_0 < ... < x_k = L`` of the eigenfunction."""
        return np.r_[0.0, self.zeros, self.x[-1]]

    def to_dict(self, with_samples: bool = False) -> dict:
        out = {
            "k": self.k,
            "sign": self.sign,
            "lambda": self.lam,
            "nodal_count": self.nodal_count,
            "terminal_residual": self.terminal_residual,
            "zeros": [float(z) for z in self.nodes],
        }
        if with_samples:
            out["x"] = self.x.tolist()
            out["u"] = self.u.tolist()
        return out


def _check_sign(sign: str) -> str:
    if sign in ("+", "plus", 1):
        return "+"
    if sign in ("-", "minus", -1):
        return "-"
    raise DomainError(f"sign must be '+' or '-', got {sign!r}")


def _shoot_samples(spec: ProblemSpec, lam: float, tol: float, sample_x: np.ndarray, max_steps: int):
    max_zeros = 4096
    out = _shoot(spec, lam, tol, sample_x, max_zeros, max_steps)
    if out[5] > max_zeros:
        out = _shoot(spec, lam, tol, sample_x, out[5], max_steps)
    n_zeros, zeros, su, sls, sv = out[5], out[6], out[7], out[8], out[10]
    return zeros[:n_zeros].copy(), su, sv, sls


def _glued_eigenfunction(work: ProblemSpec, lam: float, tol: float, n_samples: int, max_steps: int):
    """Eigenfunction from shots off both ends, joined where they agree.

    A single shot from ``x = 0`` cannot follow an eigenfunction that decays
    across a stretch where ``lam rho < 0``: any error in ``lam`` feeds the growing
    mode. Shooting from ``x = L`` as well and switching at a point where the two
    Prufer directions ``(u, |v|^(q-2) v)`` coincide keeps both halves on their
    stable side. The returned residual is the sine of the angle between the two
    directions at the switch point, which is zero for an exact eigenpair.
    """
    p, L = work.p, work.L
    x = _sample_grid(work, n_samples)
    zf, uf, vf, lf = _shoot_samples(work, lam, tol, x, max_steps)
    y = L - x[::-1]
    y[0], y[-1] = 0.0, L
    zb, ub, vb, lb = _shoot_samples(work.reflected(), lam, tol, y, max_steps)
    ub, vb, lb = ub[::-1], vb[::-1], lb[::-1]

    q1 = 1.0 / (p - 1.0)
    unit = lam ** (-1.0 / p)  # puts u and u' on a comparable scale
    wf = np.sign(vf) * np.abs(vf) ** q1 * unit
    wb = -np.sign(vb) * np.abs(vb) ** q1 * unit
    nf = np.hypot(uf, wf)
    nb = np.hypot(ub, wb)
    with np.errstate(invalid="ignore", divide="ignore"):
        mismatch = np.abs(uf * wb - wf * ub) / (nf * nb)
        away = np.abs(uf) / nf
    mismatch = np.nan_to_num(mismatch, nan=1.0)
    away = np.nan_to_num(away)
    smooth = maximum_filter1d(mismatch, size=5, mode="nearest")
    inner = np.arange(1, x.size - 1)
    best = smooth[inner].min()
    ok = inner[smooth[inner] <= max(10.0 * best, 1e-9)]
    i = int(ok[np.argmax(away[ok])])
    xm = x[i]

    flip = 1.0 if uf[i] * ub[i] + wf[i] * wb[i] >= 0.0 else -1.0
    with np.errstate(over="ignore", under="ignore"):
        left = uf * np.exp(lf - lf[i]) / nf[i]
        right = flip * ub * np.exp(lb - lb[i]) / nb[i]
    u = np.where(np.arange(x.size) <= i, left, right)
    u[-1] = 0.0
    u = u / np.max(np.abs(u))

    zeros = np.sort(np.r_[zf[zf < xm], L - zb[L - zb > xm]])
    zeros = zeros[(zeros > 0.0) & (zeros < L)]
    if zeros.size > 1:
        zeros = zeros[np.r_[True, np.diff(zeros) > 1e-9 * L]]
    return x, u, zeros, float(mismatch[i])


def eigenvalue(
    spec: ProblemSpec,
    k: int,
    sign: str = "+",
    tol: float | None = None,
    n_samples: int = 2001,
    lam_max: float = DEFAULT_LAMBDA_MAX,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> EigenPair:
    """k-th eigenvalue of the ``sign`` ladder and its eigenfunction.

    The count of sign changes of ``u(.; lam)`` on ``(0, L]`` is bracketed by
    doubling from a Weyl-guided start (``[d, 2d]``, ``d`` a quarter of the Weyl
    estimate when ``a == 1``, else ``d = 1``), narrowed by bisection until the
    bracket holds exactly ``k - 1`` and ``k`` sign changes at its ends, and the
    single root of ``u(L; lam)`` inside is then refined with Brent's method.

    Raises:
        NoEigenvalueError: the weight has no positive (for ``"+"``) or negative
            (for ``"-"``) part, so the ladder is empty.
        SearchError: the bracket passed ``lam_max``.
    """
    sign = _check_sign(sign)
    k = int(k)
    if k < 1:
        raise DomainError(f"eigenvalue index must be >= 1, got {k}")
    work = spec if sign == "+" else spec.negated()
    parts = split_parts(work.rho)
    if parts.positive <= 0.0:
        side = "positive" if sign == "+" else "negative"
        raise NoEigenvalueError(f"weight has no {side} part; the {sign} ladder is empty")
    tol = default_tolerance(spec.p) if tol is None else float(tol)
    no_samples = np.empty(0)
    n_calls = 0

    def count(lam):
        nonlocal n_calls
        n_calls += 1
        return _shoot(work, lam, tol, no_samples, 1, max_steps)[5]

    if work.a.is_constant(1.0):
        start = 0.25 * weyl_estimate(work, k, "+")
    else:
        start = 1.0

    hi = 2.0 * start
    lo = None
    n_hi = count(hi)
    while n_hi < k:
        lo, n_lo = hi, n_hi
        hi *= 2.0
        if hi > lam_max:
            raise SearchError(f"no bracket for k={k} below lambda_max={lam_max:g}")
        n_hi = count(hi)
    if lo is None:
        lo = start
        n_lo = count(lo)
        while n_lo >= k:
            hi, n_hi = lo, n_lo
            lo *= 0.5
            if lo < 1e-300:
                raise SearchError("lower bracket collapsed to zero")
            n_lo = count(lo)

    while n_lo != k - 1 or n_hi != k:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise SearchError(f"bracket [{lo}, {hi}] cannot separate the k={k} eigenvalue")
        n_mid = count(mid)
        if n_mid >= k:
            hi, n_hi = mid, n_mid
        else:
            lo, n_lo = mid, n_mid

    def terminal(lam):
        nonlocal n_calls
        n_calls += 1
        out = _shoot(work, lam, tol, no_samples, 1, max_steps)
        u_end, v_end = out[2], out[3]
        # degree-zero homogeneous, so the log scale drops out
        return u_end / (abs(u_end) + abs(v_end) ** (1.0 / (work.p - 1.0)))

    f_lo, f_hi = terminal(lo), terminal(hi)
    if f_lo == 0.0:
        lam = lo
    elif f_hi == 0.0:
        lam = hi
    elif f_lo * f_hi > 0.0:
        # the count changed without a sign change of u(L): fall back to the bisected bracket
        lam = 0.5 * (lo + hi)
        log.warning("terminal value did not change sign on [%g, %g]", lo, hi)
    else:
        lam = optimize.brentq(terminal, lo, hi, xtol=1e-15 * hi, rtol=4 * np.finfo(float).eps, maxiter=200)

    x, u, zeros, residual = _glued_eigenfunction(work, lam, tol, n_samples, max_steps)
    n_calls += 2
    if residual > RESIDUAL_TOL:
        log.warning("eigenvalue k=%d: matching residual %.3g above %.1g", k, residual, RESIDUAL_TOL)
    lam_signed = lam if sign == "+" else -lam
    return EigenPair(
        lam=float(lam_signed),
        sign=sign,
        k=k,
        nodal_count=int(zeros.size + 2),
        x=x,
        u=u,
        zeros=zeros,
        terminal_residual=float(residual),
        n_evaluations=n_calls,
        spec=spec,
    )


def eigenvalues(spec: ProblemSpec, ks, sign: str = "+", **kwargs) -> list[EigenPair]:
    """Convenience loop over several indices."""
    return [eigenvalue(spec, k, sign, **kwargs) for k in ks]


def _piece_integral(x: np.ndarray, y: np.ndarray) -> float:
    if x.size < 2:
        return 0.0
    return float(np.trapezoid(y, x))


def rayleigh_quotient(spec: ProblemSpec, x, u) -> float:
    """``int a |u'|^p / int rho |u|^p`` for a sampled function.

    ``u'`` comes from second-order centered differences; both integrals use the
    composite trapezoid rule on each interval between breakpoints of ``a`` and
    ``rho`` so that jumps of the weights are integrated with one-sided values.

    Raises:
        DegenerateDenominatorError: ``|int rho |u|^p| < 1e-12``.
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape != u.shape or x.ndim != 1 or x.size < 3:
        raise DomainError("rayleigh_quotient needs matching 1-D samples (at least 3)")
    p = spec.p
    du = np.gradient(u, x, edge_order=2)
    br, ac, rc = spec._aligned
    num = 0.0
    den = 0.0
    for j in range(br.size - 1):
        lo, hi = br[j], br[j + 1]
        inside = (x > lo) & (x < hi)
        xs = x[inside]
        us = u[inside]
        dus = du[inside]
        # close the piece at its ends with interpolated values
        xe = np.r_[lo, xs, hi]
        ue = np.r_[np.interp(lo, x, u), us, np.interp(hi, x, u)]
        due = np.r_[np.interp(lo, x, du), dus, np.interp(hi, x, du)]
        aval = ac[j, 0] + ac[j, 1] * xe + ac[j, 2] * np.sin(ac[j, 3] * xe + ac[j, 4])
        rval = rc[j, 0] + rc[j, 1] * xe + rc[j, 2] * np.sin(rc[j, 3] * xe + rc[j, 4])
        num += _piece_integral(xe, aval * np.abs(due) ** p)
        den += _piece_integral(xe, rval * np.abs(ue) ** p)
    if abs(den) < 1e-12:
        raise DegenerateDenominatorError(f"int rho |u|^p = {den:.3g} is numerically zero")
    return num / den


def weyl_estimate(spec: ProblemSpec, k: int, sign: str = "+") -> float:
    """Weyl estimate (k-corrected) ``(k pi_p / int (rho^+-)^(1/p))^p``.

    Only defined for ``a == 1``. The factor ``k`` makes the estimate exact for
    constant weights.
    """
    sign = _check_sign(sign)
    if not spec.a.is_constant(1.0):
        raise DomainError("the Weyl estimate is stated for a == 1")
    w = spec.rho if sign == "+" else -spec.rho
    mass = positive_part_power_integral(w, 1.0 / spec.p)
    if mass <= 0.0:
        raise DomainError(f"weight has no {'positive' if sign == '+' else 'negative'} part")
    val = (k * pi_p(spec.p) / mass) ** spec.p
    return val if sign == "+" else -val
