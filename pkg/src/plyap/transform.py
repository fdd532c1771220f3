"""Change of variables ``y = P(x) = int_0^x a^(-1/(p-1))`` removing the coefficient ``a``.

Under ``v(y) = u(x)`` the problem with coefficient ``a`` and weight ``rho`` on
``[0, L]`` becomes the problem with coefficient 1 and weight
``Q(y) = a(x)^(1/(p-1)) rho(x)`` on ``[0, ell]``, ``ell = P(L)``, with the same
eigenvalues. The composed weight leaves the closed-form segment family, so it
is returned as a sampled (piecewise linear) weight.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import DomainError
from .pmath import _check_p
from .weights import (
    PiecewiseWeight,
    _seg_value,
    _segment_index,
    aligned_coefficients,
    cumulative_power_integral,
    weight_range,
)

__all__ = ["ChangeOfVariables", "SampledWeight", "build_transform", "transformed_weight"]


@dataclass(frozen=True)
class ChangeOfVariables:
    """Tabulated ``P`` with a piecewise cubic Hermite inverse.

    ``x_grid``/``y_grid`` hold the table; one Hermite spline per segment of
    ``a`` (using the exact derivative ``dx/dy = a^(1/(p-1))``) keeps kinks of
    ``P`` at breakpoints out of the interpolants.
    """

    p: float
    L: float
    ell: float
    x_grid: np.ndarray
    y_grid: np.ndarray
    seg_x: np.ndarray  # breakpoints of a
    seg_y: np.ndarray  # P at those breakpoints
    _forward: tuple
    _inverse: tuple

    def P(self, x):
        x_arr = np.asarray(x, dtype=float)
        idx = np.clip(np.searchsorted(self.seg_x, x_arr, side="right") - 1, 0, len(self._forward) - 1)
        out = np.empty(x_arr.shape)
        for j in np.unique(idx):
            sel = idx == j
            out[sel] = self._forward[j](x_arr[sel])
        return float(out) if out.ndim == 0 else out

    def inverse(self, y):
        y_arr = np.asarray(y, dtype=float)
        idx = np.clip(np.searchsorted(self.seg_y, y_arr, side="right") - 1, 0, len(self._inverse) - 1)
        out = np.empty(y_arr.shape)
        for j in np.unique(idx):
            sel = idx == j
            out[sel] = self._inverse[j](y_arr[sel])
        out = np.clip(out, 0.0, self.L)
        return float(out) if out.ndim == 0 else out


def build_transform(a: PiecewiseWeight, p: float, n_grid: int = 4096) -> ChangeOfVariables:
    """Tabulate ``P`` on ``n_grid + 1`` uniform points (plus the breakpoints of ``a``).

    Raises:
        DomainError: ``a`` is not bounded below by a positive constant, or
            ``n_grid < 16``.
    """
    p = _check_p(p)
    if int(n_grid) < 16:
        raise DomainError(f"n_grid must be at least 16, got {n_grid}")
    amin, _ = weight_range(a)
    if amin <= 0.0:
        raise DomainError(f"coefficient must be positive for the change of variables (min {amin:g})")
    e = -1.0 / (p - 1.0)
    L = a.L
    x_grid = np.union1d(np.linspace(0.0, L, int(n_grid) + 1), a.breaks)
    y_grid = cumulative_power_integral(a, e, x_grid)
    if not np.all(np.isfinite(y_grid)) or not np.all(np.diff(y_grid) > 0):
        raise DomainError("P is not finite and strictly increasing; coefficient too degenerate")

    fwd, inv = [], []
    seg_y = np.empty(a.breaks.size)
    for j, (row, lo, hi) in enumerate(zip(a.coef, a.breaks[:-1], a.breaks[1:])):
        i0 = np.searchsorted(x_grid, lo)
        i1 = np.searchsorted(x_grid, hi)
        xs = x_grid[i0 : i1 + 1]
        ys = y_grid[i0 : i1 + 1]
        aval = _seg_value(row, xs)
        dy = aval**e
        fwd.append(CubicHermiteSpline(xs, ys, dy, extrapolate=True))
        inv.append(CubicHermiteSpline(ys, xs, 1.0 / dy, extrapolate=True))
        seg_y[j] = ys[0]
        seg_y[j + 1] = ys[-1]
    return ChangeOfVariables(
        p=p,
        L=L,
        ell=float(y_grid[-1]),
        x_grid=x_grid,
        y_grid=y_grid,
        seg_x=a.breaks,
        seg_y=seg_y,
        _forward=tuple(fwd),
        _inverse=tuple(inv),
    )


@dataclass(frozen=True)
class SampledWeight:
    """Grid function on ``[0, ell]``, linear between samples.

    Jumps sit at ``breaks``; each piece between consecutive breaks carries its
    own sample arrays so both one-sided limits are stored.
    """

    breaks: np.ndarray
    pieces: tuple  # ((y, values), ...) one per interval of breaks

    @property
    def L(self) -> float:
        return float(self.breaks[-1])

    @property
    def y(self) -> np.ndarray:
        return np.concatenate([y for y, _ in self.pieces])

    @property
    def values(self) -> np.ndarray:
        return np.concatenate([v for _, v in self.pieces])

    def __call__(self, y):
        y_arr = np.asarray(y, dtype=float)
        idx = np.clip(np.searchsorted(self.breaks, y_arr, side="right") - 1, 0, len(self.pieces) - 1)
        out = np.empty(y_arr.shape)
        for j in np.unique(idx):
            sel = idx == j
            ys, vs = self.pieces[j]
            out[sel] = np.interp(y_arr[sel], ys, vs)
        return float(out) if out.ndim == 0 else out

    def to_piecewise(self) -> PiecewiseWeight:
        """Exact piecewise-linear representation for the shooting solver."""
        brs, kinds, rows = [0.0], [], []
        for ys, vs in self.pieces:
            slope = np.diff(vs) / np.diff(ys)
            intercept = vs[:-1] - slope * ys[:-1]
            for s, c, end in zip(slope, intercept, ys[1:]):
                brs.append(end)
                if s == 0.0:
                    kinds.append("constant")
                    rows.append([c, 0, 0, 0, 0])
                else:
                    kinds.append("linear")
                    rows.append([c, s, 0, 0, 0])
        brs[-1] = self.L
        return PiecewiseWeight(np.array(brs), tuple(kinds), np.array(rows))


def transformed_weight(
    cov: ChangeOfVariables,
    a: PiecewiseWeight,
    rho: PiecewiseWeight,
    p: float | None = None,
    resolution: int = 4096,
) -> SampledWeight:
    """Sample ``Q(y) = a(x)^(1/(p-1)) rho(x)``, ``x = P^{-1}(y)``, on ``[0, ell]``.

    Breakpoints of ``a`` and ``rho`` are mapped exactly (by quadrature of
    ``a^(-1/(p-1))``), so jumps of ``Q`` fall on sample boundaries; each piece
    gets about ``resolution * width / ell`` uniformly spaced samples.
    """
    p = cov.p if p is None else _check_p(p)
    if not math.isclose(rho.L, cov.L, rel_tol=1e-12):
        raise DomainError("rho and the transform live on different intervals")
    e_in = 1.0 / (p - 1.0)
    br_x, (ac, rc) = aligned_coefficients(a, rho)
    br_x[-1] = cov.L
    br_y = cumulative_power_integral(a, -e_in, br_x)
    br_y[-1] = cov.ell
    dy = cov.ell / max(int(resolution), 1)
    pieces = []
    for j in range(br_x.size - 1):
        y0, y1 = br_y[j], br_y[j + 1]
        n = max(2, int(math.ceil((y1 - y0) / dy)) + 1)
        ys = np.linspace(y0, y1, n)
        xs = cov.inverse(ys)
        xs = np.clip(xs, br_x[j], br_x[j + 1])
        xs[0], xs[-1] = br_x[j], br_x[j + 1]
        vals = _seg_value(ac[j], xs) ** e_in * _seg_value(rc[j], xs)
        pieces.append((ys, vals))
    return SampledWeight(br_y, tuple(pieces))
