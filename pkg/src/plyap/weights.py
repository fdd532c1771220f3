"""Exact piecewise weights on ``[0, L]``.

A :class:`PiecewiseWeight` is a finite concatenation of segments, each one of

* ``constant``:  ``c``
* ``linear``:    ``c + s*x``
* ``sinusoid``:  ``c + A*sin(omega*x + phase)``

written in the *global* coordinate ``x``. Every segment has a closed-form
antiderivative and closed-form roots, so primitives, their extrema and the
positive/negative parts of a weight are computed without quadrature. The same
type represents both the principal coefficient ``a`` and the (possibly
sign-changing) weight ``rho``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate

from .errors import DomainError, ResourceError

__all__ = [
    "KINDS",
    "PiecewiseWeight",
    "Primitive",
    "evaluate",
    "primitive",
    "sup_abs_primitive",
    "max_oscillation",
    "signed_sup_primitive",
    "split_parts",
    "SplitParts",
    "rescale_periodic",
    "ap_constant",
    "harmonic_mean_star",
    "power_integral",
    "cumulative_power_integral",
    "weight_range",
    "DEFAULT_SEGMENT_CAP",
    "positive_part_power_integral",
    "aligned_coefficients",
    "stack",
]

KINDS = ("constant", "linear", "sinusoid")
_KIND_CODE = {k: i for i, k in enumerate(KINDS)}

DEFAULT_SEGMENT_CAP = 200_000

# Gauss-Legendre rule used for composite quadrature of smooth functions of a segment
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@dataclass(frozen=True, eq=False)
class PiecewiseWeight:
    """Piecewise closed-form function on ``[0, L]``.

    Attributes:
        breaks: strictly increasing breakpoints, ``breaks[0] == 0`` and ``breaks[-1] == L``.
        kinds: segment kind names, one per segment.
        coef: ``(n, 5)`` array of ``(c, s, A, omega, phase)`` per segment.
    """

    breaks: np.ndarray
    kinds: tuple
    coef: np.ndarray

    def __post_init__(self):
        breaks = np.ascontiguousarray(self.breaks, dtype=float)
        coef = np.ascontiguousarray(self.coef, dtype=float).reshape(-1, 5)
        kinds = tuple(self.kinds)
        if breaks.ndim != 1 or breaks.size < 2:
            raise DomainError("a weight needs at least one segment")
        if breaks[0] != 0.0:
            raise DomainError(f"first breakpoint must be 0, got {breaks[0]!r}")
        if not np.all(np.diff(breaks) > 0):
            raise DomainError("breakpoints must be strictly increasing")
        if len(kinds) != breaks.size - 1 or coef.shape[0] != len(kinds):
            raise DomainError("kinds/coef do not match the number of segments")
        if not np.all(np.isfinite(coef)):
            raise DomainError("segment coefficients must be finite")
        unknown = set(kinds) - set(_KIND_CODE)
        if unknown:
            raise DomainError(f"unknown segment kind(s) {sorted(unknown)!r}")
        code = np.array([_KIND_CODE[k] for k in kinds])
        s, A, om = coef[:, 1], coef[:, 2], coef[:, 3]
        if np.any((code == 0) & ((s != 0.0) | (A != 0.0))):
            raise DomainError("constant segment with slope or amplitude")
        if np.any((code == 1) & (A != 0.0)):
            raise DomainError("linear segment with a sinusoidal part")
        if np.any((code == 2) & ((s != 0.0) | (om == 0.0))):
            raise DomainError("sinusoid segment needs zero slope and nonzero omega")
        breaks.setflags(write=False)
        coef.setflags(write=False)
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "coef", coef)
        object.__setattr__(self, "kinds", kinds)

    # construction -------------------------------------------------------

    @classmethod
    def constant(cls, value: float, L: float) -> "PiecewiseWeight":
        return cls(np.array([0.0, L]), ("constant",), np.array([[value, 0, 0, 0, 0]]))

    @classmethod
    def step(cls, values: Sequence[float], ends: Sequence[float]) -> "PiecewiseWeight":
        """Piecewise constant weight; ``ends[i]`` is the right end of segment ``i``."""
        values = list(values)
        ends = list(ends)
        if len(values) != len(ends):
            raise DomainError("step weight needs one end per value")
        coef = np.zeros((len(values), 5))
        coef[:, 0] = values
        return cls(np.r_[0.0, ends], ("constant",) * len(values), coef)

    @classmethod
    def linear(cls, intercept: float, slope: float, L: float) -> "PiecewiseWeight":
        kind = "linear" if slope != 0 else "constant"
        return cls(np.array([0.0, L]), (kind,), np.array([[intercept, slope, 0, 0, 0]]))

    @classmethod
    def sinusoid(
        cls, amplitude: float, omega: float, phase: float = 0.0, offset: float = 0.0, L: float = 1.0
    ) -> "PiecewiseWeight":
        """``offset + amplitude * sin(omega * x + phase)`` on ``[0, L]``."""
        if amplitude == 0:
            return cls.constant(offset, L)
        return cls(np.array([0.0, L]), ("sinusoid",), np.array([[offset, 0, amplitude, omega, phase]]))

    @classmethod
    def from_dict(cls, data: dict) -> "PiecewiseWeight":
        """Build from the JSON form ``{"L": .., "segments": [{"kind", "end", "params"}]}``."""
        try:
            L = float(data["L"])
            segs = data["segments"]
        except (KeyError, TypeError) as exc:
            raise DomainError(f"malformed weight object: {data!r}") from exc
        if not segs:
            raise DomainError("weight has no segments")
        ends, kinds, rows = [], [], []
        for seg in segs:
            try:
                kind, params = seg.get("kind"), seg.get("params", {})
                row = cls._segment_row(kind, params)
                ends.append(float(seg["end"]))
            except (AttributeError, KeyError, TypeError, ValueError) as exc:
                raise DomainError(f"malformed segment {seg!r}") from exc
            kinds.append(kind)
            rows.append(row)
        if ends[-1] != L:
            raise DomainError(f"last segment end {ends[-1]} differs from L={L}")
        return cls(np.r_[0.0, ends], tuple(kinds), np.array(rows))

    @staticmethod
    def _segment_row(kind, params) -> list:
        if kind == "constant":
            row = [params.get("value", 0.0), 0, 0, 0, 0]
        elif kind == "linear":
            row = [params.get("intercept", 0.0), params.get("slope", 0.0), 0, 0, 0]
        elif kind == "sinusoid":
            row = [
                params.get("offset", 0.0),
                0,
                params.get("amplitude", 0.0),
                params.get("omega", 0.0),
                params.get("phase", 0.0),
            ]
        else:
            raise DomainError(f"unknown segment kind {kind!r}")
        return [float(v) for v in row]

    def to_dict(self) -> dict:
        segs = []
        for kind, end, (c, s, A, om, ph) in zip(self.kinds, self.breaks[1:], self.coef):
            if kind == "constant":
                params = {"value": c}
            elif kind == "linear":
                params = {"intercept": c, "slope": s}
            else:
                params = {"offset": c, "amplitude": A, "omega": om, "phase": ph}
            segs.append({"kind": kind, "end": float(end), "params": {k: float(v) for k, v in params.items()}})
        return {"L": float(self.L), "segments": segs}

    # basic properties -----------------------------------------------------

    @property
    def L(self) -> float:
        return float(self.breaks[-1])

    @property
    def n_segments(self) -> int:
        return len(self.kinds)

    def is_constant(self, value: float | None = None) -> bool:
        """True when the weight is one constant (optionally equal to ``value``)."""
        if not all(k == "constant" for k in self.kinds):
            return False
        c = self.coef[:, 0]
        if not np.all(c == c[0]):
            return False
        return value is None or c[0] == value

    def __call__(self, x, side: str = "right"):
        return evaluate(self, x, side=side)

    # algebra ----------------------------------------------------------------

    def scale(self, factor: float) -> "PiecewiseWeight":
        coef = self.coef.copy()
        coef[:, [0, 1, 2]] *= factor
        if factor == 0:
            return PiecewiseWeight(self.breaks, ("constant",) * self.n_segments, np.zeros_like(coef))
        return PiecewiseWeight(self.breaks, self.kinds, coef)

    def __neg__(self) -> "PiecewiseWeight":
        return self.scale(-1.0)

    def shift(self, offset: float) -> "PiecewiseWeight":
        coef = self.coef.copy()
        coef[:, 0] += offset
        return PiecewiseWeight(self.breaks, self.kinds, coef)

    def reflect(self) -> "PiecewiseWeight":
        """The weight ``x -> w(L - x)``."""
        L = self.L
        breaks = L - self.breaks[::-1]
        breaks[0], breaks[-1] = 0.0, L
        coef = self.coef[::-1].copy()
        c, s, om, ph = coef[:, 0].copy(), coef[:, 1].copy(), coef[:, 3], coef[:, 4]
        coef[:, 0] = c + s * L
        coef[:, 1] = -s
        # A sin(om (L - y) + ph) = A sin(om y + pi - om L - ph)
        wavy = om != 0.0
        coef[wavy, 4] = np.mod(np.pi - om[wavy] * L - ph[wavy], 2.0 * np.pi)
        return PiecewiseWeight(breaks, self.kinds[::-1], coef)

    def __add__(self, other: "PiecewiseWeight") -> "PiecewiseWeight":
        if not isinstance(other, PiecewiseWeight):
            return NotImplemented
        if not math.isclose(self.L, other.L, rel_tol=1e-14, abs_tol=0.0):
            raise DomainError("cannot add weights on different intervals")
        br = _merge_breaks(self.breaks, other.breaks)
        mid = 0.5 * (br[:-1] + br[1:])
        i = _segment_index(self.breaks, mid)
        j = _segment_index(other.breaks, mid)
        kinds, rows = [], []
        for a, b in zip(self.coef[i], other.coef[j]):
            row = a.copy()
            row[0] += b[0]
            row[1] += b[1]
            if b[2] != 0.0:
                if row[2] == 0.0:
                    row[2:5] = b[2:5]
                elif row[3] == b[3]:
                    # phasor sum of two sinusoids with the same angular frequency
                    z = a[2] * np.exp(1j * a[4]) + b[2] * np.exp(1j * b[4])
                    row[2], row[4] = abs(z), float(np.angle(z))
                else:
                    raise DomainError("sum of sinusoids with different frequencies is not representable")
            if row[2] != 0.0 and row[1] != 0.0:
                raise DomainError("sum of a linear and a sinusoidal segment is not representable")
            kinds.append("sinusoid" if row[2] != 0.0 else ("linear" if row[1] != 0.0 else "constant"))
            if row[2] == 0.0:
                row[3] = row[4] = 0.0
            rows.append(row)
        return PiecewiseWeight(br, tuple(kinds), np.array(rows))

    def positive_part_is_null(self) -> bool:
        """True when ``max(w, 0)`` vanishes almost everywhere."""
        return split_parts(self).positive <= 0.0


def _merge_breaks(b1: np.ndarray, b2: np.ndarray) -> np.ndarray:
    br = np.union1d(b1, b2)
    # drop near-duplicates created by rounding of equal breakpoints
    keep = np.r_[True, np.diff(br) > 1e-13 * br[-1]]
    br = br[keep]
    br[-1] = b1[-1]
    return br


def _segment_index(breaks: np.ndarray, x, side: str = "right") -> np.ndarray:
    n = breaks.size - 1
    if side == "right":
        idx = np.searchsorted(breaks, x, side="right") - 1
    else:
        idx = np.searchsorted(breaks, x, side="left") - 1
    return np.clip(idx, 0, n - 1)


def _seg_value(coef_rows: np.ndarray, x) -> np.ndarray:
    c, s, A, om, ph = (coef_rows[..., k] for k in range(5))
    return c + s * x + A * np.sin(om * x + ph)


def _seg_integral(row: np.ndarray, lo, hi):
    """Exact integral of one segment's formula over ``[lo, hi]`` (vectorized in lo/hi)."""
    c, s, A, om, ph = row
    val = c * (hi - lo) + 0.5 * s * (hi - lo) * (hi + lo)
    if A != 0.0:
        # cos(a) - cos(b) = -2 sin((a+b)/2) sin((a-b)/2)
        val = val + (2.0 * A / om) * np.sin(0.5 * om * (hi + lo) + ph) * np.sin(0.5 * om * (hi - lo))
    return val


def _arcsin_solutions(r: float, t_lo: float, t_hi: float) -> np.ndarray:
    """All ``t`` in ``(t_lo, t_hi)`` with ``sin(t) == r``."""
    if abs(r) > 1.0:
        return np.empty(0)
    t0 = math.asin(r)
    out = []
    for base in {t0, math.pi - t0}:
        k0 = math.ceil((t_lo - base) / (2 * math.pi))
        k1 = math.floor((t_hi - base) / (2 * math.pi))
        if k1 >= k0:
            out.append(base + 2 * math.pi * np.arange(k0, k1 + 1))
    if not out:
        return np.empty(0)
    t = np.unique(np.concatenate(out))
    return t[(t > t_lo) & (t < t_hi)]


def _seg_roots(row: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Zeros of one segment's formula strictly inside ``(lo, hi)``."""
    c, s, A, om, ph = row
    if A != 0.0:
        t_a, t_b = sorted((om * lo + ph, om * hi + ph))
        t = _arcsin_solutions(-c / A, t_a, t_b)
        x = (t - ph) / om
    elif s != 0.0:
        x = np.array([-c / s])
    else:
        return np.empty(0)
    return np.sort(x[(x > lo) & (x < hi)])


def _seg_stationary(row: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Interior stationary points of one segment's formula (sinusoids only)."""
    c, s, A, om, ph = row
    if A == 0.0:
        return np.empty(0)
    t_a, t_b = sorted((om * lo + ph, om * hi + ph))
    t = np.concatenate([_arcsin_solutions(1.0, t_a, t_b), _arcsin_solutions(-1.0, t_a, t_b)])
    x = (t - ph) / om
    return np.sort(x[(x > lo) & (x < hi)])


def evaluate(w: PiecewiseWeight, x, side: str = "right"):
    """Pointwise value of ``w``.

    At an interior breakpoint the right limit is returned (``side="left"`` gives
    the left limit); at ``x = L`` the left limit is used.
    """
    x_arr = np.asarray(x, dtype=float)
    L = w.L
    if np.any(x_arr < 0.0) or np.any(x_arr > L) or np.any(~np.isfinite(x_arr)):
        raise DomainError(f"evaluation point outside [0, {L}]")
    idx = _segment_index(w.breaks, x_arr, side=side)
    val = _seg_value(w.coef[idx], x_arr)
    if val.ndim == 0:
        return float(val)
    return val


def weight_range(w: PiecewiseWeight) -> tuple[float, float]:
    """Exact ``(inf, sup)`` of ``w`` over the closure of each segment."""
    lo_b, hi_b = w.breaks[:-1], w.breaks[1:]
    ends = np.r_[_seg_value(w.coef, lo_b), _seg_value(w.coef, hi_b)]
    vmin, vmax = float(ends.min()), float(ends.max())
    for j in np.nonzero(w.coef[:, 2] != 0.0)[0]:
        pts = _seg_stationary(w.coef[j], lo_b[j], hi_b[j])
        if pts.size:
            v = _seg_value(w.coef[j], pts)
            vmin, vmax = min(vmin, float(v.min())), max(vmax, float(v.max()))
    return vmin, vmax


@dataclass(frozen=True)
class Primitive:
    """Exact antiderivative ``Q(x) = int_0^x w`` of a piecewise weight."""

    base: PiecewiseWeight
    values: np.ndarray  # Q at breakpoints

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        w = self.base
        if np.any(x_arr < 0.0) or np.any(x_arr > w.L):
            raise DomainError(f"evaluation point outside [0, {w.L}]")
        idx = _segment_index(w.breaks, x_arr)
        out = np.empty(x_arr.shape)
        flat_x = x_arr.reshape(-1)
        flat_i = idx.reshape(-1)
        flat_o = out.reshape(-1)
        for seg in np.unique(flat_i):
            sel = flat_i == seg
            left = w.breaks[seg]
            flat_o[sel] = self.values[seg] + _seg_integral(w.coef[seg], left, flat_x[sel])
        if out.ndim == 0:
            return float(out)
        return out

    @property
    def total(self) -> float:
        return float(self.values[-1])

    def critical_points(self, lo: float = 0.0, hi: float | None = None) -> np.ndarray:
        """Breakpoints and interior zeros of the integrand lying in ``[lo, hi]``."""
        hi = self.base.L if hi is None else hi
        _, plo, phi, _ = _sign_pieces(self.base)
        pts = np.r_[plo, phi]
        pts = pts[(pts > lo) & (pts < hi)]
        return np.unique(np.r_[lo, pts, hi])

    def extrema(self, lo: float = 0.0, hi: float | None = None) -> tuple[float, float]:
        """Exact ``(min Q, max Q)`` over ``[lo, hi]``."""
        vals = self(self.critical_points(lo, hi))
        return float(vals.min()), float(vals.max())


def primitive(w: PiecewiseWeight) -> Primitive:
    """Exact primitive with ``Q(0) = 0``, continuous across breakpoints."""
    seg_int = np.array([_seg_integral(row, a, b) for row, a, b in zip(w.coef, w.breaks[:-1], w.breaks[1:])])
    values = np.r_[0.0, np.cumsum(seg_int)]
    return Primitive(w, values)


def sup_abs_primitive(w: PiecewiseWeight) -> float:
    """``sup_{0<=x<=L} |int_0^x w|``."""
    qmin, qmax = primitive(w).extrema()
    return max(abs(qmin), abs(qmax))


def max_oscillation(w: PiecewiseWeight) -> float:
    """``sup_{(a,b)} |int_a^b w| = max Q - min Q``."""
    qmin, qmax = primitive(w).extrema()
    return qmax - qmin


def signed_sup_primitive(w: PiecewiseWeight, from_right: bool = False) -> float:
    """``sup_x int_0^x w`` or, with ``from_right``, ``sup_x int_x^L w``."""
    Q = primitive(w)
    qmin, qmax = Q.extrema()
    if from_right:
        return Q.total - qmin
    return qmax


@dataclass(frozen=True)
class SplitParts:
    positive: float
    negative: float
    mean: float
    l1: float

    def __iter__(self):
        return iter((self.positive, self.negative, self.mean, self.l1))


def _sign_pieces(w: PiecewiseWeight):
    """Split every segment at its roots.

    Returns ``(seg, lo, hi, sign)`` arrays describing pieces on which ``w`` keeps
    one sign (``sign`` is that of the midpoint value).
    """
    coef = w.coef
    lo_b, hi_b = w.breaks[:-1], w.breaks[1:]
    c, s, A = coef[:, 0], coef[:, 1], coef[:, 2]
    seg_parts, lo_parts, hi_parts = [], [], []

    plain = A == 0.0
    root = np.full(coef.shape[0], np.nan)
    lin = plain & (s != 0.0)
    root[lin] = -c[lin] / s[lin]
    split = lin & (root > lo_b) & (root < hi_b)
    whole = plain & ~split
    idx = np.nonzero(whole)[0]
    seg_parts.append(idx)
    lo_parts.append(lo_b[idx])
    hi_parts.append(hi_b[idx])
    idx = np.nonzero(split)[0]
    seg_parts.extend([idx, idx])
    lo_parts.extend([lo_b[idx], root[idx]])
    hi_parts.extend([root[idx], hi_b[idx]])
    for j in np.nonzero(~plain)[0]:
        pts = np.r_[lo_b[j], _seg_roots(coef[j], lo_b[j], hi_b[j]), hi_b[j]]
        seg_parts.append(np.full(pts.size - 1, j))
        lo_parts.append(pts[:-1])
        hi_parts.append(pts[1:])
    seg = np.concatenate(seg_parts).astype(int)
    lo = np.concatenate(lo_parts)
    hi = np.concatenate(hi_parts)
    sign = np.sign(_seg_value(coef[seg], 0.5 * (lo + hi)))
    return seg, lo, hi, sign


def _rows_integral(rows: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    c, s, A, om, ph = rows.T
    val = c * (hi - lo) + 0.5 * s * (hi - lo) * (hi + lo)
    with np.errstate(invalid="ignore", divide="ignore"):
        osc = np.where(A != 0.0, (2.0 * A / np.where(om == 0, 1.0, om)) * np.sin(0.5 * om * (hi + lo) + ph) * np.sin(0.5 * om * (hi - lo)), 0.0)
    return val + osc


def split_parts(w: PiecewiseWeight) -> SplitParts:
    """Integrals of the positive and negative parts, the mean and the L1 norm."""
    seg, lo, hi, sign = _sign_pieces(w)
    pieces = np.abs(_rows_integral(w.coef[seg], lo, hi))
    pos = float(np.sum(pieces[sign > 0]))
    neg = float(np.sum(pieces[sign < 0]))
    return SplitParts(pos, neg, (pos - neg) / w.L, pos + neg)


def rescale_periodic(w: PiecewiseWeight, eps: float, max_segments: int = DEFAULT_SEGMENT_CAP) -> PiecewiseWeight:
    """Exact representation of ``x -> w(x / eps)`` on ``[0, L]`` with ``w`` one L-period.

    The rescaled function has period ``eps * L``; a trailing partial period is
    cut at ``x = L``.
    """
    eps = float(eps)
    if not eps > 0.0 or not math.isfinite(eps):
        raise DomainError(f"eps must be positive, got {eps!r}")
    L = w.L
    if eps == 1.0:
        return w
    n_full = math.floor(1.0 / eps + 1e-9)
    frac = 1.0 / eps - n_full
    has_partial = frac > 1e-9
    n_periods = n_full + (1 if has_partial else 0)
    n_needed = n_periods * w.n_segments
    if n_needed > max_segments:
        raise ResourceError(
            f"rescaling with eps={eps} needs {n_needed} segments, above the cap of {max_segments}; "
            f"raise max_segments to at least {n_needed}"
        )
    period = eps * L
    j = np.arange(n_periods)
    # breakpoints of period j: j*period + eps*breaks
    br = (j[:, None] * period + eps * w.breaks[None, :-1]).reshape(-1)
    coef = np.tile(w.coef, (n_periods, 1))
    shift = np.repeat(j * L, w.n_segments)
    # u = x/eps - j*L, so a segment c + s*u + A sin(om*u + ph) becomes one in x
    c, s, A, om, ph = coef.T.copy()
    coef[:, 0] = c - s * shift
    coef[:, 1] = s / eps
    coef[:, 3] = om / eps
    coef[:, 4] = np.where(A != 0.0, np.mod(ph - om * shift, 2 * math.pi), 0.0)
    kinds = w.kinds * n_periods
    keep = br < L * (1 - 1e-12)
    br = br[keep]
    coef = coef[keep]
    kinds = tuple(k for k, flag in zip(kinds, keep) if flag)
    return PiecewiseWeight(np.r_[br, L], kinds, coef)


def cumulative_power_integral(w: PiecewiseWeight, exponent: float, grid: np.ndarray) -> np.ndarray:
    """``int_0^{grid_i} w(x)**exponent dx`` by composite 16-point Gauss-Legendre.

    Cells are split at the breakpoints of ``w`` so every rule sees a smooth
    integrand. Requires ``w > 0`` on ``[0, L]``.
    """
    grid = np.asarray(grid, dtype=float)
    inner = w.breaks[(w.breaks > 0.0) & (w.breaks < grid.max())]
    pts = np.union1d(np.r_[0.0, grid], inner)
    lo, hi = pts[:-1], pts[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _GL_NODES[None, :]
    seg = _segment_index(w.breaks, mid)
    vals = _seg_value(w.coef[seg][:, None, :], x)
    piece = half * np.sum(_GL_WEIGHTS[None, :] * vals**exponent, axis=1)
    cum = np.r_[0.0, np.cumsum(piece)]
    return cum[np.searchsorted(pts, grid)]


def power_integral(w: PiecewiseWeight, exponent: float, lo: float = 0.0, hi: float | None = None) -> float:
    """``int_lo^hi w(x)**exponent dx`` by adaptive quadrature per segment.

    Raises:
        DomainError: ``w`` is negative somewhere, or the integral diverges.
    """
    hi = w.L if hi is None else hi
    wmin, _ = weight_range(w)
    if wmin < 0.0:
        raise DomainError(f"coefficient takes negative values (min {wmin:g})")
    total = 0.0
    for row, kind, a, b in zip(w.coef, w.kinds, w.breaks[:-1], w.breaks[1:]):
        a2, b2 = max(a, lo), min(b, hi)
        if a2 >= b2:
            continue
        if kind == "constant":
            if row[0] == 0.0 and exponent < 0:
                raise DomainError("coefficient vanishes on a whole segment")
            total += (b2 - a2) * row[0] ** exponent
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("error", integrate.IntegrationWarning)
            try:
                val, _ = integrate.quad(
                    lambda t: _seg_value(row, t) ** exponent, a2, b2, epsabs=0.0, epsrel=1e-13, limit=500
                )
            except (integrate.IntegrationWarning, ZeroDivisionError, FloatingPointError) as exc:
                raise DomainError(f"integral of w^{exponent:g} does not converge on [{a2}, {b2}]") from exc
        if not math.isfinite(val):
            raise DomainError(f"integral of w^{exponent:g} diverges on [{a2}, {b2}]")
        total += val
    return total


def harmonic_mean_star(a: PiecewiseWeight, p: float) -> float:
    """``a* = (int_0^L a^(-1/(p-1)))^(1-p)``, the homogenized principal coefficient."""
    from .pmath import _check_p

    p = _check_p(p)
    integral = power_integral(a, -1.0 / (p - 1.0))
    return integral ** (1.0 - p)


def ap_constant(a: PiecewiseWeight, p: float, n_intervals: int = 256) -> float:
    """Grid estimate (a lower bound) of the Muckenhoupt A_p constant of ``a``.

    Maximizes ``(int_B a)(int_B a^(-1/(p-1)))^(p-1) / |B|^p`` over all intervals
    ``B`` whose endpoints lie on a uniform grid with ``n_intervals`` cells.
    """
    from .pmath import _check_p

    p = _check_p(p)
    amin, _ = weight_range(a)
    if amin <= 0.0:
        raise DomainError(f"A_p estimate needs a > 0, min is {amin:g}")
    grid = np.linspace(0.0, a.L, int(n_intervals) + 1)
    A = primitive(a)(grid)
    B = cumulative_power_integral(a, -1.0 / (p - 1.0), grid)
    i, j = np.triu_indices(grid.size, k=1)
    width = grid[j] - grid[i]
    ratio = (A[j] - A[i]) * (B[j] - B[i]) ** (p - 1.0) / width**p
    return float(ratio.max())


def stack(pieces: Iterable[PiecewiseWeight]) -> PiecewiseWeight:
    """Concatenate weights defined on consecutive intervals into one."""
    breaks, kinds, rows = [0.0], [], []
    offset = 0.0
    for w in pieces:
        c, s, A, om, ph = w.coef.T.copy()
        # shift the local coordinate x_local = x - offset
        coef = np.column_stack([c - s * offset, s, A, om, np.where(A != 0, ph - om * offset, 0.0)])
        breaks.extend(offset + w.breaks[1:])
        kinds.extend(w.kinds)
        rows.append(coef)
        offset += w.L
    return PiecewiseWeight(np.array(breaks), tuple(kinds), np.vstack(rows))


def positive_part_power_integral(w: PiecewiseWeight, exponent: float) -> float:
    """``int_0^L max(w, 0)**exponent dx`` for ``exponent > 0``.

    Constant and linear pieces use their closed-form antiderivatives; sinusoidal
    pieces go through adaptive quadrature.
    """
    seg, lo, hi, sign = _sign_pieces(w)
    keep = sign > 0
    seg, lo, hi = seg[keep], lo[keep], hi[keep]
    rows = w.coef[seg]
    c, s, A = rows[:, 0], rows[:, 1], rows[:, 2]
    total = 0.0
    const = (A == 0.0) & (s == 0.0)
    total += float(np.sum((hi[const] - lo[const]) * c[const] ** exponent))
    lin = (A == 0.0) & (s != 0.0)
    if np.any(lin):
        e1 = exponent + 1.0
        f_hi = np.maximum(c[lin] + s[lin] * hi[lin], 0.0) ** e1
        f_lo = np.maximum(c[lin] + s[lin] * lo[lin], 0.0) ** e1
        total += float(np.sum((f_hi - f_lo) / (s[lin] * e1)))
    for j in np.nonzero(A != 0.0)[0]:
        row = rows[j]
        # root singularities at the piece ends limit attainable accuracy to ~1e-10
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, _ = integrate.quad(
                lambda t: max(_seg_value(row, t), 0.0) ** exponent, lo[j], hi[j], epsabs=0.0, epsrel=1e-10, limit=200
            )
        total += val
    return total


def aligned_coefficients(*weights: PiecewiseWeight) -> tuple[np.ndarray, list[np.ndarray]]:
    """Common breakpoint grid of several weights and their coefficient rows on it."""
    br = weights[0].breaks
    for w in weights[1:]:
        br = _merge_breaks(br, w.breaks)
    mid = 0.5 * (br[:-1] + br[1:])
    rows = [np.ascontiguousarray(w.coef[_segment_index(w.breaks, mid)]) for w in weights]
    return br, rows
