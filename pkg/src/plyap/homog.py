"""Periodic homogenization sweeps for ``-(a(x/eps) phi_p(u'))' = lam rho(x/eps) phi_p(u)``.

With ``a*`` the harmonic-type mean of ``a`` and ``rho_bar`` the mean of ``rho``
over one period, the eigenvalue ladders behave as follows when ``eps -> 0``:

* ``rho_bar = 0``: both ladders diverge, ``lam^+ -> +inf`` and ``lam^- -> -inf``;
* ``rho_bar > 0``: ``lam^+_k`` converges to ``(a*/rho_bar)(k pi_p / L)^p`` and ``lam^-`` diverges;
* ``rho_bar < 0``: the mirror image.

:func:`sweep` computes eigenvalues over a grid of ``eps``, attaches this
classification and evaluates the explicit lower and upper bounds used to prove
it. All bounds in a sweep row are bounds on ``|lam|``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, PlyapError
from .pmath import _check_p, pi_p
from .shooting import ProblemSpec, eigenvalue
from .weights import (
    DEFAULT_SEGMENT_CAP,
    PiecewiseWeight,
    _seg_value,
    _segment_index,
    max_oscillation,
    power_integral,
    rescale_periodic,
    split_parts,
)

__all__ = [
    "CSV_COLUMNS",
    "SweepConfig",
    "SweepRow",
    "SweepResult",
    "classify",
    "limit_eigenvalue",
    "divergence_lower_bound",
    "comparison_shift_bound",
    "test_function_upper_bound",
    "test_function_masses",
    "sweep",
]

log = logging.getLogger(__name__)

CSV_COLUMNS = ("epsilon", "k", "sign", "lambda", "lower_bound", "upper_bound", "limit", "abs_error", "status")
DEFAULT_EPSILONS = tuple(2.0**-j for j in range(2, 7))
ZERO_ERROR_RTOL = 1e-9


def limit_eigenvalue(a_star: float, rho_bar: float, p: float, L: float, k: int) -> float:
    """``(a*/rho_bar) (k pi_p / L)^p``; negative ``rho_bar`` gives the limit of the negative ladder.

    Raises:
        DomainError: ``rho_bar == 0`` (no finite limit, both ladders diverge).
    """
    p = _check_p(p)
    if rho_bar == 0.0:
        raise DomainError("rho_bar = 0: the eigenvalues diverge and there is no finite limit")
    if not (a_star > 0 and L > 0 and int(k) == k and k >= 1):
        raise DomainError(f"need a_star > 0, L > 0, k >= 1; got {a_star}, {L}, {k}")
    mag = a_star / abs(rho_bar) * (k * pi_p(p) / L) ** p
    return math.copysign(mag, rho_bar)


def divergence_lower_bound(eps: float, k: int, p: float, a_scaled: PiecewiseWeight, rho_base: PiecewiseWeight) -> float:
    """``k^(p-1) / (eps p ||rho||_1) * (int_0^L a(x/eps)^(-1/(p-1)))^(1-p)``.

    ``||rho||_1`` is taken over one base period ``[0, L]``. A zero norm gives ``+inf``.
    """
    p = _check_p(p)
    l1 = split_parts(rho_base).l1
    if l1 == 0.0:
        return math.inf
    integral = power_integral(a_scaled, -1.0 / (p - 1.0))
    return k ** (p - 1.0) / (eps * p * l1) * integral ** (1.0 - p)


def comparison_shift_bound(eps: float, k: int, p: float, a_scaled: PiecewiseWeight, rho_base: PiecewiseWeight) -> float:
    """Lower bound for ``lam^+`` when ``rho_bar < 0``, via ``sigma = rho - rho_bar``.

    Since ``rho <= sigma``, ``lam^+(rho) >= lam^+(sigma)`` and ``sigma`` has zero
    mean, so the divergence bound applies to ``sigma``. ``sigma == 0`` gives ``+inf``.

    Raises:
        DomainError: ``rho_bar >= 0``.
    """
    rho_bar = split_parts(rho_base).mean
    if not rho_bar < 0.0:
        raise DomainError(f"comparison shift needs rho_bar < 0, got {rho_bar:g}")
    sigma = rho_base.shift(-rho_bar)
    return divergence_lower_bound(eps, k, p, a_scaled, sigma)


def test_function_upper_bound(k: int, p: float, L: float, h: float, a_l1: float, rho_bar: float) -> tuple[float, float]:
    """Upper bound on ``lam^+_k`` from piecewise linear trial functions with ramps of width ``h/k``.

    Returns ``(explicit, printed)`` with ``explicit = 8 k^(p+3) ||a||_1 / (h^p L^2 rho_bar)``
    and ``printed = 8 k^(p+3) / (L^2 rho_bar)``, the form with ``||a||_1 / h^p``
    absorbed. Both are valid only once ``eps`` is small enough for the trial mass
    estimate, see :func:`test_function_masses`.
    """
    p = _check_p(p)
    if not rho_bar > 0:
        raise DomainError(f"upper bound needs rho_bar > 0, got {rho_bar!r}")
    if not (L > 0 and 0 < h < L / 2 and a_l1 > 0 and int(k) == k and k >= 1):
        raise DomainError(f"need L > 0, 0 < h < L/2, ||a||_1 > 0, k >= 1; got L={L}, h={h}, a_l1={a_l1}, k={k}")
    printed = 8.0 * k ** (p + 3.0) / (L**2 * rho_bar)
    return printed * a_l1 / h**p, printed


def test_function_masses(rho_scaled: PiecewiseWeight, k: int, p: float, h: float) -> np.ndarray:
    """``int rho(x/eps) |w_i|^p`` for the ``k`` trial functions ``w_i``.

    ``w_i`` is supported on ``[(i-1)L/k, iL/k]``, rises linearly to 1 over a
    width ``h/k``, stays at 1 and falls back symmetrically.
    """
    L = rho_scaled.L
    gx, gw = np.polynomial.legendre.leggauss(16)
    ramp = h / k
    out = np.empty(k)
    for i in range(k):
        lo, hi = i * L / k, (i + 1) * L / k
        inner = rho_scaled.breaks[(rho_scaled.breaks > lo) & (rho_scaled.breaks < hi)]
        pts = np.unique(np.r_[lo, lo + ramp, inner, hi - ramp, hi])
        a, b = pts[:-1], pts[1:]
        mid = 0.5 * (a + b)[:, None]
        half = 0.5 * (b - a)[:, None]
        x = (mid + half * gx).ravel()
        w = (half * gw).ravel()
        seg = _segment_index(rho_scaled.breaks, x)
        vals = _seg_value(rho_scaled.coef[seg], x)
        trial = np.clip(np.minimum(x - lo, hi - x) / ramp, 0.0, 1.0)
        out[i] = float(np.sum(w * vals * trial**p))
    return out


@dataclass(frozen=True)
class SweepConfig:
    """One period of ``a`` and ``rho`` on ``[0, L]`` plus the sweep grid.

    ``h`` is the ramp width of the trial functions for the upper bound
    (default ``L/4``); ``workers > 1`` runs epsilon values in separate processes.
    """

    base: ProblemSpec
    epsilons: tuple = DEFAULT_EPSILONS
    k_list: tuple = (1,)
    sign: str = "+"
    h: float | None = None
    tol: float | None = None
    max_segments: int = DEFAULT_SEGMENT_CAP
    workers: int = 1

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        if not eps:
            raise DomainError("empty epsilon grid")
        if any(not (0.0 < e <= 1.0) for e in eps):
            raise DomainError(f"epsilons must lie in (0, 1], got {eps}")
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise DomainError(f"epsilons must be strictly decreasing, got {eps}")
        ks = tuple(int(k) for k in self.k_list)
        if not ks or any(k < 1 or k != kk for k, kk in zip(ks, self.k_list)):
            raise DomainError(f"k_list must hold positive integers, got {self.k_list}")
        if self.sign not in ("+", "-", "both"):
            raise DomainError(f"sign must be '+', '-' or 'both', got {self.sign!r}")
        L = self.base.L
        h = L / 4.0 if self.h is None else float(self.h)
        if not 0.0 < h < L / 2.0:
            raise DomainError(f"h must lie in (0, L/2), got {h}")
        n_seg = self.base.breakpoints.size - 1
        need = n_seg * math.ceil(1.0 / eps[-1] - 1e-9)
        if need > self.max_segments:
            raise DomainError(f"eps={eps[-1]} needs about {need} segments, above the cap {self.max_segments}")
        object.__setattr__(self, "epsilons", eps)
        object.__setattr__(self, "k_list", ks)
        object.__setattr__(self, "h", h)

    @property
    def signs(self) -> tuple:
        return ("+", "-") if self.sign == "both" else (self.sign,)


@dataclass
class SweepRow:
    epsilon: float
    k: int
    sign: str
    lam: float = math.nan
    lower_bound: float = math.nan
    upper_bound: float = math.nan
    upper_bound_printed: float = math.nan
    limit: float = math.nan
    abs_error: float = math.nan
    nodal_count: int = 0
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def classify(rho_bar: float, sign: str) -> str:
    """``converges``, ``diverges_plus`` or ``diverges_minus`` for one ladder."""
    if sign == "+":
        return "converges" if rho_bar > 0 else "diverges_plus"
    return "converges" if rho_bar < 0 else "diverges_minus"


@dataclass
class SweepResult:
    config: SweepConfig
    rho_bar: float
    a_star: float
    rows: list
    classification: dict = field(default_factory=dict)  # (k, sign) -> label
    limits: dict = field(default_factory=dict)  # (k, sign) -> limit or None
    rates: dict = field(default_factory=dict)  # (k, sign) -> fitted r or None

    def ladder(self, k: int, sign: str) -> list:
        return [r for r in self.rows if r.k == k and r.sign == sign]

    def to_csv(self, header: str | None = None) -> str:
        buf = io.StringIO()
        if header:
            buf.write(f"# {header}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow(
                [
                    _fmt(r.epsilon),
                    r.k,
                    r.sign,
                    _fmt(r.lam),
                    _fmt(r.lower_bound),
                    _fmt(r.upper_bound),
                    _fmt(r.limit),
                    _fmt(r.abs_error),
                    r.status,
                ]
            )
        return buf.getvalue()

    def summary(self) -> dict:
        ladders = []
        for (k, sign), label in sorted(self.classification.items()):
            rows = self.ladder(k, sign)
            ladders.append(
                {
                    "k": k,
                    "sign": sign,
                    "classification": label,
                    "limit": _json_float(self.limits.get((k, sign))),
                    "rate": _json_float(self.rates.get((k, sign))),
                    "failed_rows": sum(not r.ok for r in rows),
                }
            )
        return {
            "p": self.config.base.p,
            "L": self.config.base.L,
            "rho_bar": self.rho_bar,
            "a_star": self.a_star,
            "epsilons": list(self.config.epsilons),
            "h": self.config.h,
            "ladders": ladders,
        }

    def to_json(self, with_rows: bool = False) -> str:
        out = self.summary()
        if with_rows:
            out["rows"] = [{k: _json_float(v) for k, v in asdict(r).items()} for r in self.rows]
        return json.dumps(out, sort_keys=True, indent=2)


def _fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, float):
        return repr(float(x))
    return str(x)


def _json_float(x):
    if isinstance(x, float):
        x = float(x)
    if isinstance(x, float) and not math.isfinite(x):
        return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


def _fit_rate(eps: np.ndarray, err: np.ndarray):
    good = np.isfinite(err) & (err > 0)
    if good.sum() < 2:
        return None
    slope, _ = np.polyfit(np.log(eps[good]), np.log(err[good]), 1)
    return float(slope)


def _base_stats(base: ProblemSpec):
    p, L = base.p, base.L
    rho_bar = split_parts(base.rho).mean
    scale = max(1.0, split_parts(base.rho).l1 / L)
    if abs(rho_bar) <= 1e-12 * scale:
        rho_bar = 0.0
    mean_inv = power_integral(base.a, -1.0 / (p - 1.0)) / L
    a_star = mean_inv ** (1.0 - p)
    return rho_bar, a_star


def _run_epsilon(cfg: SweepConfig, eps: float) -> list:
    base = cfg.base
    p, L = base.p, base.L
    rho_bar, a_star = _base_stats(base)
    a_l1 = power_integral(base.a, 1.0)
    rows = []
    try:
        a_eps = rescale_periodic(base.a, eps, cfg.max_segments)
        rho_eps = rescale_periodic(base.rho, eps, cfg.max_segments)
        spec = ProblemSpec(p, L, a_eps, rho_eps)
    except PlyapError as exc:
        return [
            SweepRow(eps, k, s, status=f"failed: {type(exc).__name__}: {exc}") for k in cfg.k_list for s in cfg.signs
        ]
    inv_integral = power_integral(a_eps, -1.0 / (p - 1.0))
    osc = max_oscillation(rho_eps)
    for k in cfg.k_list:
        for s in cfg.signs:
            row = SweepRow(eps, k, s)
            label = classify(rho_bar, s)
            # signed base weight of the ladder seen as a positive ladder
            base_rho = base.rho if s == "+" else -base.rho
            bar = rho_bar if s == "+" else -rho_bar
            if label == "converges":
                row.limit = limit_eigenvalue(a_star, rho_bar, p, L, k)
                row.lower_bound = k ** (p - 1.0) / p * inv_integral ** (1.0 - p) / osc if osc > 0 else math.inf
                explicit, printed = test_function_upper_bound(k, p, L, cfg.h, a_l1, bar)
                masses = test_function_masses(rho_eps if s == "+" else -rho_eps, k, p, cfg.h)
                a_ok = power_integral(a_eps, 1.0) <= 2.0 * L * a_l1
                if a_ok and np.all(masses >= L**3 * bar / (2.0 * k**3)):
                    row.upper_bound = explicit
                    row.upper_bound_printed = printed
            elif bar == 0.0:
                row.lower_bound = divergence_lower_bound(eps, k, p, a_eps, base_rho)
            else:
                row.lower_bound = comparison_shift_bound(eps, k, p, a_eps, base_rho)
            try:
                pair = eigenvalue(spec, k, s, tol=cfg.tol)
                row.lam = pair.lam
                row.nodal_count = pair.nodal_count
                if label == "converges":
                    row.abs_error = abs(pair.lam - row.limit)
            except PlyapError as exc:
                row.status = f"failed: {type(exc).__name__}: {exc}"
                log.info("eps=%g k=%d sign=%s failed: %s", eps, k, s, exc)
            rows.append(row)
    return rows


def sweep(cfg: SweepConfig) -> SweepResult:
    """Eigenvalues ``lam_{eps,k}^{+-}`` over the grid, with bounds and classification.

    Rows are ordered by decreasing ``eps``, then ``k``, then sign ``+`` before
    ``-``; a failing row is recorded with its error and the sweep continues.
    """
    rho_bar, a_star = _base_stats(cfg.base)
    if cfg.workers > 1 and len(cfg.epsilons) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(_run_epsilon, [cfg] * len(cfg.epsilons), cfg.epsilons))
    else:
        chunks = [_run_epsilon(cfg, e) for e in cfg.epsilons]
    rows = [r for chunk in chunks for r in chunk]

    result = SweepResult(cfg, rho_bar, a_star, rows)
    eps = np.array(cfg.epsilons)
    for k in cfg.k_list:
        for s in cfg.signs:
            label = classify(rho_bar, s)
            result.classification[(k, s)] = label
            if label != "converges":
                result.limits[(k, s)] = None
                result.rates[(k, s)] = None
                continue
            ladder = result.ladder(k, s)
            limit = ladder[0].limit
            result.limits[(k, s)] = limit
            err = np.array([r.abs_error for r in ladder])
            err = np.where(err <= ZERO_ERROR_RTOL * abs(limit), 0.0, err)
            result.rates[(k, s)] = _fit_rate(eps, err)
    return result
