"""Lyapunov-type inequalities evaluated on concrete data.

Each function returns a :class:`BoundReport` holding the left- and right-hand
sides of one inequality ``lhs <= rhs``. When the inequality fails the report
certifies that no nontrivial solution with that weight exists, which is how
these inequalities are used in practice.

The right-hand sides are deliberately different and kept apart:

* ``thm_lyapi``: ``sup_x |int_0^x rho|``
* ``thm_lyapu``: ``lam_k * sup_(a,b) |int_a^b rho|``
* ``thm_lyapi2`` / ``thm_lyapimp``: ``sup_x int_0^x rho`` (signed, no absolute value)
* ``classical``: ``lam_k * int rho^+``
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, UnsupportedCoefficientError
from .pmath import _check_p
from .weights import (
    PiecewiseWeight,
    max_oscillation,
    power_integral,
    primitive,
    signed_sup_primitive,
    split_parts,
    sup_abs_primitive,
)

__all__ = [
    "BOUND_NAMES",
    "BoundReport",
    "bound_lyapi",
    "bound_lyapu",
    "bound_classical",
    "bounds_harris_kong",
    "bound_higher_order",
    "das_vatsala_constant",
    "das_vatsala_report",
    "taylor_embedding_constant",
    "nodal_domain_reports",
    "all_bounds",
]

BOUND_NAMES = (
    "thm_lyapi",
    "thm_lyapu",
    "classical",
    "harris_kong_left",
    "harris_kong_right",
    "thm_lyapi2",
    "thm_lyapimp",
    "das_vatsala_reference",
)

SATISFACTION_RTOL = 1e-12
NONEXISTENCE = "certifies nonexistence of a nontrivial solution"


@dataclass
class BoundReport:
    """Both sides of one inequality ``lhs <= rhs``."""

    name: str
    lhs: float
    rhs: float
    satisfied: bool = field(init=False)
    slack: float = field(init=False)
    inputs: dict = field(default_factory=dict)
    note: str = ""

    def __post_init__(self):
        if self.name not in BOUND_NAMES:
            raise DomainError(f"unknown bound {self.name!r}")
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)
        self.satisfied = self.lhs <= self.rhs + SATISFACTION_RTOL * max(1.0, abs(self.rhs))
        self.slack = self.rhs - self.lhs
        if not self.satisfied and not self.note:
            self.note = NONEXISTENCE

    @property
    def relative_slack(self) -> float:
        """``(rhs - lhs) / rhs``: 0 for a sharp bound, close to 1 for a loose one."""
        return self.slack / self.rhs if self.rhs != 0 else math.inf

    def to_dict(self) -> dict:
        out = asdict(self)
        out["inputs"] = _jsonable(self.inputs)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, PiecewiseWeight):
        return obj.to_dict()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def _inv_coef_integral(a: PiecewiseWeight, p: float, lo: float = 0.0, hi: float | None = None) -> float:
    return power_integral(a, -1.0 / (p - 1.0), lo, hi)


def _spec_echo(spec) -> dict:
    return {"p": spec.p, "L": spec.L, "a": spec.a, "rho": spec.rho}


def bound_lyapi(spec) -> BoundReport:
    """``(1/p) (int a^(-1/(p-1)))^(1-p) <= sup_x |int_0^x rho|``.

    Necessary for a nontrivial Dirichlet solution of
    ``-(a |u'|^(p-2) u')' = rho |u|^(p-2) u``; pass the weight already multiplied
    by the eigenvalue when checking an eigenpair.
    """
    p = spec.p
    lhs = _inv_coef_integral(spec.a, p) ** (1.0 - p) / p
    rhs = sup_abs_primitive(spec.rho)
    return BoundReport("thm_lyapi", lhs, rhs, inputs=_spec_echo(spec))


def bound_lyapu(spec, k: int, lam_k: float) -> BoundReport:
    """``(k^(p-1)/p) (int a^(-1/(p-1)))^(1-p) <= |lam_k| sup_(a,b) |int_a^b rho|``.

    A negative ``lam_k`` is read as the k-th eigenvalue of the negative ladder,
    i.e. the bound is applied to ``-rho`` and ``-lam_k``; the oscillation of
    ``rho`` and ``-rho`` coincide.
    """
    p = spec.p
    lhs = k ** (p - 1.0) / p * _inv_coef_integral(spec.a, p) ** (1.0 - p)
    rhs = abs(lam_k) * max_oscillation(spec.rho)
    return BoundReport("thm_lyapu", lhs, rhs, inputs={**_spec_echo(spec), "k": k, "lambda": lam_k})


def _require_unit_coefficient(spec, what: str):
    if not spec.a.is_constant(1.0):
        raise UnsupportedCoefficientError(f"{what} is stated for a == 1 only")


def bound_classical(spec, k: int, lam_k: float) -> BoundReport:
    """``2^p k^p / L^(p-1) <= lam_k int rho^+`` (positive-part bound, ``a == 1``)."""
    _require_unit_coefficient(spec, "the classical positive-part bound")
    p, L = spec.p, spec.L
    parts = split_parts(spec.rho)
    mass = parts.positive if lam_k >= 0 else parts.negative
    lhs = 2.0**p * k**p / L ** (p - 1.0)
    rhs = abs(lam_k) * mass
    return BoundReport("classical", lhs, rhs, inputs={**_spec_echo(spec), "k": k, "lambda": lam_k})


def bounds_harris_kong(spec) -> tuple[BoundReport, BoundReport]:
    """Mixed-boundary inequalities ``1 <= L^(p-1) sup_x int_0^x rho`` and ``1 <= L^(p-1) sup_x int_x^L rho``.

    The first is necessary for a solution with ``u'(0) = u(L) = 0``, the second
    for ``u(0) = u'(L) = 0``. Only stated for ``a == 1``.
    """
    _require_unit_coefficient(spec, "the mixed-boundary inequalities")
    scale = spec.L ** (spec.p - 1.0)
    echo = _spec_echo(spec)
    left = BoundReport(
        "harris_kong_left", 1.0, scale * signed_sup_primitive(spec.rho), inputs={**echo, "bc": "u'(0)=u(L)=0"}
    )
    right = BoundReport(
        "harris_kong_right",
        1.0,
        scale * signed_sup_primitive(spec.rho, from_right=True),
        inputs={**echo, "bc": "u(0)=u'(L)=0"},
    )
    return left, right


def _higher_order_constant(m: int, p: float, L: float) -> float:
    if int(m) != m or m < 2:
        raise DomainError(
            f"m={m}: the constant contains (m-2)!, which is undefined for m < 2; the m = 1 case is not covered"
        )
    m = int(m)
    return (m - 1) ** (p - 1.0) * math.factorial(m - 2) ** p / (p * L ** (m * p - p))


def bound_higher_order(m: int, p: float, a: PiecewiseWeight, L: float, rho: PiecewiseWeight) -> BoundReport:
    """Bound for the order-2m quasilinear problem with clamped ends.

    ``((m-1)^(p-1) [(m-2)!]^p / (p L^(mp-p))) (int a^(-1/(p-1)))^(1-p) <= sup_x int_0^x rho``.
    At ``p = 2`` and ``a == 1`` this is ``(m-1) [(m-2)!]^2 / (2 L^(2m-1))`` and the
    report is named ``thm_lyapi2``.
    """
    p = _check_p(p)
    if not math.isclose(a.L, L, rel_tol=1e-12) or not math.isclose(rho.L, L, rel_tol=1e-12):
        raise DomainError("a and rho must live on [0, L]")
    lhs = _higher_order_constant(m, p, L) * _inv_coef_integral(a, p) ** (1.0 - p)
    rhs = signed_sup_primitive(rho)
    name = "thm_lyapi2" if p == 2.0 and a.is_constant(1.0) else "thm_lyapimp"
    return BoundReport(name, lhs, rhs, inputs={"m": m, "p": p, "L": L, "a": a, "rho": rho})


def das_vatsala_constant(m: int, L: float) -> float:
    """Reference constant ``2 * 4^(2m-1) (2m-1) [(m-2)!]^2 / (2 L^(2m-1))`` for nonnegative weights."""
    if int(m) != m or m < 2:
        raise DomainError(f"m={m}: constant undefined for m < 2")
    m = int(m)
    return 2.0 * 4.0 ** (2 * m - 1) * (2 * m - 1) * math.factorial(m - 2) ** 2 / (2.0 * L ** (2 * m - 1))


def das_vatsala_report(m: int, L: float, rho: PiecewiseWeight) -> BoundReport:
    """Report-only comparison: the reference constant against ``int rho^+``."""
    return BoundReport(
        "das_vatsala_reference",
        das_vatsala_constant(m, L),
        split_parts(rho).positive,
        inputs={"m": m, "L": L, "rho": rho},
        note="reference only; stated for p = 2, a == 1 and rho >= 0",
    )


def taylor_embedding_constant(m: int, p: float, a: PiecewiseWeight, L: float) -> float:
    """``C`` with ``||u||_inf <= C (int a |u^(m)|^p)^(1/p)`` when ``u^(j)(0) = 0`` for ``j < m``.

    ``C = L^(m-1) / (m-1)! * (int_0^L a^(-1/(p-1)))^((p-1)/p)``.
    """
    p = _check_p(p)
    if int(m) != m or m < 1:
        raise DomainError(f"m must be a positive integer, got {m!r}")
    m = int(m)
    return L ** (m - 1) / math.factorial(m - 1) * _inv_coef_integral(a, p) ** ((p - 1.0) / p)


def nodal_domain_reports(spec, pair) -> list[BoundReport]:
    """Apply the prefix bound on every nodal domain of an eigenfunction.

    On ``(x_{i-1}, x_i)`` the eigenfunction solves the equation with weight
    ``lam * rho`` and vanishes at both ends, so
    ``(1/p) (int_{x_{i-1}}^{x_i} a^(-1/(p-1)))^(1-p) <= |lam| sup |int_{x_{i-1}}^x rho|``.
    """
    p = spec.p
    lam = pair.lam
    rho = spec.rho if lam >= 0 else -spec.rho
    Q = primitive(rho)
    nodes = pair.nodes
    out = []
    for i, (lo, hi) in enumerate(zip(nodes[:-1], nodes[1:])):
        integral = _inv_coef_integral(spec.a, p, lo, hi)
        qmin, qmax = Q.extrema(lo, hi)
        q0 = Q(lo)
        sup_local = max(abs(qmax - q0), abs(qmin - q0))
        out.append(
            BoundReport(
                "thm_lyapi",
                integral ** (1.0 - p) / p,
                abs(lam) * sup_local,
                inputs={"domain": i + 1, "x_left": lo, "x_right": hi, "lambda": lam, "coef_integral": integral},
            )
        )
    return out


def all_bounds(spec, pairs) -> list[BoundReport]:
    """Every inequality that applies to ``spec`` and a list of computed eigenpairs."""
    reports = []
    for pair in pairs:
        reports.append(bound_lyapu(spec, pair.k, pair.lam))
        if spec.a.is_constant(1.0):
            reports.append(bound_classical(spec, pair.k, pair.lam))
        if pair.k == 1:
            scaled = spec.with_rho(spec.rho.scale(pair.lam))
            rep = bound_lyapi(scaled)
            rep.inputs["lambda"] = pair.lam
            reports.append(rep)
    if spec.a.is_constant(1.0):
        reports.extend(bounds_harris_kong(spec))
    return reports
