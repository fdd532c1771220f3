"""Scalar kernels for the p-Laplacian: conjugate exponents, ``phi_p`` and ``pi_p``."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError

__all__ = ["PExponent", "conjugate", "phi_p", "pi_p", "pi_p_closed_form"]


def _check_p(p: float) -> float:
    p = float(p)
    if not p > 1.0 or not math.isfinite(p):
        raise DomainError(f"exponent p must be a finite number > 1, got {p!r}")
    return p


def conjugate(p: float) -> float:
    """Return the Hölder conjugate ``q = p / (p - 1)``."""
    p = _check_p(p)
    return p / (p - 1.0)


@dataclass(frozen=True)
class PExponent:
    """An exponent ``p > 1`` together with its conjugate ``q``."""

    p: float
    q: float

    @classmethod
    def of(cls, p: float) -> "PExponent":
        p = _check_p(p)
        return cls(p, conjugate(p))

    def __post_init__(self):
        _check_p(self.p)
        _check_p(self.q)
        if abs(1.0 / self.p + 1.0 / self.q - 1.0) > 1e-14:
            raise DomainError(f"p={self.p} and q={self.q} are not conjugate")


def phi_p(s, p: float):
    """Odd power map ``|s|^(p-2) s``.

    Works elementwise on arrays. The value at ``s = 0`` is 0 for every ``p > 1``;
    for ``p < 2`` the map is not differentiable there, so callers must not
    finite-difference across zero.
    """
    p = _check_p(p)
    s_arr = np.asarray(s, dtype=float)
    out = np.sign(s_arr) * np.abs(s_arr) ** (p - 1.0)
    if out.ndim == 0:
        return float(out)
    return out


def _pi_p_integrand_regular(s: float, p: float) -> float:
    # (1 - s^p)^(-1/p) = (1 - s)^(-1/p) * ((1 - s) / (1 - s^p))^(1/p); the second factor is smooth on [0, 1]
    if s >= 1.0:
        return p ** (-1.0 / p)
    if s <= 0.0:
        return 1.0
    one_minus_sp = -math.expm1(p * math.log(s))
    return ((1.0 - s) / one_minus_sp) ** (1.0 / p)


def pi_p(p: float) -> float:
    """The constant ``pi_p = 2 (p-1)^(1/p) * int_0^1 (1 - s^p)^(-1/p) ds``.

    The endpoint singularity at ``s = 1`` is factored out as an algebraic weight
    ``(1 - s)^(-1/p)`` and handled by QUADPACK's QAWS rule.

    >>> round(pi_p(2.0), 12) == round(math.pi, 12)
    True
    """
    p = _check_p(p)
    val, _err = integrate.quad(
        _pi_p_integrand_regular,
        0.0,
        1.0,
        args=(p,),
        weight="alg",
        wvar=(0.0, -1.0 / p),
        epsabs=1e-14,
        epsrel=1e-14,
        limit=200,
    )
    return 2.0 * (p - 1.0) ** (1.0 / p) * val


def pi_p_closed_form(p: float) -> float:
    """Closed form ``2 pi (p-1)^(1/p) / (p sin(pi/p))`` of :func:`pi_p`."""
    p = _check_p(p)
    return 2.0 * math.pi * (p - 1.0) ** (1.0 / p) / (p * math.sin(math.pi / p))
