"""Compiled Dormand-Prince 5(4) integrator for the first-order p-Laplacian system.

The system integrated on ``[0, L]`` is

    u' = a(x)^(-1/(p-1)) * phi_q(v),      v' = -lam * rho(x) * phi_p(u),

with ``v = a * phi_p(u')``, ``u(0) = 0``, ``v(0) = v0``. Coefficients are given on
a common breakpoint grid as rows ``(c, s, A, omega, phase)`` meaning
``c + s*x + A*sin(omega*x + phase)``; the integrator never steps across a
breakpoint. Because the system is homogeneous, ``(u, v)`` is rescaled to
``(c*u, c**(p-1)*v)`` whenever its size leaves ``[1e-3, 1e3]`` and the log of the
accumulated factor is tracked separately.
"""

import math

import numpy as np
from numba import njit

# Dormand-Prince tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array(
    [
        [0, 0, 0, 0, 0, 0],
        [1 / 5, 0, 0, 0, 0, 0],
        [3 / 40, 9 / 40, 0, 0, 0, 0],
        [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
        [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
    ]
)
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_E = np.array([71 / 57600, 0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])
# continuous extension (4th order), y(x0 + t h) = y0 + h * sum_j k_j * (P[j] . [t, t^2, t^3, t^4])
_P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_MAXSTEPS = 2


@njit(cache=True)
def _coef_value(row, x):
    return row[0] + row[1] * x + row[2] * math.sin(row[3] * x + row[4])


@njit(cache=True)
def _spow(s, e):
    # sign(s) * |s|**e
    if s > 0.0:
        return s**e
    if s < 0.0:
        return -((-s) ** e)
    return 0.0


@njit(cache=True)
def _rhs(x, u, v, arow, rrow, lam, p, inv_pm1, linear):
    aval = _coef_value(arow, x)
    rval = _coef_value(rrow, x)
    if linear:
        return v / aval, -lam * rval * u
    du = aval ** (-inv_pm1) * _spow(v, inv_pm1)
    dv = -lam * rval * _spow(u, p - 1.0)
    return du, dv


@njit(cache=True)
def _dense(y0, h, k, t, comp):
    acc = 0.0
    for j in range(7):
        kj = k[j, comp]
        if kj != 0.0:
            acc += kj * (t * (_P[j, 0] + t * (_P[j, 1] + t * (_P[j, 2] + t * _P[j, 3]))))
    return y0 + h * acc


@njit(cache=True)
def shoot(breaks, acoef, rcoef, p, lam, rtol, atol, v0, sample_x, max_zeros, max_steps):
    """Integrate the system over the whole breakpoint grid.

    Returns ``(status, x_reached, u_end, v_end, log_scale_end, n_zeros, zeros,
    sample_u, sample_log_scale, n_steps, sample_v)``. ``zeros`` holds the first
    ``max_zeros`` sign changes of ``u`` in ``(0, L]``; ``n_zeros`` counts all of them.
    """
    inv_pm1 = 1.0 / (p - 1.0)
    linear = p == 2.0
    nseg = breaks.size - 1
    L = breaks[nseg]

    u = 0.0
    v = v0
    log_scale = 0.0
    sign_prev = 1.0 if v0 > 0.0 else -1.0

    zeros = np.empty(max_zeros)
    n_zeros = 0
    ns = sample_x.size
    sample_u = np.zeros(ns)
    sample_v = np.zeros(ns)
    sample_ls = np.zeros(ns)
    sp = 0
    while sp < ns and sample_x[sp] <= 0.0:
        sample_u[sp] = 0.0
        sample_v[sp] = v0
        sp += 1

    k = np.zeros((7, 2))
    h = min(L * 1e-3, breaks[1] - breaks[0])
    n_steps = 0
    x = 0.0
    for seg in range(nseg):
        xb = breaks[seg + 1]
        arow = acoef[seg]
        rrow = rcoef[seg]
        fresh = True
        while x < xb:
            if n_steps >= max_steps:
                return STATUS_MAXSTEPS, x, u, v, log_scale, n_zeros, zeros, sample_u, sample_ls, n_steps, sample_v
            last = False
            h_free = h
            if x + h >= xb or xb - (x + h) < 1e-12 * (xb - breaks[seg]):
                h = xb - x
                last = True
            if fresh:
                du, dv = _rhs(x, u, v, arow, rrow, lam, p, inv_pm1, linear)
                k[0, 0] = du
                k[0, 1] = dv
            for i in range(1, 7):
                uu = u
                vv = v
                for j in range(i):
                    uu += h * _A[i, j] * k[j, 0]
                    vv += h * _A[i, j] * k[j, 1]
                du, dv = _rhs(x + _C[i] * h, uu, vv, arow, rrow, lam, p, inv_pm1, linear)
                k[i, 0] = du
                k[i, 1] = dv
            # stage 6 is evaluated at the 5th-order solution (FSAL)
            un = u
            vn = v
            eu = 0.0
            ev = 0.0
            for j in range(7):
                un += h * _B[j] * k[j, 0]
                vn += h * _B[j] * k[j, 1]
                eu += h * _E[j] * k[j, 0]
                ev += h * _E[j] * k[j, 1]
            su = atol + rtol * max(abs(u), abs(un))
            sv = atol + rtol * max(abs(v), abs(vn))
            err = math.sqrt(0.5 * ((eu / su) ** 2 + (ev / sv) ** 2))
            if not (err <= 1.0):
                if err != err:
                    fac = 0.1
                else:
                    fac = max(0.1, 0.9 * err ** (-0.2))
                h = h * fac
                fresh = True
                if h < 1e-15 * max(1.0, abs(x)) or h < 1e-300:
                    return STATUS_UNDERFLOW, x, u, v, log_scale, n_zeros, zeros, sample_u, sample_ls, n_steps, sample_v
                continue
            n_steps += 1
            x_new = xb if last else x + h

            # samples inside (x, x_new]
            while sp < ns and sample_x[sp] <= x_new:
                t = (sample_x[sp] - x) / h
                sample_u[sp] = _dense(u, h, k, t, 0)
                sample_v[sp] = _dense(v, h, k, t, 1)
                sample_ls[sp] = log_scale
                sp += 1

            # sign changes of u
            if un == 0.0:
                if n_zeros < max_zeros:
                    zeros[n_zeros] = x_new
                n_zeros += 1
                sign_prev = 1.0 if vn > 0.0 else -1.0
            elif un * sign_prev < 0.0:
                lo = 0.0
                hi = 1.0
                for _ in range(80):
                    mid = 0.5 * (lo + hi)
                    um = _dense(u, h, k, mid, 0)
                    if um * sign_prev > 0.0:
                        lo = mid
                    else:
                        hi = mid
                    if (hi - lo) * h < 1e-13 * max(1.0, L):
                        break
                if n_zeros < max_zeros:
                    zeros[n_zeros] = x + 0.5 * (lo + hi) * h
                n_zeros += 1
                sign_prev = -sign_prev

            u = un
            v = vn
            x = x_new
            # FSAL: k[6] is the derivative at the new point
            k[0, 0] = k[6, 0]
            k[0, 1] = k[6, 1]
            fresh = False

            r = max(abs(u), abs(v) ** inv_pm1)
            if r > 1e3 or (r < 1e-3 and r > 0.0):
                c = 1.0 / r
                u *= c
                v *= c ** (p - 1.0)
                k[0, 0] *= c
                k[0, 1] *= c ** (p - 1.0)
                log_scale -= math.log(c)

            if err == 0.0:
                fac = 5.0
            else:
                fac = min(5.0, max(0.2, 0.9 * err ** (-0.2)))
            h = h * fac
            if last:
                h = max(h, h_free)
    return STATUS_OK, x, u, v, log_scale, n_zeros, zeros, sample_u, sample_ls, n_steps, sample_v
