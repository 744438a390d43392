"""Time steppers for complex state vectors and flattened density matrices.

``integrate`` is an adaptive Dormand-Prince 5(4) pair (the ode45 scheme).
``integrate_exponential`` is a fixed-step exponential Runge-Kutta method
(Cox-Matthews ETDRK4) for problems ``y' = L y + N(t, y)`` with a large,
constant, diagonal ``L``; it is used when blockade shifts are so large that
an explicit method becomes stability-limited.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "IntegrationError",
    "IntegratorOptions",
    "NumericalError",
    "integrate",
    "integrate_exponential",
    "phi_functions",
]

Rhs = Callable[[float, np.ndarray], np.ndarray]

# Dormand & Prince (1980) coefficients.
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
# 5th-order weights minus embedded 4th-order weights.
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 5.0


class IntegrationError(RuntimeError):
    """Step budget exhausted or step size underflow; carries the last accepted state."""

    def __init__(self, message, t, y):
        super().__init__(message)
        self.t = t
        self.y = y


class NumericalError(IntegrationError):
    """The right-hand side produced NaN or Inf."""


@dataclass(frozen=True)
class IntegratorOptions:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-10
    max_steps: int = 1_000_000
    initial_step: float | None = None

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


def _initial_step(rhs, t0, y0, f0, opts, span):
    # Hairer, Norsett & Wanner, Solving ODEs I, sec. II.4.
    scale = opts.abs_tol + opts.rel_tol * np.abs(y0)
    d0 = np.max(np.abs(y0) / scale)
    d1 = np.max(np.abs(f0) / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = rhs(t0 + h0, y0 + h0 * f0)
    d2 = np.max(np.abs(f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return min(100 * h0, h1, span)


def integrate(rhs: Rhs, y0, t0: float, t1: float, opts: IntegratorOptions | None = None,
              stats: dict | None = None) -> np.ndarray:
    """Integrate ``y' = rhs(t, y)`` from ``t0`` to ``t1`` and return ``y(t1)``.

    Local errors are controlled per component against
    ``abs_tol + rel_tol * |y|`` in the max norm.  Integration backwards in
    time (``t1 < t0``) is allowed.  If ``stats`` is given it receives the
    number of accepted/rejected steps and right-hand-side evaluations.
    """
    opts = opts or IntegratorOptions()
    y = np.array(y0, dtype=complex, copy=True)
    span = t1 - t0
    if span == 0:
        return y
    direction = 1.0 if span > 0 else -1.0
    span = abs(span)

    def f(t, yy):
        out = rhs(t, yy)
        if not np.all(np.isfinite(out)):
            raise NumericalError(f"non-finite derivative at t={t}", t, yy)
        return out

    t = t0
    k1 = f(t, y)
    nfev = 1
    if opts.initial_step is not None:
        h = min(abs(opts.initial_step), span)
    else:
        h = _initial_step(lambda tt, yy: f(t0 + direction * (tt - t0), yy) * direction,
                          t0, y, k1 * direction, opts, span)
        nfev += 1
    accepted = rejected = 0
    order_exp = -1.0 / 5.0
    ks = [k1] + [None] * 6
    tmp = np.empty_like(y)
    err = np.empty_like(y)
    while True:
        remaining = span - direction * (t - t0)
        if remaining <= span * 1e-14:
            break
        if accepted + rejected >= opts.max_steps:
            raise IntegrationError(f"step budget {opts.max_steps} exhausted at t={t}", t, y)
        last = h >= remaining
        if last:
            h = remaining
        hs = direction * h
        for i in range(1, 7):
            yi = y.copy()
            for a, k in zip(_A[i], ks):
                if a:
                    np.multiply(k, hs * a, out=tmp)
                    yi += tmp
            ti = t1 if (last and _C[i] == 1.0) else t + _C[i] * hs
            ks[i] = f(ti, yi)
        nfev += 6
        y_new = yi
        err.fill(0)
        for e, k in zip(_E, ks):
            if e:
                np.multiply(k, hs * e, out=tmp)
                err += tmp
        scale = opts.abs_tol + opts.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err_norm = float(np.max(np.abs(err) / scale))
        if err_norm <= 1.0:
            t = t1 if last else t + hs
            y = y_new
            ks[0] = ks[6]
            accepted += 1
            factor = _MAX_FACTOR if err_norm == 0 else min(_MAX_FACTOR, max(_MIN_FACTOR, _SAFETY * err_norm ** order_exp))
            if last:
                break
            h *= factor
        else:
            rejected += 1
            h *= max(_MIN_FACTOR, _SAFETY * err_norm ** order_exp)
            if h < 1e-14 * max(1.0, abs(t)):
                raise IntegrationError(f"step size underflow at t={t}", t, y)
    if stats is not None:
        stats.update(accepted=accepted, rejected=rejected, nfev=nfev)
    return y


def phi_functions(z, order: int = 3):
    """``exp(z)`` and ``phi_1 .. phi_order`` evaluated elementwise.

    ``phi_k(z) = sum_j z**j / (j + k)!``; a Taylor series is used for small
    ``|z|`` where the closed forms cancel catastrophically.
    """
    z = np.asarray(z, dtype=complex)
    ez = np.exp(z)
    small = np.abs(z) < 0.5
    zs = np.where(small, 1.0, z)
    out = [ez]
    prev = ez
    for k in range(1, order + 1):
        # phi_k = (phi_{k-1} - 1/(k-1)!) / z
        cur = (prev - 1.0 / math.factorial(k - 1)) / zs
        zz = z[small]
        series = np.zeros_like(zz)
        term = np.ones_like(zz)
        for j in range(20):
            series += term / math.factorial(j + k)
            term = term * zz
        cur[small] = series
        out.append(cur)
        prev = cur
    return out


def integrate_exponential(nonlinear: Rhs, linear_diag, y0, t0: float, t1: float,
                          steps: int) -> np.ndarray:
    """Integrate ``y' = diag(linear_diag) y + nonlinear(t, y)`` with ETDRK4.

    The diagonal part is propagated exactly, so the step size is set by
    ``nonlinear`` alone.  Fixed step ``(t1 - t0) / steps``; fourth order.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    h = (t1 - t0) / steps
    lin = np.asarray(linear_diag, dtype=complex)
    e_full, p1, p2, p3 = phi_functions(h * lin, 3)
    e_half, q1 = phi_functions(0.5 * h * lin, 1)
    f1 = h * (p1 - 3 * p2 + 4 * p3)
    f2 = h * 2 * (p2 - 2 * p3)
    f3 = h * (4 * p3 - p2)
    hq = 0.5 * h * q1
    y = np.array(y0, dtype=complex, copy=True)
    for i in range(steps):
        t = t0 + i * h
        tm = t + 0.5 * h
        n_y = nonlinear(t, y)
        ey = e_half * y
        a = ey + hq * n_y
        n_a = nonlinear(tm, a)
        b = ey + hq * n_a
        n_b = nonlinear(tm, b)
        c = e_half * a + hq * (2 * n_b - n_y)
        n_c = nonlinear(t1 if i == steps - 1 else t + h, c)
        y = e_full * y + f1 * n_y + f2 * (n_a + n_b) + f3 * n_c
        if not np.all(np.isfinite(y)):
            raise NumericalError(f"non-finite state at t={t + h}", t + h, y)
    return y
