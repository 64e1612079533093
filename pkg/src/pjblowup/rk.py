"""Dormand-Prince 5(4) embedded pair and a standard step-size controller."""

from __future__ import annotations

import numpy as np

C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
B_LOW = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
E = tuple(b - bl for b, bl in zip(B, B_LOW))

ORDER = 5
SAFETY = 0.9
MIN_FACTOR = 0.2
MAX_FACTOR = 5.0


def dp54_step(f, t, y, dt, pin=None):
    """One Dormand-Prince trial step.

    Returns ``(y_new, err)`` where ``err`` is the difference between the
    5th- and 4th-order solutions. ``pin``, if given, is applied in place to
    every stage value and to ``y_new`` (boundary re-pinning).
    """
    k = [f(t, y)]
    for s in range(1, 7):
        ys = y + dt * sum(a * kj for a, kj in zip(A[s], k) if a != 0.0)
        if pin is not None:
            pin(ys)
        if s == 6:
            # stage 7 abscissa equals the 5th-order solution (FSAL row)
            y_new = ys
        k.append(f(t + C[s] * dt, ys))
    err = dt * sum(e * kj for e, kj in zip(E, k) if e != 0.0)
    return y_new, err


def error_norm(err, y_old, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.max(np.abs(err) / scale))


def next_dt(dt, err_norm):
    if err_norm == 0.0:
        return dt * MAX_FACTOR
    factor = SAFETY * err_norm ** (-1.0 / ORDER)
    return dt * min(MAX_FACTOR, max(MIN_FACTOR, factor))
