"""Uniform-grid quadrature, reconstruction and difference stencils on [0, 1].

All routines assume N + 1 nodes with N even.
"""

from __future__ import annotations

import numpy as np


def nodes(N: int) -> np.ndarray:
    return np.linspace(0.0, 1.0, N + 1)


def _pair_integrals(v: np.ndarray, dx: float) -> np.ndarray:
    # Simpson panel over [x_{2j}, x_{2j+2}]
    return dx / 3.0 * (v[0:-2:2] + 4.0 * v[1:-1:2] + v[2::2])


def _right_tail(v: np.ndarray, dx: float) -> np.ndarray:
    """int_{x_{2j}}^1 v for j = 0 .. N/2 - 1 (index 0 is the full integral)."""
    return np.cumsum(_pair_integrals(v, dx)[::-1])[::-1]


def simpson(v: np.ndarray, dx: float) -> float:
    """Composite Simpson integral of v over [0, 1].

    Shares its summation with :func:`reconstruct_u`, so
    ``simpson(v) == -reconstruct_u(v)[0]`` bit for bit.
    """
    return float(_right_tail(v, dx)[0])


def reconstruct_u(v: np.ndarray, dx: float) -> np.ndarray:
    """u(x) = -int_x^1 v(s) ds, fourth order, with u[N] = 0 exactly.

    Even nodes take cumulative Simpson panels from the right; odd nodes step
    back one cell from their even neighbour with a four-point cubic rule.
    """
    N = v.size - 1
    u = np.zeros_like(v)
    u[0:-1:2] = -_right_tail(v, dx)
    # cells [x_i, x_{i+1}] for odd i
    i = np.arange(1, N, 2)
    cell = np.empty(i.size)
    inner = i + 2 <= N
    ii = i[inner]
    cell[inner] = dx / 24.0 * (-v[ii - 1] + 13.0 * v[ii] + 13.0 * v[ii + 1] - v[ii + 2])
    # last cell [x_{N-1}, x_N]: cubic through the four rightmost nodes
    cell[~inner] = dx / 24.0 * (9.0 * v[N] + 19.0 * v[N - 1] - 5.0 * v[N - 2] + v[N - 3])
    u[i] = u[i + 1] - cell
    return u


def ddx(f: np.ndarray, dx: float) -> np.ndarray:
    """Fourth-order first derivative.

    Central five-point stencil in the interior, biased five-point stencils at
    nodes 1 and N-1, fully one-sided at the end nodes.
    """
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * dx)
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * dx)
    d[-2] = (3.0 * f[-1] + 10.0 * f[-2] - 18.0 * f[-3] + 6.0 * f[-4] - f[-5]) / (12.0 * dx)
    d[0] = edge_derivative(f, dx)
    d[-1] = (25.0 * f[-1] - 48.0 * f[-2] + 36.0 * f[-3] - 16.0 * f[-4] + 3.0 * f[-5]) / (12.0 * dx)
    return d


def edge_derivative(f: np.ndarray, dx: float) -> float:
    """One-sided fourth-order f'(0)."""
    return float((-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * dx))


def second_difference(f: np.ndarray, dx: float) -> np.ndarray:
    """(f[i+1] - 2 f[i] + f[i-1]) / dx^2 at interior nodes; NaN at the ends."""
    out = np.full_like(f, np.nan)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / dx**2
    return out
