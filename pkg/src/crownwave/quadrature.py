"""Quadrature rules and extrapolation shared by the distribution modules."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _ts_unit(level: int, tmax: float):
    h = 2.0 ** (-level)
    t = np.arange(-tmax, tmax + h / 2, h)
    u = 0.5 * math.pi * np.sinh(t)
    # fractions of the interval measured from the left / right ends
    fa = 1.0 / (1.0 + np.exp(-2.0 * u))
    fb = 1.0 / (1.0 + np.exp(2.0 * u))
    w = h * 0.5 * math.pi * np.cosh(t) / np.cosh(u) ** 2 * 0.5
    keep = w > 1e-300
    return fa[keep], fb[keep], w[keep], t[keep]


def tanh_sinh(a: float, b: float, level: int = 6, tmax: float = 4.0):
    """Nodes and weights of the double-exponential rule on [a, b].

    Node positions near an endpoint are computed as endpoint + offset with
    the offset formed directly, so integrands singular at an endpoint see
    the true (tiny) distance instead of a cancelled difference.
    """
    fa, fb, w, t = _ts_unit(level, tmax)
    L = b - a
    x = np.where(t <= 0, a + L * fa, b - L * fb)
    return x, w * L


def tanh_sinh_ends(a: float, b: float, level: int = 6, tmax: float = 4.0):
    """Nodes, weights, and each node's distance from a and from b (both accurate)."""
    fa, fb, w, t = _ts_unit(level, tmax)
    L = b - a
    da = np.where(t <= 0, L * fa, L - L * fb)
    db = np.where(t <= 0, L - L * fa, L * fb)
    x = np.where(t <= 0, a + da, b - db)
    return x, w * L, da, db


def tanh_sinh_offsets(L: float, level: int = 6, tmax: float = 4.0):
    """Offsets d in (0, L) from a singular left endpoint, with weights."""
    fa, fb, w, t = _ts_unit(level, tmax)
    d = np.where(t <= 0, L * fa, L - L * fb)
    return d, w * L


@lru_cache(maxsize=None)
def _leggauss(m: int):
    return np.polynomial.legendre.leggauss(m)


def gauss_legendre(a: float, b: float, m: int):
    x, w = _leggauss(m)
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


def composite_gauss(edges, m: int = 10):
    """Gauss-Legendre with m nodes on every panel between consecutive edges."""
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = gauss_legendre(a, b, m)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def graded_edges(a: float, b: float, toward: str = "a", ratio: float = 0.5, levels: int = 20):
    """Panel edges on [a, b] refined geometrically toward one end."""
    L = b - a
    if toward == "a":
        d = L * ratio ** np.arange(levels, -1, -1)
        return np.concatenate([[a], a + d])
    d = L * ratio ** np.arange(0, levels + 1)
    return np.concatenate([b - d, [b]])


def pairwise_sum(x):
    """Deterministic pairwise (tree) summation along axis 0."""
    x = np.asarray(x)
    while x.shape[0] > 1:
        if x.shape[0] % 2:
            x = np.concatenate([x, np.zeros((1,) + x.shape[1:], dtype=x.dtype)])
        x = x[0::2] + x[1::2]
    return x[0]


def neville_at_zero(s, values):
    """Value at s = 0 of the interpolating polynomial through (s_i, values_i)."""
    s = np.asarray(s, dtype=float)
    p = [complex(v) for v in values]
    m = len(s)
    for k in range(1, m):
        for i in range(m - k):
            j = i + k
            p[i] = (s[j] * p[i] - s[i] * p[i + 1]) / (s[j] - s[i])
    return p[0]


def richardson_to_zero(s, values, order: int = 2):
    """Polynomial extrapolation to s = 0 removing the s^1..s^order terms.

    Uses the order+1 smallest s.  The error estimate compares against the
    next lower order on the same points (when available).
    """
    s = np.asarray(s, dtype=float)
    values = np.asarray(values, dtype=complex)
    idx = np.argsort(s)
    s, values = s[idx], values[idx]
    k = min(order + 1, len(s))
    est = neville_at_zero(s[:k], values[:k])
    if k >= 2:
        lower = neville_at_zero(s[: k - 1], values[: k - 1])
        err = abs(est - lower)
    else:
        err = float("inf")
    return est, err
