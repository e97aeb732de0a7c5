"""One-dimensional model distributions: regularised powers, i0 boundary values,
logs, delta derivatives, their pairings with test functions and a windowed
Fourier decay probe.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
import sympy as sp

from .hyp2f1 import CutSide
from .quadrature import composite_gauss, richardson_to_zero, tanh_sinh

MAX_DERIV = 12
EPS_GRID = tuple(10.0 ** -j for j in range(2, 6))
EPS_ORDER = 2
RAPID_EXPONENT = -6.0


class ResiduePoint(ValueError):
    pass


# ----------------------------------------------------------- test functions

@lru_cache(maxsize=1)
def _profile_derivatives():
    """Rational factors R_j with psi^(j)(s) = R_j(s) psi(s), psi = exp(-1/(1-s^2))."""
    s = sp.symbols("s")
    g = -1 / (1 - s**2)
    R = sp.Integer(1)
    funcs = []
    for _ in range(MAX_DERIV + 1):
        funcs.append(sp.lambdify(s, sp.cancel(R), "numpy"))
        R = sp.cancel(sp.diff(R, s) + R * sp.diff(g, s))
    return funcs


def profile(s, order: int = 0):
    """psi^(order)(s) for the bump exp(-1/(1-s^2)) on (-1, 1)."""
    s = np.asarray(s, dtype=float)
    u = 1.0 - s * s
    inside = u > 2e-3
    out = np.zeros(s.shape)
    if np.any(inside):
        si = s[inside]
        base = np.exp(-1.0 / u[inside])
        out[inside] = _profile_derivatives()[order](si) * base
    return out


@dataclass(frozen=True)
class TestFn1D:
    """phi(x) = x^k psi((x - center)/halfwidth); k = 0 is the plain mollifier."""

    center: float = 0.0
    halfwidth: float = 1.0
    k: int = 0

    @property
    def kind(self) -> str:
        return "mollifier" if self.k == 0 else f"mollifier*monomial({self.k})"

    @property
    def support(self):
        return (self.center - self.halfwidth, self.center + self.halfwidth)

    @property
    def taylor_radius(self) -> float:
        """Distance from 0 to the nearest essential singularity of the profile."""
        lo, hi = self.support
        return min(abs(lo), abs(hi))

    def __call__(self, x):
        return self.deriv(x, 0)

    def deriv(self, x, order: int):
        if order > MAX_DERIV:
            raise ValueError(f"derivatives available up to order {MAX_DERIV}")
        x = np.asarray(x, dtype=float)
        s = (x - self.center) / self.halfwidth
        out = np.zeros(x.shape)
        for i in range(0, min(order, self.k) + 1):
            # D^i x^k = k!/(k-i)! x^(k-i)
            dmono = math.factorial(self.k) / math.factorial(self.k - i) * x ** (self.k - i)
            j = order - i
            out = out + math.comb(order, i) * dmono * profile(s, j) / self.halfwidth ** j
        return out

    def derivs_at0(self, m: int):
        return np.array([float(self.deriv(np.array(0.0), j)) for j in range(m + 1)], dtype=complex)


@dataclass(frozen=True)
class Modulated:
    """phi(x) exp(-2 pi i tau x)."""

    base: TestFn1D
    tau: float

    @property
    def support(self):
        return self.base.support

    @property
    def taylor_radius(self) -> float:
        r = self.base.taylor_radius
        if self.tau:
            r = min(r, 1.0 / (2 * math.pi * abs(self.tau)))
        return r

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.base(x) * np.exp(-2j * math.pi * self.tau * x)

    def derivs_at0(self, m: int):
        d = self.base.derivs_at0(m)
        w = -2j * math.pi * self.tau
        out = np.zeros(m + 1, dtype=complex)
        for j in range(m + 1):
            out[j] = sum(math.comb(j, i) * d[i] * w ** (j - i) for i in range(j + 1))
        return out


@dataclass(frozen=True)
class Reflected:
    """x -> phi(-x)."""

    base: object

    @property
    def support(self):
        lo, hi = self.base.support
        return (-hi, -lo)

    @property
    def taylor_radius(self) -> float:
        return self.base.taylor_radius

    def __call__(self, x):
        return self.base(-np.asarray(x, dtype=float))

    def derivs_at0(self, m: int):
        d = self.base.derivs_at0(m)
        return d * (-1.0) ** np.arange(m + 1)


@dataclass(frozen=True)
class SampledTest:
    """A test function given as a callable with known derivatives at 0 (pullback route)."""

    f: Callable
    support: tuple
    derivs: tuple
    taylor_radius: float = 0.0

    def __call__(self, x):
        return self.f(np.asarray(x, dtype=float))

    def derivs_at0(self, m: int):
        if m + 1 > len(self.derivs):
            raise ValueError("not enough derivatives supplied")
        return np.asarray(self.derivs[: m + 1], dtype=complex)


# -------------------------------------------------------- model distributions

@dataclass(frozen=True)
class XPlusPow:
    lam: complex


@dataclass(frozen=True)
class XMinusPow:
    lam: complex


@dataclass(frozen=True)
class I0Pow:
    lam: complex
    side: CutSide


@dataclass(frozen=True)
class LogI0:
    side: CutSide


@dataclass(frozen=True)
class DeltaDeriv:
    k: int


@dataclass(frozen=True)
class Heaviside:
    pass


@dataclass(frozen=True)
class ExpInv:
    """The smooth, non-analytic function e^{-1/x} for x > 0, 0 for x <= 0."""


@dataclass(frozen=True)
class PrincipalPow:
    """x^{-k} in its symmetric / antisymmetric regularised form."""

    k: int


@dataclass(frozen=True)
class PairingResult:
    value: complex
    err_est: float
    method: str


def _neg_int(lam) -> int | None:
    lam = complex(lam)
    if lam.imag == 0 and lam.real < 0 and lam.real == round(lam.real):
        return int(-round(lam.real))
    return None


def _check_power(lam):
    if _neg_int(lam) is not None:
        raise ResiduePoint(f"lambda = {lam} is an excluded residue point")


# ------------------------------------------------------------- quadrature

def _halfline(g, L, tau=0.0, level=7):
    """Integral of g over (0, L]; g may be singular at 0 and oscillate with frequency tau."""
    if L <= 0:
        return 0.0 + 0j
    per = 0.5 / abs(tau) if tau else L
    L1 = min(L, per)
    x, w = tanh_sinh(0.0, L1, level=level)
    total = np.sum(w * g(x))
    if L > L1:
        npan = int(math.ceil((L - L1) / per))
        edges = np.linspace(L1, L, npan + 1)
        xg, wg = composite_gauss(edges, 16)
        total = total + np.sum(wg * g(xg))
    return complex(total)


def _over_support(g, lo, hi, tau=0.0):
    """Integral of g over (max(lo, 0), hi]; starting at the support edge keeps its non-analytic point off the nodes."""
    a = max(lo, 0.0)
    if hi <= a:
        return 0.0 + 0j
    return _halfline(lambda u: g(a + u), hi - a, tau)


def _taylor_tail(d, x, lo: int, hi: int):
    """sum_{j=lo}^{hi} d_j x^j / j!"""
    out = np.zeros(np.shape(x), dtype=complex)
    for j in range(lo, hi + 1):
        out = out + d[j] * x**j / math.factorial(j)
    return out


def _pair_xplus(lam, phi, tau=0.0):
    """<x_+^lam, phi> with Taylor subtraction of order m = ceil(-Re lam) - 1 when Re lam <= -1."""
    lam = complex(lam)
    _check_power(lam)
    lo, hi = phi.support
    if hi <= 0:
        return PairingResult(0j, 0.0, "exact")
    # orders 0 .. nsub-1 of the Taylor polynomial are subtracted
    nsub = max(0, math.ceil(-lam.real) - 1)
    if lo >= 0 or nsub == 0:
        def g(x):
            return np.exp(lam * np.log(x)) * phi(x)

        val = _over_support(g, lo, hi, tau)
        return PairingResult(val, 1e-12 * (1 + abs(val)), "direct")
    d = phi.derivs_at0(MAX_DERIV)
    R = hi
    delta = 0.05 * phi.taylor_radius
    top = MAX_DERIV

    def g(x):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape, dtype=complex)
        small = x < delta
        xs = x[small]
        out[small] = np.exp(lam * np.log(xs)) * _taylor_tail(d, xs, nsub, top)
        xb = x[~small]
        out[~small] = np.exp(lam * np.log(xb)) * (phi(xb) - _taylor_tail(d, xb, 0, nsub - 1))
        return out

    val = _halfline(g, R, tau)
    for j in range(nsub):
        val += d[j] * R ** (lam + j + 1) / (math.factorial(j) * (lam + j + 1))
    return PairingResult(complex(val), 1e-11 * (1 + abs(val)), "regularized")


def _pair_pv(k, phi, tau=0.0):
    """<x^{-k}, phi>: even k symmetric form, odd k antisymmetric form, Taylor terms of
    the matching parity up to order k-2 subtracted."""
    lo, hi = phi.support
    R = max(abs(lo), abs(hi))
    sgn = 1.0 if k % 2 == 0 else -1.0
    orders = [j for j in range(k % 2, k - 1, 2)]
    d = phi.derivs_at0(MAX_DERIV)
    delta = 0.05 * phi.taylor_radius
    keep = [j for j in range(k, MAX_DERIV + 1) if j % 2 == k % 2]

    def g(x):
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape, dtype=complex)
        small = x < delta
        xs = x[small]
        acc = np.zeros(xs.shape, dtype=complex)
        for j in keep:
            acc = acc + 2 * d[j] * xs ** (j - k) / math.factorial(j)
        out[small] = acc
        xb = x[~small]
        sub = np.zeros(xb.shape, dtype=complex)
        for j in orders:
            sub = sub + 2 * d[j] * xb**j / math.factorial(j)
        out[~small] = (phi(xb) + sgn * phi(-xb) - sub) / xb**k
        return out

    val = _halfline(g, R, tau)
    for j in orders:
        val += -2 * d[j] / math.factorial(j) * R ** (j - k + 1) / (k - j - 1)
    return PairingResult(complex(val), 1e-11 * (1 + abs(val)), "regularized")


def _pair_log(side, phi, tau=0.0):
    sg = CutSide.parse(side).sign
    lo, hi = phi.support
    pos = _halfline(lambda x: np.log(x) * phi(x), max(hi, 0.0), tau)
    neg = _halfline(lambda x: (np.log(x) + 1j * sg * math.pi) * phi(-x), max(-lo, 0.0), tau)
    val = pos + neg
    return PairingResult(complex(val), 1e-11 * (1 + abs(val)), "direct")


def i0_decompose(lam, side):
    """(x +- i0)^lam as a list of (coefficient, model distribution)."""
    side = CutSide.parse(side)
    sg = side.sign
    k = _neg_int(lam)
    if k is not None:
        coef = -sg * 1j * math.pi * (-1) ** (k - 1) / math.factorial(k - 1)
        return [(1.0 + 0j, PrincipalPow(k)), (coef, DeltaDeriv(k - 1))]
    lam = complex(lam)
    if lam.imag == 0 and lam.real >= 0 and lam.real == round(lam.real):
        raise ValueError("nonnegative integer powers are plain polynomials; nothing to decompose")
    return [(1.0 + 0j, XPlusPow(lam)), (cmath.exp(1j * sg * math.pi * lam), XMinusPow(lam))]


def pair(dist, phi, tau: float = 0.0) -> PairingResult:
    """Regularised pairing <dist, phi>.  `tau` is a hint for the oscillation rate of phi."""
    if isinstance(phi, Modulated):
        tau = phi.tau
    if isinstance(dist, DeltaDeriv):
        d = phi.derivs_at0(dist.k)
        return PairingResult(complex((-1) ** dist.k * d[dist.k]), 0.0, "exact")
    if isinstance(dist, XPlusPow):
        return _pair_xplus(dist.lam, phi, tau)
    if isinstance(dist, XMinusPow):
        return _pair_xplus(dist.lam, Reflected(phi), tau)
    if isinstance(dist, PrincipalPow):
        return _pair_pv(dist.k, phi, tau)
    if isinstance(dist, LogI0):
        return _pair_log(dist.side, phi, tau)
    if isinstance(dist, Heaviside):
        lo, hi = phi.support
        v = _over_support(phi, lo, hi, tau)
        return PairingResult(v, 1e-12 * (1 + abs(v)), "direct")
    if isinstance(dist, ExpInv):
        lo, hi = phi.support

        def g(x):
            with np.errstate(over="ignore"):
                return np.exp(-1.0 / x) * phi(x)

        v = _over_support(g, lo, hi, tau)
        return PairingResult(v, 1e-12 * (1 + abs(v)), "direct")
    if isinstance(dist, I0Pow):
        total = 0j
        err = 0.0
        meth = "regularized"
        for coef, part in i0_decompose(dist.lam, dist.side):
            r = pair(part, phi, tau)
            total += coef * r.value
            err += abs(coef) * r.err_est
        return PairingResult(total, err, meth)
    raise TypeError(f"unknown distribution {dist!r}")


def log_i0_pair(side, phi) -> complex:
    return pair(LogI0(CutSide.parse(side)), phi).value


# ------------------------------------------------------------- eps oracle

def eps_pairing(kind: str, lam, side, phi, eps: float, level: int = 8) -> complex:
    """Plain quadrature of <(x +- i eps)^lam, phi> (kind "pow") or <log(x +- i eps), phi> ("log")."""
    sg = CutSide.parse(side).sign
    lo, hi = phi.support

    def f(x):
        zz = x + 1j * sg * eps
        if kind == "pow":
            return np.exp(complex(lam) * np.log(zz)) * phi(x)
        return np.log(zz) * phi(x)

    total = 0j
    if hi > 0:
        x, w = tanh_sinh(max(lo, 0.0), hi, level=level)
        total += np.sum(w * f(x))
    if lo < 0:
        x, w = tanh_sinh(lo, min(hi, 0.0), level=level)
        total += np.sum(w * f(x))
    return complex(total)


def eps_limit(kind: str, lam, side, phi, eps_grid=EPS_GRID, order: int = EPS_ORDER):
    """Richardson extrapolation of eps_pairing to eps = 0.  Returns (value, err_est)."""
    vals = [eps_pairing(kind, lam, side, phi, e) for e in eps_grid]
    return richardson_to_zero(eps_grid, vals, order)


# ------------------------------------------------------------ decay probe

DEFAULT_TAUS = tuple(8.0 * 2 ** (j / 4) for j in range(25))


@dataclass
class DecayTable:
    taus: np.ndarray
    plus: np.ndarray
    minus: np.ndarray
    exponent_plus: float
    exponent_minus: float
    rapid_plus: bool
    rapid_minus: bool

    def csv_rows(self):
        yield ("tau", "abs_ft_plus", "abs_ft_minus")
        for t, p, m in zip(self.taus, self.plus, self.minus):
            yield (f"{t:.10g}", f"{p:.10e}", f"{m:.10e}")


def fit_decay(taus, mags, floor):
    """Slope of log|FT| vs log tau over the top octave of points above the noise floor.

    Returns (exponent, rapid).  When the top octave of the grid has already
    sunk below the floor the decay is rapid by construction.
    """
    taus = np.asarray(taus, dtype=float)
    mags = np.asarray(mags, dtype=float)
    tmax = taus.max()
    top = taus >= tmax / 2
    ok = mags > floor
    floored = not np.all(ok[top])
    sel = ok.copy()
    if floored:
        if np.count_nonzero(ok) < 2:
            return -math.inf, True
        hi = taus[ok].max()
        sel = ok & (taus >= hi / 2) & (taus <= hi)
        if np.count_nonzero(sel) < 2:
            return -math.inf, True
    else:
        sel = top
    slope = np.polyfit(np.log(taus[sel]), np.log(mags[sel]), 1)[0]
    return float(slope), bool(floored or slope <= RAPID_EXPONENT)


def windowed_fourier(dist, window: TestFn1D, taus=DEFAULT_TAUS, floor_rel: float = 1e-13) -> DecayTable:
    """|FT(window * dist)(tau)| for tau on the grid and on its negative."""
    taus = np.asarray(taus, dtype=float)
    if callable(dist) and not isinstance(dist, (XPlusPow, XMinusPow, I0Pow, LogI0, DeltaDeriv,
                                                 Heaviside, ExpInv, PrincipalPow)):
        # a sampled function: plain oscillatory quadrature over the window
        lo, hi = window.support
        npan = int(math.ceil((hi - lo) * 2 * taus.max())) + 8
        x, w = composite_gauss(np.linspace(lo, hi, npan + 1), 16)
        base = w * window(x) * dist(x)

        def ft(t):
            return abs(np.sum(base * np.exp(-2j * math.pi * t * x)))
    else:
        def ft(t):
            return abs(pair(dist, Modulated(window, float(t))).value)

    plus = np.array([ft(t) for t in taus])
    minus = np.array([ft(-t) for t in taus])
    # roundoff floor of the oscillatory sums: relative to the window mass
    lo, hi = window.support
    xm, wm = composite_gauss(np.linspace(lo, hi, 9), 16)
    mass = float(np.sum(wm * np.abs(window(xm))))
    floor = floor_rel * max(plus.max(), minus.max(), mass)
    ep, rp = fit_decay(taus, plus, floor)
    em, rm = fit_decay(taus, minus, floor)
    return DecayTable(taus, plus, minus, ep, em, rp, rm)


# ------------------------------------------------ derivative growth of e^{-1/x}

def expinv_derivative_poly(N: int):
    """Integer coefficients p with D^N e^{-1/x} = p(1/x) e^{-1/x} (p[i] multiplies u^i)."""
    p = [1]
    for _ in range(N):
        # D [P(u) e^{-u}] with du/dx = -u^2 gives u^2 (P - P') e^{-u}
        dp = [i * p[i] for i in range(1, len(p))] + [0]
        diff = [p[i] - dp[i] for i in range(len(p))]
        p = [0, 0] + diff
    return p


def expinv_derivative_max(N: int, eps: float = 1.0, samples: int = 4000) -> float:
    """max over 0 < x <= eps of |D^N e^{-1/x}|, evaluated in log space."""
    p = expinv_derivative_poly(N)
    u = np.geomspace(1.0 / eps, 1e3 * N + 1.0 / eps, samples)
    logs = []
    for uu in u:
        val = 0
        lu = math.log(uu)
        terms = [(math.log(abs(c)) + i * lu, c > 0) for i, c in enumerate(p) if c != 0]
        m = max(t[0] for t in terms)
        acc = sum((1 if sgn else -1) * math.exp(t - m) for t, sgn in terms)
        if acc == 0:
            continue
        logs.append(m + math.log(abs(acc)) - uu)
    return math.exp(max(logs))


def derivative_growth_exceeds(N: int, Cs=(1.0, 2.0, 4.0), eps: float = 1.0) -> dict:
    m = expinv_derivative_max(N, eps)
    return {C: m > C ** (N + 1) * float(N) ** N for C in Cs}
