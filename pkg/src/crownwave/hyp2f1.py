"""Gauss hypergeometric function on C \\ [1, oo) and its boundary values on the cut.

The engine picks a convergent representation per point:

    series                 |z| <= 0.5
    connection_*           |1 - z| < 0.75   (power form, or log/digamma form
                                             when c - a - b is an integer)
    pfaff                  Re z < 0.5 and |z/(z-1)| <= 0.75
    reciprocal             |z| >= 1.5 and a - b not an integer
    continuation           anything left: Taylor stepping of the
                           hypergeometric ODE along a path avoiding the cut

Everything is vectorised over z; parameters are scalars.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .gamma import complex_gamma, digamma, rgamma

CUT_GUARD = 1e-13
MAX_TERMS = 10_000
EPS = 1e-17

SERIES_RADIUS = 0.5
CONNECTION_RADIUS = 0.75
PFAFF_RADIUS = 0.75
RECIPROCAL_MIN = 1.5

METHODS = ("series", "pfaff", "connection_noninteger", "connection_logseries",
           "reciprocal", "continuation")


class OnCut(ValueError):
    pass


class NonConvergent(RuntimeError):
    pass


class NotAdmissible(ValueError):
    pass


class CutSide(enum.Enum):
    Plus = "Plus"    # x + i0
    Minus = "Minus"  # x - i0

    @property
    def sign(self) -> int:
        return 1 if self is CutSide.Plus else -1

    @classmethod
    def parse(cls, s) -> "CutSide":
        if isinstance(s, CutSide):
            return s
        key = str(s).strip().lower()
        if key in ("plus", "+", "p"):
            return cls.Plus
        if key in ("minus", "-", "m"):
            return cls.Minus
        raise ValueError(f"unknown side {s!r}")


def check_lambda(lam, n: int, allow_rho: bool = False) -> complex:
    """Admissible spectral parameters: i[0, oo) or [0, rho); rho itself only on request."""
    lam = complex(lam)
    rho = (n - 1) / 2
    if lam.real == 0 and lam.imag >= 0:
        return lam
    if lam.imag == 0 and 0 <= lam.real < rho:
        return lam
    if allow_rho and lam.imag == 0 and lam.real == rho:
        return lam
    raise NotAdmissible(f"lambda = {lam} is not in i[0,oo) u [0, {rho})")


@dataclass(frozen=True)
class HypTriple:
    a: complex
    b: complex
    c: complex
    n: int | None = field(default=None, compare=False)
    lam: complex | None = field(default=None, compare=False)

    @classmethod
    def family(cls, n: int, lam, allow_rho: bool = True) -> "HypTriple":
        lam = check_lambda(lam, n, allow_rho=allow_rho)
        rho = (n - 1) / 2
        return cls(rho + lam, rho - lam, n / 2, n=n, lam=lam)

    def swapped(self) -> "HypTriple":
        return HypTriple(self.b, self.a, self.c, self.n, self.lam)

    @property
    def abc(self):
        return complex(self.a), complex(self.b), complex(self.c)


@dataclass(frozen=True)
class EvalResult:
    value: complex
    method: str
    err_est: float


# ------------------------------------------------------------------ helpers

def _is_int(x, tol=1e-12) -> bool:
    x = complex(x)
    return abs(x.imag) <= tol and abs(x.real - round(x.real)) <= tol


def _is_nonpos_int(x) -> bool:
    return _is_int(x) and round(complex(x).real) <= 0


def _series(a, b, c, z):
    """Raw Gauss series; returns (sum, err_est).  Stops after 3 consecutive tiny terms."""
    z = np.asarray(z, dtype=complex)
    if _is_nonpos_int(c) and not (_is_nonpos_int(a) and round(a.real) > round(c.real)) \
            and not (_is_nonpos_int(b) and round(b.real) > round(c.real)):
        raise ValueError("c is a nonpositive integer")
    s = np.ones_like(z)
    t = np.ones_like(z)
    abs_sum = np.ones(z.shape)
    small = np.zeros(z.shape, dtype=int)
    last = np.zeros(z.shape)
    k = 0
    while True:
        t = t * ((a + k) * (b + k) / ((c + k) * (k + 1))) * z
        s = s + t
        at = np.abs(t)
        abs_sum = abs_sum + at
        tiny = at <= EPS * np.abs(s)
        small = np.where(tiny, small + 1, 0)
        last = np.where(small == 1, at, last)
        k += 1
        if np.all(small >= 3):
            break
        if k > MAX_TERMS:
            raise NonConvergent("hypergeometric series exceeded 10^4 terms")
    err = last + 2.2e-16 * abs_sum
    return s, err


def _series_deriv(a, b, c, z):
    v, e = _series(a + 1, b + 1, c + 1, z)
    f = a * b / c
    return f * v, abs(f) * e


def _log_series_core(a, b, m, w, logw):
    c = a + b - m
    gc = complex_gamma(c)
    out = np.zeros_like(w)
    abs_sum = np.zeros(w.shape)
    if m > 0:
        pref = complex_gamma(m) * gc * rgamma(a) * rgamma(b)
        term = np.ones_like(w)
        acc = np.zeros_like(w)
        for k in range(m):
            if k > 0:
                term = term * ((a - m + k - 1) * (b - m + k - 1) / (k * (1 - m + k - 1))) * w
            acc = acc + term
        out = out + pref * acc / w ** m
        abs_sum = abs_sum + np.abs(out)
    pref2 = -((-1) ** m) * gc * rgamma(a - m) * rgamma(b - m)
    if pref2 == 0:
        return out, 2.2e-16 * (abs_sum + 1.0)
    # digamma values carried by recurrence
    psi_k1 = digamma(1.0)                 # psi(k+1)
    psi_km1 = digamma(float(m + 1))       # psi(k+m+1)
    psi_a = digamma(a)
    psi_b = digamma(b)
    coef = 1.0 / math.factorial(m) + 0j   # (a)_k (b)_k / (k! (k+m)!)
    wk = np.ones_like(w)
    acc = np.zeros_like(w)
    small = np.zeros(w.shape, dtype=int)
    last = np.zeros(w.shape)
    asum = np.zeros(w.shape)
    k = 0
    while True:
        term = coef * wk * (logw - psi_k1 - psi_km1 + psi_a + psi_b)
        acc = acc + term
        at = np.abs(term)
        asum = asum + at
        tiny = at <= EPS * np.maximum(np.abs(acc), 1e-300)
        small = np.where(tiny, small + 1, 0)
        last = np.where(small == 1, at, last)
        # advance k -> k+1
        coef = coef * (a + k) * (b + k) / ((k + 1) * (k + m + 1))
        psi_k1 += 1.0 / (k + 1)
        psi_km1 += 1.0 / (k + m + 1)
        psi_a += 1.0 / (a + k)
        psi_b += 1.0 / (b + k)
        wk = wk * w
        k += 1
        if k > 3 and np.all(small >= 3):
            break
        if k > MAX_TERMS:
            raise NonConvergent("log series exceeded 10^4 terms")
    out = out + pref2 * acc
    err = abs(pref2) * (last + 2.2e-16 * asum) + 2.2e-16 * abs_sum
    return out, err


def _connection(a, b, c, z, w=None, pw=None, logw=None):
    """1 - z connection.  `w` = 1 - z, `pw` = w^(c-a-b), `logw` = log w can be side-resolved.

    Returns (value, err, method).
    """
    z = np.asarray(z, dtype=complex)
    w = 1.0 - z if w is None else np.asarray(w, dtype=complex)
    s = c - a - b
    if _is_int(s):
        m = int(round(s.real))
        if logw is None:
            logw = np.log(w)
        if m <= 0:
            v, e = _log_series_core(a, b, -m, w, logw)
        else:
            # Euler: F(a,b;c;z) = w^m F(c-a, c-b; c; z), inner has c-a'-b' = -m
            v, e = _log_series_core(c - a, c - b, m, w, logw)
            v, e = v * w ** m, e * np.abs(w) ** m
        return v, e, "connection_logseries"
    if pw is None:
        pw = np.exp(s * np.log(w))
    gc = complex_gamma(c)
    A1 = gc * complex_gamma(s) * rgamma(c - a) * rgamma(c - b)
    A2 = gc * complex_gamma(-s) * rgamma(a) * rgamma(b)
    out = np.zeros_like(w)
    err = np.zeros(w.shape)
    if A1 != 0:
        f1, e1 = _series(a, b, a + b - c + 1, w)
        out = out + A1 * f1
        err = err + abs(A1) * e1
    if A2 != 0:
        f2, e2 = _series(c - a, c - b, s + 1, w)
        out = out + A2 * pw * f2
        err = err + abs(A2) * np.abs(pw) * e2
    return out, err, "connection_noninteger"


def _pfaff(a, b, c, z):
    z = np.asarray(z, dtype=complex)
    w = z / (z - 1.0)
    f, e = _series(a, c - b, c, w)
    p = np.exp(-a * np.log(1.0 - z))
    return p * f, np.abs(p) * e


def _reciprocal(a, b, c, z, log_mz=None):
    """1/z connection.  log_mz = log(-z) may carry a side-resolved branch."""
    z = np.asarray(z, dtype=complex)
    if log_mz is None:
        log_mz = np.log(-z)
    iz = 1.0 / z
    gc = complex_gamma(c)
    out = np.zeros_like(z)
    err = np.zeros(z.shape)
    B1 = gc * complex_gamma(b - a) * rgamma(b) * rgamma(c - a)
    B2 = gc * complex_gamma(a - b) * rgamma(a) * rgamma(c - b)
    if B1 != 0:
        f1, e1 = _series(a, a - c + 1, a - b + 1, iz)
        p1 = np.exp(-a * log_mz)
        out = out + B1 * p1 * f1
        err = err + abs(B1) * np.abs(p1) * e1
    if B2 != 0:
        f2, e2 = _series(b, b - c + 1, b - a + 1, iz)
        p2 = np.exp(-b * log_mz)
        out = out + B2 * p2 * f2
        err = err + abs(B2) * np.abs(p2) * e2
    return out, err


def _taylor_step(a, b, c, z0, f0, d0, h):
    """Advance (F, F') from z0 to z0 + h with the local power series of the ODE."""
    P0 = z0 * (1 - z0)
    P1 = 1 - 2 * z0
    Q0 = c - (a + b + 1) * z0
    Q1 = -(a + b + 1)
    R = -a * b
    y0, y1 = f0, d0
    val = y0 + y1 * h
    der = y1
    hk = h  # h^k with k = 1
    small = 0
    k = 0
    scale = abs(val) + abs(der) * abs(h)
    while True:
        y2 = -((P1 * k * (k + 1) + Q0 * (k + 1)) * y1 + (-k * (k - 1) + Q1 * k + R) * y0) / (P0 * (k + 1) * (k + 2))
        # y2 is the coefficient of h^(k+2)
        t_val = y2 * hk * h
        t_der = (k + 2) * y2 * hk
        val += t_val
        der += t_der
        mag = abs(t_val) + abs(t_der) * abs(h)
        scale = max(scale, abs(val))
        if mag <= EPS * scale:
            small += 1
            if small >= 3:
                break
        else:
            small = 0
        y0, y1 = y1, y2
        hk = hk * h
        k += 1
        if k > 2000:
            raise NonConvergent("ODE Taylor step did not converge")
    return val, der


def _continuation_scalar(a, b, c, z, side: int):
    """Integrate the hypergeometric ODE from near 0 to z through the half plane `side`."""
    z = complex(z)
    zs = complex(0.25, 0.25 * side)
    f, e0 = _series(a, b, c, np.array([zs]))
    d, _ = _series_deriv(a, b, c, np.array([zs]))
    f, d = complex(f[0]), complex(d[0])
    W = complex(z.real, side * (abs(z.imag) + 1.0))
    nsteps = 0
    cur = zs
    for target in (W, z):
        while abs(target - cur) > 0:
            R = min(abs(cur), abs(1 - cur))
            hmax = 0.45 * R
            delta = target - cur
            if abs(delta) <= hmax:
                h = delta
            else:
                h = delta / abs(delta) * hmax
            f, d = _taylor_step(a, b, c, cur, f, d, h)
            cur = cur + h if h != delta else target
            nsteps += 1
            if nsteps > 5000:
                raise NonConvergent("continuation path too long")
    err = (nsteps + 1) * 4e-16 * abs(f)
    return f, err


def _continuation(a, b, c, z, side=None):
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    err = np.empty(z.shape)
    for i, zi in enumerate(z.flat):
        s = side if side is not None else (1 if zi.imag >= 0 else -1)
        out.flat[i], err.flat[i] = _continuation_scalar(a, b, c, zi, s)
    return out, err


# --------------------------------------------------------------- main engine

def _poly_degree(a, b):
    degs = [int(-round(complex(p).real)) for p in (a, b) if _is_nonpos_int(p)]
    return min(degs) if degs else None


def hyp2f1_array(a, b, c, z, check_cut=True):
    """Vectorised engine.  Returns (values, err_est, method index per point)."""
    a, b, c = complex(a), complex(b), complex(c)
    z = np.asarray(z, dtype=complex)
    shape = z.shape
    z = z.ravel()
    if check_cut:
        bad = (z.real >= 1 - CUT_GUARD) & (np.abs(z.imag) <= CUT_GUARD)
        if np.any(bad):
            raise OnCut(f"z = {z[bad][0]} lies on (or within 1e-13 of) the cut [1, oo)")
    val = np.empty_like(z)
    err = np.zeros(z.shape)
    meth = np.zeros(z.shape, dtype=int)
    deg = _poly_degree(a, b)
    if deg is not None and deg <= 400:
        # terminating series: exact polynomial everywhere
        s = np.ones_like(z)
        t = np.ones_like(z)
        asum = np.ones(z.shape)
        for k in range(deg):
            t = t * ((a + k) * (b + k) / ((c + k) * (k + 1))) * z
            s = s + t
            asum = asum + np.abs(t)
        return s.reshape(shape), (2.2e-16 * asum).reshape(shape), np.zeros(shape, dtype=int)
    az = np.abs(z)
    a1z = np.abs(1 - z)
    r_series = az <= SERIES_RADIUS
    r_conn = ~r_series & (a1z < CONNECTION_RADIUS)
    rest = ~r_series & ~r_conn
    with np.errstate(divide="ignore", invalid="ignore"):
        pf = np.abs(z / (z - 1))
    r_pfaff = rest & (z.real < 0.5) & (pf <= PFAFF_RADIUS)
    rest = rest & ~r_pfaff
    r_recip = rest & (az >= RECIPROCAL_MIN) & (not _is_int(a - b))
    r_cont = rest & ~r_recip
    if np.any(r_series):
        val[r_series], err[r_series] = _series(a, b, c, z[r_series])
        meth[r_series] = 0
    if np.any(r_conn):
        v, e, m = _connection(a, b, c, z[r_conn])
        val[r_conn], err[r_conn] = v, e
        meth[r_conn] = METHODS.index(m)
    if np.any(r_pfaff):
        val[r_pfaff], err[r_pfaff] = _pfaff(a, b, c, z[r_pfaff])
        meth[r_pfaff] = 1
    if np.any(r_recip):
        val[r_recip], err[r_recip] = _reciprocal(a, b, c, z[r_recip])
        meth[r_recip] = 4
    if np.any(r_cont):
        val[r_cont], err[r_cont] = _continuation(a, b, c, z[r_cont])
        meth[r_cont] = 5
    return val.reshape(shape), err.reshape(shape), meth.reshape(shape)


def hyp2f1_vec(params: HypTriple, z):
    """Values only (array in, array out)."""
    v, _, _ = hyp2f1_array(*params.abc, z)
    return v


def gauss_2f1(params: HypTriple, z) -> EvalResult:
    v, e, m = hyp2f1_array(*params.abc, np.array([complex(z)]))
    return EvalResult(complex(v[0]), METHODS[int(m[0])], float(e[0]))


def gauss_2f1_method(params: HypTriple, z, method: str):
    """Force one representation (used to cross-test overlaps)."""
    a, b, c = params.abc
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if method == "series":
        v, _ = _series(a, b, c, z)
    elif method == "pfaff":
        v, _ = _pfaff(a, b, c, z)
    elif method == "connection":
        v, _, _ = _connection(a, b, c, z)
    elif method == "reciprocal":
        v, _ = _reciprocal(a, b, c, z)
    elif method == "continuation":
        v, _ = _continuation(a, b, c, z)
    else:
        raise ValueError(method)
    return v


# ------------------------------------------------------------ cut boundary

def boundary_array(params: HypTriple, x, side: CutSide):
    """Side-resolved F(x +- i0) for real x > 1 (vectorised).  Returns (values, err)."""
    side = CutSide.parse(side)
    a, b, c = params.abc
    x = np.asarray(x, dtype=float)
    shape = x.shape
    x = x.ravel()
    if np.any(x <= 1 + 1e-10):
        raise ValueError("x must exceed 1 + 1e-10; use near_one_expansion closer to 1")
    sg = side.sign
    val = np.empty(x.shape, dtype=complex)
    err = np.zeros(x.shape)
    deg = _poly_degree(a, b)
    if deg is not None and deg <= 400:
        v, e, _ = hyp2f1_array(a, b, c, x.astype(complex), check_cut=False)
        return v.reshape(shape), e.reshape(shape)
    near = x < 2.0
    if np.any(near):
        xn = x[near]
        w = (1.0 - xn).astype(complex)          # 1 - z, on the negative axis
        logw = np.log(xn - 1.0) - 1j * sg * math.pi  # arg(1 - (x +- i0)) = -+ pi
        s = c - a - b
        pw = np.exp(s * logw)
        v, e, _ = _connection(a, b, c, xn.astype(complex), w=w, pw=pw, logw=logw)
        val[near], err[near] = v, e
    far = ~near
    if np.any(far):
        xf = x[far]
        if not _is_int(a - b):
            log_mz = np.log(xf) - 1j * sg * math.pi  # -(x +- i0) = -x -+ i0
            v, e = _reciprocal(a, b, c, xf.astype(complex), log_mz=log_mz)
        else:
            v, e = _continuation(a, b, c, xf.astype(complex), side=sg)
        val[far], err[far] = v, e
    return val.reshape(shape), err.reshape(shape)


def boundary_2f1(params: HypTriple, x, side: CutSide) -> complex:
    v, _ = boundary_array(params, np.array([float(x)]), side)
    return complex(v[0])


def jump_array(params: HypTriple, x):
    """F(x - i0) - F(x + i0) in closed form."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 1):
        raise ValueError("x must exceed 1")
    return jump_one_minus(params, x - 1.0)


def jump_one_minus(params: HypTriple, d):
    """The jump at x = 1 + d, d > 0 given directly."""
    a, b, c = params.abc
    d = np.asarray(d, dtype=float)
    s = c - a - b
    xm = (-d).astype(complex)
    if _is_int(s):
        m = int(round(s.real))
        if m <= 0:
            mm = -m
            coef = -2j * math.pi * ((-1) ** mm) * complex_gamma(c) * rgamma(c - a) * rgamma(c - b) / math.factorial(mm)
            if coef == 0:
                return np.zeros(d.shape, dtype=complex)
            return coef * hyp2f1_vec(HypTriple(a, b, mm + 1), xm)
        inner = jump_one_minus(HypTriple(c - a, c - b, c), d)
        return (-d) ** m * inner
    coef = 2j * cmath.sin(math.pi * s) * complex_gamma(c) * complex_gamma(-s) * rgamma(a) * rgamma(b)
    if coef == 0:
        return np.zeros(d.shape, dtype=complex)
    inner = hyp2f1_vec(HypTriple(c - a, c - b, s + 1), xm)
    return coef * np.exp(s * np.log(d)) * inner


def jump_across_cut(params: HypTriple, x) -> complex:
    return complex(jump_array(params, np.array([float(x)]))[0])


def _poly_eval(a, b, c, z, deg):
    s = np.ones_like(z)
    t = np.ones_like(z)
    for k in range(deg):
        t = t * ((a + k) * (b + k) / ((c + k) * (k + 1))) * z
        s = s + t
    return s


def hyp2f1_one_minus(params: HypTriple, u):
    """F(1 - u) with u supplied directly, so no digits are lost when z is close to 1."""
    a, b, c = params.abc
    u = np.asarray(u, dtype=complex)
    deg = _poly_degree(a, b)
    if deg is not None and deg <= 400:
        return _poly_eval(a, b, c, 1.0 - u, deg)
    bad = (u.real <= 0) & (np.abs(u.imag) <= CUT_GUARD)
    if np.any(bad):
        raise OnCut("1 - u lies on the cut")
    out = np.empty_like(u)
    near = np.abs(u) < CONNECTION_RADIUS
    if np.any(near):
        out[near] = _connection(a, b, c, 1.0 - u[near], w=u[near])[0]
    if np.any(~near):
        out[~near] = hyp2f1_array(a, b, c, 1.0 - u[~near])[0]
    return out


def boundary_one_minus(params: HypTriple, d, side: CutSide):
    """F((1 + d) +- i0) for d > 0 given directly (no lower limit on d)."""
    side = CutSide.parse(side)
    a, b, c = params.abc
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("d must be positive")
    deg = _poly_degree(a, b)
    if deg is not None and deg <= 400:
        return _poly_eval(a, b, c, (1.0 + d).astype(complex), deg)
    out = np.empty(d.shape, dtype=complex)
    near = d < CONNECTION_RADIUS
    if np.any(near):
        dn = d[near]
        logw = np.log(dn) - 1j * side.sign * math.pi
        s = c - a - b
        out[near] = _connection(a, b, c, (1.0 + dn).astype(complex), w=(-dn).astype(complex),
                                pw=np.exp(s * logw), logw=logw)[0]
    if np.any(~near):
        out[~near] = boundary_array(params, 1.0 + d[~near], side)[0]
    return out


def near_one_expansion(params: HypTriple, z) -> complex:
    """Leading term of F as z -> 1: power law when Re(c-a-b) < 0, logarithm when c = a + b."""
    z = complex(z)
    if not 0 < abs(1 - z) < 0.1:
        raise ValueError("near_one_expansion needs 0 < |1-z| < 0.1")
    if z.imag == 0 and z.real >= 1:
        raise OnCut("z on the cut")
    a, b, c = params.abc
    s = c - a - b
    if _is_int(s) and round(s.real) == 0:
        return -complex_gamma(c) * rgamma(a) * rgamma(b) * cmath.log(1 - z)
    if s.real < 0:
        return complex_gamma(c) * complex_gamma(-s) * rgamma(a) * rgamma(b) * cmath.exp(s * cmath.log(1 - z))
    raise ValueError("F is bounded at z = 1 when Re(c - a - b) > 0")


def ode_residual(params: HypTriple, w):
    """Hypergeometric ODE residual via the contiguous shifts F(a+1,b+1;c+1), F(a+2,b+2;c+2)."""
    a, b, c = params.abc
    w = np.asarray(w, dtype=complex)
    F0 = hyp2f1_vec(HypTriple(a, b, c), w)
    F1 = hyp2f1_vec(HypTriple(a + 1, b + 1, c + 1), w)
    F2 = hyp2f1_vec(HypTriple(a + 2, b + 2, c + 2), w)
    res = (a * b / c) * (w * (1 - w) * ((a + 1) * (b + 1) / (c + 1)) * F2
                         + (c - (a + b + 1) * w) * F1 - c * F0)
    scale = np.abs(a * b) * (np.abs(F0) + np.abs(F1) + np.abs(w * (1 - w) * F2))
    return np.abs(res) / scale
