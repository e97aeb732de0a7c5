"""Lorentzian linear algebra on R^{1,n}, the de Sitter quadric and its crowns.

Points are plain numpy arrays of length n+1 with index 0 the time slot.
The form is bilinear on complex input (no conjugation anywhere).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

QUADRIC_TOL = 1e-9
CONE_TOL = 1e-8

# chart guard: [v,v] < CHART_BOUND.  The geometric alternative is (pi/2)**2.
CHART_BOUND_LITERAL = math.pi / 2
CHART_BOUND_SQUARED = (math.pi / 2) ** 2


class NotInChart(ValueError):
    pass


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class ModelDims:
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")

    @property
    def rho(self) -> float:
        return (self.n - 1) / 2


class CausalTag(enum.Enum):
    Outside = "Outside"
    FuturePlus = "FuturePlus"
    PastMinus = "PastMinus"
    OnCone = "OnCone"


class Branch(enum.Enum):
    Forward = "Forward"    # Xi, points u + iv
    Backward = "Backward"  # conj(Xi), points u - iv


@dataclass(frozen=True)
class CrownPoint:
    u: np.ndarray
    v: np.ndarray
    branch: Branch

    @property
    def z(self) -> np.ndarray:
        s = 1.0 if self.branch is Branch.Forward else -1.0
        return self.u + 1j * s * self.v

    @property
    def dim(self) -> int:
        return len(self.u) - 1


@dataclass(frozen=True)
class CrownRejection:
    reason: str


def basis(n: int, j: int) -> np.ndarray:
    e = np.zeros(n + 1)
    e[j] = 1.0
    return e


def eta(n: int) -> np.ndarray:
    d = np.ones(n + 1)
    d[0] = -1.0
    return np.diag(d)


def minkowski_form(z, w):
    """[z, w] = -z_0 w_0 + sum_j z_j w_j along the last axis (bilinear)."""
    z = np.asarray(z)
    w = np.asarray(w)
    if z.shape[-1] != w.shape[-1]:
        raise GeometryError(f"dimension mismatch: {z.shape[-1]} vs {w.shape[-1]}")
    out = -z[..., 0] * w[..., 0] + np.sum(z[..., 1:] * w[..., 1:], axis=-1)
    if np.ndim(out) == 0:
        return out.item()
    return out


def _cs_series(z, nterms=24):
    c = np.zeros_like(z)
    s = np.zeros_like(z)
    tc = np.ones_like(z)
    ts = np.ones_like(z)
    for k in range(nterms):
        c = c + tc
        s = s + ts
        tc = -tc * z / ((2 * k + 1) * (2 * k + 2))
        ts = -ts * z / ((2 * k + 2) * (2 * k + 3))
    return c, s


def cs_eval(z):
    """C(z) = cos sqrt(z), S(z) = sin sqrt(z) / sqrt(z), both entire.

    Power series near 0, closed forms elsewhere (either root of z works).
    Real input gives real output.
    """
    arr = np.asarray(z)
    real_in = not np.iscomplexobj(arr)
    zc = arr.astype(complex)
    small = np.abs(zc) <= 1.0
    c = np.empty_like(zc)
    s = np.empty_like(zc)
    if np.any(small):
        c[small], s[small] = _cs_series(zc[small])
    big = ~small
    if np.any(big):
        r = np.sqrt(zc[big])
        c[big] = np.cos(r)
        s[big] = np.sin(r) / r
    if real_in:
        c, s = c.real, s.real
    if np.ndim(arr) == 0:
        return c.item(), s.item()
    return c, s


def cs_derivs(z):
    """Derivatives (C'(z), S'(z)).  C' = -S/2, S' = (C - S)/(2z)."""
    arr = np.asarray(z)
    real_in = not np.iscomplexobj(arr)
    zc = np.atleast_1d(arr).astype(complex)
    c, s = cs_eval(zc)
    dc = -s / 2
    ds = np.empty_like(zc)
    small = np.abs(zc) <= 0.5
    if np.any(small):
        zs = zc[small]
        # S' = sum_{k>=1} (-1)^k k z^{k-1} / (2k+1)!
        acc = np.zeros_like(zs)
        term = np.full_like(zs, -1.0 / 6.0)
        for k in range(1, 22):
            acc = acc + k * term
            term = -term * zs / ((2 * k + 2) * (2 * k + 3))
        ds[small] = acc
    big = ~small
    ds[big] = (c[big] - s[big]) / (2 * zc[big])
    if real_in:
        dc, ds = dc.real, ds.real
    if np.ndim(arr) == 0:
        return dc[0].item(), ds[0].item()
    return dc, ds


def on_quadric(x, tol=QUADRIC_TOL) -> bool:
    x = np.asarray(x, dtype=float)
    return abs(minkowski_form(x, x) - 1.0) <= tol * max(1.0, float(np.dot(x, x)))


def check_ds(x, tol=QUADRIC_TOL) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) < 3:
        raise GeometryError("de Sitter point must be a 1-d array of length n+1 >= 3")
    if not on_quadric(x, tol):
        raise GeometryError(f"point is off the quadric: [x,x]-1 = {minkowski_form(x, x) - 1:.3e}")
    return x


def renormalize(x) -> np.ndarray:
    """Project back onto [x,x] = 1 by radial rescaling (stops drift)."""
    x = np.asarray(x, dtype=float)
    return x / math.sqrt(minkowski_form(x, x))


def base_point(n: int) -> np.ndarray:
    return basis(n, n)


# ---------------------------------------------------------------- isometries

@dataclass(frozen=True)
class Isometry:
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "matrix", m)
        n = m.shape[0] - 1
        if m.shape != (n + 1, n + 1):
            raise GeometryError("isometry matrix must be square")
        e = eta(n)
        if np.max(np.abs(m.T @ e @ m - e)) > 1e-8 * max(1.0, np.max(np.abs(m)) ** 2):
            raise GeometryError("matrix does not preserve the Lorentz form")
        if abs(np.linalg.det(m) - 1.0) > 1e-8 * max(1.0, np.max(np.abs(m)) ** (n + 1)):
            raise GeometryError("determinant is not 1")
        if m[0, 0] <= 0:
            raise GeometryError("not in the identity component")

    @property
    def n(self) -> int:
        return self.matrix.shape[0] - 1

    def __matmul__(self, other):
        if isinstance(other, Isometry):
            return Isometry(self.matrix @ other.matrix)
        return apply(self, other)

    def inverse(self) -> "Isometry":
        e = eta(self.n)
        return Isometry(e @ self.matrix.T @ e)


def identity(n: int) -> Isometry:
    return Isometry(np.eye(n + 1))


def make_boost(t: float, n: int, axis: int | None = None) -> Isometry:
    """Boost in the (0, axis) plane; the default axis n gives a_t with a_t e_n = (sinh t, .., cosh t)."""
    axis = n if axis is None else axis
    if not 1 <= axis <= n:
        raise GeometryError(f"boost axis must lie in 1..{n}")
    m = np.eye(n + 1)
    ch, sh = math.cosh(t), math.sinh(t)
    m[0, 0] = m[axis, axis] = ch
    m[0, axis] = m[axis, 0] = sh
    return Isometry(m)


def make_rotation(i: int, j: int, theta: float, n: int) -> Isometry:
    """Rotation in the (i, j) spatial plane.  Fixes e_0, and e_n too when j < n."""
    if not (1 <= i < j <= n):
        raise GeometryError(f"rotation needs 1 <= i < j <= {n}, got ({i}, {j})")
    m = np.eye(n + 1)
    c, s = math.cos(theta), math.sin(theta)
    m[i, i] = m[j, j] = c
    m[i, j] = -s
    m[j, i] = s
    return Isometry(m)


def apply(g: Isometry, z):
    z = np.asarray(z)
    if z.shape[-1] != g.n + 1:
        raise GeometryError("dimension mismatch in apply")
    return z @ g.matrix.T


def apply_ds(g: Isometry, x) -> np.ndarray:
    return renormalize(apply(g, np.asarray(x, dtype=float)))


def random_isometry(n: int, rng: np.random.Generator, scale: float = 1.0) -> Isometry:
    g = identity(n)
    for axis in range(1, n + 1):
        g = make_boost(scale * rng.normal(), n, axis) @ g
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            g = make_rotation(i, j, rng.uniform(-math.pi, math.pi), n) @ g
    return g


def random_stabilizer(n: int, rng: np.random.Generator, scale: float = 1.0) -> Isometry:
    """Random element of the stabiliser H of e_n (boosts and rotations in slots 0..n-1)."""
    g = identity(n)
    for axis in range(1, n):
        g = make_boost(scale * rng.normal(), n, axis) @ g
    for i in range(1, n):
        for j in range(i + 1, n):
            g = make_rotation(i, j, rng.uniform(-math.pi, math.pi), n) @ g
    return g


def frame_isometry(x) -> Isometry:
    """An element g of the identity component with g e_n = x.

    Columns 0..n-1 are a Lorentz-orthonormal frame of T_x with a
    future-pointing timelike first vector.
    """
    x = check_ds(x)
    n = len(x) - 1
    e0 = basis(n, 0)
    cols = [e0 + x[0] * x]  # e_0 minus its x-component
    cols[0] = cols[0] / math.sqrt(-minkowski_form(cols[0], cols[0]))
    for j in range(1, n + 1):
        w = basis(n, j)
        for _ in range(2):  # second pass restores orthogonality lost to cancellation
            for b in cols + [x]:
                w = w - minkowski_form(w, b) / minkowski_form(b, b) * b
        nn = minkowski_form(w, w)
        if nn > 1e-6:
            cols.append(w / math.sqrt(nn))
        if len(cols) == n:
            break
    m = np.column_stack(cols + [x])
    if np.linalg.det(m) < 0:
        m[:, n - 1] *= -1
    return Isometry(m)


def tangent_frame(x) -> np.ndarray:
    """Rows E_0..E_{n-1}: the chart frame at x used everywhere."""
    g = frame_isometry(x)
    return g.matrix[:, :-1].T.copy()


# ----------------------------------------------------------- exponential map

def exp_map(x, v):
    """Exp_x(v) = C([v,v]) x + S([v,v]) v for ambient tangent vectors v (batch on leading axes)."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    s = minkowski_form(v, v)
    c, sv = cs_eval(s)
    out = np.multiply.outer(c, x) + np.asarray(sv)[..., None] * v
    return out


def exp_differential(x, v, w):
    """d/de Exp_x(v + e w) at e = 0."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    s = minkowski_form(v, v)
    c, sv = cs_eval(s)
    dc, ds = cs_derivs(s)
    vw = minkowski_form(v, w)
    return 2 * dc * vw * x + 2 * ds * vw * v + sv * w


def chart_point(x, v, frame=None):
    """Point Exp_x(sum_i v_i E_i) for chart coordinates v (batch on leading axes)."""
    frame = tangent_frame(x) if frame is None else frame
    return exp_map(x, np.asarray(v, dtype=float) @ frame)


def chart_form(v):
    """Chart Lorentz form of coordinate vectors (signature -,+,..,+)."""
    return minkowski_form(v, v)


def log_map(x, y, bound: float = CHART_BOUND_LITERAL, tol: float = 1e-10):
    """Inverse of exp_map on the chart.  Closed form on span{x, y - [x,y] x}."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    a = minkowski_form(x, y)
    w = y - a * x
    ww = minkowski_form(w, w)
    scale = max(1.0, float(np.dot(y, y)))
    if abs(ww) <= 1e-15 * scale:
        if a <= 0:
            raise NotInChart("antipodal-type point")
        v = w  # null (or zero) case: Exp is affine
        sigma = 0.0
    elif ww > 0:
        r = math.atan2(math.sqrt(ww), a)
        sigma = r * r
        v = w * (r / math.sqrt(ww))
    else:
        if a <= 0:
            raise NotInChart("timelike separation towards the antipode")
        r = math.asinh(math.sqrt(-ww))
        sigma = -r * r
        v = w * (r / math.sqrt(-ww))
    if sigma >= bound:
        raise NotInChart(f"[v,v] = {sigma:.4g} is outside the chart bound {bound:.4g}")
    if np.max(np.abs(exp_map(x, v) - y)) > tol * scale:
        raise NotInChart("round-trip residual above tolerance")
    return v


def log_map_batch(x, Y, bound: float = CHART_BOUND_LITERAL):
    """log_map over the leading axes of Y.  Returns (V, ok); V is zero where ok is False."""
    x = np.asarray(x, dtype=float)
    Y = np.asarray(Y, dtype=float)
    a = minkowski_form(Y, x[None, :] if Y.ndim > 1 else x)
    a = np.asarray(a, dtype=float)
    W = Y - a[..., None] * x
    ww = np.asarray(minkowski_form(W, W), dtype=float)
    r2 = np.sqrt(np.abs(ww))
    f = np.ones_like(ww)
    sigma = np.zeros_like(ww)
    sp = ww > 1e-15
    tl = ww < -1e-15
    ang = np.arctan2(r2[sp], a[sp])
    f[sp] = ang / r2[sp]
    sigma[sp] = ang * ang
    hyp = np.arcsinh(r2[tl])
    f[tl] = hyp / r2[tl]
    sigma[tl] = -hyp * hyp
    ok = (sigma < bound) & (sp | (a > 0))
    V = np.where(ok[..., None], W * f[..., None], 0.0)
    return V, ok


def chart_coords(x, y, frame=None, bound: float = CHART_BOUND_LITERAL):
    frame = tangent_frame(x) if frame is None else frame
    v = log_map(x, y, bound=bound)
    # frame rows are Lorentz-orthonormal: coefficient_i = [v, E_i] * <E_i,E_i>
    signs = np.ones(frame.shape[0])
    signs[0] = -1.0
    return signs * minkowski_form(v[None, :], frame)


def metric_density(x, v, h: float = 1e-5, frame=None, bound: float = CHART_BOUND_LITERAL) -> float:
    """sqrt|det g(v)| for the pulled-back metric, by central differences of exp_map."""
    v = np.asarray(v, dtype=float)
    if chart_form(v) >= bound:
        raise NotInChart("chart boundary")
    frame = tangent_frame(x) if frame is None else frame
    n = len(v)
    J = np.empty((n, frame.shape[1]))
    for i in range(n):
        dv = np.zeros(n)
        dv[i] = h
        J[i] = (chart_point(x, v + dv, frame) - chart_point(x, v - dv, frame)) / (2 * h)
    G = minkowski_form(J[:, None, :], J[None, :, :])
    return math.sqrt(abs(np.linalg.det(G)))


# -------------------------------------------------------- causal structure

def classify_causal(x, y, tol: float = CONE_TOL) -> CausalTag:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = y - x
    q = minkowski_form(d, d)
    if abs(q) <= tol * (1.0 + float(np.dot(y, y))):
        return CausalTag.OnCone
    if q > 0:
        return CausalTag.Outside
    return CausalTag.FuturePlus if y[0] - x[0] > 0 else CausalTag.PastMinus


# ------------------------------------------------------------------ crowns

def crown_membership(z, tol: float = QUADRIC_TOL):
    z = np.asarray(z, dtype=complex)
    u = z.real.copy()
    v = z.imag.copy()
    branch = Branch.Forward
    if v[0] < 0:
        branch = Branch.Backward
        v = -v
    uu = minkowski_form(u, u)
    vv = minkowski_form(v, v)
    scale = max(1.0, float(np.dot(u, u) + np.dot(v, v)))
    if abs(uu - vv - 1.0) > tol * scale:
        return CrownRejection("[u,u] - [v,v] = 1 violated")
    if abs(minkowski_form(u, v)) > tol * scale:
        return CrownRejection("[u,v] = 0 violated")
    if not vv < 0:
        return CrownRejection("[v,v] < 0 violated")
    if not v[0] > 0:
        return CrownRejection("v_0 > 0 violated")
    return CrownPoint(u, v, branch)


def approach_point(g: Isometry | None, t: float, branch: Branch = Branch.Forward, n: int | None = None):
    """g . z_t with z_t = i cos(t) e_0 + sin(t) e_n (or its conjugate for Backward)."""
    if not 0 < t < math.pi / 2:
        raise ValueError("t must lie in (0, pi/2)")
    if g is None:
        if n is None:
            raise ValueError("need g or n")
        g = identity(n)
    n = g.n
    z = np.zeros(n + 1, dtype=complex)
    z[0] = 1j * math.cos(t) if branch is Branch.Forward else -1j * math.cos(t)
    z[n] = math.sin(t)
    return apply(g, z)


def crown_range_ok(x, z) -> bool:
    """Im[x,z] != 0 or Re[x,z] in (-1, 1)."""
    w = minkowski_form(np.asarray(x), np.asarray(z))
    return w.imag != 0 or -1 < w.real < 1
