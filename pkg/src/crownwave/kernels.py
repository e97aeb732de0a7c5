"""Crown kernels, their boundary distributions on dS^n, and the checks run on them.

Conventions used throughout:

    s  = [x, y]           x the basepoint, y a point of dS^n
    w  = (1 + s) / 2      argument of the hypergeometric kernel
    y' = (1 - s) / 2      argument of the power kernel; y' = 1 - w

Inside the light cone y' < 0.  On the future component the Psi kernel is
reached from below the cut (w - i0, i.e. y' + i0); the past component and
the tilde kernels flip that side.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import lorentz as lz
from .dist1d import profile
from .hyp2f1 import (CutSide, HypTriple, OnCut, boundary_one_minus, check_lambda, gauss_2f1,
                     hyp2f1_one_minus, jump_one_minus)
from .quadrature import gauss_legendre, pairwise_sum, richardson_to_zero, tanh_sinh, tanh_sinh_ends


class OnConeSingularity(ValueError):
    pass


class MixedBranches(ValueError):
    pass


class StencilCrossesCone(ValueError):
    pass


class ExtrapolationFailed(RuntimeError):
    pass


class Kind(enum.Enum):
    Psi = "Psi"
    PsiTilde = "PsiTilde"
    PhiPow = "PhiPow"
    PhiTildePow = "PhiTildePow"
    Difference = "Difference"

    @classmethod
    def parse(cls, s) -> "Kind":
        if isinstance(s, Kind):
            return s
        for k in cls:
            if k.value.lower() == str(s).strip().lower():
                return k
        raise ValueError(f"unknown kernel kind {s!r}")


@dataclass(frozen=True)
class KernelParams:
    dims: lz.ModelDims
    lam: complex
    msq: complex = field(init=False)

    def __post_init__(self):
        lam = check_lambda(self.lam, self.dims.n, allow_rho=True)
        object.__setattr__(self, "lam", lam)
        m2 = self.dims.rho ** 2 - lam * lam
        object.__setattr__(self, "msq", m2.real if abs(m2.imag) < 1e-300 else m2)

    @classmethod
    def make(cls, n: int, lam) -> "KernelParams":
        return cls(lz.ModelDims(n), complex(lam))

    @property
    def n(self) -> int:
        return self.dims.n

    @property
    def triple(self) -> HypTriple:
        return HypTriple.family(self.n, self.lam, allow_rho=True)


@dataclass(frozen=True)
class SphericalDist:
    kind: Kind
    basepoint: np.ndarray
    params: KernelParams
    exponent: complex | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind.parse(self.kind))
        x = lz.check_ds(self.basepoint)
        if len(x) != self.params.n + 1:
            raise lz.GeometryError("basepoint dimension does not match params")
        object.__setattr__(self, "basepoint", x)
        if self.kind in (Kind.PhiPow, Kind.PhiTildePow) and self.exponent is None:
            object.__setattr__(self, "exponent", complex((2 - self.params.n) / 2))

    @property
    def n(self) -> int:
        return self.params.n

    def eigenvalue(self) -> complex:
        """Value c with (Delta - c) u = 0 away from the cone."""
        if self.kind in (Kind.PhiPow, Kind.PhiTildePow):
            a = self.exponent
            return -a * (a - 1 + self.n)
        return self.params.msq

    def moved(self, g: lz.Isometry) -> "SphericalDist":
        return SphericalDist(self.kind, lz.apply_ds(g, self.basepoint), self.params, self.exponent)


# ------------------------------------------------------------ test functions

def _sphere_samples(dim: int, count: int) -> np.ndarray:
    """Roughly uniform unit vectors in R^dim (deterministic)."""
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if dim == 2:
        th = np.linspace(0, 2 * math.pi, count, endpoint=False)
        return np.column_stack([np.cos(th), np.sin(th)])
    if dim == 3:
        k = np.arange(count) + 0.5
        z = 1 - 2 * k / count
        phi = math.pi * (1 + 5 ** 0.5) * k
        r = np.sqrt(1 - z * z)
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    rng = np.random.default_rng(12345)
    v = rng.normal(size=(count, dim))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


@dataclass(frozen=True)
class TestFnDS:
    """Bump exp(-1/(1-r^2)) of the chart radius r = |v|_E / radius around chart_base.

    `transform` h gives y -> phi(h^-1 y); `weight` is a constant complex factor.
    """

    chart_base: np.ndarray
    radius: float
    transform: lz.Isometry | None = None
    weight: complex = 1.0

    __test__ = False

    def __post_init__(self):
        c = lz.check_ds(self.chart_base)
        object.__setattr__(self, "chart_base", c)
        if not 0 < self.radius < 0.5:
            raise ValueError("radius must lie in (0, 0.5)")
        object.__setattr__(self, "_frame", lz.tangent_frame(c))

    @property
    def n(self) -> int:
        return len(self.chart_base) - 1

    def __call__(self, Y) -> np.ndarray:
        Y = np.asarray(Y, dtype=float)
        if self.transform is not None:
            Y = lz.apply(self.transform.inverse(), Y)
        V, ok = lz.log_map_batch(self.chart_base, Y)
        sg = np.ones(self.n)
        sg[0] = -1.0
        coords = (V @ (lz.eta(self.n) @ self._frame.T)) * sg
        r = np.sqrt(np.sum(coords * coords, axis=-1)) / self.radius
        out = np.where(ok & (r < 1), profile(np.minimum(r, 1.0)), 0.0)
        return self.weight * out

    def conj(self) -> "TestFnDS":
        return TestFnDS(self.chart_base, self.radius, self.transform, complex(self.weight).conjugate())

    def compose(self, g: lz.Isometry) -> "TestFnDS":
        """The function y -> phi(g y)."""
        t = g.inverse() if self.transform is None else g.inverse() @ self.transform
        return TestFnDS(self.chart_base, self.radius, t, self.weight)

    def pushed(self, h: lz.Isometry) -> "TestFnDS":
        """The function y -> phi(h^-1 y)."""
        t = h if self.transform is None else h @ self.transform
        return TestFnDS(self.chart_base, self.radius, t, self.weight)

    def support_samples(self, count: int = 400) -> np.ndarray:
        dirs = _sphere_samples(self.n, count)
        pts = [lz.chart_point(self.chart_base, f * self.radius * dirs, self._frame) for f in (1.0, 0.6, 0.25)]
        pts.append(self.chart_base[None, :])
        Y = np.concatenate(pts)
        if self.transform is not None:
            Y = lz.apply(self.transform, Y)
        return Y

    def center(self) -> np.ndarray:
        c = self.chart_base
        return c if self.transform is None else lz.apply(self.transform, c)


def t_grid_from_s(s0: float, count: int = 5, ratio: float = 2 ** -0.5) -> tuple:
    """t values with cos t = s0, s0 ratio, ... (increasing t)."""
    return tuple(math.acos(s0 * ratio ** k) for k in range(count))


COARSE_T_GRID = (1.2, 1.35, 1.45, 1.52, 1.55)
DEFAULT_T_GRID = t_grid_from_s(0.05)
ALTERNATE_T_GRID = t_grid_from_s(0.042)


@dataclass(frozen=True)
class ApproachProtocol:
    t_grid: tuple = DEFAULT_T_GRID
    order: int = 4

    def __post_init__(self):
        t = tuple(float(v) for v in self.t_grid)
        object.__setattr__(self, "t_grid", t)
        if any(not 0 < v < math.pi / 2 for v in t):
            raise ValueError("t values must lie in (0, pi/2)")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("t grid must increase toward pi/2")
        if self.order < 1 or self.order >= len(t):
            raise ValueError("order must be between 1 and len(t_grid) - 1")


# ------------------------------------------------------------------ kernels

def _as_point(w):
    """(complex array, branch or None for a real boundary point)."""
    if isinstance(w, lz.CrownPoint):
        return w.z, w.branch
    arr = np.asarray(w)
    if np.iscomplexobj(arr) and np.any(arr.imag != 0):
        cp = lz.crown_membership(arr)
        if isinstance(cp, lz.CrownRejection):
            raise lz.GeometryError(f"not a crown point: {cp.reason}")
        return cp.z, cp.branch
    return lz.check_ds(arr.real).astype(complex), None


def _pair_form(z, w):
    zz, bz = _as_point(z)
    ww, bw = _as_point(w)
    if bz is not None and bw is not None and bz is not bw:
        raise MixedBranches("kernel arguments must share a branch")
    return lz.minkowski_form(zz, np.conj(ww))


def psi_kernel(z, w, params: KernelParams) -> complex:
    """2F1(rho+lam, rho-lam; n/2; (1 + [z, conj w]) / 2).

    Either argument may be a real point of dS^n (the crown edge).
    """
    arg = (1 + _pair_form(z, w)) / 2
    try:
        return gauss_2f1(params.triple, arg).value
    except OnCut as exc:
        raise lz.GeometryError(f"kernel argument {arg} on the cut") from exc


def phi_kernel(z, w, exponent) -> complex:
    """Principal power ((1 - [z, conj w]) / 2)^exponent."""
    base = (1 - _pair_form(z, w)) / 2
    if base.imag == 0 and base.real <= 0:
        raise lz.GeometryError("power base on the closed negative ray")
    return cmath.exp(complex(exponent) * cmath.log(base))


# ---------------------------------------------------------- boundary values

def _side_value(dist: SphericalDist, yp, future):
    """Kernel value from y' (real) and a future/past mask for the inside points."""
    yp = np.asarray(yp, dtype=float)
    future = np.asarray(future, dtype=bool)
    out = np.zeros(yp.shape, dtype=complex)
    outside = yp > 0
    inside = ~outside
    d = -yp[inside]
    fut = future[inside]
    kind = dist.kind
    if kind in (Kind.PhiPow, Kind.PhiTildePow):
        a = dist.exponent
        out[outside] = np.exp(a * np.log(yp[outside]))
        sgn = np.where(fut, 1.0, -1.0) * (1.0 if kind is Kind.PhiPow else -1.0)
        out[inside] = np.exp(a * (np.log(d) + 1j * math.pi * sgn))
        return out
    P = dist.params.triple
    if kind is Kind.Difference:
        if np.any(inside):
            j = jump_one_minus(P, d)
            out[inside] = np.where(fut, j, -j)
        return out
    if np.any(outside):
        out[outside] = hyp2f1_one_minus(P, yp[outside].astype(complex))
    if np.any(inside):
        minus_side = fut if kind is Kind.Psi else ~fut
        vals = np.empty(d.shape, dtype=complex)
        if np.any(minus_side):
            vals[minus_side] = boundary_one_minus(P, d[minus_side], CutSide.Minus)
        if np.any(~minus_side):
            vals[~minus_side] = boundary_one_minus(P, d[~minus_side], CutSide.Plus)
        out[inside] = vals
    return out


def eval_pointwise(dist: SphericalDist, y):
    """Value of the boundary distribution at y off the cone, with its causal tag."""
    y = lz.check_ds(y)
    x = dist.basepoint
    tag = lz.classify_causal(x, y)
    if tag is lz.CausalTag.OnCone:
        raise OnConeSingularity("y lies on the light cone of the basepoint")
    d = y - x
    yp = lz.minkowski_form(d, d) / 4.0  # (1 - [x,y]) / 2 without the cancellation
    val = _side_value(dist, np.array([yp]), np.array([tag is lz.CausalTag.FuturePlus]))[0]
    return complex(val), tag


def pointwise_array(dist: SphericalDist, Y) -> np.ndarray:
    """eval_pointwise over the leading axes of Y (no cone check)."""
    Y = np.asarray(Y, dtype=float)
    D = Y - dist.basepoint
    yp = np.asarray(lz.minkowski_form(D, D)) / 4.0
    return _side_value(dist, yp, D[..., 0] > 0)


def approach_value(dist: SphericalDist, t: float, Y) -> np.ndarray:
    """Kernel at (g z_t, y) for real points y, g the frame at the basepoint."""
    g = lz.frame_isometry(dist.basepoint)
    P = lz.apply(g.inverse(), np.asarray(Y, dtype=float))
    n = dist.n
    p0 = P[..., 0]
    q = lz.minkowski_form(P[..., :n], P[..., :n])
    return _approach_kernel(dist, t, p0, np.asarray(q, dtype=float))


def _approach_kernel(dist: SphericalDist, t: float, p0, q):
    st, ct = math.sin(t), math.cos(t)
    root = np.sqrt(1.0 - q)
    real = (ct * ct + st * st * q) / (1.0 + st * root)  # 1 - sin(t) sqrt(1-q)
    u_fwd = (real + 1j * ct * p0) / 2.0
    kind = dist.kind
    if kind in (Kind.PhiPow, Kind.PhiTildePow):
        u = u_fwd if kind is Kind.PhiPow else np.conj(u_fwd)
        return np.exp(dist.exponent * np.log(u))
    P = dist.params.triple
    if kind is Kind.Psi:
        return hyp2f1_one_minus(P, u_fwd)
    if kind is Kind.PsiTilde:
        return hyp2f1_one_minus(P, np.conj(u_fwd))
    return hyp2f1_one_minus(P, u_fwd) - hyp2f1_one_minus(P, np.conj(u_fwd))


# ----------------------------------------------------------------- pairing

@dataclass
class KernelPairing:
    value: complex
    err_est: float
    primary: complex
    direct: complex | None
    t_values: tuple
    t_estimates: tuple
    quad_err: float


@dataclass(frozen=True)
class PairingGrid:
    """Tensor quadrature in coordinates (p0, q, angle) adapted to the cone of x.

    A point is y = g (p, sqrt(1 - [p,p])) with g the frame at x, and
    q = [p,p] vanishes exactly on the cone.  `S` holds the angular sums of
    phi times the volume factor on the (p0, q) nodes.
    """

    p0: np.ndarray
    q: np.ndarray
    w: np.ndarray
    S: np.ndarray


def _angles(n, P, center_p):
    if n == 2:
        return None
    th = np.arctan2(P[:, 2], P[:, 1])
    thc = math.atan2(center_p[2], center_p[1])
    rel = np.angle(np.exp(1j * (th - thc)))
    rho = np.hypot(P[:, 1], P[:, 2])
    if rel.max() - rel.min() > 1.5 * math.pi or rho.min() < 1e-3:
        return ("full", 0.0, 2 * math.pi)
    pad = 0.05 * (rel.max() - rel.min()) + 1e-3
    return ("box", thc + rel.min() - pad, thc + rel.max() + pad)


def pairing_grid(x, phi: TestFnDS, m0: int = 48, m_angle: int = 48, q_level: int = 5) -> PairingGrid:
    n = len(x) - 1
    if n not in (2, 3):
        raise NotImplementedError("pairings are implemented for n = 2 and n = 3")
    g = lz.frame_isometry(x)
    ginv = g.inverse()
    samples = lz.apply(ginv, phi.support_samples())
    if samples[:, n].min() <= 0.05:
        raise ValueError("test function support leaves the hemisphere around the basepoint")
    p = samples[:, :n]
    q_s = np.asarray(lz.minkowski_form(p, p))
    p0_s = p[:, 0]
    pad0 = 0.02 * (p0_s.max() - p0_s.min()) + 1e-3
    lo0, hi0 = p0_s.min() - pad0, p0_s.max() + pad0
    padq = 0.02 * (q_s.max() - q_s.min()) + 1e-3
    loq, hiq = q_s.min() - padq, min(q_s.max() + padq, 0.99)

    near_axis = np.sqrt(np.maximum(q_s + p0_s * p0_s, 0.0)).min() < 0.05
    if lo0 < 0 < hi0 and near_axis:
        # support reaches the apex region: the p0 integrand has a kink at 0
        a, wa = tanh_sinh(lo0, 0.0, level=q_level - 2)
        b, wb = tanh_sinh(0.0, hi0, level=q_level - 2)
        P0, W0 = np.concatenate([a, b]), np.concatenate([wa, wb])
    else:
        P0, W0 = gauss_legendre(lo0, hi0, m0)

    center_p = lz.apply(ginv, phi.center())
    ang = _angles(n, samples, center_p)
    if n == 2:
        A = np.array([1.0, -1.0])
        WA = np.array([1.0, 1.0])
    elif ang[0] == "full":
        A = np.linspace(0, 2 * math.pi, 2 * m_angle, endpoint=False)
        WA = np.full(A.shape, 2 * math.pi / len(A))
    else:
        A, WA = gauss_legendre(ang[1], ang[2], m_angle)

    rows_p0, rows_q, rows_w, rows_r2 = [], [], [], []
    for p0, w0 in zip(P0, W0):
        axis = -p0 * p0
        lower = max(loq, axis)
        if lower >= hiq:
            continue
        pieces = [(lower, 0.0), (0.0, hiq)] if lower < 0 < hiq else [(lower, hiq)]
        for a, b in pieces:
            qq, wq, da, _ = tanh_sinh_ends(a, b, level=q_level)
            rows_p0.append(np.full(qq.shape, p0))
            rows_q.append(qq)
            rows_w.append(w0 * wq)
            rows_r2.append((a - axis) + da)  # rho^2 = q + p0^2, kept accurate near the axis
    p0g = np.concatenate(rows_p0)
    qg = np.concatenate(rows_q)
    wg = np.concatenate(rows_w)
    rho = np.sqrt(np.maximum(np.concatenate(rows_r2), 0.0))
    with np.errstate(divide="ignore"):
        vol = rho ** (n - 3) / (2.0 * np.sqrt(1.0 - qg))
    vol = np.where(np.isfinite(vol), vol, 0.0)
    # phi on (node, angle) points, in chunks to bound memory
    if n == 2:
        c1, c2 = A[None, :], None
    else:
        c1, c2 = np.cos(A)[None, :], np.sin(A)[None, :]
    S = np.empty(len(qg), dtype=complex)
    step = max(1, 200_000 // len(A))
    for i in range(0, len(qg), step):
        sl = slice(i, i + step)
        Y = np.zeros((len(qg[sl]), len(A), n + 1))
        Y[..., 0] = p0g[sl, None]
        Y[..., 1] = rho[sl, None] * c1
        if c2 is not None:
            Y[..., 2] = rho[sl, None] * c2
        Y[..., n] = np.sqrt(1.0 - qg[sl])[:, None]
        vals = phi(lz.apply(g, Y))
        S[sl] = (vals * WA[None, :]).sum(axis=1) * vol[sl]
    keep = np.abs(S) > 0
    if not np.any(keep):
        raise ValueError("test function vanishes on the pairing grid")
    return PairingGrid(p0g[keep], qg[keep], wg[keep], S[keep])


def _grid_sum(grid: PairingGrid, K) -> complex:
    return complex(pairwise_sum(grid.w * K * grid.S))


def _direct(dist, grid):
    yp = grid.q / (2.0 * (1.0 + np.sqrt(1.0 - grid.q)))
    return _grid_sum(grid, _side_value(dist, yp, grid.p0 > 0))


def _primary(dist, grid, protocol):
    vals = [_grid_sum(grid, _approach_kernel(dist, t, grid.p0, grid.q)) for t in protocol.t_grid]
    s = [math.cos(t) for t in protocol.t_grid]
    est, _ = richardson_to_zero(s, vals, protocol.order)
    lower, _ = richardson_to_zero(s, vals, protocol.order - 1)
    return est, abs(est - lower), tuple(vals)


def pair(dist: SphericalDist, phi: TestFnDS, protocol: ApproachProtocol | None = None,
         route: str = "both", q_level: int = 6, m0: int = 48, m_angle: int = 48,
         cauchy_tol: float = 1e-4) -> KernelPairing:
    """<dist, phi> by limit along the approach path, cross-checked against boundary values.

    The primary value comes from Richardson extrapolation in s = cos t.  The
    direct value integrates the pointwise boundary values (integrable for
    n = 2, 3).  Both reuse one cone-adapted grid.
    """
    protocol = protocol or ApproachProtocol()
    if min(protocol.t_grid) <= 1.0:
        raise ValueError("pairing t grid must lie in (1, pi/2)")
    if phi.n != dist.n:
        raise lz.GeometryError("test function and distribution live in different dimensions")
    grid = pairing_grid(dist.basepoint, phi, m0=m0, m_angle=m_angle, q_level=q_level)
    coarse = pairing_grid(dist.basepoint, phi, m0=m0 * 3 // 4, m_angle=m_angle * 3 // 4, q_level=q_level - 1)
    primary = direct = None
    ts, tv = protocol.t_grid, ()
    err = 0.0
    qerr = 0.0
    if route in ("both", "primary"):
        primary, err, tv = _primary(dist, grid, protocol)
        if err > cauchy_tol * max(1.0, abs(primary)):
            raise ExtrapolationFailed(f"successive Richardson estimates differ by {err:.3g}")
        qerr = abs(primary - _primary(dist, coarse, protocol)[0])
    if route in ("both", "direct"):
        direct = _direct(dist, grid)
        qerr = max(qerr, abs(direct - _direct(dist, coarse)))
    value = primary if primary is not None else direct
    if primary is not None and direct is not None:
        err = max(err, abs(primary - direct))
    return KernelPairing(value, max(err, qerr), primary, direct, ts, tv, qerr)


# ------------------------------------------------------------- eigen checks

def _chart_laplacian(f, y, h: float):
    """(box f)(0) and f(0) for v -> f(Exp_y(v)), second-order central differences.

    f maps an (m, n+1) array of points to m values.
    """
    y = np.asarray(y, dtype=float)
    n = len(y) - 1
    frame = lz.tangent_frame(y)
    steps = np.concatenate([h * np.eye(n), -h * np.eye(n)])
    pts = np.concatenate([y[None, :], lz.chart_point(y, steps, frame)])
    vals = f(pts)
    f0 = vals[0]
    plus, minus = vals[1:n + 1], vals[n + 1:]
    second = (plus - 2 * f0 + minus) / (h * h)
    sig = np.ones(n)
    sig[0] = -1.0
    return complex(np.dot(sig, second)), complex(f0)


def _check_stencil(dist: SphericalDist, y, h: float):
    y = np.asarray(y, dtype=float)
    n = dist.n
    frame = lz.tangent_frame(y)
    probe = np.concatenate([10 * h * np.eye(n), -10 * h * np.eye(n)])
    pts = np.concatenate([y[None, :], lz.chart_point(y, probe, frame)])
    D = pts - dist.basepoint
    q = np.asarray(lz.minkowski_form(D, D))
    if np.any(np.sign(q) != np.sign(q[0])) or np.any(q == 0):
        raise StencilCrossesCone("stencil comes within 10h of the light cone")
    if q[0] < 0 and np.any(np.sign(D[:, 0]) != np.sign(D[0, 0])):
        raise StencilCrossesCone("stencil straddles the two cone components")


def eigen_residual(dist: SphericalDist, y, h: float, signed: bool = False):
    """|(box - c) u|(y) / |u(y)| with c the eigenvalue of the kind."""
    _check_stencil(dist, y, h)
    lap, f0 = _chart_laplacian(lambda P: pointwise_array(dist, P), y, h)
    r = (lap - dist.eigenvalue() * f0) / max(abs(f0), 1e-300)
    return r if signed else abs(r)


@dataclass
class EigenStudy:
    hs: tuple
    residuals: tuple
    slopes: tuple
    extrapolated: float
    value: complex


def eigen_study(dist: SphericalDist, y, hs=(1e-2, 5e-3, 2.5e-3)) -> EigenStudy:
    """Residuals at several h, observed orders, and the h -> 0 extrapolated residual."""
    signed = [eigen_residual(dist, y, h, signed=True) for h in hs]
    mags = [abs(r) for r in signed]
    slopes = tuple(math.log(mags[i] / mags[i + 1]) / math.log(hs[i] / hs[i + 1])
                   if mags[i + 1] > 0 and mags[i] > 0 else float("nan")
                   for i in range(len(hs) - 1))
    h2 = [h * h for h in hs]
    extra, _ = richardson_to_zero(h2, signed, order=len(hs) - 1)
    value, _ = eval_pointwise(dist, y)
    return EigenStudy(tuple(hs), tuple(mags), slopes, abs(extra), value)


def phi_power(z, Y, mu) -> np.ndarray:
    """((1 - [z, y]) / 2)^mu over the leading axes of real points Y (principal branch)."""
    z = np.asarray(z, dtype=complex)
    base = (1 - np.asarray(lz.minkowski_form(np.asarray(Y, dtype=float), z[None, :]))) / 2
    return np.exp(complex(mu) * np.log(base))


def phi_laplacian_closed(z, Y, mu, n: int) -> np.ndarray:
    """Delta of y -> Phi^mu: mu (mu - 1 + n/2) Phi^(mu-1) - mu (mu - 1 + n) Phi^mu."""
    mu = complex(mu)
    return mu * (mu - 1 + n / 2) * phi_power(z, Y, mu - 1) - mu * (mu - 1 + n) * phi_power(z, Y, mu)


def recursion_check(z, lam_p, ygrid, h: float | None = 1e-2) -> float:
    """max over y of |L_{mu} Phi^{mu} - mu (lam_p + n/2) Phi^{lam_p}| with mu = lam_p + 1.

    L_mu = Delta + mu (mu - 1 + n).  With h=None the Laplacian is the closed form.
    """
    zz, _ = _as_point(z)
    ygrid = np.atleast_2d(np.asarray(ygrid, dtype=float))
    n = ygrid.shape[1] - 1
    lam_p = complex(lam_p)
    mu = lam_p + 1
    worst = 0.0
    for y in ygrid:
        if h is None:
            lap = complex(phi_laplacian_closed(zz, y[None, :], mu, n)[0])
            top = complex(phi_power(zz, y[None, :], mu)[0])
        else:
            lap, top = _chart_laplacian(lambda P: phi_power(zz, P, mu), y, h)
        lower = complex(phi_power(zz, y[None, :], lam_p)[0])
        res = lap + mu * (mu - 1 + n) * top - mu * (lam_p + n / 2) * lower
        worst = max(worst, abs(res))
    return worst


# --------------------------------------------------------------- positivity

def crown_sample(n: int, count: int, rng: np.random.Generator, branch=lz.Branch.Forward,
                 t_range=(0.2, 1.2), scale: float = 0.5):
    """Points g_k (i cos t_k e_0 + sin t_k e_n) with random g_k."""
    out = []
    for _ in range(count):
        g = lz.random_isometry(n, rng, scale)
        t = rng.uniform(*t_range)
        z = lz.approach_point(g, t, branch)
        cp = lz.crown_membership(z)
        if isinstance(cp, lz.CrownRejection):
            raise lz.GeometryError(cp.reason)
        out.append(cp)
    return out


def gram_matrix(points, params: KernelParams) -> np.ndarray:
    if len({p.branch for p in points}) > 1:
        raise MixedBranches("Gram points must share a branch")
    Z = np.array([p.z for p in points])
    form = Z @ lz.eta(params.n) @ np.conj(Z).T
    arg = (1 + form) / 2
    from .hyp2f1 import hyp2f1_array
    a, b, c = params.triple.abc
    vals, _, _ = hyp2f1_array(a, b, c, arg.ravel(), check_cut=True)
    return vals.reshape(arg.shape)


def gram_psd(points, params: KernelParams, herm_tol: float = 1e-10):
    """(min eigenvalue, max eigenvalue) of the Hermitian kernel matrix."""
    if len(points) < 1:
        raise ValueError("need at least one point")
    G = gram_matrix(points, params)
    defect = float(np.max(np.abs(G - G.conj().T)))
    if defect > herm_tol * max(1.0, float(np.max(np.abs(G)))):
        raise ArithmeticError(f"Gram matrix not Hermitian (defect {defect:.3g})")
    ev = np.linalg.eigvalsh((G + G.conj().T) / 2)
    return float(ev[0]), float(ev[-1])


# ---------------------------------------------------------- further checks

def independence_matrix(params: KernelParams, phi_out: TestFnDS, phi_in: TestFnDS,
                        protocol: ApproachProtocol | None = None):
    """Pairings of (Psi, PsiTilde) at e_n against two test functions; returns (M, det, cond)."""
    x = lz.base_point(params.n)
    M = np.empty((2, 2), dtype=complex)
    for i, kind in enumerate((Kind.Psi, Kind.PsiTilde)):
        d = SphericalDist(kind, x, params)
        for j, phi in enumerate((phi_out, phi_in)):
            M[i, j] = pair(d, phi, protocol).value
    return M, complex(np.linalg.det(M)), float(np.linalg.cond(M))


def edge_continuity(params: KernelParams, Y, ts) -> list:
    """sup over the real points Y of |psi_kernel(z_t, y) - boundary value at y|, one entry per t."""
    n = params.n
    x = lz.base_point(n)
    dist = SphericalDist(Kind.Psi, x, params)
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    ref = np.array([eval_pointwise(dist, y)[0] for y in Y])
    out = []
    for t in ts:
        cp = lz.crown_membership(lz.approach_point(None, t, n=n))
        vals = np.array([psi_kernel(cp, y, params) for y in Y])
        out.append(float(np.max(np.abs(vals - ref))))
    return out


def bump_at(n: int, p, radius: float = 0.3, x=None) -> TestFnDS:
    """Test function centred at g (p, sqrt(1 - [p,p])), g the frame at x (default e_n)."""
    p = np.asarray(p, dtype=float)
    y = np.append(p, math.sqrt(1 - lz.minkowski_form(p, p)))
    if x is not None:
        y = lz.apply(lz.frame_isometry(x), y)
    return TestFnDS(y, radius)
