"""Wavefront predictions for the boundary kernels and a numerical decay probe.

Everything lives in exp-chart coordinates at the basepoint x: a base point
is a chart vector v (v_0 the time slot) and a direction is an n-covector xi.
The cone of x is {[v,v] = 0}.

Pipeline used to assemble the prediction:

    1. model 1-D wavefront of 2F1(t +- i0) at t = 1: one half-line of tau
    2. pull back along f(v) = (1 + C([v,v])) / 2 on v_0 > 0 and v_0 < 0
    3. propagate along the Hamiltonian flow of P = xi_0^2 - sum xi_i^2
       into v = 0, where df vanishes
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import lorentz as lz
from .dist1d import RAPID_EXPONENT, fit_decay, profile
from .kernels import Kind, SphericalDist, _side_value
from .quadrature import tanh_sinh

ANG_TOL = 1e-9
DEFAULT_TAUS = (32.0, 64.0, 128.0, 256.0)
WINDOW_HALFWIDTH = 0.15


class ZeroCovector(ValueError):
    pass


class NotCharacteristic(ValueError):
    pass


class RegionContainsApex(ValueError):
    pass


class SpecKind(enum.Enum):
    PsiSpec = "PsiSpec"
    PsiTildeSpec = "PsiTildeSpec"
    PhiSpec = "PhiSpec"
    PhiTildeSpec = "PhiTildeSpec"
    UnionSpec = "UnionSpec"


_KIND_TO_SPEC = {
    Kind.Psi: SpecKind.PsiSpec,
    Kind.PsiTilde: SpecKind.PsiTildeSpec,
    Kind.PhiPow: SpecKind.PhiSpec,
    Kind.PhiTildePow: SpecKind.PhiTildeSpec,
}


def _orientation(kind: SpecKind) -> int:
    """+1 for the untilded sets (apex xi_0 < 0), -1 for the tilde ones."""
    if kind in (SpecKind.PsiSpec, SpecKind.PhiSpec):
        return 1
    if kind in (SpecKind.PsiTildeSpec, SpecKind.PhiTildeSpec):
        return -1
    raise ValueError("union specs carry their own pieces")


@dataclass(frozen=True)
class CotangentDir:
    base: np.ndarray
    xi: np.ndarray

    def __post_init__(self):
        xi = np.asarray(self.xi, dtype=float)
        nrm = float(np.linalg.norm(xi))
        if nrm == 0:
            raise ZeroCovector("direction must be nonzero")
        object.__setattr__(self, "xi", xi / nrm)
        object.__setattr__(self, "base", np.asarray(self.base, dtype=float))


# ----------------------------------------------------------------- symbols

def principal_symbol(xi) -> float:
    xi = np.asarray(xi, dtype=float)
    if not np.any(xi):
        raise ZeroCovector("zero covector")
    return float(xi[0] ** 2 - np.sum(xi[1:] ** 2))


def char_membership(v, xi, tol: float = ANG_TOL) -> bool:
    """Whether (v, xi) lies in Char P (the symbol has constant coefficients, so v is unused)."""
    xi = np.asarray(xi, dtype=float)
    return abs(principal_symbol(xi)) <= tol * float(np.dot(xi, xi))


def _is_null(v, tol=ANG_TOL) -> bool:
    v = np.asarray(v, dtype=float)
    return abs(lz.minkowski_form(v, v)) <= tol * float(np.dot(v, v))


def _same_ray(a, b, tol=ANG_TOL) -> bool:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return False
    return float(np.linalg.norm(a / na - b / nb)) <= tol ** 0.5 * 10


# --------------------------------------------------------- flow and pullback

@dataclass(frozen=True)
class GeodesicStrip:
    v0: np.ndarray
    xi0: np.ndarray
    T: float

    @property
    def velocity(self) -> np.ndarray:
        d = -2.0 * self.xi0
        d[0] = 2.0 * self.xi0[0]
        return d

    def at(self, t):
        t = np.asarray(t, dtype=float)
        v = self.v0 + np.multiply.outer(t, self.velocity)
        xi = np.broadcast_to(self.xi0, v.shape).copy()
        return v, xi

    def rk4(self, steps: int = 200):
        """Independent RK4 integration of dv/dt = dP/dxi, dxi/dt = -dP/dv."""
        def rhs(v, xi):
            dv = -2.0 * xi
            dv[0] = 2.0 * xi[0]
            return dv, np.zeros_like(xi)

        h = self.T / steps
        v, xi = self.v0.astype(float).copy(), self.xi0.astype(float).copy()
        ts, vs, xis = [0.0], [v.copy()], [xi.copy()]
        for k in range(steps):
            k1v, k1x = rhs(v, xi)
            k2v, k2x = rhs(v + h / 2 * k1v, xi + h / 2 * k1x)
            k3v, k3x = rhs(v + h / 2 * k2v, xi + h / 2 * k2x)
            k4v, k4x = rhs(v + h * k3v, xi + h * k3x)
            v = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
            xi = xi + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
            ts.append((k + 1) * h)
            vs.append(v.copy())
            xis.append(xi.copy())
        return np.array(ts), np.array(vs), np.array(xis)

    def rk4_defect(self, steps: int = 200) -> float:
        ts, vs, xis = self.rk4(steps)
        v, xi = self.at(ts)
        return float(max(np.max(np.abs(vs - v)), np.max(np.abs(xis - xi))))


def hamiltonian_flow(v0, xi0, T: float, tol: float = ANG_TOL) -> GeodesicStrip:
    v0 = np.asarray(v0, dtype=float)
    xi0 = np.asarray(xi0, dtype=float)
    if not char_membership(v0, xi0, tol):
        raise NotCharacteristic("initial covector is not null")
    return GeodesicStrip(v0.copy(), xi0.copy(), float(T))


def df_pullback(v, phi: float = 1.0) -> np.ndarray:
    """phi times df_v for f(v) = (1 + C([v,v])) / 2."""
    v = np.asarray(v, dtype=float)
    sigma = lz.minkowski_form(v, v)
    if sigma >= lz.CHART_BOUND_LITERAL:
        raise lz.NotInChart("v outside the chart")
    _, s = lz.cs_eval(sigma)
    grad = 2.0 * v
    grad[0] = -2.0 * v[0]
    return phi * (-float(s) / 4.0) * grad


def f_chart(v) -> float:
    v = np.asarray(v, dtype=float)
    c, _ = lz.cs_eval(lz.minkowski_form(v, v))
    return (1.0 + float(c)) / 2.0


# -------------------------------------------------------------- the sets

@dataclass(frozen=True)
class PullbackPiece:
    """Along-cone directions tau * model_sign * df_v, tau > 0, over the null v with sign(v_0) = region."""

    model_sign: int
    region: int

    def contains(self, v, xi) -> bool:
        v = np.asarray(v, dtype=float)
        if not np.any(v) or np.sign(v[0]) != self.region or not _is_null(v):
            return False
        return _same_ray(xi, self.model_sign * df_pullback(v))

    def sample(self, rng, n: int):
        w = rng.normal(size=n - 1)
        w /= np.linalg.norm(w)
        r = rng.uniform(0.05, 0.9)
        v = np.concatenate([[self.region * r], r * w])
        xi = self.model_sign * df_pullback(v)
        return v, xi / np.linalg.norm(xi)


@dataclass(frozen=True)
class ApexPiece:
    """Null directions at v = 0 whose xi_0 sign lies in `signs`."""

    signs: frozenset

    def contains(self, v, xi) -> bool:
        v = np.asarray(v, dtype=float)
        xi = np.asarray(xi, dtype=float)
        if np.any(np.abs(v) > ANG_TOL):
            return False
        if not char_membership(v, xi):
            return False
        return int(np.sign(xi[0])) in self.signs


def pullback_wf(model_sign: int, region: int) -> PullbackPiece:
    """model_sign: +1 for the model wavefront {(1, tau > 0)} (the +i0 side), -1 for tau < 0."""
    if region == 0:
        raise RegionContainsApex("df vanishes at v = 0; handle the apex by propagation")
    if model_sign not in (1, -1) or region not in (1, -1):
        raise ValueError("signs must be +1 or -1")
    return PullbackPiece(int(model_sign), int(region))


def apex_closure(pieces, rng=None, samples: int = 64) -> ApexPiece:
    """Flow sampled members of each piece into v = 0 and record the xi_0 signs that arrive."""
    rng = np.random.default_rng(7) if rng is None else rng
    signs = set()
    for piece in pieces:
        if not isinstance(piece, PullbackPiece):
            continue
        n = 2 + int(rng.integers(0, 3))
        for _ in range(samples):
            v, xi = piece.sample(rng, n)
            strip = hamiltonian_flow(v, xi, 1.0)
            d = strip.velocity
            t_hit = -float(np.dot(v, d) / np.dot(d, d))
            vh, _ = strip.at(t_hit)
            if np.linalg.norm(vh) <= 1e-12 * max(1.0, np.linalg.norm(v)):
                signs.add(int(np.sign(xi[0])))
    return ApexPiece(frozenset(signs))


def model_side(kind: Kind, region: int) -> int:
    """Which side of the cut the kernel sees on the cone component sign(v_0) = region."""
    minus_on_future = kind in (Kind.Psi, Kind.Difference)
    if kind in (Kind.PhiPow, Kind.PhiTildePow):
        # the power kernel (y' +- i0) with y' = 1 - w mirrors the 2F1 side
        minus_on_future = kind is Kind.PhiPow
    side_future = -1 if minus_on_future else 1
    return side_future if region > 0 else -side_future


@dataclass(frozen=True)
class WfSpec:
    kind: SpecKind
    basepoint: np.ndarray
    pieces: tuple = field(default=())

    def contains(self, v, xi) -> bool:
        xi = np.asarray(xi, dtype=float)
        if not np.any(xi):
            raise ZeroCovector("zero covector")
        if self.kind is SpecKind.UnionSpec:
            return any(p.contains(v, xi) for p in self.pieces)
        return _predicted_contains(_orientation(self.kind), v, xi)


def _predicted_contains(eps: int, v, xi) -> bool:
    v = np.asarray(v, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if np.all(np.abs(v) <= ANG_TOL):
        return char_membership(v, xi) and eps * xi[0] < 0
    if not _is_null(v) or v[0] == 0:
        return False
    target = np.concatenate([[-abs(v[0])], np.sign(v[0]) * v[1:]])
    return _same_ray(xi, eps * target)


def predicted_wf(kind, basepoint) -> WfSpec:
    if isinstance(kind, Kind):
        if kind is Kind.Difference:
            raise ValueError("no single prediction for the difference kernel")
        kind = _KIND_TO_SPEC[kind]
    kind = SpecKind(kind) if not isinstance(kind, SpecKind) else kind
    return WfSpec(kind, lz.check_ds(basepoint))


def assemble_wf(kind: Kind, basepoint) -> WfSpec:
    """Union of the two pulled-back pieces and their apex closure."""
    pieces = [pullback_wf(model_side(kind, r), r) for r in (1, -1)]
    apex = apex_closure(pieces)
    return WfSpec(SpecKind.UnionSpec, lz.check_ds(basepoint), tuple(pieces) + (apex,))


def wf_contains(spec: WfSpec, base_pt, direction) -> bool:
    if isinstance(direction, CotangentDir):
        return spec.contains(direction.base, direction.xi)
    return spec.contains(base_pt, direction)


def antipode(spec: WfSpec) -> WfSpec:
    flip = {SpecKind.PsiSpec: SpecKind.PsiTildeSpec, SpecKind.PsiTildeSpec: SpecKind.PsiSpec,
            SpecKind.PhiSpec: SpecKind.PhiTildeSpec, SpecKind.PhiTildeSpec: SpecKind.PhiSpec}
    if spec.kind is SpecKind.UnionSpec:
        pieces = []
        for p in spec.pieces:
            if isinstance(p, PullbackPiece):
                pieces.append(PullbackPiece(-p.model_sign, p.region))
            else:
                pieces.append(ApexPiece(frozenset(-s for s in p.signs)))
        return WfSpec(SpecKind.UnionSpec, spec.basepoint, tuple(pieces))
    return WfSpec(flip[spec.kind], spec.basepoint)


# ------------------------------------------------------ ambient coordinates

def chart_jacobian(x, v) -> np.ndarray:
    """Columns d Exp_x(v)(E_i) as ambient vectors, shape (n+1, n)."""
    frame = lz.tangent_frame(x)
    vv = np.asarray(v, dtype=float) @ frame
    return np.column_stack([lz.exp_differential(x, vv, e) for e in frame])


def ambient_to_chart(x, y, Xi):
    """(v, xi) in the chart at x for a point y and an ambient covector Xi at y."""
    frame = lz.tangent_frame(x)
    vamb = lz.log_map(x, y)
    sg = np.ones(len(frame))
    sg[0] = -1.0
    v = sg * lz.minkowski_form(vamb[None, :], frame)
    J = chart_jacobian(x, v)
    return v, np.asarray(Xi, dtype=float) @ J


def chart_to_ambient(x, v, xi):
    """(y, Xi) with Xi(y) = 0 and Xi restricted to T_y dS equal to xi."""
    y = lz.chart_point(x, np.asarray(v, dtype=float))
    J = chart_jacobian(x, v)
    A = np.vstack([J.T, y[None, :]])
    rhs = np.concatenate([np.asarray(xi, dtype=float), [0.0]])
    return y, np.linalg.solve(A, rhs)


def wf_contains_ambient(spec: WfSpec, y, Xi) -> bool:
    v, xi = ambient_to_chart(spec.basepoint, y, Xi)
    return spec.contains(_snap(v), xi)


def _snap(v, tol=1e-12):
    v = np.asarray(v, dtype=float).copy()
    v[np.abs(v) < tol] = 0.0
    return v


# --------------------------------------------------------------- sampling

def conic_samples(n: int, count: int, rng: np.random.Generator):
    """Mixed (v, xi) samples: exact members of either spec, their antipodes, apex and off-cone points."""
    out = []
    for k in range(count):
        r = rng.uniform(0.05, 0.9)
        w = rng.normal(size=n - 1)
        w /= np.linalg.norm(w)
        mode = k % 5
        if mode == 4:
            v = np.zeros(n)
            xi = np.concatenate([[rng.choice([-1.0, 1.0])], rng.normal(size=n - 1)])
            if rng.uniform() < 0.7:
                xi[1:] *= abs(xi[0]) / np.linalg.norm(xi[1:])
        else:
            v = np.concatenate([[rng.choice([-1.0, 1.0]) * r], r * w])
            if mode == 3:
                v[0] *= rng.uniform(0.5, 1.5)
            target = np.concatenate([[-abs(v[0])], np.sign(v[0]) * v[1:]])
            if mode == 2:
                xi = rng.normal(size=n)
            else:
                xi = rng.choice([-1.0, 1.0]) * target * rng.uniform(0.1, 10.0)
        out.append((v, xi))
    return out


def spec_samples_json(spec: WfSpec, n: int, count: int, seed: int = 0) -> str:
    rng = np.random.default_rng(seed)
    rows = []
    for v, xi in conic_samples(n, count * 5, rng):
        if spec.contains(v, xi):
            y, Xi = chart_to_ambient(spec.basepoint, v, xi)
            rows.append({"v": v.tolist(), "xi": (xi / np.linalg.norm(xi)).tolist(),
                         "y": y.tolist(), "Xi": Xi.tolist()})
        if len(rows) >= count:
            break
    return json.dumps({"kind": spec.kind.value, "basepoint": spec.basepoint.tolist(), "samples": rows})


def coverage_defects(n: int, count: int, rng: np.random.Generator) -> int:
    """Characteristic conormal directions of the cone (and null apex directions) missed by both specs."""
    x = lz.base_point(n)
    a = predicted_wf(SpecKind.PsiSpec, x)
    b = predicted_wf(SpecKind.PsiTildeSpec, x)
    misses = 0
    for k in range(count):
        if k % 4 == 0:
            v = np.zeros(n)
            u = rng.normal(size=n - 1)
            xi = np.concatenate([[rng.choice([-1.0, 1.0])], u / np.linalg.norm(u)])
        else:
            u = rng.normal(size=n - 1)
            u /= np.linalg.norm(u)
            r = rng.uniform(0.05, 0.9)
            v = np.concatenate([[rng.choice([-1.0, 1.0]) * r], r * u])
            # conormal of the cone at v: multiples of (v_0, -v_vec)
            xi = rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 10) * np.concatenate([[v[0]], -v[1:]])
        if not char_membership(v, xi):
            raise AssertionError("sample not characteristic")
        if not (a.contains(v, xi) or b.contains(v, xi)):
            misses += 1
    return misses


# ------------------------------------------------------------ decay probe

@dataclass
class DecayReport:
    directions: np.ndarray
    taus: tuple
    mags: np.ndarray
    exponents: np.ndarray
    singular: list
    base: np.ndarray

    def csv_rows(self):
        rows = ["direction,xi,tau,magnitude,exponent,class"]
        for i, xi in enumerate(self.directions):
            label = "singular" if self.singular[i] else "regular"
            xs = " ".join(f"{c:.6g}" for c in xi)
            for t, m in zip(self.taus, self.mags[i]):
                rows.append(f"{i},{xs},{t:g},{m:.6e},{self.exponents[i]:.4f},{label}")
        return rows


def cone_coords(v):
    """(sigma, v_0, angle) of a chart vector; angle is the sign of v_1 when n = 2."""
    v = np.asarray(v, dtype=float)
    sigma = float(lz.minkowski_form(v, v))
    if len(v) == 2:
        return sigma, float(v[0]), float(np.sign(v[1]))
    return sigma, float(v[0]), math.atan2(v[2], v[1])


def cone_jacobian(v) -> np.ndarray:
    """Columns d v / d(sigma, v_0[, angle]) at v (needs v off the time axis)."""
    v = np.asarray(v, dtype=float)
    n = len(v)
    rho = float(np.linalg.norm(v[1:]))
    if rho < 1e-9:
        raise ValueError("cone coordinates degenerate on the time axis")
    u = v[1:] / rho
    d_sigma = np.concatenate([[0.0], u / (2 * rho)])
    d_v0 = np.concatenate([[1.0], u * v[0] / rho])
    cols = [d_sigma, d_v0]
    if n == 3:
        cols.append(np.array([0.0, -v[2], v[1]]))
    return np.column_stack(cols)


def _kernel_sigma(dist: SphericalDist, sigma, future):
    """Kernel value from sigma = [v,v] in the exp chart: y' = (1 - C(sigma)) / 2."""
    sigma = np.asarray(sigma, dtype=float)
    r = np.sqrt(np.abs(sigma))
    yp = np.where(sigma >= 0, np.sin(r / 2) ** 2, -np.sinh(r / 2) ** 2)
    return _side_value(dist, yp, np.broadcast_to(future, yp.shape))


def _osc_integral(f, lo, hi, freq, split=None, level=9):
    """int_lo^hi f(s) e^{-2 pi i freq s} ds by tanh-sinh, split at an interior singular point."""
    pieces = [(lo, split), (split, hi)] if split is not None and lo < split < hi else [(lo, hi)]
    total = 0.0 + 0.0j
    for a, b in pieces:
        x, w = tanh_sinh(a, b, level=level)
        total += np.sum(w * f(x) * np.exp(-2j * math.pi * freq * x))
    return complex(total)


def _bump(c, h):
    return lambda s: profile(np.minimum(np.abs(s - c) / h, 1.0)) * (np.abs(s - c) < h)


def probe_integral(dist: SphericalDist, vb, xi, tau: float, hw: float = WINDOW_HALFWIDTH,
                   level: int = 9) -> complex:
    """<u, chi e^{-2 pi i tau <., eta>}> in cone coordinates (sigma, v_0, angle) around vb.

    The window chi is a product bump in those coordinates (about hw chart
    units wide in each) and eta is the chart covector xi carried over by the
    Jacobian transpose at vb, so the pairing splits into one-dimensional
    oscillatory integrals.
    """
    vb = np.asarray(vb, dtype=float)
    xi = np.asarray(xi, dtype=float)
    n = len(vb)
    if n not in (2, 3):
        raise NotImplementedError("probe implemented for n = 2 and n = 3")
    sb, v0b, ab = cone_coords(vb)
    rho = float(np.linalg.norm(vb[1:]))
    if rho < 2 * hw:
        raise ValueError("window too close to the time axis")
    if abs(v0b) <= hw:
        raise ValueError("window straddles v_0 = 0")
    eta = cone_jacobian(vb).T @ xi
    hs = 2 * rho * hw
    future = v0b > 0

    def ksig(s):
        return _kernel_sigma(dist, s, future) * _bump(sb, hs)(s)

    split = 0.0 if sb - hs < 0 < sb + hs else None
    out = _osc_integral(ksig, sb - hs, sb + hs, tau * eta[0], split, level)
    out *= _osc_integral(_bump(v0b, hw), v0b - hw, v0b + hw, tau * eta[1], None, level)
    if n == 3:
        ha = hw / rho
        out *= _osc_integral(_bump(ab, ha), ab - ha, ab + ha, tau * eta[2], None, level)
    return out


def decay_probe(dist: SphericalDist, base_pt, directions, taus=DEFAULT_TAUS,
                hw: float = WINDOW_HALFWIDTH, floor_rel: float = 1e-12) -> DecayReport:
    base_pt = np.asarray(base_pt, dtype=float)
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    directions = directions / np.linalg.norm(directions, axis=1, keepdims=True)
    mags = np.array([[abs(probe_integral(dist, base_pt, xi, t, hw)) for t in taus] for xi in directions])
    # noise floor relative to the window mass (tau = 0)
    mass = abs(probe_integral(dist, base_pt, directions[0], 0.0, hw))
    ref = max(mass, float(mags.max()), 1e-300)
    exps, sing = [], []
    for row in mags:
        e, rapid = fit_decay(np.array(taus), row, floor_rel * ref)
        exps.append(e)
        sing.append(not rapid)
    return DecayReport(directions, tuple(taus), mags, np.array(exps), sing, base_pt)
