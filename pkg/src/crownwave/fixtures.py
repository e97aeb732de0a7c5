"""Frozen oracle values with provenance, plus the integrity check run before verification.

Every record carries a ``provenance`` tag naming the route that produced it.
Numeric routes can be replayed (``replay_record``); ``check_integrity`` replays
a deterministic subset and refuses fixtures with missing tags.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path

import mpmath as mp
import numpy as np

from .hyp2f1 import CutSide, HypTriple, boundary_2f1, hyp2f1_vec, jump_across_cut
from .quadrature import richardson_to_zero

ORACLE_DPS = 50
HYP_POINTS = 200
HYP_SEED = 20240611
REFERENCE_SETS = ((2, 0.3j), (3, 0.5), (4, 1.2j), (5, 0.7))
BOUNDARY_XS = (1.1, 1.5, 1.9)
FIXTURE_NAME = "fixtures.json"
ENV_VAR = "CROWNWAVE_FIXTURES"

PROVENANCE = {
    "mp-series": "extended-precision truncated series, 50 digits, cross-checked against mpmath.hyp2f1",
    "mp-side-limit": "mpmath.hyp2f1 at x +- 1e-40 i, 50 digits",
    "two-route": "closed-form jump vs eps-extrapolation of the engine, Richardson order 2",
    "harmonic-series": "H_N - ln N - 1/(2N) + 1/(12 N^2) with N = 10^6 terms",
    "computed-verdict": "outcome of a numerical experiment, replayable through the named routine",
}


class FixtureError(RuntimeError):
    pass


def cx(v) -> dict:
    v = complex(v)
    return {"re": v.real, "im": v.imag}


def uncx(d) -> complex:
    return complex(d["re"], d["im"])


def fixture_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path(__file__).resolve().parent / "data"


def fixture_path() -> Path:
    return fixture_dir() / FIXTURE_NAME


# ---------------------------------------------------------------- oracles

def mp_series(a, b, c, z, dps: int = ORACLE_DPS) -> complex:
    """Plain truncated Gauss series in extended precision (|z| <= 0.9)."""
    with mp.workdps(dps + 10):
        a, b, c, z = mp.mpc(a), mp.mpc(b), mp.mpc(c), mp.mpc(z)
        term = mp.mpc(1)
        total = mp.mpc(1)
        tiny = mp.mpf(10) ** (-(dps + 5))
        small = 0
        k = 0
        while small < 3:
            term *= (a + k) * (b + k) / ((c + k) * (k + 1)) * z
            total += term
            k += 1
            small = small + 1 if abs(term) <= tiny * abs(total) else 0
            if k > 20000:
                raise FixtureError("oracle series did not converge")
        return complex(total)


def mp_side_limit(a, b, c, x, side: CutSide, dps: int = ORACLE_DPS) -> complex:
    with mp.workdps(dps):
        z = mp.mpc(x, side.sign * mp.mpf(10) ** -40)
        return complex(mp.hyp2f1(a, b, c, z))


def eps_boundary(params: HypTriple, x: float, side: CutSide,
                 eps_grid=(1e-2, 1e-3, 1e-4, 1e-5), order: int = 2) -> complex:
    """Richardson extrapolation of the engine at x +- i eps."""
    eps = np.array(eps_grid, dtype=float)
    z = x + 1j * side.sign * eps
    vals = hyp2f1_vec(params, z)
    est, _ = richardson_to_zero(eps, vals, order)
    return complex(est)


def euler_gamma_series(N: int = 10 ** 6) -> float:
    h = math.fsum(1.0 / k for k in range(1, N + 1))
    return h - math.log(N) - 1 / (2 * N) + 1 / (12 * N * N)


def hyp_grid(seed: int = HYP_SEED, count: int = HYP_POINTS, radius: float = 0.9) -> np.ndarray:
    """Deterministic points in |z| <= radius (area-uniform)."""
    rng = np.random.default_rng(seed)
    r = radius * np.sqrt(rng.uniform(0, 1, count))
    th = rng.uniform(-math.pi, math.pi, count)
    return r * np.exp(1j * th)


# ------------------------------------------------------------- generation

def _params(n, lam) -> dict:
    return {"n": int(n), "lam": cx(lam)}


def _hyp_records():
    out = []
    zs = hyp_grid()
    for n, lam in REFERENCE_SETS:
        P = HypTriple.family(n, lam)
        for i, z in enumerate(zs):
            v = mp_series(*P.abc, z)
            with mp.workdps(ORACLE_DPS):
                w = complex(mp.hyp2f1(*P.abc, complex(z)))
            if abs(v - w) > 1e-14 * abs(v):
                raise FixtureError(f"oracle routes disagree at n={n}, z={z}")
            out.append({"id": f"hyp/n{n}/{i:03d}", "kind": "hyp2f1", "params": _params(n, lam),
                        "z": cx(z), "value_re": v.real, "value_im": v.imag, "provenance": "mp-series"})
    return out


def _boundary_records():
    out = []
    for n, lam in REFERENCE_SETS:
        P = HypTriple.family(n, lam)
        for x in BOUNDARY_XS:
            for side in (CutSide.Plus, CutSide.Minus):
                v = mp_side_limit(*P.abc, x, side)
                out.append({"id": f"boundary/n{n}/{x}/{side.value}", "kind": "boundary",
                            "params": _params(n, lam), "x": x, "side": side.value,
                            "value_re": v.real, "value_im": v.imag, "provenance": "mp-side-limit"})
    return out


def _jump_record():
    P = HypTriple.family(3, 0.4)
    closed = jump_across_cut(P, 1.5)
    eps = eps_boundary(P, 1.5, CutSide.Minus) - eps_boundary(P, 1.5, CutSide.Plus)
    if abs(closed - eps) > 1e-6:
        raise FixtureError("jump routes disagree")
    return {"id": "jump/n3/0.4/1.5", "kind": "jump", "params": _params(3, 0.4), "x": 1.5,
            "value_re": closed.real, "value_im": closed.imag, "route_gap": abs(closed - eps),
            "provenance": "two-route"}


def _gamma_record():
    g = euler_gamma_series()
    return {"id": "digamma/1", "kind": "digamma", "z": cx(1.0), "value_re": -g, "value_im": 0.0,
            "provenance": "harmonic-series"}


def _verdicts():
    from . import lorentz as lz
    from .kernels import Kind, KernelParams, SphericalDist, recursion_check
    from .wavefront import probe_integral

    out = []
    # 1-z connection: which constant sits on the singular term
    P = HypTriple.family(3, 0.4)
    ref = mp_side_limit(*P.abc, 1.5, CutSide.Minus)
    ok = abs(boundary_2f1(P, 1.5, CutSide.Minus) - ref) <= 1e-10 * abs(ref)
    out.append({"id": "verdict/connection_constant_placement", "kind": "verdict",
                "value": "Gamma(c)Gamma(a+b-c)/(Gamma(a)Gamma(b)) on the singular term",
                "passed": bool(ok), "routine": "hyp2f1.boundary_2f1 vs mp-side-limit",
                "provenance": "computed-verdict"})
    # recursion constants, finite differences at two steps
    rng = np.random.default_rng(5)
    from .kernels import crown_sample
    z = crown_sample(3, 1, rng)[0]
    x = lz.base_point(3)
    Y = np.array([lz.apply_ds(lz.random_isometry(3, rng, 0.3), x) for _ in range(4)])
    r1, r2 = recursion_check(z, 0.7, Y, 1e-2), recursion_check(z, 0.7, Y, 5e-3)
    out.append({"id": "verdict/recursion_constants", "kind": "verdict",
                "value": "L_mu Phi^mu = mu (mu - 1 + n/2) Phi^(mu-1), L_mu = Delta + mu(mu-1+n)",
                "residuals": [r1, r2], "ratio": r1 / r2, "passed": bool(3.5 < r1 / r2 < 4.5),
                "routine": "kernels.recursion_check", "provenance": "computed-verdict"})
    # apex sign: singular covector of Psi on the future cone has xi_0 < 0
    ratios = {}
    for n, lam in ((2, 0.3j), (3, 0.5)):
        d = SphericalDist(Kind.Psi, lz.base_point(n), KernelParams.make(n, lam))
        vb = np.zeros(n)
        vb[0], vb[1] = 0.5, 0.5
        xi = np.concatenate([[-0.5], vb[1:]])
        xi /= np.linalg.norm(xi)
        a = abs(probe_integral(d, vb, xi, 256.0))
        b = abs(probe_integral(d, vb, -xi, 256.0))
        ratios[str(n)] = a / b
    out.append({"id": "verdict/apex_sign", "kind": "verdict",
                "value": "Psi apex covectors have xi_0 < 0; Psi-tilde has xi_0 > 0",
                "probe_ratio_tau256": ratios, "passed": bool(min(ratios.values()) >= 1e3),
                "routine": "wavefront.probe_integral", "provenance": "computed-verdict"})
    return out


def generate(path: Path | None = None) -> Path:
    path = Path(path) if path else fixture_path()
    records = _hyp_records() + _boundary_records() + [_jump_record(), _gamma_record()] + _verdicts()
    doc = {"oracle_dps": ORACLE_DPS, "hyp_seed": HYP_SEED, "routes": PROVENANCE, "records": records}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return path


# -------------------------------------------------------------- integrity

def load(path: Path | None = None) -> dict:
    path = Path(path) if path else fixture_path()
    try:
        doc = json.loads(path.read_text())
    except OSError as exc:
        raise FixtureError(f"cannot read fixtures at {path}: {exc}") from exc
    return doc


def records(doc: dict, kind: str) -> list:
    return [r for r in doc["records"] if r.get("kind") == kind]


def replay_record(rec: dict) -> float:
    """Re-run a record's oracle route; returns the relative gap to the stored value."""
    prov = rec["provenance"]
    if prov == "computed-verdict":
        return 0.0 if rec.get("passed") else math.inf
    stored = complex(rec["value_re"], rec["value_im"])
    if prov == "mp-series":
        P = HypTriple.family(rec["params"]["n"], uncx(rec["params"]["lam"]))
        v = mp_series(*P.abc, uncx(rec["z"]))
    elif prov == "mp-side-limit":
        P = HypTriple.family(rec["params"]["n"], uncx(rec["params"]["lam"]))
        v = mp_side_limit(*P.abc, rec["x"], CutSide.parse(rec["side"]))
    elif prov == "two-route":
        P = HypTriple.family(rec["params"]["n"], uncx(rec["params"]["lam"]))
        x = rec["x"]
        v = eps_boundary(P, x, CutSide.Minus) - eps_boundary(P, x, CutSide.Plus)
        return abs(v - stored) / abs(stored) if abs(v - stored) > 1e-6 else 0.0
    elif prov == "harmonic-series":
        v = -euler_gamma_series()
    else:
        raise FixtureError(f"unknown provenance {prov!r}")
    return abs(v - stored) / max(abs(stored), 1e-300)


def check_integrity(doc: dict, stride: int = 25, tol: float = 1e-13) -> list:
    """Problems found (empty list means the fixtures are usable)."""
    problems = []
    for i, rec in enumerate(doc.get("records", [])):
        prov = rec.get("provenance")
        if not prov or prov not in PROVENANCE:
            problems.append(f"{rec.get('id', i)}: missing or unknown provenance")
            continue
        if prov == "mp-series" and i % stride:
            continue
        gap = replay_record(rec)
        if not gap <= tol:
            problems.append(f"{rec['id']}: replay gap {gap:.2e}")
    return problems
