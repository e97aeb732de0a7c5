"""crownwave command line: evaluation, verification, fixtures and plot data.

Every command prints one JSON report envelope.  Complex numbers are written
as {"re": ..., "im": ...}.  Curves go to CSV with --csv.  Exit codes:
0 all checks pass, 1 a check failed, 2 usage error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

import numpy as np

from . import __version__
from . import dist1d as d1
from . import fixtures as fx
from . import lorentz as lz
from . import wavefront as wf
from .hyp2f1 import CutSide, HypTriple, NotAdmissible, boundary_2f1, check_lambda, gauss_2f1, jump_across_cut

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ------------------------------------------------------------- parsing

def parse_complex(s: str) -> complex:
    """'0.5', '0.3i', '1-2i', '2j' -> complex."""
    t = str(s).strip().replace(" ", "").replace("i", "j")
    if t in ("j", "+j"):
        return 1j
    if t == "-j":
        return -1j
    try:
        return complex(t)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {s!r}") from exc


def format_complex(z: complex) -> str:
    z = complex(z)
    if z.imag == 0:
        return repr(z.real)
    if z.real == 0:
        return f"{z.imag!r}i"
    return f"{z.real!r}{'+' if z.imag >= 0 else '-'}{abs(z.imag)!r}i"


def parse_vector(s: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in str(s).split(",") if v.strip()], dtype=float)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated vector: {s!r}") from exc


def resolve_basepoint(spec: str, n: int) -> np.ndarray:
    if spec in (None, "e_n", "en"):
        return lz.base_point(n)
    x = parse_vector(spec)
    if len(x) != n + 1:
        raise UsageError(f"basepoint needs {n + 1} coordinates")
    try:
        return lz.check_ds(x)
    except lz.GeometryError as exc:
        raise UsageError(str(exc)) from exc


def jsonable(obj):
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": jsonable(float(obj.real)), "im": jsonable(float(obj.imag))}
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()] if obj.dtype != complex else [jsonable(v) for v in obj]
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "value") and hasattr(obj, "name") and not isinstance(obj, (str, bytes)):
        return obj.value  # enums
    return obj


def config_echo(args) -> dict:
    skip = {"func", "timing", "out", "csv", "group", "cmd"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip or v is None:
            continue
        if k == "lam":
            out["lambda"] = format_complex(v)
        elif isinstance(v, np.ndarray):
            out[k] = ",".join(repr(float(c)) for c in v)
        elif isinstance(v, complex):
            out[k] = format_complex(v)
        else:
            out[k] = v
    return out


def check(name, value, tolerance, relation="<=") -> dict:
    ok = {"<=": value <= tolerance, ">=": value >= tolerance, "==": value == tolerance}[relation]
    return {"name": name, "value": value, "relation": relation, "tolerance": tolerance, "pass": bool(ok)}


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(r)


def _lam(args, n=None):
    n = args.n if n is None else n
    try:
        return check_lambda(args.lam, n)
    except NotAdmissible as exc:
        raise UsageError(str(exc)) from exc


def _params(args):
    from .kernels import KernelParams
    return KernelParams.make(args.n, _lam(args))


def _dist(args, kind=None):
    from .kernels import Kind, SphericalDist
    kind = Kind.parse(kind or args.kind)
    return SphericalDist(kind, resolve_basepoint(args.basepoint, args.n), _params(args))


# ------------------------------------------------------------ commands

def cmd_hyp_eval(args):
    P = HypTriple.family(args.n, _lam(args))
    r = gauss_2f1(P, args.z)
    return {"results": [{"z": complex(args.z), "value": r.value, "method": r.method, "err_est": r.err_est}]}


def cmd_hyp_boundary(args):
    P = HypTriple.family(args.n, _lam(args))
    side = CutSide.parse(args.side)
    return {"results": [{"x": args.x, "side": side.value, "value": boundary_2f1(P, args.x, side)}]}


def cmd_hyp_jump(args):
    P = HypTriple.family(args.n, _lam(args))
    return {"results": [{"x": args.x, "jump": jump_across_cut(P, args.x)}]}


def cmd_kernel_eval(args):
    from .kernels import eval_pointwise
    d = _dist(args)
    y = lz.check_ds(args.y)
    val, tag = eval_pointwise(d, y)
    return {"results": [{"y": y, "value": val, "causal": tag.value}]}


def cmd_kernel_pair(args):
    from .kernels import pair, TestFnDS, bump_at
    d = _dist(args)
    phi = bump_at(args.n, args.center, args.radius, x=d.basepoint)
    if args.weight is not None:
        phi = TestFnDS(phi.chart_base, phi.radius, weight=args.weight)
    r = pair(d, phi)
    res = {"value": r.value, "primary": r.primary, "direct": r.direct, "err_est": r.err_est,
           "t_values": list(r.t_values), "t_estimates": list(r.t_estimates), "quad_err": r.quad_err}
    checks = [check("primary vs direct", abs(r.primary - r.direct), 1e-4 * max(1.0, abs(r.value)))]
    return {"results": [res], "checks": checks}


def cmd_kernel_gram(args):
    from .kernels import crown_sample, gram_matrix
    K = _params(args)
    pts = crown_sample(args.n, args.count, np.random.default_rng(args.seed))
    G = gram_matrix(pts, K)
    ev = np.linalg.eigvalsh((G + G.conj().T) / 2)
    if args.csv:
        write_csv(args.csv, ["index", "eigenvalue"], [(i, repr(float(e))) for i, e in enumerate(ev)])
    checks = [check("min eig / max eig", float(ev[0] / ev[-1]), -1e-8, ">=")]
    return {"results": [{"eigenvalues": ev}], "checks": checks}


def cmd_kernel_eigen(args):
    from .kernels import eigen_study
    d = _dist(args)
    st = eigen_study(d, lz.check_ds(args.y), tuple(args.h))
    r = np.array(st.residuals)
    slope = float(np.polyfit(np.log(st.hs), np.log(r), 1)[0]) if np.all(r > 0) else float("nan")
    checks = [check("extrapolated residual / |value|", st.extrapolated, 1e-5)]
    if np.all(r > 0):
        checks.append(check("|slope - 2|", abs(slope - 2), 0.3))
    return {"results": [{"h": st.hs, "residuals": st.residuals, "pair_slopes": st.slopes, "slope": slope,
                         "extrapolated": st.extrapolated, "value": st.value,
                         "eigenvalue": d.eigenvalue()}], "checks": checks}


def cmd_kernel_recursion(args):
    from .kernels import crown_sample, recursion_check
    rng = np.random.default_rng(args.seed)
    n = args.n
    z = crown_sample(n, 1, rng)[0]
    x = lz.base_point(n)
    Y = np.array([lz.apply_ds(lz.random_isometry(n, rng, 0.3), x) for _ in range(5)])
    closed = recursion_check(z, args.lam_p, Y, None)
    r1, r2 = recursion_check(z, args.lam_p, Y, 1e-2), recursion_check(z, args.lam_p, Y, 5e-3)
    checks = [check("closed-form residual", closed, 1e-10),
              check("|fd ratio - 4|", abs(r1 / r2 - 4), 0.5)]
    return {"results": [{"closed": closed, "fd": [r1, r2]}], "checks": checks}


def parse_dist1d(s: str):
    """heaviside | delta:K | expinv | xplus:L | xminus:L | i0:L:plus|minus | log:plus|minus | pv:K"""
    parts = s.lower().split(":")
    head = parts[0]
    try:
        if head == "heaviside":
            return d1.Heaviside()
        if head == "expinv":
            return d1.ExpInv()
        if head == "delta":
            return d1.DeltaDeriv(int(parts[1]) if len(parts) > 1 else 0)
        if head == "xplus":
            return d1.XPlusPow(parse_complex(parts[1]))
        if head == "xminus":
            return d1.XMinusPow(parse_complex(parts[1]))
        if head == "i0":
            return d1.I0Pow(parse_complex(parts[1]), CutSide.parse(parts[2]))
        if head == "log":
            return d1.LogI0(CutSide.parse(parts[1]))
        if head == "pv":
            return d1.PrincipalPow(int(parts[1]))
    except (IndexError, ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(f"bad distribution {s!r}: {exc}") from exc
    raise UsageError(f"unknown distribution {s!r}")


def cmd_dist_pair(args):
    dist = parse_dist1d(args.dist)
    phi = d1.TestFn1D(args.center, args.halfwidth, args.k)
    r = d1.pair(dist, phi)
    out = {"results": [{"value": r.value, "err_est": r.err_est, "method": r.method}]}
    if isinstance(dist, (d1.I0Pow, d1.LogI0)):
        kind = "pow" if isinstance(dist, d1.I0Pow) else "log"
        lam = dist.lam if kind == "pow" else 0
        e, _ = d1.eps_limit(kind, lam, dist.side, phi)
        out["results"][0]["eps_oracle"] = e
        out["checks"] = [check("decomposition vs eps-oracle", abs(e - r.value), 1e-6)]
    return out


def cmd_dist_decompose(args):
    terms = d1.i0_decompose(args.lam, args.side)
    return {"results": [{"coefficient": c, "term": type(t).__name__, "params": jsonable(vars(t))}
                        for c, t in terms]}


def cmd_dist_probe(args):
    dist = parse_dist1d(args.dist)
    T = d1.windowed_fourier(dist, d1.TestFn1D(args.center, args.halfwidth))
    if args.csv:
        rows = list(T.csv_rows())
        write_csv(args.csv, rows[0], rows[1:])
    return {"results": [{"exponent_plus": T.exponent_plus, "exponent_minus": T.exponent_minus,
                         "singular_plus": not T.rapid_plus, "singular_minus": not T.rapid_minus}]}


def cmd_wf_predict(args):
    from .kernels import Kind
    x = resolve_basepoint(args.basepoint, args.n)
    spec = wf.predicted_wf(Kind.parse(args.kind), x)
    doc = json.loads(wf.spec_samples_json(spec, args.n, args.count, args.seed))
    if args.csv:
        n = args.n + 1
        header = [f"base_{i}" for i in range(n)] + [f"xi_{i}" for i in range(n)] + ["kind"]
        write_csv(args.csv, header, [[repr(v) for v in s["y"]] + [repr(v) for v in s["Xi"]] + [doc["kind"]]
                                     for s in doc["samples"]])
    return {"results": [doc]}


def cmd_wf_probe(args):
    d = _dist(args)
    vb = args.v
    if len(vb) != args.n:
        raise UsageError(f"--v needs {args.n} chart coordinates")
    if args.xi is not None:
        dirs = [args.xi]
    else:
        t = np.concatenate([[-abs(vb[0])], np.sign(vb[0]) * vb[1:]])
        dirs = [t, -t]
    rep = wf.decay_probe(d, vb, dirs, tuple(args.taus))
    if args.csv:
        rows = [r.split(",") for r in rep.csv_rows()]
        write_csv(args.csv, rows[0], rows[1:])
    spec = wf.predicted_wf(d.kind, d.basepoint)
    res = []
    for i, xi in enumerate(rep.directions):
        res.append({"direction": i, "xi": xi, "magnitudes": rep.mags[i], "exponent": rep.exponents[i],
                    "singular": rep.singular[i], "predicted": spec.contains(vb, xi)})
    checks = [check(f"direction {r['direction']} classification matches prediction",
                    int(r["singular"] == r["predicted"]), 1, "==") for r in res]
    return {"results": res, "checks": checks}


def cmd_wf_flow(args):
    st = wf.hamiltonian_flow(args.v0 if args.v0 is not None else np.zeros(len(args.xi)), args.xi, args.T)
    ts = np.linspace(0.0, args.T, args.steps + 1)
    V, X = st.at(ts)
    n = len(args.xi)
    header = ["t"] + [f"v_{i}" for i in range(n)] + [f"xi_{i}" for i in range(n)]
    rows = [[repr(float(t))] + [repr(float(c)) for c in v] + [repr(float(c)) for c in xi]
            for t, v, xi in zip(ts, V, X)]
    if args.csv:
        write_csv(args.csv, header, rows)
    checks = [check("closed form vs RK4", st.rk4_defect(), 1e-10)]
    return {"results": [{"header": header, "rows": rows}], "checks": checks}


def cmd_verify_all(args):
    from . import verify
    sets = None
    if args.n is not None or args.lam is not None:
        if args.n is None or args.lam is None:
            raise UsageError("--n and --lambda go together")
        sets = [(args.n, _lam(args))]
    numbers = args.only or None
    results = verify.run_all(sets, numbers, workers=args.workers)
    for r in results:
        print(r.line(), file=sys.stderr)
    checks = [dict(c.as_dict(), name=f"[{r.number}] {c.name}") for r in results for c in r.checks]
    for r in results:
        if r.error:
            checks.append({"name": f"[{r.number}] error", "value": r.error, "relation": "==",
                           "tolerance": None, "pass": False})
    return {"results": [r.as_dict(args.timing) for r in results], "checks": checks}


def cmd_fixtures_generate(args):
    path = fx.generate(args.out_file)
    doc = fx.load(path)
    problems = fx.check_integrity(doc)
    checks = [check("integrity problems", len(problems), 0, "==")]
    return {"results": [{"path": str(path), "records": len(doc["records"]), "problems": problems}],
            "checks": checks}


# -------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crownwave", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"crownwave {__version__}")
    top = p.add_subparsers(dest="group", required=True)

    def common(sp, lam=True, n=True):
        if n:
            sp.add_argument("--n", type=int, required=True, help="dimension of dS^n")
        if lam:
            sp.add_argument("--lambda", dest="lam", type=parse_complex, required=True,
                            help='spectral parameter, e.g. "0.5" or "0.3i"')
        sp.add_argument("--out", help="write the JSON report here instead of stdout")
        sp.add_argument("--timing", action="store_true", help="include wall time in the report")

    def kernel_opts(sp):
        sp.add_argument("--kind", default="Psi", help="Psi | PsiTilde | PhiPow | PhiTildePow | Difference")
        sp.add_argument("--basepoint", default="e_n", help='"e_n" or comma-separated coordinates')

    hyp = top.add_parser("hyp", help="hypergeometric engine").add_subparsers(dest="cmd", required=True)
    sp = hyp.add_parser("eval")
    common(sp)
    sp.add_argument("--z", type=parse_complex, required=True)
    sp.set_defaults(func=cmd_hyp_eval)
    sp = hyp.add_parser("boundary")
    common(sp)
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--side", default="Minus")
    sp.set_defaults(func=cmd_hyp_boundary)
    sp = hyp.add_parser("jump")
    common(sp)
    sp.add_argument("--x", type=float, required=True)
    sp.set_defaults(func=cmd_hyp_jump)

    ker = top.add_parser("kernel", help="kernels and boundary distributions").add_subparsers(dest="cmd", required=True)
    sp = ker.add_parser("eval")
    common(sp)
    kernel_opts(sp)
    sp.add_argument("--y", type=parse_vector, required=True, help="point of dS^n")
    sp.set_defaults(func=cmd_kernel_eval)
    sp = ker.add_parser("pair")
    common(sp)
    kernel_opts(sp)
    sp.add_argument("--center", type=parse_vector, required=True, help="projection coordinates p of the bump")
    sp.add_argument("--radius", type=float, default=0.3)
    sp.add_argument("--weight", type=parse_complex)
    sp.set_defaults(func=cmd_kernel_pair)
    sp = ker.add_parser("gram")
    common(sp)
    sp.add_argument("--count", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_kernel_gram)
    sp = ker.add_parser("eigen")
    common(sp)
    kernel_opts(sp)
    sp.add_argument("--y", type=parse_vector, required=True)
    sp.add_argument("--h", type=float, nargs="+", default=[1e-2, 5e-3, 2.5e-3])
    sp.set_defaults(func=cmd_kernel_eigen)
    sp = ker.add_parser("recursion")
    common(sp, lam=False)
    sp.add_argument("--lambda-p", dest="lam_p", type=parse_complex, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_kernel_recursion)

    dist = top.add_parser("dist", help="one-dimensional model distributions").add_subparsers(dest="cmd", required=True)
    sp = dist.add_parser("pair")
    common(sp, lam=False, n=False)
    sp.add_argument("--dist", required=True, help=parse_dist1d.__doc__)
    sp.add_argument("--center", type=float, default=0.1)
    sp.add_argument("--halfwidth", type=float, default=1.0)
    sp.add_argument("--k", type=int, default=0, help="extra monomial factor x^k")
    sp.set_defaults(func=cmd_dist_pair)
    sp = dist.add_parser("decompose")
    common(sp, n=False)
    sp.add_argument("--side", default="Plus")
    sp.set_defaults(func=cmd_dist_decompose)
    sp = dist.add_parser("probe")
    common(sp, lam=False, n=False)
    sp.add_argument("--dist", required=True)
    sp.add_argument("--center", type=float, default=0.0)
    sp.add_argument("--halfwidth", type=float, default=1.0)
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_dist_probe)

    wfp = top.add_parser("wf", help="wavefront sets").add_subparsers(dest="cmd", required=True)
    sp = wfp.add_parser("predict")
    common(sp, lam=False)
    kernel_opts(sp)
    sp.add_argument("--count", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_wf_predict)
    sp = wfp.add_parser("probe")
    common(sp)
    kernel_opts(sp)
    sp.add_argument("--v", type=parse_vector, required=True, help="chart point near the cone")
    sp.add_argument("--xi", type=parse_vector)
    sp.add_argument("--taus", type=float, nargs="+", default=list(wf.DEFAULT_TAUS))
    sp.add_argument("--csv")
    sp.set_defaults(func=cmd_wf_probe)
    sp = wfp.add_parser("flow")
    sp.add_argument("--xi", type=parse_vector, required=True)
    sp.add_argument("--v0", type=parse_vector)
    sp.add_argument("--T", type=float, default=1.0)
    sp.add_argument("--steps", type=int, default=10)
    sp.add_argument("--csv")
    sp.add_argument("--out")
    sp.add_argument("--timing", action="store_true")
    sp.set_defaults(func=cmd_wf_flow)

    ver = top.add_parser("verify", help="acceptance suite").add_subparsers(dest="cmd", required=True)
    sp = ver.add_parser("all")
    sp.add_argument("--n", type=int)
    sp.add_argument("--lambda", dest="lam", type=parse_complex)
    sp.add_argument("--only", type=int, nargs="+", help="criterion numbers to run")
    sp.add_argument("--workers", type=int, default=4)
    sp.add_argument("--out")
    sp.add_argument("--timing", action="store_true")
    sp.set_defaults(func=cmd_verify_all)

    fxp = top.add_parser("fixtures", help="oracle fixtures").add_subparsers(dest="cmd", required=True)
    sp = fxp.add_parser("generate")
    sp.add_argument("--out-file", help=f"fixture file (default: ${fx.ENV_VAR}/{fx.FIXTURE_NAME} or package data)")
    sp.add_argument("--out")
    sp.add_argument("--timing", action="store_true")
    sp.set_defaults(func=cmd_fixtures_generate)
    return p


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    t0 = time.perf_counter()
    try:
        body = args.func(args)
    except (UsageError, ValueError, NotImplementedError) as exc:
        # domain errors (point off dS^n, lambda not admissible, on the cut ...) are usage errors
        print(f"crownwave: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except fx.FixtureError as exc:
        print(f"crownwave: {exc}", file=sys.stderr)
        return EXIT_IO if "cannot read" in str(exc) else EXIT_FAIL
    except OSError as exc:
        print(f"crownwave: {exc}", file=sys.stderr)
        return EXIT_IO
    checks = body.get("checks", [])
    ok = all(c["pass"] for c in checks)
    report = {"command": f"{args.group} {args.cmd}", "config": config_echo(args),
              "results": body.get("results", []), "checks": checks, "pass": ok}
    if args.timing:
        report["wall_time_s"] = round(time.perf_counter() - t0, 3)
    text = json.dumps(jsonable(report), indent=1, sort_keys=False) + "\n"
    try:
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"crownwave: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if ok else EXIT_FAIL


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
