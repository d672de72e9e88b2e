"""Command-line front end.

Every subcommand maps onto one library operation.  Options can also come
from a flat ``key = value`` config file (``--config``); options given on the
command line win.  Exit status: 0 when every tolerance is met, 2 on a
tolerance failure, 1 on an input error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import bryant as B
from . import liouville as L
from . import mesh as M
from .analytic import AnalyticMap, Rect
from .errors import Cmc1Error
from .exprlang import compile_map, parse

EXIT_OK, EXIT_INPUT, EXIT_TOLERANCE = 0, 1, 2

JOBS = {
    "liouville-analytic": ["liouville", "analytic"],
    "liouville-geometric": ["liouville", "geometric"],
    "liouville-degenerate": ["liouville", "degenerate"],
    "liouville-lightcone": ["liouville", "lightcone"],
    "bjorling": ["bjorling"],
    "planar-geodesic": ["planar-geodesic"],
    "pregeodesic": ["pregeodesic"],
    "gallery": ["gallery"],
    "holonomy": ["holonomy"],
    "verify": ["verify"],
}


class InputError(Cmc1Error, ValueError):
    """Bad command-line or config input."""


# -- config files -------------------------------------------------------------------


def parse_config(text):
    """Flat ``key = value`` pairs; values may be JSON-quoted strings, ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise InputError(f"config line {lineno}: expected key = value")
        if value.startswith('"'):
            try:
                value = json.loads(value)
            except json.JSONDecodeError as err:
                raise InputError(f"config line {lineno}: bad quoted value ({err.msg})") from err
        elif " #" in value:
            value = value.split(" #", 1)[0].strip()
        out[key] = value
    return out


def dump_config(cfg):
    return "".join(f"{k} = {json.dumps(str(v))}\n" for k, v in cfg.items())


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as err:
        raise InputError(f"cannot read config {path}: {err}") from err


def _config_argv(cfg):
    """Turn a config mapping into command tokens and option tokens."""
    cfg = dict(cfg)
    tokens = []
    job = cfg.pop("job", None)
    if job is not None:
        if job not in JOBS:
            raise InputError(f"unknown job {job!r}")
        tokens = list(JOBS[job])
        if job == "gallery":
            tokens.append(cfg.pop("surface", "catenoid-cousin"))
    opts = []
    for key, value in cfg.items():
        flag = "--" + key.replace("_", "-")
        if key == "export":
            for fmt in str(value).split():
                opts += [flag, fmt]
        elif key in _MULTI:
            opts += [flag, *str(value).split()]
        else:
            opts += [flag, str(value)]
    return tokens, opts


_MULTI = {"interval", "rect", "plane_normal", "params", "export"}


def _split_argv(argv, parser):
    """Expand --config into tokens placed so that command-line options win."""
    argv = list(argv)
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise InputError("--config needs a path")
    cfg = load_config(argv[i + 1])
    rest = argv[:i] + argv[i + 2:]
    tokens, opts = _config_argv(cfg)
    words = _command_words(parser)
    lead = []
    while rest and rest[0] in words:
        lead.append(rest.pop(0))
    return (lead or tokens) + opts + rest


def _command_words(parser):
    words = set()
    for action in parser._subparsers._group_actions:
        for name, sub in action.choices.items():
            words.add(name)
            if sub._subparsers is not None:
                for a in sub._subparsers._group_actions:
                    words.update(a.choices)
    return words


# -- helpers ------------------------------------------------------------------------------


def _scalar_map(text, var="s", real=True):
    return compile_map(text, var, real=real)


def _vector_map(text, var="s"):
    parts = [p.strip() for p in text.split(";")]
    if len(parts) != 4:
        raise InputError(f"expected 4 components separated by ';', got {len(parts)}")
    maps = [compile_map(p, var, real=True) for p in parts]
    return AnalyticMap(lambda z, n: tuple(m.jet(z, n) for m in maps), real=True)


def _rect(args, interval):
    if args.rect is not None:
        return Rect(*args.rect)
    return Rect(interval[0], interval[1], -args.half_width, args.half_width)


def _threads():
    raw = os.environ.get("CMC1_NUM_THREADS")
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise InputError("CMC1_NUM_THREADS must be a positive integer") from None
    if n < 1:
        raise InputError("CMC1_NUM_THREADS must be a positive integer")
    return n


def _emit_report(args, rep, to_stderr=False):
    text = json.dumps(rep, indent=2, sort_keys=True, default=_json_default)
    if getattr(args, "report", None):
        M.write_json(args.report, json.loads(text))
    else:
        print(text, file=sys.stderr if to_stderr else sys.stdout)


def _json_default(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, np.generic):
        return x.item()
    raise TypeError(f"not serializable: {type(x).__name__}")


def _interior_points(rect, n=5):
    s = np.linspace(rect.s_min, rect.s_max, n + 2)[1:-1]
    t = np.linspace(rect.t_min, rect.t_max, n + 2)[1:-1]
    return [complex(a, b) for a in s for b in t]


# -- liouville ------------------------------------------------------------------------------


def run_liouville(args):
    a = _scalar_map(args.a)
    d = _scalar_map(args.d)
    interval = tuple(args.interval)
    method = args.method
    c = args.c
    if method == "degenerate" and c != 0:
        raise InputError("the degenerate solver needs --c 0")
    if method == "lightcone" and c != 1:
        raise InputError("the light-cone solver needs --c 1")
    if method == "analytic":
        sol = L.solve_cauchy_analytic(L.LiouvilleCauchyData.from_d(a, d, c, interval, args.s0))
    elif method == "geometric":
        sol = L.solve_cauchy_geometric(L.LiouvilleCauchyData.from_d(a, d, c, interval, args.s0))
    elif method == "degenerate":
        sol = L.solve_degenerate(a, d, interval, args.s0)
    else:
        sol = L.solve_cauchy_lightcone(a, d, interval, args.s0)
    rect = _rect(args, interval)
    s, t = rect.axes(args.ns, args.nt)
    with np.errstate(all="ignore"):
        phi = sol.grid(s, t)
    mask = ~np.isfinite(phi) | (phi <= 0)
    samples = np.linspace(interval[0], interval[1], 17)
    ea, ed = L.boundary_errors(sol, a, d, samples)
    res = L.pde_residual(sol, _interior_points(rect), h=1e-3)
    tol = args.tol
    rep = {
        "job": f"liouville-{method}",
        "c": c,
        "mask_count": int(mask.sum()),
        "pde_residual": res,
        "boundary_error_a": ea,
        "boundary_error_d": ed,
        "tolerances": {"pde_residual": tol, "boundary_a": 1e-8, "boundary_d": 1e-6},
    }
    rep["pass"] = bool(res <= tol and ea <= 1e-8 and ed <= 1e-6)
    if args.out:
        rows = [(float(si), float(tk), float(phi[i, k]))
                for i, si in enumerate(s) for k, tk in enumerate(t) if not mask[i, k]]
        M.write_table(args.out, ("s", "t", "phi"), rows)
    _emit_report(args, rep)
    return EXIT_OK if rep["pass"] else EXIT_TOLERANCE


# -- surfaces ----------------------------------------------------------------------------------


def _finish_surface(args, surface, extra):
    rect = _rect(args, (surface.domain.s_min, surface.domain.s_max))
    grid = M.sample(surface, rect, args.ns, args.nt)
    extra = dict(extra)
    extra["surface"] = surface.descriptor()
    extra["threads"] = _threads()
    rep = M.report(grid, extra)
    ok = rep["max_H_deviation"] <= 1e-6 and rep["diagnostic_failures"] == 0
    if "boundary_error" in extra:
        ok = ok and extra["boundary_error"] <= 1e-7
    rep["pass"] = bool(ok)
    mesh_to_stdout = False
    for fmt in args.export or []:
        if fmt in ("json", "json-report"):
            continue
        if args.out:
            M.export(grid, fmt, f"{args.out}.{fmt}")
        else:
            if len(args.export) > 1:
                raise InputError("several --export formats need --out")
            data = M._WRITERS[fmt](grid)
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
            mesh_to_stdout = True
    if args.out and any(f in ("json", "json-report") for f in args.export or []):
        M.write_json(f"{args.out}.json", json.loads(json.dumps(rep, default=_json_default)))
    _emit_report(args, rep, to_stderr=mesh_to_stdout)
    return EXIT_OK if ok else EXIT_TOLERANCE


def _data_from_args(args):
    beta = _vector_map(args.beta)
    V = _vector_map(args.V)
    return B.BjorlingData(beta, V, tuple(args.interval), args.period, args.s0)


def run_bjorling(args):
    data = _data_from_args(args)
    surface, _ = B.solve_bjorling(data, ns=0, nt=0)
    return _finish_surface(args, surface, {"job": "bjorling",
                                           "boundary_error": B.boundary_error(surface, data)})


def run_planar_geodesic(args):
    surface = B.planar_geodesic_surface(
        _vector_map(args.beta), args.eps, plane_normal=tuple(args.plane_normal),
        interval=tuple(args.interval), period=args.period, s0=args.s0)
    return _finish_surface(args, surface, {
        "job": "planar-geodesic", "boundary_error": B.boundary_error(surface, surface.data)})


def run_pregeodesic(args):
    data = B.pregeodesic_data(_vector_map(args.beta), args.sign, tuple(args.interval),
                              args.period, args.s0)
    surface, _ = B.solve_bjorling(data, ns=0, nt=0)
    return _finish_surface(args, surface, {
        "job": "pregeodesic", "boundary_error": B.boundary_error(surface, data),
        "geodesic_curvature_defect": B.geodesic_curvature_defect(surface, data)})


def run_gallery(args):
    name = args.surface
    if name == "catenoid-cousin":
        case = B.catenoid_cousin(args.b, args.eps)
    elif name == "hyperbolic-invariant":
        if args.params is not None:
            a, b, c, d, lam = args.params
        else:
            a, b, c, d, lam = B.hyperbolic_invariant_params(args.a, args.lam, args.d_sign)
        case = B.hyperbolic_invariant(a, b, c, d, lam)
    else:
        case = B.helicoid(args.alpha, args.phi, args.c)
    extra = {"job": "gallery", "gallery": name,
             "constants": {k: v for k, v in case.constants.items()},
             "closed_forms": case.expressions}
    if case.horosphere:
        extra["horosphere"] = True
        return _finish_surface(args, B.horosphere(), extra)
    surface, _ = B.solve_bjorling(case.data, ns=0, nt=0)
    extra["boundary_error"] = B.boundary_error(surface, case.data)
    return _finish_surface(args, surface, extra)


def run_holonomy(args):
    kappa = _scalar_map(args.kappa)
    speed = _scalar_map(args.speed)
    hol = L.holonomy_S2(lambda s: speed(s).real, lambda s: kappa(s).real, args.T,
                        q_max=args.q_max, tol=args.tol)
    print(hol.verdict)
    print(f"angle = {hol.angle!r}")
    return EXIT_OK


# -- verify -----------------------------------------------------------------------------------


def _check(name, value, tol):
    return {"name": name, "value": float(value), "tolerance": tol, "pass": bool(value <= tol)}


def verify_battery():
    """A fast invariant battery; each entry is a measured value against its tolerance."""
    out = []
    one = AnalyticMap.constant(1.0, real=True)
    zero = AnalyticMap.constant(0.0, real=True)
    data = L.LiouvilleCauchyData.from_d(one, zero, 1.0)
    pts = [complex(x, y) for x in np.linspace(-1, 1, 5) for y in np.linspace(-0.8, 0.8, 5)]
    exact = lambda z: 1 / math.cosh(z.imag) ** 2
    for label, sol in (("analytic", L.solve_cauchy_analytic(data)),
                       ("geometric", L.solve_cauchy_geometric(data))):
        out.append(_check(f"liouville_{label}_sech2", max(abs(sol.phi(z) - exact(z))
                                                          for z in pts), 1e-9))
        out.append(_check(f"liouville_{label}_residual",
                          L.pde_residual(sol, pts[6:9], h=1e-3), 1e-6))
    case = B.catenoid_cousin(0.75, 1)
    surface, smp = B.solve_bjorling(case.data, ns=11, nt=11)
    out.append(_check("catenoid_boundary", B.boundary_error(surface, case.data), 1e-7))
    out.append(_check("catenoid_H", float(np.nanmax(np.abs(smp.H - 1))), 1e-6))
    out.append(_check("catenoid_two_routes", float(np.nanmax(np.abs(smp.psi - smp.psi_omega))),
                      1e-7))
    out.append(_check("catenoid_q", max(abs(surface.q(s) - case.q(s))
                                        for s in np.linspace(0, 6, 7)), 1e-8))
    pr = B.period_check(surface)
    out.append(_check("catenoid_period", pr.psi_deviation, 1e-8))
    hol = L.holonomy_S2(lambda s: 1.0, lambda s: math.sqrt(3), 2 * math.pi)
    out.append(_check("holonomy_sqrt3_closes", 0.0 if hol.closes_after == 1 else 1.0, 0.0))
    degen = L.solve_degenerate(compile_map("exp(2*s)", "s", real=True), zero)
    out.append(_check("degenerate_exp2s", max(abs(degen.phi(z) - math.exp(2 * z.real))
                                              for z in pts), 1e-10))
    out.append(_check("parser_euler", abs(compile_map("exp(i*z)")(math.pi) + 1), 1e-15))
    return out


def run_verify(args):
    checks = verify_battery()
    summary = {"checks": checks, "pass": all(c["pass"] for c in checks)}
    text = json.dumps(summary, indent=2, sort_keys=True)
    if args.out:
        M.write_json(args.out, summary)
    else:
        print(text)
    return EXIT_OK if summary["pass"] else EXIT_TOLERANCE


# -- parser -------------------------------------------------------------------------------------


def _add_grid(p, ns=41, nt=41):
    p.add_argument("--rect", type=float, nargs=4, metavar=("S0", "S1", "T0", "T1"))
    p.add_argument("--half-width", type=float, default=1.0,
                   help="t-range [-w, w] when --rect is absent")
    p.add_argument("--ns", type=int, default=ns)
    p.add_argument("--nt", type=int, default=nt)


def _add_curve(p, interval=(0.0, 2 * math.pi)):
    p.add_argument("--interval", type=float, nargs=2, default=list(interval))
    p.add_argument("--period", type=float)
    p.add_argument("--s0", type=float)


def _add_exports(p):
    p.add_argument("--export", action="append", choices=["obj", "ply", "csv", "json",
                                                         "json-report"])
    p.add_argument("--out", help="output path stem; each format gets its extension")
    p.add_argument("--report", help="write the JSON report here instead of stdout")


class _Parser(argparse.ArgumentParser):
    """Usage errors are input errors (exit 1), not argparse's exit 2."""

    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def build_parser():
    ap = _Parser(prog="cmc1", description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="flat key = value file; command-line options win")
    sub = ap.add_subparsers(dest="command", required=True)

    lv = sub.add_parser("liouville", help="solve the Liouville Cauchy problem")
    lsub = lv.add_subparsers(dest="method", required=True)
    for method in ("analytic", "geometric", "degenerate", "lightcone"):
        p = lsub.add_parser(method)
        p.add_argument("--a", required=True, help="phi(s, 0) as an expression in s")
        p.add_argument("--d", default="0", help="phi_t(s, 0) as an expression in s")
        p.add_argument("--c", type=float, default=0.0 if method == "degenerate" else 1.0)
        p.add_argument("--interval", type=float, nargs=2, default=[-1.0, 1.0])
        p.add_argument("--s0", type=float)
        p.add_argument("--tol", type=float, default=1e-6)
        _add_grid(p, 21, 17)
        p.set_defaults(half_width=0.8)
        p.add_argument("--out", help="CSV grid (s, t, phi)")
        p.add_argument("--report", help="JSON report path")
        p.set_defaults(func=run_liouville)

    p = sub.add_parser("bjorling", help="surface through a curve with a given normal")
    p.add_argument("--beta", required=True, help="four expressions in s separated by ';'")
    p.add_argument("--V", required=True, help="four expressions in s separated by ';'")
    _add_curve(p)
    _add_grid(p)
    _add_exports(p)
    p.set_defaults(func=run_bjorling)

    p = sub.add_parser("planar-geodesic", help="surface with a planar curve as a geodesic")
    p.add_argument("--beta", required=True)
    p.add_argument("--eps", type=int, choices=[1, -1], default=1)
    p.add_argument("--plane-normal", type=float, nargs=4, default=[0.0, 0.0, 1.0, 0.0])
    _add_curve(p)
    _add_grid(p)
    _add_exports(p)
    p.set_defaults(func=run_planar_geodesic)

    p = sub.add_parser("pregeodesic", help="surface making a curve a geodesic")
    p.add_argument("--beta", required=True)
    p.add_argument("--sign", type=int, choices=[1, -1], default=1)
    _add_curve(p, (-1.0, 1.0))
    _add_grid(p)
    _add_exports(p)
    p.set_defaults(func=run_pregeodesic)

    gal = sub.add_parser("gallery", help="closed-form examples")
    gsub = gal.add_subparsers(dest="surface", required=True)
    p = gsub.add_parser("catenoid-cousin")
    p.add_argument("--b", type=float, default=0.75)
    p.add_argument("--eps", type=int, choices=[1, -1], default=1)
    _add_grid(p)
    _add_exports(p)
    p = gsub.add_parser("hyperbolic-invariant")
    p.add_argument("--a", type=float, default=1.5)
    p.add_argument("--lam", type=float, default=0.0)
    p.add_argument("--d-sign", type=float, default=1.0)
    p.add_argument("--params", type=float, nargs=5, metavar=("A", "B", "C", "D", "LAM"))
    _add_grid(p)
    _add_exports(p)
    p = gsub.add_parser("helicoid")
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--phi", type=float, default=0.7)
    p.add_argument("--c", type=float, default=1.3)
    _add_grid(p)
    _add_exports(p)
    for p in gsub.choices.values():
        p.set_defaults(func=run_gallery)

    p = sub.add_parser("holonomy", help="closure of a sphere curve with periodic curvature")
    p.add_argument("--kappa", required=True, help="geodesic curvature as an expression in s")
    p.add_argument("--speed", default="1")
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--q-max", type=int, default=64)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=run_holonomy)

    p = sub.add_parser("verify", help="run the invariant battery and write a JSON summary")
    p.add_argument("--out")
    p.set_defaults(func=run_verify)
    return ap


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        argv = _split_argv(argv, parser)
        args = parser.parse_args(argv)
        _threads()
        for attr in ("a", "d", "kappa", "speed"):
            v = getattr(args, attr, None)
            if isinstance(v, str):
                parse(v, "s")
        return args.func(args)
    except Cmc1Error as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, OSError) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
