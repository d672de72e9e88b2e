"""Acceptance criteria, each at its stated tolerance.

Every test prints one ``CRITERION n: PASS|FAIL`` line (visible with -s or
in the -v log) before asserting.
"""

import cmath
import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from cmc1 import bryant as B
from cmc1 import jets as J
from cmc1 import liouville as L
from cmc1.analytic import Rect, fd_laplacian, schwarzian
from cmc1.exprlang import eval_jet, evaluate, parse, to_text
from cmc1.lorentz import rotation_x1x2

CORPUS = Path(__file__).parent / "data" / "expressions.txt"


@pytest.fixture
def announce(capsys):
    def _announce(n, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {n}: {'PASS' if ok else 'FAIL'} - {detail}")
        return ok
    return _announce


def _strip_points():
    return [complex(s, t) for s in np.linspace(-1, 1, 9) for t in np.linspace(-0.8, 0.8, 9)]


def test_c01_liouville_strip_sech2(announce):
    t0 = time.perf_counter()
    data = L.LiouvilleCauchyData.from_d(1.0, 0.0, 1.0, (-1.0, 1.0))
    routes = {"analytic": L.solve_cauchy_analytic(data), "geometric": L.solve_cauchy_geometric(data)}
    pts = _strip_points()
    exact = {z: 1.0 / math.cosh(z.imag) ** 2 for z in pts}
    errs = {k: max(abs(sol.phi(z) - exact[z]) for z in pts) for k, sol in routes.items()}
    agree = max(abs(routes["analytic"].phi(z) - routes["geometric"].phi(z)) for z in pts)
    elapsed = time.perf_counter() - t0
    ok = max(errs.values()) <= 1e-9 and agree <= 1e-8 and elapsed < 1.0
    announce(1, ok, f"errors {errs}, agreement {agree:.2e}, {elapsed:.2f}s")
    assert ok


BATTERY_A = {"1": 1.0, "4": 4.0, "2+sin s": lambda x: 2 + J.sin(x)}
BATTERY_D = {"0": 0.0, "-2": -2.0, "cos s": lambda x: J.cos(x)}
INTERIOR = [complex(s, t) for s in (-0.6, 0.0, 0.6) for t in (-0.4, 0.0, 0.4)]


def test_c02_oracle_triangle(announce):
    t0 = time.perf_counter()
    samples = np.linspace(-1, 1, 9)
    pts = [complex(s, t) for s in np.linspace(-1, 1, 5) for t in np.linspace(-0.8, 0.8, 5)]
    worst = {"agree": 0.0, "residual": 0.0, "richardson": 0.0, "bnd_a": 0.0, "bnd_d": 0.0}
    failing = []
    for an, a in BATTERY_A.items():
        for dn, d in BATTERY_D.items():
            data = L.LiouvilleCauchyData.from_d(a, d, 1.0, (-1.0, 1.0))
            sols = [L.solve_cauchy_analytic(data), L.solve_cauchy_geometric(data),
                    L.solve_cauchy_lightcone(a, d, (-1.0, 1.0))]
            agree = max(abs(x.phi(z) - y.phi(z)) for z in pts
                        for x, y in ((sols[0], sols[1]), (sols[1], sols[2]), (sols[0], sols[2])))
            for sol in sols:
                r1 = L.pde_residual(sol, INTERIOR, h=1e-3)
                r2 = L.pde_residual(sol, INTERIOR, h=2e-3)
                ea, ed = L.boundary_errors(sol, data.a, data.d, samples)
                worst["residual"] = max(worst["residual"], r1)
                worst["richardson"] = max(worst["richardson"], abs(4 * r1 - r2) / 3)
                worst["bnd_a"] = max(worst["bnd_a"], ea)
                worst["bnd_d"] = max(worst["bnd_d"], ed)
                if r1 > 1e-6:
                    failing.append((an, dn, sol.method, f"{r1:.2e}"))
            worst["agree"] = max(worst["agree"], agree)
    elapsed = time.perf_counter() - t0
    ok = (worst["agree"] <= 1e-7 and worst["residual"] <= 1e-6 and worst["bnd_a"] <= 1e-8
          and worst["bnd_d"] <= 1e-6 and elapsed < 10)
    announce(2, ok, f"{ {k: f'{v:.2e}' for k, v in worst.items()} }, {elapsed:.1f}s; "
                    f"residual above 1e-6 for {sorted(set(f[:2] for f in failing))} "
                    "(five-point truncation of the exact solution; Richardson value shown)")
    assert ok


def test_c03_catenoid_pipeline(announce, catenoid):
    t0 = time.perf_counter()
    case = B.catenoid_cousin(0.75, 1)
    surface, _ = B.solve_bjorling(case.data, ns=0, nt=0)
    pts = [complex(s, t) for s in np.linspace(0, 2 * math.pi, 13) for t in (-0.7, 0.0, 0.9)]
    err_G = max(abs(surface.G(z) - cmath.exp(-1j * z)) for z in pts)
    err_q = max(abs(surface.q(z) + 0.75) for z in pts)
    # g has real poles, so it is compared away from the axis
    off_axis = [z for z in pts if z.imag != 0]
    err_k = max(abs(schwarzian(surface.g.as_map(), z) - 2.0) for z in off_axis)
    _, unitarity, err_g = B.gauge_match(surface.g, lambda z: cmath.exp(2j * z), off_axis)
    err_beta = max(float(np.max(np.abs(surface.psi(s) - case.data.beta(s).real)))
                   for s in np.linspace(0, 2 * math.pi, 33))
    smp = B.sample_surface(surface, Rect(0, 2 * math.pi, -1, 1), 41, 41, second_route=False)
    ok_mask = ~smp.mask
    err_H = float(np.max(np.abs(smp.H[ok_mask] - 1)))
    psi = smp.psi[ok_mask]
    err_norm = float(np.max(np.abs(-psi[:, 0] ** 2 + np.sum(psi[:, 1:] ** 2, axis=1) + 1)))
    elapsed = time.perf_counter() - t0
    ok = (max(err_G, err_q, err_k, unitarity, err_g) <= 1e-8 and err_beta <= 1e-7
          and err_H <= 1e-6 and err_norm <= 1e-9 and elapsed < 5)
    announce(3, ok, f"G {err_G:.1e}, q {err_q:.1e}, k {err_k:.1e}, g up to SU(2) "
                    f"{err_g:.1e} (gauge unitarity {unitarity:.1e}), beta {err_beta:.1e}, "
                    f"H {err_H:.1e}, <psi,psi>+1 {err_norm:.1e}, masked {smp.masked_count}, "
                    f"{elapsed:.1f}s")
    assert ok


def test_c04_two_route_surfaces(announce, catenoid, hyperbolic_case, helicoid_case):
    t0 = time.perf_counter()
    out = {}
    for name, (case, surface) in (("catenoid", catenoid), ("hyperbolic", hyperbolic_case),
                                  ("helicoid", helicoid_case)):
        smp = B.sample_surface(surface, surface.domain, 21, 21)
        out[name] = float(np.nanmax(np.abs(smp.psi - smp.psi_omega)))
    elapsed = time.perf_counter() - t0
    ok = max(out.values()) <= 1e-7 and elapsed < 10
    announce(4, ok, f"{ {k: f'{v:.1e}' for k, v in out.items()} }, {elapsed:.1f}s")
    assert ok


def test_c05_curvature_integrals(announce, catenoid):
    _, surface = catenoid
    dual = B.sample_surface(surface, Rect(0, 2 * math.pi, -6, 6), 33, 121, frames=False)
    total = B.sample_surface(surface, Rect(0, 2 * math.pi, -8, 8), 33, 161, frames=False)
    dtc = B.metrics(surface, dual)["dual_total_curvature"]
    tc = B.metrics(surface, total)["total_curvature"]
    rel_dual = abs(dtc / (-4 * math.pi) - 1)
    rel_total = abs(tc / (-8 * math.pi) - 1)
    ok = rel_dual <= 0.01 and rel_total <= 0.02
    announce(5, ok, f"dual {dtc:.6f} (rel {rel_dual:.1e}), total {tc:.6f} (rel {rel_total:.1e})")
    assert ok


def test_c06_hyperbolic_invariant(announce, hyperbolic_case):
    case, surface = hyperbolic_case
    k1, k2 = case.constants["k1"], case.constants["k2"]
    err = max(abs(surface.dual_metric_density(s) - B.hyperbolic_invariant_dual_density(k1, k2, s))
              for s in np.linspace(-1, 1, 100))
    a, b, c, d = 1.0, 0.0, 1.0, 0.0
    flagged = B.hyperbolic_invariant(a, b, c, d, -a).horosphere
    ok = err <= 1e-9 and flagged
    announce(6, ok, f"dual density error {err:.1e} at 100 points, k2 = -1/2 flagged {flagged}")
    assert ok


def _printed_c1(alpha, phi, c):
    b = math.sqrt(c * c - 1)
    r = math.sqrt(c * c * alpha * alpha + b * b)
    return (b + c * math.cos(phi) + 1j * alpha * math.sin(phi) / r) / (
        c + b * math.cos(phi) + b * math.sin(phi) / r)


def test_c07_helicoid(announce):
    details, ok = [], True
    for alpha, phi, c in ((0.5, 0.7, 1.3), (0.2, -1.1, 2.0), (1.0, 2.5, 1.05)):
        case = B.helicoid(alpha, phi, c)
        surface, _ = B.solve_bjorling(case.data, ns=0, nt=0)
        c1 = case.constants["c1"]
        ss = np.linspace(-1, 1, 41)
        err_G = max(abs(surface.G(s) - c1 * cmath.exp(-(alpha + 1j) * s)) for s in ss)
        printed = _printed_c1(alpha, phi, c)
        err_printed = max(abs(surface.G(s) - printed * cmath.exp(-(alpha + 1j) * s)) for s in ss)
        qs = np.array([surface.q(s) for s in ss])
        err_q = float(np.max(np.abs(qs - qs[0])))
        z = [complex(0.3, 0.2), complex(-0.5, -0.4), complex(0.1, 0.7)]
        base = [surface.metric_density(w) for w in z]
        err_fam = max(abs(B.associate_family(surface, th).metric_density(w) - m) / m
                      for th in (0.5, 1.7, 3.0) for w, m in zip(z, base))
        ok = ok and err_G <= 1e-8 and err_q <= 1e-9 and err_fam <= 1e-8
        details.append(f"({alpha},{phi},{c}): G {err_G:.1e} [c1 with alpha for c*alpha: "
                       f"{err_printed:.1e}], q {err_q:.1e}, family {err_fam:.1e}")
    announce(7, ok, "; ".join(details))
    assert ok


def test_c08_symmetry_and_period(announce):
    rows, ok = [], True
    for b in (0.75, 1.0):
        case = B.catenoid_cousin(b, 1)
        surface, _ = B.solve_bjorling(case.data, ns=0, nt=0)
        sym = B.symmetry_check(surface, rotation_x1x2(0.9), lambda z: z + 0.9, ns=7, nt=7)
        per = B.period_check(surface)
        sqrt2k = case.constants["sqrt_2k"]
        rows.append((b, sym, per.psi_deviation, per.verdict, sqrt2k))
        ok = ok and sym <= 1e-7 and per.psi_deviation <= 1e-8
    # b = 1 has sqrt(2k) = 1 + sqrt 2, which is irrational
    ok = ok and rows[0][3] == "lift single-valued" and rows[1][3] == "lift not single-valued"
    announce(8, ok, "; ".join(f"b={b}: symmetry {s:.1e}, period {p:.1e}, {v} (sqrt 2k = {r:.6f})"
                              for b, s, p, v, r in rows))
    assert ok


def _frenet_rotation_angle(k0, T):
    """Unsigned rotation angle of the Frenet frame after time T, by direct integration."""
    def rhs(_, y):
        p, t = y[:3], y[3:]
        n = np.cross(p, t)
        return np.concatenate([t, -p + k0 * n])
    y0 = np.array([1.0, 0, 0, 0, 1.0, 0])
    y = solve_ivp(rhs, (0, T), y0, rtol=1e-12, atol=1e-13).y[:, -1]
    m0 = np.column_stack([y0[:3], y0[3:], np.cross(y0[:3], y0[3:])])
    m1 = np.column_stack([y[:3], y[3:], np.cross(y[:3], y[3:])])
    rot = m1 @ m0.T
    axial = np.array([rot[2, 1] - rot[1, 2], rot[0, 2] - rot[2, 0], rot[1, 0] - rot[0, 1]])
    return math.atan2(0.5 * np.linalg.norm(axial), 0.5 * (np.trace(rot) - 1))


def _circle_distance(x, y):
    d = (x - y) % (2 * math.pi)
    return min(d, 2 * math.pi - d)


def test_c09_holonomy(announce):
    T = 2 * math.pi
    errs = {}
    for k0 in (0.0, 1.0, math.sqrt(3), 2.0):
        hol = L.holonomy_S2(lambda s: 1.0, lambda s, k=k0: k, T)
        closed = 2 * math.pi * math.sqrt(1 + k0 * k0)
        direct = _frenet_rotation_angle(k0, T)
        unsigned = min(hol.angle, 2 * math.pi - hol.angle)
        errs[k0] = max(_circle_distance(hol.angle, closed), abs(unsigned - direct))
    sqrt3 = L.holonomy_S2(lambda s: 1.0, lambda s: math.sqrt(3), T)
    agree = []
    for b, eps in ((0.75, 1), (0.75, -1), (1.0, 1)):
        case = B.catenoid_cousin(b, eps)
        lc = B.lift_closure_test(case.data)
        surface, _ = B.solve_bjorling(case.data, ns=0, nt=0)
        agree.append(((lc.folds == 1) == B.period_check(surface).lift_single_valued,
                      lc.mode, lc.verdict))
    ok = max(errs.values()) <= 1e-6 and sqrt3.closes_after == 1 and all(a for a, _, _ in agree)
    announce(9, ok, f"angle errors {errs}, sqrt3 {sqrt3.verdict}, catenoid lift tests {agree}")
    assert ok


def test_c10_degenerate(announce):
    pts = _strip_points()
    cases = {
        "phi=1": (1.0, 0.0, lambda z: 1.0),
        "phi=e^2s": (lambda x: J.exp(2 * x), 0.0, lambda z: math.exp(2 * z.real)),
        "phi=e^2t": (1.0, 2.0, lambda z: math.exp(2 * z.imag)),
    }
    out, ok = {}, True
    for name, (a, d, exact) in cases.items():
        sol = L.solve_degenerate(a, d)
        err = max(abs(sol.phi(z) - exact(z)) for z in pts)
        harm = max(abs(fd_laplacian(lambda w: math.log(sol.phi(w)), z, 1e-3))
                   for z in pts[10:70:7])
        out[name] = (f"{err:.1e}", f"{harm:.1e}")
        ok = ok and err <= 1e-10 and harm <= 1e-8
    announce(10, ok, f"(error, harmonic residual) {out}")
    assert ok


def test_c11_parser(announce):
    lines = [ln.strip() for ln in CORPUS.read_text().splitlines() if ln.strip()]
    roundtrip = sum(parse(to_text(parse(t))) == parse(t) for t in lines)
    worst = 0.0
    for t in lines:
        e = parse(t)
        for z0 in (0.3 + 0.2j, 0.7 - 0.1j):
            h = 1e-5
            fd = (evaluate(e, z0 + h) - evaluate(e, z0 - h)) / (2 * h)
            jet = eval_jet(e, z0, 1).c[1]
            worst = max(worst, abs(jet - fd) / max(1.0, abs(jet)))
    euler = evaluate(parse("exp(i*z)"), math.pi) == complex(-1, math.sin(math.pi))
    prec = evaluate(parse("1+2*z^2"), 2) == 9 and evaluate(parse("2^3^2"), 0) == 512 \
        and evaluate(parse("-z^2"), 3) == -9
    ok = roundtrip == len(lines) == 50 and worst <= 1e-7 and euler and prec
    announce(11, ok, f"round-trip {roundtrip}/{len(lines)}, jet vs FD {worst:.1e}, "
                     f"Euler {euler}, precedence {prec}")
    assert ok
