"""Cauchy problems for the Liouville equation  Delta log phi = -2 c phi.

Solvers
-------
``solve_cauchy_analytic``
    Schwarzian route: a solution T of {T, s} = Upsilon and a companion
    map R built algebraically from T give phi = 4 T' conj(R') / (1 + c T conj R)^2.
``solve_cauchy_geometric``
    Developing-map route: the curve in the space form Q(c) with arclength
    int sqrt(a) and geodesic curvature -d / (2 a^{3/2}), projected
    stereographically and continued by the Schwarzian ODE.
``solve_cauchy_geodesic``
    Closed form g = exp(i int sqrt(a)) for c = 1 and d = 0.
``solve_cauchy_lightcone``
    Route through a null curve in the light cone and the Hopf-type
    Schwarzian identity.
``solve_modified`` and ``solve_degenerate``
    The variant 4 (log rho)_{z zbar} = -rho^2 |f|^2 and the flat case c = 0.

All boundary data are AnalyticMaps of the real parameter s; their
holomorphic extensions are used for s -> z = s + i t.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp

from . import jets as J
from .analytic import (AnalyticMap, ProjectivePair, Rect, as_map, fd_dt, fd_laplacian,
                       initial_state, integral_map, schwarzian_map)
from .errors import BranchJump, DegenerateData, NotPeriodic
from .jets import Jet
from .lorentz import cross3, det4, lorentz_inner, stereographic_Qc_inverse

FRENET_RTOL = 1e-13
FRENET_ATOL = 1e-14


# -- data -------------------------------------------------------------------


@dataclass
class LiouvilleCauchyData:
    """phi(s, 0) = a(s) and phi_z(s, 0) = b(s) with 2 Re b = a'.

    ``interval`` is the real interval carrying the data and ``s0`` the
    base point used by every solver (its midpoint by default).
    """

    a: AnalyticMap
    b: AnalyticMap
    c: float
    interval: tuple = (-1.0, 1.0)
    s0: float | None = None

    def __post_init__(self):
        self.a = as_map(self.a)
        self.b = as_map(self.b)
        if self.s0 is None:
            self.s0 = 0.5 * (self.interval[0] + self.interval[1])

    @classmethod
    def from_d(cls, a, d, c, interval=(-1.0, 1.0), s0=None):
        """Build from the t-derivative datum d: b = (a' - i d) / 2."""
        a, d = as_map(a), as_map(d)
        b = 0.5 * (a.derivative() - 1j * d)
        return cls(a, b, c, interval, s0)

    @property
    def d(self):
        """phi_t(s, 0) = -2 Im b, extended holomorphically."""
        return -2.0 * self.b.imag_ext()

    def samples(self, n=64):
        return np.linspace(self.interval[0], self.interval[1], n)

    def validate(self, tol=1e-9):
        for s in self.samples():
            a = self.a(s)
            if not (a.real > 0) or abs(a.imag) > 1e-10:
                raise DegenerateData(f"a must be real and positive on the interval (a({s}) = {a})")
            defect = 2 * self.b(s).real - self.a.derivative()(s).real
            if abs(defect) > tol * max(1.0, abs(a)):
                raise DegenerateData(f"2 Re b - a' = {defect} at s = {s}")
        return self


# -- solutions ----------------------------------------------------------------


@dataclass
class LiouvilleSolution:
    """A solution phi on a neighbourhood of the data interval.

    ``pointwise(z)`` returns (phi, d log phi / dz); ``grid(s, t)``
    evaluates phi on a tensor grid.
    """

    c: float
    method: str
    pointwise: callable
    grid_fn: callable
    developing_map: object = None
    diagnostics: dict = field(default_factory=dict)
    grid_full_fn: callable = None

    def phi(self, z):
        return self.pointwise(complex(z))[0]

    def dlogphi(self, z):
        return self.pointwise(complex(z))[1]

    def grid(self, s_values, t_values):
        return self.grid_fn(np.asarray(s_values, float), np.asarray(t_values, float))

    def grid_with_dlog(self, s_values, t_values):
        """(phi, d log phi / dz) on a tensor grid."""
        s, t = np.asarray(s_values, float), np.asarray(t_values, float)
        if self.grid_full_fn is not None:
            return self.grid_full_fn(s, t)
        phi = np.empty((len(s), len(t)))
        dlog = np.empty((len(s), len(t)), dtype=complex)
        for i, si in enumerate(s):
            for k, tk in enumerate(t):
                phi[i, k], dlog[i, k] = self.pointwise(complex(si, tk))
        return phi, dlog

    def __call__(self, z):
        return self.phi(z)


def _devmap_phi(st, c):
    y1, y2 = st[..., 0, 0], st[..., 0, 1]
    p1, p2 = st[..., 1, 0], st[..., 1, 1]
    w = p1 * y2 - y1 * p2
    den = np.abs(y2) ** 2 + c * np.abs(y1) ** 2
    phi = 4 * np.abs(w) ** 2 / den ** 2
    dlog = -2 * (p2 * np.conj(y2) + c * p1 * np.conj(y1)) / den
    return phi, dlog


def solution_from_developing_map(pair, c, method, diagnostics=None):
    """phi = 4|g'|^2 / (1 + c|g|^2)^2 for g = y1/y2, evaluated projectively."""

    def pointwise(z):
        phi, dlog = _devmap_phi(pair.state(z), c)
        return float(phi), complex(dlog)

    def grid(s, t):
        return _devmap_phi(pair.grid_states(s, t), c)[0]

    def grid_full(s, t):
        phi, dlog = _devmap_phi(pair.grid_states(s, t), c)
        return phi.real, dlog

    return LiouvilleSolution(c, method, pointwise, grid, pair, diagnostics or {}, grid_full)


def devmap_initial_jet(a0, b0):
    """2-jet (0, sqrt(a)/2, b/(2 sqrt(a))) of a developing map with g(s0) = 0.

    It is the unique normalization with g(s0) = 0 and g'(s0) > 0 whose
    phi has the prescribed value a and z-derivative b at s0.
    """
    ra = math.sqrt(a0)
    return 0.0, 0.5 * ra, b0 / (2 * ra)


def upsilon(a, b, c):
    """Upsilon = (b/a)' - (b/a)^2 / 2 + c a / 2 as an AnalyticMap."""
    beta = b / a
    return beta.derivative() - 0.5 * beta * beta + 0.5 * c * a


# -- analytic route -------------------------------------------------------------


def solve_cauchy_analytic(data, init=None):
    """Schwarzian route; T is the solution of {T, s} = Upsilon with the given 2-jet."""
    if data.c == 0:
        raise DegenerateData("the Schwarzian route needs c != 0; use solve_degenerate")
    data.validate()
    c = data.c
    beta = data.b / data.a
    U = upsilon(data.a, data.b, c)
    g0, g1, g2 = (0.0, 1.0, 0.0) if init is None else init
    T = ProjectivePair(U, data.s0, initial_state(g0, g1, g2))

    def companion(w, st):
        # r1/r2 is the real-axis conjugate of R, continued to the point w
        bj = beta.jet(w, 1)
        u = U(w)
        y1, y2 = st[0]
        p1, p2 = st[1]
        bv, bd = bj.c[0], bj.c[1]
        r1 = -(2 * p2 + bv * y2)
        r2 = c * (2 * p1 + bv * y1)
        r1p = -(-u * y2 + bd * y2 + bv * p2)
        r2p = c * (-u * y1 + bd * y1 + bv * p1)
        return r1, r2, r1p * r2 - r1 * r2p

    def assemble(st, stc, wc):
        r1, r2, wr = companion(wc, stc)
        y1, y2 = st[0]
        p1, p2 = st[1]
        wy = p1 * y2 - y1 * p2
        den = y2 * r2 + c * y1 * r1
        phi = 4 * wy * wr / den ** 2
        dlog = -2 * (p2 * r2 + c * p1 * r1) / den
        return phi, dlog

    def pointwise(z):
        zc = z.conjugate()
        phi, dlog = assemble(T.state(z), T.state(zc), zc)
        return float(phi.real), complex(dlog)

    def grid_full(s, t):
        st = T.grid_states(s, t)
        stc = T.grid_states(s, -t)
        phi = np.empty(st.shape[:2])
        dlog = np.empty(st.shape[:2], dtype=complex)
        for i in range(len(s)):
            for k in range(len(t)):
                p, d = assemble(st[i, k], stc[i, k], complex(s[i], -t[k]))
                phi[i, k], dlog[i, k] = p.real, d
        return phi, dlog

    def grid(s, t):
        return grid_full(s, t)[0]

    return LiouvilleSolution(c, "analytic", pointwise, grid, None, {"T": T}, grid_full)


# -- geometric route -------------------------------------------------------------


@dataclass
class SpaceFormCurve:
    """A curve in Q(c) (c != 0, ambient R^3 or R^{2,1}) or in R^2 (c = 0).

    ``frame(s)`` returns position, unit tangent and unit normal; ``u`` is
    the arclength measured from the base parameter.
    """

    c: float
    s0: float
    solution: object
    speed: AnalyticMap | None = None
    curvature: AnalyticMap | None = None

    def frame(self, s):
        y = self.solution.sol(s)
        if self.c == 0:
            return y[0:2], np.array([math.cos(y[2]), math.sin(y[2])]), None
        return y[0:3], y[3:6], y[6:9]

    def alpha(self, s):
        return self.frame(s)[0]

    def u(self, s):
        return self.solution.sol(s)[-1]


def _qc_metric(c):
    return np.diag([1.0, 1.0, 1.0]) if c > 0 else np.diag([-1.0, 1.0, 1.0])


def default_frame(c):
    """Base point, tangent and normal projecting to 0, 1/2 and i/2 under the chart."""
    r = math.sqrt(abs(c))
    p = np.array([-1.0 / r if c > 0 else 1.0 / r, 0.0, 0.0])
    return p, np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0])


def frenet_integrate_Qc(c, speed, curvature, interval, s0=None, frame=None):
    """Integrate alpha' = v T, T' = v(-c alpha + k N), N' = -v k T on Q(c).

    ``speed`` v = u'(s) and ``curvature`` k(s) are real functions of the
    parameter (AnalyticMaps or callables returning floats).  The normal
    N is the tangent rotated by +90 degrees for the orientation in which
    the stereographic chart is holomorphic.
    """
    if c == 0:
        raise ValueError("use frenet_integrate_R2 for c = 0")
    speed_f = _real_fn(speed)
    curv_f = _real_fn(curvature)
    lo, hi = interval
    s0 = 0.5 * (lo + hi) if s0 is None else s0
    p, tng, nrm = default_frame(c) if frame is None else frame

    def rhs(s, y):
        v, k = speed_f(s), curv_f(s)
        a, tt, nn = y[0:3], y[3:6], y[6:9]
        return np.concatenate([v * tt, v * (-c * a + k * nn), -v * k * tt, [v]])

    y0 = np.concatenate([p, tng, nrm, [0.0]])
    sol = _two_sided_ivp(rhs, s0, y0, lo, hi)
    return SpaceFormCurve(c, s0, sol, as_map(speed), as_map(curvature))


class _TwoSided:
    """Dense output of an IVP integrated from s0 towards both ends."""

    def __init__(self, left, right, s0, y0):
        self.left, self.right, self.s0, self.y0 = left, right, s0, y0

    def sol(self, s):
        if s == self.s0:
            return self.y0.copy()
        part = self.right if s > self.s0 else self.left
        if part is None:
            raise ValueError("parameter outside the integrated interval")
        return part.sol(s)


def _two_sided_ivp(rhs, s0, y0, lo, hi):
    kw = dict(method="DOP853", rtol=FRENET_RTOL, atol=FRENET_ATOL, dense_output=True)
    right = solve_ivp(rhs, (s0, hi), y0, **kw) if hi > s0 else None
    left = solve_ivp(rhs, (s0, lo), y0, **kw) if lo < s0 else None
    return _TwoSided(left, right, s0, y0)


def _real_fn(f):
    if isinstance(f, AnalyticMap):
        return lambda s: f(s).real
    if callable(f):
        return lambda s: complex(f(s)).real
    return lambda s: float(f)


def frenet_integrate_R2(curvature, interval=(0.0, 1.0), s0=None):
    """Plane curve with unit speed and curvature k: alpha = (int cos theta, int sin theta)."""
    curv = _real_fn(curvature)
    lo, hi = interval
    s0 = lo if s0 is None else s0

    def rhs(s, y):
        return np.array([math.cos(y[2]), math.sin(y[2]), curv(s), 1.0])

    sol = _two_sided_ivp(rhs, s0, np.zeros(4), lo, hi)
    return SpaceFormCurve(0.0, s0, sol, AnalyticMap.constant(1.0, real=True), as_map(curvature))


def chart_jet(c, p, v, acc):
    """2-jet of the chart composed with a curve with the given position, velocity, acceleration."""
    k = math.copysign(math.sqrt(abs(c)), c)
    h = [Jet(np.array([p[i], v[i], 0.5 * acc[i]], dtype=complex)) for i in range(3)]
    g = (h[1] + 1j * h[2]) / (1.0 - k * h[0])
    return g.deriv(0), g.deriv(1), g.deriv(2)


def curve_schwarzian(speed, curvature, c):
    """Schwarzian of the chart image of a curve with speed u' and geodesic curvature k.

    The chart image has b/a = u''/u' + i u' k, so its Schwarzian is the
    corresponding Upsilon.
    """
    beta = speed.derivative() / speed + 1j * speed * curvature
    return beta.derivative() - 0.5 * beta * beta + 0.5 * c * speed * speed


def solve_cauchy_geometric(data, n_check=33):
    """Developing-map route through the Frenet curve in Q(c)."""
    if data.c == 0:
        raise DegenerateData("the Frenet route needs c != 0; use solve_degenerate")
    data.validate()
    c = data.c
    speed = data.a.apply(J.sqrt, real=True)
    curvature = -1.0 * data.d / (2.0 * data.a * speed)
    curve = frenet_integrate_Qc(c, speed, curvature, data.interval, data.s0)
    s0 = data.s0
    p, tng, nrm = curve.frame(s0)
    v = speed(s0).real
    vp = speed.derivative()(s0).real
    k = curvature(s0).real
    acc = vp * tng + v * v * (-c * p + k * nrm)
    init = chart_jet(c, p, v * tng, acc)
    U = curve_schwarzian(speed, curvature, c)
    pair = ProjectivePair(U, s0, initial_state(*init))
    # the continued map must reproduce the chart image of the Frenet curve
    kk = math.copysign(math.sqrt(abs(c)), c)
    dev = 0.0
    for s in np.linspace(data.interval[0], data.interval[1], n_check):
        a3 = curve.alpha(s)
        gs = complex(a3[1], a3[2]) / (1 - kk * a3[0])
        dev = max(dev, abs(pair(s) - gs) / max(1.0, abs(gs)))
    diag = {"frenet_chart_deviation": dev, "curve": curve}
    return solution_from_developing_map(pair, c, "geometric", diag)


# -- geodesic shortcut --------------------------------------------------------------


def solve_cauchy_geodesic(a, interval=(-1.0, 1.0), s0=None):
    """c = 1 and d = 0: g = exp(i int_{s0}^z sqrt(a))."""
    a = as_map(a)
    data = LiouvilleCauchyData.from_d(a, 0.0, 1.0, interval, s0)
    data.validate()
    root = a.apply(J.sqrt)
    theta = 1j * integral_map(root, data.s0)
    g = theta.apply(J.exp)

    def pointwise(z):
        th = theta(z)
        r = root(z)
        x = th.real
        phi = abs(r) ** 2 / math.cosh(x) ** 2
        dlog = root.derivative()(z) / r - math.tanh(x) * 1j * r
        return float(phi), complex(dlog)

    def grid(s, t):
        return _theta_grid(root, data.s0, s, t)

    return LiouvilleSolution(1.0, "geodesic", pointwise, grid, g, {})


def _theta_grid(root, s0, s, t):
    """phi on a grid for the geodesic case, integrating along the axis then vertically."""
    from .analytic import path_integral
    out = np.empty((len(s), len(t)))
    for i, si in enumerate(s):
        base = path_integral(root, s0, si)
        order = np.argsort(t)
        acc, z_prev = base, complex(si)
        vals = {}
        for k in order[t[order] >= 0]:
            z = complex(si, t[k])
            acc = acc + path_integral(root, z_prev, z)
            z_prev = z
            vals[k] = acc
        acc, z_prev = base, complex(si)
        for k in order[t[order] < 0][::-1]:
            z = complex(si, t[k])
            acc = acc + path_integral(root, z_prev, z)
            z_prev = z
            vals[k] = acc
        for k, integral in vals.items():
            z = complex(si, t[k])
            x = (1j * integral).real
            out[i, k] = abs(root(z)) ** 2 / math.cosh(x) ** 2
    return out


# -- light-cone route ---------------------------------------------------------------

_E = (1.0, 0.0, 0.0, -1.0)


def _vec_jet(fn, z, n):
    return fn(Jet.variable(z, n))


def _jvec(v):
    return tuple(v)


def _d(v):
    return tuple(x.derivative() for x in v)


def lightcone_frame(nu, dnu, ell, a, branch=1):
    """Solve for F and alpha from nu, nu', L and a (jets or numbers).

    F lies in the plane orthogonal to nu and nu', has <F, F> = a and
    F0 + F3 = L; alpha is the null vector with <alpha, nu> = -1,
    <alpha, nu'> = 0 and alpha x nu x nu' = F.  ``branch`` = +1 or -1
    selects the sign of the component of F transverse to nu.  Returns
    (F, alpha, <alpha, nu>) where the last entry is -1 on the geometric
    branch and +1 on the other one.
    """
    m = cross3(nu, dnu, _E)
    mm = lorentz_inner(m, m)
    y = branch * J.sqrt(a / mm)
    x = (ell - y * (m[0] + m[3])) / (nu[0] + nu[3])
    F = tuple(x * nu[i] + y * m[i] for i in range(4))
    # alpha = A nu + B nu' + C E + D m
    xe = lorentz_inner(_E, nu)
    cc = y
    kap = cross3(m, nu, dnu)
    kap0 = kap[0] / nu[0]
    dd = x / kap0
    bb = -cc * lorentz_inner(_E, dnu) / a
    quad = (bb * bb * a + 2 * bb * cc * lorentz_inner(dnu, _E) + cc * cc * lorentz_inner(_E, _E)
            + dd * dd * mm)
    aa = -quad / (2 * cc * xe)
    alpha = tuple(aa * nu[i] + bb * dnu[i] + cc * _E[i] + dd * m[i] for i in range(4))
    return F, alpha, cc * xe


def canonical_null_curve(a, s0):
    """nu = (1, cos u, sin u, 0) with u = int_{s0} sqrt(a), as a vector AnalyticMap."""
    root = a.apply(J.sqrt)
    u = integral_map(root, s0)

    def ev(z, n):
        uj = u.jet(z, n)
        one = Jet.constant(1.0, z, n)
        zero = Jet.constant(0.0, z, n)
        return (one, J.cos(uj), J.sin(uj), zero)

    return AnalyticMap(ev), u


def _gauss_of(nu):
    return (nu[1] - 1j * nu[2]) / (nu[0] + nu[3])


def solve_cauchy_lightcone(a, d, interval=(-1.0, 1.0), s0=None, nu=None, branch=None):
    """c = 1 solution via a null curve nu with <nu', nu'> = a.

    The right side of the Schwarzian equation is {G} - 2q for the pair
    beta = nu/2 + alpha, V = nu/2 - alpha, which expands to
    {G} + a/2 + <alpha', nu'> - i det(nu, alpha, nu', alpha').
    """
    data = LiouvilleCauchyData.from_d(a, d, 1.0, interval, s0)
    data.validate()
    a, d = data.a, as_map(d)
    s0 = data.s0
    if nu is None:
        nu, _ = canonical_null_curve(a, s0)
    G = AnalyticMap(lambda z, n: _gauss_of(nu.jet(z, n)))
    hG = G.derivative(2) / G.derivative()
    ell = -1.0 * AnalyticMap(lambda z, n: nu.jet(z, n)[0] + nu.jet(z, n)[3]) * (
        d / (2.0 * a) + hG.imag_ext())

    samples = data.samples(65)

    def branch_value(br, s):
        nv = nu(s).real
        dn = nu.derivative()(s).real
        return lightcone_frame(nv, dn, ell(s).real, a(s).real, br)

    if branch is None:
        # larger fourth component of F at s0; then require continuity on the interval
        f_plus = branch_value(1, s0)[0]
        f_minus = branch_value(-1, s0)[0]
        branch = 1 if f_plus[3].real >= f_minus[3].real else -1
    prev = None
    for s in samples:
        F_here = np.array(branch_value(branch, s)[0])
        F_other = np.array(branch_value(-branch, s)[0])
        if np.max(np.abs(F_here - F_other)) < 1e-12 * max(1.0, np.max(np.abs(F_here))):
            raise BranchJump(f"the two F branches meet at s = {s}")
        if prev is not None and np.linalg.norm(F_here - prev) > np.linalg.norm(F_other - prev):
            raise BranchJump(f"F branch is discontinuous near s = {s}")
        prev = F_here

    def alpha_ev(z, n):
        nj = nu.jet(z, n + 1)
        return lightcone_frame(nj, _d(nj), ell.jet(z, n + 1), a.jet(z, n + 1), branch)[1]

    alpha = AnalyticMap(alpha_ev)
    sG = schwarzian_map(G)

    def rhs(z, n):
        nj = _d(nu.jet(z, n + 1))
        al = alpha.jet(z, n + 1)
        dal = _d(al)
        nv = nu.jet(z, n)
        return (sG.jet(z, n) + 0.5 * a.jet(z, n) + lorentz_inner(dal, nj)
                - 1j * det4(nv, al, nj, dal))

    U = AnalyticMap(rhs)
    init = devmap_initial_jet(a(s0).real, data.b(s0))
    pair = ProjectivePair(U, s0, initial_state(*init))
    sign = branch_value(branch, s0)[2]
    diag = {"branch": branch, "alpha_dot_nu": float(np.real(sign)), "alpha": alpha, "nu": nu}
    return solution_from_developing_map(pair, 1.0, "lightcone", diag)


def sphere_frenet_via_schwarzian(curvature, interval=(0.0, 1.0), s0=None):
    """Unit-speed spherical curve with geodesic curvature k from the light-cone route."""
    curvature = as_map(curvature)
    sol = solve_cauchy_lightcone(1.0, -2.0 * curvature, interval, s0)
    g = sol.developing_map
    return SphereCurveFromMap(g, interval, sol)


@dataclass
class SphereCurveFromMap:
    """gamma(s) = inverse chart of g(s) on the unit sphere."""

    g: ProjectivePair
    interval: tuple
    solution: LiouvilleSolution

    def alpha(self, s):
        return stereographic_Qc_inverse(self.g(s), 1.0)


# -- modified and degenerate problems ---------------------------------------------


@dataclass
class ModifiedSolution:
    """rho = sqrt(phi) / |f| for 4 (log rho)_{z zbar} = -rho^2 |f|^2."""

    phi: LiouvilleSolution
    f: AnalyticMap

    def rho(self, z):
        return math.sqrt(self.phi.phi(z)) / abs(self.f(z))

    def dlogrho(self, z):
        """(log rho)_z."""
        fj = self.f.jet(z, 1)
        return 0.5 * self.phi.dlogphi(z) - 0.5 * fj.c[1] / fj.c[0]

    def derivatives(self, z):
        """rho, rho_z and rho_{z zbar} using the equation for the mixed derivative."""
        r = self.rho(z)
        lz = self.dlogrho(z)
        fz = abs(self.f(z))
        mixed = r * (abs(lz) ** 2 - 0.25 * r * r * fz * fz)
        return r, r * lz, mixed

    def grid_derivatives(self, s_values, t_values):
        """rho, rho_z and rho_{z zbar} on a tensor grid."""
        phi, dlog = self.phi.grid_with_dlog(s_values, t_values)
        shape = phi.shape
        f0 = np.empty(shape, dtype=complex)
        f1 = np.empty(shape, dtype=complex)
        for i, si in enumerate(s_values):
            for k, tk in enumerate(t_values):
                fj = self.f.jet(complex(si, tk), 1)
                f0[i, k], f1[i, k] = fj.c[0], fj.c[1]
        r = np.sqrt(phi) / np.abs(f0)
        lz = 0.5 * dlog - 0.5 * f1 / f0
        mixed = r * (np.abs(lz) ** 2 - 0.25 * r * r * np.abs(f0) ** 2)
        return r, r * lz, mixed


def modified_data(v, w, f):
    """a = v^2 |f|^2 and b = 2 v w |f|^2 + v^2 f' conj(f), continued holomorphically."""
    v, w, f = as_map(v), as_map(w), as_map(f)
    fr = f.reflect()
    a = v * v * f * fr
    b = 2.0 * v * w * f * fr + v * v * f.derivative() * fr
    return a, b


def solve_modified(v, w, f, interval=(-1.0, 1.0), s0=None):
    a, b = modified_data(v, w, f)
    data = LiouvilleCauchyData(a, b, 1.0, interval, s0)
    return ModifiedSolution(solve_cauchy_analytic(data), as_map(f))


def solve_degenerate(a, d, interval=(-1.0, 1.0), s0=None):
    """c = 0: phi = |f|^2 with f = sqrt(a) exp(i theta), theta = -1/2 int d/a."""
    data = LiouvilleCauchyData.from_d(a, d, 0.0, interval, s0)
    data.validate()
    a, d = data.a, as_map(d)
    theta = -0.5 * integral_map(d / a, data.s0)
    f = a.apply(J.sqrt) * (1j * theta).apply(J.exp)
    fr = f.reflect()

    def pointwise(z):
        fz = f(z)
        fj = f.jet(z, 1)
        return float(abs(fz) ** 2), complex(fj.c[1] / fj.c[0])

    def grid(s, t):
        return np.array([[abs(f(complex(si, tk))) ** 2 for tk in t] for si in s])

    return LiouvilleSolution(0.0, "degenerate", pointwise, grid, f, {"theta": theta, "f_bar": fr})


# -- verification helpers ---------------------------------------------------------


def boundary_errors(sol, a, d, samples, h=1e-4):
    """Max |phi(s,0) - a(s)| and max |phi_t(s,0) - d(s)| (central differences)."""
    a, d = as_map(a), as_map(d)
    ea = max(abs(sol.phi(s) - a(s).real) for s in samples)
    ed = max(abs(fd_dt(sol.phi, s, h) - d(s).real) for s in samples)
    return ea, ed


def pde_residual(sol, points, h=1e-3):
    """Max |Delta log phi + 2 c phi| by the five-point stencil."""
    lf = lambda z: math.log(sol.phi(z))
    return max(abs(fd_laplacian(lf, complex(z), h) + 2 * sol.c * sol.phi(z)) for z in points)


# -- holonomy -------------------------------------------------------------------------


@dataclass
class Holonomy:
    rotation: np.ndarray
    angle: float
    closes_after: int | None

    @property
    def verdict(self):
        if self.closes_after is None:
            return "no closure detected at this precision"
        q = self.closes_after
        return f"closed after {q} period{'s' if q != 1 else ''}"


def rotation_angle(rot, axis_hint=None):
    """Angle in [0, 2 pi) of a rotation about its axis oriented along axis_hint."""
    w = np.array([rot[2, 1] - rot[1, 2], rot[0, 2] - rot[2, 0], rot[1, 0] - rot[0, 1]])
    cos_t = np.clip(0.5 * (np.trace(rot) - 1.0), -1.0, 1.0)
    sin_abs = 0.5 * np.linalg.norm(w)
    theta = math.atan2(sin_abs, cos_t)
    if sin_abs > 1e-12 and axis_hint is not None and np.dot(w, axis_hint) < 0:
        theta = 2 * math.pi - theta
    return theta % (2 * math.pi)


def closure_period(theta, q_max=64, tol=1e-6):
    """Smallest q <= q_max with q theta / (2 pi) within tol of an integer, via convergents."""
    x = (theta / (2 * math.pi)) % 1.0
    best = None
    for q in _convergent_denominators(x, q_max):
        err = abs(x - round(x * q) / q)
        if err <= tol:
            best = q
            break
    return best


def _convergent_denominators(x, q_max):
    seen = []
    for bound in range(1, q_max + 1):
        q = Fraction(x).limit_denominator(bound).denominator
        if q not in seen:
            seen.append(q)
            yield q


def holonomy_S2(speed, curvature, T, *, frame=None, q_max=64, tol=1e-6, check_period=True):
    """Rotation carrying the Frenet frame of a unit-sphere curve at 0 to the one at T."""
    speed_f, curv_f = _real_fn(speed), _real_fn(curvature)
    if check_period:
        for s in np.linspace(0.0, T, 9):
            if (abs(speed_f(s + T) - speed_f(s)) > 1e-9
                    or abs(curv_f(s + T) - curv_f(s)) > 1e-9):
                raise NotPeriodic("speed and curvature must be T-periodic")
    curve = frenet_integrate_Qc(1.0, speed, curvature, (0.0, T), 0.0, frame)
    p0, t0, n0 = curve.frame(0.0)
    p1, t1, n1 = curve.frame(T)
    m0 = np.column_stack([p0, t0, np.cross(p0, t0)])
    m1 = np.column_stack([p1, t1, np.cross(p1, t1)])
    rot = m1 @ m0.T
    # orient the axis along the mean angular velocity -v (k alpha + N) of the frame
    hint = np.zeros(3)
    for s in np.linspace(0.0, T, 65)[:-1]:
        p, tng, nrm = curve.frame(s)
        hint -= speed_f(s) * (curv_f(s) * p + nrm)
    theta = rotation_angle(rot, hint)
    return Holonomy(rot, theta, closure_period(theta, q_max, tol))
