"""Bryant surfaces (mean curvature one in H^3) from Bjorling data.

Given an analytic curve beta in H^3 and a unit normal field V along it,
the surface through beta with normal V is built two independent ways:

* rho route: rho solves 4 (log rho)_{z zbar} = -rho^2 |G_z|^2 with Cauchy
  data read off the curve, and psi = F0 Omega F0^* with F0 = [[1, 0], [G, 1]];
* lift route: the secondary Gauss map g solves {g} = {G} - 2 q, and
  psi = F F^* with F given by Small's formula in (g, G).

Both use the hyperbolic Gauss map G = (nu1 - i nu2) / (nu0 + nu3) and the
Hopf coefficient q of the null curve nu = beta + V.  All derivatives of
psi are exact: psi_z = F' F^*, psi_{z zbar} = F' F'^*, psi_zz = F'' F^*.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import jets as J
from .analytic import (EPS_MASK, AnalyticMap, ProjectivePair, Rect, as_map, initial_state,
                       integral_map, schwarzian_map)
from .errors import (DegenerateData, DegeneratePoint, DenominatorVanishes, GeodesicInput,
                     MaskedSingularity, NotAdmissible, ParameterConstraint, PoleSignal)
from .jets import Jet
from .liouville import (LiouvilleCauchyData, ModifiedSolution, closure_period,
                        devmap_initial_jet, holonomy_S2, modified_data, solve_cauchy_analytic)
from .lorentz import (apply_linear, check_sl2c, cross3, herm_to_vec, lorentz_inner,
                      lorentz_matrix, mat_to_cvec, vec_to_herm, wedge_at)

TOL = 1e-9
_ID2 = np.eye(2, dtype=complex)


def _d(v):
    return tuple(x.derivative() for x in v)


def _add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def _trunc(v, n):
    return tuple(x.truncate(n) for x in v)


def _ct(m):
    return np.conj(np.swapaxes(m, -1, -2))


def vector_map(fn, **kw):
    """A 4-vector AnalyticMap from a jet-polymorphic function returning 4 components."""
    return AnalyticMap.from_function(lambda x: tuple(fn(x)), **kw)


# -- data -------------------------------------------------------------------------


@dataclass
class BjorlingData:
    """Curve beta in H^3 and unit normal V along it, both holomorphically extended."""

    beta: AnalyticMap
    V: AnalyticMap
    interval: tuple = (0.0, 2 * math.pi)
    period: float | None = None
    s0: float | None = None
    name: str = ""

    def __post_init__(self):
        if not isinstance(self.beta, AnalyticMap):
            self.beta = vector_map(self.beta)
        if not isinstance(self.V, AnalyticMap):
            self.V = vector_map(self.V)
        self.interval = (float(self.interval[0]), float(self.interval[1]))
        if self.s0 is None:
            self.s0 = 0.5 * (self.interval[0] + self.interval[1])

    def nu_jet(self, z, n):
        return _add(self.beta.jet(z, n), self.V.jet(z, n))

    @property
    def nu(self):
        return AnalyticMap(self.nu_jet)

    def samples(self, n=64):
        return np.linspace(self.interval[0], self.interval[1], n)

    def validate(self, tol=TOL):
        dbeta = self.beta.derivative()
        for s in self.samples():
            b, v, bp = self.beta(s), self.V(s), dbeta(s)
            if np.max(np.abs(b.imag)) > 1e-10 or np.max(np.abs(v.imag)) > 1e-10:
                raise DegenerateData(f"data are not real on the real axis at s = {s}")
            b, v, bp = b.real, v.real, bp.real
            scale = max(1.0, float(np.max(np.abs(b))) ** 2)
            checks = {
                "<beta,beta> = -1": lorentz_inner(b, b) + 1,
                "<V,V> = 1": lorentz_inner(v, v) - 1,
                "<beta,V> = 0": lorentz_inner(b, v),
                "<beta',V> = 0": lorentz_inner(bp, v),
            }
            for label, err in checks.items():
                if abs(err) > tol * scale:
                    raise DegenerateData(f"{label} fails at s = {s} (defect {err:.3e})")
            if b[0] <= 0:
                raise DegenerateData("beta must lie in the upper sheet x0 > 0")
            if np.max(np.abs(bp)) < 1e-12:
                raise DegenerateData(f"beta is singular at s = {s}")
        if self.period is not None:
            for s in self.samples(16):
                for f in (self.beta, self.V):
                    if np.max(np.abs(f(s + self.period) - f(s))) > 1e-9:
                        raise DegenerateData("data are not periodic with the declared period")
        return self

    def transformed(self, phi):
        """Data moved by the isometry induced by phi in SL(2, C)."""
        L = lorentz_matrix(phi)
        beta, V = self.beta, self.V
        return BjorlingData(
            AnalyticMap(lambda z, n: apply_linear(L, beta.jet(z, n))),
            AnalyticMap(lambda z, n: apply_linear(L, V.jet(z, n))),
            self.interval, self.period, self.s0, self.name)


def _denominator_ratio(data, n=64):
    """min of (nu0 + nu3) / max|nu| on the interval.

    nu is future null, so nu0 + nu3 touches zero without changing sign;
    the sampled minimum is refined on its neighbouring cells.
    """
    def ratio(s):
        nu = data.nu(s).real
        return (nu[0] + nu[3]) / float(np.max(np.abs(nu)))

    ss = data.samples(n)
    vals = [ratio(s) for s in ss]
    k = int(np.argmin(vals))
    lo, hi = ss[max(k - 1, 0)], ss[min(k + 1, n - 1)]
    best = minimize_scalar(ratio, bounds=(lo, hi), method="bounded",
                           options={"xatol": 1e-10 * max(1.0, hi - lo)})
    return min(vals[k], float(best.fun))


def _su2(axis, angle):
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    if axis == 1:
        return np.array([[c, 1j * s], [1j * s, c]])
    return np.array([[c, s], [-s, c]], dtype=complex)


def normalize_data(data, bound=0.1):
    """Rotate the data so that nu0 + nu3 >= bound * max|nu| on the interval.

    Returns the moved data and the SU(2) element Phi that was applied.
    """
    if _denominator_ratio(data) >= bound:
        return data, _ID2.copy()
    best, best_phi = -math.inf, _ID2
    angles = [k * math.pi / 8 for k in range(16)]
    for a1 in angles:
        for a2 in angles:
            phi = _su2(1, a1) @ _su2(2, a2)
            r = _denominator_ratio(data.transformed(phi), 32)
            if r > best + 1e-12:
                best, best_phi = r, phi
    return data.transformed(best_phi), best_phi


# -- holomorphic invariants of the data ----------------------------------------------


def _nu_sum(nu):
    return nu[0] + nu[3]


def hyperbolic_gauss(data, check=True):
    """G = (nu1 - i nu2) / (nu0 + nu3)."""
    if check and _denominator_ratio(data) < 1e-6:
        raise DenominatorVanishes("nu0 + nu3 vanishes on the interval; apply normalize_data first")

    def ev(z, n):
        nu = data.nu_jet(z, n)
        return (nu[1] - 1j * nu[2]) / _nu_sum(nu)

    return AnalyticMap(ev, name="G")


def hopf_q(data):
    """q = -1/2 <beta' + V', beta' - i V ^ beta'> with the wedge based at beta."""

    def ev(z, n):
        b = data.beta.jet(z, n + 1)
        v = data.V.jet(z, n + 1)
        bp, vp = _d(b), _d(v)
        w = wedge_at(_trunc(b, n), _trunc(v, n), bp)
        return -0.5 * lorentz_inner(_add(bp, vp), tuple(bp[i] - 1j * w[i] for i in range(4)))

    return AnalyticMap(ev, name="q")


def _wedge_term(data, z, n):
    """((V ^ nu')_0 + (V ^ nu')_3) / (nu0 + nu3) as a jet."""
    b = data.beta.jet(z, n + 1)
    v = data.V.jet(z, n + 1)
    nu = _add(b, v)
    w = wedge_at(_trunc(b, n), _trunc(v, n), _d(nu))
    return (w[0] + w[3]) / _nu_sum(_trunc(nu, n))


def liouville_data(data, G=None):
    """Cauchy data (a, b) of phi = rho^2 |G_z|^2 on the real axis, with c = 1.

    a = <nu', nu'> and b = <nu'', nu'> + i a (X + Im(G''/G')), where X is
    the wedge term ((V ^ nu')_0 + (V ^ nu')_3) / (nu0 + nu3).
    """
    G = hyperbolic_gauss(data) if G is None else G
    im_h = (G.derivative(2) / G.derivative()).imag_ext()

    def a_ev(z, n):
        d1 = _d(data.nu_jet(z, n + 1))
        return lorentz_inner(d1, d1)

    def b_ev(z, n):
        d1 = _d(data.nu_jet(z, n + 2))
        d2 = _d(d1)
        a = lorentz_inner(d1, d1).truncate(n)
        return (lorentz_inner(d2, _trunc(d1, n))
                + 1j * a * (_wedge_term(data, z, n) + im_h.jet(z, n)))

    out = LiouvilleCauchyData(AnalyticMap(a_ev, real=True), AnalyticMap(b_ev), 1.0,
                              data.interval, data.s0)
    out.validate(tol=1e-8)
    return out


def rho_data(data):
    """(v, w) = (rho(s,0), rho_z(s,0)) = (nu0 + nu3, (nu0' + nu3' + i W)/2).

    W is the sum of the 0 and 3 components of V ^ nu' taken at beta.
    """

    def v_ev(z, n):
        return _nu_sum(data.nu_jet(z, n))

    def w_ev(z, n):
        b = data.beta.jet(z, n + 1)
        vv = data.V.jet(z, n + 1)
        dn = _d(_add(b, vv))
        w = wedge_at(_trunc(b, n), _trunc(vv, n), dn)
        return 0.5 * (dn[0] + dn[3] + 1j * (w[0] + w[3]))

    return AnalyticMap(v_ev, real=True), AnalyticMap(w_ev)


def admissibility_curvature(data, G=None):
    """Real functions kappa(s) = -Im b / a^{3/2} and speed sqrt(a) from liouville_data."""
    ld = liouville_data(data, G)
    a, b = ld.a, ld.b
    return (lambda s: -b(s).imag / a(s).real ** 1.5), (lambda s: math.sqrt(a(s).real))


# -- lifts --------------------------------------------------------------------------


def umehara_yamada(G, q, init, z0=0.0):
    """Secondary Gauss map: {g} = {G} - 2 q with the 2-jet ``init`` at z0."""
    U = schwarzian_map(as_map(G)) - 2.0 * as_map(q)
    return ProjectivePair(U, z0, initial_state(*(complex(x) for x in init)))


def secondary_gauss(data, G=None, q=None):
    """g pinned on the real axis to the developing map of the boundary pseudo-metric."""
    G = hyperbolic_gauss(data) if G is None else G
    q = hopf_q(data) if q is None else q
    ld = liouville_data(data, G)
    init = devmap_initial_jet(ld.a(data.s0).real, ld.b(data.s0))
    return umehara_yamada(G, q, init, data.s0)


def _map_jet(m, z, n):
    if isinstance(m, ProjectivePair):
        return m.g_jet(z, n)
    return m.jet(z, n)


def _projective_jet(m, z, n, state=None):
    """A jet of m or of 1/m, whichever is finite; both have the same Schwarzian."""
    if not isinstance(m, ProjectivePair):
        return m.jet(z, n)
    st = m.state(z) if state is None else state
    y1, y2 = m.jets_from_state(z, st, n)
    return y1 / y2 if abs(y2.c[0]) >= abs(y1.c[0]) else y2 / y1


def map_values(m, z, state=None):
    """(value, derivative, spherical derivative |m'| / (1 + |m|^2)) at z, finite at poles."""
    if isinstance(m, ProjectivePair):
        st = m.state(z) if state is None else state
        (y1, y2), (d1, d2) = st
        W = d1 * y2 - y1 * d2
        with np.errstate(divide="ignore", invalid="ignore"):
            val = y1 / y2 if y2 != 0 else complex("inf")
            der = W / y2 ** 2 if y2 != 0 else complex("inf")
        return val, der, abs(W) / (abs(y1) ** 2 + abs(y2) ** 2)
    j = m.jet(z, 1)
    return j.c[0], j.c[1], abs(j.c[1]) / (1 + abs(j.c[0]) ** 2)


def small_lift_jets(gj, Gj):
    """Jets of F = [[C_g, C - g C_g], [D_g, D - g D_g]] from jets of g and G.

    C = i sqrt(g'/G'), D = G C and X_g = X'/g'.  The result has order two
    less than the inputs.
    """
    dg, dG = gj.derivative(), Gj.derivative()
    if abs(dg.c[0]) == 0 or abs(dG.c[0]) == 0:
        raise MaskedSingularity("Small's formula needs g' != 0 and G' != 0")
    C = 1j * J.sqrt(dg / dG)
    D = Gj.truncate(C.order) * C
    Cg = C.derivative() / dg
    Dg = D.derivative() / dg
    n = Cg.order
    g = gj.truncate(n)
    return [[Cg, C.truncate(n) - g * Cg], [Dg, D.truncate(n) - g * Dg]]


def pair_lift_jets(y1, y2, Gj):
    """Small's formula rewritten in a solution pair g = y1/y2 of y'' + (U/2) y = 0.

    With h = G'^{-1/2} and W = y1' y2 - y1 y2' the lift is
    (i / sqrt W) [[h' y2 - h y2', h y1' - h' y1], [(Gh)' y2 - Gh y2', Gh y1' - (Gh)' y1]],
    which stays finite where g has a pole.  Loses two orders.
    """
    dG = Gj.derivative()
    if abs(dG.c[0]) == 0:
        raise MaskedSingularity("Small's formula needs G' != 0")
    W = y1.c[1] * y2.c[0] - y1.c[0] * y2.c[1]
    if W == 0:
        raise MaskedSingularity("degenerate solution pair")
    h = 1.0 / J.sqrt(dG)
    n = h.order - 1
    k = 1j / cmath.sqrt(W)
    Gh = Gj.truncate(h.order) * h
    y1, y2 = y1.truncate(n + 1), y2.truncate(n + 1)
    d1, d2 = y1.derivative(), y2.derivative()
    y1, y2, h0, Gh0 = y1.truncate(n), y2.truncate(n), h.truncate(n), Gh.truncate(n)
    dh, dGh = h.derivative(), Gh.derivative()
    return [[k * (dh * y2 - h0 * d2), k * (h0 * d1 - dh * y1)],
            [k * (dGh * y2 - Gh0 * d2), k * (Gh0 * d1 - dGh * y1)]]


class SmallLift:
    """Holomorphic null lift F of a Bryant surface from its two Gauss maps."""

    def __init__(self, g, G):
        self.g = g
        self.G = G

    def jets(self, z, order=2, g_state=None):
        z = complex(z)
        Gj = _map_jet(self.G, z, order + 2)
        if isinstance(self.g, ProjectivePair):
            st = self.g.state(z) if g_state is None else g_state
            y1, y2 = self.g.jets_from_state(z, st, order + 2)
            return pair_lift_jets(y1, y2, Gj)
        return small_lift_jets(_map_jet(self.g, z, order + 2), Gj)

    def __call__(self, z):
        return jet_matrix(self.jets(z, 0), 0)


class ExplicitLift:
    """F given directly as a function of a jet variable returning a 2x2 nested list."""

    def __init__(self, fn):
        self.fn = fn

    def jets(self, z, order=2, g_state=None):
        x = Jet.variable(complex(z), order)
        return [[e if isinstance(e, Jet) else Jet.constant(e, z, order) for e in row]
                for row in self.fn(x)]

    def __call__(self, z):
        return jet_matrix(self.jets(z, 0), 0)


def jet_matrix(m, k):
    """k-th derivative of a 2x2 jet matrix at its base point."""
    f = math.factorial(k)
    return np.array([[m[0][0].c[k], m[0][1].c[k]], [m[1][0].c[k], m[1][1].c[k]]]) * f


def _herm_inner(X, Y):
    return lorentz_inner(mat_to_cvec(X), mat_to_cvec(Y))


@dataclass
class FramePoint:
    """Exact differential data of a surface at one point."""

    psi: np.ndarray
    eta: np.ndarray
    lam: float
    H: float
    hopf: complex
    K: float
    psi_z: np.ndarray


def frame_from_lift(F, Fp, Fpp, orientation=1.0):
    """psi, unit normal, conformal factor, H, Hopf coefficient and K from F, F', F''.

    The normal is the normalized cross3(psi, psi_s, psi_t) times ``orientation``.
    """
    Fs, Fps, Fpps = _ct(F), _ct(Fp), _ct(Fpp)
    psi = herm_to_vec(F @ Fs)
    pz = Fp @ Fs                      # psi_z
    pzb = F @ Fps                     # psi_zbar
    pzzb = Fp @ Fps                   # psi_{z zbar}
    pzz = Fpp @ Fs
    psi_z = mat_to_cvec(pz)
    ps, pt = 2 * psi_z.real, -2 * psi_z.imag
    n = cross3(psi, ps, pt)
    nn = lorentz_inner(n, n)
    if not nn > 0:
        raise DegeneratePoint("psi_s and psi_t are linearly dependent")
    eta = orientation * n / math.sqrt(nn)
    lam = 2 * _herm_inner(pz, pzb).real
    if not lam > 0:
        raise DegeneratePoint("conformal factor vanishes")
    H = 2 * lorentz_inner(herm_to_vec(pzzb), eta) / lam
    hopf = lorentz_inner(mat_to_cvec(pzz), eta)
    # Gaussian curvature from exact mixed derivatives of lam = 2 <psi_z, psi_zbar>
    pzzzb = Fpp @ Fps
    pzzbzb = Fp @ Fpps
    pzbzb = F @ Fpps
    lz = 2 * (_herm_inner(pzz, pzb) + _herm_inner(pz, pzzb))
    lzzb = 2 * (_herm_inner(pzzzb, pzb) + _herm_inner(pzz, pzbzb)
                + _herm_inner(pzzb, pzzb) + _herm_inner(pz, pzzbzb))
    ddlog = (lam * lzzb.real - abs(lz) ** 2) / lam ** 2
    K = -2 * ddlog / lam
    return FramePoint(psi, eta, lam, H, hopf, K, psi_z)


# -- surfaces -------------------------------------------------------------------------


@dataclass
class BryantSurface:
    """A Bryant surface: Gauss maps, Hopf coefficient, null lift, optional rho route.

    ``normalization`` is an SL(2, C) element applied to every output point
    (psi -> Phi psi Phi^*); it undoes the rotation used by normalize_data.
    """

    G: AnalyticMap | ProjectivePair
    g: AnalyticMap | ProjectivePair
    q: AnalyticMap
    lift: SmallLift | ExplicitLift
    domain: Rect
    data: BjorlingData | None = None
    rho: ModifiedSolution | None = None
    period: float | None = None
    normalization: np.ndarray = field(default_factory=lambda: _ID2.copy())
    orientation: float = 1.0
    kind: str = "bjorling"
    closed_forms: dict = field(default_factory=dict)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self._L = lorentz_matrix(self.normalization)

    @property
    def periodic(self):
        return self.period is not None

    def _out(self, v):
        return v @ self._L.T

    # lift route

    def lift_jets(self, z, order=2, g_state=None):
        return self.lift.jets(complex(z), order, g_state)

    def F(self, z):
        return self.normalization @ jet_matrix(self.lift_jets(z, 0), 0)

    def frame(self, z, g_state=None):
        m = self.lift_jets(z, 2, g_state)
        fp = frame_from_lift(jet_matrix(m, 0), jet_matrix(m, 1), jet_matrix(m, 2), self.orientation)
        fp.psi, fp.eta, fp.psi_z = self._out(fp.psi), self._out(fp.eta), self._out(fp.psi_z)
        return fp

    def psi(self, z):
        F = jet_matrix(self.lift_jets(z, 0), 0)
        return self._out(herm_to_vec(F @ _ct(F)))

    def lift_defects(self, z):
        """(|det F - 1|, |det F'|) at z."""
        m = self.lift_jets(z, 1)
        F, Fp = jet_matrix(m, 0), jet_matrix(m, 1)
        return abs(np.linalg.det(F) - 1), abs(np.linalg.det(Fp))

    def uy_residual(self, z):
        """|{g} - {G} + 2 q| with both Schwarzians taken from jets of g and G."""
        gj = _projective_jet(self.g, complex(z), 3)
        Gj = _projective_jet(self.G, complex(z), 3)
        return abs(J.schwarzian_jet(gj).c[0] - J.schwarzian_jet(Gj).c[0] + 2 * self.q(z))

    # rho route

    def omega(self, z, rho_derivatives=None):
        if self.rho is None:
            raise ValueError("surface was not built with the rho construction")
        r, rz, rzz = self.rho.derivatives(z) if rho_derivatives is None else rho_derivatives
        f = self.G.jet(z, 1).c[1]
        af = abs(f) ** 2
        return np.array([[r + 2 * rzz / (r * r * af), 2 * rz / (r * r * f)],
                         [2 * np.conj(rz) / (r * r * np.conj(f)), 2 / r]])

    def psi_omega(self, z, rho_derivatives=None):
        F0 = np.array([[1, 0], [self.G(z), 1]], dtype=complex)
        return self._out(herm_to_vec(F0 @ self.omega(z, rho_derivatives) @ _ct(F0)))

    def eta_omega(self, z):
        """eta = N - psi with the null vector N = rho [[1, conj G], [G, |G|^2]]."""
        r = self.rho.rho(z)
        Gz = self.G(z)
        F0 = np.array([[1, 0], [Gz, 1]], dtype=complex)
        N = r * np.array([[1, np.conj(Gz)], [Gz, abs(Gz) ** 2]])
        return self._out(herm_to_vec(N) - herm_to_vec(F0 @ self.omega(z) @ _ct(F0)))

    # metrics

    def metric_density(self, z):
        """(1 + |g|^2)^2 |q / g'|^2."""
        return abs(self.q(z)) ** 2 / map_values(self.g, complex(z))[2] ** 2

    def dual_metric_density(self, z):
        """(1 + |G|^2)^2 |q / G'|^2."""
        return abs(self.q(z)) ** 2 / map_values(self.G, complex(z))[2] ** 2

    def descriptor(self):
        """JSON-ready summary: kind, domain, period, closed forms and constants."""
        consts = {}
        for k, v in self.info.items():
            if isinstance(v, (bool, int, float, str)):
                consts[k] = v
            elif isinstance(v, complex):
                consts[k] = [v.real, v.imag]
        return {"kind": self.kind,
                "domain": [self.domain.s_min, self.domain.s_max,
                           self.domain.t_min, self.domain.t_max],
                "periodic": self.periodic, "period": self.period,
                "closed_forms": dict(self.closed_forms), "constants": consts}


def _frame_at(lift, z):
    m = lift.jets(z, 2)
    return frame_from_lift(jet_matrix(m, 0), jet_matrix(m, 1), jet_matrix(m, 2))


def _orientation_from_data(lift, data, s0):
    return 1.0 if lorentz_inner(_frame_at(lift, s0).eta, data.V(s0).real) >= 0 else -1.0


def _orientation_from_H(lift, z0):
    return 1.0 if _frame_at(lift, z0).H >= 0 else -1.0


def _default_domain(data, half_width=1.0):
    return Rect(data.interval[0], data.interval[1], -half_width, half_width)


def solve_bjorling(data, rect=None, ns=21, nt=21, *, with_rho=True, align=True):
    """Bryant surface through data.beta with unit normal data.V.

    Returns the surface and a SurfaceSample on ``rect`` (default: the data
    interval times [-1, 1]).  When nu0 + nu3 gets small the data are first
    rotated by normalize_data; the rotation is undone on output.
    """
    data.validate()
    work, phi = normalize_data(data)
    G = hyperbolic_gauss(work)
    q = hopf_q(work)
    g = secondary_gauss(work, G, q)
    rho = None
    if with_rho:
        v, w = rho_data(work)
        f = G.derivative()
        a, b = modified_data(v, w, f)
        ld = LiouvilleCauchyData(a, b, 1.0, work.interval, work.s0)
        rho = ModifiedSolution(solve_cauchy_analytic(ld), f)
    lift = SmallLift(g, G)
    surface = BryantSurface(
        G, g, q, lift, rect if rect is not None else _default_domain(data), data=data, rho=rho,
        period=data.period, normalization=np.linalg.inv(phi),
        orientation=_orientation_from_data(lift, work, work.s0), kind="bjorling")
    surface.info["normalized"] = not np.allclose(phi, _ID2)
    if align and boundary_error(surface, data) > 1e-7:
        fix = align_isometry(surface, data)
        surface = _renormalized(surface, fix @ surface.normalization)
        surface.info["aligned"] = True
    sample = sample_surface(surface, surface.domain, ns, nt) if ns and nt else None
    return surface, sample


def _renormalized(surface, phi):
    kw = {k: v for k, v in surface.__dict__.items() if k != "_L"}
    kw["normalization"] = phi
    return BryantSurface(**kw)


def boundary_error(surface, data, n=33):
    """max over s of |psi(s,0) - beta(s)| and |eta(s,0) - V(s)|."""
    err = 0.0
    for s in data.samples(n):
        fp = surface.frame(s)
        err = max(err, float(np.max(np.abs(fp.psi - data.beta(s).real))),
                  float(np.max(np.abs(fp.eta - data.V(s).real))))
    return err


def sl2c_from_lorentz(L):
    """Phi in SL(2, C) (up to sign) inducing the proper orthochronous Lorentz matrix L.

    Uses sum_mu L(sigma_mu) sigma_mu = 2 conj(tr Phi) Phi, retrying with a
    pre-rotation when tr Phi is too small.
    """
    L = np.asarray(L, dtype=float)
    basis = [vec_to_herm(e) for e in np.eye(4)]
    for k in range(8):
        R = _su2(1, 0.7 * k) @ _su2(2, 0.3 * k)
        LR = L @ lorentz_matrix(R)
        P = sum(vec_to_herm(LR[:, mu]) @ basis[mu] for mu in range(4))
        det = np.linalg.det(P)
        if abs(det) > 1e-6:
            return (P / cmath.sqrt(det)) @ np.linalg.inv(R)
    raise DegenerateData("could not recover an SL(2, C) element")


def align_isometry(surface, data, s0=None):
    """The isometry Phi carrying the surface frame at s0 to the data frame there.

    Surface frame: (psi, psi_s, psi_t, eta) with unit tangents; data frame:
    (beta, beta'/|beta'|, V ^ beta' / |beta'|, V).
    """
    s0 = data.s0 if s0 is None else s0
    fp = surface.frame(s0)
    ps = 2 * fp.psi_z.real / math.sqrt(fp.lam)
    pt = -2 * fp.psi_z.imag / math.sqrt(fp.lam)
    A = np.column_stack([fp.psi, ps, pt, fp.eta])
    b, v = data.beta(s0).real, data.V(s0).real
    bp = data.beta.derivative()(s0).real
    nb = math.sqrt(lorentz_inner(bp, bp))
    B = np.column_stack([b, bp / nb, wedge_at(b, v, bp) / nb, v])
    gram = np.diag([-1.0, 1.0, 1.0, 1.0])
    # A is gram-orthonormal, so A^{-1} = gram A^T gram
    return sl2c_from_lorentz(B @ gram @ A.T @ gram)


# -- sampling -------------------------------------------------------------------------


@dataclass
class SurfaceSample:
    """Surface quantities on an ns x nt grid; NaN where masked."""

    s: np.ndarray
    t: np.ndarray
    psi: np.ndarray
    eta: np.ndarray
    lam: np.ndarray
    H: np.ndarray
    hopf: np.ndarray
    K: np.ndarray
    G: np.ndarray
    dG: np.ndarray
    g: np.ndarray
    dg: np.ndarray
    q: np.ndarray
    mask: np.ndarray
    g_sph: np.ndarray
    G_sph: np.ndarray
    psi_omega: np.ndarray | None = None

    @property
    def masked_count(self):
        return int(self.mask.sum())

    @property
    def metric_density(self):
        """(1 + |g|^2)^2 |q / g'|^2, written with the spherical derivative of g."""
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.abs(self.q) ** 2 / self.g_sph ** 2

    @property
    def dual_metric_density(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.abs(self.q) ** 2 / self.G_sph ** 2

    @property
    def pseudo_metric_density(self):
        """-K ds^2 = 4 |g'|^2 / (1 + |g|^2)^2."""
        return 4 * self.g_sph ** 2

    @property
    def spherical_G_density(self):
        return 4 * self.G_sph ** 2


def critical_distance(m, z, state=None):
    """Newton estimate |h'/h''| of the distance to the nearest critical point of m.

    h is m or 1/m, whichever is finite at z, so poles of m are not critical.
    A solution pair never has critical points (g' = W / y2^2 with W != 0).
    """
    if isinstance(m, ProjectivePair):
        return math.inf
    j = m.jet(z, 2)
    if abs(j.c[0]) > 1:
        j = 1.0 / j
    d1, d2 = abs(j.c[1]), abs(2 * j.c[2])
    if d1 == 0:
        return 0.0
    return math.inf if d2 == 0 else d1 / d2


def _masked_by_maps(surface, z, st, eps):
    """Within eps of a zero of G' or g' (the set where Small's formula breaks down)."""
    return (critical_distance(surface.G, z) < eps
            or critical_distance(surface.g, z, st) < eps)


_MASKABLE = (PoleSignal, MaskedSingularity, DegeneratePoint, ZeroDivisionError,
             OverflowError, FloatingPointError)


def sample_surface(surface, rect=None, ns=21, nt=21, *, frames=True, second_route=True,
                   eps_mask=EPS_MASK):
    """Evaluate the surface on a grid with jet-exact derivatives and the masking policy.

    With ``second_route`` the position is also computed from the metric
    potential (``psi_omega``) when the surface carries one.
    """
    rect = surface.domain if rect is None else (rect if isinstance(rect, Rect) else Rect(*rect))
    s, t = rect.axes(ns, nt)
    shape = (ns, nt)
    psi = np.full(shape + (4,), np.nan)
    eta = np.full(shape + (4,), np.nan)
    lam, H, K = (np.full(shape, np.nan) for _ in range(3))
    hopf, Gv, dGv, gv, dgv, qv = (np.full(shape, np.nan + 0j) for _ in range(6))
    g_sph, G_sph = np.full(shape, np.nan), np.full(shape, np.nan)
    mask = np.zeros(shape, dtype=bool)
    pso = (np.full(shape + (4,), np.nan)
           if (frames and second_route and surface.rho is not None) else None)
    states = surface.g.grid_states(s, t) if isinstance(surface.g, ProjectivePair) else None
    rho_grid = surface.rho.grid_derivatives(s, t) if pso is not None else None
    for i, si in enumerate(s):
        for k, tk in enumerate(t):
            z = complex(si, tk)
            st = None if states is None else states[i, k]
            try:
                gv[i, k], dgv[i, k], g_sph[i, k] = map_values(surface.g, z, st)
                Gv[i, k], dGv[i, k], G_sph[i, k] = map_values(surface.G, z)
                qv[i, k] = surface.q(z)
                if surface.kind != "horosphere" and _masked_by_maps(surface, z, st, eps_mask):
                    raise MaskedSingularity("near a singular point")
                if frames:
                    fp = surface.frame(z, st)
                    vals = (fp.psi, fp.eta, fp.lam, fp.H, fp.K, fp.hopf)
                    if not all(np.all(np.isfinite(x)) for x in vals):
                        raise MaskedSingularity("non-finite value")
                    psi[i, k], eta[i, k] = fp.psi, fp.eta
                    lam[i, k], H[i, k], K[i, k], hopf[i, k] = fp.lam, fp.H, fp.K, fp.hopf
                    if pso is not None:
                        pso[i, k] = surface.psi_omega(z, tuple(a[i, k] for a in rho_grid))
            except _MASKABLE:
                mask[i, k] = True
    return SurfaceSample(s, t, psi, eta, lam, H, hopf, K, Gv, dGv, gv, dgv, qv, mask,
                         g_sph, G_sph, pso)


def _trapezoid(values, s, t, mask):
    v = np.where(mask, 0.0, values)
    return float(np.trapezoid(np.trapezoid(v, t, axis=1), s))


def metrics(surface, sample):
    """Metric densities, Gaussian curvature and curvature integrals on the sample.

    Total curvature is -int 4|g'|^2/(1+|g|^2)^2 and dual total curvature is
    minus the spherical area swept by G; both by the trapezoid rule over
    unmasked points.
    """
    return {
        "ds2": sample.metric_density,
        "ds2_dual": sample.dual_metric_density,
        "K": sample.K,
        "total_curvature": -_trapezoid(sample.pseudo_metric_density, sample.s, sample.t,
                                       sample.mask),
        "dual_total_curvature": -_trapezoid(sample.spherical_G_density, sample.s, sample.t,
                                            sample.mask),
        "masked": sample.masked_count,
    }


# -- special constructions ----------------------------------------------------------


def _is_h3_geodesic(beta, samples):
    for s in samples:
        bj = beta.jet(s, 2)
        b0 = np.array([x.c[0] for x in bj]).real
        b1 = np.array([x.c[1] for x in bj]).real
        acc = np.array([x.deriv(2) for x in bj]).real
        cov = acc - lorentz_inner(b1, b1) * b0
        cov = cov - lorentz_inner(cov, b1) / lorentz_inner(b1, b1) * b1
        if math.sqrt(max(lorentz_inner(cov, cov), 0.0)) > 1e-8:
            return False
    return True


def planar_geodesic_surface(beta, eps=1, *, plane_normal=(0.0, 0.0, 1.0, 0.0),
                            interval=(0.0, 2 * math.pi), period=None, s0=None):
    """One of the two Bryant surfaces containing the planar curve beta as a geodesic.

    beta lies in the totally geodesic plane orthogonal to ``plane_normal``
    (default x2 = 0).  nu = beta + eps beta x beta' x e / |beta'| and
    g = exp(i int_{s0}^z sqrt<nu', nu'>) in closed form.
    """
    if eps not in (1, -1):
        raise ParameterConstraint("eps must be +1 or -1")
    beta = beta if isinstance(beta, AnalyticMap) else vector_map(beta)
    e = np.asarray(plane_normal, dtype=float)
    for s in np.linspace(interval[0], interval[1], 16):
        if abs(lorentz_inner(beta(s).real, e)) > 1e-9:
            raise DegenerateData("beta does not lie in the prescribed plane")
    if _is_h3_geodesic(beta, np.linspace(interval[0], interval[1], 16)):
        raise GeodesicInput("beta is a geodesic of H^3")

    def V_ev(z, n):
        b = beta.jet(z, n + 1)
        bp = _d(b)
        w = cross3(_trunc(b, n), _trunc(bp, n), tuple(Jet.constant(x, z, n) for x in e))
        nb = J.sqrt(lorentz_inner(bp, bp).truncate(n))
        return tuple(eps * x / nb for x in w)

    data = BjorlingData(beta, AnalyticMap(V_ev), interval, period, s0)
    data.validate()
    ld = liouville_data(data)
    G = hyperbolic_gauss(data)
    u = integral_map(ld.a.apply(J.sqrt), data.s0)
    g = u.apply(lambda x: J.exp(1j * x))
    lift = SmallLift(g, G)
    return BryantSurface(G, g, hopf_q(data), lift, _default_domain(data), data=data,
                         period=period, orientation=_orientation_from_data(lift, data, data.s0),
                         kind="planar-geodesic")


def pregeodesic_data(beta, sign=1, interval=(-1.0, 1.0), period=None, s0=None):
    """Bjorling data making beta a geodesic: V = +-(normal part of beta'') / norm."""
    if sign not in (1, -1):
        raise ParameterConstraint("sign must be +1 or -1")
    beta = beta if isinstance(beta, AnalyticMap) else vector_map(beta)

    def raw(z, n):
        b = beta.jet(z, n + 2)
        b1 = _d(b)
        b2 = _d(b1)
        b, b1 = _trunc(b, n), _trunc(b1, n)
        p11 = lorentz_inner(b1, b1)
        p21 = lorentz_inner(b2, b1)
        return tuple(b2[i] - (p21 / p11) * b1[i] - p11 * b[i] for i in range(4))

    for s in np.linspace(interval[0], interval[1], 32):
        w = np.array([x.c[0] for x in raw(complex(s), 0)]).real
        if math.sqrt(max(lorentz_inner(w, w), 0.0)) < 1e-8:
            raise GeodesicInput(f"beta has no normal acceleration at s = {s}")

    def V_ev(z, n):
        w = raw(z, n)
        nrm = J.sqrt(lorentz_inner(w, w))
        return tuple(sign * x / nrm for x in w)

    return BjorlingData(beta, AnalyticMap(V_ev), interval, period, s0)


def pregeodesic_surface(beta, sign=1, interval=(-1.0, 1.0), period=None, s0=None, **kw):
    """Solve the Bjorling problem with pregeodesic_data; returns (surface, sample)."""
    return solve_bjorling(pregeodesic_data(beta, sign, interval, period, s0), **kw)


def geodesic_curvature_defect(surface, data, n=17):
    """max over s of |<beta'', psi_t(s, 0)>| / |beta'|^2; zero iff beta is a geodesic."""
    d1, d2 = data.beta.derivative(), data.beta.derivative(2)
    worst = 0.0
    for s in data.samples(n):
        fp = surface.frame(s)
        pt = -2 * fp.psi_z.imag / math.sqrt(fp.lam)
        b1 = d1(s).real
        worst = max(worst, abs(lorentz_inner(d2(s).real, pt)) / lorentz_inner(b1, b1))
    return worst


def horosphere():
    """The horosphere psi = F F^* with F = [[1, 0], [z, 1]] (G = g = q = 0)."""
    zero = AnalyticMap.constant(0.0)
    lift = ExplicitLift(lambda x: [[1.0, 0.0], [x, 1.0]])
    return BryantSurface(zero, zero, zero, lift, Rect(-1.0, 1.0, -1.0, 1.0),
                         kind="horosphere", orientation=_orientation_from_H(lift, 0j),
                         closed_forms={"F": "[[1, 0], [z, 1]]"}, info={"horosphere": True})


# -- gallery ----------------------------------------------------------------------------


@dataclass
class GalleryCase:
    """Bjorling data with the closed forms they are expected to reproduce."""

    name: str
    data: BjorlingData | None
    G: AnalyticMap | None
    g: AnalyticMap | None
    q: AnalyticMap | None
    constants: dict
    expressions: dict
    horosphere: bool = False


def catenoid_cousin(b, eps=1):
    if not b > 0:
        raise ParameterConstraint("catenoid cousin needs b > 0")
    if eps not in (1, -1):
        raise ParameterConstraint("eps must be +1 or -1")
    c = math.sqrt(1 + b * b)
    data = BjorlingData(
        lambda x: (c + 0 * x, b * J.cos(x), b * J.sin(x), 0 * x),
        lambda x: (eps * b + 0 * x, eps * c * J.cos(x), eps * c * J.sin(x), 0 * x),
        (0.0, 2 * math.pi), 2 * math.pi, 0.0, "catenoid-cousin")
    k = 0.5 + b * (b + eps * c)
    m = math.sqrt(2 * k)
    q0 = -0.5 * b * (b + eps * c)
    return GalleryCase(
        "catenoid-cousin", data,
        AnalyticMap.from_function(lambda x: eps * J.exp(-1j * x)),
        AnalyticMap.from_function(lambda x: J.exp(1j * m * x)),
        AnalyticMap.constant(q0),
        {"b": b, "eps": eps, "c": c, "k": k, "sqrt_2k": m, "q": q0},
        {"G": f"{eps}*exp(-i*z)", "g": f"exp(i*{m!r}*z)", "q": repr(q0)})


def hyperbolic_invariant(a, b, c, d, lam, tol=1e-9):
    """Orbit of a hyperbolic translation with the surface normal along it.

    beta = (a cosh s, b, 0, a sinh s), V = (lam cosh s, c, d, lam sinh s) with
    a^2 - b^2 = 1, a > 0, -lam^2 + c^2 + d^2 = 1 and a lam = b c.  When
    k2 = -1/2 + a (a + lam) equals -1/2 the case is the umbilic horosphere
    and no Bjorling data are built.
    """
    k2 = -0.5 + a * (a + lam)
    if abs(k2 + 0.5) <= tol:
        return GalleryCase("hyperbolic-invariant", None, None, None, AnalyticMap.constant(0.0),
                           {"a": a, "b": b, "c": c, "d": d, "lam": lam, "k2": k2},
                           {"q": "0"}, horosphere=True)
    problems = []
    if not a > 0:
        problems.append("a > 0")
    if abs(a * a - b * b - 1) > tol:
        problems.append("a^2 - b^2 = 1")
    if abs(-lam * lam + c * c + d * d - 1) > tol:
        problems.append("-lam^2 + c^2 + d^2 = 1")
    if abs(a * lam - b * c) > tol:
        problems.append("a lam = b c")
    if problems:
        raise ParameterConstraint("violated: " + ", ".join(problems))
    k1 = (b + c - 1j * d) / (a + lam)
    q0 = -0.5 * a * (a + lam)
    m = cmath.sqrt(2 * k2)
    data = BjorlingData(
        lambda x: (a * J.cosh(x), b + 0 * x, 0 * x, a * J.sinh(x)),
        lambda x: (lam * J.cosh(x), c + 0 * x, d + 0 * x, lam * J.sinh(x)),
        (-1.0, 1.0), None, 0.0, "hyperbolic-invariant")
    return GalleryCase(
        "hyperbolic-invariant", data,
        AnalyticMap.from_function(lambda x: k1 * J.exp(-x)),
        AnalyticMap.from_function(lambda x: J.exp(1j * m * x)),
        AnalyticMap.constant(q0),
        {"a": a, "b": b, "c": c, "d": d, "lam": lam, "k1": k1, "k2": k2, "q": q0},
        {"G": f"{k1!r}*exp(-z)", "g": f"exp(i*{m!r}*z)", "q": repr(q0)})


def hyperbolic_invariant_dual_density(k1, k2, s):
    """|(2 k2 + 1) / (4 k1)|^2 (1 + |k1|^2 e^{-2s})^2 e^{2s}."""
    return (abs((2 * k2 + 1) / (4 * k1)) ** 2
            * (1 + abs(k1) ** 2 * math.exp(-2 * s)) ** 2 * math.exp(2 * s))


def hyperbolic_invariant_params(a, lam=0.0, d_sign=1.0):
    """(a, b, c, d, lam) satisfying the hyperbolic-invariant constraints.

    b = sqrt(a^2 - 1), c = a lam / b and d from -lam^2 + c^2 + d^2 = 1.
    """
    b = math.sqrt(a * a - 1)
    if b == 0:
        if lam != 0:
            raise ParameterConstraint("a = 1 forces lam = 0")
        return a, 0.0, 1.0, 0.0, 0.0
    c = a * lam / b
    d2 = 1 + lam * lam - c * c
    if d2 < 0:
        raise ParameterConstraint("no real d for this lam")
    return a, b, c, d_sign * math.sqrt(d2), lam


def helicoid(alpha, phi, c):
    """Helix of angular pitch alpha on the cylinder -x0^2 + x3^2 = -c^2, normal at angle phi.

    V = cos(phi) xi - sin(phi) cross3(beta, beta', xi) / |beta'| where xi is
    the cylinder normal; G = c1 exp(-(alpha + i) z) with
    c1 = (b + c cos phi + i c alpha sin phi / r) / (c + b cos phi + b sin phi / r),
    r = sqrt(c^2 alpha^2 + b^2) and b = sqrt(c^2 - 1).
    """
    if not c > 1:
        raise ParameterConstraint("helix needs c > 1 (b = sqrt(c^2 - 1) > 0)")
    b = math.sqrt(c * c - 1)
    r = math.sqrt(c * c * alpha * alpha + b * b)
    cp, sp = math.cos(phi), math.sin(phi)

    def beta(x):
        return (c * J.cosh(alpha * x), b * J.cos(x), b * J.sin(x), c * J.sinh(alpha * x))

    def V(x):
        B = beta(x)
        X = (b * J.cosh(alpha * x), c * J.cos(x), c * J.sin(x), b * J.sinh(alpha * x))
        Bp = (c * alpha * J.sinh(alpha * x), -b * J.sin(x), b * J.cos(x),
              c * alpha * J.cosh(alpha * x))
        W = cross3(B, Bp, X)
        return tuple(cp * X[i] - (sp / r) * W[i] for i in range(4))

    c1 = (b + c * cp + 1j * c * alpha * sp / r) / (c + b * cp + b * sp / r)
    m = -(alpha + 1j)
    data = BjorlingData(beta, V, (-1.0, 1.0), None, 0.0, "helicoid")
    return GalleryCase(
        "helicoid", data,
        AnalyticMap.from_function(lambda x: c1 * J.exp(m * x)), None, None,
        {"alpha": alpha, "phi": phi, "c": c, "b": b, "c1": c1},
        {"G": f"{c1!r}*exp({m!r}*z)"})


def gallery(name, **params):
    builders = {"catenoid-cousin": catenoid_cousin, "catenoid_cousin": catenoid_cousin,
                "hyperbolic-invariant": hyperbolic_invariant,
                "hyperbolic_invariant": hyperbolic_invariant,
                "helicoid": helicoid}
    if name not in builders:
        raise ValueError(f"unknown gallery surface {name!r}")
    return builders[name](**params)


# -- associate family, symmetry, periods -------------------------------------------------


def associate_family(surface, theta):
    """Member with Hopf coefficient e^{i theta} q and the same secondary Gauss map.

    G_theta solves {G} = {g} + 2 e^{i theta} q with the 2-jet of G at the
    base point kept; F is rebuilt by Small's formula.
    """
    z0 = complex(surface.data.s0 if surface.data is not None else surface.domain.s_min)
    q_t = cmath.exp(1j * theta) * surface.q
    Sg = surface.g.U if isinstance(surface.g, ProjectivePair) else schwarzian_map(surface.g)
    Gj = _map_jet(surface.G, z0, 2)
    G_t = ProjectivePair(Sg + 2.0 * q_t, z0, initial_state(Gj.c[0], Gj.c[1], 2 * Gj.c[2]))
    lift = SmallLift(surface.g, G_t)
    return BryantSurface(G_t, surface.g, q_t, lift, surface.domain,
                         normalization=surface.normalization,
                         orientation=_orientation_from_H(lift, z0), kind="associate",
                         info={"theta": theta})


def catenoid_match(q_const, schwarzian_g):
    """Catenoid cousin whose associate family contains the surface with
    constant q = a1 and {g, w} = a2.

    Returns b, eps, k, the scale l of w = l z (l^2 = k / a2) and the angle
    theta with q_c(w) e^{i theta} = a1.
    """
    a1, a2 = complex(q_const), complex(schwarzian_g)
    r = abs(a1 / a2)
    k = 1.0 / (2 * (1 + 2 * r))
    m = 0.5 - k
    return {"b": m / math.sqrt(2 * k), "eps": -1, "k": k, "ratio": r,
            "l": cmath.sqrt(k / a2), "theta": cmath.phase(a1 / a2)}


def symmetry_check(surface, phi, shift=None, rect=None, ns=9, nt=9):
    """max |psi(shift(z)) - Phi psi(z)| over the grid (0 for a genuine symmetry)."""
    L = lorentz_matrix(check_sl2c(phi))
    shift = (lambda z: z) if shift is None else shift
    rect = surface.domain if rect is None else (rect if isinstance(rect, Rect) else Rect(*rect))
    if surface.data is not None:
        d = surface.data
        for x in np.linspace(rect.s_min, rect.s_max, 5):
            y = shift(complex(x))
            if (np.max(np.abs(L @ d.beta(x).real - d.beta(y).real)) > 1e-8
                    or np.max(np.abs(L @ d.V(x).real - d.V(y).real)) > 1e-8):
                raise DegenerateData("Phi and the reparametrization are not a symmetry of the data")
    s, t = rect.axes(ns, nt)
    worst = 0.0
    for si in s:
        for tk in t:
            z = complex(si, tk)
            worst = max(worst, float(np.max(np.abs(surface.psi(shift(z)) - L @ surface.psi(z)))))
    return worst


@dataclass
class PeriodReport:
    status: str
    psi_deviation: float | None = None
    g_deviation: float | None = None

    @property
    def lift_single_valued(self):
        return self.g_deviation is not None and self.g_deviation <= 1e-8

    @property
    def verdict(self):
        if self.status != "periodic":
            return self.status
        return "lift single-valued" if self.lift_single_valued else "lift not single-valued"


def _chordal(u, v):
    if cmath.isinf(u) and cmath.isinf(v):
        return 0.0
    if cmath.isinf(u) or cmath.isinf(v):
        w = v if cmath.isinf(u) else u
        return 2.0 / math.sqrt(1 + abs(w) ** 2)
    return 2 * abs(u - v) / math.sqrt((1 + abs(u) ** 2) * (1 + abs(v) ** 2))


def period_check(surface, rect=None, ns=9, nt=5):
    """Deviation of psi(s + T, t) from psi(s, t) and chordal deviation of g(s + T) from g(s)."""
    T = surface.period
    if T is None:
        return PeriodReport("NotPeriodic")
    rect = surface.domain if rect is None else (rect if isinstance(rect, Rect) else Rect(*rect))
    s, t = rect.axes(ns, nt)
    dpsi, dg = 0.0, 0.0
    for si in s:
        dg = max(dg, _chordal(surface.g(complex(si)), surface.g(complex(si + T))))
        for tk in t:
            z = complex(si, tk)
            dpsi = max(dpsi, float(np.max(np.abs(surface.psi(z + T) - surface.psi(z)))))
    return PeriodReport("periodic", dpsi, dg)


@dataclass
class LiftVerdict:
    mode: str
    folds: int | None
    angle: float

    @property
    def verdict(self):
        if self.folds is None:
            return "does not lift at this precision"
        return f"lifts after {self.folds} fold{'s' if self.folds != 1 else ''}"


def lift_closure_test(data, q_max=64, tol=1e-6):
    """Whether a finite-folded cover of the cylinder generated by periodic data lifts.

    Admissible data use the holonomy of the S^2 curve with speed sqrt<nu', nu'>
    and curvature kappa; planar geodesics (kappa = 0) use the closed-form
    test that the integral of sqrt<nu', nu'> over a period lies in 2 pi Z.
    """
    T = data.period
    if T is None:
        raise NotAdmissible("data are not periodic")
    kappa, speed = admissibility_curvature(data)
    ks = [kappa(s) for s in np.linspace(0.0, T, 33)]
    if max(ks) - min(ks) <= 1e-9:
        if max(abs(k) for k in ks) > 1e-9:
            raise NotAdmissible("kappa is a nonzero constant")
        length = _real_integral(speed, 0.0, T)
        return LiftVerdict("planar-geodesic", closure_period(length, q_max, tol), length)
    hol = holonomy_S2(lambda s: speed(float(s)), lambda s: kappa(float(s)), T,
                      q_max=q_max, tol=tol)
    return LiftVerdict("holonomy", hol.closes_after, hol.angle)


def _real_integral(f, a, b, pieces=64):
    """Composite 20-point Gauss-Legendre integral of a real function."""
    nodes, weights = np.polynomial.legendre.leggauss(20)
    edges = np.linspace(a, b, pieces + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        total += half * sum(w * f(mid + half * x) for x, w in zip(nodes, weights))
    return total


def gauge_match(g, g_ref, points):
    """Fit the Mobius map T with g = T(g_ref) and measure how far it is from SU(2).

    Secondary Gauss maps of one surface differ by SU(2); returns
    (T, |T T^* - I|, max |g - T(g_ref)| over ``points``).
    """
    pts = list(points)
    w = [complex(g_ref(z)) for z in pts]
    u = [complex(g(z)) for z in pts]
    A = np.array([[wi, 1, -wi * ui, -ui] for wi, ui in zip(w, u)])
    a, b, c, d = np.linalg.svd(A)[2][-1].conj()
    T = np.array([[a, b], [c, d]])
    T = T / cmath.sqrt(np.linalg.det(T))
    unitarity = float(np.max(np.abs(T @ _ct(T) - _ID2)))
    err = max(abs(ui - (T[0, 0] * wi + T[0, 1]) / (T[1, 0] * wi + T[1, 1])) for wi, ui in zip(w, u))
    return T, unitarity, err
