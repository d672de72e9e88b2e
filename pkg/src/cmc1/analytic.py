"""Analytic maps, Schwarzian derivatives, the prescribed-Schwarzian ODE, quadrature and grids.

An :class:`AnalyticMap` is anything that can produce a Taylor jet at a
complex point.  Closed-form maps are built from Python functions written
with :mod:`cmc1.jets` operations; continued maps come from
:func:`solve_schwarzian`, which integrates y'' + (U/2) y = 0 with a
high-order Taylor method and returns the quotient of two solutions as a
:class:`ProjectivePair`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ExcludedPointOnPath, PoleSignal, StepFailure
from .jets import Jet, schwarzian_jet

DEFAULT_ORDER = 8
TAYLOR_ORDER = 28
TAYLOR_TOL = 1e-16
MAX_STEP = 1.0
EPS_MASK = 1e-3


def _is_vec(x):
    return isinstance(x, tuple)


def _struct(fn, x):
    if _is_vec(x):
        return tuple(fn(v) for v in x)
    return fn(x)


def _value(x):
    if _is_vec(x):
        return np.array([v.c[0] for v in x])
    return complex(x.c[0])


class AnalyticMap:
    """A holomorphic (scalar or 4-vector valued) map given by its jets.

    ``evaluator(z, order)`` returns a Jet, or a tuple of Jets for vector
    maps.  Results are cached per point; a request for a lower order is
    served by truncating a cached higher-order jet.
    """

    def __init__(self, evaluator, *, excluded=(), real=False, name="", cache_size=8192):
        self._evaluator = evaluator
        self.excluded = tuple(complex(e) for e in excluded)
        self.real = real
        self.name = name
        self._cache = {}
        self._cache_size = cache_size

    @classmethod
    def from_function(cls, fn, **kw):
        """Wrap fn, written with jet-polymorphic operations, as a map."""
        return cls(lambda z, n: fn(Jet.variable(z, n)), **kw)

    @classmethod
    def constant(cls, value, **kw):
        return cls(lambda z, n: Jet.constant(value, z, n), **kw)

    def jet(self, z, order=DEFAULT_ORDER):
        z = complex(z)
        hit = self._cache.get(z)
        if hit is not None and hit[0] >= order:
            if hit[0] == order:
                return hit[1]
            return _struct(lambda j: j.truncate(order), hit[1])
        out = self._evaluator(z, order)
        if len(self._cache) >= self._cache_size:
            self._cache.clear()
        self._cache[z] = (order, out)
        return out

    def __call__(self, z):
        return _value(self.jet(z, 0))

    def derivative(self, k=1):
        return AnalyticMap(
            lambda z, n: _struct(lambda j: j.derivative(k), self.jet(z, n + k)),
            excluded=self.excluded, real=self.real)

    def reflect(self):
        """The map z -> conj(f(conj z)); equals f when f is real on the real axis."""
        return AnalyticMap(
            lambda z, n: _struct(lambda j: j.reflect(), self.jet(complex(z).conjugate(), n)),
            excluded=tuple(e.conjugate() for e in self.excluded), real=self.real)

    def real_ext(self):
        """Holomorphic extension of s -> Re f(s)."""
        r = self.reflect()
        return AnalyticMap(lambda z, n: _lin(0.5, self.jet(z, n), 0.5, r.jet(z, n)),
                           excluded=self.excluded + r.excluded, real=True)

    def imag_ext(self):
        """Holomorphic extension of s -> Im f(s)."""
        r = self.reflect()
        return AnalyticMap(lambda z, n: _lin(-0.5j, self.jet(z, n), 0.5j, r.jet(z, n)),
                           excluded=self.excluded + r.excluded, real=True)

    def apply(self, fn, *, real=False):
        """Pointwise composition z -> fn(f(z)) for a jet-polymorphic fn."""
        return AnalyticMap(lambda z, n: fn(self.jet(z, n)), excluded=self.excluded, real=real)

    def _binary(self, other, op):
        if isinstance(other, AnalyticMap):
            return AnalyticMap(lambda z, n: op(self.jet(z, n), other.jet(z, n)),
                               excluded=self.excluded + other.excluded,
                               real=self.real and other.real)
        return AnalyticMap(lambda z, n: op(self.jet(z, n), other), excluded=self.excluded,
                           real=self.real and isinstance(other, (int, float)))

    def __add__(self, o):
        return self._binary(o, lambda a, b: a + b)

    def __radd__(self, o):
        return self._binary(o, lambda a, b: b + a)

    def __sub__(self, o):
        return self._binary(o, lambda a, b: a - b)

    def __rsub__(self, o):
        return self._binary(o, lambda a, b: b - a)

    def __mul__(self, o):
        return self._binary(o, lambda a, b: a * b)

    def __rmul__(self, o):
        return self._binary(o, lambda a, b: b * a)

    def __truediv__(self, o):
        return self._binary(o, lambda a, b: a / b)

    def __rtruediv__(self, o):
        return self._binary(o, lambda a, b: b / a)

    def __neg__(self):
        return self.apply(lambda j: -j, real=self.real)

    def __pow__(self, p):
        return self.apply(lambda j: j ** p, real=self.real)


def _lin(a, x, b, y):
    if _is_vec(x):
        return tuple(a * u + b * v for u, v in zip(x, y))
    return a * x + b * y


def as_map(f, **kw):
    """Coerce a number, jet-polymorphic callable or AnalyticMap to an AnalyticMap."""
    if isinstance(f, (AnalyticMap, ProjectivePair)):
        return f if isinstance(f, AnalyticMap) else f.as_map()
    if callable(f):
        return AnalyticMap.from_function(f, **kw)
    return AnalyticMap.constant(complex(f), real=complex(f).imag == 0, **kw)


def schwarzian(f, z):
    """{f, z} from an order-3 jet of f."""
    j = f.jet(z, 3) if not isinstance(f, Jet) else f
    d1 = j.deriv(1)
    if d1 == 0:
        raise PoleSignal("Schwarzian undefined where f' = 0")
    d2, d3 = j.deriv(2), j.deriv(3)
    return d3 / d1 - 1.5 * (d2 / d1) ** 2


def schwarzian_map(f):
    """The Schwarzian of f as an AnalyticMap (uses jets three orders higher)."""
    return AnalyticMap(lambda z, n: schwarzian_jet(f.jet(z, n + 3)), excluded=f.excluded)


# -- prescribed Schwarzian ODE ------------------------------------------


def _ode_coeffs(u, y, yp, order):
    """Taylor coefficients of two solutions of y'' = -(U/2) y.

    ``u`` are the coefficients of U at the expansion point, ``y`` and
    ``yp`` length-2 arrays of values and first derivatives.
    """
    c = np.zeros((order + 1, 2), dtype=complex)
    c[0] = y
    c[1] = yp
    for k in range(order - 1):
        c[k + 2] = -0.5 * (u[: k + 1][::-1] @ c[: k + 1]) / ((k + 1) * (k + 2))
    return c


class ProjectivePair:
    """Quotient g = y1/y2 of two solutions of y'' + (U/2) y = 0.

    The state at a point is the 2x2 array [[y1, y2], [y1', y2']].  Values
    of g are formed only on request; a vanishing y2 is a pole of g and not
    an error.
    """

    def __init__(self, U, z0, state0, *, taylor_order=TAYLOR_ORDER, tol=TAYLOR_TOL,
                 max_step=MAX_STEP):
        self.U = U
        self.z0 = complex(z0)
        self.state0 = np.array(state0, dtype=complex)
        self.taylor_order = taylor_order
        self.tol = tol
        self.max_step = max_step
        self._states = {self.z0: self.state0}

    # integration

    def _u_coeffs(self, z, order):
        j = self.U.jet(z, order)
        c = np.zeros(order + 1, dtype=complex)
        c[: len(j.c)] = j.c
        return c

    def march(self, za, state, zb):
        """Integrate the state from za to zb along the straight segment."""
        za, zb = complex(za), complex(zb)
        length = abs(zb - za)
        if length == 0:
            return np.array(state)
        direction = (zb - za) / length
        n = self.taylor_order
        z, st, done = za, np.array(state), 0.0
        ks = np.arange(n + 1)
        steps = 0
        while done < length:
            c = _ode_coeffs(self._u_coeffs(z, n - 2), st[0], st[1], n)
            scale = max(float(np.max(np.abs(c[0]))), float(np.max(np.abs(c[1]))), 1e-300)
            hmax = self.max_step
            for k in (n - 1, n):
                ck = float(np.max(np.abs(c[k])))
                if ck > 0:
                    hmax = min(hmax, (self.tol * scale / ck) ** (1.0 / k))
            h_len = min(hmax, length - done)
            if h_len < 1e-12 * max(1.0, length) and done + h_len < length:
                raise StepFailure(f"Taylor step collapsed near z = {z}")
            steps += 1
            if steps > 200000:
                raise StepFailure("too many Taylor steps")
            h = h_len * direction
            hp = h ** ks
            st = np.array([hp @ c, (ks[1:] * hp[:-1]) @ c[1:]])
            done += h_len
            z = za + done * direction if done < length else zb
        return st

    def state(self, z):
        """[[y1, y2], [y1', y2']] at z via the straight segment from the base point."""
        z = complex(z)
        st = self._states.get(z)
        if st is None:
            st = self.march(self.z0, self.state0, z)
            if len(self._states) > 100000:
                self._states = {self.z0: self.state0}
            self._states[z] = st
        return st

    def jets_from_state(self, z, st, order):
        """Jets of y1 and y2 at z given the state there."""
        c = _ode_coeffs(self._u_coeffs(z, max(order - 2, 0)), st[0], st[1], max(order, 1))
        return Jet(c[: order + 1, 0], z), Jet(c[: order + 1, 1], z)

    def pair_jets(self, z, order=DEFAULT_ORDER):
        return self.jets_from_state(z, self.state(z), order)

    def g_jet(self, z, order=DEFAULT_ORDER):
        y1, y2 = self.pair_jets(z, order)
        return y1 / y2

    def __call__(self, z):
        st = self.state(z)
        if st[0, 1] == 0:
            return complex("inf")
        return st[0, 0] / st[0, 1]

    def wronskian(self, z):
        st = self.state(z)
        return st[1, 0] * st[0, 1] - st[0, 0] * st[1, 1]

    @property
    def y1(self):
        return AnalyticMap(lambda z, n: self.pair_jets(z, n)[0])

    @property
    def y2(self):
        return AnalyticMap(lambda z, n: self.pair_jets(z, n)[1])

    def as_map(self):
        """g as an AnalyticMap (raises PoleSignal at poles of g)."""
        return AnalyticMap(self.g_jet)

    def grid_states(self, s_values, t_values):
        """States on the grid s + i t, marching along the real axis then in t."""
        s_values = np.asarray(s_values, dtype=float)
        t_values = np.asarray(t_values, dtype=float)
        out = np.empty((len(s_values), len(t_values), 2, 2), dtype=complex)
        p = complex(self.z0.real)
        axis = _march_points(self, [complex(s) for s in s_values], p.real, self.state(p),
                             anchor=p)
        for i, s in enumerate(s_values):
            base = axis[i]
            col = _march_points(self, [complex(s, t) for t in t_values], 0.0, base,
                                anchor=complex(s), vertical=True)
            out[i] = np.array(col)
        return out

    def grid(self, s_values, t_values):
        """Values of g on the grid (inf at exact poles)."""
        st = self.grid_states(s_values, t_values)
        with np.errstate(divide="ignore", invalid="ignore"):
            return st[..., 0, 0] / st[..., 0, 1]


def _march_points(pair, targets, start_coord, start_state, *, anchor, vertical=False):
    """March the ODE state through sorted points on a line, both directions from start."""
    coord = (lambda z: z.imag) if vertical else (lambda z: z.real)
    order = sorted(range(len(targets)), key=lambda k: coord(targets[k]))
    results = [None] * len(targets)
    up = [k for k in order if coord(targets[k]) >= start_coord]
    down = [k for k in reversed(order) if coord(targets[k]) < start_coord]
    for chain in (up, down):
        z, st = anchor, start_state
        for k in chain:
            st = pair.march(z, st, targets[k])
            z = targets[k]
            results[k] = st
            if z not in pair._states:
                pair._states[z] = st
    return results


def initial_state(g0, g1, g2):
    """ODE state reproducing the 2-jet (g, g', g'') with y2(z0) = 1."""
    if g1 == 0:
        raise ValueError("initial derivative g' must be nonzero")
    y2p = -g2 / (2 * g1)
    return np.array([[g0, 1.0], [g1 + g0 * y2p, y2p]], dtype=complex)


def solve_schwarzian(U, z0=0.0, init=None, **kw):
    """Solve {g, z} = U with g(z0), g'(z0), g''(z0) = init (default 0, 1, 0)."""
    U = as_map(U)
    g0, g1, g2 = (0.0, 1.0, 0.0) if init is None else init
    return ProjectivePair(U, z0, initial_state(complex(g0), complex(g1), complex(g2)), **kw)


# -- quadrature -----------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


def _gl(fvals_fn, a, b):
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    z = mid + half * _GL_NODES
    return half * np.dot(_GL_WEIGHTS, fvals_fn(z))


def path_integral(f, z_from, z_to, *, tol=1e-12, excluded_radius=1e-12):
    """Integral of f along the straight segment, adaptive Gauss-Legendre."""
    f = as_map(f)
    za, zb = complex(z_from), complex(z_to)
    if za == zb:
        return 0j
    seg = zb - za
    for e in f.excluded:
        tpar = ((e - za) * seg.conjugate()).real / abs(seg) ** 2
        tpar = min(1.0, max(0.0, tpar))
        if abs(za + tpar * seg - e) <= excluded_radius:
            raise ExcludedPointOnPath(f"segment {za} -> {zb} meets excluded point {e}")

    def vals(zs):
        return np.array([f(z) for z in zs], dtype=complex)

    def rec(a, b, whole, depth):
        m = 0.5 * (a + b)
        left, right = _gl(vals, a, m), _gl(vals, m, b)
        if abs(left + right - whole) <= tol or depth > 40:
            return left + right
        return rec(a, m, left, depth + 1) + rec(m, b, right, depth + 1)

    return complex(rec(za, zb, _gl(vals, za, zb), 0))


def integral_map(f, z0=0.0):
    """Primitive F(z) = int_{z0}^{z} f along straight segments, as an AnalyticMap."""
    f = as_map(f)
    z0 = complex(z0)

    def ev(z, n):
        val = path_integral(f, z0, z)
        if n == 0:
            return Jet.constant(val, z, 0)
        fj = f.jet(z, n - 1)
        c = np.empty(n + 1, dtype=complex)
        c[0] = val
        c[1:] = fj.c / np.arange(1, n + 1)
        return Jet(c, z)

    return AnalyticMap(ev, excluded=f.excluded)


# -- grids ------------------------------------------------------------------


@dataclass(frozen=True)
class Rect:
    s_min: float
    s_max: float
    t_min: float
    t_max: float

    def axes(self, ns, nt):
        return np.linspace(self.s_min, self.s_max, ns), np.linspace(self.t_min, self.t_max, nt)


@dataclass
class GridValues:
    s: np.ndarray
    t: np.ndarray
    values: np.ndarray
    mask: np.ndarray

    @property
    def masked_count(self):
        return int(self.mask.sum())


def chordal_to_infinity(w1, w2):
    """Chordal distance of [w1 : w2] to the point at infinity."""
    return np.abs(w2) / np.sqrt(np.abs(w1) ** 2 + np.abs(w2) ** 2)


def continuation_grid(f, rect, ns, nt, *, eps_mask=EPS_MASK):
    """Values of f on an ns x nt grid over rect, with the masking policy applied.

    A grid point is masked when it lies within eps_mask of a declared
    excluded point, when evaluation signals a pole or yields a non-finite
    value, or when the value lies within chordal distance eps_mask of
    infinity.
    """
    if not isinstance(rect, Rect):
        rect = Rect(*rect)
    s, t = rect.axes(ns, nt)
    values = np.full((ns, nt), np.nan + 0j)
    mask = np.zeros((ns, nt), dtype=bool)
    if isinstance(f, ProjectivePair):
        st = f.grid_states(s, t)
        w1, w2 = st[..., 0, 0], st[..., 0, 1]
        near_inf = chordal_to_infinity(w1, w2) < eps_mask
        with np.errstate(divide="ignore", invalid="ignore"):
            values = np.where(near_inf, np.nan, w1 / np.where(w2 == 0, 1, w2))
        mask = near_inf | ~np.isfinite(values)
        return GridValues(s, t, values, mask)
    f = as_map(f)
    for i, si in enumerate(s):
        for k, tk in enumerate(t):
            z = complex(si, tk)
            if any(abs(z - e) < eps_mask for e in f.excluded):
                mask[i, k] = True
                continue
            try:
                v = complex(f(z))
            except (PoleSignal, ZeroDivisionError, OverflowError, ValueError):
                mask[i, k] = True
                continue
            if not cmath.isfinite(v) or abs(v) > 1.0 / eps_mask:
                mask[i, k] = True
                continue
            values[i, k] = v
    return GridValues(s, t, values, mask)


def fd_laplacian(field, z, h=1e-3):
    """Five-point Laplacian of a real field of a complex variable."""
    return (field(z + h) + field(z - h) + field(z + 1j * h) + field(z - 1j * h)
            - 4 * field(z)) / (h * h)


def fd_dt(field, s, h=1e-4):
    """Central difference in t at the point s + 0i."""
    return (field(complex(s, h)) - field(complex(s, -h))) / (2 * h)
