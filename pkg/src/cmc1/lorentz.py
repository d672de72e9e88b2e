"""Minkowski space L^4, its Hermitian matrix model and the SL(2,C) action.

Vectors are numpy arrays whose last axis has length 4, or any length-4
sequence whose entries support ``+`` and ``*`` (for instance tuples of
:class:`~cmc1.jets.Jet`).  The inner product is the bilinear form
-u0 v0 + u1 v1 + u2 v2 + u3 v3; it is never conjugated, so identities
between real curves survive holomorphic extension.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

TOL = 1e-9


def _c(u, i):
    if isinstance(u, np.ndarray):
        return u[..., i]
    return u[i]


def _pack(parts, like):
    if isinstance(like, np.ndarray):
        return np.stack(parts, axis=-1)
    return tuple(parts)


def lorentz_inner(u, v):
    """Bilinear Lorentz product of two 4-vectors."""
    return (-_c(u, 0) * _c(v, 0) + _c(u, 1) * _c(v, 1)
            + _c(u, 2) * _c(v, 2) + _c(u, 3) * _c(v, 3))


def _det3(a, b, c):
    return (a[0] * (b[1] * c[2] - b[2] * c[1])
            - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0]))


def cross3(u1, u2, u3):
    """The vector X with <X, w> = det(u1, u2, u3, w) for every w."""
    rows = [[_c(u, i) for i in range(4)] for u in (u1, u2, u3)]
    cof = []
    for i in range(4):
        cols = [j for j in range(4) if j != i]
        minor = _det3(*[[r[j] for j in cols] for r in rows])
        cof.append(minor if (3 + i) % 2 == 0 else -minor)
    # index raising flips the time component
    return _pack([-cof[0], cof[1], cof[2], cof[3]], u1)


def det4(u1, u2, u3, u4):
    return lorentz_inner(cross3(u1, u2, u3), u4)


def wedge_at(q, u1, u2):
    """Exterior product u1 ^ u2 in the tangent space at the base point q."""
    return cross3(q, u1, u2)


def vec_to_herm(x):
    """Hermitian matrix [[x0+x3, x1+i x2], [x1-i x2, x0-x3]] (complex entries allowed)."""
    x0, x1, x2, x3 = (_c(x, i) for i in range(4))
    m = np.empty(np.shape(x0) + (2, 2), dtype=complex)
    m[..., 0, 0] = x0 + x3
    m[..., 0, 1] = x1 + 1j * x2
    m[..., 1, 0] = x1 - 1j * x2
    m[..., 1, 1] = x0 - x3
    return m


def herm_to_vec(m):
    """Inverse of :func:`vec_to_herm` for Hermitian input; returns a real vector."""
    m = np.asarray(m)
    x0 = 0.5 * (m[..., 0, 0] + m[..., 1, 1]).real
    x3 = 0.5 * (m[..., 0, 0] - m[..., 1, 1]).real
    x1 = m[..., 0, 1].real
    x2 = m[..., 0, 1].imag
    return np.stack([x0, x1, x2, x3], axis=-1)


def mat_to_cvec(m):
    """Inverse of :func:`vec_to_herm` for arbitrary complex 2x2 input."""
    m = np.asarray(m, dtype=complex)
    x0 = 0.5 * (m[..., 0, 0] + m[..., 1, 1])
    x3 = 0.5 * (m[..., 0, 0] - m[..., 1, 1])
    x1 = 0.5 * (m[..., 0, 1] + m[..., 1, 0])
    x2 = (m[..., 0, 1] - m[..., 1, 0]) / 2j
    return np.stack([x0, x1, x2, x3], axis=-1)


def check_sl2c(phi, tol=TOL):
    phi = np.asarray(phi, dtype=complex)
    if phi.shape != (2, 2):
        raise ValueError("SL(2,C) element must be a 2x2 matrix")
    det = phi[0, 0] * phi[1, 1] - phi[0, 1] * phi[1, 0]
    if abs(det - 1) > tol:
        raise ValueError(f"matrix is not unimodular: det = {det}")
    return phi


def sl2c_act(phi, m):
    """Isometric action m -> phi m phi^* on Hermitian matrices."""
    phi = check_sl2c(phi)
    return phi @ np.asarray(m, dtype=complex) @ phi.conj().T


def lorentz_matrix(phi):
    """Real 4x4 matrix of the isometry induced by phi on L^4."""
    phi = check_sl2c(phi)
    basis = np.eye(4)
    cols = [herm_to_vec(phi @ vec_to_herm(e) @ phi.conj().T) for e in basis]
    return np.stack(cols, axis=1)


def apply_linear(mat, v):
    """mat @ v for numeric vectors or sequences of jets."""
    if isinstance(v, np.ndarray):
        return v @ np.asarray(mat).T
    return tuple(sum(mat[i][j] * v[j] for j in range(4)) for i in range(4))


def rotation_x1x2(delta):
    """SU(2) element rotating the (x1, x2)-plane by ``delta``."""
    return np.array([[cmath.exp(0.5j * delta), 0], [0, cmath.exp(-0.5j * delta)]])


def boost_x3(r):
    """SL(2,C) element translating along the (x0, x3) geodesic by distance ``r``."""
    return np.array([[math.exp(0.5 * r), 0], [0, math.exp(-0.5 * r)]], dtype=complex)


def in_H3(x, tol=TOL):
    x = np.asarray(x, dtype=float)
    return abs(lorentz_inner(x, x) + 1) <= tol * max(1.0, x[0] ** 2) and x[0] > 0


def in_N3(x, tol=TOL):
    x = np.asarray(x, dtype=float)
    return abs(lorentz_inner(x, x)) <= tol * max(1.0, x[0] ** 2) and x[0] > 0


def in_S31(x, tol=TOL):
    x = np.asarray(x, dtype=float)
    return abs(lorentz_inner(x, x) - 1) <= tol * max(1.0, float(np.max(np.abs(x))) ** 2)


def _qc_pole_coefficient(c):
    if c == 0:
        raise ValueError("Q(c) is only defined for c != 0")
    return math.copysign(math.sqrt(abs(c)), c)


def on_Qc(p, c, tol=TOL):
    """Membership in the space form of curvature c (sphere or hyperboloid sheet)."""
    _qc_pole_coefficient(c)
    p = np.asarray(p, dtype=float)
    if c > 0:
        n = p @ p
    else:
        n = -p[0] ** 2 + p[1] ** 2 + p[2] ** 2
        if p[0] <= 0:
            return False
    return abs(n - 1.0 / c) <= tol * max(1.0, abs(1.0 / c), float(p @ p))


def stereographic_Qc(p, c):
    """Conformal chart of Q(c) onto the plane (c > 0) or a disc (c < 0).

    Uses (x1 + i x2) / (1 - sign(c) sqrt|c| x0), which pulls the flat
    metric back to 4|dg|^2 / (1 + c|g|^2)^2 on the space form of squared
    radius 1/|c|.  Returns ``complex('inf')`` at the projection pole.
    """
    if not on_Qc(p, c):
        raise ValueError("point does not lie on Q(c)")
    k = _qc_pole_coefficient(c)
    den = 1.0 - k * p[0]
    num = complex(p[1], p[2])
    if abs(den) <= 1e-15 * max(1.0, abs(num)):
        return complex("inf")
    return num / den


def stereographic_Qc_inverse(w, c):
    """Inverse of :func:`stereographic_Qc`."""
    r = math.sqrt(abs(c))
    if cmath.isinf(w):
        if c < 0:
            raise ValueError("infinity is not in the image of the hyperbolic chart")
        return np.array([1.0 / r, 0.0, 0.0])
    u = r * complex(w)
    n = abs(u) ** 2
    if c > 0:
        y = np.array([(n - 1) / (n + 1), 2 * u.real / (1 + n), 2 * u.imag / (1 + n)])
    else:
        if n >= 1:
            raise ValueError("point lies outside the disc model")
        y = np.array([(1 + n) / (1 - n), 2 * u.real / (1 - n), 2 * u.imag / (1 - n)])
    return y / r


def poincare_ball(x):
    """Poincare-ball coordinates (x1, x2, x3) / (1 + x0) of points of H^3."""
    x = np.asarray(x, dtype=float)
    q = lorentz_inner(x, x)
    scale = np.maximum(1.0, x[..., 0] ** 2)
    if np.any(np.abs(q + 1) > 1e-8 * scale) or np.any(x[..., 0] <= 0):
        raise ValueError("input is not on the hyperboloid model of H^3")
    return x[..., 1:] / (1.0 + x[..., 0])[..., None]


def ideal_boundary(w):
    """Point w2/w1 of the sphere at infinity represented by the null vector w w^*."""
    w1, w2 = complex(w[0]), complex(w[1])
    if w1 == 0 and w2 == 0:
        raise ValueError("zero spinor has no ideal point")
    if w1 == 0:
        return complex("inf")
    return w2 / w1
