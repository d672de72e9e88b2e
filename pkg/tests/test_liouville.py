import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmc1 import jets as J
from cmc1 import liouville as L
from cmc1.analytic import fd_laplacian
from cmc1.errors import DegenerateData

GRID = [complex(s, t) for s in (-0.8, -0.2, 0.5, 0.9) for t in (-0.4, 0.1, 0.45)]


def both_routes(data):
    return L.solve_cauchy_analytic(data), L.solve_cauchy_geometric(data)


def test_scaled_sech_solution_for_positive_curvature():
    data = L.LiouvilleCauchyData.from_d(0.25, 0.0, 4.0)
    for sol in both_routes(data):
        assert max(abs(sol.phi(z) - 0.25 / math.cosh(z.imag) ** 2) for z in GRID) < 1e-10


def test_inverse_sine_square_for_negative_curvature():
    # phi = 1 / sin^2(t + 1) solves the c = -1 equation
    t0 = 1.0
    a = 1 / math.sin(t0) ** 2
    d = -2 * math.cos(t0) / math.sin(t0) ** 3
    data = L.LiouvilleCauchyData.from_d(a, d, -1.0)
    for sol in both_routes(data):
        err = max(abs(sol.phi(z) - 1 / math.sin(z.imag + t0) ** 2) for z in GRID)
        assert err < 1e-9 * a


@given(st.floats(0.5, 2.0), st.floats(-1.0, 1.0), st.sampled_from([1.0, -1.0, 2.0]))
@settings(max_examples=8, deadline=None)
def test_analytic_and_geometric_routes_agree(a, d, c):
    data = L.LiouvilleCauchyData.from_d(lambda x: a + 0.2 * J.sin(x), d, c)
    an, ge = both_routes(data)
    pts = [complex(s, t) for s in (-0.7, 0.3) for t in (-0.2, 0.25)]
    assert max(abs(an.phi(z) - ge.phi(z)) / an.phi(z) for z in pts) < 1e-8
    assert ge.diagnostics["frenet_chart_deviation"] < 1e-8


def test_solution_satisfies_the_equation_and_the_data():
    a = lambda x: 1.5 + 0.3 * J.cos(2 * x)
    d = lambda x: 0.4 * J.sin(x)
    data = L.LiouvilleCauchyData.from_d(a, d, 1.0)
    sol = L.solve_cauchy_analytic(data)
    r1 = L.pde_residual(sol, GRID, h=1e-3)
    r2 = L.pde_residual(sol, GRID, h=2e-3)
    # the stencil error is O(h^2), so extrapolation removes it
    assert abs(4 * r1 - r2) / 3 < 1e-7
    ea, ed = L.boundary_errors(sol, data.a, d, np.linspace(-1, 1, 11))
    assert ea < 1e-12 and ed < 1e-7


def test_dlogphi_is_the_holomorphic_log_derivative():
    sol = L.solve_cauchy_analytic(L.LiouvilleCauchyData.from_d(lambda x: 1 + 0.5 * J.sin(x), 0.3, 1.0))
    z, h = 0.2 + 0.3j, 1e-5
    ls = (math.log(sol.phi(z + h)) - math.log(sol.phi(z - h))) / (2 * h)
    lt = (math.log(sol.phi(z + 1j * h)) - math.log(sol.phi(z - 1j * h))) / (2 * h)
    assert abs(sol.dlogphi(z) - 0.5 * (ls - 1j * lt)) < 1e-8


def test_grid_matches_pointwise_evaluation():
    sol = L.solve_cauchy_analytic(L.LiouvilleCauchyData.from_d(lambda x: 2 + J.sin(x), -2.0, 1.0))
    s, t = np.linspace(-1, 1, 5), np.linspace(-0.5, 0.5, 4)
    grid = sol.grid(s, t)
    for i, si in enumerate(s):
        for k, tk in enumerate(t):
            assert abs(grid[i, k] - sol.phi(complex(si, tk))) < 1e-12 * grid[i, k]


def test_geodesic_shortcut_matches_the_general_solver():
    a = lambda x: 1 + 0.25 * x * x
    geo = L.solve_cauchy_geodesic(a)
    ref = L.solve_cauchy_analytic(L.LiouvilleCauchyData.from_d(a, 0.0, 1.0))
    assert max(abs(geo.phi(z) - ref.phi(z)) for z in GRID) < 1e-10


def test_lightcone_route_matches_closed_form():
    sol = L.solve_cauchy_lightcone(1.0, 0.0)
    assert max(abs(sol.phi(z) - 1 / math.cosh(z.imag) ** 2) for z in GRID) < 1e-9


def test_invalid_data_is_rejected():
    with pytest.raises(DegenerateData):
        L.LiouvilleCauchyData.from_d(lambda x: x, 0.0, 1.0).validate()
    bad = L.LiouvilleCauchyData(1.0, 0.3, 1.0)      # 2 Re b must equal a'
    with pytest.raises(DegenerateData):
        bad.validate()
    with pytest.raises(DegenerateData):
        L.solve_cauchy_geometric(L.LiouvilleCauchyData.from_d(1.0, 0.0, 0.0))


def test_degenerate_solutions_are_log_harmonic():
    sol = L.solve_degenerate(lambda x: 1 + 0.5 * J.cos(x), lambda x: 0.3 * x)
    for z in GRID:
        assert abs(fd_laplacian(lambda w: math.log(sol.phi(w)), z)) < 1e-6
    assert abs(sol.phi(0.4) - (1 + 0.5 * math.cos(0.4))) < 1e-14


def test_modified_problem_potential():
    f = lambda x: J.exp(0.5j * x) + 2
    sol = L.solve_modified(1.0, 0.2j, f)   # Re w = v'/2 keeps the data compatible
    for z in GRID[:6]:
        lap = fd_laplacian(lambda w: math.log(sol.rho(w)), z)
        fz = abs(f(z))
        assert abs(lap + sol.rho(z) ** 2 * fz ** 2) < 1e-5
        r, rz, mixed = sol.derivatives(z)
        assert abs(4 * mixed / r - 4 * abs(rz / r) ** 2 - lap) < 1e-5


def test_plane_and_sphere_curves():
    circle = L.frenet_integrate_R2(1.0, (0.0, math.pi))
    assert np.allclose(circle.alpha(math.pi), [0, 2], atol=1e-9)
    great = L.sphere_frenet_via_schwarzian(0.0, (0.0, 1.0))
    pts = [great.alpha(s) for s in (0.0, 0.5, 1.0)]
    assert all(abs(np.linalg.norm(p) - 1) < 1e-10 for p in pts)
    assert math.isclose(math.acos(np.dot(pts[0], pts[2])), 1.0, abs_tol=1e-9)


def test_rotation_angle_and_closure_period():
    rz = lambda th: np.array([[math.cos(th), -math.sin(th), 0], [math.sin(th), math.cos(th), 0],
                              [0, 0, 1]])
    assert math.isclose(L.rotation_angle(rz(0.3), [0, 0, 1]), 0.3)
    assert math.isclose(L.rotation_angle(rz(0.3), [0, 0, -1]), 2 * math.pi - 0.3)
    assert L.closure_period(2 * math.pi * 3 / 7) == 7
    assert L.closure_period(0.0) == 1
    assert L.closure_period(2 * math.pi * (math.sqrt(5) - 1) / 2, q_max=64) is None


def test_holonomy_requires_periodic_input():
    with pytest.raises(ValueError):
        L.holonomy_S2(1.0, lambda s: s, 2 * math.pi)
    hol = L.holonomy_S2(1.0, lambda s: 1.0 + 0.0 * s, 2 * math.pi)
    assert math.isclose(hol.angle, (2 * math.pi * math.sqrt(2)) % (2 * math.pi), abs_tol=1e-9)
    assert hol.closes_after is None
