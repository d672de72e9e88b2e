import json
import math
import os
import struct

import numpy as np
import pytest

from cmc1 import bryant as B
from cmc1 import jets as J
from cmc1 import mesh as M
from cmc1.analytic import AnalyticMap, Rect
from cmc1.errors import EmptyGrid, ExportError

from conftest import TWO_PI


@pytest.fixture(scope="module")
def catenoid_grid(catenoid):
    _, surface = catenoid
    return M.sample(surface, Rect(0, TWO_PI, -1, 1), 17, 9)


def branched_surface():
    """Small's lift with G = z^2 + z^3/10, which has a critical point at 0."""
    G = AnalyticMap.from_function(lambda x: x * x + 0.1 * x * x * x)
    g = AnalyticMap.from_function(J.exp)
    lift = B.SmallLift(g, G)
    return B.BryantSurface(G, g, AnalyticMap.constant(0.5), lift, Rect(-0.5, 0.5, -0.5, 0.5),
                           orientation=B._orientation_from_H(lift, 0.3 + 0.2j), kind="small")


def test_full_period_grid_is_stitched(catenoid_grid):
    g = catenoid_grid
    assert g.seam_stitched and g.masked_count == 0
    assert np.array_equal(g.vertex_ids[-1], g.vertex_ids[0])
    assert len(g.vertex_points()) == 16 * 9
    assert len(g.faces) == 2 * 16 * 8
    # the seam column really is the first column again
    assert np.allclose(g.minkowski[-1], g.minkowski[0], atol=1e-12)


def test_partial_period_is_not_stitched(catenoid):
    _, surface = catenoid
    g = M.sample(surface, Rect(0, 3.0, -0.5, 0.5), 5, 5)
    assert not g.seam_stitched and len(g.vertex_points()) == 25


def test_ball_points_and_normals(catenoid_grid):
    g = catenoid_grid
    assert np.all(np.linalg.norm(g.ball, axis=-1) < 1)
    assert np.allclose(np.linalg.norm(g.normals, axis=-1), 1)
    assert M.report(g)["max_H_deviation"] < 1e-9


def test_masked_critical_point_drops_its_faces():
    g = M.sample(branched_surface(), None, 11, 11)
    assert g.masked_count == 1 and g.mask[5, 5]
    assert g.vertex_ids[5, 5] == -1
    assert len(g.faces) == 2 * 10 * 10 - 6
    assert not np.any(g.faces == -1)


def test_everything_masked_raises():
    with pytest.raises(EmptyGrid):
        M.sample(branched_surface(), None, 3, 3, eps_mask=10.0)


def test_horosphere_mesh():
    g = M.sample(B.horosphere(), None, 7, 7)
    rep = M.report(g)
    assert rep["max_H_deviation"] < 1e-14 and rep["mask_count"] == 0
    assert rep["vertex_count"] == 49 and rep["face_count"] == 72


def test_obj_structure(catenoid_grid):
    text = M.obj_bytes(catenoid_grid).decode()
    lines = text.splitlines()
    assert "\r" not in text and text.endswith("\n")
    nv = sum(ln.startswith("v ") for ln in lines)
    assert nv == sum(ln.startswith("vn ") for ln in lines) == len(catenoid_grid.vertex_points())
    faces = [ln for ln in lines if ln.startswith("f ")]
    assert len(faces) == len(catenoid_grid.faces)
    idx = [int(tok.split("//")[0]) for ln in faces for tok in ln.split()[1:]]
    assert min(idx) == 1 and max(idx) == nv


def test_ply_structure(catenoid_grid):
    data = M.ply_bytes(catenoid_grid)
    header, body = data.split(b"end_header\n", 1)
    nv = len(catenoid_grid.vertex_points())
    nf = len(catenoid_grid.faces)
    assert f"element vertex {nv}".encode() in header
    assert len(body) == nv * 48 + nf * 13
    first = struct.unpack("<6d", body[:48])
    i, k = catenoid_grid.vertex_points()[0]
    assert np.allclose(first[:3], catenoid_grid.ball[i, k], rtol=0, atol=0)


def test_csv_roundtrip_is_exact(tmp_path, catenoid_grid):
    path = M.export(catenoid_grid, "csv", tmp_path / "grid.csv")
    cols = M.read_csv(path)
    assert tuple(cols) == M.CSV_COLUMNS
    ok = ~catenoid_grid.mask
    assert np.array_equal(cols["x0"], catenoid_grid.minkowski[..., 0][ok])
    assert np.array_equal(cols["H"], catenoid_grid.H[ok])


def test_exports_are_deterministic(tmp_path, catenoid):
    _, surface = catenoid
    outs = []
    for run in range(2):
        g = M.sample(surface, Rect(0, TWO_PI, -1, 1), 9, 5)
        outs.append([M.obj_bytes(g), M.ply_bytes(g), M.csv_bytes(g), M.report_bytes(g)])
    assert outs[0] == outs[1]


def test_report_contents(tmp_path, catenoid_grid):
    path = M.export(catenoid_grid, "json-report", tmp_path / "r.json", {"job": "test"})
    rep = json.loads(open(path).read())
    assert rep["job"] == "test" and rep["seam_stitched"] is True
    assert rep["grid"] == [17, 9]
    assert set(rep["curvature_integrals"]) == {"total_curvature", "dual_total_curvature"}


def test_export_failures_and_permissions(tmp_path, catenoid_grid):
    with pytest.raises(ExportError):
        M.export(catenoid_grid, "obj", tmp_path / "missing" / "x.obj")
    with pytest.raises(ValueError):
        M.export(catenoid_grid, "stl", tmp_path / "x.stl")
    old = os.umask(0o022)
    try:
        path = M.export(catenoid_grid, "obj", tmp_path / "x.obj")
    finally:
        os.umask(old)
    assert os.stat(path).st_mode & 0o777 == 0o644
    assert [p.name for p in tmp_path.iterdir()] == ["x.obj"]


def test_table_writer_uses_round_trip_precision(tmp_path):
    path = M.write_table(tmp_path / "t.csv", ["s", "v"], [[0.1, math.pi]])
    cols = M.read_csv(path)
    assert cols["v"][0] == math.pi
