"""Verified surface grids and their export to OBJ, PLY, CSV and a JSON report."""

from __future__ import annotations

import csv
import io
import json
import os
import struct
import tempfile
from dataclasses import dataclass

import numpy as np

from .analytic import Rect
from .bryant import metrics, sample_surface
from .errors import EmptyGrid, ExportError
from .lorentz import lorentz_inner

H_TOL = 1e-6
NORM_TOL = 1e-9
SEAM_TOL = 1e-9


@dataclass
class MeshGrid:
    s: np.ndarray
    t: np.ndarray
    minkowski: np.ndarray      # (ns, nt, 4)
    ball: np.ndarray           # (ns, nt, 3)
    normals: np.ndarray        # (ns, nt, 3), unit Euclidean normals in the ball
    H: np.ndarray
    H_deviation: np.ndarray
    norm_deviation: np.ndarray
    mask: np.ndarray
    faces: np.ndarray          # (m, 3) indices into vertex_ids order
    vertex_ids: np.ndarray     # (ns, nt) index of each grid point in the vertex list, -1 if absent
    seam_stitched: bool
    diagnostic_failures: int
    integrals: dict

    @property
    def masked_count(self):
        return int(self.mask.sum())

    def vertex_points(self):
        """(i, k) grid positions of the exported vertices, in vertex order."""
        flat = self.vertex_ids.ravel()
        ids, first = np.unique(flat, return_index=True)
        first = first[ids >= 0]
        return np.column_stack(np.unravel_index(first, self.vertex_ids.shape))


def ball_normal(x, eta):
    """Euclidean unit normal in the Poincare ball at the image of x for tangent normal eta."""
    d = 1.0 + x[0]
    v = eta[1:] / d - x[1:] * eta[0] / d ** 2
    return v / np.linalg.norm(v)


def sample(surface, rect=None, ns=64, nt=64, *, eps_mask=None):
    """Sample ``surface`` on ``rect`` into a MeshGrid.

    Grid points whose |H - 1| or |<psi,psi> + 1| exceed the diagnostic
    thresholds are counted and removed from the mesh along with masked points.
    """
    rect = surface.domain if rect is None else (rect if isinstance(rect, Rect) else Rect(*rect))
    kw = {} if eps_mask is None else {"eps_mask": eps_mask}
    smp = sample_surface(surface, rect, ns, nt, **kw)
    mask = smp.mask.copy()
    psi, eta = smp.psi, smp.eta
    with np.errstate(invalid="ignore"):
        Hdev = np.abs(smp.H - 1)
        ndev = np.abs(lorentz_inner(psi, psi) + 1)
    failed = ~mask & ~((Hdev <= H_TOL) & (ndev <= NORM_TOL))
    n_failed = int(failed.sum())
    mask |= failed
    if mask.all():
        raise EmptyGrid("every grid point is masked")
    ball = np.full((ns, nt, 3), np.nan)
    normals = np.full((ns, nt, 3), np.nan)
    for i, k in zip(*np.nonzero(~mask)):
        ball[i, k] = psi[i, k, 1:] / (1.0 + psi[i, k, 0])
        normals[i, k] = ball_normal(psi[i, k], eta[i, k])

    stitched = (surface.period is not None
                and abs(rect.s_max - rect.s_min - surface.period) <= SEAM_TOL)
    # in a stitched grid the last column is the first one again
    ids = -np.ones((ns, nt), dtype=int)
    own = ns - 1 if stitched else ns
    keep = ~mask[:own]
    ids[:own][keep] = np.arange(int(keep.sum()))
    if stitched:
        ids[ns - 1] = ids[0]
    flip = surface.orientation < 0
    faces = []
    for i in range(ns - 1):
        for k in range(nt - 1):
            a, b, c, d = ids[i, k], ids[i + 1, k], ids[i + 1, k + 1], ids[i, k + 1]
            for tri in ((a, b, c), (a, c, d)):
                if min(tri) >= 0:
                    faces.append(tri[::-1] if flip else tri)
    m = metrics(surface, smp)
    integrals = {"total_curvature": m["total_curvature"],
                 "dual_total_curvature": m["dual_total_curvature"]}
    return MeshGrid(smp.s, smp.t, psi, ball, normals, smp.H, Hdev, ndev, mask,
                    np.array(faces, dtype=int).reshape(-1, 3), ids, stitched, n_failed, integrals)


# -- exports ---------------------------------------------------------------------


def _g(x):
    return "%.17g" % x


def _umask():
    current = os.umask(0)
    os.umask(current)
    return current


def _atomic_write(path, data):
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=folder)
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.chmod(tmp, 0o666 & ~_umask())
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as err:
        raise ExportError(f"cannot write {path}: {err}") from err
    return path


def obj_bytes(grid):
    lines = []
    pts = grid.vertex_points()
    for i, k in pts:
        lines.append("v " + " ".join(_g(x) for x in grid.ball[i, k]))
    for i, k in pts:
        lines.append("vn " + " ".join(_g(x) for x in grid.normals[i, k]))
    for a, b, c in grid.faces + 1:
        lines.append(f"f {a}//{a} {b}//{b} {c}//{c}")
    return ("\n".join(lines) + "\n").encode("ascii")


def ply_bytes(grid):
    pts = grid.vertex_points()
    header = ("ply\nformat binary_little_endian 1.0\n"
              f"element vertex {len(pts)}\n"
              + "".join(f"property double {n}\n" for n in ("x", "y", "z", "nx", "ny", "nz"))
              + f"element face {len(grid.faces)}\n"
              "property list uchar int vertex_indices\nend_header\n").encode("ascii")
    body = io.BytesIO()
    for i, k in pts:
        body.write(struct.pack("<6d", *grid.ball[i, k], *grid.normals[i, k]))
    for tri in grid.faces:
        body.write(struct.pack("<B3i", 3, *(int(v) for v in tri)))
    return header + body.getvalue()


CSV_COLUMNS = ("s", "t", "x0", "x1", "x2", "x3", "H")


def csv_bytes(grid):
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for i, s in enumerate(grid.s):
        for k, t in enumerate(grid.t):
            if grid.mask[i, k]:
                continue
            w.writerow([_g(s), _g(t), *(_g(x) for x in grid.minkowski[i, k]), _g(grid.H[i, k])])
    return out.getvalue().encode("ascii")


def report(grid, extra=None):
    ok = ~grid.mask
    out = {
        "max_H_deviation": float(np.max(grid.H_deviation[ok])),
        "max_norm_deviation": float(np.max(grid.norm_deviation[ok])),
        "mask_count": grid.masked_count,
        "diagnostic_failures": grid.diagnostic_failures,
        "vertex_count": int(len(grid.vertex_points())),
        "face_count": int(len(grid.faces)),
        "seam_stitched": bool(grid.seam_stitched),
        "grid": [int(len(grid.s)), int(len(grid.t))],
        "curvature_integrals": {k: float(v) for k, v in grid.integrals.items()},
    }
    if extra:
        out.update(extra)
    return out


def report_bytes(grid, extra=None):
    return (json.dumps(report(grid, extra), indent=2, sort_keys=True) + "\n").encode("ascii")


_WRITERS = {"obj": obj_bytes, "ply": ply_bytes, "csv": csv_bytes}


def export(grid, fmt, path, extra=None):
    """Write ``grid`` as obj, ply, csv or json-report to ``path`` atomically."""
    if fmt in ("json", "json-report"):
        return _atomic_write(path, report_bytes(grid, extra))
    if fmt not in _WRITERS:
        raise ValueError(f"unknown export format {fmt!r}")
    return _atomic_write(path, _WRITERS[fmt](grid))


def read_csv(path):
    """Columns of an exported CSV file as float arrays."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as err:
        raise ExportError(f"cannot read {path}: {err}") from err
    header, body = rows[0], rows[1:]
    return {name: np.array([float(r[j]) for r in body]) for j, name in enumerate(header)}


def write_table(path, header, rows):
    """Atomically write a CSV table of numbers with 17 significant digits."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_g(x) if isinstance(x, float) else x for x in r])
    return _atomic_write(path, out.getvalue().encode("ascii"))


def write_json(path, obj):
    return _atomic_write(path, (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode("ascii"))

