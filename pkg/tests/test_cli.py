import json
import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmc1 import cli, errors
from cmc1 import mesh as M
from cmc1.cli import EXIT_INPUT, EXIT_OK, EXIT_TOLERANCE, dump_config, main, parse_config


def run_cli(*args):
    return subprocess.run([sys.executable, "-m", "cmc1.cli", *args], capture_output=True,
                          timeout=300)


def test_catenoid_gallery_example_writes_a_mesh_and_a_report():
    proc = run_cli("gallery", "catenoid-cousin", "--b", "0.75", "--eps", "1", "--export", "obj")
    assert proc.returncode == EXIT_OK, proc.stderr.decode()
    obj = proc.stdout.decode()
    assert obj.startswith("v ") and "\nf " in obj
    rep = json.loads(proc.stderr)
    assert rep["constants"]["k"] == 2.0
    assert rep["pass"] and rep["seam_stitched"]
    assert rep["vertex_count"] == obj.count("\nv ") + 1


def test_liouville_example_writes_sech_squared(tmp_path, capsys):
    out = tmp_path / "phi.csv"
    code = main(["liouville", "geometric", "--a", "1", "--d", "0", "--c", "1", "--out", str(out),
                 "--ns", "11", "--nt", "9"])
    rep = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK and rep["pde_residual"] <= 1e-6
    cols = M.read_csv(out)
    assert np.max(np.abs(cols["phi"] - 1 / np.cosh(cols["t"]) ** 2)) < 1e-9
    assert len(cols["s"]) == 99


def test_holonomy_example(capsys):
    code = main(["holonomy", "--kappa", "1.7320508075688772", "--T", "6.283185307179586"])
    out = capsys.readouterr().out
    assert code == EXIT_OK and out.splitlines()[0] == "closed after 1 period"


def test_tolerance_failure_exits_2(capsys):
    code = main(["liouville", "analytic", "--a", "4", "--tol", "1e-12", "--ns", "3", "--nt", "3"])
    rep = json.loads(capsys.readouterr().out)
    assert code == EXIT_TOLERANCE and not rep["pass"]


@pytest.mark.parametrize("argv", [
    ["liouville", "analytic", "--a", "exp("],
    ["liouville", "analytic", "--a", "foo"],
    ["liouville", "analytic", "--a", "-1"],
    ["liouville", "degenerate", "--a", "1", "--c", "1"],
    ["liouville", "analytic"],
    ["bogus"],
    ["gallery", "helicoid", "--c", "0.5"],
    ["bjorling", "--beta", "1;0;0", "--V", "0;0;1;0"],
    ["holonomy", "--kappa", "s", "--T", "1"],
])
def test_input_errors_exit_1_with_the_error_name(argv, capsys):
    assert main(argv) == EXIT_INPUT
    err = capsys.readouterr().err
    name = err.split(":")[1].strip()
    assert err.startswith("error: ") and (hasattr(errors, name) or name == "InputError")


def test_parameter_error_names_the_module_error(capsys):
    main(["gallery", "helicoid", "--c", "0.5"])
    assert "ParameterConstraint" in capsys.readouterr().err


def test_thread_variable_is_validated(monkeypatch, capsys):
    monkeypatch.setenv("CMC1_NUM_THREADS", "0")
    assert main(["holonomy", "--kappa", "1", "--T", "1"]) == EXIT_INPUT
    monkeypatch.setenv("CMC1_NUM_THREADS", "4")
    assert main(["holonomy", "--kappa", "1", "--T", "1"]) == EXIT_OK


def test_config_job_and_command_line_override(tmp_path, capsys):
    cfg = tmp_path / "job.cfg"
    cfg.write_text('# strip solution\njob = "liouville-analytic"\na = "1"\nd = "0"\n'
                   'ns = "5"\nnt = "5"\ninterval = "-1 1"\n')
    assert main(["--config", str(cfg)]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["job"] == "liouville-analytic"
    assert main(["--config", str(cfg), "--tol", "1e-15"]) == EXIT_TOLERANCE


def test_config_with_gallery_surface(tmp_path, capsys):
    cfg = tmp_path / "g.cfg"
    cfg.write_text('job = "gallery"\nsurface = "hyperbolic-invariant"\n'
                   'params = "1 0 1 0 -1"\nns = "5"\nnt = "5"\n')
    assert main(["--config", str(cfg)]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["horosphere"] is True


def test_bad_config_lines():
    with pytest.raises(cli.InputError):
        parse_config("just words\n")
    with pytest.raises(cli.InputError):
        parse_config('a = "unterminated\n')
    with pytest.raises(cli.InputError):
        cli._config_argv({"job": "nope"})


keys = st.from_regex(r"[a-z][a-z_]{0,8}", fullmatch=True)
values = st.text(st.characters(blacklist_categories=("Cs",)), max_size=20)


@given(st.dictionaries(keys, values, max_size=6))
def test_config_round_trip(cfg):
    assert parse_config(dump_config(cfg)) == cfg
    assert dump_config(parse_config(dump_config(cfg))) == dump_config(cfg)


def test_verify_is_deterministic(tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert main(["verify", "--out", str(p)]) == EXIT_OK
    a, b = (p.read_bytes() for p in paths)
    assert a == b
    summary = json.loads(a)
    assert summary["pass"] and len(summary["checks"]) >= 10


def test_surface_exports_to_files(tmp_path, capsys):
    stem = tmp_path / "cat"
    code = main(["gallery", "catenoid-cousin", "--ns", "9", "--nt", "5", "--export", "obj",
                 "--export", "ply", "--export", "csv", "--export", "json", "--out", str(stem)])
    assert code == EXIT_OK
    for ext in ("obj", "ply", "csv", "json"):
        assert (tmp_path / f"cat.{ext}").exists()
    rep = json.loads(capsys.readouterr().out)
    assert rep == json.loads((tmp_path / "cat.json").read_text())


def test_several_formats_to_stdout_are_refused(capsys):
    argv = ["gallery", "catenoid-cousin", "--ns", "5", "--nt", "5", "--export", "obj",
            "--export", "ply"]
    assert main(argv) == EXIT_INPUT


def test_pregeodesic_and_planar_geodesic_commands(capsys):
    helix = "1.3*cosh(0.5*s); 0.83066238629180749*cos(s); 0.83066238629180749*sin(s); 1.3*sinh(0.5*s)"
    assert main(["pregeodesic", "--beta", helix, "--interval", "-1", "1", "--ns", "5",
                 "--nt", "5"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["geodesic_curvature_defect"] < 1e-9
    circle = "1.25; 0.75*cos(s); 0.75*sin(s); 0"
    assert main(["planar-geodesic", "--beta", circle, "--plane-normal", "0", "0", "0", "1",
                 "--period", str(2 * math.pi), "--ns", "9", "--nt", "5"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["boundary_error"] < 1e-9
