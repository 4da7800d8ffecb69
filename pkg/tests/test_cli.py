import io
import json
import subprocess
import sys

import numpy as np
import pytest

from camtrack.cli import main
from camtrack.datasets import table1_csv_path
from camtrack.formats import load_camera, load_camera_file, save_camera
from camtrack.geometry import CameraParameters, Extrinsics, Intrinsics
from camtrack.synth import default_truth, look_at


def csv_num(v) -> str:
    return ",".join(repr(float(x)) for x in v)


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out=out, err=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def table1_csv(tmp_path):
    with table1_csv_path() as path:
        target = tmp_path / "table1.csv"
        target.write_bytes(path.read_bytes())
    return target


@pytest.fixture
def truth_json(tmp_path):
    path = tmp_path / "truth.json"
    save_camera(path, default_truth())
    return path


def test_calibrate_table1_with_report(tmp_path, table1_csv):
    out_json = tmp_path / "cam.json"
    code, out, err = run("calibrate", "--points", table1_csv, "--out", out_json, "--report")
    assert code == 0, err
    params, report = load_camera_file(out_json)
    assert report["final_error"] <= report["initial_error"]
    assert params.intrinsics.alpha < 0 and params.intrinsics.beta < 0
    lines = dict(line.split(" ", 1) for line in out.strip().splitlines())
    assert float(lines["final_error"]) == report["final_error"]

    # eval on the same points reproduces the stored error
    code, out, _ = run("eval", "--camera", out_json, "--points", table1_csv)
    assert code == 0
    E = float(out.splitlines()[0].split()[1])
    assert E == pytest.approx(report["final_error"], rel=1e-12)
    assert len(out.splitlines()) == 2 + 30
    assert out.splitlines()[2].split()[:2] == ["0", "XY"]


def test_calibrate_without_report_and_no_refine(tmp_path, table1_csv):
    out_json = tmp_path / "cam.json"
    code, out, _ = run("calibrate", "--points", table1_csv, "--out", out_json, "--no-refine")
    assert code == 0 and out == ""
    params, report = load_camera_file(out_json)
    assert report is None


def test_calibrate_is_deterministic(tmp_path, table1_csv):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run("calibrate", "--points", table1_csv, "--out", a, "--report")
    run("calibrate", "--points", table1_csv, "--out", b, "--report")
    assert a.read_bytes() == b.read_bytes()


def test_synth_then_eval_is_exact(tmp_path, truth_json):
    csv = tmp_path / "s.csv"
    assert run("synth", "--seed", 1, "--sigma", 0, "--out", csv, "--truth", truth_json)[0] == 0
    code, out, _ = run("eval", "--camera", truth_json, "--points", csv)
    assert code == 0
    assert float(out.splitlines()[1].split()[1]) <= 1e-9


def test_synth_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run("synth", "--seed", 4, "--sigma", 0.5, "--out", a)
    run("synth", "--seed", 4, "--sigma", 0.5, "--out", b)
    assert a.read_bytes() == b.read_bytes()
    run("synth", "--seed", 5, "--sigma", 0.5, "--out", b)
    assert a.read_bytes() != b.read_bytes()


def test_synth_calibrate_recovers_truth(tmp_path, truth_json):
    csv, cam = tmp_path / "s.csv", tmp_path / "c.json"
    run("synth", "--out", csv, "--per-plane", 7, "--spacing", 20)
    assert run("calibrate", "--points", csv, "--out", cam)[0] == 0
    got = load_camera(cam).intrinsics.as_array()
    want = default_truth().intrinsics.as_array()
    assert np.max(np.abs(got - want) / np.maximum(np.abs(want), 1)) < 1e-5


def test_project(truth_json):
    code, out, _ = run("project", "--camera", truth_json, "--world", "0,0,0")
    assert code == 0
    nx, ny = map(float, out.split())
    assert (nx, ny) == pytest.approx((640.0, 360.0), abs=1e-9)


def test_track_plane_xy_and_plane(truth_json):
    n = default_truth().project([25.0, 75.0, 0.0])
    pixel = csv_num(n)
    code, out, _ = run("track", "plane-xy", "--camera", truth_json, "--pixel", pixel)
    assert code == 0
    np.testing.assert_allclose([float(v) for v in out.split()], [25.0, 75.0, 0.0], atol=1e-9)
    code, out2, _ = run("track", "plane", "--camera", truth_json, "--pixel", pixel, "--plane", "0,0,1,0")
    np.testing.assert_allclose([float(v) for v in out2.split()], [25.0, 75.0, 0.0], atol=1e-9)


def test_track_surface(truth_json):
    w = np.array([100.0, 100.0, 100.0]) + 60.0 / np.sqrt(3)
    n = default_truth().project(w)
    code, out, err = run(
        "track", "surface", "--camera", truth_json, "--pixel", csv_num(n),
        "--sphere", "100,100,100,60", "--guess", "130,130,130",
    )
    assert code == 0, err
    np.testing.assert_allclose([float(v) for v in out.split()], w, atol=1e-8)


def test_track_stereo(tmp_path, truth_json):
    position = np.array([650.0, 150.0, 300.0])
    cam2 = CameraParameters.from_pose(Intrinsics(-950.0, -950.0, 0.0, 640.0, 360.0), Extrinsics.from_world_position(look_at(position), position))
    cam2_json = tmp_path / "cam2.json"
    save_camera(cam2_json, cam2)
    w = np.array([50.0, 60.0, 70.0])
    n1, n2 = default_truth().project(w), cam2.project(w)
    code, out, err = run(
        "track", "stereo", "--camera", truth_json, "--pixel", csv_num(n1),
        "--camera2", cam2_json, "--pixel2", csv_num(n2),
    )
    assert code == 0, err
    vals = [float(v) for v in out.split()]
    np.testing.assert_allclose(vals[:3], w, atol=1e-8)
    assert vals[3] < 1e-9


def test_track_stereo_identical_cameras_exit_3(truth_json):
    code, out, err = run(
        "track", "stereo", "--camera", truth_json, "--pixel", "640,360",
        "--camera2", truth_json, "--pixel2", "640,360",
    )
    assert code == 3
    assert "RankDeficient" in err and err.count("\n") == 1


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["project", "--camera", "missing.json", "--world", "0,0,0"],
        ["track", "plane", "--camera", "X", "--pixel", "1,2"],
        ["track", "surface", "--camera", "X", "--pixel", "1,2", "--sphere", "0,0,0,1"],
        ["track", "stereo", "--camera", "X", "--pixel", "1,2"],
    ],
)
def test_usage_errors_exit_2(argv, truth_json):
    argv = [str(truth_json) if a == "X" else a for a in argv]
    code, out, err = run(*argv)
    assert code == 2
    assert err.startswith("camtrack: error:") and err.count("\n") == 1


def test_bad_number_lists_exit_2(truth_json):
    assert run("project", "--camera", truth_json, "--world", "1,2")[0] == 2
    assert run("project", "--camera", truth_json, "--world", "1,x,2")[0] == 2
    assert run("project", "--camera", truth_json, "--world", "1,inf,2")[0] == 2


def test_invalid_csv_exit_2(tmp_path):
    csv = tmp_path / "bad.csv"
    csv.write_text("# camtrack-csv-v1\nplane,nx,ny,rx,ry,rz\nXY,1,2,3,4,5\n", encoding="utf-8")
    code, _, err = run("calibrate", "--points", csv, "--out", tmp_path / "c.json")
    assert code == 2 and "ValidationError" in err


def test_single_plane_csv_exit_2(tmp_path):
    csv = tmp_path / "xy.csv"
    with table1_csv_path() as path:
        lines = path.read_text(encoding="utf-8").splitlines()
    csv.write_text("\n".join(lines[:12]) + "\n", encoding="utf-8")
    code, _, err = run("calibrate", "--points", csv, "--out", tmp_path / "c.json")
    assert code == 2 and "InsufficientPoints" in err


def test_point_behind_camera_projection_exit_3(tmp_path):
    cam = CameraParameters(Intrinsics(-1.0, -1.0, 0.0, 0.0, 0.0), np.zeros(3), np.zeros(3))
    path = tmp_path / "c.json"
    save_camera(path, cam)
    assert run("project", "--camera", path, "--world", "1,1,0")[0] == 3


def test_schema_error_exit_2(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"alpha": -1.0}), encoding="utf-8")
    code, _, err = run("project", "--camera", path, "--world", "0,0,1")
    assert code == 2 and "SchemaError" in err


def test_module_entry_point(truth_json):
    proc = subprocess.run(
        [sys.executable, "-m", "camtrack", "project", "--camera", str(truth_json), "--world", "0,0,0"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0
    assert len(proc.stdout.split()) == 2
