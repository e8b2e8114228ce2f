import json
import subprocess
import sys

import numpy as np
import pytest

from fermifuse.cli import main
from fermifuse.fermion_model import OrthogonalElement, build_model


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def write(tmp_path, name, g):
    path = tmp_path / name
    path.write_text(json.dumps(OrthogonalElement(g).to_json()))
    return str(path)


def rot(a):
    return np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])


def test_suite_car_passes(capsys):
    code, out, _ = run(capsys, "suite", "car", "--n", "2", "--trials", "5")
    assert code == 0
    report = json.loads(out)
    assert report["suite_name"] == "car"
    assert report["model_params"] == {"n": 2, "seed": 0, "tol": 1e-8}
    assert len(report["trials"]) == 5
    assert report["summary"]["failed"] == 0
    assert "wall_time_ms" not in report["summary"]


def test_output_has_no_trailing_whitespace(capsys):
    _, out, _ = run(capsys, "suite", "irreducible", "--n", "2")
    assert all(line == line.rstrip() for line in out.splitlines())
    assert out.endswith("}\n")


def test_timing_flag_adds_wall_time(capsys):
    _, out, _ = run(capsys, "suite", "car", "--n", "2", "--trials", "1", "--timing")
    assert json.loads(out)["summary"]["wall_time_ms"] >= 0


def test_failing_tolerance_exits_one(capsys):
    code, out, _ = run(capsys, "suite", "modular", "--n", "2", "--tol", "1e-30")
    assert code == 1
    assert json.loads(out)["summary"]["failed"] == 1


def test_unknown_suite_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["suite", "nonsense"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_fuse_identity(tmp_path, capsys):
    ident = write(tmp_path, "id.json", np.eye(4))
    code, out, _ = run(capsys, "fuse", ident, ident, "--n", "2")
    assert code == 0
    data = json.loads(out)
    u = np.array(data["u_fused"]["re"]) + 1j * np.array(data["u_fused"]["im"])
    assert np.allclose(u, np.eye(4), atol=1e-10)
    assert np.allclose(np.array(data["g_fused"]["re"]), np.eye(4).ravel())


def test_fuse_known_pair(tmp_path, capsys):
    m = build_model(2)
    left = write(tmp_path, "l.json", m.block_diag(rot(0.3), rot(1.2)))
    right = write(tmp_path, "r.json", m.block_diag(rot(-1.2), rot(2.0)))
    code, out, _ = run(capsys, "fuse", left, right, "--n", "2")
    assert code == 0
    assert all(v <= 1e-8 for v in json.loads(out)["residuals"].values())


def test_fuse_not_fusable(tmp_path, capsys):
    m = build_model(2)
    left = write(tmp_path, "l.json", m.block_diag(rot(0.3), rot(1.2)))
    code, out, err = run(capsys, "fuse", left, left, "--n", "2")
    assert code == 3
    assert out == ""
    assert "g'_- = tau g_+ tau" in err


def test_fuse_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, _ = run(capsys, "fuse", str(bad), str(bad), "--n", "2")
    assert code == 2


def test_fuse_dimension_mismatch(tmp_path, capsys):
    ident = write(tmp_path, "id.json", np.eye(8))
    code, _, _ = run(capsys, "fuse", ident, ident, "--n", "2")
    assert code == 2


def test_subprocess_output_is_byte_identical():
    cmd = [sys.executable, "-m", "fermifuse", "suite", "implementer", "--n", "2", "--trials", "3"]
    first = subprocess.run(cmd, capture_output=True, check=True).stdout
    second = subprocess.run(cmd, capture_output=True, check=True).stdout
    assert first == second
    assert json.loads(first)["summary"]["failed"] == 0


@pytest.mark.parametrize("argv", [["--n", "3"], ["--n", "8"], ["--trials", "0"]])
def test_bad_suite_arguments_exit_two(capsys, argv):
    code, out, err = run(capsys, "suite", "car", *argv)
    assert code == 2
    assert out == ""
    assert err.startswith("fermifuse:")
