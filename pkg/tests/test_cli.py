from __future__ import annotations

import json
import subprocess
import sys

import pytest

from jackustat.cli import main, read_regression_csv, UsageError

SMOKE = {
    "experiments": ["ratio", "coverage", "dominance"],
    "n_grid": [30],
    "d_values": [1, 2],
    "reps": 5,
    "truth_reps": 10,
    "zeta_reps": 400,
    "grid_zeta_reps": 400,
    "s2_grid": [4],
    "seed": 3,
}


@pytest.fixture
def smoke_config(tmp_path):
    path = tmp_path / "smoke.json"
    path.write_text(json.dumps(SMOKE))
    return path


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_verify_suites_pass(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and "checks passed" in out
    assert main(["verify", "tdnn"]) == 0


def test_unknown_suite_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "nope"])
    assert exc.value.code == 2


def test_run_requires_readable_valid_config(tmp_path, capsys):
    assert main(["run", "--out", str(tmp_path)]) == 2
    assert main(["run", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == 2
    bad = write(tmp_path, "bad.json", '{"reps": 5,\n "seed": }')
    assert main(["run", "--config", bad, "--out", str(tmp_path)]) == 2
    assert "bad.json:2:" in capsys.readouterr().err
    unknown = write(tmp_path, "unknown.json", '{"repz": 5}')
    assert main(["run", "--config", unknown, "--out", str(tmp_path)]) == 2
    assert "repz" in capsys.readouterr().err


def test_run_is_deterministic_and_writes_manifest(tmp_path, smoke_config):
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    assert main(["run", "--config", str(smoke_config), "--out", str(a)]) == 0
    assert main(["run", "--config", str(smoke_config), "--out", str(b), "--threads", "3"]) == 0
    assert main(["run", "--config", str(smoke_config), "--out", str(c), "--seed", "4"]) == 0
    for name in ("ratio", "coverage", "dominance"):
        assert (a / f"{name}.csv").read_bytes() == (b / f"{name}.csv").read_bytes()
    assert (a / "ratio.csv").read_bytes() != (c / "ratio.csv").read_bytes()
    manifest = json.loads((a / "manifest.json").read_text())
    assert manifest["seed"] == 3 and manifest["config"]["reps"] == 5
    assert set(manifest["outputs"]) == {"ratio", "coverage", "dominance"}
    assert json.loads((c / "manifest.json").read_text())["seed"] == 4


def test_run_overrides(tmp_path, smoke_config):
    assert main(["run", "--config", str(smoke_config), "--out", str(tmp_path),
                 "experiments=[\"ratio\"]", "dgp.noise=homoskedastic", "dgp.sigma=0.5"]) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["config"]["dgp"]["sigma"] == 0.5
    assert list(manifest["outputs"]) == ["ratio"]
    assert main(["run", "--config", str(smoke_config), "--out", str(tmp_path), "noequals"]) == 2
    with pytest.raises(SystemExit):
        main(["run", "--config", str(smoke_config), "--out", str(tmp_path), "--threads", "0"])


def test_estimate_toy(tmp_path, capsys):
    path = write(tmp_path, "toy.csv", "x,y\n1,10\n2,20\n3,30\n")
    assert main(["estimate", path, "--x", "0", "--s1", "1", "--s2", "2"]) == 0
    result = json.loads(capsys.readouterr().out)
    # -1/3 * mean(Y) + 4/3 * (2/3 * 10 + 1/3 * 20)
    assert result["estimate"] == pytest.approx(100 / 9, abs=1e-12)
    assert result["ci_lo"] < result["estimate"] < result["ci_hi"]


def test_estimate_constant_response(tmp_path, capsys):
    rows = "".join(f"{i / 10},{j / 7},4.5\n" for i in range(6) for j in range(3))
    path = write(tmp_path, "const.csv", "a,b,y\n" + rows)
    assert main(["estimate", path, "--x", "0.2,0.3", "--s1", "2", "--s2", "5", "--d", "2"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["estimate"] == 4.5 and result["variance"] == 0.0
    assert result["ci_lo"] == result["ci_hi"] == 4.5


@pytest.mark.parametrize(
    "text,message",
    [
        ("1,10\n2,20\n", "missing header"),
        ("x,y\n1,10\n2\n", ":3: expected 2 columns"),
        ("x,y\n1,ten\n", "not a number"),
        ("x,y\n", "no data rows"),
        ("", "empty"),
    ],
)
def test_estimate_rejects_bad_csv(tmp_path, text, message):
    path = write(tmp_path, "bad.csv", text)
    with pytest.raises(UsageError, match=message):
        read_regression_csv(path)


def test_estimate_argument_errors(tmp_path, capsys):
    path = write(tmp_path, "toy.csv", "x,y\n1,10\n2,20\n3,30\n")
    assert main(["estimate", path, "--x", "0,0", "--s1", "1", "--s2", "2"]) == 2
    assert main(["estimate", path, "--x", "0", "--s1", "2", "--s2", "2"]) == 2
    assert main(["estimate", path, "--x", "0", "--s1", "1", "--s2", "2", "--level", "1.2"]) == 2
    assert main(["estimate", path, "--x", "zero", "--s1", "1", "--s2", "2"]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "jackustat", "verify", "combinatorics"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip().endswith("checks passed")
