import json
import subprocess
import sys

import pytest

from neumann_peaks.cli import main


def run(tmp_path, *args):
    return main(list(args) + ["--out", str(tmp_path)])


def test_ground_state_talenti(tmp_path, capsys):
    assert run(tmp_path, "ground-state", "--N", "6", "--p", "2") == 0
    doc = json.loads((tmp_path / "ground_state.json").read_text())
    assert abs(doc["beta"] - 1.0) <= 1e-6
    assert doc["config"]["params"] == {"N": 6, "p": 2.0}
    assert doc["config"]["seed"] == 0 and "version" in doc["config"]
    assert (tmp_path / "profile.csv").exists()
    assert "beta*" in capsys.readouterr().out


@pytest.mark.parametrize("args", [("--N", "5", "--p", "2.0"), ("--N", "4", "--p", "2")])
def test_ground_state_rejects(tmp_path, args):
    assert run(tmp_path, "ground-state", *args) == 2


def test_constants(tmp_path):
    assert run(tmp_path, "constants", "--N", "6", "--p", "2") == 0
    doc = json.loads((tmp_path / "constants.json").read_text())
    assert doc["A0"] == pytest.approx(115.2 * 3.141592653589793 ** 3, rel=1e-6)
    assert max(doc["symmetry_gaps"].values()) <= 1e-9
    for q in ("Q0", "Q1", "Q2", "Q4"):
        assert doc[q] > 0


def test_reduce(tmp_path):
    assert run(tmp_path, "reduce", "--N", "5", "--gamma", "-1", "--k-sweep", "1", "2", "4") == 0
    doc = json.loads((tmp_path / "reduce.json").read_text())
    assert doc["lambda_numeric"] == pytest.approx(doc["lambda_star"], abs=1e-10)
    F = [row["F_at_lambda_star"] for row in doc["k_sweep"]]
    assert F[1] == pytest.approx(2 * F[0], rel=1e-14)
    assert F[2] == pytest.approx(4 * F[0], rel=1e-14)
    assert (tmp_path / "energy_curve.csv").exists()


def test_reduce_positive_curvature(tmp_path):
    assert run(tmp_path, "reduce", "--N", "5", "--gamma", "0.5") == 2


def test_lattice(tmp_path):
    assert run(tmp_path, "lattice", "--N", "5", "--k-sweep", "64", "128", "256") == 0
    doc = json.loads((tmp_path / "lattice.json").read_text())
    assert doc["regime"]["observed_regime"] == "power"


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"N": 5, "p": 2.2, "seed": 7}))
    assert main(["ground-state", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "ground_state.json").read_text())
    assert doc["config"]["params"]["p"] == 2.2 and doc["config"]["seed"] == 7
    assert main(["ground-state", "--config", str(cfg), "--p", "2.3",
                 "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "ground_state.json").read_text())
    assert doc["config"]["params"]["p"] == 2.3


def test_bad_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"N": 5, "bogus": 1}))
    assert main(["constants", "--config", str(cfg)]) == 2
    assert main(["constants", "--config", str(tmp_path / "missing.json")]) == 2


def test_export_round_trip(tmp_path):
    from neumann_peaks.ground_state import RadialProfile, solve_ground_state
    from neumann_peaks.params import SystemParams

    assert run(tmp_path, "export", "--N", "5", "--p", "2.2") == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert "profile.csv" in manifest["files"]
    back = RadialProfile.load(tmp_path / "profile.csv")
    fresh = solve_ground_state(SystemParams.create(5, 2.2))
    assert abs(back.beta - fresh.beta) <= 1e-12
    assert abs(back.tail_b - fresh.tail_b) <= 1e-12 * fresh.tail_b


def test_reruns_bit_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["constants", "--N", "5", "--out", str(a)]) == 0
    assert main(["constants", "--N", "5", "--out", str(b)]) == 0
    assert (a / "constants.json").read_bytes() == (b / "constants.json").read_bytes()


def test_verify_quick_and_fault(tmp_path):
    assert main(["verify", "--quick", "--out", str(tmp_path / "ok")]) == 0
    good = json.loads((tmp_path / "ok" / "verify.json").read_text())
    assert good["passed"]
    assert main(["verify", "--quick", "--inject-fault", "corrupt-tail-b",
                 "--out", str(tmp_path / "bad")]) == 4
    bad = json.loads((tmp_path / "bad" / "verify.json").read_text())
    assert bad["failed"] == ["tail_bounds_N5_p2.2"]
    assert {c["name"] for c in good["checks"]} == {c["name"] for c in bad["checks"]}


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "neumann_peaks", "ground-state", "--N", "4",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 2
    assert "N >= 5" in proc.stderr
