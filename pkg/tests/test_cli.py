import json
from pathlib import Path

import numpy as np
import pytest

from nematic_profile.cli import main

SCHEMA_PATH = (
    Path(__file__).resolve().parents[1]
    / "src"
    / "nematic_profile"
    / "schemas"
    / "report.schema.json"
)


def _validate(doc):
    jsonschema = pytest.importorskip("jsonschema")
    schema = json.loads(SCHEMA_PATH.read_text())
    jsonschema.validate(doc, schema)


def _read_json(path):
    doc = json.loads(Path(path).read_text())
    _validate(doc)
    return doc


def test_solve_critical_run(tmp_path):
    code = main(
        [
            "solve",
            "--a2", "1", "--b2", "1.7320508075688772", "--c2", "1",
            "--k", "1", "--R", "20", "--n", "800",
            "--out", str(tmp_path),
        ]
    )
    assert code == 0
    data = np.loadtxt(tmp_path / "profile.csv", delimiter=",", skiprows=1)
    v = data[:, 2]
    assert np.max(np.abs(v + 0.7071068)) <= 1e-6
    doc = _read_json(tmp_path / "energy.json")
    assert doc["regime"] == "CRITICAL"
    assert doc["report_type"] == "energy"


def test_usage_errors(tmp_path):
    # too-coarse grid
    assert main(["solve", "--R", "20", "--n", "8", "--out", str(tmp_path)]) == 64
    # no domain given
    assert main(["solve", "--out", str(tmp_path)]) == 64
    # both domains given
    assert main(["solve", "--R", "5", "--rmax", "100", "--out", str(tmp_path)]) == 64
    # tol out of range
    assert main(["solve", "--R", "5", "--tol", "0.5", "--out", str(tmp_path)]) == 64
    # unknown flag
    assert main(["solve", "--R", "5", "--frobnicate", "--out", str(tmp_path)]) == 64
    # energy method on the entire plane
    assert main(["solve", "--rmax", "100", "--method", "energy", "--out", str(tmp_path)]) == 64


def test_b_zero_refused_without_flag(tmp_path):
    code = main(["solve", "--b2", "0", "--rmax", "100", "--n", "600",
                 "--bc", "dirichlet", "--out", str(tmp_path)])
    assert code == 4
    # finite-domain b2 = 0 is also gated by the flag
    assert main(["solve", "--b2", "0", "--R", "5", "--out", str(tmp_path)]) == 4


def test_b_zero_drift_diagnostic(tmp_path):
    code = main(
        ["solve", "--b2", "0", "--allow-b-zero", "--rmax", "100", "--n", "600",
         "--bc", "dirichlet", "--out", str(tmp_path)]
    )
    assert code == 0
    doc = _read_json(tmp_path / "drift.json")
    assert [r["R"] for r in doc["rungs"]] == [25.0, 50.0, 100.0]
    assert not (tmp_path / "profile.csv").exists()


def test_b_zero_finite_with_flag(tmp_path):
    code = main(["solve", "--b2", "0", "--allow-b-zero", "--R", "5",
                 "--n", "400", "--out", str(tmp_path)])
    assert code == 0
    data = np.loadtxt(tmp_path / "profile.csv", delimiter=",", skiprows=1)
    assert np.all(data[1:-1, 1] > 0.0)
    assert np.all(data[:-1, 2] < 0.0)


def test_verify_command(tmp_path):
    code = main(["verify", "--a2", "1", "--b2", "1", "--c2", "1", "--k", "1",
                 "--R", "20", "--n", "600", "--out", str(tmp_path)])
    assert code == 0
    doc = _read_json(tmp_path / "bounds.json")
    assert doc["all_satisfied"] is True
    names = set(doc["bounds"])
    assert {"POSITIVITY", "NEGATIVITY", "CONE", "BALL", "U_UPPER",
            "V_WINDOW", "COMPARISON"} == names


def test_asymptotics_command(tmp_path):
    code = main(["asymptotics", "--a2", "1", "--b2", "1", "--c2", "1",
                 "--k", "1", "--rmax", "200", "--n", "2000", "--out", str(tmp_path)])
    assert code == 0
    doc = _read_json(tmp_path / "tailfit.json")
    assert doc["rel_err_u"] <= 0.02
    assert doc["decoupled"]["xbar_order"] >= 3.5


def test_asymptotics_requires_infinite(tmp_path):
    assert main(["asymptotics", "--R", "20", "--out", str(tmp_path)]) == 64


def test_stability_command_k1_banner(tmp_path, capsys):
    code = main(["stability", "--a2", "1", "--b2", "1", "--c2", "1", "--k", "1",
                 "--rmax", "100", "--n", "1500", "--out", str(tmp_path)])
    assert code == 0
    err = capsys.readouterr().err
    assert "open question" in err
    doc = _read_json(tmp_path / "stability.json")
    assert doc["open_question"] is True


def test_stability_certificate_csv(tmp_path):
    code = main(["stability", "--a2", "1", "--b2", "1", "--c2", "1", "--k", "2",
                 "--rmax", "400", "--n", "4000", "--support", "10,400",
                 "--out", str(tmp_path)])
    assert code == 0
    doc = _read_json(tmp_path / "stability.json")
    assert doc["min_rayleigh"] < 0.0
    assert doc["certificate_present"] is True
    assert doc["open_question"] is False
    cert = np.loadtxt(tmp_path / "certificate.csv", delimiter=",", skiprows=1)
    assert cert.shape[1] == 2


def test_qfield_command(tmp_path):
    code = main(["qfield", "--R", "10", "--n", "300", "--angles", "32",
                 "--out", str(tmp_path)])
    assert code == 0
    data = np.loadtxt(tmp_path / "qfield.csv", delimiter=",", skiprows=1)
    assert data.shape == (301 * 32, 11)


def test_solve_energy_method(tmp_path):
    code = main(["solve", "--R", "10", "--n", "300", "--method", "energy",
                 "--out", str(tmp_path)])
    assert code == 0
    doc = _read_json(tmp_path / "energy.json")
    # the minimizer output is polished on the collocation system
    assert doc["residual_norm"] <= 1e-8


def test_artifacts_byte_identical(tmp_path):
    args = ["verify", "--a2", "1", "--b2", "3", "--c2", "1", "--k", "2",
            "--R", "15", "--n", "400", "--seed", "7"]
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert (out1 / "bounds.json").read_bytes() == (out2 / "bounds.json").read_bytes()


def test_config_file_and_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# flat config\n"
        "a2 = 2.0\n"
        "b2 = 1.0\n"
        "R = 10\n"
        "n = 300\n"
    )
    out = tmp_path / "out"
    code = main(["solve", "--config", str(cfg), "--a2", "3.0", "--out", str(out)])
    assert code == 0
    doc = _read_json(out / "energy.json")
    assert doc["params"]["a2"] == 3.0  # flag beats file
    assert doc["domain"]["R"] == 10.0  # file beats default


def test_config_file_bad_key(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("frobnicate = 1\n")
    assert main(["solve", "--config", str(cfg), "--R", "5"]) == 64


def test_env_var_out_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("NEMATIC_PROFILE_OUT", str(tmp_path / "envout"))
    code = main(["solve", "--R", "10", "--n", "300"])
    assert code == 0
    assert (tmp_path / "envout" / "profile.csv").exists()


def test_sweep_aggregation(tmp_path):
    code = main(
        ["sweep", "--axis", "b2", "--values", "1,1.7320508075688772,3",
         "--R", "15", "--n", "400", "--jobs", "2", "--out", str(tmp_path)]
    )
    assert code == 0
    doc = _read_json(tmp_path / "sweep.json")
    assert doc["axis"] == "b2"
    regimes = [row["regime"] for row in doc["rows"]]
    assert regimes == ["SUBCRITICAL", "CRITICAL", "SUPERCRITICAL"]
    # ordered by input value, not completion
    assert [row["value"] for row in doc["rows"]] == doc["values"]


def test_sweep_jobs_deterministic(tmp_path):
    args = ["sweep", "--axis", "k", "--values", "1,2", "--R", "10", "--n", "300"]
    out1 = tmp_path / "s1"
    out2 = tmp_path / "s2"
    assert main(args + ["--jobs", "1", "--out", str(out1)]) == 0
    assert main(args + ["--jobs", "2", "--out", str(out2)]) == 0
    assert (out1 / "sweep.json").read_bytes() == (out2 / "sweep.json").read_bytes()
