import csv
import json
import subprocess
import sys

import pytest

from homoclinic import __version__
from homoclinic.cli import main, run
from homoclinic.config import OUTPUT_ENV, build_instance, load_config
from homoclinic.errors import ConfigError


@pytest.fixture(autouse=True)
def no_env_override(monkeypatch):
    monkeypatch.delenv(OUTPUT_ENV, raising=False)


def write_cfg(tmp_path, body="", name="run.ini"):
    out = tmp_path / "out"
    path = tmp_path / name
    path.write_text(f"[output]\ndirectory = {out}\n" + body)
    return path, out


def manifest(out, cmd):
    return json.loads((out / cmd / "manifest.json").read_text())


def test_empty_config_gives_defaults():
    cfg = load_config(text="")
    assert cfg.instance.name == "quadratic"
    assert cfg.continuation.n_schedule == (2, 4, 8, 16, 32)
    assert cfg.tolerances.agreement == 1e-6 and cfg.output.threads == 1


def test_shipped_schema_matches_defaults():
    shipped = load_config("configs/default.ini")
    assert shipped.to_dict() == load_config(text="").to_dict()


@pytest.mark.parametrize("text, fragment", [
    ("[tolerances]\nnewton = -1\n", "tolerance"),
    ("[bogus]\nx = 1\n", "unknown section"),
    ("[instance]\ncolour = red\n", "unknown key"),
    ("[instance]\nq = abc\n", "not a valid"),
    ("[instance]\nname = nosuch\n", "unknown instance"),
    ("[continuation]\nn_schedule = 4, 2\n", "increasing"),
    ("[instance]\nlambda = -1\n", "nonnegative"),
    ("no section header\n", "config error"),
])
def test_malformed_configs(text, fragment):
    with pytest.raises(ConfigError, match=fragment):
        load_config(text=text)


def test_case_sensitive_keys_and_lambda_alias():
    cfg = load_config(text="[discretization]\nM = 12\n[instance]\nlambda = 0.003\n"
                           "[probe]\nR = 2\n")
    assert cfg.discretization.M == 12 and cfg.instance.lam == 0.003
    assert cfg.probe.R == 2.0


def test_env_overrides_output_dir(monkeypatch, tmp_path):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "elsewhere"))
    assert load_config(text="[output]\ndirectory = x\n").output.directory == \
        str(tmp_path / "elsewhere")


def test_build_instance_overrides():
    cfg = load_config(text="[instance]\nname = quadratic\nweight = exponential\n"
                           "theta = 2.5\nnonlinearity = signed_power\n")
    inst = build_instance(cfg, 0.01)
    assert inst.lam == 0.01 and inst.theta == 2.5


def test_negative_tolerance_exit_2(tmp_path, capsys):
    path, _ = write_cfg(tmp_path, "[tolerances]\ntail = -1e-6\n")
    assert run("validate", path) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_config_file_exit_2(tmp_path):
    assert run("validate", tmp_path / "missing.ini") == 2


def test_lambda_beyond_star_needs_flag(tmp_path):
    path, out = write_cfg(tmp_path, "[instance]\nlambda_fraction = 1.5\n"
                                    "[discretization]\nn = 2\n")
    assert run("constants-report", path) == 2
    assert run("constants-report", path, allow_beyond_lambda_star=True) == 0
    doc = json.loads((out / "constants-report" / "constants.json").read_text())
    assert doc["k_star"] is None


def test_validate_and_constants(tmp_path):
    path, out = write_cfg(tmp_path)
    assert run("validate", path) == 0
    hyp = json.loads((out / "validate" / "hypotheses.json").read_text())
    assert hyp["passed"] is True
    assert run("constants-report", path) == 0
    doc = json.loads((out / "constants-report" / "constants.json").read_text())
    assert doc["k_star"] == 4453 and doc["lambda"] == pytest.approx(
        doc["Lambda_star"] / 2)
    m = manifest(out, "constants-report")
    assert m["version"] == __version__ and len(m["config_hash"]) == 64
    assert m["exit_code"] == 0 and "constants.json" in m["artifacts"]


def test_zero_weight(tmp_path):
    # without a lambda term Lambda* is infinite, so a fraction is meaningless
    path, _ = write_cfg(tmp_path, "[instance]\nweight = zero\n")
    assert run("validate", path) == 2
    path, out = write_cfg(tmp_path, "[instance]\nweight = zero\n"
                                    "lambda = 0.01\n", "zero.ini")
    assert run("validate", path) == 1
    hyp = json.loads((out / "validate" / "hypotheses.json").read_text())
    assert hyp["passed"] is False


def test_strauss_report(tmp_path):
    path, out = write_cfg(tmp_path)
    assert run("strauss-report", path) == 0
    rows = list(csv.DictReader(open(out / "strauss-report" / "strauss.csv")))
    assert [float(r["k"]) for r in rows] == [10, 100, 1000, 10000]
    assert float(rows[0]["uniform_error"]) == pytest.approx(0.10333, abs=1e-4)


def test_solve(tmp_path):
    path, out = write_cfg(tmp_path)
    assert run("solve", path) == 0
    rows = list(csv.reader(open(out / "solve" / "solution.csv")))
    assert rows[0] == ["t", "u", "du"] and len(rows) == 502
    ver = json.loads((out / "solve" / "verification.json").read_text())
    assert ver["passed"] is True
    res = manifest(out, "solve")["results"]["solution"]
    assert res["weak_residual"] <= 1e-8 and res["certificate"]["passed"]


def test_solver_stall_exit_3(tmp_path):
    path, out = write_cfg(tmp_path, "[continuation]\nk_cap = 5000\n")
    assert run("solve", path) == 3
    assert "stalled" in manifest(out, "solve")["status"]
    assert not (out / "solve" / "solution.csv").exists()


def test_homoclinic_and_determinism(tmp_path):
    path, out = write_cfg(tmp_path)
    assert run("homoclinic", path) == 0
    first = (out / "homoclinic" / "homoclinic.csv").read_bytes()
    levels = sorted(p.name for p in (out / "homoclinic").glob("level_n*.csv"))
    assert levels == ["level_n2.csv", "level_n4.csv", "level_n8.csv"]
    assert run("homoclinic", path) == 0
    assert (out / "homoclinic" / "homoclinic.csv").read_bytes() == first


def test_sweep(tmp_path):
    path, out = write_cfg(tmp_path)
    assert run("sweep", path) == 0
    rows = list(csv.DictReader(open(out / "sweep" / "sweep.csv")))
    assert len(rows) == 7
    for r in rows:
        assert float(r["norm_W12"]) ** 2 <= float(r["bound"]) + 1e-8
        assert float(r["sup_norm"]) <= float(r["sup_bound"])


def test_nonexistence_probe(tmp_path, capsys):
    path, out = write_cfg(tmp_path)
    assert run("nonexistence-probe", path) == 0
    probe = json.loads((out / "nonexistence-probe" / "probe.json").read_text())
    assert probe["found"] is False
    assert probe["lambda"] == pytest.approx(10 * probe["lambda0"])
    assert "no solution found" in capsys.readouterr().out


def test_main_and_entry_point(tmp_path):
    path, _ = write_cfg(tmp_path)
    assert main(["strauss-report", "--config", str(path)]) == 0
    with pytest.raises(SystemExit):
        main(["not-a-command"])
    proc = subprocess.run([sys.executable, "-m", "homoclinic.cli", "--version"],
                          capture_output=True, text=True)
    assert __version__ in proc.stdout
