import csv
import json

import numpy as np
import pytest

from fracweight.cli import ConfigError, main, parse_config
from fracweight.nonlocal_form import load_matrix


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_parse_valid_flags():
    cfg = parse_config(domain=("interval:-1,1,128",), s=0.5, weights="w:1@0.25,-1@0.75", mode="minimize")
    assert cfg.domain == "interval:-1,1,128" and cfg.mode == "minimize" and cfg.seed == 42


def test_solve_defaults_to_unit_weight():
    assert parse_config(domain="disk:1,8", s=0.3).weights == "w:1@1"


@pytest.mark.parametrize(
    "flags,msg",
    [
        (dict(domain="interval:-1,1,8", weights="w:1@1"), "--s"),
        (dict(s=0.5, weights="w:1@1"), "--domain"),
        (dict(domain="interval:-1,1,8", s=0.5, mode="minimize"), "--weights"),
        (dict(domain="interval:-1,1,8", s=1.5), "s must lie"),
        (dict(domain=("interval:-1,1,8", "disk:1,4"), s=0.5), "conflicting domain"),
        (dict(domain="interval:-1,1,8", s=0.5, weights="w:1@0.5,-1@0.6"), "fractions sum 1.1"),
        (dict(domain="torus:1", s=0.5), "bad domain spec"),
    ],
)
def test_config_errors(flags, msg):
    with pytest.raises(ConfigError, match=msg):
        parse_config(**flags)


def test_config_file_and_override(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"domain": "interval:-1,1,16", "s": 0.25, "mode": "minimize", "weights": "w:1@0.5,0@0.5"}))
    cfg = parse_config(path, s=0.75)
    assert cfg.s == 0.75 and cfg.mode == "minimize"
    path.write_text(json.dumps({"domian": "x"}))
    with pytest.raises(ConfigError, match="unknown config keys"):
        parse_config(path)


def test_solve_mode(tmp_path):
    code = main(["--domain", "interval:-1,1,128", "--s", "0.5", "--out", str(tmp_path)])
    assert code == 0
    rows = read_csv(tmp_path / "results.csv")
    assert len(rows) == 1 and float(rows[0]["lambda1"]) > 0
    assert (tmp_path / "report.txt").read_text().startswith("config: {")


def test_minimize_mode_trace(tmp_path):
    args = ["--domain", "interval:-1,1,64", "--s", "0.5", "--weights", "w:1@0.25,-1@0.75"]
    args += ["--mode", "minimize", "--restarts", "3", "--out", str(tmp_path), "--dump-matrix"]
    assert main(args) == 0
    mu = [float(r["mu1"]) for r in read_csv(tmp_path / "trace.csv")]
    assert np.all(np.diff(mu) >= -1e-12)
    assert len(read_csv(tmp_path / "results.csv")) == 3
    A, s = load_matrix(tmp_path / "A.bin")
    assert A.shape == (64, 64) and s == 0.5


def test_maximize_mode(tmp_path):
    args = ["--domain", "interval:-1,1,12", "--s", "0.5", "--weights", "w:1@0.5,0.2@0.5"]
    assert main(args + ["--mode", "maximize", "--tol", "1e-3", "--out", str(tmp_path)]) == 0
    row = read_csv(tmp_path / "results.csv")[0]
    assert row["status"] == "converged" and float(row["gap"]) <= 1e-3


def test_verify_suite_report(tmp_path):
    args = ["--domain", "interval:-1,1,24", "--s", "0.4", "--weights", "w:4@0.25,-1@0.75"]
    assert main(args + ["--mode", "verify-suite", "--out", str(tmp_path)]) == 0
    report = (tmp_path / "report.txt").read_text()
    for name in ("convexity", "hardy-littlewood", "polya-szego", "upper-estimate", "linear-bounds", "negative-duality"):
        assert f"PASS {name}" in report
    assert "FAIL" not in report


def test_runs_are_reproducible(tmp_path):
    args = ["--domain", "disk:1,10", "--s", "0.6", "--weights", "w:1@0.3,-1@0.7", "--mode", "minimize", "--restarts", "3"]
    for d in ("a", "b"):
        assert main(args + ["--out", str(tmp_path / d)]) == 0
    for f in ("results.csv", "trace.csv", "fields.csv", "report.txt"):
        a = (tmp_path / "a" / f).read_bytes()
        b = (tmp_path / "b" / f).read_bytes().replace(b"/b", b"/a")
        assert a == b


@pytest.mark.parametrize(
    "argv",
    [
        ["--domain", "interval:-1,1,8"],
        ["--domain", "interval:-1,1,8", "--domain", "disk:1,4", "--s", "0.5"],
        ["--domain", "interval:-1,1,8", "--s", "0.5", "--mode", "bogus"],
        ["--domain", "interval:-1,1,8", "--s", "0.5", "--weights", "w:1@0.5,-1@0.6"],
    ],
)
def test_usage_errors_exit_1(argv, tmp_path):
    assert main(argv + ["--out", str(tmp_path)]) == 1
