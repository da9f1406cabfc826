import csv
import json

import pytest

from abcring.cli import main
from abcring.experiments import REGISTRY, ConfigError, default_threads, validate


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


TRACE = {"name": "small-trace", "kind": "trace-rates", "seed": 7,
         "params": {"N_A": 3, "N_B": 3, "N_C": 3, "beta": 4.0}, "options": {"samples": 200}}


def test_list_experiments(capsys):
    assert main(["list-experiments"]) == 0
    out = capsys.readouterr().out
    kinds = [line.split(":")[0] for line in out.splitlines() if not line.startswith(" ")]
    assert sorted(kinds) == sorted(REGISTRY) and len(kinds) == 7


def test_validate_missing_beta(tmp_path, capsys):
    cfg = {"name": "x", "kind": "occupation", "seed": 1, "params": {"N_A": 3, "N_B": 3, "N_C": 3}}
    assert main(["validate", "--config", write(tmp_path, cfg)]) == 2
    assert "beta" in capsys.readouterr().err


def test_validate_even_ring(tmp_path, capsys):
    cfg = dict(TRACE, params={"N_A": 3, "N_B": 3, "N_C": 4, "beta": 4.0})
    assert main(["validate", "--config", write(tmp_path, cfg)]) == 2
    assert "ring size must be odd" in capsys.readouterr().err


def test_validate_ok_and_bad_json(tmp_path, capsys):
    assert main(["validate", "--config", write(tmp_path, TRACE)]) == 0
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["validate", "--config", str(bad)]) == 2
    assert main(["validate", "--config", str(tmp_path / "missing.json")]) == 2


def test_unknown_option_named():
    with pytest.raises(ConfigError) as err:
        validate(dict(TRACE, options={"sample": 3}))
    assert "options" in str(err.value)


def test_identity_run(tmp_path):
    cfg = {"name": "ident", "kind": "identity", "seed": 0, "options": {"M_max": 60}}
    out = tmp_path / "out"
    assert main(["run", "--config", write(tmp_path, cfg), "--out", str(out)]) == 0
    report = json.loads((out / "identity_report.json").read_text())
    assert report["all_true"] and len(report["rows"]) == 59
    manifest = json.loads((out / "manifest.json").read_text())
    assert {"config", "version", "wall_time_s", "seed"} <= set(manifest)


def test_velocity_table(tmp_path):
    cfg = {"name": "vel", "kind": "velocity-table", "seed": 0}
    out = tmp_path / "vel"
    assert main(["run", "--config", write(tmp_path, cfg), "--out", str(out)]) == 0
    rows = list(csv.DictReader((out / "velocity.csv").open()))
    assert len(rows) == 100
    assert max(float(r["abs_diff"]) for r in rows) <= 1e-10


def test_trace_rates_reproducible(tmp_path):
    path = write(tmp_path, TRACE)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", path, "--out", str(a), "--threads", "1"]) == 0
    assert main(["run", "--config", path, "--out", str(b), "--threads", "3"]) == 0
    for name in ("rates.csv", "transitions.csv", "summary.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    ma = json.loads((a / "manifest.json").read_text())
    mb = json.loads((b / "manifest.json").read_text())
    for m in (ma, mb):
        del m["timestamp"], m["wall_time_s"], m["threads"]
    assert ma == mb


def test_seed_override(tmp_path):
    out = tmp_path / "s"
    assert main(["run", "--config", write(tmp_path, TRACE), "--seed", "99", "--out", str(out)]) == 0
    assert json.loads((out / "manifest.json").read_text())["seed"] == 99


def test_runtime_fault_exit_code(tmp_path, capsys):
    cfg = {"name": "big", "kind": "gibbs-check", "seed": 1,
           "params": {"N_A": 5, "N_B": 5, "N_C": 5, "beta": 1.0}}
    assert main(["run", "--config", write(tmp_path, cfg), "--out", str(tmp_path / "g")]) == 3
    assert "run failed" in capsys.readouterr().err


def test_threads_env(monkeypatch):
    monkeypatch.setenv("ABC_THREADS", "3")
    assert default_threads() == 3
    monkeypatch.delenv("ABC_THREADS")
    assert default_threads() >= 1
