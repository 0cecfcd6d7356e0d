from __future__ import annotations

import csv
import json

import pytest

from trigtops import cli


def _cfg(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def _verify_cfg(**kw):
    data = {"version": 1, "seed": 3, "samples": 5, "n_list": [2, 3], "identities": ["aybe", "skew"],
            "families": [{"family": "NonStandard", "lambda": [0.2, 0.0]}]}
    data.update(kw)
    return data


def test_verify_ok(tmp_path):
    out = tmp_path / "report.json"
    assert cli.main(["verify", "--config", _cfg(tmp_path, _verify_cfg()), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["seed"] == 3 and doc["summary"] == {"checks": 4, "ok": True}
    keys = [(r["identity"], r["spec"]["n"]) for r in doc["reports"]]
    assert keys == sorted(keys)


def test_verify_seed_flag_overrides(tmp_path):
    out = tmp_path / "report.json"
    cfg = _cfg(tmp_path, _verify_cfg())
    assert cli.main(["verify", "--config", cfg, "--seed", "11", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["seed"] == 11


def test_verify_forced_expectation_fails(tmp_path):
    cfg = _verify_cfg(n_list=[3], identities=["aybe"], families=[{"family": "XXZ", "expect": {"aybe": "pass"}}])
    assert cli.main(["verify", "--config", _cfg(tmp_path, cfg), "--out", str(tmp_path / "o.json")]) == 1


def test_verify_known_failure_is_ok(tmp_path):
    cfg = _verify_cfg(n_list=[3], identities=["aybe"], families=[{"family": "XXZ"}])
    assert cli.main(["verify", "--config", _cfg(tmp_path, cfg), "--out", str(tmp_path / "o.json")]) == 0


@pytest.mark.parametrize("bad", [
    {"samples": 0},
    {"n_list": [1]},
    {"identities": ["nope"]},
    {"families": [{"lambda": [0, 0]}]},
    {"families": [{"family": "Unknown"}]},
    {"version": 99},
    {"tolerances": {"aybe": -1}},
])
def test_verify_config_errors(tmp_path, bad):
    assert cli.main(["verify", "--config", _cfg(tmp_path, _verify_cfg(**bad))]) == 2


def test_unreadable_config(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert cli.main(["verify", "--config", str(path)]) == 2
    assert cli.main(["verify", "--config", str(tmp_path / "missing.json")]) == 2


def test_usage_errors():
    assert cli.main([]) == 2
    assert cli.main(["verify", "--jobs", "0"]) == 2
    assert cli.main(["frobnicate"]) == 2


def test_evolve_writes_csv_and_summary(tmp_path):
    cfg = {"t_final": 0.05, "dt": 1e-2}
    out = tmp_path / "traj.csv"
    assert cli.main(["evolve", "--config", _cfg(tmp_path, cfg), "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0][:3] == ["t", "re_S11", "im_S11"]
    assert rows[0][-1] == "drift_z2_k2"
    assert len(rows) == 7
    summary = json.loads(out.with_suffix(".summary.json").read_text())
    assert summary["steps"] == 5 and summary["ok"]
    assert summary["max_invariant_drift"] <= 1e-10


def test_evolve_errors(tmp_path):
    assert cli.main(["evolve", "--config", _cfg(tmp_path, {"dt": -1e-3})]) == 2
    assert cli.main(["evolve", "--config", _cfg(tmp_path, {"t_final": 1.0, "dt": 0.3})]) == 2
    assert cli.main(["evolve", "--config", _cfg(tmp_path, {"state": [[1, 0], [0, 1], [0, 0]]})]) == 2
    model = {"spec": {"family": "NonStandard", "n": 2, "lambda": [0, 0]}, "kind": "relativistic", "eta": [0, 0]}
    assert cli.main(["evolve", "--config", _cfg(tmp_path, {"model": model})]) == 4


def test_bridge(tmp_path):
    out = tmp_path / "bridge.json"
    assert cli.main(["bridge", "--config", _cfg(tmp_path, {"n": 2, "samples": 2}), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["summary"]["ok"]
    cas = next(r for r in doc["reports"] if r["identity"] == "cms-casimir")
    traces = [complex(*v) for v in cas["extra"]["traces"]]
    assert traces == pytest.approx([0.5, 0.25], abs=1e-10)


def test_bridge_coincident_positions(tmp_path):
    point = {"p": [0.1, 0.2], "q": [0.3, 0.3], "eta": 0.3}
    assert cli.main(["bridge", "--config", _cfg(tmp_path, {"point": point})]) == 4


def test_census(tmp_path):
    out = tmp_path / "census.json"
    assert cli.main(["census", "3", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["count"] == 24 and doc["worked_example_ok"]
    assert sum(r["worked_example"] for r in doc["structures"]) == 1
    assert cli.main(["census", "9"]) == 2
    assert cli.main(["census"]) == 2
