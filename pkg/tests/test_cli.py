import csv
import hashlib
import json
import math

import pytest

from gauss_ucb import acceptance, bounds, cli
from gauss_ucb.config import ConfigError, build_config, canonical_json, parse_config

BASE = {
    "instance": {"means": [0.0, -1.0], "sigma": 1.0, "horizon": 102},
    "policies": [{"kind": "lai_ucb"}],
}


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def with_instance(**changes):
    doc = json.loads(json.dumps(BASE))
    doc["instance"].update(changes)
    return doc


def read_csv(path):
    with path.open(newline="") as handle:
        return list(csv.DictReader(handle))


# -- config ----------------------------------------------------------------------------


def test_minimal_config_gets_defaults(tmp_path):
    config = parse_config(write_config(tmp_path, BASE))
    assert config.replications == 1000
    assert config.master_seed == 0
    assert str(config.output_dir) == "out"
    assert config.instance.stds == (1.0, 1.0)
    assert config.policies[0].horizon == 102
    assert config.crossing["max_walk"]


@pytest.mark.parametrize(
    "doc, path",
    [
        (with_instance(sigma=0.0), "instance.sigma"),
        (with_instance(horizon=2), "instance.horizon"),
        (with_instance(stds=[1.0, 1.5]), "instance.stds[1]"),
        (with_instance(means=[0.0]), "instance.means"),
        (with_instance(means=[0.0, "x"]), "instance.means[1]"),
        ({"policies": []}, "instance"),
        (dict(BASE, policies=[{"kind": "greedy"}]), "policies[0].kind"),
        (dict(BASE, policies=[{"kind": "constant_ucb"}]), "policies[0].level"),
        (dict(BASE, policies=[{"kind": "constant_ucb", "level": {"method": "fixed", "b": 0}}]), "policies[0].level.b"),
        (dict(BASE, replications=0), "replications"),
        (dict(BASE, crossing={"max_walk": [{"b": 0.0, "horizon_after_init": 10}]}), "crossing.max_walk[0].b"),
        (dict(BASE, crossing={"stopping": [{"b": 3.0, "theta": 1.0, "dt": 0.01}]}), "crossing.stopping[0].dt"),
        (dict(BASE, crossing={"lai_boundary": [{"n": 10.0, "gamma": 1.0, "points_per_decade": 5}]}), "crossing.lai_boundary[0].points_per_decade"),
    ],
)
def test_config_errors_name_the_field(doc, path):
    with pytest.raises(ConfigError) as info:
        build_config(doc)
    assert info.value.path == path
    assert path in str(info.value)


def test_config_levels():
    doc = dict(BASE, policies=[
        {"kind": "constant_ucb", "level": {"method": "sqrt_two_log"}},
        {"kind": "constant_ucb", "level": {"method": "argmin"}},
        {"kind": "constant_ucb", "level": {"method": "fixed", "b": 2.5}},
        {"kind": "ucb1", "alpha": 3},
    ])
    config = build_config(doc)
    assert config.policies[0].level.b == pytest.approx(math.sqrt(2 * math.log(100)))
    assert config.policies[2].level.b == 2.5
    assert config.policies[3].alpha == 3.0


def test_config_hash_is_sha256_of_canonical_json(tmp_path):
    config = parse_config(write_config(tmp_path, BASE))
    assert config.config_hash == hashlib.sha256(canonical_json(config.document).encode()).hexdigest()
    assert config.with_overrides(seed=5).config_hash != config.config_hash


# -- simulate ------------------------------------------------------------------------------


def test_simulate_single_replication_rows(tmp_path):
    doc = dict(with_instance(horizon=3), replications=1)
    out = tmp_path / "out"
    assert cli.main(["simulate", str(write_config(tmp_path, doc)), "--out", str(out)]) == 0
    rows = read_csv(out / "traces.csv")
    assert list(rows[0]) == list(cli.TRACE_COLUMNS)
    assert len(rows) == 3
    assert [r["arm"] for r in rows[:2]] == ["0", "1"]
    assert [int(r["t"]) for r in rows] == [1, 2, 3]


def test_simulate_is_byte_identical_on_rerun(tmp_path):
    path = write_config(tmp_path, dict(BASE, replications=3))
    cli.main(["simulate", str(path), "--out", str(tmp_path / "a")])
    cli.main(["simulate", str(path), "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "traces.csv").read_bytes() == (tmp_path / "b" / "traces.csv").read_bytes()
    other = tmp_path / "c"
    cli.main(["simulate", str(path), "--out", str(other), "--seed", "1"])
    assert (other / "traces.csv").read_bytes() != (tmp_path / "a" / "traces.csv").read_bytes()


def test_simulate_null_instance(tmp_path):
    doc = dict(with_instance(means=[0.3, 0.3, 0.3], horizon=40), replications=4)
    out = tmp_path / "out"
    cli.main(["simulate", str(write_config(tmp_path, doc)), "--out", str(out)])
    rows = read_csv(out / "traces.csv")
    assert all(float(r["cum_pseudo_regret"]) == 0.0 for r in rows)


def test_simulate_summary_only_and_summary_json(tmp_path):
    doc = dict(BASE, replications=5, policies=[{"kind": "lai_ucb"}, {"kind": "constant_ucb", "level": {"method": "sqrt_two_log"}}, {"kind": "ucb1"}])
    out = tmp_path / "out"
    assert cli.main(["simulate", str(write_config(tmp_path, doc)), "--out", str(out), "--summary-only"]) == 0
    rows = read_csv(out / "traces_0_lai_ucb.csv")
    assert [int(r["replication"]) for r in rows] == list(range(5))
    assert all(int(r["t"]) == 102 for r in rows)
    summary = json.loads((out / "summary.json").read_text())
    config = build_config(dict(doc, output_dir=str(out)))
    assert summary["config_hash"] == config.config_hash
    assert [p["policy"] for p in summary["policies"]] == ["lai_ucb", "constant_ucb[sqrt_two_log,b=3.03485]", "ucb1[alpha=2]"]
    assert len(summary["comparisons"]) == 2
    for c in summary["comparisons"]:
        assert set(c) >= {"estimate", "bound", "margin", "verdict"}
        assert c["margin"] == pytest.approx(3 * next(p["std_error"] for p in summary["policies"] if p["policy"] == c["policy"]))


def test_csv_floats_round_trip(tmp_path):
    out = tmp_path / "out"
    cli.main(["simulate", str(write_config(tmp_path, dict(BASE, replications=2))), "--out", str(out)])
    text = (out / "traces.csv").read_text()
    assert "\r" not in text
    for row in read_csv(out / "traces.csv"):
        assert format(float(row["reward"]), ".17g") == row["reward"]


def test_report_prints_policies(tmp_path, capsys):
    out = tmp_path / "out"
    cli.main(["simulate", str(write_config(tmp_path, dict(BASE, replications=2))), "--out", str(out)])
    assert cli.main(["report", "--out", str(out)]) == 0
    assert "lai_ucb" in capsys.readouterr().out


# -- bounds --------------------------------------------------------------------------------


def test_bounds_csv(tmp_path):
    doc = dict(BASE, policies=[{"kind": "constant_ucb", "level": {"method": "sqrt_two_log"}}, {"kind": "lai_ucb"}])
    out = tmp_path / "out"
    assert cli.main(["bounds", str(write_config(tmp_path, doc)), "--out", str(out)]) == 0
    rows = read_csv(out / "bounds.csv")
    assert list(rows[0]) == list(cli.BOUND_COLUMNS)
    kinds = [r["bound_kind"] for r in rows]
    assert kinds == ["constant_ucb", "sqrt_log_ucb", "optimal_level_ucb", "lai_ucb", "lai_robbins_lower", "auer_upper"]
    assert float(rows[0]["per_arm_total"]) <= 2 * math.log(100) + 4
    for r in rows:
        assert float(r["per_arm_total"]) == pytest.approx(float(r["leading_term"]) + float(r["correction_term"]), rel=1e-15)


def test_bounds_rows_sum_to_grand_total(tmp_path):
    doc = with_instance(means=[0.0, -0.5, -2.0], horizon=500)
    out = tmp_path / "out"
    cli.main(["bounds", str(write_config(tmp_path, doc)), "--out", str(out)])
    rows = read_csv(out / "bounds.csv")
    for kind in {r["bound_kind"] for r in rows}:
        mine = [r for r in rows if r["bound_kind"] == kind]
        assert math.fsum(float(r["per_arm_total"]) for r in mine) == pytest.approx(float(mine[0]["grand_total"]), rel=1e-14)


def test_bounds_all_optimal(tmp_path):
    out = tmp_path / "out"
    cli.main(["bounds", str(write_config(tmp_path, with_instance(means=[1.0, 1.0]))), "--out", str(out)])
    rows = read_csv(out / "bounds.csv")
    assert all(float(r["grand_total"]) == 0.0 and r["arm"] == "" for r in rows)


# -- crossing ------------------------------------------------------------------------------


def test_crossing_csv(tmp_path):
    doc = dict(BASE, crossing={
        "replications": 3000,
        "max_walk": [{"b": 2.5, "horizon_after_init": 200}],
        "drifted": [{"b": 1.0, "gamma": 0.5, "horizon_after_init": 200}],
        "lai_boundary": [{"n": 100.0, "gamma": 1.0, "points_per_decade": 50}],
        "stopping": [{"b": 3.0, "theta": 1.0, "dt": 5e-3}],
    })
    out = tmp_path / "out"
    assert cli.main(["crossing", str(write_config(tmp_path, doc)), "--out", str(out)]) == 0
    rows = read_csv(out / "crossing.csv")
    assert list(rows[0]) == list(cli.CROSSING_COLUMNS)
    assert [r["quantity"] for r in rows] == ["max_normalized_walk", "drifted_crossing", "lai_boundary"]
    assert all(0.0 <= float(r["estimate"]) <= 1.0 for r in rows)
    assert all(r["verdict"] == "pass" for r in rows)
    stopping = json.loads((out / "crossing_summary.json").read_text())["stopping"]
    assert stopping[0]["verdict"] == "pass"


def test_crossing_rejects_zero_level(tmp_path):
    doc = dict(BASE, crossing={"max_walk": [{"b": 0, "horizon_after_init": 10}]})
    assert cli.main(["crossing", str(write_config(tmp_path, doc))]) == cli.EXIT_CONFIG


# -- exit codes and verify ------------------------------------------------------------------


def test_exit_codes(tmp_path, capsys):
    assert cli.main(["simulate", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["bounds", str(bad)]) == cli.EXIT_CONFIG
    assert cli.main(["bounds", str(write_config(tmp_path, with_instance(sigma=0)))]) == cli.EXIT_CONFIG
    assert "instance.sigma" in capsys.readouterr().err
    blocker = tmp_path / "file"
    blocker.write_text("")
    assert cli.main(["bounds", str(write_config(tmp_path, BASE)), "--out", str(blocker / "sub")]) == cli.EXIT_IO
    assert cli.main(["report", "--out", str(tmp_path / "nowhere")]) == cli.EXIT_IO


def test_verify_detects_a_tampered_constant(monkeypatch):
    monkeypatch.setattr(bounds, "sqrt_log_constant", lambda t, method=None: 11.0)
    result = acceptance.run_criterion(2, fast=True)
    assert not result.passed
    assert result.line().startswith("FAIL  2")


def test_verify_fast_prints_one_line_per_criterion(monkeypatch, capsys):
    # Swap the heavy checks for stubs; the real ones run in test_acceptance.
    stub = [(n, title, (lambda fast: (True, "stub")), info) for n, title, _, info in acceptance.CRITERIA]
    monkeypatch.setattr(acceptance, "CRITERIA", tuple(stub))
    assert cli.main(["verify", "--fast"]) == cli.EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == len(stub) + 1
    assert all("[reduced" in line for n, line in zip([s[0] for s in stub], lines) if n not in (1, 3, 10))
    assert lines[-1] == "overall: PASS"
    stub[2] = (3, "x", lambda fast: (False, "stub"), False)
    monkeypatch.setattr(acceptance, "CRITERIA", tuple(stub))
    assert cli.main(["verify", "--fast"]) == cli.EXIT_VERIFY
    stub[2] = (3, "x", lambda fast: (True, "stub"), False)
    stub[8] = (9, "x", lambda fast: (False, "stub"), True)
    monkeypatch.setattr(acceptance, "CRITERIA", tuple(stub))
    assert cli.main(["verify", "--fast"]) == cli.EXIT_OK
