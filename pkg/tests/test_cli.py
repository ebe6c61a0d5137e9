import csv
import io
import json

import pytest

from alerting import cli


def run(args, tmp_path=None):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(args, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def write(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def test_analyze_rows_match_table():
    code, out, _ = run(["analyze"])
    assert code == 0
    table = {(r["protocol"], r["n"]): r for r in rows(out)}
    assert len(table) == 4 * 63
    lock, seq, tee = table["lockstep", "10"], table["sequential", "10"], table["tee", "10"]
    assert (lock["bribe_cost"], lock["tx_noalert"]) == ("90", "0")
    assert (seq["bribe_cost"], seq["tx_alert"]) == ("45", "1")
    assert (tee["tx_alert"], tee["tx_noalert"]) == ("20", "20")
    assert table["burned", "5"]["bribe_cost"] == "5"


def test_analyze_header_and_grid(tmp_path):
    cfg = write(tmp_path, {"params": {"n": [3, 4], "penalty_lambda": [1, 10], "operator_cost_c": "0.5"}})
    code, out, _ = run(["analyze", "--config", cfg, "--protocol", "burned"])
    assert code == 0
    assert out.splitlines()[0] == "protocol,n,lambda,c,bribe_cost,tx_alert,tx_noalert,latency_class"
    assert [r["bribe_cost"] for r in rows(out)] == ["4.5", "31.5", "6", "42"]


def test_simulate_threshold_always_suppresses(tmp_path):
    cfg = write(tmp_path, {"protocol": "lockstep", "params": {"n": [3, 4], "penalty_lambda": 1},
                           "strategy": {"kind": "threshold", "gain_G": "simultaneous_threshold+1"},
                           "trials": 50})
    code, out, _ = run(["simulate", "--config", cfg])
    assert code == 0
    assert all(r["suppression_prob"] == "1.000000" for r in rows(out))


def test_simulate_interior_utility_not_positive(tmp_path):
    cfg = write(tmp_path, {"protocol": "lockstep", "params": {"n": 3, "penalty_lambda": 1},
                           "strategy": {"kind": "uniform", "beta": "1.5", "gain_G": "simultaneous_threshold"},
                           "trials": 2000, "seed": 4})
    code, out, _ = run(["simulate", "--config", cfg])
    (r,) = rows(out)
    assert code == 0 and float(r["ci_low"]) <= 0


def test_simulate_sequential_slot_one(tmp_path):
    cfg = write(tmp_path, {"protocol": "sequential", "params": {"n": [2, 5], "penalty_lambda": 1}, "trials": 30})
    code, out, _ = run(["simulate", "--config", cfg])
    assert code == 0
    assert all(r["mean_alert_slot"] == "1.000000" and r["suppression_prob"] == "0.000000" for r in rows(out))


def test_simulate_is_byte_reproducible(tmp_path):
    cfg = write(tmp_path, {"protocol": "tee", "params": {"n": 3, "penalty_lambda": 1},
                           "strategy": {"kind": "uniform", "beta": "1.5"}, "trials": 100, "seed": 9})
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["simulate", "--config", cfg, "--out", str(a)])[0] == 0
    assert run(["simulate", "--config", cfg, "--out", str(b)])[0] == 0
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.csv"
    run(["simulate", "--config", cfg, "--out", str(c), "--seed", "10"])
    assert c.read_bytes() != a.read_bytes()


def test_attack_demo():
    code, out, err = run(["attack-demo"])
    assert code == 0, err
    table = rows(out)
    assert [r["n"] for r in table] == ["4", "8", "16", "32"]
    first = table[0]
    assert first["naive_cost"] == first["formula_cost"] == "25/3"
    assert all(r["tee_alert_raised"] == "true" and r["naive_suppressed"] == "true" for r in table)
    ratios = [float(r["naive_over_quadratic"]) for r in table]
    assert ratios == sorted(ratios, reverse=True)


@pytest.mark.parametrize("cfg", [
    {"params": {"n": 1, "penalty_lambda": 1}},
    {"params": {"n": 3, "penalty_lambda": 1, "n_commit": 5, "n_reveal": 5}},
    {"bogus": 1},
    {"trials": -1},
    {"strategy": {"kind": "no-such-kind"}},
    {"protocol": "nope"},
])
def test_config_errors_exit_two(tmp_path, cfg):
    path = write(tmp_path, cfg)
    assert run(["simulate", "--config", path, "--trials", "1"])[0] == 2


def test_missing_and_malformed_config(tmp_path):
    assert run(["analyze", "--config", str(tmp_path / "missing.json")])[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["analyze", "--config", str(bad)])[0] == 2
    assert run(["analyze", "--protocol", "nope"])[0] == 2


def test_verify_reports_every_check(monkeypatch):
    fake = [cli.verify.CheckResult("a", True), cli.verify.CheckResult("b", False)]
    monkeypatch.setattr(cli.verify, "run_all", lambda rounds, progress: [(progress(r), r)[1] for r in fake])
    code, out, _ = run(["verify"])
    assert code == 1 and "[FAIL] b" in out and "1/2 checks passed" in out


def test_verify_default_passes():
    code, out, _ = run(["verify", "--trials", "300"])
    assert code == 0, out
    assert out.strip().splitlines()[-1] == "11/11 checks passed"
