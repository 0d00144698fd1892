import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from calsim.adversary import LabelStream, schedule_burst, schedule_none
from calsim.baseline_learners import robustcal
from calsim.calruption import CalruptionConfig
from calsim.errors import ConfigError
from calsim.harness import metrics
from calsim.harness.cli import main, parse_vary
from calsim.harness.config import parse_config
from calsim.harness.io import emit_report, read_csv_rows, read_reports
from calsim.harness.runner import run_experiment
from calsim.harness.scenarios import build_schedule, scenario_catalog, scenario_instance
from calsim.instance import build_oracle, counterexample_instance
from calsim.report import CSV_COLUMNS, RunReport

from oracles import c_bar_direct

CE = counterexample_instance()


def base_doc(**kw):
    doc = {"schema": 1, "scenario": "clean", "algorithms": ["robustcal_modified"], "n": 4096, "seeds": 2}
    doc.update(kw)
    return doc


# --- metrics -------------------------------------------------------------------------------------------

def test_c_bar_examples():
    n = 2**16
    cfg = CalruptionConfig.practical(n, 0.05, 2)
    oracle = build_oracle(CE)
    assert metrics.c_bar_total(schedule_none(CE, n), cfg, oracle) == 0.0
    n1 = cfg.epoch_length(1)
    full = schedule_burst(CE, n, n1, CE.hypotheses[1].astype(float))
    assert metrics.c_bar_total(full, cfg, oracle) == float(n1)
    light = schedule_burst(CE, n, n, [15 / 32, 1.0, 1.0])
    covered = metrics.accounted_epoch_intervals(cfg)[-1][2]
    assert metrics.c_bar_total(light, cfg, oracle) == pytest.approx(oracle.best_risk * covered / 32)


def test_accounted_epoch_count_matches_log():
    for n in (10**4, 2**16, 3 * 10**5):
        cfg = CalruptionConfig.practical(n, 0.05, 2)
        assert metrics.accounted_epoch_count(cfg) == math.floor(math.log(n / cfg.beta1, 4))


def test_c_bar_matches_direct_formula_random():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(2000, 50000))
        cfg = CalruptionConfig.practical(n, 0.05, 2, multiplier=float(rng.uniform(0.5, 3)))
        tau = int(rng.integers(1, n + 1))
        sched = schedule_burst(CE, n, tau, rng.uniform(size=3))
        levels = sched.levels(1, n)
        oracle = build_oracle(CE)
        assert metrics.c_bar_total(sched, cfg, oracle) == pytest.approx(
            c_bar_direct(levels, cfg.beta1, n, oracle.best_risk), rel=1e-12, abs=1e-9)


def test_g_values_and_passive_bound():
    n = 2**16
    cfg = CalruptionConfig.practical(n, 0.05, 2)

    class E:
        def __init__(self, l, start, length):
            self.l, self.start, self.length = l, start, length

    epochs = [E(l, s, k) for l, s, k in cfg.epochs()]
    assert metrics.g_values(schedule_none(CE, n), cfg, build_oracle(CE), epochs) == [0.0] * len(epochs)
    n1 = cfg.epoch_length(1)
    g = metrics.g_values(schedule_burst(CE, n, n1, CE.hypotheses[1].astype(float)), cfg, build_oracle(CE), epochs)
    assert g[0] == pytest.approx(2 / cfg.beta1 / 4 * n1)
    assert g[1] == pytest.approx(g[0] / 4)
    b = metrics.passive_erm_bound(10**5, 2, 0.05, 0.16, 0.0)
    lg = math.log(40)
    assert b == pytest.approx(lg / 1e5 + math.sqrt(8 * 0.16 * lg / 1e5) + 5 * lg / 1e5)
    assert metrics.passive_erm_bound(100, 2, 0.05, 0.16, 30.0) == math.inf


# --- scenarios and config --------------------------------------------------------------------------

def test_scenario_catalog():
    names = [s.name for s in scenario_catalog()]
    assert names == ["clean", "misspec", "burst", "counterexample"]
    ce = scenario_instance("counterexample", {})
    assert ce.base_marginal[1] <= ce.base_marginal[0] / 64
    sched = build_schedule("counterexample", {}, ce, 1024)
    assert sched.level_at(1) == 1 / 32
    assert all(sched.total <= t / 32 for t in [1024])
    clean = build_schedule("clean", {}, CE, 100)
    mis0 = build_schedule("misspec", {"gamma": 0.0}, CE, 100)
    assert np.array_equal(clean.eta_at(5), mis0.eta_at(5))


@pytest.mark.parametrize("patch,field", [
    ({"schema": 2}, "schema"),
    ({"n": 1}, "n"),
    ({"delta": 1.5}, "delta"),
    ({"seeds": []}, "seeds"),
    ({"seeds": {"count": 0}}, "seeds.count"),
    ({"algorithms": ["nope"]}, "algorithms"),
    ({"scenario": {"name": "burst", "tau": 0}}, "scenario.tau"),
    ({"scenario": {"name": "burst", "bogus": 1}}, "scenario"),
    ({"scenario": "nope"}, "scenario.name"),
    ({"calruption": {"mode": "weird"}}, "calruption.mode"),
    ({"algorithms": ["calruption"], "n": 100}, "n"),
    ({"instance": {"marginal": [1.0]}}, "instance"),
    ({"scenario": "counterexample", "instance": "counterexample"}, "instance"),
    ({"extra": 1}, "config"),
])
def test_config_errors_name_the_field(patch, field):
    with pytest.raises(ConfigError) as exc:
        parse_config(base_doc(**patch))
    assert str(exc.value).startswith(field + ":")


def test_instance_from_file(tmp_path):
    (tmp_path / "inst.json").write_text(json.dumps(CE.to_dict()))
    cfg = parse_config(base_doc(instance="inst.json"), base_dir=str(tmp_path))
    assert np.array_equal(cfg.instance.hypotheses, CE.hypotheses)
    with pytest.raises(ConfigError, match="instance"):
        parse_config(base_doc(instance="missing.json"), base_dir=str(tmp_path))


# --- runner and io ----------------------------------------------------------------------------------

def test_runner_sorted_and_pool_equivalent():
    doc = base_doc(algorithms=["robustcal_modified", "passive_erm", "calruption"], n=2**13, seeds=[5, 1, 3])
    cfg = parse_config(doc)
    serial = run_experiment(cfg, workers=1)
    pooled = run_experiment(cfg, workers=3)
    keys = [(r.scenario, r.algorithm, r.seed) for r in serial]
    assert keys == sorted(keys) and len(keys) == 9
    assert [r.to_dict() for r in serial] == [r.to_dict() for r in pooled]
    assert all(r.c_bar_total is not None for r in serial)
    labels = {a: np.mean([r.labels_used for r in serial if r.algorithm == a]) for a in cfg.algorithms}
    assert labels["passive_erm"] == cfg.n
    assert labels["calruption"] < cfg.n / 2 and labels["robustcal_modified"] < cfg.n / 2


def test_shared_streams_across_robustcal_variants():
    n = 2**12
    sched = build_schedule("counterexample", {}, CE, n)
    xs = LabelStream(CE, sched, 7).reveal(1, n)

    class Recorder(LabelStream):
        def __init__(self, *a):
            super().__init__(*a)
            self.seen = {}

        def request(self, start, stop, mask):
            ys = super().request(start, stop, mask)
            rounds = np.arange(start, stop + 1)[np.asarray(mask, bool)]
            self.seen.update(zip(rounds.tolist(), ys.tolist()))
            return ys

    a, b = Recorder(CE, sched, 7), Recorder(CE, sched, 7)
    robustcal(a, CE.hypotheses, n, 0.05, "vanilla")
    robustcal(b, CE.hypotheses, n, 0.05, "modified")
    common = set(a.seen) & set(b.seen)
    assert common and all(a.seen[t] == b.seen[t] for t in common)
    assert np.array_equal(a.reveal(1, n), xs)


def test_emit_and_read_back(tmp_path):
    cfg = parse_config(base_doc(algorithms=["calruption", "robustcal_vanilla"], n=2**13))
    reports = run_experiment(cfg)
    path = tmp_path / "r.json"
    emit_report(reports, path, "json")
    back = read_reports(path)
    assert [r.to_dict() for r in back] == [r.to_dict() for r in reports]
    csv_path = tmp_path / "r.csv"
    emit_report(reports, csv_path, "csv")
    rows = read_csv_rows(csv_path)
    assert len(rows) == len(reports) and tuple(rows[0]) == CSV_COLUMNS
    assert len(csv_path.read_text().splitlines()) == len(reports) + 1
    for row, r in zip(rows, reports):
        assert float(row["excess_risk"]) == r.excess_risk and float(row["c_total"]) == r.c_total


def test_empty_csv_is_header_only(tmp_path):
    path = tmp_path / "e.csv"
    emit_report([], path, "csv")
    assert path.read_text() == ",".join(CSV_COLUMNS) + "\n"


def test_io_errors_carry_path(tmp_path):
    bad = tmp_path / "missing" / "x.csv"
    with pytest.raises(OSError, match="missing"):
        emit_report([], bad, "csv")


def test_report_invariants():
    with pytest.raises(ValueError):
        RunReport("a", 10, 0, 0, -0.1, 0, 0.0)
    with pytest.raises(ValueError):
        RunReport("a", 10, 0, 0, 0.0, 11, 0.0)


# --- cli ----------------------------------------------------------------------------------------

def test_parse_vary():
    assert parse_vary("n=2^10..2^12") == ("n", [1024, 2048, 4096])
    assert parse_vary("n=100,200") == ("n", [100, 200])
    for bad in ("delta=0.1", "n=2^5..2^3", "n=abc"):
        with pytest.raises(ConfigError):
            parse_vary(bad)


def test_cli_run_sweep_and_exit_codes(tmp_path, monkeypatch, capsys):
    cfg_path = tmp_path / "exp.json"
    cfg_path.write_text(json.dumps(base_doc(algorithms=["robustcal_modified", "calruption"], n=2**12)))
    monkeypatch.setenv("CALSIM_OUTPUT_DIR", str(tmp_path))
    assert main(["run", "--config", str(cfg_path)]) == 0
    assert (tmp_path / "exp.csv").exists()
    assert main(["run", "--config", str(cfg_path), "--format", "json", "--out", str(tmp_path / "a.json")]) == 0
    assert main(["run", "--config", str(cfg_path), "--format", "json", "--out", str(tmp_path / "b.json")]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    assert main(["sweep", "--config", str(cfg_path), "--vary", "n=2^12..2^13", "--out", str(tmp_path / "s.csv")]) == 0
    with open(tmp_path / "s.csv") as fh:
        assert sorted({int(r["n"]) for r in csv.DictReader(fh)}) == [4096, 8192]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"schema": 9}))
    assert main(["run", "--config", str(bad)]) == 1
    assert "schema" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "nothere.json")]) == 1
    assert main(["scenarios"]) == 0


def test_cli_verify_subprocess():
    proc = subprocess.run([sys.executable, "-m", "calsim", "verify"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stdout + proc.stderr
    assert proc.stdout.count("PASS") == 5


def test_cli_verify_failure_exit_code(monkeypatch):
    from calsim.harness import cli
    from calsim.harness.verify import CheckResult
    monkeypatch.setattr(cli, "run_verification", lambda seed: [CheckResult("x", False, "broken")])
    assert cli.main(["verify"]) == 2
