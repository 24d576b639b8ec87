"""Command line behaviour: exit codes, files written, reproducibility."""
import json
import subprocess
import sys

import pytest

from edgemarket import cli, config_to_dict
from edgemarket.harness import load_trace, read_metrics_csv


@pytest.fixture
def config_file(tmp_path, small_cfg):
    path = tmp_path / "config.json"
    cfg = small_cfg.replace(auction_mode="greedy")
    path.write_text(json.dumps(config_to_dict(cfg)))
    return path


def test_run_writes_reproducible_csv(tmp_path):
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    assert cli.main(["run", "--scenario", "truthfulness",
                     "--seeds", "0..1", "--out", str(first)]) == 0
    assert cli.main(["run", "--scenario", "truthfulness",
                     "--seeds", "0..1", "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    rows = read_metrics_csv(first)
    assert {r.seed for r in rows} == {0, 1}
    assert all(r.runtime_ms == 0.0 for r in rows)


def test_run_timing_opt_in(tmp_path):
    out = tmp_path / "eff.csv"
    assert cli.main(["run", "--scenario", "efficiency", "--seeds", "0",
                     "--timing", "--out", str(out)]) == 0
    rows = read_metrics_csv(out)
    assert rows and all(r.runtime_ms > 0.0 for r in rows)


def test_run_unknown_scenario_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        cli.main(["run", "--scenario", "figure_12",
                  "--out", str(tmp_path / "x.csv")])
    assert excinfo.value.code == 2


def test_bad_seed_ranges(tmp_path, capsys):
    out = str(tmp_path / "x.csv")
    assert cli.main(["run", "--scenario", "truthfulness",
                     "--seeds", "5..1", "--out", out]) == 2
    assert cli.main(["run", "--scenario", "truthfulness",
                     "--seeds", ",,", "--out", out]) == 2
    assert "error:" in capsys.readouterr().err


def test_sweep_numeric_param(tmp_path, config_file):
    out = tmp_path / "sweep.csv"
    assert cli.main(["sweep", "--param", "arrival_rate",
                     "--values", "1.5,2.5", "--seeds", "0",
                     "--config", str(config_file),
                     "--num-tasks", "16", "--out", str(out)]) == 0
    rows = read_metrics_csv(out)
    assert [r.param_value for r in rows] == [1.5, 2.5]
    assert all(r.param_name == "arrival_rate" for r in rows)
    assert all(r.runtime_ms == 0.0 for r in rows)
    assert all(r.scenario == "sweep" for r in rows)


def test_sweep_string_param(tmp_path, config_file):
    out = tmp_path / "sweep.csv"
    assert cli.main(["sweep", "--param", "execution_mode",
                     "--values", "sequential,concurrent", "--seeds", "0",
                     "--config", str(config_file),
                     "--num-tasks", "12", "--out", str(out)]) == 0
    rows = read_metrics_csv(out)
    assert [r.method for r in rows] == ["sequential", "concurrent"]


def test_sweep_unknown_param(tmp_path, config_file):
    assert cli.main(["sweep", "--param", "warp_factor", "--values", "9",
                     "--config", str(config_file),
                     "--out", str(tmp_path / "x.csv")]) == 2


def test_config_errors_exit_2(tmp_path):
    missing = tmp_path / "nope.json"
    assert cli.main(["run", "--scenario", "truthfulness",
                     "--config", str(missing),
                     "--out", str(tmp_path / "x.csv")]) == 2
    garbled = tmp_path / "broken.json"
    garbled.write_text("{not json")
    assert cli.main(["run", "--scenario", "truthfulness",
                     "--config", str(garbled),
                     "--out", str(tmp_path / "x.csv")]) == 2
    bad_field = tmp_path / "bad.json"
    bad_field.write_text(json.dumps({"num_ue": -3}))
    assert cli.main(["run", "--scenario", "truthfulness",
                     "--config", str(bad_field),
                     "--out", str(tmp_path / "x.csv")]) == 2


def test_config_env_var(tmp_path, config_file, monkeypatch):
    garbled = tmp_path / "broken.json"
    garbled.write_text("{not json")
    monkeypatch.setenv("EDGEMARKET_CONFIG", str(garbled))
    out = str(tmp_path / "x.csv")
    # the environment default is honoured ...
    assert cli.main(["sweep", "--param", "arrival_rate", "--values", "2.0",
                     "--num-tasks", "8", "--out", out]) == 2
    # ... and an explicit --config wins over it
    assert cli.main(["sweep", "--param", "arrival_rate", "--values", "2.0",
                     "--config", str(config_file),
                     "--num-tasks", "8", "--out", out]) == 0


@pytest.mark.parametrize("suite,seeds", [
    ("oracle", "0..4"),
    ("truthfulness", "0..2"),
    ("envy", "0..9"),
    ("incentive", "0..4"),
])
def test_verify_suites_pass(suite, seeds, capsys):
    assert cli.main(["verify", "--suite", suite, "--seeds", seeds]) == 0
    assert "ok" in capsys.readouterr().out


def test_verify_violation_exits_1(monkeypatch, capsys):
    monkeypatch.setitem(cli._SUITES, "oracle",
                        lambda cfg, seeds: ["planted failure"])
    assert cli.main(["verify", "--suite", "oracle", "--seeds", "0"]) == 1
    assert "FAIL oracle: planted failure" in capsys.readouterr().err


def test_trace_convert(tmp_path, cfg):
    raw = tmp_path / "dump.txt"
    raw.write_text("; comment\n"
                   "1 0.0 5 10.0 1 trailing\n"
                   "2 2.0 5 30.0 2 trailing\n")
    out = tmp_path / "trace.csv"
    assert cli.main(["trace", "convert", str(raw), str(out)]) == 0
    assert len(load_trace(out, cfg).tasks) == 2


def test_trace_convert_missing_input(tmp_path):
    assert cli.main(["trace", "convert", str(tmp_path / "nope.txt"),
                     str(tmp_path / "out.csv")]) == 2


def test_report_renders_figures(tmp_path):
    metrics = tmp_path / "metrics.csv"
    assert cli.main(["run", "--scenario", "truthfulness", "--seeds", "0",
                     "--out", str(metrics)]) == 0
    out_dir = tmp_path / "figs"
    assert cli.main(["report", str(metrics), "--out-dir", str(out_dir)]) == 0
    assert list(out_dir.glob("*.png"))


def test_run_with_figures_flag(tmp_path):
    out_dir = tmp_path / "figs"
    assert cli.main(["run", "--scenario", "truthfulness", "--seeds", "0",
                     "--out", str(tmp_path / "m.csv"),
                     "--figures", str(out_dir)]) == 0
    assert list(out_dir.glob("*.png"))


def test_console_script_smoke(tmp_path):
    result = subprocess.run(
        [sys.executable, "-m", "edgemarket.cli", "verify",
         "--suite", "oracle", "--seeds", "0,1"],
        capture_output=True, text=True, cwd=tmp_path)
    assert result.returncode == 0, result.stderr
    assert "ok" in result.stdout
