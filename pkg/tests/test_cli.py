from __future__ import annotations

import json

import pytest

from lanebench.cli import (EXIT_CONFIG, EXIT_EMPTY, EXIT_OK, EXIT_RUNTIME,
                           _parse_opt, main)

SCENARIO = "invading_turn"


@pytest.fixture(scope="module")
def cli_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_run")
    code = main(["run", "--scenario", SCENARIO, "--out", str(out),
                 "--seed", "7"])
    assert code == EXIT_OK
    return out


def test_run_then_score(cli_run, capsys):
    assert main(["score", "--run-dir", str(cli_run)]) == EXIT_OK
    captured = capsys.readouterr().out
    assert "A. Keys" in captured
    assert "Driving Score" in captured
    assert SCENARIO in captured


def test_score_json_output(cli_run, tmp_path):
    target = tmp_path / "tables.json"
    assert main(["score", "--run-dir", str(cli_run),
                 "--json", str(target)]) == EXIT_OK
    doc = json.loads(target.read_text())
    assert {"vqa", "planning", "flagged", "frames"} <= set(doc)
    assert doc["vqa"][0]["Scenario"] == SCENARIO


def test_report_writes_csv_and_figures(cli_run, tmp_path):
    out = tmp_path / "report"
    assert main(["report", "--run-dir", str(cli_run),
                 "--out", str(out)]) == EXIT_OK
    names = sorted(p.name for p in out.iterdir())
    assert "vqa_scores.csv" in names
    assert "planning_scores.csv" in names
    assert "report.json" in names
    pngs = [n for n in names if n.endswith(".png")]
    assert len(pngs) == 3
    for name in pngs:
        assert (out / name).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    header = (out / "planning_scores.csv").read_text().splitlines()[0]
    assert header.split(",")[:3] == ["Scenario", "Driving Score",
                                     "Success Rate"]


def test_annotate_subcommand(cli_run, tmp_path):
    out = tmp_path / "static"
    assert main(["annotate", "--in", str(cli_run),
                 "--out", str(out)]) == EXIT_OK
    assert (out / SCENARIO / "0000000.json").is_file()


def test_score_empty_dir_exits_3(tmp_path):
    assert main(["score", "--run-dir", str(tmp_path)]) == EXIT_EMPTY


def test_unknown_policy_exits_1(tmp_path, capsys):
    code = main(["run", "--scenario", SCENARIO, "--out", str(tmp_path),
                 "--policy", "banana"])
    assert code == EXIT_CONFIG
    assert "available" in capsys.readouterr().err


def test_unknown_scenario_exits_1(tmp_path):
    assert main(["run", "--scenario", "ghost",
                 "--out", str(tmp_path)]) == EXIT_CONFIG


def test_bad_interval_exits_1(tmp_path):
    assert main(["run", "--scenario", SCENARIO, "--out", str(tmp_path),
                 "--interval", "0"]) == EXIT_CONFIG


def test_no_command_prints_help(capsys):
    assert main([]) == EXIT_CONFIG
    assert "usage" in capsys.readouterr().out.lower()


def test_help_exits_ok():
    assert main(["--help"]) == EXIT_OK


def test_parse_opt_types():
    from lanebench.runner import ConfigError
    assert _parse_opt("rate=0.5") == ("rate", 0.5)
    assert _parse_opt("seed=3") == ("seed", 3)
    assert _parse_opt("flag=true") == ("flag", True)
    assert _parse_opt("name=gt") == ("name", "gt")
    with pytest.raises(ConfigError):
        _parse_opt("no-equals-sign")


def test_config_file_and_flag_precedence(tmp_path):
    import yaml
    cfg = tmp_path / "run.yaml"
    out_a = tmp_path / "a"
    cfg.write_text(yaml.safe_dump({
        "scenarios": [SCENARIO], "out_dir": str(out_a), "seed": 3,
        "tick_budget": 40}))
    out_b = tmp_path / "b"
    code = main(["run", "--config", str(cfg), "--out", str(out_b)])
    assert code == EXIT_OK
    assert not out_a.exists()  # the flag overrode the file
    manifest = json.loads((out_b / "run.json").read_text())
    assert manifest["seed"] == 3  # file value kept where no flag given


def test_env_overrides(tmp_path, monkeypatch):
    monkeypatch.setenv("LANEBENCH_SEED", "11")
    monkeypatch.setenv("LANEBENCH_TICK_BUDGET", "40")
    out = tmp_path / "env_run"
    assert main(["run", "--scenario", SCENARIO,
                 "--out", str(out)]) == EXIT_OK
    manifest = json.loads((out / "run.json").read_text())
    assert manifest["seed"] == 11


def test_env_bad_int_exits_1(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("LANEBENCH_SEED", "eleven")
    assert main(["run", "--scenario", SCENARIO,
                 "--out", str(tmp_path)]) == EXIT_CONFIG
