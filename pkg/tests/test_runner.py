from __future__ import annotations

import json
from pathlib import Path

import pytest

from lanebench.policy import GTEchoPolicy
from lanebench.runner import (ANNOTATED_QIDS, PLANNING_COLUMNS, ConfigError,
                              EmptyRunError, RunConfig, annotate_static, run,
                              run_episode, score_run)
from lanebench.scoring.rubric import REPORT_COLUMNS
from lanebench.store import DatasetStore

SCENARIO = "invading_turn"  # the shortest builtin episode


@pytest.fixture(scope="module")
def gt_run(tmp_path_factory) -> Path:
    out = tmp_path_factory.mktemp("run")
    config = RunConfig(scenarios=[SCENARIO], out_dir=str(out), seed=7)
    logs = run(config)
    assert len(logs) == 1
    return out


def test_gt_echo_completes_cleanly(gt_run):
    log_doc = json.loads((gt_run / SCENARIO / "episode.json").read_text())
    assert log_doc["route_completion"] == pytest.approx(1.0)
    assert log_doc["infractions"] == []
    assert log_doc["terminated"] == "completion"


def test_run_writes_manifest(gt_run):
    manifest = json.loads((gt_run / "run.json").read_text())
    assert manifest["scenarios"] == [SCENARIO]
    assert manifest["policy"] == "gt-echo"
    assert manifest["seed"] == 7


def test_frames_carry_all_questions_and_images(gt_run):
    store = DatasetStore(gt_run)
    indices = store.frame_indices(SCENARIO)
    assert indices and indices[0] == 0
    assert indices == sorted(indices)
    record = store.read_frame(SCENARIO, 0)
    assert [p.qid for p in record.qa_pairs] == list(ANNOTATED_QIDS)
    assert len(record.images) == 2
    for name in record.images:
        assert (gt_run / SCENARIO / name).is_file()
    # every chain answer was recorded, including the ground-truth-fed one;
    # the weather question is annotation-only and never reaches the policy
    from lanebench.expert.questions import MANDATED_QIDS
    assert set(record.policy_answers) == set(MANDATED_QIDS)
    assert 37 not in record.policy_answers


def test_gt_reuse_questions_skip_the_policy():
    calls: list[int] = []

    class Counting(GTEchoPolicy):
        def answer(self, request):
            calls.append(request.qid)
            return super().answer(request)

    out = Path(__file__).with_name("_tmp_counting_run")
    import shutil
    shutil.rmtree(out, ignore_errors=True)
    try:
        config = RunConfig(scenarios=[SCENARIO], out_dir=str(out), seed=7)
        run_episode(config, SCENARIO, policy=Counting())
        assert calls, "the policy served the other questions"
        assert 24 not in calls
    finally:
        shutil.rmtree(out, ignore_errors=True)


def test_score_run_shapes(gt_run):
    tables = score_run(gt_run)
    assert [row["Scenario"] for row in tables.vqa_rows] == [SCENARIO, "Overall"]
    for row in tables.vqa_rows:
        for column in REPORT_COLUMNS:
            assert row[column] == pytest.approx(100.0)
    assert [row["Scenario"] for row in tables.planning_rows] == [SCENARIO,
                                                                 "Overall"]
    row = tables.planning_rows[0]
    assert row["Driving Score"] == pytest.approx(100.0)
    assert row["Success Rate"] == pytest.approx(100.0)
    assert set(PLANNING_COLUMNS) <= set(row)
    assert tables.flagged == []
    assert tables.frame_scores


def test_score_run_json_round_trip(gt_run):
    doc = score_run(gt_run).to_dict()
    assert json.loads(json.dumps(doc)) == doc


def test_score_empty_run(tmp_path):
    with pytest.raises(EmptyRunError):
        score_run(tmp_path)


def test_interval_trim_changes_scoring(gt_run, tmp_path):
    import shutil
    trimmed = tmp_path / "trimmed"
    shutil.copytree(gt_run, trimmed)
    store = DatasetStore(trimmed)
    indices = store.frame_indices(SCENARIO)
    store.set_interval(SCENARIO, indices[2], indices[-1] + 1)
    tables = score_run(trimmed)
    kept = {row["frame_index"] for row in tables.frame_scores}
    assert min(kept) == indices[2]


def test_annotate_static_matches_closed_loop(gt_run, tmp_path):
    out = tmp_path / "static"
    count, warnings = annotate_static(gt_run, out)
    assert warnings == []
    src = DatasetStore(gt_run)
    dst = DatasetStore(out)
    indices = src.frame_indices(SCENARIO)
    assert count == len(indices)
    assert dst.frame_indices(SCENARIO) == indices
    for idx in indices:
        a = src.read_frame(SCENARIO, idx)
        b = dst.read_frame(SCENARIO, idx)
        for qid in ANNOTATED_QIDS:
            assert a.qa(qid).gt_answer_text == b.qa(qid).gt_answer_text, (idx,
                                                                          qid)


def test_annotate_static_skips_corrupt_frames(gt_run, tmp_path):
    import shutil
    broken = tmp_path / "broken"
    shutil.copytree(gt_run, broken)
    victim = sorted((broken / SCENARIO).glob("0*.json"))[0]
    victim.write_text("{nope")
    out = tmp_path / "static"
    count, warnings = annotate_static(broken, out)
    assert len(warnings) == 1
    assert "skipped" in warnings[0]
    assert count == len(DatasetStore(gt_run).frame_indices(SCENARIO)) - 1
    doc = json.loads((out / "warnings.json").read_text())
    assert doc["warnings"] == warnings


def test_config_validation():
    with pytest.raises(ConfigError):
        RunConfig(scenarios=[], out_dir="x").validate()
    with pytest.raises(ConfigError):
        RunConfig(scenarios=["a"], out_dir="x",
                  input_modes=("sonar",)).validate()
    with pytest.raises(ConfigError):
        RunConfig(scenarios=["a"], out_dir="x", image_mode="carrier-pigeon").validate()
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"scenarios": ["a"], "out_dir": "x",
                             "surprise": 1})


def test_unknown_scenario_fails_cleanly(tmp_path):
    from lanebench.world import ScenarioError
    config = RunConfig(scenarios=["nonexistent"], out_dir=str(tmp_path))
    with pytest.raises(ScenarioError):
        run(config)
