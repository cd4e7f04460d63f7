"""Closed-loop episode execution, static re-annotation, offline scoring.

The loop interleaves three strands at every intervention tick: the expert
annotates the live state (ground truth), the policy answers the question
chain over the same state, and the action pipeline turns the policy's final
keys into waypoints and pedal work. Between interventions the last plan is
held with the speed key re-applied. Everything lands in a DatasetStore so
scoring is a separate, read-only pass.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from shapely.geometry import Polygon

from .action import ActionPipeline, extract_keys, resolve_defaults
from .chain import (ChainConfig, FrameContext, default_chain_path,
                    execute_frame, load_chain, plan)
from .expert import annotate_frame
from .expert.questions import MANDATED_QIDS, QAPair, question
from .metrics import (EfficiencySample, EpisodeLog, InfractionEvent,
                      compute_report)
from .policy import (GTEchoPolicy, PolicyRequest, RemotePolicy, create_policy,
                     encode_image_inline, ImagePayload)
from .scoring import (COLUMN_BY_QID, DeterministicJudge, REPORT_COLUMNS,
                      ScoreBreakdown, ScoreWeights, score_answer)
from .store import DatasetStore, FrameRecord, StoreError
from .world import (RenderOptions, WorldState, effective_speed_limit, footprint,
                    load_scenario, nearest_waypoint, refresh_derived,
                    render_bev_png, render_text, route_length, route_progress,
                    step, world_from_dict, world_to_dict)
from .world.perception import relevant_actors

ANNOTATED_QIDS = MANDATED_QIDS + (37,)
COMPLETION_WINDOW_M = 2.5
CHECKPOINT_INTERVAL = 10
TRAIL_INTERVAL = 5
OFF_ROUTE_GRACE_TICKS = 50
MOVING_TRAFFIC_FLOOR = 0.5

PLANNING_COLUMNS = ("Driving Score", "Success Rate", "Efficiency", "Comfortness")


class RunnerError(RuntimeError):
    pass


class ConfigError(RunnerError):
    pass


class EmptyRunError(RunnerError):
    pass


@dataclass
class RunConfig:
    scenarios: list[str]
    out_dir: str
    policy: str = "gt-echo"
    policy_url: str | None = None
    policy_options: dict = field(default_factory=dict)
    chain_path: str | None = None
    input_modes: tuple[str, ...] = ("bev", "text")
    image_mode: str = "path"
    intervention_interval: int = 5
    tick_budget: int | None = None
    seed: int = 0
    weights: ScoreWeights = field(default_factory=ScoreWeights)

    def validate(self) -> None:
        if not self.scenarios:
            raise ConfigError("no scenarios configured")
        if not self.out_dir:
            raise ConfigError("no output directory configured")
        if self.intervention_interval < 1:
            raise ConfigError("intervention interval must be >= 1")
        bad = [m for m in self.input_modes if m not in ("bev", "text")]
        if bad or not self.input_modes:
            raise ConfigError(f"input modes must be a non-empty subset of "
                              f"('bev', 'text'); got {self.input_modes!r}")
        if self.image_mode not in ("path", "inline"):
            raise ConfigError(f"image mode must be 'path' or 'inline', "
                              f"got {self.image_mode!r}")

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        known = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        kwargs = dict(doc)
        if "input_modes" in kwargs:
            kwargs["input_modes"] = tuple(kwargs["input_modes"])
        if "weights" in kwargs and isinstance(kwargs["weights"], dict):
            kwargs["weights"] = ScoreWeights(**kwargs["weights"])
        config = cls(**kwargs)
        config.validate()
        return config


def _resolve_policy(config: RunConfig):
    if config.policy_url:
        return RemotePolicy(config.policy_url)
    options = dict(config.policy_options)
    if config.policy == "noisy-gt":
        options.setdefault("seed", config.seed)
    return create_policy(config.policy, **options)


def _load_chain(config: RunConfig) -> ChainConfig:
    return load_chain(config.chain_path or default_chain_path())


def _reference_speed(world: WorldState) -> tuple[float, bool]:
    """Checkpoint reference: nearby moving traffic mean, else the lane limit."""
    moving = [a.speed for a in relevant_actors(world, kinds=("vehicle", "bicycle"))
              if a.speed > MOVING_TRAFFIC_FLOOR]
    if moving:
        return sum(moving) / len(moving), True
    limit = effective_speed_limit(world)
    if limit is not None:
        return limit, False
    return world.meta.target_cruise, False


def _crossing_infractions(before: WorldState, after: WorldState,
                          tick: int) -> list[InfractionEvent]:
    prior = {c.id: c for c in before.controls}
    events = []
    for control in after.controls:
        was = prior.get(control.id)
        if was is None or was.crossed or not control.crossed:
            continue
        if control.kind == "traffic-light" and control.state == "red":
            events.append(InfractionEvent("red-light", tick,
                                          f"crossed {control.id} on red"))
        elif control.kind == "stop-sign" and not control.satisfied:
            events.append(InfractionEvent(
                "stop-sign", tick, f"crossed {control.id} without stopping"))
    return events


class _CollisionTracker:
    """Rising-edge collision events: one per actor per contact episode."""

    def __init__(self) -> None:
        self._touching: set[str] = set()

    def update(self, world: WorldState, tick: int) -> list[InfractionEvent]:
        ego_poly = Polygon(footprint(world.ego.pose, world.ego.length,
                                     world.ego.width))
        events = []
        now = set()
        for actor in world.actors:
            poly = Polygon(footprint(actor.pose, actor.length, actor.width))
            if ego_poly.intersects(poly) and ego_poly.intersection(poly).area > 1e-9:
                now.add(actor.id)
                if actor.id not in self._touching:
                    events.append(InfractionEvent(
                        "collision", tick, f"overlap with {actor.id}"))
        self._touching = now
        return events


def run_episode(config: RunConfig, scenario: str, policy=None,
                chain_cfg: ChainConfig | None = None) -> EpisodeLog:
    """Drive one scenario closed-loop and persist every intervention frame."""
    policy = policy if policy is not None else _resolve_policy(config)
    chain_cfg = chain_cfg if chain_cfg is not None else _load_chain(config)
    schedule = plan(chain_cfg)
    questions = {qid: question(qid).template for qid in chain_cfg.nodes}
    kinds = {qid: question(qid).answer_kind for qid in chain_cfg.nodes}

    world = load_scenario(scenario, seed=config.seed)
    refresh_derived(world)
    total = route_length(world)
    budget = config.tick_budget if config.tick_budget is not None \
        else world.meta.tick_budget

    store = DatasetStore(config.out_dir)
    pipe = ActionPipeline()
    ctx = FrameContext()
    tracker = _CollisionTracker()
    episode_id = f"{scenario}:{config.seed}"
    gt_table = policy.table if isinstance(policy, GTEchoPolicy) else None

    log = EpisodeLog(scenario=scenario, seed=config.seed, episode_id=episode_id)
    trails: dict[str, list] = {}
    off_route_ticks = 0
    reached = False

    tick = 0
    while tick < budget:
        if tick % TRAIL_INTERVAL == 0:
            trails.setdefault("ego", []).append(world.ego.pose.xy)
            for actor in world.actors:
                trails.setdefault(actor.id, []).append(actor.pose.xy)
        if tick % config.intervention_interval == 0:
            _run_intervention(config, store, world, scenario, tick, episode_id,
                              policy, gt_table, chain_cfg, schedule, ctx,
                              questions, kinds, pipe, trails)
        log.ego_speeds.append(world.ego.speed)
        if tick % CHECKPOINT_INTERVAL == 0:
            reference, has_traffic = _reference_speed(world)
            log.checkpoints.append(EfficiencySample(
                frame_index=tick, ego_speed=world.ego.speed,
                reference_speed=reference, has_traffic=has_traffic))
            if has_traffic:
                log.traffic_speed_samples.append(reference)

        signal = pipe.tick(world)
        after = step(world, signal)
        refresh_derived(after)
        log.infractions.extend(tracker.update(after, tick))
        log.infractions.extend(_crossing_infractions(world, after, tick))
        world = after
        tick += 1

        if route_progress(world) >= total - COMPLETION_WINDOW_M:
            reached = True
            break
        if nearest_waypoint(world, world.ego.pose.xy) is None:
            off_route_ticks += 1
            if off_route_ticks >= OFF_ROUTE_GRACE_TICKS:
                log.infractions.append(InfractionEvent(
                    "off-route-termination", tick,
                    "no lane within reach; episode abandoned"))
                break
        else:
            off_route_ticks = 0

    log.ego_speeds.append(world.ego.speed)
    if reached:
        log.route_completion = 1.0
        log.terminated = "completion"
    elif any(e.kind == "off-route-termination" for e in log.infractions):
        log.route_completion = min(max(route_progress(world) / total, 0.0), 1.0)
        log.terminated = "blocked"
    else:
        log.infractions.append(InfractionEvent("timeout", tick,
                                               f"budget of {budget} ticks spent"))
        log.route_completion = min(max(route_progress(world) / total, 0.0), 1.0)
        log.terminated = "timeout"

    folder = store.scenario_dir(scenario)
    folder.mkdir(parents=True, exist_ok=True)
    (folder / "episode.json").write_text(
        json.dumps(log.to_dict(), indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    return log


def _run_intervention(config: RunConfig, store: DatasetStore,
                      world: WorldState, scenario: str, tick: int,
                      episode_id: str, policy, gt_table, chain_cfg: ChainConfig,
                      schedule, ctx: FrameContext, questions: dict[int, str],
                      kinds: dict[int, str], pipe: ActionPipeline,
                      trails: dict) -> None:
    qa_pairs = annotate_frame(world, ANNOTATED_QIDS)
    for pair in qa_pairs:
        pair.frame_index = tick
    gt_answers = {pair.qid: pair.gt_answer_text for pair in qa_pairs}
    if gt_table is not None:
        for pair in qa_pairs:
            gt_table.put(episode_id, tick, pair.qid, pair.gt_answer_text)

    images: list[str] = []
    payloads: list[ImagePayload] = []
    folder = store.scenario_dir(scenario)
    if "bev" in config.input_modes:
        folder.mkdir(parents=True, exist_ok=True)
        plain = render_bev_png(world, RenderOptions(draw_trails=False))
        with_trails = render_bev_png(
            world, RenderOptions(trails={k: list(v) for k, v in trails.items()}))
        for suffix, data in (("bev", plain), ("trails", with_trails)):
            name = f"{tick:07d}.{suffix}.png"
            (folder / name).write_bytes(data)
            images.append(name)
        if config.image_mode == "inline":
            payloads.append(encode_image_inline(plain))
        else:
            payloads.append(ImagePayload(mode="path",
                                         path=str(folder / images[0])))
    scene_text = render_text(world) if "text" in config.input_modes \
        else "(image input only)"

    def infer(qid: int, prompt: str) -> str:
        request = PolicyRequest(episode_id=episode_id, frame_index=tick,
                                qid=qid, prompt=prompt,
                                images=tuple(payloads),
                                answer_kind=kinds.get(qid, "free-text"))
        return policy.answer(request).answer

    ctx.frame_index = tick
    answers = execute_frame(chain_cfg, schedule, ctx, questions, scene_text,
                            infer, gt_answers, kinds)
    ctx.previous_answers = dict(answers)

    keys = resolve_defaults(extract_keys(answers[50]), world)
    pipe.on_intervention(keys, world)

    record = FrameRecord(
        scenario=scenario, frame_index=tick, qa_pairs=qa_pairs,
        policy_answers=dict(answers), images=images, status="raw",
        extras={"world": world_to_dict(world)})
    store.write_frame(record)


def run(config: RunConfig) -> list[EpisodeLog]:
    """All configured scenarios, one shared policy and chain."""
    config.validate()
    policy = _resolve_policy(config)
    chain_cfg = _load_chain(config)
    logs = []
    for scenario in config.scenarios:
        logs.append(run_episode(config, scenario, policy=policy,
                                chain_cfg=chain_cfg))
    manifest = {
        "scenarios": list(config.scenarios),
        "policy": config.policy if not config.policy_url else config.policy_url,
        "seed": config.seed,
        "intervention_interval": config.intervention_interval,
        "input_modes": list(config.input_modes),
        "image_mode": config.image_mode,
    }
    root = Path(config.out_dir)
    root.mkdir(parents=True, exist_ok=True)
    (root / "run.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return logs


# -- static annotation ---------------------------------------------------------


def annotate_static(in_dir: str | Path, out_dir: str | Path,
                    qids: tuple[int, ...] = ANNOTATED_QIDS) -> tuple[int, list[str]]:
    """Re-annotate stored world snapshots; identical output format to the loop.

    Returns (frames annotated, warnings for skipped frames).
    """
    source = DatasetStore(in_dir)
    target = DatasetStore(out_dir)
    annotated = 0
    warnings: list[str] = []
    for scenario in source.scenario_names():
        for idx in source.frame_indices(scenario):
            try:
                record = source.read_frame(scenario, idx)
                snapshot = record.extras.get("world")
                if snapshot is None:
                    raise StoreError("record carries no world snapshot")
                world = world_from_dict(snapshot)
            except (StoreError, KeyError, TypeError, ValueError) as exc:
                warnings.append(f"{scenario}/{idx:07d}: skipped ({exc})")
                continue
            refresh_derived(world)
            qa_pairs = annotate_frame(world, qids)
            for pair in qa_pairs:
                pair.frame_index = idx
            images: list[str] = []
            folder = target.scenario_dir(scenario)
            folder.mkdir(parents=True, exist_ok=True)
            name = f"{idx:07d}.bev.png"
            (folder / name).write_bytes(
                render_bev_png(world, RenderOptions(draw_trails=False)))
            images.append(name)
            target.write_frame(FrameRecord(
                scenario=scenario, frame_index=idx, qa_pairs=qa_pairs,
                policy_answers={}, images=images, status="raw",
                extras={"world": world_to_dict(world)}))
            annotated += 1
    if warnings:
        root = Path(out_dir)
        root.mkdir(parents=True, exist_ok=True)
        (root / "warnings.json").write_text(
            json.dumps({"warnings": warnings}, indent=2) + "\n",
            encoding="utf-8")
    return annotated, warnings


# -- offline scoring ------------------------------------------------------------


@dataclass
class ScoreTables:
    """Aggregates in the shapes of the two report tables."""
    vqa_rows: list[dict]
    planning_rows: list[dict]
    flagged: list[dict]
    frame_scores: list[dict]

    def to_dict(self) -> dict:
        return {"vqa": self.vqa_rows, "planning": self.planning_rows,
                "flagged": self.flagged, "frames": self.frame_scores}


def score_run(run_dir: str | Path,
              weights: ScoreWeights | None = None) -> ScoreTables:
    """Read-only scoring pass over a stored run directory."""
    store = DatasetStore(run_dir)
    weights = weights or ScoreWeights()
    judge = DeterministicJudge()
    scenarios = store.scenario_names()
    if not scenarios:
        raise EmptyRunError(f"no stored scenarios under {run_dir}")

    vqa_rows: list[dict] = []
    planning_rows: list[dict] = []
    flagged: list[dict] = []
    frame_scores: list[dict] = []
    column_sums: dict[str, list[float]] = {c: [] for c in REPORT_COLUMNS}
    planning_sums: dict[str, list[float]] = {c: [] for c in PLANNING_COLUMNS}
    any_frames = False

    for scenario in scenarios:
        per_column: dict[str, list[float]] = {c: [] for c in REPORT_COLUMNS}
        for idx in store.frame_indices(scenario):
            if not store.in_interval(scenario, idx):
                continue
            try:
                record = store.read_frame(scenario, idx)
            except StoreError as exc:
                flagged.append({"scenario": scenario, "frame_index": idx,
                                "reason": f"unreadable: {exc}"})
                continue
            any_frames = True
            gt_by_qid = {pair.qid: pair for pair in record.qa_pairs}
            for qid, answer in sorted(record.policy_answers.items()):
                gt = gt_by_qid.get(qid)
                if gt is None:
                    flagged.append({"scenario": scenario, "frame_index": idx,
                                    "qid": qid, "reason": "missing ground truth"})
                    continue
                breakdown = score_answer(qid, answer, gt.to_dict(), weights,
                                         judge=judge)
                frame_scores.append({
                    "scenario": scenario, "frame_index": idx, "qid": qid,
                    "score": breakdown.final, "reported": breakdown.reported,
                })
                column = COLUMN_BY_QID.get(qid)
                if column is not None:
                    per_column[column].append(breakdown.final)
        row: dict = {"Scenario": scenario}
        for column in REPORT_COLUMNS:
            values = per_column[column]
            row[column] = round(100.0 * sum(values) / len(values), 2) \
                if values else None
            column_sums[column].extend(values)
        vqa_rows.append(row)

        episode_path = store.scenario_dir(scenario) / "episode.json"
        if episode_path.exists():
            log = EpisodeLog.from_dict(
                json.loads(episode_path.read_text(encoding="utf-8")))
            report = compute_report(log)
            prow = {
                "Scenario": scenario,
                "Driving Score": round(report.driving_score, 2),
                "Success Rate": 100.0 if report.success else 0.0,
                "Efficiency": round(report.efficiency, 2),
                "Comfortness": round(report.comfort, 2),
            }
            planning_rows.append(prow)
            for column in PLANNING_COLUMNS:
                planning_sums[column].append(prow[column])

    if not any_frames:
        raise EmptyRunError(f"no stored frames under {run_dir}")

    overall: dict = {"Scenario": "Overall"}
    for column in REPORT_COLUMNS:
        values = column_sums[column]
        overall[column] = round(100.0 * sum(values) / len(values), 2) \
            if values else None
    vqa_rows.append(overall)
    if planning_rows:
        mean_row: dict = {"Scenario": "Overall"}
        for column in PLANNING_COLUMNS:
            values = planning_sums[column]
            mean_row[column] = round(sum(values) / len(values), 2)
        planning_rows.append(mean_row)
    return ScoreTables(vqa_rows=vqa_rows, planning_rows=planning_rows,
                       flagged=flagged, frame_scores=frame_scores)
