"""Question-dependency graph: parsing, scheduling, prompt assembly, execution.

A chain document declares which questions exist (NODE), which must be answered
before which within a frame (EDGE), which carry answers over from the previous
frame (INHERIT), and which are answered from ground truth instead of being sent
to the policy (USE_GT).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import yaml


class ChainError(Exception):
    """Base for chain configuration and execution failures."""


class ChainConfigError(ChainError):
    """Document references unknown questions or is structurally invalid."""


class CycleError(ChainError):
    """Dependency edges admit no valid answering order."""


class SequencingError(ChainError):
    """A prompt was requested before its prerequisites were answered."""


@dataclass(frozen=True)
class ChainConfig:
    nodes: tuple[int, ...]
    edges: dict[int, list[int]]
    inherit: dict[int, list[int]]
    use_gt: frozenset[int]

    def predecessors(self, qid: int) -> list[int]:
        return [u for u in self.nodes if qid in self.edges.get(u, ())]


@dataclass(frozen=True)
class Plan:
    order: tuple[int, ...]
    skip_inference: frozenset[int]


@dataclass
class FrameContext:
    """Answers visible to prompt assembly for one frame."""
    previous_answers: dict[int, str] = field(default_factory=dict)
    current_answers: dict[int, str] = field(default_factory=dict)
    frame_index: int = 0


def _as_qid(value: object, where: str) -> int:
    try:
        qid = int(value)  # type: ignore[arg-type]
    except (TypeError, ValueError):
        raise ChainConfigError(f"{where}: not a question id: {value!r}") from None
    return qid


def parse_chain(doc: dict) -> ChainConfig:
    """Validate a chain document (already-parsed mapping) into a ChainConfig."""
    if not isinstance(doc, dict):
        raise ChainConfigError("chain document must be a mapping")
    raw_nodes = doc.get("NODE")
    if not isinstance(raw_nodes, list) or not raw_nodes:
        raise ChainConfigError("NODE must be a non-empty list")
    nodes = tuple(_as_qid(n, "NODE") for n in raw_nodes)
    if len(set(nodes)) != len(nodes):
        raise ChainConfigError("NODE contains duplicates")
    known = set(nodes)

    edges: dict[int, list[int]] = {q: [] for q in nodes}
    for key, succs in (doc.get("EDGE") or {}).items():
        src = _as_qid(key, "EDGE")
        if src not in known:
            raise ChainConfigError(f"EDGE source {src} is not in NODE")
        if not isinstance(succs, list):
            raise ChainConfigError(f"EDGE[{src}] must be a list")
        for s in succs:
            dst = _as_qid(s, f"EDGE[{src}]")
            if dst not in known:
                raise ChainConfigError(f"EDGE {src}->{dst}: {dst} is not in NODE")
            edges[src].append(dst)

    inherit: dict[int, list[int]] = {}
    for key, sources in (doc.get("INHERIT") or {}).items():
        dst = _as_qid(key, "INHERIT")
        if dst not in known:
            raise ChainConfigError(f"INHERIT target {dst} is not in NODE")
        if not isinstance(sources, list):
            raise ChainConfigError(f"INHERIT[{dst}] must be a list")
        resolved = [_as_qid(s, f"INHERIT[{dst}]") for s in sources]
        for s in resolved:
            if s not in known:
                raise ChainConfigError(f"INHERIT {dst}<-{s}: {s} is not in NODE")
        inherit[dst] = resolved

    use_gt = frozenset(_as_qid(q, "USE_GT") for q in (doc.get("USE_GT") or []))
    if not use_gt <= known:
        missing = sorted(use_gt - known)
        raise ChainConfigError(f"USE_GT references unknown questions: {missing}")

    return ChainConfig(nodes=nodes, edges=edges, inherit=inherit, use_gt=use_gt)


def load_chain(source: str | Path | dict) -> ChainConfig:
    """Load a chain from a YAML file path or an in-memory mapping."""
    if isinstance(source, dict):
        return parse_chain(source)
    with open(source, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise ChainConfigError(f"chain file {source} did not parse to a mapping")
    return parse_chain(doc)


def default_chain_path() -> Path:
    return Path(__file__).parent / "chains" / "default.yaml"


def plan(cfg: ChainConfig) -> Plan:
    """Deterministic topological order: among ready questions, NODE order wins."""
    indegree = {q: 0 for q in cfg.nodes}
    for succs in cfg.edges.values():
        for v in succs:
            indegree[v] += 1
    priority = {q: i for i, q in enumerate(cfg.nodes)}
    ready = sorted((q for q in cfg.nodes if indegree[q] == 0), key=priority.get)
    order: list[int] = []
    while ready:
        q = ready.pop(0)
        order.append(q)
        newly = []
        for v in cfg.edges.get(q, ()):
            indegree[v] -= 1
            if indegree[v] == 0:
                newly.append(v)
        if newly:
            ready = sorted(ready + newly, key=priority.get)
    if len(order) != len(cfg.nodes):
        stuck = sorted(q for q in cfg.nodes if q not in order)
        raise CycleError(f"dependency cycle involving questions {stuck}")
    return Plan(order=tuple(order), skip_inference=cfg.use_gt)


def build_prompt(cfg: ChainConfig, ctx: FrameContext, qid: int, question: str,
                 scene_text: str, answer_kind: str = "free-text") -> str:
    """Assemble the prompt for one question.

    Layout: scene inputs, then context remembered from the previous frame (only
    for questions configured to inherit, only when such answers exist), then
    answers already given for this frame by dependency predecessors, then the
    question itself, optionally with a trailing key-value format instruction.
    """
    if qid not in cfg.nodes:
        raise ChainConfigError(f"question {qid} is not part of this chain")
    preds = cfg.predecessors(qid)
    missing = [p for p in preds if p not in ctx.current_answers]
    if missing:
        raise SequencingError(
            f"question {qid} needs answers for {missing} before it can be asked")

    parts: list[str] = ["Scene inputs:", "", scene_text.rstrip(), ""]

    inherited = [(src, ctx.previous_answers[src])
                 for src in cfg.inherit.get(qid, [])
                 if src in ctx.previous_answers]
    if inherited:
        parts.append("Context remembered from the previous frame:")
        for src, text in inherited:
            parts.append(f"- Q{src}: {text}")
        parts.append("")

    if preds:
        parts.append("Answers already given for this frame:")
        for p in preds:
            parts.append(f"- Q{p}: {ctx.current_answers[p]}")
        parts.append("")

    parts.append(f"Question: {question}")
    if answer_kind == "key-value":
        parts.append("End your answer with exactly one direction key and one "
                     "speed key, separated by a comma.")
    return "\n".join(parts)


def execute_frame(cfg: ChainConfig, schedule: Plan, ctx: FrameContext,
                  questions: dict[int, str], scene_text: str,
                  infer: Callable[[int, str], str],
                  gt_answers: dict[int, str],
                  answer_kinds: dict[int, str] | None = None) -> dict[int, str]:
    """Ask every question in schedule order, filling ctx.current_answers.

    Questions marked skip_inference take their ground-truth answer directly;
    everything else goes through `infer(qid, prompt)`.
    """
    kinds = answer_kinds or {}
    ctx.current_answers = {}
    for qid in schedule.order:
        if qid in schedule.skip_inference:
            if qid not in gt_answers:
                raise SequencingError(
                    f"question {qid} is answered from ground truth but none was provided")
            ctx.current_answers[qid] = gt_answers[qid]
            continue
        prompt = build_prompt(cfg, ctx, qid, questions[qid], scene_text,
                              answer_kind=kinds.get(qid, "free-text"))
        ctx.current_answers[qid] = infer(qid, prompt)
    return dict(ctx.current_answers)
