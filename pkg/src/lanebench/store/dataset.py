"""Filesystem dataset store: frame records, edit history, interval metadata.

Layout under the dataset root:
    <scenario>/<frame_index:07d>.json   one FrameRecord per stored frame
    <scenario>/history.jsonl            append-only EditRecord log
    <scenario>/meta.json                entry/exit frame interval
    options.json                        per-qid common answer options (global)
Images are PNG files beside the frame records they belong to.
"""
from __future__ import annotations

import json
import re
import time
from pathlib import Path

from ..expert.questions import QAPair
from .records import (EditRecord, FrameNotFoundError, FrameRecord, StoreError,
                      StoreValidationError, check_transition)

_FRAME_FILE_RE = re.compile(r"^(\d{7})\.json$")
PAD_WIDTH = 7


def frame_file_name(frame_index: int) -> str:
    return f"{frame_index:0{PAD_WIDTH}d}.json"


class DatasetStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)

    # -- paths ------------------------------------------------------------

    def scenario_dir(self, scenario: str) -> Path:
        return self.root / scenario

    def frame_path(self, scenario: str, frame_index: int) -> Path:
        return self.scenario_dir(scenario) / frame_file_name(frame_index)

    def history_path(self, scenario: str) -> Path:
        return self.scenario_dir(scenario) / "history.jsonl"

    def meta_path(self, scenario: str) -> Path:
        return self.scenario_dir(scenario) / "meta.json"

    # -- enumeration --------------------------------------------------------

    def scenario_names(self) -> list[str]:
        if not self.root.is_dir():
            return []
        names = []
        for child in sorted(self.root.iterdir()):
            if child.is_dir() and (any(_FRAME_FILE_RE.match(p.name)
                                       for p in child.iterdir())
                                   or (child / "meta.json").exists()):
                names.append(child.name)
        return names

    def frame_indices(self, scenario: str) -> list[int]:
        folder = self.scenario_dir(scenario)
        if not folder.is_dir():
            return []
        indices = []
        for child in folder.iterdir():
            match = _FRAME_FILE_RE.match(child.name)
            if match:
                indices.append(int(match.group(1)))
        return sorted(indices)

    # -- frame records -------------------------------------------------------

    def write_frame(self, record: FrameRecord) -> list[EditRecord]:
        """Persist the record; archive changed answers to history.

        A rewrite with identical content is a no-op and appends nothing.
        Returns the edit records appended (empty for first writes).
        """
        path = self.frame_path(record.scenario, record.frame_index)
        path.parent.mkdir(parents=True, exist_ok=True)
        new_doc = record.to_dict()
        edits: list[EditRecord] = []
        if path.exists():
            old_doc = json.loads(path.read_text(encoding="utf-8"))
            if old_doc == new_doc:
                return []
            edits = _diff_answers(old_doc, new_doc, record.scenario,
                                  record.frame_index)
            for edit in edits:
                self._append_history(record.scenario, edit)
        _write_json(path, new_doc)
        return edits

    def read_frame(self, scenario: str, frame_index: int) -> FrameRecord:
        path = self.frame_path(scenario, frame_index)
        if not path.exists():
            raise FrameNotFoundError(
                f"no stored frame {frame_index} for scenario {scenario!r}")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise StoreValidationError(f"unreadable JSON: {exc}") from exc
        return FrameRecord.from_dict(doc)

    # -- edits and status ------------------------------------------------------

    def edit_answer(self, scenario: str, frame_index: int, qid: int,
                    new_text: str, mark: str | None = None) -> EditRecord | None:
        """Replace a ground-truth answer; log the change; optionally re-mark.

        Returns the appended EditRecord, or None when nothing changed.
        """
        record = self.read_frame(scenario, frame_index)
        pair = record.qa(qid)
        old_text = pair.gt_answer_text
        changed = old_text != new_text
        marked = False
        if mark is not None:
            check_transition(record.status, mark)
            marked = mark == "controversial"
            record.status = mark
        if not changed and mark is None:
            return None
        pair.gt_answer_text = new_text
        _write_json(self.frame_path(scenario, frame_index), record.to_dict())
        edit = EditRecord(scenario=scenario, frame_index=frame_index, qid=qid,
                          old_value=old_text, new_value=new_text,
                          timestamp=time.time(), marked_controversial=marked)
        self._append_history(scenario, edit)
        return edit

    def mark_status(self, scenario: str, frame_index: int, status: str) -> FrameRecord:
        record = self.read_frame(scenario, frame_index)
        check_transition(record.status, status)
        record.status = status
        _write_json(self.frame_path(scenario, frame_index), record.to_dict())
        return record

    def set_policy_answer(self, scenario: str, frame_index: int, qid: int,
                          text: str) -> None:
        record = self.read_frame(scenario, frame_index)
        record.policy_answers[qid] = text
        _write_json(self.frame_path(scenario, frame_index), record.to_dict())

    # -- history -----------------------------------------------------------

    def _append_history(self, scenario: str, edit: EditRecord) -> None:
        path = self.history_path(scenario)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(edit.to_dict(), sort_keys=True) + "\n")

    def history(self, scenario: str, frame_index: int | None = None,
                qid: int | None = None) -> list[EditRecord]:
        path = self.history_path(scenario)
        if not path.exists():
            return []
        records = []
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            record = EditRecord.from_dict(json.loads(line))
            if frame_index is not None and record.frame_index != frame_index:
                continue
            if qid is not None and record.qid != qid:
                continue
            records.append(record)
        return records

    # -- interval metadata -----------------------------------------------------

    def interval(self, scenario: str) -> tuple[int, int]:
        """Effective [entry, exit) interval; defaults to all stored frames."""
        path = self.meta_path(scenario)
        if path.exists():
            doc = json.loads(path.read_text(encoding="utf-8"))
            return int(doc["entry_frame"]), int(doc["exit_frame"])
        indices = self.frame_indices(scenario)
        if not indices:
            return 0, 0
        return indices[0], indices[-1] + 1

    def set_interval(self, scenario: str, entry_frame: int, exit_frame: int) -> None:
        if entry_frame > exit_frame:
            raise StoreError(
                f"entry frame {entry_frame} exceeds exit frame {exit_frame}")
        _write_json(self.meta_path(scenario),
                    {"entry_frame": entry_frame, "exit_frame": exit_frame})

    def in_interval(self, scenario: str, frame_index: int) -> bool:
        entry, exit_ = self.interval(scenario)
        return entry <= frame_index < exit_

    # -- aggregation -----------------------------------------------------------

    def overview(self) -> dict[str, dict]:
        """Per-scenario status counts over frames inside the interval."""
        summary: dict[str, dict] = {}
        for scenario in self.scenario_names():
            entry, exit_ = self.interval(scenario)
            counts = {"raw": 0, "controversial": 0, "verified": 0}
            stored = self.frame_indices(scenario)
            excluded = 0
            unreadable = 0
            for idx in stored:
                if not entry <= idx < exit_:
                    excluded += 1
                    continue
                try:
                    record = self.read_frame(scenario, idx)
                except StoreError:
                    unreadable += 1
                    continue
                counts[record.status] = counts.get(record.status, 0) + 1
            summary[scenario] = {
                "entry_frame": entry,
                "exit_frame": exit_,
                "stored": len(stored),
                "excluded": excluded,
                "unreadable": unreadable,
                **counts,
            }
        return summary

    def filter_qas(self, scenario: str,
                   frame_range: tuple[int | None, int | None] | None = None,
                   qids: set[int] | None = None,
                   keyword: str | None = None) -> list[tuple[int, QAPair]]:
        """QA pairs matching every given filter; blank filters match all."""
        lo, hi = frame_range if frame_range is not None else (None, None)
        needle = keyword.lower() if keyword else None
        matches: list[tuple[int, QAPair]] = []
        for idx in self.frame_indices(scenario):
            if lo is not None and idx < lo:
                continue
            if hi is not None and idx > hi:
                continue
            try:
                record = self.read_frame(scenario, idx)
            except StoreError:
                continue
            for pair in record.qa_pairs:
                if qids and pair.qid not in qids:
                    continue
                if needle and needle not in pair.question_text.lower() \
                        and needle not in pair.gt_answer_text.lower():
                    continue
                matches.append((idx, pair))
        return matches

    # -- common options -------------------------------------------------------

    def _options_path(self) -> Path:
        return self.root / "options.json"

    def all_options(self) -> dict[int, list[str]]:
        path = self._options_path()
        if not path.exists():
            return {}
        doc = json.loads(path.read_text(encoding="utf-8"))
        return {int(qid): list(texts) for qid, texts in doc.items()}

    def options(self, qid: int) -> list[str]:
        return self.all_options().get(qid, [])

    def add_option(self, qid: int, text: str) -> list[str]:
        """Append to the qid's common option list; duplicates are kept once."""
        everything = self.all_options()
        texts = everything.setdefault(qid, [])
        if text not in texts:
            texts.append(text)
        self.root.mkdir(parents=True, exist_ok=True)
        _write_json(self._options_path(),
                    {str(qid): items for qid, items in sorted(everything.items())})
        return texts


def _diff_answers(old_doc: dict, new_doc: dict, scenario: str,
                  frame_index: int) -> list[EditRecord]:
    """Edit records for every qid whose GT or policy answer text changed."""
    now = time.time()
    edits: list[EditRecord] = []
    old_gt = {int(p["qid"]): p.get("answer", "") for p in old_doc.get("qa_pairs", [])}
    new_gt = {int(p["qid"]): p.get("answer", "") for p in new_doc.get("qa_pairs", [])}
    for qid in sorted(set(old_gt) | set(new_gt)):
        before, after = old_gt.get(qid, ""), new_gt.get(qid, "")
        if before != after:
            edits.append(EditRecord(scenario, frame_index, qid, before, after, now))
    old_pol = old_doc.get("policy_answers", {})
    new_pol = new_doc.get("policy_answers", {})
    for key in sorted(set(old_pol) | set(new_pol), key=int):
        before, after = old_pol.get(key, ""), new_pol.get(key, "")
        if before != after:
            edits.append(EditRecord(scenario, frame_index, int(key), before, after, now))
    return edits


def _write_json(path: Path, doc) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")
