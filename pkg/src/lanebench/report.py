"""Report rendering: delimited tables plus matplotlib figures beside them."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .runner import PLANNING_COLUMNS, ScoreTables  # noqa: E402
from .scoring import REPORT_COLUMNS  # noqa: E402


def _write_csv(path: Path, rows: list[dict], columns: tuple[str, ...]) -> None:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("Scenario",) + columns)
        for row in rows:
            writer.writerow([row.get("Scenario")]
                            + [row.get(col) for col in columns])


def _bar_figure(path: Path, rows: list[dict], columns: tuple[str, ...],
                title: str, ylabel: str) -> None:
    scenarios = [row["Scenario"] for row in rows]
    width = 0.8 / max(len(columns), 1)
    fig, ax = plt.subplots(figsize=(max(6.0, 1.6 * len(scenarios)), 4.0))
    for i, column in enumerate(columns):
        values = [row.get(column) or 0.0 for row in rows]
        offsets = [x + i * width for x in range(len(scenarios))]
        ax.bar(offsets, values, width=width, label=column)
    ax.set_xticks([x + 0.4 - width / 2 for x in range(len(scenarios))])
    ax.set_xticklabels(scenarios, rotation=20, ha="right")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize="small", ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def _timeline_figure(path: Path, frame_scores: list[dict]) -> None:
    """Per-question score over frame index, one panel per scenario."""
    by_scenario: dict[str, dict[int, list[tuple[int, float]]]] = {}
    for row in frame_scores:
        by_scenario.setdefault(row["scenario"], {}).setdefault(
            row["qid"], []).append((row["frame_index"], row["score"]))
    if not by_scenario:
        return
    names = sorted(by_scenario)
    fig, axes = plt.subplots(len(names), 1, squeeze=False,
                             figsize=(7.0, 2.2 * len(names)))
    for ax, name in zip(axes[:, 0], names):
        for qid in sorted(by_scenario[name]):
            points = sorted(by_scenario[name][qid])
            ax.plot([p[0] for p in points], [p[1] for p in points],
                    marker=".", markersize=3, linewidth=0.8, label=f"Q{qid}")
        ax.set_ylim(-0.05, 1.05)
        ax.set_ylabel(name, fontsize="small")
        ax.legend(fontsize="x-small", ncol=5, loc="lower right")
    axes[-1, 0].set_xlabel("frame index")
    fig.suptitle("Per-question scores along each episode")
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def write_report(tables: ScoreTables, out_dir: str | Path) -> list[Path]:
    """Write CSV + JSON tables and PNG figures; returns the files written."""
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    vqa_csv = root / "vqa_scores.csv"
    _write_csv(vqa_csv, tables.vqa_rows, REPORT_COLUMNS)
    written.append(vqa_csv)

    planning_csv = root / "planning_scores.csv"
    _write_csv(planning_csv, tables.planning_rows, PLANNING_COLUMNS)
    written.append(planning_csv)

    json_path = root / "report.json"
    json_path.write_text(json.dumps(tables.to_dict(), indent=2, sort_keys=True)
                         + "\n", encoding="utf-8")
    written.append(json_path)

    vqa_png = root / "vqa_scores.png"
    _bar_figure(vqa_png, tables.vqa_rows, REPORT_COLUMNS,
                "VQA rubric scores per scenario", "score (x100)")
    written.append(vqa_png)

    planning_png = root / "planning_scores.png"
    _bar_figure(planning_png, tables.planning_rows, PLANNING_COLUMNS,
                "Planning metrics per scenario", "value")
    written.append(planning_png)

    if tables.frame_scores:
        timeline_png = root / "frame_scores.png"
        _timeline_figure(timeline_png, tables.frame_scores)
        written.append(timeline_png)
    return written


def format_table(rows: list[dict], columns: tuple[str, ...]) -> str:
    """Fixed-width text table for terminal output."""
    headers = ("Scenario",) + columns
    grid = [[str(row.get(col, "")) if row.get(col) is not None else "-"
             for col in headers] for row in rows]
    widths = [max(len(headers[i]), *(len(line[i]) for line in grid))
              for i in range(len(headers))]
    out = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
    for line in grid:
        out.append("  ".join(c.ljust(w) for c, w in zip(line, widths)))
    return "\n".join(out)
