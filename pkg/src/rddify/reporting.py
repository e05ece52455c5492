"""Corpus-run reporting: delimited summary plus rendered figures.

``write_corpus_csv`` emits one row per program and per-suite/overall totals;
``render_corpus_figures`` draws the matching accuracy and duration charts
next to the CSV.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

from .corpus import SUITES


@dataclass(frozen=True)
class CorpusRow:
    """One translated corpus program, flattened for reporting."""

    suite: str
    program: str
    fragments: int
    translated: int
    status: str
    duration_seconds: float


def suite_totals(rows: list[CorpusRow]) -> list[tuple[str, int, int, int]]:
    """(suite, programs, fragments, translated) per suite, then overall."""
    totals = []
    for suite in SUITES:
        suite_rows = [row for row in rows if row.suite == suite]
        if not suite_rows:
            continue
        totals.append((
            suite,
            len(suite_rows),
            sum(row.fragments for row in suite_rows),
            sum(row.translated for row in suite_rows),
        ))
    totals.append((
        "overall",
        len(rows),
        sum(row.fragments for row in rows),
        sum(row.translated for row in rows),
    ))
    return totals


def write_corpus_csv(rows: list[CorpusRow], path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["suite", "program", "fragments", "translated", "status", "duration_s"]
        )
        for row in rows:
            writer.writerow([
                row.suite, row.program, row.fragments, row.translated,
                row.status, f"{row.duration_seconds:.3f}",
            ])
        writer.writerow([])
        writer.writerow(["suite", "programs", "fragments", "translated", "", ""])
        for suite, programs, fragments, translated in suite_totals(rows):
            writer.writerow([suite, programs, fragments, translated, "", ""])


def render_corpus_figures(rows: list[CorpusRow], csv_path: Path) -> list[Path]:
    """Render accuracy and duration charts alongside the CSV; return paths."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    csv_path = Path(csv_path)
    stem = csv_path.with_suffix("")
    outputs = []

    totals = [t for t in suite_totals(rows) if t[0] != "overall"]
    labels = [t[0].replace("_", "\n") for t in totals]
    fragments = [t[2] for t in totals]
    translated = [t[3] for t in totals]

    fig, ax = plt.subplots(figsize=(6, 4))
    positions = range(len(labels))
    ax.bar([p - 0.2 for p in positions], fragments, width=0.4, label="fragments")
    ax.bar([p + 0.2 for p in positions], translated, width=0.4, label="translated")
    ax.set_xticks(list(positions))
    ax.set_xticklabels(labels)
    ax.set_ylabel("loop fragments")
    ax.set_title("Translated fragments per suite")
    ax.legend()
    fig.tight_layout()
    accuracy_path = Path(f"{stem}_accuracy.png")
    fig.savefig(accuracy_path, dpi=120)
    plt.close(fig)
    outputs.append(accuracy_path)

    fig, ax = plt.subplots(figsize=(7, 4))
    names = [row.program for row in rows]
    durations = [row.duration_seconds for row in rows]
    ax.barh(names, durations)
    ax.set_xlabel("translation time (s)")
    ax.set_title("Per-program translation time")
    ax.invert_yaxis()
    fig.tight_layout()
    durations_path = Path(f"{stem}_durations.png")
    fig.savefig(durations_path, dpi=120)
    plt.close(fig)
    outputs.append(durations_path)

    return outputs
