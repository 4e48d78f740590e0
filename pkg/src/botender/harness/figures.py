"""Figure rendering for harness reports (Agg backend, file output only)."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Any

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

if TYPE_CHECKING:
    from botender.harness.runner import CompareSummary


def render_run_figure(rows: list[dict[str, Any]], mode: str, out_path: Path) -> None:
    """Bar chart of case counts per prompt for one run."""
    labels = [row["prompt_id"] for row in rows]
    counts = [row["cases"] for row in rows]
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(labels, counts, color="#4c72b0")
    ax.set_xlabel("prompt")
    ax.set_ylabel("cases")
    ax.set_title(f"cases per prompt ({mode})")
    ax.set_ylim(bottom=0)
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)


def render_compare_figure(summary: "CompareSummary", out_path: Path) -> None:
    """Grouped bars for both runs plus the (channel, message) overlap."""
    labels = [row.prompt_id for row in summary.rows]
    xs = range(len(labels))
    width = 0.35
    fig, ax = plt.subplots(figsize=(9, 4.5))
    ax.bar([x - width / 2 for x in xs], [r.cases_a for r in summary.rows],
           width, label="run A", color="#4c72b0")
    ax.bar([x + width / 2 for x in xs], [r.cases_b for r in summary.rows],
           width, label="run B", color="#dd8452")
    ax.plot(list(xs), [r.overlap for r in summary.rows], "ko--",
            label="overlap", linewidth=1)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels)
    ax.set_xlabel("prompt")
    ax.set_ylabel("cases")
    ax.set_title("case counts by run")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=120)
    plt.close(fig)
