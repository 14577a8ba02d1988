"""Matplotlib figure rendering for evaluation reports.

Figures are written next to the delimited output files; the Agg backend keeps
everything headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .pipeline import EvalRow  # noqa: E402


def plot_position_distribution(
    distributions: dict[str, list[float]],
    path: str | Path,
    title: str = "Extracted-sentence proportion by linear position",
) -> None:
    """Line chart of selection proportion per sentence index, one series per model."""
    fig, ax = plt.subplots(figsize=(8, 4))
    for label, props in distributions.items():
        ax.plot(range(len(props)), props, marker="o", markersize=3, label=label)
    ax.set_xlabel("linear sentence index")
    ax.set_ylabel("proportion of summaries")
    ax.set_title(title)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_rouge_report(rows: list[EvalRow], path: str | Path,
                      title: str = "ROUGE F1 by model") -> None:
    """Grouped bar chart of R1/R2/RL F1 per report row."""
    names = [r.name for r in rows]
    metrics = {
        "R1": [r.score.r1.f1 for r in rows],
        "R2": [r.score.r2.f1 for r in rows],
        "RL": [r.score.rl.f1 for r in rows],
    }
    fig, ax = plt.subplots(figsize=(max(6, 1.5 * len(names)), 4))
    width = 0.25
    for k, (label, values) in enumerate(metrics.items()):
        xs = [i + (k - 1) * width for i in range(len(names))]
        ax.bar(xs, values, width=width, label=label)
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels(names, rotation=20, ha="right")
    ax.set_ylabel("F1")
    ax.set_title(title)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
