"""Figure rendering for benchmark tables, penalty paths, and run reports.

All functions write to files (Agg backend); the figures mirror the CSV
tables the CLI emits, so a rendered plot always has a machine-readable
twin next to it.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_benchmark_plot(summaries: list[dict], outfile) -> None:
    """Mean fraction of correctly selected features versus sample count.

    ``summaries`` holds the benchmark summary rows (one per method and
    sample count) with keys ``method``, ``n``, ``fraction_correct``.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    methods = sorted({row["method"] for row in summaries})
    for method in methods:
        points = sorted(
            (int(row["n"]), float(row["fraction_correct"]))
            for row in summaries
            if row["method"] == method
        )
        ax.plot([p[0] for p in points], [p[1] for p in points], marker="o", label=method)
    ax.set_xlabel("training samples")
    ax.set_ylabel("fraction of correctly selected features")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(outfile, dpi=150)
    plt.close(fig)


def save_path_plot(lambdas, coefficients, feature_names, outfile) -> None:
    """Coefficient paths over the penalty grid (log-scaled x axis).

    ``coefficients`` is (grid, d); only features that are active
    somewhere on the grid get a line.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    coefficients = np.asarray(coefficients, dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    active = np.flatnonzero((coefficients != 0).any(axis=0))
    for j in active:
        ax.plot(lambdas, coefficients[:, j], label=feature_names[j])
    ax.set_xscale("log")
    ax.set_xlabel("penalty weight")
    ax.set_ylabel("coefficient")
    ax.grid(True, alpha=0.3)
    if 0 < active.size <= 12:
        ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(outfile, dpi=150)
    plt.close(fig)


def save_selection_plot(report: dict, outfile) -> None:
    """Horizontal bar chart of the ranked features in a run report."""
    ranked = report["ranked"]
    names = [entry["name"] for entry in ranked]
    scores = [entry["score"] for entry in ranked]
    fig, ax = plt.subplots(figsize=(6.0, 0.5 + 0.4 * max(1, len(ranked))))
    pos = np.arange(len(ranked))[::-1]
    ax.barh(pos, scores)
    ax.set_yticks(pos)
    ax.set_yticklabels(names)
    ax.set_xlabel("score")
    ax.set_title(report["method"])
    fig.tight_layout()
    fig.savefig(outfile, dpi=150)
    plt.close(fig)
