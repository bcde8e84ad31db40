"""Figures for the bench command, rendered headless to PNG."""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# no version string or timestamp, so reruns give identical bytes
_META = {"Software": None}


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)
    return path


def plot_metric(rows: list[dict], metric: str, path: Path, title: str = "") -> Path:
    """Mean of ``metric`` against n, one line per algorithm."""
    groups = defaultdict(lambda: defaultdict(list))
    for row in rows:
        if row.get(metric) in (None, ""):
            continue
        groups[row["algo"]][int(row["n"])].append(float(row[metric]))
    fig, ax = plt.subplots(figsize=(6, 4))
    for algo in sorted(groups):
        ns = sorted(groups[algo])
        means = [sum(groups[algo][n]) / len(groups[algo][n]) for n in ns]
        ax.plot(ns, means, marker="o", label=algo)
    ax.set_xlabel("n")
    ax.set_ylabel(metric)
    if metric in ("nodes", "seconds") and any(groups.values()):
        ax.set_yscale("symlog")
    ax.set_title(title or f"{metric} by n")
    if groups:
        ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    return _save(fig, path)


def plot_ratio_histogram(ratios: list[float], path: Path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    if ratios:
        hi = max(ratios)
        bins = [1 + 0.25 * i for i in range(int((hi - 1) / 0.25) + 2)]
        ax.hist(ratios, bins=bins, edgecolor="black")
        ax.axvline(sorted(ratios)[len(ratios) // 2], color="red", linestyle="--",
                   label="median")
        ax.legend()
    ax.set_xlabel("cost / OPT")
    ax.set_ylabel("instances")
    ax.set_title(title or "Min-2-SAT rounding ratio")
    fig.tight_layout()
    return _save(fig, path)
