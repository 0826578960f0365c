"""Figure rendering for sweep outputs (written next to the CSV files)."""

from __future__ import annotations

import math
from statistics import median

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .harness import ExperimentRecord, ParetoTrialRow


def _median_curve(records: list[ExperimentRecord], x_of) -> tuple[list, list]:
    xs = sorted({x_of(r) for r in records})
    ys = []
    for x in xs:
        vals = [r.psnr_db for r in records if x_of(r) == x]
        m = median(vals)
        ys.append(float("nan") if math.isinf(m) else m)
    return xs, ys


def render_loss_sweep(records: list[ExperimentRecord], path: str) -> None:
    """Median PSNR vs packet loss ratio, one line per method."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for method in sorted({r.method for r in records}):
        sub = [r for r in records if r.method == method]
        xs, ys = _median_curve(sub, lambda r: r.loss_ratio)
        ax.plot(xs, ys, marker="o", label=method)
    ax.set_xlabel("packet loss ratio")
    ax.set_ylabel("PSNR (dB)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_gens_sweep(records: list[ExperimentRecord], path: str) -> None:
    """Median PSNR vs engine generation count."""
    fig, ax = plt.subplots(figsize=(6, 4))
    xs, ys = _median_curve(records, lambda r: r.generations)
    ax.plot(xs, ys, marker="o")
    ax.set_xlabel("generations")
    ax.set_ylabel("PSNR (dB)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_pareto_demo(
    rows: list[ParetoTrialRow], front_scores: list[tuple[float, float]], path: str
) -> None:
    """Trial outcomes in objective space against the brute-force front."""
    fig, ax = plt.subplots(figsize=(5, 5))
    hits = [r.scores for r in rows if r.on_front]
    misses = [r.scores for r in rows if not r.on_front]
    if misses:
        ax.scatter(*zip(*misses), c="tab:red", s=18, label="off front")
    if hits:
        ax.scatter(*zip(*hits), c="tab:green", s=18, label="on front")
    if front_scores:
        ax.scatter(
            *zip(*front_scores),
            facecolors="none",
            edgecolors="black",
            s=80,
            label="true front",
        )
    ax.set_xlabel("objective 1")
    ax.set_ylabel("objective 2")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
