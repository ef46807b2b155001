"""Matplotlib renderings of reports, walk paths, and evolution trajectories.

Everything here writes PNG files next to the CSV/JSON artifacts; nothing
opens a window (the Agg backend is forced on import).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def scenario_figure(report, path: str | Path) -> None:
    """Expected weights vs empirical absorption frequencies, with 3-sigma bands."""
    n = len(report.expected)
    idx = np.arange(1, n + 1)
    expected = np.asarray(report.expected.tolist())
    freq = np.asarray(report.ensemble.freq)
    half = np.array([(hi - lo) / 2.0 for lo, hi in report.bands_3sigma])

    fig, ax = plt.subplots(figsize=(8, 4.5))
    ax.bar(idx - 0.2, expected, width=0.4, label="expected weight", color="#4878cf")
    ax.bar(idx + 0.2, freq, width=0.4, label="absorbed frequency", color="#ee854a")
    ax.errorbar(idx - 0.2, expected, yerr=half, fmt="none", ecolor="black",
                capsize=3, lw=1, label="3$\\sigma$ band")
    ax.set_xlabel("region index")
    ax.set_ylabel("probability")
    ax.set_xticks(idx)
    ax.set_title(report.scenario_name)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def weights_figure(weights, path: str | Path, title: str = "detector weights") -> None:
    """Bar chart of a weight vector over the region indices."""
    w = np.asarray(weights.tolist() if hasattr(weights, "tolist") else weights)
    idx = np.arange(1, w.size + 1)
    fig, ax = plt.subplots(figsize=(8, 4))
    ax.bar(idx, w, color="#4878cf")
    ax.set_xlabel("region index")
    ax.set_ylabel("weight")
    ax.set_xticks(idx)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def walk_figure(run, path: str | Path) -> None:
    """Simplex coordinates of one recorded walk against the step counter."""
    pts = np.array([p.tolist() for p in run.path])
    steps = np.asarray(run.path_steps())
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for i in range(pts.shape[1]):
        ax.plot(steps, pts[:, i], label=f"$a_{{{i + 1}}}$", lw=1.2)
    ax.set_xlabel("step")
    ax.set_ylabel("coordinate")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(
        f"walk seed={run.seed}: "
        + (f"absorbed at vertex {run.absorbed_at}" if run.absorbed_at else "not absorbed")
        + f" after {run.steps_taken} steps"
    )
    ax.legend(loc="center left")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def trajectory_figure(times, coords, path: str | Path) -> None:
    """Sector weights along a block-operator evolution time grid."""
    times = np.asarray(list(times), dtype=float)
    coords = np.asarray(coords, dtype=float)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for i in range(coords.shape[1]):
        ax.plot(times, coords[:, i], label=f"$a_{{{i + 1}}}$", lw=1.2, marker=".")
    ax.set_xlabel("t")
    ax.set_ylabel("sector weight")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title("sector weights under block evolution")
    ax.legend(loc="center left")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
