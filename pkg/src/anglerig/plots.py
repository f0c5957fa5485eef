"""Figure rendering for reports: agent paths, error decay, angularity sketches.

Rendering is file-based (Agg backend); the CSV/JSON outputs stay the
machine-readable interface and these figures sit alongside them.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .angularity import Angularity
from .simulate import Trajectory

_AGENT_CMAP = plt.get_cmap("tab10")


def render_trajectory_figures(traj: Trajectory, out_prefix) -> list[Path]:
    """Write <prefix>_paths.png and <prefix>_errors.png; returns the paths."""
    prefix = Path(out_prefix)
    paths_png = prefix.with_name(prefix.name + "_paths.png")
    errors_png = prefix.with_name(prefix.name + "_errors.png")

    fig, ax = plt.subplots(figsize=(5.5, 5.0))
    n = traj.agent_count
    for i in range(n):
        color = _AGENT_CMAP(i % 10)
        xy = traj.positions[:, i, :]
        ax.plot(xy[:, 0], xy[:, 1], "-", color=color, lw=0.9, alpha=0.8)
        ax.plot(*xy[0], "o", color=color, mfc="none", ms=6)
        ax.plot(*xy[-1], "o", color=color, ms=6)
        ax.annotate(str(i + 1), xy[-1], textcoords="offset points", xytext=(5, 5))
    final = traj.positions[-1]
    hull_order = np.argsort(np.arctan2(*(final - final.mean(axis=0)).T[::-1]))
    ring = np.vstack([final[hull_order], final[hull_order][:1]])
    ax.plot(ring[:, 0], ring[:, 1], ":", color="gray", lw=0.8)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("agent paths (open marker = start)")
    fig.tight_layout()
    fig.savefig(paths_png, dpi=150)
    plt.close(fig)

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    labels = traj.metadata.get("channels") or [
        f"e_{m + 1}" for m in range(traj.angle_errors.shape[1])
    ]
    floor = 1e-17
    for m, label in enumerate(labels):
        ax.semilogy(traj.times, np.abs(traj.angle_errors[:, m]) + floor, lw=0.9, label=label)
    for ev in traj.events:
        ax.axvline(ev.time, color="red", lw=0.8, ls="--")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("|angle error| [rad]")
    ax.legend(fontsize=7, ncol=2)
    ax.set_title("error decay")
    fig.tight_layout()
    fig.savefig(errors_png, dpi=150)
    plt.close(fig)
    return [paths_png, errors_png]


def render_angularity_figure(a: Angularity, path, alternatives=None) -> Path:
    """Sketch the vertices, constraint legs, and any alternative placements."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    pos = a.positions
    for t in a.angle_set:
        pj = pos[t.j - 1]
        for other in (t.i, t.k):
            po = pos[other - 1]
            ax.plot([pj[0], po[0]], [pj[1], po[1]], "-", color="steelblue", lw=0.8, alpha=0.7)
    ax.plot(pos[:, 0], pos[:, 1], "o", color="black", ms=5)
    for v, p in enumerate(pos, start=1):
        ax.annotate(str(v), p, textcoords="offset points", xytext=(5, 5))
    if alternatives:
        for step_alts in alternatives:
            for q in step_alts:
                ax.plot(q[0], q[1], "x", color="crimson", ms=8, mew=1.5)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title("angularity (x = alternative placement)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
