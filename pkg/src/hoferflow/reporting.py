"""Deterministic report, trace, and figure writers.

Reports are canonical JSON (sorted keys, no timestamps), traces are CSV with
columns t, q, p per trajectory, and figures are SVG rendered through
matplotlib with a fixed hash salt so identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import json
import os
from typing import Sequence

import numpy as np


def canonical(obj):
    """Recursively coerce numpy scalars/arrays for stable JSON encoding."""
    if isinstance(obj, dict):
        return {str(k): canonical(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [canonical(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [canonical(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json_report(path: str, data: dict) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w") as fh:
        json.dump(canonical(data), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_trajectory_csv(path: str, times, states) -> str:
    """One trajectory: columns t, q, p."""
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    states = np.asarray(states)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "q", "p"])
        for t, x in zip(np.asarray(times), states):
            w.writerow([repr(float(t)), repr(float(x[0])), repr(float(x[1]))])
    return path


def write_curve_csv(path: str, header: Sequence[str], rows) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(list(header))
        for row in rows:
            w.writerow([repr(float(v)) for v in row])
    return path


def _mpl():
    import matplotlib
    matplotlib.use("svg", force=False)
    import matplotlib.pyplot as plt
    plt.rcParams["svg.hashsalt"] = "hoferflow"
    return plt


def save_svg(fig, path: str) -> str:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def phase_plot(path: str, trajectories, title: str = "phase plot") -> str:
    """q-right, p-up phase portrait of one or more trajectories."""
    plt = _mpl()
    fig, ax = plt.subplots(figsize=(5, 5))
    for k, traj in enumerate(trajectories):
        traj = np.asarray(traj)
        ax.plot(traj[:, 0], traj[:, 1], lw=0.9, label=f"traj {k}")
        ax.plot([traj[0, 0]], [traj[0, 1]], marker="o", ms=3, color="k")
    ax.set_xlabel("q")
    ax.set_ylabel("p")
    ax.set_aspect("equal")
    ax.set_title(title)
    if len(trajectories) <= 8:
        ax.legend(fontsize=7)
    save_svg(fig, path)
    plt.close(fig)
    return path


def curve_plot(path: str, xs, ys, xlabel: str, ylabel: str,
               title: str = "") -> str:
    plt = _mpl()
    fig, ax = plt.subplots(figsize=(5.5, 3.2))
    ax.plot(np.asarray(xs), np.asarray(ys), lw=1.1)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    save_svg(fig, path)
    plt.close(fig)
    return path
