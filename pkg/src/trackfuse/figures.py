"""Report figures rendered to files alongside the metric output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")  # write to file, never to a window

import matplotlib.pyplot as plt
import numpy as np

from .evaluate import radar_track_positions, subject_positions
from .pipeline import RunData


def plot_trajectories(data: RunData, out_path: Path) -> None:
    """Ground-truth paths vs confirmed radar tracks in the x-y plane."""
    fig, ax = plt.subplots(figsize=(6, 5))
    for sid, series in sorted(subject_positions(data).items()):
        pts = np.array([series[k] for k in sorted(series)])
        ax.plot(pts[:, 0], pts[:, 1], "-", lw=2, alpha=0.5, label=f"subject {sid}")
    for tid, series in sorted(radar_track_positions(data).items()):
        pts = np.array([series[k] for k in sorted(series)])
        ax.plot(pts[:, 0], pts[:, 1], "--", lw=1, label=f"track {tid}")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title("Trajectories: ground truth vs radar tracks")
    ax.legend(fontsize=8, loc="best")
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_position_error(report: dict, delta: float, out_path: Path) -> None:
    series = report.get("_per_frame_position_error", {})
    if not series:
        return
    frames = sorted(int(k) for k in series)
    errors = [series[str(k)] for k in frames]
    fig, ax = plt.subplots(figsize=(6, 3.2))
    ax.plot(np.array(frames) * delta, errors, lw=1)
    ax.set_xlabel("time [s]")
    ax.set_ylabel("position error [m]")
    ax.set_title("Mean radar position error per frame")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_temperature(data: RunData, out_path: Path) -> None:
    """Raw (bias-only) vs distance-corrected per-frame readings per pair."""
    if not data.fused:
        return
    config = data.scenario_dict.get("config", {})
    a0 = float(config.get("a0", 1.116))
    a1 = float(config.get("a1", 0.013))
    fig, ax = plt.subplots(figsize=(6, 3.6))
    for f in data.fused:
        contribs = sorted(f.get("per_frame", []), key=lambda c: c["frame"])
        if not contribs:
            continue
        t = np.array([c["frame"] for c in contribs]) * data.delta
        raw = [(a0 + 2.0 * a1) * c["t_raw"] for c in contribs]
        corr = [c["t_corrected"] for c in contribs]
        ax.plot(t, raw, ":", lw=1, label=f"pair {f['radar_id']}/{f['tc_id']} raw")
        ax.plot(t, corr, "-", lw=1.2, label=f"pair {f['radar_id']}/{f['tc_id']} corrected")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("temperature [C]")
    ax.set_title("Raw (fixed-distance bias) vs distance-corrected readings")
    ax.legend(fontsize=7, loc="best")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_run_figures(data: RunData, report: dict, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    targets = [
        (plot_trajectories, out_dir / "trajectories.png", (data,)),
        (plot_position_error, out_dir / "position_error.png", (report, data.delta)),
        (plot_temperature, out_dir / "temperature.png", (data,)),
    ]
    for fn, path, args in targets:
        fn(*args, path)
        if path.exists():
            written.append(path)
    return written


def plot_reid_accuracy(rows: list[dict], out_path: Path) -> None:
    """Accuracy vs score window, one curve per classifier."""
    methods = sorted({r["method"] for r in rows})
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    for method in methods:
        pts = sorted(
            (r["window_s"], r["accuracy"]) for r in rows if r["method"] == method
        )
        ax.plot([p[0] for p in pts], [p[1] for p in pts], "o-", label=method)
    ax.set_xlabel("score window W [s]")
    ax.set_ylabel("re-identification accuracy")
    ax.set_ylim(0.0, 1.05)
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
