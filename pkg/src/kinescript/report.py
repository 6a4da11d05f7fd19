"""Report rendering: matplotlib figures and CSV summaries for packages.

Kept out of the batch write path so batch output trees stay byte-identical
across runs; `kinescript report` renders figures after the fact.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .dataset import SessionPackage


def _segment_spans(pkg: SessionPackage):
    cmap = plt.get_cmap("tab10")
    for tag in pkg.segments:
        yield tag, cmap(tag.index % 10)


def render_trajectory_figure(pkg: SessionPackage, path: Path) -> Path:
    """Top-down XY trace of the base position, colored per segment."""
    fig, ax = plt.subplots(figsize=(6, 6))
    for tag, color in _segment_spans(pkg):
        xs, ys = [], []
        for s in pkg.reference:
            if tag.start_ms <= s.timestamp_ms < tag.end_ms:
                xs.append(s.base_pos[0])
                ys.append(s.base_pos[1])
        ax.plot(xs, ys, color=color, linewidth=2,
                label=f"{tag.index}: {tag.mode_name}")
    if pkg.reference:
        ax.plot(pkg.reference[0].base_pos[0], pkg.reference[0].base_pos[1],
                "k^", markersize=9, label="start")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title(f"base trajectory: {pkg.manifest['session_id']}")
    ax.axis("equal")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_profile_figure(pkg: SessionPackage, path: Path) -> Path:
    """Speed, pelvis height, heading and gait phase over session time."""
    t = [s.timestamp_ms / 1000.0 for s in pkg.reference]
    speed = [(s.base_vel[0] ** 2 + s.base_vel[1] ** 2) ** 0.5 for s in pkg.reference]
    height = [s.pelvis_height for s in pkg.reference]
    heading = [s.heading_rad for s in pkg.reference]
    phase = [s.gait_phase for s in pkg.reference]

    fig, axes = plt.subplots(4, 1, figsize=(8, 9), sharex=True)
    for ax, series, label in zip(axes, (speed, height, heading, phase),
                                 ("speed [m/s]", "pelvis height [m]",
                                  "heading [rad]", "gait phase")):
        ax.plot(t, series, linewidth=1.2)
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
        for tag, color in _segment_spans(pkg):
            ax.axvspan(tag.start_ms / 1000.0, tag.end_ms / 1000.0,
                       color=color, alpha=0.08)
    axes[-1].set_xlabel("session time [s]")
    axes[0].set_title(f"profiles: {pkg.manifest['session_id']}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def write_segments_csv(pkg: SessionPackage, path: Path) -> Path:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["index", "mode", "movement", "start_ms", "end_ms",
                    "duration_s", "speed", "turn_deg", "height", "samples"])
        for tag in pkg.segments:
            n = sum(1 for s in pkg.reference
                    if tag.start_ms <= s.timestamp_ms < tag.end_ms)
            it = tag.intent
            w.writerow([tag.index, tag.mode_name, it.movement, tag.start_ms,
                        tag.end_ms, it.duration_s, it.speed, it.turn_deg,
                        it.height, n])
    return path


def render_session_report(pkg: SessionPackage, out_dir: Path) -> list[Path]:
    """Figures plus the delimited segment summary for one package."""
    out_dir.mkdir(parents=True, exist_ok=True)
    return [
        render_trajectory_figure(pkg, out_dir / "trajectory.png"),
        render_profile_figure(pkg, out_dir / "profiles.png"),
        write_segments_csv(pkg, out_dir / "segments.csv"),
    ]


def render_batch_figure(report_doc: dict, path: Path) -> Path:
    """Per-run transition-quality overview for a batch report."""
    runs = report_doc.get("runs", [])
    labels = [r["run_id"] for r in runs]
    jumps = [r["quality"]["max_speed_jump"] for r in runs]
    rates = [r["quality"]["max_height_rate"] for r in runs]
    colors = ["tab:green" if r["quality"]["pass"] else "tab:red" for r in runs]

    fig, axes = plt.subplots(2, 1, figsize=(max(6, 0.5 * len(runs) + 2), 7), sharex=True)
    x = range(len(runs))
    axes[0].bar(x, jumps, color=colors)
    axes[0].set_ylabel("max speed jump [m/s]")
    axes[1].bar(x, rates, color=colors)
    axes[1].set_ylabel("max height rate [m/s]")
    axes[1].set_xticks(list(x))
    axes[1].set_xticklabels(labels, rotation=60, ha="right", fontsize=7)
    axes[0].set_title(f"batch quality: {report_doc.get('generated', 0)} generated, "
                      f"{report_doc.get('filtered', 0)} filtered")
    for ax in axes:
        ax.grid(True, axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def load_batch_report(batch_dir: Path) -> dict:
    return json.loads((batch_dir / "report.json").read_text("utf-8"))
