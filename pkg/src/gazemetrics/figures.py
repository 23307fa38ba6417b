"""Matplotlib figure rendering for the report path.

Each function writes one PNG next to the delimited outputs.  Rendering is
headless (Agg) and free of timestamps, so repeated runs on identical data
produce identical files.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from gazemetrics.report import StudyReport

_DPI = 150


def _save(fig, path: str) -> None:
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def _masked(series) -> np.ndarray:
    return np.array([np.nan if v is None else v for v in series], dtype=float)


def render_instant_attention(report: StudyReport, path: str) -> None:
    """Mean per-frame fixation share, crash vs normal videos."""
    fig, ax = plt.subplots(figsize=(7, 4))
    pos = _masked(report.instant_mean_pos)
    neg = _masked(report.instant_mean_neg)
    if pos.size:
        ax.plot(np.arange(pos.size), pos, label="crash videos", color="tab:red")
    if neg.size:
        ax.plot(np.arange(neg.size), neg, label="normal videos", color="tab:blue")
    ax.set_xlabel("frame")
    ax.set_ylabel("instant attention level")
    ax.set_ylim(0, 1.05)
    if ax.lines:
        ax.legend(loc="lower left")
    fig.tight_layout()
    _save(fig, path)


def render_earliness_histograms(report: StudyReport, path: str) -> None:
    """Distributions of latency and early attention duration."""
    tm = report.trial_metrics
    latencies = [t.latency_s for t in tm if t.latency_s is not None]
    attentions = [t.early_attention_s for t in tm if t.early_attention_s is not None]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    if latencies:
        ax1.hist(latencies, bins=30, color="tab:blue", edgecolor="white")
    ax1.set_xlabel("latency (s)")
    ax1.set_ylabel("experiments")
    if attentions:
        ax2.hist(attentions, bins=30, color="tab:green", edgecolor="white")
    ax2.set_xlabel("early attention duration (s)")
    fig.tight_layout()
    _save(fig, path)


def render_video_comparison(report: StudyReport, path: str) -> None:
    """Per-video durations with their mean vs the AI mean time-to-crash."""
    rows = report.comparison.rows
    fig, ax = plt.subplots(figsize=(10, 4.5))
    if rows:
        order = [row.video_id for row in rows]
        index = {vid: i for i, vid in enumerate(order)}
        xs, ys = [], []
        for t in report.trial_metrics:
            if t.early_attention_s is not None and t.video_id in index:
                xs.append(index[t.video_id])
                ys.append(t.early_attention_s)
        ax.scatter(xs, ys, s=8, color="0.6", label="per-experiment duration")
        ax.plot(range(len(rows)), [r.mean_duration_s for r in rows],
                color="tab:green", label="video mean duration")
        ax.plot(range(len(rows)), [r.mttc_s for r in rows],
                color="tab:red", label="AI mean time-to-crash")
        ax.set_xticks(range(0, len(rows), max(1, len(rows) // 10)))
        ax.set_xticklabels(order[:: max(1, len(rows) // 10)], rotation=45, fontsize=7)
    ax.set_xlabel("video")
    ax.set_ylabel("seconds before crash")
    if rows:
        ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def render_attention_fractions(report: StudyReport, path: str) -> None:
    """Fixation-share distributions before and during the window, plus the
    share of window fixation time spent on the CIO."""
    tm = report.trial_metrics
    pre = [t.fixation_fraction_pre for t in tm if t.fixation_fraction_pre is not None]
    during = [t.fixation_fraction_window for t in tm
              if t.fixation_fraction_window is not None]
    ratio = [t.cio_attention_ratio for t in tm if t.cio_attention_ratio is not None]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    if pre:
        ax1.hist(pre, bins=25, alpha=0.6, label="before first CIO fixation",
                 color="tab:blue")
    if during:
        ax1.hist(during, bins=25, alpha=0.6, label="during the window",
                 color="tab:orange")
    ax1.set_xlabel("fixation share of window")
    ax1.set_ylabel("experiments")
    if pre or during:
        ax1.legend(fontsize=8)
    if ratio:
        ax2.hist(ratio, bins=25, color="tab:purple")
    ax2.set_xlabel("share of fixation time on the CIO")
    fig.tight_layout()
    _save(fig, path)


def render_heatmaps(report: StudyReport, path: str) -> None:
    """Fixation-count heat maps for crash and normal videos."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 3.2))
    for ax, grid, title in (
        (ax1, report.grid_pos, "crash videos"),
        (ax2, report.grid_neg, "normal videos"),
    ):
        image = ax.imshow(grid.cells, cmap="hot", aspect="auto",
                          extent=(0, 1, 0, 1), interpolation="nearest")
        ax.set_title(title, fontsize=10)
        ax.set_xticks(())
        ax.set_yticks(())
        fig.colorbar(image, ax=ax, shrink=0.85)
    fig.tight_layout()
    _save(fig, path)


def render_all(report: StudyReport, out_dir: str) -> list[str]:
    jobs = [
        ("fig_instant_attention.png", render_instant_attention),
        ("fig_earliness_distributions.png", render_earliness_histograms),
        ("fig_video_comparison.png", render_video_comparison),
        ("fig_attention_fractions.png", render_attention_fractions),
        ("fig_heatmaps.png", render_heatmaps),
    ]
    written = []
    for name, render in jobs:
        path = os.path.join(out_dir, name)
        render(report, path)
        written.append(path)
    return written
