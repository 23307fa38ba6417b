"""Velocity-threshold (I-VT) sample classification and fixation grouping.

Angular velocity is estimated from on-screen displacement assuming the eye
sits on the normal through the screen center; the centered two-point
difference over the adjacent valid samples is used for interior samples and
a one-sided difference at the ends.  Pre-labeled samples pass through
untouched, so vendor classifications can be kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from gazemetrics.config import Config
from gazemetrics.ingest import (
    LABEL_FIXATION,
    LABEL_SACCADE,
    LABEL_UNKNOWN,
    LABEL_UNLABELED,
    GazeSample,
)


@dataclass(frozen=True)
class Fixation:
    """A maximal low-velocity dwell: start, duration, centroid, member times."""

    k: int
    start_s: float
    duration_s: float
    centroid: tuple[float, float]
    member_sample_times: tuple[float, ...]

    @property
    def end_s(self) -> float:
        return self.start_s + self.duration_s


def angular_velocity(a: GazeSample, b: GazeSample, config: Config) -> float:
    """Angular speed in deg/s for the displacement between two valid samples."""
    dt = b.t - a.t
    if dt <= 0:
        raise ValueError(f"non-positive time delta {dt} between samples")
    dx_mm = (b.x - a.x) * config.screen_width_mm
    dy_mm = (b.y - a.y) * config.screen_height_mm
    angle_deg = math.degrees(math.atan(math.hypot(dx_mm, dy_mm) / config.viewer_distance_mm))
    return angle_deg / dt


def classify_samples(samples: Sequence[GazeSample], config: Config) -> list[GazeSample]:
    """Fill in labels for unlabeled samples by thresholding angular velocity.

    Invalid samples become 'unknown'; valid unlabeled samples become
    'fixation' when the velocity estimate is below the threshold, else
    'saccade'.  Samples that arrive labeled are passed through unchanged.
    """
    n = len(samples)
    if n == 0:
        return []
    valid_idx = [i for i, s in enumerate(samples) if s.valid]
    velocities = np.zeros(n)
    if len(valid_idx) >= 2:
        idx = np.asarray(valid_idx)
        t = np.asarray([samples[i].t for i in valid_idx])
        x = np.asarray([samples[i].x for i in valid_idx])
        y = np.asarray([samples[i].y for i in valid_idx])
        lo = np.maximum(np.arange(len(idx)) - 1, 0)
        hi = np.minimum(np.arange(len(idx)) + 1, len(idx) - 1)
        dt = t[hi] - t[lo]
        dx_mm = (x[hi] - x[lo]) * config.screen_width_mm
        dy_mm = (y[hi] - y[lo]) * config.screen_height_mm
        angle = np.degrees(np.arctan(np.hypot(dx_mm, dy_mm) / config.viewer_distance_mm))
        # duplicate timestamps: zero displacement is still, any displacement
        # is instantaneous movement
        safe_dt = np.where(dt > 0, dt, 1.0)
        velocities[idx] = np.where(dt > 0, angle / safe_dt,
                                   np.where(angle > 0, np.inf, 0.0))

    threshold = config.ivt_velocity_threshold
    out = []
    for i, s in enumerate(samples):
        if s.label != LABEL_UNLABELED:
            out.append(s)
            continue
        if not s.valid:
            label = LABEL_UNKNOWN
        elif velocities[i] < threshold:
            label = LABEL_FIXATION
        else:
            label = LABEL_SACCADE
        out.append(GazeSample(s.trial_id, s.participant_id, s.session_index,
                              s.t, s.x, s.y, label, s.valid))
    return out


def group_fixations(samples: Sequence[GazeSample], config: Config) -> list[Fixation]:
    """Group runs of fixation-labeled samples into Fixation records.

    A run may bridge unknown/invalid samples for up to max_gap_ms between
    consecutive members; any saccade sample, or a longer gap, ends it.
    Runs shorter than min_fixation_ms (last minus first member time) are
    discarded.  The centroid is the arithmetic mean of member coordinates.
    """
    max_gap_s = config.max_gap_ms / 1000.0
    min_duration_s = config.min_fixation_ms / 1000.0

    fixations: list[Fixation] = []
    run_t: list[float] = []
    run_x: list[float] = []
    run_y: list[float] = []

    def close_run() -> None:
        if not run_t:
            return
        duration = run_t[-1] - run_t[0]
        if duration >= min_duration_s and duration > 0:
            fixations.append(Fixation(
                k=len(fixations),
                start_s=run_t[0],
                duration_s=duration,
                centroid=(sum(run_x) / len(run_x), sum(run_y) / len(run_y)),
                member_sample_times=tuple(run_t),
            ))
        run_t.clear()
        run_x.clear()
        run_y.clear()

    for s in samples:
        if s.label == LABEL_FIXATION and s.valid:
            if run_t and s.t - run_t[-1] > max_gap_s:
                close_run()
            run_t.append(s.t)
            run_x.append(s.x)
            run_y.append(s.y)
        elif s.label == LABEL_SACCADE:
            close_run()
        # unknown/invalid samples are bridged; the gap check above decides
    close_run()
    return fixations
