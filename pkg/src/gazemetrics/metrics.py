"""Per-trial and cross-trial crash-anticipation measures.

For a positive (crash) video the timeline decomposes as: the crash-involving
object (CIO) first appears at ``cio_onset_s``; the driver's first fixation
sample on a CIO follows after ``latency_s``; the span from that hit to crash
start is the early attention duration (negative when the driver attended
only after the crash began).  Attention fractions are interval measures of
fixation time, or CIO-directed fixation time, within a window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from gazemetrics.config import Config
from gazemetrics.fixation import Fixation
from gazemetrics.ingest import LABEL_FIXATION, Box, GazeSample, VideoMeta
from gazemetrics.intervals import IntervalSet, intersect, normalize, total_length
from gazemetrics.stats import summarize

# Human precision is assumed perfect in reports (false alarms are rare and
# cheap compared to misses); it is surfaced, never computed.
ASSUMED_HUMAN_PRECISION = 1.0

_FRAME_EPS = 1e-9


@dataclass(frozen=True)
class TrialMetrics:
    trial_id: str
    video_id: str
    participant_id: str
    session_index: int
    cio_onset_s: float | None = None        # time the first CIO appears
    cio_window_s: float | None = None       # remaining duration with CIOs
    latency_s: float | None = None          # onset -> first fixation hit
    first_cio_hit_s: float | None = None
    early_attention_s: float | None = None  # hit -> crash start (may be < 0)
    fixation_fraction_pre: float | None = None   # fixation share of [0, hit]
    fixation_fraction_window: float | None = None  # fixation share of [hit, crash]
    cio_fixation_fraction: float | None = None     # CIO-fixation share of same
    cio_attention_ratio: float | None = None       # ratio of the previous two
    missed_cio: bool | None = None
    attended_before_crash: bool | None = None


@dataclass(frozen=True)
class RecallBound:
    """Upper bound on recall: share of trials with a CIO hit before the crash."""

    n_trials: int
    n_attended: int

    @property
    def value(self) -> float:
        return self.n_attended / self.n_trials


@dataclass(frozen=True)
class ComparisonRow:
    video_id: str
    mean_duration_s: float
    mttc_s: float

    @property
    def diff_s(self) -> float:
        return self.mttc_s - self.mean_duration_s


@dataclass(frozen=True)
class ComparisonResult:
    rows: tuple[ComparisonRow, ...]
    n_duration_exceeding_mttc: int
    n_video_means_exceeding_mttc: int
    mean_diff_s: float | None
    ci_half_s: float | None


def frame_of(t: float, video: VideoMeta) -> int:
    """Frame index showing at time t; frame f covers [f/fps, (f+1)/fps)."""
    return min(max(int(math.floor(t * video.fps + _FRAME_EPS)), 0), video.n_frames - 1)


def frame_boxes(video: VideoMeta) -> dict[int, list[Box]]:
    """Per-frame CIO boxes pooled over tracks."""
    boxes: dict[int, list[Box]] = {}
    for _, track in video.cio_tracks:
        for frame, box in track:
            boxes.setdefault(frame, []).append(box)
    return boxes


def first_cio_appearance(video: VideoMeta) -> float:
    """Earliest time any CIO is visible, from the annotation tracks."""
    if not video.is_positive:
        raise ValueError(f"video {video.video_id} is not a crash video")
    frames = [frame for _, track in video.cio_tracks for frame, _ in track]
    if not frames:
        raise ValueError(f"video {video.video_id} has no CIO tracks")
    return min(frames) / video.fps


def first_cio_hit(
    fixations: Sequence[Fixation],
    samples: Sequence[GazeSample],
    video: VideoMeta,
    boxes: Mapping[int, Sequence[Box]] | None = None,
) -> float | None:
    """Earliest fixation-member sample lying on a CIO box, or None.

    Membership is at the sample level (a fixation member whose own
    coordinates fall inside a box of the concurrent frame), so the hit time
    is not quantized to whole fixations.
    """
    if not video.is_positive:
        raise ValueError(f"video {video.video_id} is not a crash video")
    if boxes is None:
        boxes = frame_boxes(video)
    if not boxes or not fixations:
        return None
    by_time: dict[float, list[GazeSample]] = {}
    for s in samples:
        if s.valid and s.label == LABEL_FIXATION:
            by_time.setdefault(s.t, []).append(s)
    duration = video.duration_s
    for fixation in fixations:
        for t in fixation.member_sample_times:
            if t >= duration:
                continue
            frame_box_list = boxes.get(frame_of(t, video))
            if not frame_box_list:
                continue
            for s in by_time.get(t, ()):
                if any(b.contains(s.x, s.y) for b in frame_box_list):
                    return t
    return None


def fixation_union(fixations: Sequence[Fixation]) -> IntervalSet:
    return normalize((f.start_s, f.end_s) for f in fixations)


def cio_fixation_union(
    fixations: Sequence[Fixation],
    video: VideoMeta,
    boxes: Mapping[int, Sequence[Box]] | None = None,
) -> IntervalSet:
    """Sub-intervals of fixations during frames whose boxes hold the centroid.

    The indicator is evaluated frame by frame against the fixation's fixed
    centroid, so a fixation contributes exactly the durations of the frames
    that contain it.
    """
    if boxes is None:
        boxes = frame_boxes(video)
    if not boxes:
        return normalize(())
    pieces = []
    for f in fixations:
        cx, cy = f.centroid
        first = frame_of(f.start_s, video)
        last = frame_of(f.end_s, video)
        for frame in range(first, last + 1):
            frame_box_list = boxes.get(frame)
            if not frame_box_list:
                continue
            lo = max(f.start_s, frame / video.fps)
            hi = min(f.end_s, (frame + 1) / video.fps)
            if hi > lo and any(b.contains(cx, cy) for b in frame_box_list):
                pieces.append((lo, hi))
    return normalize(pieces)


def compute_trial_metrics(
    fixations: Sequence[Fixation],
    samples: Sequence[GazeSample],
    video: VideoMeta,
    config: Config,
) -> TrialMetrics:
    """All per-trial measures; negative-video trials get empty crash fields."""
    if not samples:
        raise ValueError("trial has no samples")
    head = samples[0]
    base = dict(
        trial_id=head.trial_id,
        video_id=video.video_id,
        participant_id=head.participant_id,
        session_index=head.session_index,
    )
    if not video.is_positive:
        return TrialMetrics(**base)

    boxes = frame_boxes(video)
    onset = first_cio_appearance(video)
    crash = video.crash_start_s
    assert crash is not None
    hit = first_cio_hit(fixations, samples, video, boxes)
    if hit is None:
        return TrialMetrics(
            **base,
            cio_onset_s=onset,
            cio_window_s=video.duration_s - onset,
            missed_cio=True,
            attended_before_crash=False,
        )

    union = fixation_union(fixations)
    duration = crash - hit
    pre = None
    if hit > 0:
        pre = total_length(intersect(union, (0.0, hit))) / hit
    fraction_window = cio_fraction = ratio = None
    if duration > 0:
        window = (hit, crash)
        fraction_window = total_length(intersect(union, window)) / duration
        cio_fraction = total_length(
            intersect(cio_fixation_union(fixations, video, boxes), window)) / duration
        if fraction_window > 0:
            ratio = cio_fraction / fraction_window
    return TrialMetrics(
        **base,
        cio_onset_s=onset,
        cio_window_s=video.duration_s - onset,
        latency_s=hit - onset,
        first_cio_hit_s=hit,
        early_attention_s=duration,
        fixation_fraction_pre=pre,
        fixation_fraction_window=fraction_window,
        cio_fixation_fraction=cio_fraction,
        cio_attention_ratio=ratio,
        missed_cio=False,
        attended_before_crash=hit < crash,
    )


def instant_attention_series(
    samples: Sequence[GazeSample], video: VideoMeta
) -> list[float | None]:
    """Per-frame share of valid samples that are fixation samples.

    Frames with no valid samples yield None.
    """
    n_valid = [0] * video.n_frames
    n_fix = [0] * video.n_frames
    for s in samples:
        if not s.valid:
            continue
        frame = frame_of(s.t, video)
        n_valid[frame] += 1
        if s.label == LABEL_FIXATION:
            n_fix[frame] += 1
    return [n_fix[i] / n_valid[i] if n_valid[i] else None for i in range(video.n_frames)]


def recall_upper_bound(trials: Sequence[TrialMetrics]) -> RecallBound:
    """Share of positive-video trials where a CIO was fixated before the crash."""
    if not trials:
        raise ValueError("recall bound needs at least one positive-video trial")
    n_attended = sum(1 for t in trials if t.attended_before_crash)
    return RecallBound(n_trials=len(trials), n_attended=n_attended)


def video_mean_duration(trials: Sequence[TrialMetrics]) -> dict[str, float]:
    """Mean early attention duration per video; misses excluded, negatives kept."""
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for t in trials:
        if t.early_attention_s is None:
            continue
        sums[t.video_id] = sums.get(t.video_id, 0.0) + t.early_attention_s
        counts[t.video_id] = counts.get(t.video_id, 0) + 1
    return {vid: sums[vid] / counts[vid] for vid in sorted(sums)}


def compare_with_ai(
    mean_durations: Mapping[str, float],
    ai_mttc: Mapping[str, float],
    all_durations: Sequence[tuple[str, float]],
    config: Config,
) -> ComparisonResult:
    """Video-level human-vs-AI earliness comparison over the shared videos."""
    shared = sorted(set(mean_durations) & set(ai_mttc))
    rows = tuple(
        ComparisonRow(vid, mean_durations[vid], ai_mttc[vid]) for vid in shared
    )
    n_exceed = sum(
        1 for vid, d in all_durations if vid in ai_mttc and d > ai_mttc[vid]
    )
    n_mean_exceed = sum(1 for row in rows if row.mean_duration_s > row.mttc_s)
    mean_diff = ci_half = None
    if rows:
        stats = summarize([row.diff_s for row in rows], config.alpha)
        mean_diff = stats.mean
        ci_half = stats.ci_half
    return ComparisonResult(
        rows=rows,
        n_duration_exceeding_mttc=n_exceed,
        n_video_means_exceeding_mttc=n_mean_exceed,
        mean_diff_s=mean_diff,
        ci_half_s=ci_half,
    )
