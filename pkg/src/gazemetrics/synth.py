"""Synthetic sessions and trials with planted ground truth, plus test oracles.

Trials follow the lab protocol shape: 5 s videos at 10 Hz (50 frames),
gaze sampled at the configured rate, sessions of shuffled videos separated
by 1 s blanks.  A generated trial guarantees what the analysis pipeline
recovers:

* the first CIO appearance is exact (it is annotation-derived),
* latency and early attention duration match the planted values to within
  one gaze-sample period,
* fixation/CIO coverage fractions match their targets to within 0.02,
* miss and attended-before-crash flags are exact.

The construction places still gaze dwells (with sub-threshold jitter) and
fast multi-point walks on a sample grid.  The velocity classifier erodes
one sample at each boundary of a dwell (its centered estimate straddles the
jump), which the layout accounts for when sizing dwells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from gazemetrics.config import Config
from gazemetrics.ingest import (
    CATEGORY_NEGATIVE,
    CATEGORY_POSITIVE,
    LABEL_UNLABELED,
    AIReference,
    Box,
    GazeSample,
    VideoMeta,
)

VIDEO_FPS = 10.0
VIDEO_N_FRAMES = 50
VIDEO_DURATION_S = VIDEO_N_FRAMES / VIDEO_FPS
FRAME_W_PX = 1280.0
FRAME_H_PX = 720.0
BLANK_GAP_S = 1.0

# CIO box: px (768, 288)-(1152, 504) on 1280x720, i.e. (0.6, 0.4)-(0.9, 0.7).
CIO_BOX = Box(768.0 / FRAME_W_PX, 288.0 / FRAME_H_PX,
              1152.0 / FRAME_W_PX, 504.0 / FRAME_H_PX)
CIO_CENTER = ((CIO_BOX.x1 + CIO_BOX.x2) / 2, (CIO_BOX.y1 + CIO_BOX.y2) / 2)

# Gaze anchors, all at least 0.15 clear of the CIO box except the center.
POINT_ROAD = (0.20, 0.55)    # default resting point, off the box
POINT_SIDE = (0.25, 0.30)    # off-box dwell during the window
WALK_VERTICES = ((0.10, 0.15), (0.45, 0.80), (0.10, 0.80))
JITTER = 0.002  # uniform half-width; small enough to stay sub-threshold

# A dwell of n samples bounded by jumps yields n - 2 member samples; the
# member span must still clear the 60 ms minimum fixation duration.
_MIN_DWELL_STEPS = 8


@dataclass(frozen=True)
class TrialSpec:
    """Planted parameters for one synthetic trial."""

    video_id: str
    category: str
    crash_start_s: float | None = None
    cio_first_frame: int | None = None
    planted_latency_s: float | None = None
    fixation_coverage: float | None = None  # target fixation share of the window
    cio_coverage: float | None = None       # target CIO share of fixation time
    miss: bool = False
    noise_seed: int = 0

    @property
    def cio_onset_s(self) -> float:
        assert self.cio_first_frame is not None
        return self.cio_first_frame / VIDEO_FPS

    @property
    def planted_attention_s(self) -> float | None:
        """Crash start minus the planted first-hit time (may be negative)."""
        if self.crash_start_s is None or self.planted_latency_s is None:
            return None
        return self.crash_start_s - (self.cio_onset_s + self.planted_latency_s)


@dataclass(frozen=True)
class SessionPlan:
    """Shuffled video order with start offsets on the session timeline."""

    entries: tuple[tuple[str, str, float], ...]  # (video_id, category, start_s)
    total_duration_s: float


@dataclass(frozen=True)
class StudyData:
    """A full synthetic study: all trials of all participants and sessions."""

    videos: list[VideoMeta]
    trials: list[tuple[str, list[GazeSample]]]
    specs: dict[str, TrialSpec]
    ai: AIReference
    session_plans: dict[tuple[str, int], SessionPlan]


class InfeasibleSpecError(ValueError):
    """The planted parameters cannot be realized on the sample grid."""


def _video_meta(spec: TrialSpec) -> VideoMeta:
    tracks = ()
    if spec.category == CATEGORY_POSITIVE:
        assert spec.cio_first_frame is not None
        boxes = tuple(
            (frame, CIO_BOX) for frame in range(spec.cio_first_frame, VIDEO_N_FRAMES)
        )
        tracks = (("cio0", boxes),)
    return VideoMeta(
        video_id=spec.video_id,
        category=spec.category,
        fps=VIDEO_FPS,
        n_frames=VIDEO_N_FRAMES,
        frame_width_px=FRAME_W_PX,
        frame_height_px=FRAME_H_PX,
        crash_start_s=spec.crash_start_s,
        cio_tracks=tracks,
    )


def _fill_walk(pos: np.ndarray, start: int, stop: int) -> None:
    """Fast wandering samples: cycle three mutually distant vertices so both
    step and centered two-step displacements stay above any sane threshold."""
    for i in range(start, stop):
        pos[i] = WALK_VERTICES[i % 3]


def _positive_layout(spec: TrialSpec, config: Config) -> tuple[np.ndarray, int]:
    """Gaze anchor positions for a positive, non-miss trial.

    Returns (positions, first_hit_index).  Raises InfeasibleSpecError when
    the planted values cannot be realized.
    """
    hz = config.gaze_hz
    dt = 1.0 / hz
    n_total = int(round(VIDEO_DURATION_S * hz))
    crash = spec.crash_start_s
    assert crash is not None and spec.planted_latency_s is not None
    if not 3.0 <= crash <= VIDEO_DURATION_S:
        raise InfeasibleSpecError(f"crash_start_s {crash} outside [3, {VIDEO_DURATION_S}]")
    if spec.planted_latency_s < 0:
        raise InfeasibleSpecError("planted latency must be >= 0")

    t_hit = spec.cio_onset_s + spec.planted_latency_s
    i_star = math.ceil(t_hit * hz - 1e-9)
    if i_star < 12:
        raise InfeasibleSpecError("planted hit too early for a leading dwell")
    if i_star > n_total - 12:
        raise InfeasibleSpecError("planted hit too close to the video end")

    attention = crash - i_star * dt  # window length the pipeline will see
    planted = spec.planted_attention_s
    assert planted is not None
    if abs(planted) < 0.1:
        raise InfeasibleSpecError("planted attention duration must be >= 0.1 s in magnitude")

    pos = np.empty((n_total, 2))
    pos[: i_star - 1] = POINT_ROAD
    pos[i_star - 1] = CIO_CENTER  # lead-in; eroded to a saccade, not a member

    if planted < 0:
        # Driver arrives only after the crash: dwell on the CIO to the end.
        pos[i_star:] = CIO_CENTER
        return pos, i_star

    if spec.fixation_coverage is None or spec.cio_coverage is None:
        raise InfeasibleSpecError("coverage targets are required when the window is positive")
    if not (0 <= spec.fixation_coverage <= 1 and 0 <= spec.cio_coverage <= 1):
        raise InfeasibleSpecError("coverage targets must lie in [0, 1]")

    measure_fix = spec.fixation_coverage * attention
    measure_cio = spec.cio_coverage * measure_fix
    measure_off = measure_fix - measure_cio
    r = round(measure_cio / dt)
    q = round(measure_off / dt)
    if r < _MIN_DWELL_STEPS:
        raise InfeasibleSpecError(
            "CIO coverage target below the minimum realizable dwell")
    if 0 < q < _MIN_DWELL_STEPS:
        raise InfeasibleSpecError(
            "off-CIO coverage target below the minimum realizable dwell")

    last_before_crash = math.ceil(crash * hz - 1e-9) - 1
    end_on = i_star + r + 1  # final sample of the CIO dwell (eroded edge)

    if q == 0:
        if measure_cio >= attention - 0.5 * dt:
            # Full coverage: one dwell through the crash to the video end.
            pos[i_star:] = CIO_CENTER
            return pos, i_star
        if measure_cio > attention - 4.5 * dt:
            raise InfeasibleSpecError(
                "coverage target too close to full for a clean dwell boundary")
        pos[i_star : end_on + 1] = CIO_CENTER
        _fill_walk(pos, end_on + 1, last_before_crash + 1)
        pos[last_before_crash + 1 :] = CIO_CENTER  # post-crash stare
        return pos, i_star

    # Off-CIO dwell carries the right window edge: it starts so that its
    # member span from (start+1)*dt to the crash has the target measure,
    # and runs to the video end.
    start_off = round((crash - measure_off) * hz) - 1
    if start_off < end_on + 1:
        raise InfeasibleSpecError("coverage targets exceed the window capacity")
    if start_off > n_total - 4:
        raise InfeasibleSpecError("off-CIO dwell would start too late to register")
    pos[i_star : end_on + 1] = CIO_CENTER
    _fill_walk(pos, end_on + 1, start_off)
    pos[start_off:] = POINT_SIDE
    return pos, i_star


def _wander_layout(n_total: int) -> np.ndarray:
    """Off-box gaze for negative and missed trials: three long dwells."""
    pos = np.empty((n_total, 2))
    first = n_total // 3
    second = 2 * n_total // 3
    pos[:first] = POINT_ROAD
    pos[first:second] = POINT_SIDE
    pos[second:] = POINT_ROAD
    return pos


def generate_trial(
    spec: TrialSpec,
    config: Config,
    participant_id: str = "p1",
    session_index: int = 1,
) -> tuple[list[GazeSample], VideoMeta]:
    """Generate one trial's unlabeled gaze stream and its video annotation."""
    if spec.category not in (CATEGORY_POSITIVE, CATEGORY_NEGATIVE):
        raise InfeasibleSpecError(f"bad category {spec.category!r}")
    hz = config.gaze_hz
    n_total = int(round(VIDEO_DURATION_S * hz))

    if spec.category == CATEGORY_NEGATIVE:
        if spec.crash_start_s is not None or spec.cio_first_frame is not None or spec.miss:
            raise InfeasibleSpecError("negative trials carry no crash, CIO, or miss flag")
        pos = _wander_layout(n_total)
    else:
        if spec.cio_first_frame is None or not 0 <= spec.cio_first_frame < VIDEO_N_FRAMES:
            raise InfeasibleSpecError("positive trials need a CIO first frame in range")
        if spec.crash_start_s is None:
            raise InfeasibleSpecError("positive trials need a crash start time")
        if spec.cio_onset_s >= spec.crash_start_s:
            raise InfeasibleSpecError("the CIO must appear before the crash")
        if spec.miss:
            pos = _wander_layout(n_total)
        else:
            if spec.planted_latency_s is None:
                raise InfeasibleSpecError("non-miss positive trials need a planted latency")
            pos, _ = _positive_layout(spec, config)

    rng = np.random.default_rng(spec.noise_seed)
    pos = pos + rng.uniform(-JITTER, JITTER, pos.shape)

    trial_id = f"{participant_id}:{session_index}:{spec.video_id}"
    samples = [
        GazeSample(trial_id, participant_id, session_index, i / hz,
                   float(pos[i, 0]), float(pos[i, 1]), LABEL_UNLABELED, True)
        for i in range(n_total)
    ]
    return samples, _video_meta(spec)


def generate_session(n_pos: int, n_neg: int, seed: int, config: Config) -> SessionPlan:
    """Shuffled video order with 1 s blanks; ids are v001.. with positives first."""
    if n_pos < 0 or n_neg < 0:
        raise ValueError("video counts must be >= 0")
    ids = [(f"v{i + 1:03d}", CATEGORY_POSITIVE) for i in range(n_pos)]
    ids += [(f"v{n_pos + i + 1:03d}", CATEGORY_NEGATIVE) for i in range(n_neg)]
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(ids))
    entries = []
    start = 0.0
    for j, idx in enumerate(order):
        vid, category = ids[idx]
        entries.append((vid, category, start))
        start += VIDEO_DURATION_S
        if j < len(ids) - 1:
            start += BLANK_GAP_S
    total = start if ids else 0.0
    return SessionPlan(entries=tuple(entries), total_duration_s=total)


def random_video_params(rng: np.random.Generator) -> tuple[int, float]:
    """Random (cio_first_frame, crash_start_s) within the protocol envelope."""
    cio_first_frame = int(rng.integers(1, 16))  # onset in [0.1, 1.5] s
    onset = cio_first_frame / VIDEO_FPS
    crash = float(rng.uniform(max(3.0, onset + 1.5), 4.5))
    return cio_first_frame, crash


def random_trial_spec(
    rng: np.random.Generator,
    config: Config,
    video_id: str = "v001",
    cio_first_frame: int | None = None,
    crash_start_s: float | None = None,
    kind: str | None = None,
) -> TrialSpec:
    """A random feasible positive-trial spec.

    ``kind`` picks the scenario: "normal" (attends before the crash),
    "full" (uninterrupted CIO dwell, both coverages exactly 1), "late"
    (attends only after the crash), or "miss"; None draws one at random.
    """
    if cio_first_frame is None or crash_start_s is None:
        cio_first_frame, crash_start_s = random_video_params(rng)
    onset = cio_first_frame / VIDEO_FPS
    if kind is None:
        kind = rng.choice(["normal", "normal", "normal", "full", "late", "miss"])
    seed = int(rng.integers(0, 2**62))
    dt = 1.0 / config.gaze_hz

    if kind == "miss":
        return TrialSpec(video_id, CATEGORY_POSITIVE, crash_start_s, cio_first_frame,
                         miss=True, noise_seed=seed)
    if kind == "late":
        lo = max(-0.8, crash_start_s - (VIDEO_DURATION_S - 0.15))
        attention = float(rng.uniform(lo, -0.15))
        latency = crash_start_s - onset - attention
        return TrialSpec(video_id, CATEGORY_POSITIVE, crash_start_s, cio_first_frame,
                         planted_latency_s=latency, noise_seed=seed)
    if kind == "full":
        attention = float(rng.uniform(1.0, crash_start_s - onset - 0.05))
        latency = crash_start_s - onset - attention
        return TrialSpec(video_id, CATEGORY_POSITIVE, crash_start_s, cio_first_frame,
                         planted_latency_s=latency, fixation_coverage=1.0,
                         cio_coverage=1.0, noise_seed=seed)

    attention = float(rng.uniform(1.0, crash_start_s - onset - 0.05))
    latency = crash_start_s - onset - attention
    fixation_coverage = float(rng.uniform(0.35, 0.9))
    # Keep both realizable dwells (on- and off-CIO) above the minimum.
    floor = 0.075 / (fixation_coverage * attention)
    if rng.random() < 0.2 or floor >= 1.0 - floor:
        cio_coverage = 1.0
    else:
        cio_coverage = float(rng.uniform(max(0.25, floor), 1.0 - floor))
    return TrialSpec(video_id, CATEGORY_POSITIVE, crash_start_s, cio_first_frame,
                     planted_latency_s=latency, fixation_coverage=fixation_coverage,
                     cio_coverage=cio_coverage, noise_seed=seed)


def _plant_mttc(
    rng: np.random.Generator,
    durations_by_video: dict[str, list[float]],
    video_ids: Sequence[str],
    n_exceedances: int | None,
    dt: float,
) -> dict[str, float]:
    """Choose per-video mTTC values, optionally forcing the exact number of
    individual planted durations that exceed them.

    Every chosen value keeps a >= 3 sample-period margin from each planted
    duration so recovered durations land on the same side.
    """
    margin = 3.0 * dt
    mttc: dict[str, float] = {}
    if n_exceedances is None:
        for vid in video_ids:
            ds = durations_by_video.get(vid, [])
            for _ in range(1000):
                value = float(rng.uniform(1.0, 4.0))
                if all(abs(value - d) >= margin for d in ds):
                    mttc[vid] = value
                    break
            else:
                raise RuntimeError(f"could not place an mTTC for video {vid}")
        return mttc

    # Exceedance counts are planted by placing each video's mTTC between
    # order statistics of its planted durations.  Start every video at zero
    # exceedances (always placeable above the maximum) and raise counts
    # round-robin by the smallest feasible increments until the target is met.
    options: dict[str, list[tuple[int, float]]] = {}
    for vid in video_ids:
        ds = sorted(durations_by_video.get(vid, []), reverse=True)
        feasible = []
        for e in range(len(ds) + 1):
            if e == 0:
                value = (ds[0] + 0.5) if ds else 2.0
            elif e == len(ds):
                value = ds[-1] - 0.5
            else:
                value = 0.5 * (ds[e - 1] + ds[e])
            if value >= 0 and all(abs(value - d) >= margin for d in ds):
                feasible.append((e, value))
        options[vid] = feasible

    chosen = {vid: 0 for vid in video_ids}  # index into options[vid]
    remaining = n_exceedances
    progress = True
    while remaining > 0 and progress:
        progress = False
        for vid in video_ids:
            opts = options[vid]
            i = chosen[vid]
            if i + 1 < len(opts):
                delta = opts[i + 1][0] - opts[i][0]
                if delta <= remaining:
                    chosen[vid] = i + 1
                    remaining -= delta
                    progress = True
                    if remaining == 0:
                        break
    if remaining != 0:
        raise RuntimeError(
            f"failed to place {n_exceedances} requested exceedances; try another seed")
    for vid in video_ids:
        mttc[vid] = float(options[vid][chosen[vid]][1])
    return mttc


def generate_study(
    n_participants: int = 6,
    n_sessions: int = 2,
    n_pos: int = 50,
    n_neg: int = 50,
    seed: int = 0,
    config: Config | None = None,
    n_miss: int = 0,
    n_exceedances: int | None = None,
) -> StudyData:
    """A full synthetic study following the lab protocol shape.

    Each participant views every session's shuffled sequence of the same
    videos.  ``n_miss`` positive trials (exactly) are planted as misses;
    ``n_exceedances`` optionally forces how many planted durations exceed
    their video's AI mTTC.
    """
    if config is None:
        config = Config()
    if not 1 <= n_sessions <= 2:
        raise ValueError("n_sessions must be 1 or 2 (the gaze log contract)")
    rng = np.random.default_rng(seed)
    dt = 1.0 / config.gaze_hz

    video_params = {}
    for i in range(n_pos):
        video_params[f"v{i + 1:03d}"] = random_video_params(rng)

    participants = [f"p{i + 1}" for i in range(n_participants)]
    slots = [
        (p, s, f"v{i + 1:03d}")
        for p in participants
        for s in range(1, n_sessions + 1)
        for i in range(n_pos)
    ]
    if n_miss > len(slots):
        raise ValueError(f"cannot plant {n_miss} misses in {len(slots)} positive trials")
    miss_slots = set()
    if n_miss:
        chosen = rng.choice(len(slots), size=n_miss, replace=False)
        miss_slots = {slots[i] for i in chosen}

    specs: dict[str, TrialSpec] = {}
    videos: dict[str, VideoMeta] = {}
    trials: list[tuple[str, list[GazeSample]]] = []
    session_plans: dict[tuple[str, int], SessionPlan] = {}
    durations_by_video: dict[str, list[float]] = {}

    for p_idx, participant in enumerate(participants):
        for session in range(1, n_sessions + 1):
            plan_seed = int(rng.integers(0, 2**62))
            plan = generate_session(n_pos, n_neg, plan_seed, config)
            session_plans[(participant, session)] = plan
            for vid, category, _ in plan.entries:
                if category == CATEGORY_POSITIVE:
                    cio_frame, crash = video_params[vid]
                    if (participant, session, vid) in miss_slots:
                        spec = random_trial_spec(rng, config, vid, cio_frame, crash,
                                                 kind="miss")
                    else:
                        kind = "late" if rng.random() < 0.03 else None
                        if kind is None:
                            kind = str(rng.choice(["normal", "normal", "normal", "full"]))
                        spec = random_trial_spec(rng, config, vid, cio_frame, crash,
                                                 kind=kind)
                        planted = spec.planted_attention_s
                        if planted is not None:
                            durations_by_video.setdefault(vid, []).append(planted)
                else:
                    spec = TrialSpec(vid, CATEGORY_NEGATIVE,
                                     noise_seed=int(rng.integers(0, 2**62)))
                samples, meta = generate_trial(spec, config, participant, session)
                videos.setdefault(vid, meta)
                specs[samples[0].trial_id] = spec
                trials.append((samples[0].trial_id, samples))

    pos_ids = sorted(video_params)
    mttc = _plant_mttc(rng, durations_by_video, pos_ids, n_exceedances, dt)
    video_list = [videos[vid] for vid in sorted(videos)]
    return StudyData(
        videos=video_list,
        trials=trials,
        specs=specs,
        ai=AIReference(mttc),
        session_plans=session_plans,
    )


PLANTED_HEADER = [
    "trial_id", "video_id", "participant_id", "session", "category", "miss",
    "planted_latency_s", "planted_attention_s", "fixation_coverage", "cio_coverage",
]


def format_planted_csv(study: StudyData) -> str:
    """Ground-truth table for a generated study, one row per trial."""

    def fmt(value) -> str:
        if value is None:
            return ""
        if isinstance(value, bool):
            return "1" if value else "0"
        if isinstance(value, float):
            return f"{value:.9g}"
        return str(value)

    rows = [",".join(PLANTED_HEADER)]
    for trial_id, samples in study.trials:
        spec = study.specs[trial_id]
        head = samples[0]
        rows.append(",".join([
            trial_id, spec.video_id, head.participant_id, str(head.session_index),
            spec.category, fmt(spec.miss), fmt(spec.planted_latency_s),
            fmt(spec.planted_attention_s), fmt(spec.fixation_coverage),
            fmt(spec.cio_coverage),
        ]))
    return "\n".join(rows) + "\n"


def oracle_length(
    intervals: Iterable[Sequence[float]],
    window: Sequence[float],
    dt: float = 0.001,
) -> float:
    """Brute-force measure of (union of intervals) ∩ window on a dt grid.

    Counts grid midpoints; independent of the analytic interval algebra.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    pairs = [(float(s), float(e)) for s, e in intervals]
    ws, we = float(window[0]), float(window[1])
    horizon = max([we] + [e for _, e in pairs], default=we)
    n = int(math.ceil(horizon / dt)) + 1
    ts = (np.arange(n) + 0.5) * dt
    inside = np.zeros(n, dtype=bool)
    for s, e in pairs:
        inside |= (ts >= s) & (ts <= e)
    inside &= (ts >= ws) & (ts <= we)
    return float(np.count_nonzero(inside)) * dt
