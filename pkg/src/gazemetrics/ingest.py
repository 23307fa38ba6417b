"""Parsing and validation of gaze logs, video annotations, and AI tables.

Canonical file formats (all UTF-8):

* Gaze log CSV, header ``trial_id,participant_id,session,t,x,y,label,valid``.
  ``t`` is seconds relative to the trial (video) start; ``x``/``y`` are
  normalized screen coordinates in [0, 1] with the origin at the bottom
  left; ``label`` is one of ``F`` (fixation), ``S`` (saccade), ``U``
  (unknown) or ``-`` (unlabeled); ``valid`` is 0/1.  Invalid rows may leave
  ``x``/``y`` empty.
* Annotations JSON: one document ``{"videos": [...]}``; boxes are given in
  pixels (same bottom-left origin) and are normalized while parsing.
* AI reference CSV, header ``video_id,mttc_s``.

Trial ids use the convention ``<participant>:<session>:<video_id>`` so a
trial can be joined to its video; :func:`video_id_of` extracts the suffix.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Mapping, Sequence

LABEL_FIXATION = "fixation"
LABEL_SACCADE = "saccade"
LABEL_UNKNOWN = "unknown"
LABEL_UNLABELED = "unlabeled"

_LABEL_FROM_TOKEN = {
    "F": LABEL_FIXATION,
    "S": LABEL_SACCADE,
    "U": LABEL_UNKNOWN,
    "-": LABEL_UNLABELED,
}
_TOKEN_FROM_LABEL = {v: k for k, v in _LABEL_FROM_TOKEN.items()}

CATEGORY_POSITIVE = "positive"
CATEGORY_NEGATIVE = "negative"

GAZE_LOG_HEADER = ["trial_id", "participant_id", "session", "t", "x", "y", "label", "valid"]
AI_REFERENCE_HEADER = ["video_id", "mttc_s"]


class ParseError(ValueError):
    """Input file violates its format contract."""


@dataclass(slots=True)
class GazeSample:
    trial_id: str
    participant_id: str
    session_index: int
    t: float
    x: float
    y: float
    label: str
    valid: bool


@dataclass(frozen=True)
class Box:
    """Axis-aligned box, normalized coordinates, lower-left / upper-right."""

    x1: float
    y1: float
    x2: float
    y2: float

    def contains(self, x: float, y: float) -> bool:
        # Closed on all edges so boundary hits count as inside.
        return self.x1 <= x <= self.x2 and self.y1 <= y <= self.y2


@dataclass(frozen=True)
class VideoMeta:
    video_id: str
    category: str
    fps: float
    n_frames: int
    frame_width_px: float
    frame_height_px: float
    crash_start_s: float | None = None
    cio_tracks: tuple[tuple[str, tuple[tuple[int, Box], ...]], ...] = ()

    @property
    def duration_s(self) -> float:
        return self.n_frames / self.fps

    @property
    def is_positive(self) -> bool:
        return self.category == CATEGORY_POSITIVE


@dataclass(frozen=True)
class AIReference:
    """Per-video mean time-to-crash of the reference AI model, seconds."""

    mttc_s: Mapping[str, float] = field(default_factory=dict)

    def __contains__(self, video_id: str) -> bool:
        return video_id in self.mttc_s

    def __getitem__(self, video_id: str) -> float:
        return self.mttc_s[video_id]

    def __iter__(self):
        return iter(self.mttc_s)

    def __len__(self) -> int:
        return len(self.mttc_s)


@dataclass(frozen=True)
class ValidationIssue:
    severity: str  # "error" or "warning"
    message: str


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...]

    @property
    def n_errors(self) -> int:
        return sum(1 for issue in self.issues if issue.severity == "error")

    @property
    def n_warnings(self) -> int:
        return sum(1 for issue in self.issues if issue.severity == "warning")


def video_id_of(trial_id: str) -> str:
    """Video id embedded in a canonical ``participant:session:video`` trial id."""
    return trial_id.rsplit(":", 1)[-1]


def _read_text(source: str | bytes | IO) -> str:
    """Accept a path, raw bytes, or an open (byte or text) stream."""
    if isinstance(source, bytes):
        return source.decode("utf-8")
    if isinstance(source, str):
        with open(source, "rb") as fh:
            return fh.read().decode("utf-8")
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def parse_gaze_log(source: str | bytes | IO, config=None) -> list[tuple[str, list[GazeSample]]]:
    """Parse a gaze log CSV into per-trial sample lists, sorted by trial id.

    Invalid rows are retained with valid=False.  Raises ParseError (with the
    line number) on malformed rows, unknown label tokens, coordinates out of
    range on valid rows, and timestamps that regress within a trial.
    """
    text = _read_text(source)
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("gaze log is empty (missing header)") from None
    if header != GAZE_LOG_HEADER:
        raise ParseError(f"unexpected gaze log header: {','.join(header)}")

    trials: dict[str, list[GazeSample]] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 8:
            raise ParseError(f"line {lineno}: expected 8 fields, got {len(row)}")
        trial_id, participant_id, session_raw, t_raw, x_raw, y_raw, token, valid_raw = row
        try:
            session = int(session_raw)
            t = float(t_raw)
        except ValueError:
            raise ParseError(f"line {lineno}: malformed numeric field") from None
        if session not in (1, 2):
            raise ParseError(f"line {lineno}: session must be 1 or 2, got {session_raw}")
        if valid_raw == "1":
            valid = True
        elif valid_raw == "0":
            valid = False
        else:
            raise ParseError(f"line {lineno}: valid must be 0 or 1, got {valid_raw!r}")
        if x_raw == "" or y_raw == "":
            if valid:
                raise ParseError(f"line {lineno}: valid sample with empty coordinates")
            x, y = math.nan, math.nan
        else:
            try:
                x = float(x_raw)
                y = float(y_raw)
            except ValueError:
                raise ParseError(f"line {lineno}: malformed coordinate") from None
        if valid and not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise ParseError(f"line {lineno}: coordinates ({x}, {y}) outside [0, 1]")
        if t < 0:
            raise ParseError(f"line {lineno}: negative timestamp {t}")
        label = _LABEL_FROM_TOKEN.get(token)
        if label is None:
            raise ParseError(f"line {lineno}: unknown label token {token!r}")

        samples = trials.get(trial_id)
        if samples is None:
            trials[trial_id] = samples = []
        elif samples[-1].t > t:
            raise ParseError(
                f"line {lineno}: timestamp {t} regresses within trial {trial_id}"
            )
        samples.append(
            GazeSample(trial_id, participant_id, session, t, x, y, label, valid)
        )
    return [(trial_id, trials[trial_id]) for trial_id in sorted(trials)]


def write_gaze_log(trials: Iterable[tuple[str, Sequence[GazeSample]]]) -> str:
    """Serialize trials back to the gaze log CSV format (9-decimal floats)."""
    out = [",".join(GAZE_LOG_HEADER)]
    for _, samples in trials:
        for s in samples:
            if math.isnan(s.x) or math.isnan(s.y):
                coords = ","
            else:
                coords = f"{s.x:.9f},{s.y:.9f}"
            out.append(
                f"{s.trial_id},{s.participant_id},{s.session_index},"
                f"{s.t:.9f},{coords},{_TOKEN_FROM_LABEL[s.label]},{int(s.valid)}"
            )
    return "\n".join(out) + "\n"


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ParseError(message)


def parse_annotations(source: str | bytes | IO) -> list[VideoMeta]:
    """Parse the annotation JSON; pixel boxes are normalized to [0, 1]."""
    try:
        doc = json.loads(_read_text(source))
    except json.JSONDecodeError as exc:
        raise ParseError(f"annotations are not valid JSON: {exc}") from None
    _require(isinstance(doc, dict) and isinstance(doc.get("videos"), list),
             "annotations must be an object with a 'videos' list")
    videos = []
    seen = set()
    for entry in doc["videos"]:
        vid = entry.get("video_id")
        _require(isinstance(vid, str) and vid != "", "video entry without video_id")
        _require(vid not in seen, f"duplicate video_id {vid!r}")
        seen.add(vid)
        category = entry.get("category")
        _require(category in (CATEGORY_POSITIVE, CATEGORY_NEGATIVE),
                 f"video {vid}: bad category {category!r}")
        fps = float(entry.get("fps", 0))
        n_frames = entry.get("n_frames", 0)
        width = float(entry.get("frame_width_px", 0))
        height = float(entry.get("frame_height_px", 0))
        _require(fps > 0, f"video {vid}: fps must be positive")
        _require(isinstance(n_frames, int) and n_frames >= 1,
                 f"video {vid}: n_frames must be a positive integer")
        _require(width > 0 and height > 0, f"video {vid}: bad frame geometry")
        duration = n_frames / fps

        crash = entry.get("crash_start_s")
        if category == CATEGORY_POSITIVE:
            _require(crash is not None, f"positive video {vid} missing crash_start_s")
            crash = float(crash)
            _require(3.0 <= crash <= duration,
                     f"video {vid}: crash_start_s {crash} outside [3, {duration}]")
        else:
            _require(crash is None, f"negative video {vid} carries crash_start_s")
            _require(not entry.get("cio_tracks"),
                     f"negative video {vid} carries cio_tracks")

        tracks = []
        for track in entry.get("cio_tracks") or []:
            object_id = str(track.get("object_id", ""))
            boxes = []
            for box in track.get("boxes") or []:
                frame = box.get("frame")
                _require(isinstance(frame, int) and 0 <= frame < n_frames,
                         f"video {vid}: box frame {frame} outside [0, {n_frames})")
                x1, y1 = float(box["x1_px"]), float(box["y1_px"])
                x2, y2 = float(box["x2_px"]), float(box["y2_px"])
                _require(0 <= x1 < x2 <= width and 0 <= y1 < y2 <= height,
                         f"video {vid}: box at frame {frame} outside the frame")
                boxes.append((frame, Box(x1 / width, y1 / height, x2 / width, y2 / height)))
            tracks.append((object_id, tuple(boxes)))
        videos.append(
            VideoMeta(
                video_id=vid,
                category=category,
                fps=fps,
                n_frames=n_frames,
                frame_width_px=width,
                frame_height_px=height,
                crash_start_s=crash,
                cio_tracks=tuple(tracks),
            )
        )
    return videos


def write_annotations(videos: Iterable[VideoMeta]) -> str:
    """Serialize VideoMeta records back to annotation JSON (pixel boxes)."""
    doc = {"videos": []}
    for v in videos:
        entry = {
            "video_id": v.video_id,
            "category": v.category,
            "fps": v.fps,
            "n_frames": v.n_frames,
            "frame_width_px": v.frame_width_px,
            "frame_height_px": v.frame_height_px,
        }
        if v.crash_start_s is not None:
            entry["crash_start_s"] = v.crash_start_s
        if v.cio_tracks:
            entry["cio_tracks"] = [
                {
                    "object_id": object_id,
                    "boxes": [
                        {
                            "frame": frame,
                            "x1_px": box.x1 * v.frame_width_px,
                            "y1_px": box.y1 * v.frame_height_px,
                            "x2_px": box.x2 * v.frame_width_px,
                            "y2_px": box.y2 * v.frame_height_px,
                        }
                        for frame, box in boxes
                    ],
                }
                for object_id, boxes in v.cio_tracks
            ]
        doc["videos"].append(entry)
    return json.dumps(doc, indent=2) + "\n"


def parse_ai_reference(source: str | bytes | IO) -> AIReference:
    """Parse the two-column AI reference CSV (video_id, mttc_s)."""
    reader = csv.reader(io.StringIO(_read_text(source)))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("AI reference is empty (missing header)") from None
    if header != AI_REFERENCE_HEADER:
        raise ParseError(f"unexpected AI reference header: {','.join(header)}")
    values: dict[str, float] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise ParseError(f"line {lineno}: expected 2 fields, got {len(row)}")
        vid, raw = row
        if vid in values:
            raise ParseError(f"line {lineno}: duplicate video_id {vid!r}")
        try:
            mttc = float(raw)
        except ValueError:
            raise ParseError(f"line {lineno}: malformed mttc_s {raw!r}") from None
        if not math.isfinite(mttc) or mttc < 0:
            raise ParseError(f"line {lineno}: mttc_s must be finite and >= 0, got {raw}")
        values[vid] = mttc
    return AIReference(values)


def write_ai_reference(ai: AIReference) -> str:
    out = [",".join(AI_REFERENCE_HEADER)]
    for vid in sorted(ai.mttc_s):
        out.append(f"{vid},{ai.mttc_s[vid]:.9f}")
    return "\n".join(out) + "\n"


def validate_dataset(
    trials: Sequence[tuple[str, Sequence[GazeSample]]],
    videos: Sequence[VideoMeta],
    ai: AIReference,
) -> ValidationReport:
    """Cross-check trials, annotations, and the AI table; never raises."""
    issues: list[ValidationIssue] = []
    by_id = {v.video_id: v for v in videos}
    for trial_id, samples in trials:
        video = by_id.get(video_id_of(trial_id))
        if video is None:
            issues.append(ValidationIssue(
                "error", f"trial {trial_id} references unknown video {video_id_of(trial_id)!r}"))
            continue
        n_valid = sum(1 for s in samples if s.valid)
        if samples and n_valid / len(samples) < 0.5:
            issues.append(ValidationIssue(
                "warning",
                f"trial {trial_id}: only {n_valid}/{len(samples)} samples are valid"))
        # Expect roughly gaze_hz / fps valid samples per frame; warn well below.
        if video.n_frames and n_valid / video.n_frames < 6.0:
            issues.append(ValidationIssue(
                "warning",
                f"trial {trial_id}: {n_valid / video.n_frames:.1f} valid samples per frame "
                f"(degraded recording?)"))
    for video in videos:
        if video.is_positive and video.video_id not in ai:
            issues.append(ValidationIssue(
                "warning", f"positive video {video.video_id} has no AI reference"))
        if video.is_positive and not video.cio_tracks:
            issues.append(ValidationIssue(
                "error", f"positive video {video.video_id} has no CIO tracks"))
    return ValidationReport(tuple(issues))
