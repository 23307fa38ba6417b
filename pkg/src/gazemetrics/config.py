"""Analysis configuration: screen geometry, classifier thresholds, grid sizes.

Config files are plain text, one ``key = value`` per line; ``#`` starts a
comment.  Unknown keys are rejected.  Every key can also be overridden from
the environment with a ``GAM_`` prefix (e.g. ``GAM_ALPHA=0.01``).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import IO, Mapping

HEATMAP_PER_SAMPLE = "per_sample"
HEATMAP_PER_FIXATION = "per_fixation"


@dataclass(frozen=True)
class Config:
    # Physical setup used to convert on-screen displacement to visual angle.
    # Defaults describe a 23.8" 16:9 monitor viewed from 650 mm.
    screen_width_mm: float = 527.0
    screen_height_mm: float = 296.0
    viewer_distance_mm: float = 650.0
    gaze_hz: float = 120.0
    ivt_velocity_threshold: float = 30.0  # deg/s
    min_fixation_ms: float = 60.0
    max_gap_ms: float = 75.0
    alpha: float = 0.05
    grid_w: int = 64
    grid_h: int = 36
    heatmap_weighting: str = HEATMAP_PER_SAMPLE

    def validate(self) -> None:
        for name in (
            "screen_width_mm",
            "screen_height_mm",
            "viewer_distance_mm",
            "gaze_hz",
            "ivt_velocity_threshold",
            "min_fixation_ms",
            "max_gap_ms",
        ):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.grid_w < 1 or self.grid_h < 1:
            raise ConfigError(f"grid dimensions must be >= 1, got {self.grid_w}x{self.grid_h}")
        if self.heatmap_weighting not in (HEATMAP_PER_SAMPLE, HEATMAP_PER_FIXATION):
            raise ConfigError(
                f"heatmap_weighting must be '{HEATMAP_PER_SAMPLE}' or "
                f"'{HEATMAP_PER_FIXATION}', got {self.heatmap_weighting!r}"
            )


class ConfigError(ValueError):
    """Bad configuration file contents or values."""


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(Config)}


def _convert(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_config(text: str) -> Config:
    """Parse ``key = value`` lines into a Config, starting from defaults."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        values[key] = _convert(key, raw.strip())
    config = Config(**values)
    config.validate()
    return config


def load_config(source: str | IO[str] | None = None) -> Config:
    """Load a config from a path or open text file; None gives defaults."""
    if source is None:
        return Config()
    if isinstance(source, str):
        with open(source, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    return parse_config(source.read())


def apply_env_overrides(config: Config, environ: Mapping[str, str]) -> Config:
    """Apply GAM_<KEY> environment overrides on top of an existing config."""
    values = {}
    for key in _FIELD_TYPES:
        raw = environ.get("GAM_" + key.upper())
        if raw is not None:
            values[key] = _convert(key, raw)
    if not values:
        return config
    config = dataclasses.replace(config, **values)
    config.validate()
    return config


def format_config(config: Config) -> str:
    """Serialize a Config in the same ``key = value`` format that is parsed."""
    lines = []
    for f in dataclasses.fields(Config):
        value = getattr(config, f.name)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"
