"""Gaze-based crash-anticipation analytics.

Turns eye-tracker gaze logs and per-frame object annotations from dashcam
viewing experiments into earliness and attention measures: fixations,
latency to the first crash-involving object, early attention duration,
attention fractions, recall upper bound, heat maps, ANOVA, and a
human-vs-AI earliness comparison.
"""

from gazemetrics.config import Config, load_config
from gazemetrics.ingest import (
    AIReference,
    Box,
    GazeSample,
    VideoMeta,
    parse_ai_reference,
    parse_annotations,
    parse_gaze_log,
    validate_dataset,
)
from gazemetrics.fixation import Fixation, angular_velocity, classify_samples, group_fixations
from gazemetrics.intervals import IntervalSet, intersect, normalize, total_length
from gazemetrics.metrics import (
    ComparisonResult,
    TrialMetrics,
    compare_with_ai,
    compute_trial_metrics,
    first_cio_appearance,
    first_cio_hit,
    instant_attention_series,
    recall_upper_bound,
    video_mean_duration,
)
from gazemetrics.stats import AnovaResult, SummaryStats, f_critical, one_way_anova, summarize

__version__ = "0.1.0"
