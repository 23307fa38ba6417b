"""End-to-end analysis driver and report serialization.

Output contract: ``trial_metrics.csv`` has one row per experiment with the
header ``trial_id,video_id,participant_id,session,T_B,T_A,L,first_cio_hit_s,
D,rho_F_pre,rho_F_D,rho_R_D,rho_ratio,missed_cio,attended_before_crash``
(missing values are empty fields, booleans are 1/0);
``comparison.csv`` has ``video_id,mD,mTTC,diff``.  Floats are printed with
nine significant digits so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Sequence

from gazemetrics import heatmap as heatmap_mod
from gazemetrics.config import HEATMAP_PER_FIXATION, Config
from gazemetrics.fixation import Fixation, classify_samples, group_fixations
from gazemetrics.ingest import (
    CATEGORY_NEGATIVE,
    CATEGORY_POSITIVE,
    AIReference,
    GazeSample,
    VideoMeta,
    video_id_of,
)
from gazemetrics.metrics import (
    ASSUMED_HUMAN_PRECISION,
    ComparisonResult,
    RecallBound,
    TrialMetrics,
    compare_with_ai,
    compute_trial_metrics,
    instant_attention_series,
    recall_upper_bound,
    video_mean_duration,
)
from gazemetrics.stats import (
    AnovaResult,
    SummaryStats,
    binomial_ci_half,
    f_critical,
    one_way_anova,
    summarize,
)

TRIAL_METRICS_HEADER = [
    "trial_id", "video_id", "participant_id", "session",
    "T_B", "T_A", "L", "first_cio_hit_s", "D",
    "rho_F_pre", "rho_F_D", "rho_R_D", "rho_ratio",
    "missed_cio", "attended_before_crash",
]
COMPARISON_HEADER = ["video_id", "mD", "mTTC", "diff"]


class DatasetError(ValueError):
    """The dataset is internally inconsistent (e.g. a trial without a video)."""


@dataclass
class TrialResult:
    trial_id: str
    video: VideoMeta
    samples: list[GazeSample]  # classified
    fixations: list[Fixation]
    metrics: TrialMetrics


@dataclass
class StudyReport:
    trial_results: list[TrialResult]
    recall: RecallBound | None
    recall_ci_half: float | None
    latency_stats: SummaryStats | None
    attention_stats: SummaryStats | None
    fraction_stats: dict[str, SummaryStats | None]
    anova_latency: AnovaResult | None
    anova_attention: AnovaResult | None
    comparison: ComparisonResult
    grid_pos: heatmap_mod.Grid
    grid_neg: heatmap_mod.Grid
    instant_mean_pos: list[float | None]
    instant_mean_neg: list[float | None]
    alpha: float

    @property
    def trial_metrics(self) -> list[TrialMetrics]:
        return [r.metrics for r in self.trial_results]


def analyze_trials(
    trials: Sequence[tuple[str, Sequence[GazeSample]]],
    videos: Sequence[VideoMeta],
    config: Config,
) -> list[TrialResult]:
    """Classify, group, and measure every trial (order of input preserved)."""
    by_id = {v.video_id: v for v in videos}
    results = []
    for trial_id, samples in trials:
        video = by_id.get(video_id_of(trial_id))
        if video is None:
            raise DatasetError(
                f"trial {trial_id} references unknown video {video_id_of(trial_id)!r}; "
                "run the validate command for a full report")
        classified = classify_samples(samples, config)
        fixations = group_fixations(classified, config)
        metrics = compute_trial_metrics(fixations, classified, video, config)
        results.append(TrialResult(trial_id, video, classified, fixations, metrics))
    return results


def participant_groups(
    trial_metrics: Sequence[TrialMetrics], field: str
) -> list[list[float]]:
    groups: dict[str, list[float]] = {}
    for t in trial_metrics:
        value = getattr(t, field)
        if value is not None:
            groups.setdefault(t.participant_id, []).append(value)
    return [groups[p] for p in sorted(groups)]


def anova_or_none(groups: list[list[float]], alpha: float) -> AnovaResult | None:
    if len(groups) < 2 or sum(len(g) for g in groups) <= len(groups):
        return None
    return one_way_anova(groups, alpha)


def _mean_series(series_list: list[list[float | None]]) -> list[float | None]:
    if not series_list:
        return []
    n = max(len(s) for s in series_list)
    out: list[float | None] = []
    for i in range(n):
        values = [s[i] for s in series_list if i < len(s) and s[i] is not None]
        out.append(sum(values) / len(values) if values else None)
    return out


def build_report(
    trials: Sequence[tuple[str, Sequence[GazeSample]]],
    videos: Sequence[VideoMeta],
    ai: AIReference,
    config: Config,
) -> StudyReport:
    """Run the full analysis and aggregate everything the report emits."""
    results = analyze_trials(trials, videos, config)
    results.sort(key=lambda r: r.trial_id)  # reductions in deterministic order
    tm = [r.metrics for r in results]
    positive = [t for t in tm if t.missed_cio is not None]

    recall = recall_ci = None
    if positive:
        recall = recall_upper_bound(positive)
        recall_ci = binomial_ci_half(recall.n_attended, recall.n_trials, config.alpha)

    latencies = [t.latency_s for t in positive if t.latency_s is not None]
    attentions = [t.early_attention_s for t in positive if t.early_attention_s is not None]
    latency_stats = summarize(latencies, config.alpha) if latencies else None
    attention_stats = summarize(attentions, config.alpha) if attentions else None

    fraction_stats = {}
    for name, field in (
        ("rho_F_pre", "fixation_fraction_pre"),
        ("rho_F_D", "fixation_fraction_window"),
        ("rho_R_D", "cio_fixation_fraction"),
        ("rho_ratio", "cio_attention_ratio"),
    ):
        values = [getattr(t, field) for t in positive if getattr(t, field) is not None]
        fraction_stats[name] = summarize(values, config.alpha) if values else None

    anova_latency = anova_or_none(participant_groups(positive, "latency_s"), config.alpha)
    anova_attention = anova_or_none(
        participant_groups(positive, "early_attention_s"), config.alpha)

    mean_durations = video_mean_duration(positive)
    all_durations = [
        (t.video_id, t.early_attention_s)
        for t in positive
        if t.early_attention_s is not None
    ]
    comparison = compare_with_ai(mean_durations, ai, all_durations, config)

    per_fixation = config.heatmap_weighting == HEATMAP_PER_FIXATION
    grids = {}
    for category in (CATEGORY_POSITIVE, CATEGORY_NEGATIVE):
        in_category = [r for r in results if r.video.category == category]
        if per_fixation:
            grids[category] = heatmap_mod.accumulate_centroids(
                (f for r in in_category for f in r.fixations),
                config.grid_w, config.grid_h)
        else:
            grids[category] = heatmap_mod.accumulate(
                (s for r in in_category for s in r.samples),
                config.grid_w, config.grid_h)

    instant = {CATEGORY_POSITIVE: [], CATEGORY_NEGATIVE: []}
    for r in results:
        instant[r.video.category].append(instant_attention_series(r.samples, r.video))

    return StudyReport(
        trial_results=results,
        recall=recall,
        recall_ci_half=recall_ci,
        latency_stats=latency_stats,
        attention_stats=attention_stats,
        fraction_stats=fraction_stats,
        anova_latency=anova_latency,
        anova_attention=anova_attention,
        comparison=comparison,
        grid_pos=grids[CATEGORY_POSITIVE],
        grid_neg=grids[CATEGORY_NEGATIVE],
        instant_mean_pos=_mean_series(instant[CATEGORY_POSITIVE]),
        instant_mean_neg=_mean_series(instant[CATEGORY_NEGATIVE]),
        alpha=config.alpha,
    )


def fmt_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def format_trial_metrics_csv(trial_metrics: Sequence[TrialMetrics]) -> str:
    rows = [",".join(TRIAL_METRICS_HEADER)]
    for t in trial_metrics:
        rows.append(",".join([
            t.trial_id, t.video_id, t.participant_id, str(t.session_index),
            fmt_value(t.cio_onset_s), fmt_value(t.cio_window_s), fmt_value(t.latency_s),
            fmt_value(t.first_cio_hit_s), fmt_value(t.early_attention_s),
            fmt_value(t.fixation_fraction_pre), fmt_value(t.fixation_fraction_window),
            fmt_value(t.cio_fixation_fraction), fmt_value(t.cio_attention_ratio),
            fmt_value(t.missed_cio), fmt_value(t.attended_before_crash),
        ]))
    return "\n".join(rows) + "\n"


def parse_trial_metrics_csv(text: str) -> list[TrialMetrics]:
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header != TRIAL_METRICS_HEADER:
        raise DatasetError("unexpected trial metrics header")

    def opt_float(raw: str) -> float | None:
        return float(raw) if raw != "" else None

    def opt_bool(raw: str) -> bool | None:
        return None if raw == "" else raw == "1"

    out = []
    for row in reader:
        if not row:
            continue
        out.append(TrialMetrics(
            trial_id=row[0], video_id=row[1], participant_id=row[2],
            session_index=int(row[3]),
            cio_onset_s=opt_float(row[4]), cio_window_s=opt_float(row[5]),
            latency_s=opt_float(row[6]), first_cio_hit_s=opt_float(row[7]),
            early_attention_s=opt_float(row[8]),
            fixation_fraction_pre=opt_float(row[9]),
            fixation_fraction_window=opt_float(row[10]),
            cio_fixation_fraction=opt_float(row[11]),
            cio_attention_ratio=opt_float(row[12]),
            missed_cio=opt_bool(row[13]),
            attended_before_crash=opt_bool(row[14]),
        ))
    return out


def format_comparison_csv(comparison: ComparisonResult) -> str:
    rows = [",".join(COMPARISON_HEADER)]
    for row in comparison.rows:
        rows.append(",".join([
            row.video_id, fmt_value(row.mean_duration_s), fmt_value(row.mttc_s), fmt_value(row.diff_s),
        ]))
    return "\n".join(rows) + "\n"


def _round9(value):
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return float(f"{value:.9g}")
    return value


def _stats_dict(stats: SummaryStats | None):
    if stats is None:
        return None
    return {
        "n": stats.n,
        "mean": _round9(stats.mean),
        "sd": _round9(stats.sd),
        "se": _round9(stats.se),
        "ci_half": _round9(stats.ci_half),
        "skewness": _round9(stats.skewness),
        "kurtosis": _round9(stats.kurtosis),
        "min": _round9(stats.min),
        "max": _round9(stats.max),
    }


def _anova_dict(result: AnovaResult | None, alpha: float):
    if result is None:
        return None
    return {
        "F": _round9(result.f_stat),
        "df_between": result.df_between,
        "df_within": result.df_within,
        "f_critical": _round9(f_critical(alpha, result.df_between, result.df_within)),
        "p_value": _round9(result.p_value),
        "reject": result.reject,
    }


def summary_dict(report: StudyReport) -> dict:
    """The summary.json document; every count recomputable from the CSV."""
    tm = report.trial_metrics
    positive = [t for t in tm if t.missed_cio is not None]
    counts = {
        "n_trials": len(tm),
        "n_positive": len(positive),
        "n_negative": len(tm) - len(positive),
        "n_missed": sum(1 for t in positive if t.missed_cio),
        "n_attention_nonpositive": sum(
            1 for t in positive
            if t.early_attention_s is not None and t.early_attention_s <= 0),
        "n_attention_positive": sum(
            1 for t in positive
            if t.early_attention_s is not None and t.early_attention_s > 0),
        "n_attended_before_crash": sum(
            1 for t in positive if t.attended_before_crash),
    }
    recall = None
    if report.recall is not None:
        recall = {
            "n_trials": report.recall.n_trials,
            "n_attended": report.recall.n_attended,
            "value": _round9(report.recall.value),
            "ci_half": _round9(report.recall_ci_half),
        }
    comparison = {
        "n_videos": len(report.comparison.rows),
        "n_duration_exceeding_mttc": report.comparison.n_duration_exceeding_mttc,
        "n_video_means_exceeding_mttc": report.comparison.n_video_means_exceeding_mttc,
        "mean_diff": _round9(report.comparison.mean_diff_s),
        "ci_half": _round9(report.comparison.ci_half_s),
    }
    return {
        "alpha": _round9(report.alpha),
        "counts": counts,
        "recall_upper_bound": recall,
        "latency": _stats_dict(report.latency_stats),
        "early_attention": _stats_dict(report.attention_stats),
        "attention_fractions": {
            name: _stats_dict(stats) for name, stats in report.fraction_stats.items()
        },
        "anova": {
            "latency_by_participant": _anova_dict(report.anova_latency, report.alpha),
            "early_attention_by_participant": _anova_dict(
                report.anova_attention, report.alpha),
        },
        "ai_comparison": comparison,
        "assumed_precision": ASSUMED_HUMAN_PRECISION,
    }
