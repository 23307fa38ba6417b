"""Command-line surface: validate, fixations, metrics, anova, compare,
heatmap, synth, and report subcommands.

Exit codes: 0 on success, 1 on an input-contract violation (bad flags,
malformed files, inconsistent datasets, infeasible synthetic specs), 2 on
an internal failure.  Config keys can be overridden with ``GAM_``-prefixed
environment variables.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from gazemetrics import report as report_mod
from gazemetrics import synth as synth_mod
from gazemetrics.config import Config, ConfigError, apply_env_overrides, format_config, load_config
from gazemetrics.fixation import classify_samples, group_fixations
from gazemetrics.metrics import compare_with_ai, video_mean_duration
from gazemetrics.heatmap import accumulate, accumulate_centroids, render_pgm, write_grid_csv
from gazemetrics.ingest import (
    CATEGORY_NEGATIVE,
    CATEGORY_POSITIVE,
    AIReference,
    ParseError,
    parse_ai_reference,
    parse_annotations,
    parse_gaze_log,
    validate_dataset,
    write_ai_reference,
    write_annotations,
    write_gaze_log,
)
from gazemetrics.stats import f_critical


class CliError(Exception):
    """Bad command line; reported as an input-contract violation."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); the contract wants 1
        self.print_usage(sys.stderr)
        raise CliError(f"{self.prog}: error: {message}")


def _load_config(path: str | None) -> Config:
    config = load_config(path)
    return apply_env_overrides(config, os.environ)


def _write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _write_bytes(path: str, data: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(data)


def _fmt(value) -> str:
    return report_mod.fmt_value(value)


def _cmd_validate(args) -> int:
    _load_config(args.config)  # fail fast on a bad config
    trials = parse_gaze_log(args.gaze)
    videos = parse_annotations(args.ann)
    ai = parse_ai_reference(args.ai) if args.ai else AIReference({})
    result = validate_dataset(trials, videos, ai)
    for issue in result.issues:
        print(f"{issue.severity}: {issue.message}")
    print(f"{len(result.issues)} issues ({result.n_errors} errors, "
          f"{result.n_warnings} warnings) across {len(trials)} trials, "
          f"{len(videos)} videos")
    return 0


def _cmd_fixations(args) -> int:
    config = _load_config(args.config)
    trials = parse_gaze_log(args.gaze)
    rows = ["trial_id,k,start_s,duration_s,centroid_x,centroid_y,n_samples"]
    for trial_id, samples in trials:
        classified = classify_samples(samples, config)
        for f in group_fixations(classified, config):
            rows.append(
                f"{trial_id},{f.k},{_fmt(f.start_s)},{_fmt(f.duration_s)},"
                f"{_fmt(f.centroid[0])},{_fmt(f.centroid[1])},{len(f.member_sample_times)}")
    text = "\n".join(rows) + "\n"
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_metrics(args) -> int:
    config = _load_config(args.config)
    trials = parse_gaze_log(args.gaze)
    videos = parse_annotations(args.ann)
    results = report_mod.analyze_trials(trials, videos, config)
    results.sort(key=lambda r: r.trial_id)
    text = report_mod.format_trial_metrics_csv([r.metrics for r in results])
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_anova(args) -> int:
    config = _load_config(args.config)
    with open(args.metrics, "r", encoding="utf-8") as fh:
        tm = report_mod.parse_trial_metrics_csv(fh.read())
    measures = {
        "latency": "latency_s",
        "early_attention": "early_attention_s",
    }
    if args.measure != "both":
        measures = {args.measure: measures[args.measure]}
    for name, field in measures.items():
        groups = report_mod.participant_groups(tm, field)
        result = report_mod.anova_or_none(groups, config.alpha)
        if result is None:
            print(f"{name}: not enough groups/observations for ANOVA")
            continue
        critical = f_critical(config.alpha, result.df_between, result.df_within)
        verdict = "reject equal means" if result.reject else "no evidence against equal means"
        print(f"{name}: F({result.df_between}, {result.df_within}) = {result.f_stat:.4f}, "
              f"critical {critical:.4f}, p = {result.p_value:.6f} -> {verdict}")
    return 0


def _cmd_compare(args) -> int:
    config = _load_config(args.config)
    with open(args.metrics, "r", encoding="utf-8") as fh:
        tm = report_mod.parse_trial_metrics_csv(fh.read())
    ai = parse_ai_reference(args.ai)
    positive = [t for t in tm if t.missed_cio is not None]
    mean_durations = video_mean_duration(positive)
    all_durations = [(t.video_id, t.early_attention_s) for t in positive
                     if t.early_attention_s is not None]
    comparison = compare_with_ai(mean_durations, ai, all_durations, config)
    text = report_mod.format_comparison_csv(comparison)
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    print(f"{len(comparison.rows)} videos compared; "
          f"{comparison.n_duration_exceeding_mttc} durations and "
          f"{comparison.n_video_means_exceeding_mttc} video means exceed the AI mTTC; "
          f"mean difference {_fmt(comparison.mean_diff_s) or 'n/a'} s "
          f"(CI half-width {_fmt(comparison.ci_half_s) or 'n/a'})",
          file=sys.stderr)
    return 0


def _cmd_heatmap(args) -> int:
    config = _load_config(args.config)
    trials = parse_gaze_log(args.gaze)
    videos = parse_annotations(args.ann)
    results = report_mod.analyze_trials(trials, videos, config)
    os.makedirs(args.out, exist_ok=True)
    per_fixation = config.heatmap_weighting == "per_fixation"
    for category, stem in ((CATEGORY_POSITIVE, "heatmap_pos"), (CATEGORY_NEGATIVE, "heatmap_neg")):
        in_category = [r for r in results if r.video.category == category]
        if per_fixation:
            grid = accumulate_centroids((f for r in in_category for f in r.fixations),
                                        config.grid_w, config.grid_h)
        else:
            grid = accumulate((s for r in in_category for s in r.samples),
                              config.grid_w, config.grid_h)
        _write_bytes(os.path.join(args.out, stem + ".pgm"), render_pgm(grid, args.gamma))
        _write_text(os.path.join(args.out, stem + ".csv"), write_grid_csv(grid))
    return 0


def _cmd_synth(args) -> int:
    config = _load_config(args.config)
    study = synth_mod.generate_study(
        n_participants=args.participants,
        n_sessions=args.sessions,
        n_pos=args.pos,
        n_neg=args.neg,
        seed=args.seed,
        config=config,
        n_miss=args.miss,
        n_exceedances=args.exceed,
    )
    os.makedirs(args.out, exist_ok=True)
    _write_text(os.path.join(args.out, "gaze.csv"), write_gaze_log(study.trials))
    _write_text(os.path.join(args.out, "annotations.json"), write_annotations(study.videos))
    _write_text(os.path.join(args.out, "ai_reference.csv"), write_ai_reference(study.ai))
    _write_text(os.path.join(args.out, "config.cfg"), format_config(config))
    _write_text(os.path.join(args.out, "planted.csv"), synth_mod.format_planted_csv(study))
    print(f"wrote {len(study.trials)} trials "
          f"({sum(len(s) for _, s in study.trials)} samples) to {args.out}")
    return 0


def _cmd_report(args) -> int:
    config = _load_config(args.config)
    trials = parse_gaze_log(args.gaze)
    videos = parse_annotations(args.ann)
    ai = parse_ai_reference(args.ai)
    study_report = report_mod.build_report(trials, videos, ai, config)
    os.makedirs(args.out, exist_ok=True)
    _write_text(os.path.join(args.out, "trial_metrics.csv"),
                report_mod.format_trial_metrics_csv(study_report.trial_metrics))
    _write_text(os.path.join(args.out, "summary.json"),
                json.dumps(report_mod.summary_dict(study_report), indent=2) + "\n")
    _write_text(os.path.join(args.out, "comparison.csv"),
                report_mod.format_comparison_csv(study_report.comparison))
    for grid, stem in ((study_report.grid_pos, "heatmap_pos"),
                       (study_report.grid_neg, "heatmap_neg")):
        _write_bytes(os.path.join(args.out, stem + ".pgm"), render_pgm(grid, args.gamma))
        _write_text(os.path.join(args.out, stem + ".csv"), write_grid_csv(grid))
    if not args.no_figures:
        from gazemetrics import figures  # matplotlib import deferred

        figures.render_all(study_report, args.out)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="gam", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(handler=handler)
        return p

    p = add("validate", _cmd_validate, "cross-check gaze log, annotations, and AI table")
    p.add_argument("--gaze", required=True)
    p.add_argument("--ann", required=True)
    p.add_argument("--ai")
    p.add_argument("--config")

    p = add("fixations", _cmd_fixations, "classify samples and emit fixations CSV")
    p.add_argument("--gaze", required=True)
    p.add_argument("--config")
    p.add_argument("--out")

    p = add("metrics", _cmd_metrics, "per-trial crash-anticipation metrics CSV")
    p.add_argument("--gaze", required=True)
    p.add_argument("--ann", required=True)
    p.add_argument("--config")
    p.add_argument("--out")

    p = add("anova", _cmd_anova, "one-way ANOVA of earliness across participants")
    p.add_argument("--metrics", required=True)
    p.add_argument("--measure", choices=["latency", "early_attention", "both"],
                   default="both")
    p.add_argument("--config")

    p = add("compare", _cmd_compare, "human-vs-AI earliness comparison CSV")
    p.add_argument("--metrics", required=True)
    p.add_argument("--ai", required=True)
    p.add_argument("--config")
    p.add_argument("--out")

    p = add("heatmap", _cmd_heatmap, "fixation heat maps as PGM and CSV grids")
    p.add_argument("--gaze", required=True)
    p.add_argument("--ann", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--gamma", type=float, default=1.0)

    p = add("synth", _cmd_synth, "generate a synthetic study with planted ground truth")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--participants", type=int, default=6)
    p.add_argument("--sessions", type=int, default=2)
    p.add_argument("--pos", type=int, default=50)
    p.add_argument("--neg", type=int, default=50)
    p.add_argument("--miss", type=int, default=0)
    p.add_argument("--exceed", type=int, default=None)
    p.add_argument("--config")

    p = add("report", _cmd_report, "full analysis: metrics, summary, comparison, heat maps")
    p.add_argument("--gaze", required=True)
    p.add_argument("--ann", required=True)
    p.add_argument("--ai", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--no-figures", action="store_true")
    return parser


def run(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ParseError, ConfigError, report_mod.DatasetError,
            synth_mod.InfeasibleSpecError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - internal invariant failure
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
