import json
import os
from pathlib import Path

import pytest

from gazemetrics.cli import run
from gazemetrics.report import parse_trial_metrics_csv


def read_bytes(path: Path) -> bytes:
    return path.read_bytes()


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    code = run(["synth", "--seed", "7", "--out", str(out), "--participants", "2",
                "--sessions", "2", "--pos", "5", "--neg", "3", "--miss", "2"])
    assert code == 0
    return out


class TestSynthCommand:
    def test_outputs_exist(self, dataset):
        for name in ("gaze.csv", "annotations.json", "ai_reference.csv",
                     "config.cfg", "planted.csv"):
            assert (dataset / name).exists()

    def test_byte_identical_reruns(self, dataset, tmp_path):
        again = tmp_path / "again"
        assert run(["synth", "--seed", "7", "--out", str(again), "--participants", "2",
                    "--sessions", "2", "--pos", "5", "--neg", "3", "--miss", "2"]) == 0
        for name in ("gaze.csv", "annotations.json", "ai_reference.csv", "planted.csv"):
            assert read_bytes(dataset / name) == read_bytes(again / name)

    def test_different_seed_differs(self, dataset, tmp_path):
        other = tmp_path / "other"
        assert run(["synth", "--seed", "8", "--out", str(other), "--participants", "2",
                    "--sessions", "2", "--pos", "5", "--neg", "3", "--miss", "2"]) == 0
        assert read_bytes(dataset / "gaze.csv") != read_bytes(other / "gaze.csv")


class TestReportCommand:
    def test_contract_files_written(self, dataset, tmp_path):
        out = tmp_path / "report"
        code = run(["report", "--gaze", str(dataset / "gaze.csv"),
                    "--ann", str(dataset / "annotations.json"),
                    "--ai", str(dataset / "ai_reference.csv"),
                    "--config", str(dataset / "config.cfg"),
                    "--out", str(out)])
        assert code == 0
        for name in ("trial_metrics.csv", "summary.json", "comparison.csv",
                     "heatmap_pos.pgm", "heatmap_neg.pgm"):
            assert (out / name).exists(), name
        assert list(out.glob("fig_*.png"))  # figures alongside the tables

    def test_end_to_end_determinism(self, dataset, tmp_path):
        outs = []
        for name in ("r1", "r2"):
            out = tmp_path / name
            assert run(["report", "--gaze", str(dataset / "gaze.csv"),
                        "--ann", str(dataset / "annotations.json"),
                        "--ai", str(dataset / "ai_reference.csv"),
                        "--out", str(out)]) == 0
            outs.append(out)
        names = sorted(p.name for p in outs[0].iterdir())
        assert names == sorted(p.name for p in outs[1].iterdir())
        for name in names:
            assert read_bytes(outs[0] / name) == read_bytes(outs[1] / name), name

    def test_summary_counts_match_recount(self, dataset, tmp_path):
        out = tmp_path / "r"
        assert run(["report", "--gaze", str(dataset / "gaze.csv"),
                    "--ann", str(dataset / "annotations.json"),
                    "--ai", str(dataset / "ai_reference.csv"),
                    "--out", str(out), "--no-figures"]) == 0
        summary = json.loads((out / "summary.json").read_text())
        tm = parse_trial_metrics_csv((out / "trial_metrics.csv").read_text())
        positive = [t for t in tm if t.missed_cio is not None]
        assert summary["counts"]["n_trials"] == len(tm)
        assert summary["counts"]["n_missed"] == sum(1 for t in positive if t.missed_cio)
        assert summary["counts"]["n_attended_before_crash"] == sum(
            1 for t in positive if t.attended_before_crash)
        assert summary["recall_upper_bound"]["n_trials"] == len(positive)

    def test_alpha_env_override(self, dataset, tmp_path, monkeypatch):
        out = tmp_path / "r"
        monkeypatch.setenv("GAM_ALPHA", "0.10")
        assert run(["report", "--gaze", str(dataset / "gaze.csv"),
                    "--ann", str(dataset / "annotations.json"),
                    "--ai", str(dataset / "ai_reference.csv"),
                    "--out", str(out), "--no-figures"]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["alpha"] == 0.10


class TestValidateCommand:
    def test_clean_dataset(self, dataset, capsys):
        assert run(["validate", "--gaze", str(dataset / "gaze.csv"),
                    "--ann", str(dataset / "annotations.json"),
                    "--ai", str(dataset / "ai_reference.csv")]) == 0
        assert "0 issues" in capsys.readouterr().out

    def test_broken_trial_still_exits_zero(self, dataset, tmp_path, capsys):
        # A trial that references a video missing from the annotations is a
        # data finding, not a command failure.
        gaze = (dataset / "gaze.csv").read_text()
        broken = gaze.replace("v001", "v999")
        path = tmp_path / "broken.csv"
        path.write_text(broken)
        assert run(["validate", "--gaze", str(path),
                    "--ann", str(dataset / "annotations.json"),
                    "--ai", str(dataset / "ai_reference.csv")]) == 0
        out = capsys.readouterr().out
        assert "unknown video" in out
        assert "0 issues" not in out

    def test_malformed_gaze_is_input_error(self, dataset, tmp_path, capsys):
        path = tmp_path / "bad.csv"
        path.write_text("not,a,gaze,log\n")
        assert run(["validate", "--gaze", str(path),
                    "--ann", str(dataset / "annotations.json")]) == 1


class TestMetricsFlow:
    def test_metrics_anova_compare(self, dataset, tmp_path, capsys):
        metrics_path = tmp_path / "trial_metrics.csv"
        assert run(["metrics", "--gaze", str(dataset / "gaze.csv"),
                    "--ann", str(dataset / "annotations.json"),
                    "--out", str(metrics_path)]) == 0
        tm = parse_trial_metrics_csv(metrics_path.read_text())
        assert len(tm) == 2 * 2 * 8
        capsys.readouterr()

        assert run(["anova", "--metrics", str(metrics_path)]) == 0
        out = capsys.readouterr().out
        assert "latency" in out and "early_attention" in out

        comparison_path = tmp_path / "comparison.csv"
        assert run(["compare", "--metrics", str(metrics_path),
                    "--ai", str(dataset / "ai_reference.csv"),
                    "--out", str(comparison_path)]) == 0
        header = comparison_path.read_text().splitlines()[0]
        assert header == "video_id,mD,mTTC,diff"

    def test_fixations_command(self, dataset, tmp_path):
        out = tmp_path / "fixations.csv"
        assert run(["fixations", "--gaze", str(dataset / "gaze.csv"),
                    "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "trial_id,k,start_s,duration_s,centroid_x,centroid_y,n_samples"
        assert len(lines) > 1

    def test_heatmap_command(self, dataset, tmp_path):
        out = tmp_path / "maps"
        assert run(["heatmap", "--gaze", str(dataset / "gaze.csv"),
                    "--ann", str(dataset / "annotations.json"),
                    "--out", str(out)]) == 0
        for name in ("heatmap_pos.pgm", "heatmap_neg.pgm",
                     "heatmap_pos.csv", "heatmap_neg.csv"):
            assert (out / name).exists()
        assert (out / "heatmap_pos.pgm").read_bytes().startswith(b"P5\n64 36\n255\n")


class TestExitCodes:
    def test_unknown_flag_usage_on_stderr(self, capsys):
        assert run(["synth", "--bogus"]) == 1
        err = capsys.readouterr().err
        assert "usage" in err.lower()

    def test_unknown_subcommand(self, capsys):
        assert run(["frobnicate"]) == 1

    def test_missing_file_is_input_error(self, tmp_path, capsys):
        assert run(["validate", "--gaze", str(tmp_path / "nope.csv"),
                    "--ann", str(tmp_path / "nope.json")]) == 1

    def test_infeasible_synth_config(self, tmp_path, capsys):
        # 3 sessions violates the gaze log session contract
        assert run(["synth", "--seed", "1", "--out", str(tmp_path / "x"),
                    "--sessions", "3", "--pos", "1", "--neg", "0",
                    "--participants", "1"]) == 1

    def test_help_exits_zero(self, capsys):
        assert run(["--help"]) == 0
        assert "usage" in capsys.readouterr().out.lower()

    def test_bad_config_file(self, dataset, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("nonsense_key = 3\n")
        assert run(["fixations", "--gaze", str(dataset / "gaze.csv"),
                    "--config", str(cfg)]) == 1
