import pytest

from gazemetrics.fixation import classify_samples, group_fixations
from gazemetrics.ingest import Box, GazeSample, VideoMeta
from gazemetrics.metrics import (
    compare_with_ai,
    compute_trial_metrics,
    first_cio_appearance,
    first_cio_hit,
    instant_attention_series,
    recall_upper_bound,
    video_mean_duration,
    TrialMetrics,
)
from gazemetrics.synth import generate_trial, oracle_length, random_trial_spec

BOX = Box(0.6, 0.4, 0.9, 0.7)
IN_BOX = (0.75, 0.55)
OFF_BOX = (0.2, 0.5)


def make_video(crash=4.0, first_frame=12, category="positive", tracks=None):
    if category == "negative":
        return VideoMeta("v001", "negative", 10.0, 50, 1280, 720)
    if tracks is None:
        boxes = tuple((f, BOX) for f in range(first_frame, 50))
        tracks = (("obj0", boxes),)
    return VideoMeta("v001", "positive", 10.0, 50, 1280, 720, crash, tracks)


def fixation_samples(spans, coords, step=0.01):
    """Pre-labeled fixation members covering each (start, end) span exactly."""
    samples = []
    for (start, end), (x, y) in zip(spans, coords):
        n = round((end - start) / step)
        for k in range(n + 1):
            samples.append(GazeSample("p1:1:v001", "p1", 1, start + k * step,
                                      x, y, "fixation", True))
    samples.sort(key=lambda s: s.t)
    return samples


def metrics_for(spans, coords, video, config):
    samples = fixation_samples(spans, coords)
    fixations = group_fixations(samples, config)
    assert len(fixations) == len(spans)
    return compute_trial_metrics(fixations, samples, video, config)


class TestFirstCioAppearance:
    def test_single_track(self):
        assert first_cio_appearance(make_video(first_frame=12)) == pytest.approx(1.2)

    def test_earliest_of_multiple_tracks(self):
        tracks = (("a", ((20, BOX),)), ("b", ((8, BOX),)))
        assert first_cio_appearance(make_video(tracks=tracks)) == pytest.approx(0.8)

    def test_frame_zero(self):
        assert first_cio_appearance(make_video(first_frame=0)) == 0.0

    def test_negative_video_rejected(self):
        with pytest.raises(ValueError):
            first_cio_appearance(make_video(category="negative"))

    def test_no_tracks_rejected(self):
        with pytest.raises(ValueError):
            first_cio_appearance(make_video(tracks=()))


class TestFirstCioHit:
    def test_hit_when_box_appears(self, config):
        samples = fixation_samples([(1.0, 3.0)], [IN_BOX])
        fixations = group_fixations(samples, config)
        video = make_video(first_frame=20)  # box from 2.0 s
        assert first_cio_hit(fixations, samples, video) == pytest.approx(2.0)

    def test_never_inside_is_missing(self, config):
        samples = fixation_samples([(1.0, 3.0)], [OFF_BOX])
        fixations = group_fixations(samples, config)
        assert first_cio_hit(fixations, samples, make_video()) is None

    def test_edge_sample_counts_as_inside(self, config):
        samples = fixation_samples([(2.0, 2.5)], [(BOX.x1, 0.5)])
        fixations = group_fixations(samples, config)
        assert first_cio_hit(fixations, samples, make_video()) == pytest.approx(2.0)

    def test_short_run_members_do_not_hit(self, config):
        # A 30 ms dwell inside the box dies in the duration filter, so its
        # samples are not fixation members.
        samples = fixation_samples([(2.0, 2.03), (2.5, 3.0)], [IN_BOX, OFF_BOX])
        fixations = group_fixations(samples, config)
        assert first_cio_hit(fixations, samples, make_video()) is None


class TestComputeTrialMetrics:
    def test_full_coverage(self, config):
        tm = metrics_for([(0.7, 4.5)], [IN_BOX], make_video(crash=4.0, first_frame=12),
                         config)
        assert tm.first_cio_hit_s == pytest.approx(1.2)
        assert tm.latency_s == pytest.approx(0.0)
        assert tm.early_attention_s == pytest.approx(2.8)
        assert tm.fixation_fraction_window == pytest.approx(1.0)
        assert tm.cio_fixation_fraction == pytest.approx(1.0)
        assert tm.cio_attention_ratio == pytest.approx(1.0)

    def test_partial_union_against_oracle(self, config):
        # Fixations [1, 3] and [3.5, 5]; hit at 2.0 when the box appears,
        # crash at 4.0: the window [2, 4] holds 1.5 s of fixation time.
        video = make_video(crash=4.0, first_frame=20)
        tm = metrics_for([(1.0, 3.0), (3.5, 5.0)], [IN_BOX, IN_BOX], video, config)
        assert tm.first_cio_hit_s == pytest.approx(2.0)
        assert tm.early_attention_s == pytest.approx(2.0)
        assert tm.fixation_fraction_window == pytest.approx(0.75)
        assert tm.fixation_fraction_window == pytest.approx(
            oracle_length([(1, 3), (3.5, 5)], (2, 4)) / 2.0, abs=2e-3)
        assert tm.cio_attention_ratio == pytest.approx(1.0)

    def test_off_box_fixation_lowers_cio_fraction(self, config):
        video = make_video(crash=4.0, first_frame=20)
        tm = metrics_for([(1.0, 3.0), (3.5, 5.0)], [IN_BOX, OFF_BOX], video, config)
        assert tm.fixation_fraction_window == pytest.approx(0.75)
        assert tm.cio_fixation_fraction == pytest.approx(0.5)
        assert tm.cio_attention_ratio == pytest.approx(2 / 3)

    def test_late_attention_negative_window(self, config):
        video = make_video(crash=3.0, first_frame=5)
        tm = metrics_for([(3.5, 4.5)], [IN_BOX], video, config)
        assert tm.early_attention_s == pytest.approx(-0.5)
        assert tm.attended_before_crash is False
        assert tm.missed_cio is False
        assert tm.fixation_fraction_window is None
        assert tm.cio_attention_ratio is None

    def test_missed_cio(self, config):
        video = make_video()
        tm = metrics_for([(1.0, 3.0)], [OFF_BOX], video, config)
        assert tm.missed_cio is True
        assert tm.latency_s is None and tm.early_attention_s is None
        assert tm.attended_before_crash is False

    def test_negative_video_has_empty_crash_fields(self, config):
        samples = fixation_samples([(1.0, 3.0)], [IN_BOX])
        fixations = group_fixations(samples, config)
        tm = compute_trial_metrics(fixations, samples, make_video(category="negative"),
                                   config)
        assert tm.cio_onset_s is None and tm.missed_cio is None
        assert tm.attended_before_crash is None

    def test_pre_window_fraction(self, config):
        # Fixation covers [1, 2] before the hit at 2.0: 1 s of 2 s = 0.5.
        video = make_video(crash=4.0, first_frame=20)
        tm = metrics_for([(1.0, 3.0)], [IN_BOX], video, config)
        assert tm.fixation_fraction_pre == pytest.approx(0.5)

    def test_ordering_identities(self, config, rng):
        for _ in range(25):
            spec = random_trial_spec(rng, config)
            samples, video = generate_trial(spec, config)
            classified = classify_samples(samples, config)
            fixations = group_fixations(classified, config)
            tm = compute_trial_metrics(fixations, classified, video, config)
            if tm.first_cio_hit_s is None:
                continue
            assert tm.cio_onset_s + tm.latency_s == pytest.approx(
                tm.first_cio_hit_s, abs=1e-12)
            assert tm.first_cio_hit_s + tm.early_attention_s == pytest.approx(
                video.crash_start_s, abs=1e-12)
            assert tm.cio_onset_s + tm.cio_window_s == pytest.approx(
                video.duration_s, abs=1e-12)

    def test_bound_chain(self, config, rng):
        checked = 0
        for _ in range(30):
            spec = random_trial_spec(rng, config)
            samples, video = generate_trial(spec, config)
            classified = classify_samples(samples, config)
            fixations = group_fixations(classified, config)
            tm = compute_trial_metrics(fixations, classified, video, config)
            if tm.fixation_fraction_window is None:
                continue
            checked += 1
            assert 0 <= tm.cio_fixation_fraction <= tm.fixation_fraction_window <= 1 + 1e-12
            assert 0 <= tm.cio_attention_ratio <= 1 + 1e-12
        assert checked > 10


class TestInstantAttention:
    def test_mixed_frame(self, config):
        video = make_video()
        samples = [GazeSample("p1:1:v001", "p1", 1, k / 120, 0.5, 0.5,
                              "fixation" if k < 9 else "saccade", True)
                   for k in range(12)]
        series = instant_attention_series(samples, video)
        assert series[0] == pytest.approx(0.75)

    def test_all_fixation_frame(self, config):
        video = make_video()
        samples = fixation_samples([(0.0, 0.09)], [IN_BOX])
        assert instant_attention_series(samples, video)[0] == 1.0

    def test_empty_frame_missing(self, config):
        video = make_video()
        samples = fixation_samples([(0.0, 0.09)], [IN_BOX])
        series = instant_attention_series(samples, video)
        assert series[10] is None
        assert len(series) == video.n_frames

    def test_invalid_samples_excluded(self, config):
        video = make_video()
        samples = [GazeSample("t", "p1", 1, 0.0, 0.5, 0.5, "fixation", True),
                   GazeSample("t", "p1", 1, 0.01, 0.5, 0.5, "unknown", False)]
        assert instant_attention_series(samples, video)[0] == 1.0


def _trial(attended: bool, video_id="v001", participant="p1", duration=None) -> TrialMetrics:
    return TrialMetrics(
        trial_id=f"{participant}:1:{video_id}", video_id=video_id,
        participant_id=participant, session_index=1,
        early_attention_s=duration,
        missed_cio=duration is None,
        attended_before_crash=attended,
    )


class TestRecallUpperBound:
    def test_reported_fixture(self):
        trials = [_trial(True, duration=2.0)] * 557 + [_trial(False)] * 43
        bound = recall_upper_bound(trials)
        assert bound.value == pytest.approx(0.928, abs=0.0005)

    def test_zero_and_all(self):
        assert recall_upper_bound([_trial(False)] * 4).value == 0.0
        assert recall_upper_bound([_trial(True, duration=1.0)] * 4).value == 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            recall_upper_bound([])


class TestVideoMeanDuration:
    def test_mean_of_two(self):
        trials = [_trial(True, duration=2.0), _trial(True, duration=3.0)]
        assert video_mean_duration(trials) == {"v001": pytest.approx(2.5)}

    def test_single_trial_identity(self):
        assert video_mean_duration([_trial(True, duration=1.7)])["v001"] == 1.7

    def test_all_missed_video_absent(self):
        assert video_mean_duration([_trial(False), _trial(False)]) == {}

    def test_negative_durations_included(self):
        trials = [_trial(False, duration=-0.5), _trial(True, duration=2.5)]
        assert video_mean_duration(trials)["v001"] == pytest.approx(1.0)


class TestCompareWithAI:
    def test_identity(self, config):
        means = {"v001": 2.0, "v002": 3.0}
        result = compare_with_ai(means, means, [("v001", 2.0)], config)
        assert all(row.diff_s == 0.0 for row in result.rows)
        assert result.mean_diff_s == 0.0

    def test_single_video_diff(self, config):
        result = compare_with_ai({"v001": 2.1}, {"v001": 3.2}, [("v001", 2.1)], config)
        assert result.rows[0].diff_s == pytest.approx(1.1)
        assert result.n_duration_exceeding_mttc == 0
        assert result.n_video_means_exceeding_mttc == 0

    def test_exceedance_counts(self, config):
        all_d = [("v001", 3.5), ("v001", 1.0), ("v002", 0.5)]
        result = compare_with_ai({"v001": 2.25, "v002": 0.5}, {"v001": 2.0, "v002": 1.0},
                                 all_d, config)
        assert result.n_duration_exceeding_mttc == 1
        assert result.n_video_means_exceeding_mttc == 1

    def test_empty_intersection(self, config):
        result = compare_with_ai({"v001": 2.0}, {"v999": 1.0}, [], config)
        assert result.rows == ()
        assert result.mean_diff_s is None

    def test_constant_shift_of_mttc(self, config, rng):
        means = {f"v{i:03d}": float(rng.uniform(1, 3)) for i in range(10)}
        mttc = {vid: float(rng.uniform(1, 4)) for vid in means}
        base = compare_with_ai(means, mttc, [], config)
        c = 0.625
        shifted = compare_with_ai(means, {k: v + c for k, v in mttc.items()}, [], config)
        for row_a, row_b in zip(base.rows, shifted.rows):
            assert row_b.diff_s == pytest.approx(row_a.diff_s + c, abs=1e-12)
