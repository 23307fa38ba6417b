import numpy as np
import pytest

from gazemetrics.intervals import intersect, normalize, total_length
from gazemetrics.synth import oracle_length


def test_overlap_merge():
    assert normalize([(1, 3), (2, 4)]).intervals == ((1.0, 4.0),)


def test_empty():
    s = normalize([])
    assert s.intervals == ()
    assert total_length(s) == 0.0


def test_zero_length_pairs_dropped():
    assert normalize([(2, 2), (1, 1.5)]).intervals == ((1.0, 1.5),)


def test_reversed_pair_rejected():
    with pytest.raises(ValueError):
        normalize([(3, 1)])


def test_near_touching_merged():
    s = normalize([(0, 1), (1 + 1e-12, 2)])
    assert len(s) == 1
    assert total_length(s) == pytest.approx(2.0, abs=1e-9)


def test_intersect_example():
    s = normalize([(1, 3), (3.5, 5)])
    clipped = intersect(s, (2, 4))
    assert clipped.intervals == ((2.0, 3.0), (3.5, 4.0))
    assert total_length(clipped) == pytest.approx(
        oracle_length([(1, 3), (3.5, 5)], (2, 4)), abs=2e-3)


def test_intersect_empty_window():
    assert intersect(normalize([(0, 5)]), (2, 2)).intervals == ()


def test_intersect_covering_window_is_identity():
    s = normalize([(1, 2), (3, 4)])
    assert intersect(s, (0, 10)) == s


def test_total_length_single():
    assert total_length(normalize([(1, 4)])) == 3.0


def test_idempotence(rng):
    for _ in range(200):
        raw = _random_raw(rng)
        once = normalize(raw)
        assert normalize(once.intervals) == once


def test_measure_monotonicity(rng):
    for _ in range(200):
        s = normalize(_random_raw(rng))
        ws = float(rng.uniform(0, 5))
        we = ws + float(rng.uniform(0, 5))
        clipped = total_length(intersect(s, (ws, we)))
        assert clipped <= total_length(s) + 1e-12
        assert clipped <= (we - ws) + 1e-12


def test_window_additivity(rng):
    for _ in range(200):
        s = normalize(_random_raw(rng))
        a, b, c = sorted(float(rng.uniform(0, 10)) for _ in range(3))
        left = total_length(intersect(s, (a, b)))
        right = total_length(intersect(s, (b, c)))
        both = total_length(intersect(s, (a, c)))
        assert both == pytest.approx(left + right, abs=1e-9)


def _random_raw(rng, on_grid: bool = False) -> list[tuple[float, float]]:
    n = int(rng.integers(0, 9))
    out = []
    for _ in range(n):
        if on_grid:
            # Millisecond-lattice endpoints keep the 1 ms grid oracle exact
            # regardless of how many intervals the set has.
            start = int(rng.integers(0, 8000)) / 1000.0
            end = start + int(rng.integers(0, 2000)) / 1000.0
        else:
            start = float(rng.uniform(0, 8))
            end = start + float(rng.uniform(0, 2))
        out.append((start, end))
    return out


def test_oracle_equivalence_on_grid(rng):
    for _ in range(300):
        raw = _random_raw(rng, on_grid=True)
        ws = int(rng.integers(0, 9000)) / 1000.0
        we = ws + int(rng.integers(0, 3000)) / 1000.0
        analytic = total_length(intersect(normalize(raw), (ws, we)))
        assert abs(analytic - oracle_length(raw, (ws, we))) <= 2e-3


def test_oracle_equivalence_continuous_small_sets(rng):
    # Off-lattice endpoints; at most two intervals bound the grid error by 2 ms.
    for _ in range(300):
        raw = [
            (s, s + float(rng.uniform(0, 2.5)))
            for s in (float(rng.uniform(0, 6)) for _ in range(int(rng.integers(0, 3))))
        ]
        ws = float(rng.uniform(0, 7))
        we = ws + float(rng.uniform(0, 3))
        analytic = total_length(intersect(normalize(raw), (ws, we)))
        assert abs(analytic - oracle_length(raw, (ws, we))) <= 2e-3


def test_point_set_equality_with_membership_oracle(rng):
    # The canonical form must cover exactly the same millisecond-grid points
    # as the raw union.
    for _ in range(100):
        raw = _random_raw(rng)
        canon = normalize(raw)
        ts = (np.arange(11000) + 0.5) * 1e-3
        raw_mask = np.zeros_like(ts, dtype=bool)
        for s, e in raw:
            raw_mask |= (ts >= s) & (ts <= e)
        canon_mask = np.zeros_like(ts, dtype=bool)
        for s, e in canon:
            canon_mask |= (ts >= s) & (ts <= e)
        assert np.array_equal(raw_mask, canon_mask)


def test_canonical_invariants(rng):
    for _ in range(200):
        s = normalize(_random_raw(rng))
        for start, end in s:
            assert start < end
        for (_, e1), (s2, _) in zip(s.intervals, s.intervals[1:]):
            assert s2 > e1
