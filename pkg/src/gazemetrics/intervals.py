"""Exact algebra on finite unions of time intervals.

All attention-fraction measures reduce to Lebesgue measures of interval
unions clipped to a window, so the canonical form only has to be exact
about lengths: endpoints closer than ``MERGE_EPS`` are merged and
zero-length intervals are dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

MERGE_EPS = 1e-9


@dataclass(frozen=True)
class IntervalSet:
    """Sorted, pairwise-disjoint intervals; build via :func:`normalize`."""

    intervals: tuple[tuple[float, float], ...] = field(default_factory=tuple)

    def __iter__(self) -> Iterator[tuple[float, float]]:
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    def __bool__(self) -> bool:
        return bool(self.intervals)


EMPTY = IntervalSet()


def normalize(raw: Iterable[Sequence[float]]) -> IntervalSet:
    """Canonicalize raw (start, end) pairs into a disjoint sorted union.

    Zero-length pairs are dropped; pairs with start > end raise ValueError.
    Intervals that overlap or sit within MERGE_EPS of each other are merged.
    """
    pairs = []
    for start, end in raw:
        if start > end:
            raise ValueError(f"interval start {start} exceeds end {end}")
        if end - start > 0:
            pairs.append((float(start), float(end)))
    if not pairs:
        return EMPTY
    pairs.sort()
    merged = [pairs[0]]
    for start, end in pairs[1:]:
        last_start, last_end = merged[-1]
        if start <= last_end + MERGE_EPS:
            if end > last_end:
                merged[-1] = (last_start, end)
        else:
            merged.append((start, end))
    return IntervalSet(tuple(merged))


def intersect(a: IntervalSet, window: Sequence[float]) -> IntervalSet:
    """Clip an interval set to a single window (start, end)."""
    ws, we = window
    if ws > we:
        raise ValueError(f"window start {ws} exceeds end {we}")
    clipped = []
    for start, end in a.intervals:
        if end <= ws:
            continue
        if start >= we:
            break
        clipped.append((max(start, ws), min(end, we)))
    return IntervalSet(tuple((s, e) for s, e in clipped if e - s > 0))


def total_length(a: IntervalSet) -> float:
    """Total measure of the union, in the same unit as the endpoints."""
    return sum(end - start for start, end in a.intervals)
