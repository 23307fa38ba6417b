"""Spatial fixation-count grids and their PGM / CSV renderings.

Grids are stored row 0 = top of frame.  Counting is per fixation-labeled
valid sample by default (long dwells weigh proportionally); per-fixation
centroid counting is available as the config toggle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from gazemetrics.fixation import Fixation
from gazemetrics.ingest import LABEL_FIXATION, GazeSample


@dataclass(frozen=True)
class Grid:
    cells: np.ndarray  # shape (h, w), nonnegative counts, row 0 = top

    @property
    def w(self) -> int:
        return int(self.cells.shape[1])

    @property
    def h(self) -> int:
        return int(self.cells.shape[0])

    @property
    def total(self) -> int:
        return int(self.cells.sum())


def empty_grid(w: int, h: int) -> Grid:
    if w < 1 or h < 1:
        raise ValueError(f"grid dimensions must be >= 1, got {w}x{h}")
    return Grid(np.zeros((h, w), dtype=np.int64))


def _cell_of(x: float, y: float, w: int, h: int) -> tuple[int, int]:
    # Right/top edges are closed so x = 1 or y = 1 still lands on the grid.
    col = min(int(x * w), w - 1)
    row_from_bottom = min(int(y * h), h - 1)
    return h - 1 - row_from_bottom, col


def accumulate(samples: Iterable[GazeSample], w: int, h: int) -> Grid:
    """Count every fixation-labeled valid sample into its cell."""
    grid = empty_grid(w, h)
    cells = grid.cells
    for s in samples:
        if s.valid and s.label == LABEL_FIXATION:
            r, c = _cell_of(s.x, s.y, w, h)
            cells[r, c] += 1
    return grid


def accumulate_centroids(fixations: Iterable[Fixation], w: int, h: int) -> Grid:
    """Count one per fixation, at its centroid."""
    grid = empty_grid(w, h)
    cells = grid.cells
    for f in fixations:
        r, c = _cell_of(f.centroid[0], f.centroid[1], w, h)
        cells[r, c] += 1
    return grid


def merge(grids: Sequence[Grid]) -> Grid:
    """Cell-wise sum; associative and commutative, so shard order is free."""
    if not grids:
        raise ValueError("merge needs at least one grid")
    cells = grids[0].cells.copy()
    for g in grids[1:]:
        if g.cells.shape != cells.shape:
            raise ValueError("grids have mismatched shapes")
        cells += g.cells
    return Grid(cells)


def render_pgm(grid: Grid, gamma: float = 1.0) -> bytes:
    """Render as binary 8-bit PGM: value = round(255 * (cell/max)^gamma)."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    peak = grid.cells.max()
    if peak == 0:
        pixels = np.zeros_like(grid.cells, dtype=np.uint8)
    else:
        scaled = 255.0 * (grid.cells / peak) ** gamma
        pixels = np.floor(scaled + 0.5).astype(np.uint8)
    header = f"P5\n{grid.w} {grid.h}\n255\n".encode("ascii")
    return header + pixels.tobytes()


def write_grid_csv(grid: Grid) -> str:
    """Grid counts as h rows of w comma-separated integers, row 0 = top."""
    return "\n".join(",".join(str(int(v)) for v in row) for row in grid.cells) + "\n"


def spread_stats(grid: Grid) -> tuple[float, float, float | None]:
    """Cell-center weighted standard deviations (std_x, std_y) and their ratio.

    The aspect ratio std_x / std_y is None when std_y is zero.
    """
    if grid.total < 2:
        raise ValueError("spread_stats needs a grid total of at least 2")
    weights = grid.cells.astype(float)
    total = weights.sum()
    xs = (np.arange(grid.w) + 0.5) / grid.w
    ys = 1.0 - (np.arange(grid.h) + 0.5) / grid.h  # row 0 = top of frame
    wx = weights.sum(axis=0)
    wy = weights.sum(axis=1)
    mean_x = float((wx * xs).sum() / total)
    mean_y = float((wy * ys).sum() / total)
    std_x = float(np.sqrt((wx * (xs - mean_x) ** 2).sum() / total))
    std_y = float(np.sqrt((wy * (ys - mean_y) ** 2).sum() / total))
    aspect = std_x / std_y if std_y > 0 else None
    return std_x, std_y, aspect
