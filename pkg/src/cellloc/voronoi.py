"""Tessellations of the grid: shifted-seed nearest-cell assignment over
macro cells with a small-cell carve-out, and the best-server map derived
from the strength field."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cells import CellPlan
from .fields import SparseField
from .grid import Grid, TileId

# Tiles per chunk when scanning seed distances; bounds the distance
# matrix at chunk_size x n_cells.
_CHUNK = 4096


@dataclass(frozen=True)
class Tessellation:
    """Assignment of tiles to cells. ``assignment`` holds an index into
    ``cell_ids`` per tile, -1 for unassigned tiles."""

    cell_ids: tuple[str, ...]
    assignment: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int32)
        if a.ndim != 1:
            raise ValueError("assignment must be a flat per-tile vector")
        if a.size and (a.min() < -1 or a.max() >= len(self.cell_ids)):
            raise ValueError("assignment references unknown cells")
        object.__setattr__(self, "assignment", a)
        object.__setattr__(self, "cell_ids", tuple(self.cell_ids))

    @property
    def n_tiles(self) -> int:
        return self.assignment.size

    def cell_of(self, t: TileId) -> str | None:
        idx = self.assignment[t]
        return None if idx < 0 else self.cell_ids[idx]

    def tiles_of(self, cell_id: str) -> np.ndarray:
        try:
            idx = self.cell_ids.index(cell_id)
        except ValueError:
            return np.empty(0, dtype=np.int64)
        return np.flatnonzero(self.assignment == idx)

    def regions(self) -> dict[str, np.ndarray]:
        """cell id -> sorted tile indices, only cells that own tiles."""
        out = {}
        for i, cell_id in enumerate(self.cell_ids):
            tiles = np.flatnonzero(self.assignment == i)
            if tiles.size:
                out[cell_id] = tiles
        return out


def s_vor(tess: Tessellation, t: TileId, cell_id: str) -> int:
    """0/1 dominance of a tessellation: 1 iff tile t belongs to cell_id."""
    return 1 if tess.cell_of(t) == cell_id else 0


def voronoi_assign(plan: CellPlan, grid: Grid, shift: float = 100.0) -> Tessellation:
    """Nearest-seed tessellation over macro cells, then small-cell carve-out.

    Each directional macro cell's seed is moved ``shift`` meters along its
    azimuth before the nearest-seed scan (2D Euclidean on tile centroids).
    Afterwards the tile containing each small cell is reassigned to that
    small cell. All ties break to the lexicographically smallest cell id.
    """
    macro = sorted(plan.macro_cells(), key=lambda c: c.id)
    if not macro:
        raise ValueError("tessellation requires at least one macro cell")

    seeds = np.empty((len(macro), 2))
    for i, c in enumerate(macro):
        if c.directional and c.azimuth is not None:
            az = math.radians(c.azimuth)
            seeds[i] = (c.x + shift * math.sin(az), c.y + shift * math.cos(az))
        else:
            seeds[i] = (c.x, c.y)

    centroids = grid.centroids()
    assignment = np.empty(grid.n_tiles, dtype=np.int32)
    for start in range(0, grid.n_tiles, _CHUNK):
        block = centroids[start:start + _CHUNK]
        d2 = (block[:, 0:1] - seeds[:, 0]) ** 2 + (block[:, 1:2] - seeds[:, 1]) ** 2
        # argmin returns the first minimum; seeds are in id order, so exact
        # ties resolve to the smallest id.
        assignment[start:start + _CHUNK] = np.argmin(d2, axis=1)

    cell_ids = [c.id for c in macro]
    small_by_tile: dict[int, str] = {}
    for c in sorted(plan.small_cells(), key=lambda c: c.id):
        t = grid.tile_at(c.x, c.y)
        if t is not None and t not in small_by_tile:
            small_by_tile[t] = c.id
    for t, cid in small_by_tile.items():
        cell_ids.append(cid)
        assignment[t] = len(cell_ids) - 1

    return Tessellation(tuple(cell_ids), assignment)


def best_server(strength: SparseField) -> Tessellation:
    """Tessellation assigning each covered tile to its strongest cell.

    Tiles without any strength entry stay unassigned; exact-strength ties
    break to the smallest cell id.
    """
    cell_ids = strength.cell_ids
    if not cell_ids:
        raise ValueError("best server map requires a non-empty strength field")
    best_val = np.full(strength.n_tiles, -np.inf)
    assignment = np.full(strength.n_tiles, -1, dtype=np.int32)
    for i, cell_id in enumerate(cell_ids):
        tiles, values = strength.column(cell_id)
        better = values > best_val[tiles]
        assignment[tiles[better]] = i
        best_val[tiles[better]] = values[better]
    return Tessellation(cell_ids, assignment)
