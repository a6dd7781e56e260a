"""Bayesian core: connection likelihoods from dominance or tessellations,
per-cell location posteriors, and the Timing Advance distance-band update."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cells import Cell
from .fields import SparseField
from .grid import Annulus, Grid
from .priors import TileDistribution
from .voronoi import Tessellation

# Likelihood rows share the sparse container: entry (tile, cell) is the
# probability that an event from that tile is served by that cell.
LikelihoodField = SparseField

# 4G Timing Advance range and the distance width of one step.
TA_MAX = 1282
TA_BAND_WIDTH_M = 78.12


class Posterior:
    """Per-cell location distributions: cell id -> sparse distribution
    over tiles. Cells whose posterior mass vanished are flagged in
    ``empty_cells`` instead of carrying a column."""

    __slots__ = ("n_tiles", "_columns", "empty_cells")

    def __init__(self, n_tiles, columns, empty_cells=()):
        self.n_tiles = int(n_tiles)
        self._columns = {
            cid: (np.asarray(t, dtype=np.int64), np.asarray(p, dtype=np.float64))
            for cid, (t, p) in sorted(columns.items())
        }
        self.empty_cells = frozenset(empty_cells)

    @property
    def cell_ids(self) -> tuple[str, ...]:
        return tuple(self._columns)

    def __contains__(self, cell_id: str) -> bool:
        return cell_id in self._columns or cell_id in self.empty_cells

    def column(self, cell_id: str) -> tuple[np.ndarray, np.ndarray]:
        return self._columns[cell_id]

    def is_empty(self, cell_id: str) -> bool:
        return cell_id in self.empty_cells

    def distribution(self, cell_id: str) -> TileDistribution:
        """Dense distribution for one cell. KeyError for empty cells."""
        tiles, probs = self._columns[cell_id]
        dense = np.zeros(self.n_tiles)
        dense[tiles] = probs
        return TileDistribution(dense)


@dataclass(frozen=True)
class TimingAdvanceSpec:
    """One Timing Advance reading plus the band-merge policy.

    ``tau`` indexes a distance band of ``band_width`` meters; ``merge``
    widens the band by that many neighbours on each side, which absorbs
    the quantization error of coarse (centroid-based) tile membership.
    """

    tau: int
    band_width: float = TA_BAND_WIDTH_M
    merge: int = 1

    def __post_init__(self):
        if not 0 <= self.tau <= TA_MAX:
            raise ValueError(f"tau must be in [0, {TA_MAX}], got {self.tau}")
        if self.band_width <= 0:
            raise ValueError(f"band_width must be > 0, got {self.band_width}")
        if self.merge < 0:
            raise ValueError(f"merge must be >= 0, got {self.merge}")

    @property
    def inner_radius(self) -> float:
        return max(0, self.tau - self.merge) * self.band_width

    @property
    def outer_radius(self) -> float:
        return (self.tau + self.merge + 1) * self.band_width

    def annulus(self, center_x: float, center_y: float) -> Annulus:
        return Annulus(center_x, center_y, self.inner_radius, self.outer_radius)


def connection_likelihood(dom: SparseField) -> LikelihoodField:
    """Row-normalized dominance: the probability of connecting through
    each cell, per tile. Tiles with zero total dominance get no rows (no
    cell reaches them, so no event can originate there). Invariant under
    rescaling the whole dominance field."""
    totals = dom.tile_totals()
    columns = {}
    for cell_id in dom.cell_ids:
        tiles, values = dom.column(cell_id)
        keep = values > 0
        tiles, values = tiles[keep], values[keep]
        columns[cell_id] = (tiles, values / totals[tiles])
    return SparseField(dom.n_tiles, columns)


def voronoi_likelihood(tess: Tessellation) -> LikelihoodField:
    """One-hot likelihood: a device connects to the cell owning its tile."""
    columns = {}
    for cell_id, tiles in tess.regions().items():
        columns[cell_id] = (tiles, np.ones(tiles.size))
    return SparseField(tess.n_tiles, columns)


def posterior(prior: TileDistribution, llh: LikelihoodField) -> Posterior:
    """Bayes update: per cell, prior mass times connection likelihood,
    normalized over tiles. Cells with zero posterior mass are flagged
    empty, not errors."""
    if prior.n_tiles != llh.n_tiles:
        raise ValueError(
            f"prior covers {prior.n_tiles} tiles, likelihood {llh.n_tiles}"
        )
    columns = {}
    empty = []
    for cell_id in llh.cell_ids:
        tiles, values = llh.column(cell_id)
        mass = prior.probs[tiles] * values
        total = mass.sum()
        if total <= 0:
            empty.append(cell_id)
            continue
        keep = mass > 0
        columns[cell_id] = (tiles[keep], mass[keep] / total)
    return Posterior(llh.n_tiles, columns, empty)


def ta_update(
    post: Posterior,
    cell: Cell,
    spec: TimingAdvanceSpec,
    grid: Grid,
) -> TileDistribution | None:
    """Restrict a cell's posterior to the Timing Advance distance band.

    Keeps tiles whose centroids fall inside the merged annulus around the
    cell and renormalizes. Returns None when no posterior mass survives,
    meaning the reading is inconsistent with the location model.
    """
    if cell.id not in post:
        raise KeyError(f"cell {cell.id!r} not present in posterior")
    if post.is_empty(cell.id):
        return None
    tiles, probs = post.column(cell.id)
    ann = spec.annulus(cell.x, cell.y)
    centroids = grid.centroids()[tiles]
    inside = ann.contains_points(centroids)
    total = probs[inside].sum()
    if total <= 0:
        return None
    dense = np.zeros(post.n_tiles)
    dense[tiles[inside]] = probs[inside] / total
    return TileDistribution(dense)
