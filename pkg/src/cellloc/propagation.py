"""Signal-strength and signal-dominance model.

Received strength at a tile is the cell's 1 m reference strength minus a
log-distance loss and, for directional cells, minus Gaussian radiation
pattern losses in the horizontal and vertical planes. A logistic curve
then maps strength (dBm) to signal dominance in [0, 1], a proxy for
connection propensity under load balancing.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cells import Cell, CellPlan
from .fields import SparseField
from .grid import MIN_DISTANCE_M, Grid, bearing_degrees, wrap_degrees

# Asymptotic pattern loss (dB) far off boresight; stands in for side- and
# back-lobe suppression, which the model deliberately smooths away.
DEFAULT_MAX_PATTERN_LOSS_DB = 30.0

# Aliases: both fields share the sparse container; strength holds dBm,
# dominance holds values in [0, 1].
StrengthField = SparseField
DominanceField = SparseField


@dataclass(frozen=True)
class RadiationPattern:
    """Gaussian-shaped directional loss: loss(a) = c - c*exp(-a^2 / (2 sigma^2)).

    Zero on boresight, monotonically increasing with |angle|, approaching
    the maximum loss ``c`` asymptotically.
    """

    max_loss_db: float  # c
    sigma: float        # degrees

    def __post_init__(self):
        if self.max_loss_db <= 3.0:
            raise ValueError(
                f"max pattern loss must exceed the 3 dB half-power "
                f"constraint, got {self.max_loss_db}"
            )
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    def loss(self, angle_deg):
        """Pattern loss in dB at an offset angle. Accepts scalars or arrays."""
        a = np.abs(angle_deg)
        c = self.max_loss_db
        out = c - c * np.exp(-(a * a) / (2.0 * self.sigma * self.sigma))
        if np.ndim(out) == 0:
            return float(out)
        return out


@dataclass(frozen=True)
class DominanceParams:
    """Logistic strength-to-dominance curve plus the sparsification cutoff.

    The defaults place the midpoint at the fair/poor end of usable 4G
    signal and give a curve that saturates over roughly +-25 dBm.
    Entries whose dominance falls below ``min_dominance`` are dropped
    from computed fields to keep them tractable on large grids.
    """

    s_mid: float = -92.5
    s_steep: float = 0.2
    min_dominance: float = 1e-5

    def __post_init__(self):
        if self.s_steep <= 0:
            raise ValueError(f"s_steep must be > 0, got {self.s_steep}")
        if not 0.0 <= self.min_dominance < 1.0:
            raise ValueError(
                f"min_dominance must be in [0, 1), got {self.min_dominance}"
            )


def dbm_from_watt(power_watt: float) -> float:
    """Transmit power in Watt -> signal strength in dBm at 1 m."""
    if power_watt <= 0:
        raise ValueError(f"power must be > 0 W, got {power_watt}")
    return 30.0 + 10.0 * math.log10(power_watt)


def distance_loss(r_meters, path_loss_exp):
    """Log-distance strength loss in dB: 10 * gamma * log10(r).

    Callers must clamp r >= 1 m (the grid module does), which keeps the
    loss non-negative. Accepts scalars or arrays.
    """
    out = 10.0 * path_loss_exp * np.log10(r_meters)
    if np.ndim(out) == 0:
        return float(out)
    return out


def fit_pattern(
    half_width: float, max_loss_db: float = DEFAULT_MAX_PATTERN_LOSS_DB
) -> RadiationPattern:
    """Fit a radiation pattern to two constraints: exactly 3 dB loss at
    the half-width angle, and an asymptotic maximum loss ``max_loss_db``.

    The two constraints admit a closed form:
    sigma = half_width / sqrt(2 * ln(c / (c - 3))).
    """
    if not 0.0 < half_width < 180.0:
        raise ValueError(f"half_width must be in (0, 180), got {half_width}")
    if max_loss_db <= 3.0:
        raise ValueError(
            f"infeasible constraints: max loss {max_loss_db} dB cannot "
            f"reach 3 dB at the half-width"
        )
    sigma = half_width / math.sqrt(2.0 * math.log(max_loss_db / (max_loss_db - 3.0)))
    return RadiationPattern(max_loss_db=max_loss_db, sigma=sigma)


def signal_strength(
    cell: Cell,
    r_meters: float,
    azimuth_offset_deg: float = 0.0,
    elevation_offset_deg: float = 0.0,
    max_pattern_loss_db: float = DEFAULT_MAX_PATTERN_LOSS_DB,
) -> float:
    """Received strength in dBm at a point with the given geometry.

    Omnidirectional cells see only the distance loss; directional cells
    additionally lose power with the horizontal and vertical offsets
    from boresight. The offsets enter through |angle| since the patterns
    are even.
    """
    if cell.power is None or cell.path_loss_exp is None:
        raise ValueError(f"cell {cell.id!r} has unset radio parameters; "
                         f"apply defaults first")
    s = dbm_from_watt(cell.power) - distance_loss(r_meters, cell.path_loss_exp)
    if cell.directional:
        if cell.beam_h is None or cell.beam_v is None:
            raise ValueError(f"cell {cell.id!r} has unset beam widths")
        pat_h = fit_pattern(cell.beam_h / 2.0, max_pattern_loss_db)
        pat_v = fit_pattern(cell.beam_v / 2.0, max_pattern_loss_db)
        s -= pat_h.loss(abs(azimuth_offset_deg))
        s -= pat_v.loss(abs(elevation_offset_deg))
    return s


def dominance(strength_dbm, params: DominanceParams = DominanceParams()):
    """Logistic map from strength (dBm) to signal dominance in [0, 1].

    Equal to 0.5 at the midpoint. Evaluated in the numerically stable
    split form so extreme strengths neither overflow nor lose precision.
    Accepts scalars or arrays.
    """
    s = np.asarray(strength_dbm, dtype=float)
    z = np.atleast_1d(params.s_steep * (s - params.s_mid))
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    if np.ndim(strength_dbm) == 0:
        return float(out[0])
    return out.reshape(s.shape)


def quality(strength_dbm: float) -> str:
    """Indicative 4G reception quality label for a strength in dBm.

    Band boundaries belong to the better band, except -110 dBm and below
    which counts as no signal.
    """
    if strength_dbm >= -70.0:
        return "Excellent"
    if strength_dbm >= -90.0:
        return "Good"
    if strength_dbm >= -100.0:
        return "Fair"
    if strength_dbm > -110.0:
        return "Poor"
    return "Bad or no signal"


def cell_strength(
    cell: Cell,
    grid: Grid,
    max_pattern_loss_db: float = DEFAULT_MAX_PATTERN_LOSS_DB,
) -> np.ndarray:
    """Dense strength (dBm) of one cell over every tile of the grid."""
    if cell.power is None or cell.path_loss_exp is None or cell.height is None:
        raise ValueError(f"cell {cell.id!r} has unset radio parameters; "
                         f"apply defaults first")
    centroids = grid.centroids()
    dx = centroids[:, 0] - cell.x
    dy = centroids[:, 1] - cell.y
    horizontal = np.hypot(dx, dy)

    under = grid.tile_at(cell.x, cell.y)
    cell_terrain = grid.elevation_at(under) if under is not None else 0.0
    height_diff = (cell_terrain + cell.height) - grid.elevation

    r = np.maximum(np.hypot(horizontal, height_diff), MIN_DISTANCE_M)
    s = dbm_from_watt(cell.power) - distance_loss(r, cell.path_loss_exp)

    if cell.directional:
        if None in (cell.azimuth, cell.tilt, cell.beam_h, cell.beam_v):
            raise ValueError(f"cell {cell.id!r} is directional but has unset "
                             f"geometry; apply defaults and validate first")
        pat_h = fit_pattern(cell.beam_h / 2.0, max_pattern_loss_db)
        pat_v = fit_pattern(cell.beam_v / 2.0, max_pattern_loss_db)
        delta = wrap_degrees(bearing_degrees(cell.x, cell.y, centroids[:, 0],
                                             centroids[:, 1]) - cell.azimuth)
        eps = wrap_degrees(np.degrees(np.arctan2(height_diff, horizontal)) - cell.tilt)
        s -= pat_h.loss(np.abs(delta))
        s -= pat_v.loss(np.abs(eps))
    return s


def sparsify_strength(
    grid: Grid,
    strength_by_cell: dict[str, np.ndarray],
    params: DominanceParams,
) -> tuple[StrengthField, DominanceField]:
    """Apply the logistic and drop (strength, dominance) entry pairs whose
    dominance falls below the cutoff."""
    strength_cols = {}
    dominance_cols = {}
    for cell_id, s in strength_by_cell.items():
        dom = dominance(s, params)
        keep = np.flatnonzero(dom >= params.min_dominance)
        strength_cols[cell_id] = (keep, s[keep])
        dominance_cols[cell_id] = (keep, dom[keep])
    return (
        SparseField(grid.n_tiles, strength_cols),
        SparseField(grid.n_tiles, dominance_cols),
    )


def compute_fields(
    plan: CellPlan,
    grid: Grid,
    params: DominanceParams = DominanceParams(),
    max_pattern_loss_db: float = DEFAULT_MAX_PATTERN_LOSS_DB,
    threads: int = 0,
) -> tuple[StrengthField, DominanceField]:
    """Strength and dominance of every cell over every tile, sparsified.

    Cells are computed independently (optionally in a thread pool;
    ``threads=0`` uses all cores, 1 disables the pool) and merged in
    sorted cell-id order, so the result is identical for any thread
    count. The plan must be defaulted and validated.
    """
    cells = sorted(plan.cells, key=lambda c: c.id)

    def one(cell: Cell) -> np.ndarray:
        return cell_strength(cell, grid, max_pattern_loss_db)

    if threads == 1 or len(cells) <= 1:
        dense = [one(c) for c in cells]
    else:
        workers = threads if threads > 0 else (os.cpu_count() or 1)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            dense = list(pool.map(one, cells))

    by_cell = {c.id: s for c, s in zip(cells, dense)}
    return sparsify_strength(grid, by_cell, params)
