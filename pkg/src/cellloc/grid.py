"""Planar square-tile grid and the geometric primitives used by the
propagation model and the distance-band (Timing Advance) update.

All coordinates are planar metric (projected). Callers must supply inputs
in an area- and distance-preserving projection; no CRS handling happens
here. Angles are degrees, distances meters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Any tile is addressed by a single integer index.
TileId = int

# Floor for 3D distances. Keeps the distance loss non-negative and anchors
# it to the 1 m reference distance of the transmit-power conversion.
MIN_DISTANCE_M = 1.0


def wrap_degrees(angle):
    """Wrap an angle in degrees into (-180, 180]. Accepts scalars or arrays."""
    wrapped = np.mod(angle, 360.0)
    if np.ndim(wrapped) == 0:
        w = float(wrapped)
        return w - 360.0 if w > 180.0 else w
    wrapped[wrapped > 180.0] -= 360.0
    return wrapped


def bearing_degrees(from_x, from_y, to_x, to_y):
    """Compass bearing from one point to another: degrees clockwise from
    north (grid +y), in [0, 360). Accepts scalars or arrays."""
    brg = np.degrees(np.arctan2(to_x - from_x, to_y - from_y))
    brg = np.mod(brg, 360.0)
    if np.ndim(brg) == 0:
        return float(brg)
    return brg


@dataclass(frozen=True)
class Grid:
    """Square-tile partition of a rectangular planar region.

    Tiles are indexed row-major from the south-west corner: tile 0 is the
    south-western tile, indices increase eastward first, then northward.
    ``elevation`` holds per-tile terrain height in meters (default 0).
    """

    origin_x: float
    origin_y: float
    n_cols: int
    n_rows: int
    tile_size: float = 100.0
    elevation: np.ndarray | None = None

    def __post_init__(self):
        if self.tile_size <= 0:
            raise ValueError(f"tile_size must be > 0, got {self.tile_size}")
        if self.n_cols < 1 or self.n_rows < 1:
            raise ValueError(
                f"grid must have at least one tile, got {self.n_cols}x{self.n_rows}"
            )
        if self.elevation is None:
            elev = np.zeros(self.n_tiles)
        else:
            elev = np.asarray(self.elevation, dtype=float)
            if elev.shape != (self.n_tiles,):
                raise ValueError(
                    f"elevation must have one value per tile "
                    f"({self.n_tiles}), got shape {elev.shape}"
                )
        object.__setattr__(self, "elevation", elev)

    @property
    def n_tiles(self) -> int:
        return self.n_cols * self.n_rows

    def check_tile(self, t: TileId) -> None:
        if not 0 <= t < self.n_tiles:
            raise IndexError(f"tile index {t} out of range [0, {self.n_tiles})")

    def row_col(self, t: TileId) -> tuple[int, int]:
        self.check_tile(t)
        return divmod(t, self.n_cols)

    def tile_index(self, row: int, col: int) -> TileId:
        if not (0 <= row < self.n_rows and 0 <= col < self.n_cols):
            raise IndexError(f"tile (row={row}, col={col}) outside grid")
        return row * self.n_cols + col

    def centroid(self, t: TileId) -> tuple[float, float]:
        """Geometric center of tile ``t``."""
        row, col = self.row_col(t)
        return (
            self.origin_x + (col + 0.5) * self.tile_size,
            self.origin_y + (row + 0.5) * self.tile_size,
        )

    def centroids(self) -> np.ndarray:
        """All tile centroids as an (n_tiles, 2) array, tile order."""
        cols = np.arange(self.n_tiles) % self.n_cols
        rows = np.arange(self.n_tiles) // self.n_cols
        out = np.empty((self.n_tiles, 2))
        out[:, 0] = self.origin_x + (cols + 0.5) * self.tile_size
        out[:, 1] = self.origin_y + (rows + 0.5) * self.tile_size
        return out

    def tile_at(self, x: float, y: float) -> TileId | None:
        """Tile containing point (x, y), or None if outside the grid."""
        if not (math.isfinite(x) and math.isfinite(y)):
            return None
        col = math.floor((x - self.origin_x) / self.tile_size)
        row = math.floor((y - self.origin_y) / self.tile_size)
        if 0 <= row < self.n_rows and 0 <= col < self.n_cols:
            return row * self.n_cols + col
        return None

    def contains_point(self, x: float, y: float) -> bool:
        return self.tile_at(x, y) is not None

    def elevation_at(self, t: TileId) -> float:
        self.check_tile(t)
        return float(self.elevation[t])

    def tile_bounds(self, t: TileId) -> tuple[float, float, float, float]:
        """(x_min, y_min, x_max, y_max) of tile ``t``."""
        row, col = self.row_col(t)
        x0 = self.origin_x + col * self.tile_size
        y0 = self.origin_y + row * self.tile_size
        return (x0, y0, x0 + self.tile_size, y0 + self.tile_size)

    def spec(self) -> dict:
        """Plain-dict description of the grid geometry (no elevation)."""
        return {
            "origin_x": self.origin_x,
            "origin_y": self.origin_y,
            "tile_size": self.tile_size,
            "n_cols": self.n_cols,
            "n_rows": self.n_rows,
        }


@dataclass(frozen=True)
class Annulus:
    """Closed-open ring around a center point: contains p iff
    inner_radius <= |p - center| < outer_radius (2D distance)."""

    center_x: float
    center_y: float
    inner_radius: float
    outer_radius: float

    def __post_init__(self):
        if self.inner_radius < 0:
            raise ValueError(f"inner_radius must be >= 0, got {self.inner_radius}")
        if self.outer_radius <= self.inner_radius:
            raise ValueError(
                f"outer_radius ({self.outer_radius}) must exceed "
                f"inner_radius ({self.inner_radius})"
            )

    def contains(self, x: float, y: float) -> bool:
        d = math.hypot(x - self.center_x, y - self.center_y)
        return self.inner_radius <= d < self.outer_radius

    def contains_points(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask for an (n, 2) array of points."""
        d = np.hypot(points[:, 0] - self.center_x, points[:, 1] - self.center_y)
        return (d >= self.inner_radius) & (d < self.outer_radius)


def annulus_contains(ann: Annulus, x: float, y: float) -> bool:
    """Membership test for a single point (see Annulus.contains)."""
    return ann.contains(x, y)


def distance_3d(
    tile_x: float,
    tile_y: float,
    tile_elevation: float,
    cell_x: float,
    cell_y: float,
    cell_height: float,
    cell_terrain: float = 0.0,
) -> float:
    """3D distance in meters between a tile centroid (at terrain elevation)
    and a cell antenna (terrain under the cell plus installation height).

    Clamped to MIN_DISTANCE_M so the distance loss stays non-negative.
    """
    horizontal = math.hypot(tile_x - cell_x, tile_y - cell_y)
    vertical = (cell_terrain + cell_height) - tile_elevation
    return max(math.hypot(horizontal, vertical), MIN_DISTANCE_M)


def azimuth_offset(bearing: float, azimuth: float) -> float:
    """Signed horizontal angle between a cell-to-tile bearing and the
    cell's propagation azimuth, wrapped into (-180, 180].

    Negative means the tile lies counter-clockwise of the boresight.
    """
    return wrap_degrees(bearing - azimuth)


def elevation_offset(horizontal_dist: float, height_diff: float, tilt: float) -> float:
    """Vertical angle between the tilted boresight and the line of sight
    to a tile, wrapped into (-180, 180]. Downward is positive, so the
    result is 0 along the boresight of a cell tilted down by ``tilt``.

    ``height_diff`` is antenna absolute height minus tile terrain elevation.
    """
    depression = math.degrees(math.atan2(height_diff, horizontal_dist))
    return wrap_degrees(depression - tilt)
