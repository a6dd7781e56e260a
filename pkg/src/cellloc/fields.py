"""Sparse (cell, tile) -> value container shared by the signal fields.

The same structure backs signal strength (dBm), signal dominance in
[0, 1] and per-tile connection probabilities: a column of (tile index,
value) pairs per cell. Columns are kept in sorted cell-id order and tile
indices within a column are strictly increasing, so every walk over a
field is deterministic.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping

import numpy as np


class SparseField:
    """Immutable-by-convention sparse map of (cell id, tile id) -> float."""

    __slots__ = ("n_tiles", "_columns")

    def __init__(
        self,
        n_tiles: int,
        columns: Mapping[str, tuple[np.ndarray, np.ndarray]],
    ):
        if n_tiles < 0:
            raise ValueError("n_tiles must be non-negative")
        self.n_tiles = int(n_tiles)
        normalized: dict[str, tuple[np.ndarray, np.ndarray]] = {}
        for cell_id in sorted(columns):
            tiles, values = columns[cell_id]
            tiles = np.asarray(tiles, dtype=np.int64)
            values = np.asarray(values, dtype=np.float64)
            if tiles.shape != values.shape or tiles.ndim != 1:
                raise ValueError(f"column {cell_id!r}: tiles/values shape mismatch")
            if tiles.size:
                if np.any(np.diff(tiles) <= 0):
                    order = np.argsort(tiles, kind="stable")
                    tiles, values = tiles[order], values[order]
                    if np.any(np.diff(tiles) <= 0):
                        raise ValueError(f"column {cell_id!r}: duplicate tile index")
                if tiles[0] < 0 or tiles[-1] >= n_tiles:
                    raise ValueError(f"column {cell_id!r}: tile index out of range")
            normalized[cell_id] = (tiles, values)
        self._columns = normalized

    @classmethod
    def from_entries(
        cls, n_tiles: int, entries: Iterable[tuple[str, int, float]]
    ) -> "SparseField":
        by_cell: dict[str, list[tuple[int, float]]] = {}
        for cell_id, tile, value in entries:
            by_cell.setdefault(cell_id, []).append((int(tile), float(value)))
        columns = {}
        for cell_id, pairs in by_cell.items():
            pairs.sort()
            tiles = np.array([t for t, _ in pairs], dtype=np.int64)
            values = np.array([v for _, v in pairs], dtype=np.float64)
            columns[cell_id] = (tiles, values)
        return cls(n_tiles, columns)

    @property
    def cell_ids(self) -> tuple[str, ...]:
        return tuple(self._columns)

    @property
    def nnz(self) -> int:
        return sum(tiles.size for tiles, _ in self._columns.values())

    def __contains__(self, cell_id: str) -> bool:
        return cell_id in self._columns

    def column(self, cell_id: str) -> tuple[np.ndarray, np.ndarray]:
        """(tile indices, values) for one cell. KeyError if unknown."""
        return self._columns[cell_id]

    def value(self, cell_id: str, tile: int) -> float:
        """Single entry; 0.0 where the field has no entry."""
        col = self._columns.get(cell_id)
        if col is None:
            return 0.0
        tiles, values = col
        pos = np.searchsorted(tiles, tile)
        if pos < tiles.size and tiles[pos] == tile:
            return float(values[pos])
        return 0.0

    def entries(self) -> Iterator[tuple[str, int, float]]:
        """All entries, sorted by (cell id, tile id)."""
        for cell_id, (tiles, values) in self._columns.items():
            for t, v in zip(tiles.tolist(), values.tolist()):
                yield cell_id, t, v

    def tile_totals(self) -> np.ndarray:
        """Dense per-tile sum over all cells (length n_tiles)."""
        totals = np.zeros(self.n_tiles)
        for tiles, values in self._columns.values():
            np.add.at(totals, tiles, values)
        return totals

    def covered_tiles(self) -> np.ndarray:
        """Sorted unique tile indices that have at least one entry."""
        if not self._columns:
            return np.empty(0, dtype=np.int64)
        return np.unique(np.concatenate([t for t, _ in self._columns.values()]))

    def scaled(self, k: float) -> "SparseField":
        return SparseField(
            self.n_tiles,
            {c: (tiles, values * k) for c, (tiles, values) in self._columns.items()},
        )

    def to_dense(self) -> dict[str, np.ndarray]:
        """Dense per-cell vectors; intended for small grids and tests."""
        out = {}
        for cell_id, (tiles, values) in self._columns.items():
            dense = np.zeros(self.n_tiles)
            dense[tiles] = values
            out[cell_id] = dense
        return out
