"""Location priors: probability distributions over grid tiles built from
nothing (uniform), from land-use composition, from the network's total
signal dominance, or from a convex mixture of the three."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneratePriorError
from .fields import SparseField
from .grid import Grid

# A distribution may drift from exact unit mass by at most this much.
SUM_TOLERANCE = 1e-9

# Renormalization inside composite mixing only kicks in above ulp-level
# drift, so identity mixtures pass inputs through bitwise.
_DRIFT_EPS = 1e-12


class TileDistribution:
    """Probability vector over all tiles of a grid.

    Values are non-negative and sum to 1 within SUM_TOLERANCE; violating
    inputs are rejected rather than silently renormalized.
    """

    __slots__ = ("probs",)

    def __init__(self, probs):
        p = np.asarray(probs, dtype=np.float64)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probs must be a non-empty flat vector")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValueError("probabilities must be finite and non-negative")
        total = float(p.sum())
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"probabilities sum to {total!r}, expected 1")
        self.probs = p

    @property
    def n_tiles(self) -> int:
        return self.probs.size

    def __len__(self) -> int:
        return self.probs.size

    def __getitem__(self, t: int) -> float:
        return float(self.probs[t])


@dataclass(frozen=True)
class MixtureWeights:
    """Convex weights of the composite prior; must lie on the simplex."""

    uniform: float
    landuse: float
    network: float

    def __post_init__(self):
        for name, w in (("uniform", self.uniform), ("landuse", self.landuse),
                        ("network", self.network)):
            if not 0.0 <= w <= 1.0:
                raise ValueError(f"weight {name}={w} outside [0, 1]")
        total = self.uniform + self.landuse + self.network
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"weights sum to {total!r}, expected 1")


class LandUseTable:
    """Per-class expected-device weights and per-tile class fractions.

    ``fractions`` is (n_classes, n_tiles); each tile's fractions must sum
    to 1 within ``tol`` and are renormalized to absorb raster resampling
    drift. Any proportional rescaling of the class weights leaves the
    derived prior unchanged.
    """

    def __init__(self, class_names, weights, fractions, tol: float = 1e-6):
        self.class_names = list(class_names)
        self.weights = np.asarray(weights, dtype=np.float64)
        frac = np.asarray(fractions, dtype=np.float64)
        if self.weights.shape != (len(self.class_names),):
            raise ValueError("one weight per class required")
        if np.any(self.weights < 0) or not np.all(np.isfinite(self.weights)):
            raise ValueError("class weights must be finite and non-negative")
        if frac.ndim != 2 or frac.shape[0] != len(self.class_names):
            raise ValueError("fractions must be (n_classes, n_tiles)")
        if np.any(frac < 0) or np.any(frac > 1):
            raise ValueError("tile fractions must lie in [0, 1]")
        sums = frac.sum(axis=0)
        bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
        if bad.size:
            raise ValueError(
                f"tile fractions must sum to 1 within {tol}; first offender: "
                f"tile {bad[0]} sums to {sums[bad[0]]!r}"
            )
        self.fractions = frac / sums

    @property
    def n_tiles(self) -> int:
        return self.fractions.shape[1]

    def expected_devices(self) -> np.ndarray:
        """Relative expected device count per tile (unnormalized)."""
        return self.weights @ self.fractions


def uniform_prior(grid: Grid) -> TileDistribution:
    """Every tile equally likely."""
    n = grid.n_tiles
    if n < 1:
        raise ValueError("empty grid")
    return TileDistribution(np.full(n, 1.0 / n))


def landuse_prior(table: LandUseTable, grid: Grid) -> TileDistribution:
    """Tiles weighted by their relative expected number of devices."""
    if table.n_tiles != grid.n_tiles:
        raise ValueError(
            f"land-use table covers {table.n_tiles} tiles, grid has {grid.n_tiles}"
        )
    n_g = table.expected_devices()
    total = n_g.sum()
    if total <= 0:
        raise DegeneratePriorError(
            "land-use prior has zero total mass (all tiles weightless)"
        )
    return TileDistribution(n_g / total)


def network_prior(dom: SparseField) -> TileDistribution:
    """Tiles weighted by total signal dominance over all cells.

    Reflects where the network concentrates capacity. With any one-hot
    dominance (each tile served by exactly one cell at value 1) this
    collapses to the uniform prior.
    """
    totals = dom.tile_totals()
    mass = totals.sum()
    if mass <= 0:
        raise DegeneratePriorError("network prior has zero total dominance")
    return TileDistribution(totals / mass)


def composite_prior(
    weights: MixtureWeights,
    uniform: TileDistribution,
    landuse: TileDistribution,
    network: TileDistribution,
) -> TileDistribution:
    """Convex combination of the three priors.

    Renormalizes only to absorb floating-point drift; an identity mixture
    returns its input values unchanged.
    """
    if not (uniform.n_tiles == landuse.n_tiles == network.n_tiles):
        raise ValueError("priors cover different grids")
    mix = (weights.uniform * uniform.probs
           + weights.landuse * landuse.probs
           + weights.network * network.probs)
    total = mix.sum()
    if total <= 0 or not math.isfinite(total):
        raise DegeneratePriorError("composite prior has zero total mass")
    if abs(total - 1.0) > _DRIFT_EPS:
        mix = mix / total
    return TileDistribution(mix)
