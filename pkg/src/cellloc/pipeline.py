"""Shared assembly of the processing stages. Both the CLI and the HTTP
service go through these helpers, so their numeric outputs are identical
by construction."""

from __future__ import annotations

from dataclasses import dataclass

from . import io as dataio
from .bayes import LikelihoodField, Posterior, connection_likelihood, \
    posterior as bayes_posterior, voronoi_likelihood
from .cells import CellDefaults, CellPlan, ValidationReport, apply_defaults, validate
from .errors import ConfigError
from .fields import SparseField
from .grid import Grid
from .priors import (
    LandUseTable,
    MixtureWeights,
    TileDistribution,
    composite_prior,
    landuse_prior,
    network_prior,
    uniform_prior,
)
from .propagation import DominanceParams, compute_fields
from .voronoi import Tessellation, best_server, voronoi_assign


@dataclass
class Dataset:
    """Loaded inputs of one run: grid, plans and land use.

    ``raw_plan`` keeps the cells as parsed so defaults can be re-applied
    with different fill-in values (the calibration service does this when
    its default path-loss exponent changes).
    """

    config: dataio.RunConfig
    grid: Grid
    raw_plan: CellPlan
    plan: CellPlan
    landuse: LandUseTable | None

    def replan(self, defaults: CellDefaults) -> "Dataset":
        return Dataset(self.config, self.grid, self.raw_plan,
                       apply_defaults(self.raw_plan, defaults), self.landuse)


def load_dataset(config: dataio.RunConfig) -> Dataset:
    grid = dataio.build_grid(config)
    raw_plan = dataio.load_cellplan(config.cellplan_path)
    plan = apply_defaults(raw_plan, config.cell_defaults)
    landuse = None
    if config.landuse_weights_path is not None:
        weights_text = config.landuse_weights_path.read_text()
        if config.landuse_raster_paths is not None:
            landuse = dataio.parse_landuse_rasters(
                weights_text,
                {cls: p.read_text()
                 for cls, p in config.landuse_raster_paths.items()},
                grid,
            )
        else:
            landuse = dataio.parse_landuse(
                weights_text,
                config.landuse_fractions_path.read_text(),
                grid.n_tiles,
            )
    return Dataset(config, grid, raw_plan, plan, landuse)


def validate_dataset(dataset: Dataset) -> ValidationReport:
    return validate(dataset.plan, dataset.grid)


def strength_and_dominance(
    dataset: Dataset,
    params: DominanceParams | None = None,
    threads: int = 0,
) -> tuple[SparseField, SparseField]:
    cfg = dataset.config
    return compute_fields(
        dataset.plan,
        dataset.grid,
        params if params is not None else cfg.dominance,
        max_pattern_loss_db=cfg.max_pattern_loss_db,
        threads=threads,
    )


def make_prior(
    dataset: Dataset,
    kind: str,
    dom: SparseField | None = None,
    pi: MixtureWeights | None = None,
) -> TileDistribution:
    """Build one prior kind; network/composite need the dominance field."""
    if kind == "uniform":
        return uniform_prior(dataset.grid)
    if kind == "landuse":
        if dataset.landuse is None:
            raise ConfigError("land-use prior requested but no land-use inputs")
        return landuse_prior(dataset.landuse, dataset.grid)
    if kind == "network":
        if dom is None:
            raise ValueError("network prior needs the dominance field")
        return network_prior(dom)
    if kind == "composite":
        weights = pi if pi is not None else dataset.config.pi
        if weights is None:
            raise ConfigError("composite prior requires mixture weights")
        if dom is None:
            raise ValueError("composite prior needs the dominance field")
        if dataset.landuse is None:
            raise ConfigError("composite prior requires land-use inputs")
        return composite_prior(
            weights,
            uniform_prior(dataset.grid),
            landuse_prior(dataset.landuse, dataset.grid),
            network_prior(dom),
        )
    raise ConfigError(f"unknown prior kind {kind!r}")


def make_tessellation(
    dataset: Dataset,
    kind: str,
    strength: SparseField | None = None,
) -> Tessellation:
    if kind == "voronoi":
        return voronoi_assign(dataset.plan, dataset.grid,
                              dataset.config.voronoi_shift)
    if kind == "bestserver":
        if strength is None:
            raise ValueError("best-server tessellation needs the strength field")
        return best_server(strength)
    raise ConfigError(f"unknown tessellation kind {kind!r}")


def make_likelihood(
    dataset: Dataset,
    kind: str,
    dom: SparseField | None = None,
) -> LikelihoodField:
    if kind == "strength":
        if dom is None:
            raise ValueError("strength likelihood needs the dominance field")
        return connection_likelihood(dom)
    if kind == "voronoi":
        return voronoi_likelihood(
            voronoi_assign(dataset.plan, dataset.grid, dataset.config.voronoi_shift)
        )
    raise ConfigError(f"unknown likelihood kind {kind!r}")


def make_posterior(prior: TileDistribution, llh: LikelihoodField) -> Posterior:
    return bayes_posterior(prior, llh)
