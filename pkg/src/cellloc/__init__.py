"""Grid-based Bayesian location estimation from mobile-network cell plans.

Builds signal-strength and signal-dominance fields over a square-tile
grid, location priors, connection likelihoods (signal model or
tessellation), Bayesian location posteriors, and Timing Advance
distance-band refinements. Exposed as a library, a batch CLI (cellloc)
and an interactive calibration service (cellloc-serve).
"""

from .bayes import (
    LikelihoodField,
    Posterior,
    TimingAdvanceSpec,
    connection_likelihood,
    posterior,
    ta_update,
    voronoi_likelihood,
)
from .cells import Cell, CellDefaults, CellPlan, apply_defaults, validate
from .errors import (
    CellLocError,
    ConfigError,
    DegeneratePriorError,
    InvariantError,
    ParseError,
)
from .fields import SparseField
from .grid import (
    Annulus,
    Grid,
    TileId,
    annulus_contains,
    azimuth_offset,
    bearing_degrees,
    distance_3d,
    elevation_offset,
    wrap_degrees,
)
from .priors import (
    LandUseTable,
    MixtureWeights,
    TileDistribution,
    composite_prior,
    landuse_prior,
    network_prior,
    uniform_prior,
)
from .propagation import (
    DominanceField,
    DominanceParams,
    RadiationPattern,
    StrengthField,
    compute_fields,
    dbm_from_watt,
    distance_loss,
    dominance,
    fit_pattern,
    quality,
    signal_strength,
)
from .voronoi import Tessellation, best_server, s_vor, voronoi_assign

__version__ = "0.1.0"

__all__ = [
    "Annulus", "Cell", "CellDefaults", "CellLocError", "CellPlan",
    "ConfigError", "DegeneratePriorError", "DominanceField",
    "DominanceParams", "Grid", "InvariantError", "LandUseTable",
    "LikelihoodField", "MixtureWeights", "ParseError", "Posterior",
    "RadiationPattern", "SparseField", "StrengthField", "Tessellation",
    "TileDistribution", "TileId", "TimingAdvanceSpec", "annulus_contains",
    "apply_defaults", "azimuth_offset", "bearing_degrees", "best_server",
    "composite_prior", "compute_fields", "connection_likelihood",
    "dbm_from_watt", "distance_3d", "distance_loss", "dominance",
    "elevation_offset", "fit_pattern", "landuse_prior", "network_prior",
    "posterior", "quality", "s_vor", "signal_strength", "ta_update",
    "uniform_prior", "validate", "voronoi_assign", "voronoi_likelihood",
    "wrap_degrees",
]
