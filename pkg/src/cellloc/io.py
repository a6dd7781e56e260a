"""File formats: cell-plan CSV, land-use tables, elevation rasters, the
posterior output table, GeoJSON exports and the run configuration.

Parsers reject malformed input with a located error (file, row, column)
instead of guessing; writers produce byte-deterministic output.
"""

from __future__ import annotations

import csv
import io as _stdio
import json
import math
import os
import tempfile
from dataclasses import dataclass, fields as dc_fields
from pathlib import Path

import numpy as np
from shapely.geometry import box, mapping
from shapely.ops import unary_union

from .bayes import Posterior, TimingAdvanceSpec
from .cells import Cell, CellDefaults, CellPlan
from .errors import ConfigError, ParseError
from .grid import Grid
from .priors import LandUseTable, MixtureWeights, TileDistribution
from .propagation import DEFAULT_MAX_PATTERN_LOSS_DB, DominanceParams
from .voronoi import Tessellation

CELLPLAN_COLUMNS = (
    "id", "x", "y", "height", "directional", "azimuth", "tilt",
    "beam_h", "beam_v", "power", "path_loss_exp", "small",
)
_MANDATORY = ("id", "x", "y")

PRIOR_KINDS = ("uniform", "landuse", "network", "composite")
LIKELIHOOD_KINDS = ("strength", "voronoi")

# Numeric output format: 12 significant digits round-trips through float
# parsing, so write -> parse -> write is byte-identical.
PROB_FORMAT = "{:.12g}"


def _parse_float(raw: str, row: int, column: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ParseError(
            f"row {row}: column {column!r}: not a number: {raw!r}"
        ) from None


def _parse_bool(raw: str, row: int, column: str) -> bool:
    val = raw.strip().lower()
    if val in ("true", "1", "yes"):
        return True
    if val in ("false", "0", "no"):
        return False
    raise ParseError(f"row {row}: column {column!r}: not a boolean: {raw!r}")


def parse_cellplan(text: str) -> CellPlan:
    """Parse the cell-plan CSV.

    Header must name a subset of the schema columns and include id, x, y.
    Empty optional fields stay unset until defaults are applied.
    """
    reader = csv.reader(_stdio.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("cell plan is empty (missing header row)") from None
    unknown = [h for h in header if h not in CELLPLAN_COLUMNS]
    if unknown:
        raise ParseError(f"unknown cell plan column(s): {', '.join(unknown)}")
    for col in _MANDATORY:
        if col not in header:
            raise ParseError(f"cell plan is missing mandatory column {col!r}")

    cells = []
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != len(header):
            raise ParseError(
                f"row {row_no}: expected {len(header)} fields, got {len(row)}"
            )
        rec = dict(zip(header, (f.strip() for f in row)))
        for col in _MANDATORY:
            if not rec.get(col):
                raise ParseError(f"row {row_no}: column {col!r}: value required")
        kwargs: dict = {
            "id": rec["id"],
            "x": _parse_float(rec["x"], row_no, "x"),
            "y": _parse_float(rec["y"], row_no, "y"),
        }
        for col in ("height", "azimuth", "tilt", "beam_h", "beam_v",
                    "power", "path_loss_exp"):
            raw = rec.get(col, "")
            if raw:
                kwargs[col] = _parse_float(raw, row_no, col)
        for col in ("directional", "small"):
            raw = rec.get(col, "")
            if raw:
                kwargs[col] = _parse_bool(raw, row_no, col)
        cells.append(Cell(**kwargs))
    return CellPlan(tuple(cells))


def load_cellplan(path: str | Path) -> CellPlan:
    return parse_cellplan(Path(path).read_text())


# ---------------------------------------------------------------------------
# Land use


def parse_class_weights(text: str) -> tuple[list[str], np.ndarray]:
    """Parse the land-use class weight CSV (columns: class, weight)."""
    reader = csv.reader(_stdio.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("class weights file is empty") from None
    if header != ["class", "weight"]:
        raise ParseError(
            f"class weights header must be 'class,weight', got {','.join(header)!r}"
        )
    names: list[str] = []
    weights: list[float] = []
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != 2:
            raise ParseError(f"row {row_no}: expected 2 fields, got {len(row)}")
        name = row[0].strip()
        if not name:
            raise ParseError(f"row {row_no}: column 'class': value required")
        if name in names:
            raise ParseError(f"row {row_no}: duplicate class {name!r}")
        w = _parse_float(row[1].strip(), row_no, "weight")
        if w < 0:
            raise ParseError(f"row {row_no}: column 'weight': must be >= 0")
        names.append(name)
        weights.append(w)
    if not names:
        raise ParseError("class weights file has no classes")
    return names, np.array(weights)


def parse_landuse(
    weights_text: str,
    fractions_text: str,
    n_tiles: int,
    sum_tol: float = 1e-3,
) -> LandUseTable:
    """Parse class weights plus the per-tile fraction table.

    The fraction table is wide CSV: a tile_id column followed by one
    column per class (classes must exist in the weights file). Every tile
    must appear exactly once, and each row's fractions must sum to 1
    within ``sum_tol``.
    """
    names, weights = parse_class_weights(weights_text)

    reader = csv.reader(_stdio.StringIO(fractions_text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("land-use fraction table is empty") from None
    if not header or header[0] != "tile_id":
        raise ParseError("fraction table must start with a 'tile_id' column")
    frac_classes = header[1:]
    unknown = [c for c in frac_classes if c not in names]
    if unknown:
        raise ParseError(
            f"fraction table references unknown class(es): {', '.join(unknown)}"
        )

    fractions = np.zeros((len(names), n_tiles))
    seen = np.zeros(n_tiles, dtype=bool)
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != len(header):
            raise ParseError(
                f"row {row_no}: expected {len(header)} fields, got {len(row)}"
            )
        tile = int(_parse_float(row[0].strip(), row_no, "tile_id"))
        if not 0 <= tile < n_tiles:
            raise ParseError(f"row {row_no}: tile_id {tile} outside [0, {n_tiles})")
        if seen[tile]:
            raise ParseError(f"row {row_no}: duplicate tile_id {tile}")
        seen[tile] = True
        vals = [_parse_float(row[i + 1].strip(), row_no, frac_classes[i])
                for i in range(len(frac_classes))]
        total = sum(vals)
        if abs(total - 1.0) > sum_tol:
            raise ParseError(
                f"row {row_no}: fractions sum to {total!r}, expected 1 "
                f"within {sum_tol}"
            )
        for cls, v in zip(frac_classes, vals):
            fractions[names.index(cls), tile] = v
    missing = np.flatnonzero(~seen)
    if missing.size:
        raise ParseError(
            f"fraction table misses {missing.size} tile(s), first: {missing[0]}"
        )
    return LandUseTable(names, weights, fractions, tol=sum_tol)


def parse_landuse_rasters(
    weights_text: str,
    rasters: dict[str, str],
    grid: Grid,
    sum_tol: float = 1e-3,
) -> LandUseTable:
    """Land use from one ASCII-grid raster per class (fraction covered).

    Classes without a raster contribute zero fraction; per-tile sums over
    the provided rasters must still reach 1 within ``sum_tol``.
    """
    names, weights = parse_class_weights(weights_text)
    unknown = sorted(set(rasters) - set(names))
    if unknown:
        raise ParseError(
            f"fraction raster references unknown class(es): {', '.join(unknown)}"
        )
    fractions = np.zeros((len(names), grid.n_tiles))
    for cls, text in rasters.items():
        fractions[names.index(cls)] = parse_ascii_grid(text, grid)
    try:
        return LandUseTable(names, weights, fractions, tol=sum_tol)
    except ValueError as exc:
        raise ParseError(f"land-use rasters: {exc}") from exc


# ---------------------------------------------------------------------------
# Elevation


def parse_elevation_csv(text: str, grid: Grid) -> np.ndarray:
    """Per-tile elevation CSV (columns: tile_id, elevation); full coverage."""
    reader = csv.reader(_stdio.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ParseError("elevation file is empty") from None
    if header != ["tile_id", "elevation"]:
        raise ParseError("elevation header must be 'tile_id,elevation'")
    values = np.zeros(grid.n_tiles)
    seen = np.zeros(grid.n_tiles, dtype=bool)
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != 2:
            raise ParseError(f"row {row_no}: expected 2 fields, got {len(row)}")
        tile = int(_parse_float(row[0].strip(), row_no, "tile_id"))
        if not 0 <= tile < grid.n_tiles:
            raise ParseError(f"row {row_no}: tile_id {tile} outside grid")
        if seen[tile]:
            raise ParseError(f"row {row_no}: duplicate tile_id {tile}")
        seen[tile] = True
        values[tile] = _parse_float(row[1].strip(), row_no, "elevation")
    missing = np.flatnonzero(~seen)
    if missing.size:
        raise ParseError(
            f"elevation file misses {missing.size} tile(s), first: {missing[0]}"
        )
    return values


def parse_ascii_grid(text: str, grid: Grid) -> np.ndarray:
    """ESRI ASCII raster aligned to the grid -> flat per-tile values.

    Alignment (cell size, corner, dimensions) must match the grid exactly;
    a mismatch is an error, not an interpolation. Raster rows run north to
    south and are flipped into tile order (row 0 = south).
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    header: dict[str, float] = {}
    data_start = 0
    for i, line in enumerate(lines):
        parts = line.split()
        key = parts[0].lower()
        if key in ("ncols", "nrows", "xllcorner", "yllcorner",
                   "cellsize", "nodata_value") and len(parts) == 2:
            header[key] = float(parts[1])
            data_start = i + 1
        else:
            break
    for required in ("ncols", "nrows", "xllcorner", "yllcorner", "cellsize"):
        if required not in header:
            raise ParseError(f"ASCII raster header misses {required!r}")

    if int(header["ncols"]) != grid.n_cols or int(header["nrows"]) != grid.n_rows:
        raise ParseError(
            f"raster is {int(header['ncols'])}x{int(header['nrows'])}, "
            f"grid is {grid.n_cols}x{grid.n_rows}"
        )
    for key, expected in (("xllcorner", grid.origin_x),
                          ("yllcorner", grid.origin_y),
                          ("cellsize", grid.tile_size)):
        if not math.isclose(header[key], expected, rel_tol=0, abs_tol=1e-6):
            raise ParseError(
                f"raster {key}={header[key]} does not align with grid "
                f"value {expected}"
            )

    rows = []
    for line in lines[data_start:]:
        rows.append([float(v) for v in line.split()])
    flat = [v for row in rows for v in row]
    if len(flat) != grid.n_tiles:
        raise ParseError(
            f"raster has {len(flat)} values, grid needs {grid.n_tiles}"
        )
    arr = np.array(flat).reshape(grid.n_rows, grid.n_cols)
    if "nodata_value" in header and np.any(arr == header["nodata_value"]):
        raise ParseError("raster contains NODATA cells inside the grid")
    return arr[::-1].reshape(-1)


# ---------------------------------------------------------------------------
# Output table


@dataclass(frozen=True)
class OutputRow:
    """One posterior entry: probability of a tile given a serving cell
    (and optionally a Timing Advance value)."""

    cell_id: str
    tile_id: int
    ta: int | None
    prob: float

OUTPUT_HEADER = "cell_id,tile_id,ta,prob"


def posterior_rows(post: Posterior) -> list[OutputRow]:
    rows = []
    for cell_id in post.cell_ids:
        tiles, probs = post.column(cell_id)
        for t, p in zip(tiles.tolist(), probs.tolist()):
            rows.append(OutputRow(cell_id, t, None, p))
    return rows


def ta_rows(cell_id: str, spec: TimingAdvanceSpec,
            dist: TileDistribution) -> list[OutputRow]:
    rows = []
    for t in np.flatnonzero(dist.probs > 0).tolist():
        rows.append(OutputRow(cell_id, t, spec.tau, float(dist.probs[t])))
    return rows


def format_output(rows: list[OutputRow]) -> str:
    """Serialize output rows deterministically: sorted by cell, TA value,
    tile; probabilities at 12 significant digits."""
    ordered = sorted(rows, key=lambda r: (r.cell_id, r.ta if r.ta is not None else -1,
                                          r.tile_id))
    lines = [OUTPUT_HEADER]
    for r in ordered:
        ta = "" if r.ta is None else str(r.ta)
        lines.append(f"{r.cell_id},{r.tile_id},{ta},{PROB_FORMAT.format(r.prob)}")
    return "\n".join(lines) + "\n"


def parse_output(text: str) -> list[OutputRow]:
    reader = csv.reader(_stdio.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("output table is empty") from None
    if [h.strip() for h in header] != OUTPUT_HEADER.split(","):
        raise ParseError(f"unexpected output header: {','.join(header)!r}")
    rows = []
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != 4:
            raise ParseError(f"row {row_no}: expected 4 fields, got {len(row)}")
        ta = int(row[2]) if row[2].strip() else None
        rows.append(OutputRow(row[0].strip(), int(row[1]),
                              ta, _parse_float(row[3].strip(), row_no, "prob")))
    return rows


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write via a temp file and rename, so failures never leave a
    truncated artifact that could pass for a result."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_output(path: str | Path, rows: list[OutputRow]) -> None:
    atomic_write_text(path, format_output(rows))


# ---------------------------------------------------------------------------
# GeoJSON (write-only, for the explorer and external GIS tools)


def _tile_box(grid: Grid, t: int):
    x0, y0, x1, y1 = grid.tile_bounds(t)
    return box(x0, y0, x1, y1)


def tessellation_geojson(tess: Tessellation, grid: Grid) -> dict:
    """One feature per cell, tile squares dissolved into region polygons."""
    features = []
    for cell_id, tiles in sorted(tess.regions().items()):
        geom = unary_union([_tile_box(grid, int(t)) for t in tiles])
        features.append({
            "type": "Feature",
            "properties": {"cell": cell_id, "tiles": int(tiles.size)},
            "geometry": mapping(geom),
        })
    return {"type": "FeatureCollection", "features": features}


def tiles_geojson(grid: Grid, tiles: np.ndarray, values: np.ndarray,
                  value_name: str = "value") -> dict:
    """One square feature per tile carrying its value (heat-tile export)."""
    features = []
    for t, v in zip(np.asarray(tiles).tolist(), np.asarray(values).tolist()):
        features.append({
            "type": "Feature",
            "properties": {"tile": int(t), value_name: float(v)},
            "geometry": mapping(_tile_box(grid, int(t))),
        })
    return {"type": "FeatureCollection", "features": features}


def write_geojson(path: str | Path, collection: dict) -> None:
    atomic_write_text(path, json.dumps(collection, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Run configuration


@dataclass(frozen=True)
class TAConfig:
    cell: str
    tau: int
    merge: int = 1
    band_width: float = 78.12

    def spec(self) -> TimingAdvanceSpec:
        return TimingAdvanceSpec(tau=self.tau, band_width=self.band_width,
                                 merge=self.merge)


@dataclass(frozen=True)
class RunConfig:
    """Everything one batch run or service session needs.

    ``prior`` may also be "all", meaning every applicable prior kind is
    computed (requires land-use inputs and mixture weights).
    """

    base_dir: Path
    grid_spec: dict
    cellplan_path: Path
    output_dir: Path
    landuse_weights_path: Path | None = None
    landuse_fractions_path: Path | None = None
    landuse_raster_paths: dict[str, Path] | None = None
    elevation_path: Path | None = None
    elevation_raster: bool = False
    dominance: DominanceParams = DominanceParams()
    cell_defaults: CellDefaults = CellDefaults()
    max_pattern_loss_db: float = DEFAULT_MAX_PATTERN_LOSS_DB
    prior: str = "composite"
    pi: MixtureWeights | None = None
    likelihood: str = "strength"
    voronoi_shift: float = 100.0
    ta: TAConfig | None = None

    def prior_kinds(self) -> list[str]:
        if self.prior == "all":
            return [k for k in PRIOR_KINDS
                    if k != "landuse" or self.landuse_weights_path is not None]
        return [self.prior]


_CONFIG_KEYS = {
    "grid", "cellplan", "landuse", "elevation", "dominance", "cell_defaults",
    "max_pattern_loss_db", "prior", "pi", "likelihood", "voronoi_shift",
    "ta", "output_dir",
}


def _build_dataclass(cls, data: dict, context: str):
    allowed = {f.name for f in dc_fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigError(f"{context}: unknown key(s): {', '.join(sorted(unknown))}")
    try:
        return cls(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{context}: {exc}") from exc


def load_config(path: str | Path) -> RunConfig:
    """Load and validate a JSON run configuration.

    Relative paths resolve against the config file's directory; referenced
    input files must exist. Unknown keys are rejected.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    base = path.parent

    def resolve(p: str, must_exist: bool = True) -> Path:
        full = (base / p).resolve() if not Path(p).is_absolute() else Path(p)
        if must_exist and not full.exists():
            raise ConfigError(f"referenced file does not exist: {full}")
        return full

    grid_spec = data.get("grid")
    if not isinstance(grid_spec, dict):
        raise ConfigError("config requires a 'grid' object")
    if "cellplan" not in data:
        raise ConfigError("config requires a 'cellplan' path")
    cellplan_path = resolve(data["cellplan"])

    landuse_weights = landuse_fractions = landuse_rasters = None
    if data.get("landuse") is not None:
        lu = data["landuse"]
        valid = isinstance(lu, dict) and (
            set(lu) == {"weights", "fractions"}
            or set(lu) == {"weights", "fraction_rasters"})
        if not valid:
            raise ConfigError(
                "'landuse' must be {weights, fractions} or "
                "{weights, fraction_rasters}")
        landuse_weights = resolve(lu["weights"])
        if "fractions" in lu:
            landuse_fractions = resolve(lu["fractions"])
        else:
            rasters = lu["fraction_rasters"]
            if not isinstance(rasters, dict) or not rasters:
                raise ConfigError("'fraction_rasters' must map class to path")
            landuse_rasters = {cls: resolve(p) for cls, p in rasters.items()}

    elevation_path = None
    elevation_raster = False
    if data.get("elevation") is not None:
        ele = data["elevation"]
        if isinstance(ele, dict):
            if set(ele) != {"raster"}:
                raise ConfigError("'elevation' must be a path or {raster: path}")
            elevation_path = resolve(ele["raster"])
            elevation_raster = True
        else:
            elevation_path = resolve(ele)

    dominance = _build_dataclass(DominanceParams, data.get("dominance", {}),
                                 "dominance")
    defaults = _build_dataclass(CellDefaults, data.get("cell_defaults", {}),
                                "cell_defaults")

    prior = data.get("prior", "composite")
    if prior not in PRIOR_KINDS and prior != "all":
        raise ConfigError(f"unknown prior kind {prior!r}")
    pi = None
    if data.get("pi") is not None:
        raw_pi = data["pi"]
        if not (isinstance(raw_pi, list) and len(raw_pi) == 3):
            raise ConfigError("'pi' must be a list of three weights")
        pi = _build_dataclass(
            MixtureWeights,
            dict(zip(("uniform", "landuse", "network"), map(float, raw_pi))),
            "pi",
        )
    if prior in ("composite", "all") and pi is None:
        raise ConfigError(f"prior {prior!r} requires mixture weights 'pi'")
    if prior in ("landuse", "composite") and landuse_weights is None:
        raise ConfigError(f"prior {prior!r} requires land-use inputs")

    likelihood = data.get("likelihood", "strength")
    if likelihood not in LIKELIHOOD_KINDS:
        raise ConfigError(f"unknown likelihood kind {likelihood!r}")

    ta = None
    if data.get("ta") is not None:
        raw_ta = dict(data["ta"])
        if "b" in raw_ta:
            raw_ta["merge"] = raw_ta.pop("b")
        ta = _build_dataclass(TAConfig, raw_ta, "ta")
        try:
            ta.spec()  # validates tau range and band width
        except ValueError as exc:
            raise ConfigError(f"ta: {exc}") from exc

    if "output_dir" not in data:
        raise ConfigError("config requires an 'output_dir'")
    output_dir = Path(data["output_dir"])
    if not output_dir.is_absolute():
        output_dir = base / output_dir

    return RunConfig(
        base_dir=base,
        grid_spec=grid_spec,
        cellplan_path=cellplan_path,
        output_dir=output_dir,
        landuse_weights_path=landuse_weights,
        landuse_fractions_path=landuse_fractions,
        landuse_raster_paths=landuse_rasters,
        elevation_path=elevation_path,
        elevation_raster=elevation_raster,
        dominance=dominance,
        cell_defaults=defaults,
        max_pattern_loss_db=float(data.get("max_pattern_loss_db",
                                           DEFAULT_MAX_PATTERN_LOSS_DB)),
        prior=prior,
        pi=pi,
        likelihood=likelihood,
        voronoi_shift=float(data.get("voronoi_shift", 100.0)),
        ta=ta,
    )


def build_grid(config: RunConfig) -> Grid:
    """Instantiate the grid from the config, loading elevation if given."""
    spec = dict(config.grid_spec)
    allowed = {"origin_x", "origin_y", "tile_size", "n_cols", "n_rows"}
    unknown = set(spec) - allowed
    if unknown:
        raise ConfigError(f"grid: unknown key(s): {', '.join(sorted(unknown))}")
    try:
        grid = Grid(
            origin_x=float(spec["origin_x"]),
            origin_y=float(spec["origin_y"]),
            n_cols=int(spec["n_cols"]),
            n_rows=int(spec["n_rows"]),
            tile_size=float(spec.get("tile_size", 100.0)),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(f"grid: {exc}") from exc
    if config.elevation_path is not None:
        text = config.elevation_path.read_text()
        if config.elevation_raster:
            elevation = parse_ascii_grid(text, grid)
        else:
            elevation = parse_elevation_csv(text, grid)
        grid = Grid(grid.origin_x, grid.origin_y, grid.n_cols, grid.n_rows,
                    grid.tile_size, elevation)
    return grid
