"""Cell and cell-plan data model: defaulting of optional radio parameters
and validation against the grid."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .grid import Grid


@dataclass(frozen=True)
class Cell:
    """One radio antenna.

    Mandatory fields are ``id`` and the planar position ``x``, ``y``.
    Everything else may be None until :func:`apply_defaults` fills it.
    For omnidirectional cells, azimuth, tilt and beam widths stay None
    and are ignored by the propagation model.
    """

    id: str
    x: float
    y: float
    height: float | None = None          # meters above ground
    directional: bool | None = None
    azimuth: float | None = None         # degrees clockwise from north
    tilt: float | None = None            # degrees downward from horizontal
    beam_h: float | None = None          # horizontal beam width, degrees
    beam_v: float | None = None          # vertical beam width, degrees
    power: float | None = None           # Watt
    path_loss_exp: float | None = None
    small: bool | None = None


@dataclass(frozen=True)
class CellDefaults:
    """Fill-in values for optional cell fields.

    Beam widths and tilt follow common deployment practice for macro
    sectors; the power split reflects the macro/small distinction. The
    height defaults are configuration, not measured truth. The default
    path-loss exponent 3.75 sits between free space (2) and indoor (6);
    urban plans typically override per cell to about 4.
    """

    power_macro: float = 10.0
    power_small: float = 1.0
    height_macro: float = 30.0
    height_small: float = 8.0
    tilt: float = 4.0
    beam_h: float = 65.0
    beam_v: float = 9.0
    path_loss_exp: float = 3.75
    small: bool = False


@dataclass(frozen=True)
class CellPlan:
    """An ordered collection of cells. Construction never validates;
    :func:`validate` reports violations as findings instead."""

    cells: tuple[Cell, ...]

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(self.cells))

    def __iter__(self):
        return iter(self.cells)

    def __len__(self):
        return len(self.cells)

    def ids(self) -> list[str]:
        return [c.id for c in self.cells]

    def by_id(self, cell_id: str) -> Cell:
        for c in self.cells:
            if c.id == cell_id:
                return c
        raise KeyError(f"no cell with id {cell_id!r}")

    def macro_cells(self) -> list[Cell]:
        return [c for c in self.cells if not c.small]

    def small_cells(self) -> list[Cell]:
        return [c for c in self.cells if c.small]


@dataclass(frozen=True)
class Finding:
    cell: str | None
    rule: str
    message: str


@dataclass
class ValidationReport:
    errors: list[Finding] = field(default_factory=list)
    warnings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, cell: str | None, rule: str, message: str) -> None:
        self.errors.append(Finding(cell, rule, message))

    def warn(self, cell: str | None, rule: str, message: str) -> None:
        self.warnings.append(Finding(cell, rule, message))

    def summary(self) -> str:
        lines = []
        for f in self.errors:
            where = f" [{f.cell}]" if f.cell else ""
            lines.append(f"error{where} {f.rule}: {f.message}")
        for f in self.warnings:
            where = f" [{f.cell}]" if f.cell else ""
            lines.append(f"warning{where} {f.rule}: {f.message}")
        if not lines:
            lines.append("ok: no findings")
        return "\n".join(lines)


def apply_defaults(plan: CellPlan, defaults: CellDefaults = CellDefaults()) -> CellPlan:
    """Fill every missing optional field of every cell.

    Mandatory fields (id, x, y) are never touched, and azimuth is never
    invented: a directional cell without one stays invalid and is caught
    by :func:`validate`. Idempotent.
    """
    filled = []
    for c in plan:
        small = c.small if c.small is not None else defaults.small
        directional = c.directional if c.directional is not None else not small
        updates: dict = {"small": small, "directional": directional}
        if c.power is None:
            updates["power"] = defaults.power_small if small else defaults.power_macro
        if c.height is None:
            updates["height"] = defaults.height_small if small else defaults.height_macro
        if c.path_loss_exp is None:
            updates["path_loss_exp"] = defaults.path_loss_exp
        if directional:
            if c.tilt is None:
                updates["tilt"] = defaults.tilt
            if c.beam_h is None:
                updates["beam_h"] = defaults.beam_h
            if c.beam_v is None:
                updates["beam_v"] = defaults.beam_v
        filled.append(replace(c, **updates))
    return CellPlan(tuple(filled))


def validate(plan: CellPlan, grid: Grid) -> ValidationReport:
    """Check every cell against the plan invariants.

    Returns a report of findings and never raises: errors block the
    pipeline (exit with the report), warnings do not. A cell outside the
    grid bounds is only a warning since its signal may still reach it.
    """
    report = ValidationReport()
    if len(plan) == 0:
        report.error(None, "empty-plan", "cell plan contains no cells")
        return report

    seen: set[str] = set()
    for c in plan:
        if c.id in seen:
            report.error(c.id, "unique-id", f"duplicate cell id {c.id!r}")
        seen.add(c.id)

        if not (math.isfinite(c.x) and math.isfinite(c.y)):
            report.error(c.id, "position-finite",
                         f"cell position ({c.x}, {c.y}) is not finite")

        for name in ("height", "power", "path_loss_exp", "directional", "small"):
            if getattr(c, name) is None:
                report.error(c.id, "missing-field", f"{name} is not set")

        if c.directional:
            if c.azimuth is None:
                report.error(c.id, "azimuth-required",
                             "directional cell has no azimuth")
            elif not 0.0 <= c.azimuth < 360.0:
                report.error(c.id, "azimuth-range",
                             f"azimuth {c.azimuth} outside [0, 360)")
            for name in ("tilt", "beam_h", "beam_v"):
                if getattr(c, name) is None:
                    report.error(c.id, "missing-field", f"{name} is not set")
            for name in ("beam_h", "beam_v"):
                width = getattr(c, name)
                if width is not None and not 0.0 < width < 180.0:
                    report.error(c.id, "beam-width-range",
                                 f"{name} {width} outside (0, 180)")

        if c.power is not None and c.power <= 0:
            report.error(c.id, "power-positive", f"power {c.power} W is not > 0")
        if c.path_loss_exp is not None and c.path_loss_exp <= 0:
            report.error(c.id, "path-loss-positive",
                         f"path loss exponent {c.path_loss_exp} is not > 0")
        if c.height is not None and c.height < 0:
            report.error(c.id, "height-nonnegative", f"height {c.height} m is negative")

        if not grid.contains_point(c.x, c.y):
            report.warn(c.id, "outside-grid",
                        f"cell at ({c.x}, {c.y}) lies outside the grid bounds")
    return report
