"""Batch command line: composes the library stages over one run config.

Every subcommand recomputes what it needs from the raw inputs, so chained
`run-all` output and individually invoked stages are identical. Artifacts
are written to a temp file and renamed, never left half-written.

Exit codes: 0 ok, 1 cell-plan validation errors, 2 missing/invalid
config, 3 internal invariant breach.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import io as dataio
from . import pipeline
from .bayes import ta_update
from .errors import CellLocError, ConfigError, InvariantError, ParseError
from .io import PROB_FORMAT
from .priors import MixtureWeights

log = logging.getLogger("cellloc")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_INVARIANT = 3

COMMANDS = ("validate", "strength", "best-server", "voronoi", "prior",
            "likelihood", "posterior", "ta", "run-all")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cellloc",
        description="Grid-based Bayesian location estimation from a cell plan.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument(
        "config", nargs="?",
        help="run config JSON (or set CELLLOC_CONFIG)",
    )
    parser.add_argument("--out", metavar="DIR", help="override output directory")
    parser.add_argument("--threads", type=int, default=0,
                        help="worker threads for field computation "
                             "(0 = all cores); never changes numeric output")
    parser.add_argument("--prior", dest="prior", choices=dataio.PRIOR_KINDS + ("all",),
                        help="override configured prior kind")
    parser.add_argument("--pi", help="override mixture weights, e.g. 0,0.5,0.5")
    parser.add_argument("--likelihood", choices=dataio.LIKELIHOOD_KINDS,
                        help="override configured likelihood kind")
    parser.add_argument("--cell", help="cell id for the ta command")
    parser.add_argument("--tau", type=int, help="Timing Advance value")
    parser.add_argument("--b", type=int, dest="merge",
                        help="annuli merged on each side of tau")
    parser.add_argument("--shift", type=float,
                        help="override seed shift (m) of the voronoi tessellation")
    return parser


class _Runner:
    """One CLI invocation: config plus lazily computed artifacts."""

    def __init__(self, config: dataio.RunConfig, threads: int):
        self.config = config
        self.threads = threads
        self.out_dir = Path(config.output_dir)
        self.dataset = pipeline.load_dataset(config)
        self._fields = None

    def fields(self):
        if self._fields is None:
            t0 = time.perf_counter()
            self._fields = pipeline.strength_and_dominance(
                self.dataset, threads=self.threads)
            log.info("strength/dominance fields: %d entries in %.3f s",
                     self._fields[1].nnz, time.perf_counter() - t0)
        return self._fields

    def write(self, name: str, text: str) -> None:
        path = self.out_dir / name
        dataio.atomic_write_text(path, text)
        log.info("wrote %s", path)

    # -- stages ------------------------------------------------------------

    def stage_validate(self) -> int:
        report = pipeline.validate_dataset(self.dataset)
        self.write("validation_report.txt", report.summary() + "\n")
        if not report.ok:
            print(report.summary(), file=sys.stderr)
            return EXIT_VALIDATION
        return EXIT_OK

    def stage_strength(self) -> int:
        strength, dom = self.fields()
        lines = ["cell_id,tile_id,strength_dbm,dominance"]
        for cell_id in strength.cell_ids:
            tiles, s_vals = strength.column(cell_id)
            _, d_vals = dom.column(cell_id)
            for t, s, d in zip(tiles.tolist(), s_vals.tolist(), d_vals.tolist()):
                lines.append(f"{cell_id},{t},{PROB_FORMAT.format(s)},"
                             f"{PROB_FORMAT.format(d)}")
        self.write("fields.csv", "\n".join(lines) + "\n")
        return EXIT_OK

    def _write_tessellation(self, name: str, tess) -> None:
        lines = ["tile_id,cell_id"]
        for t in range(tess.n_tiles):
            cell = tess.cell_of(t)
            if cell is not None:
                lines.append(f"{t},{cell}")
        self.write(f"{name}.csv", "\n".join(lines) + "\n")
        geo = dataio.tessellation_geojson(tess, self.dataset.grid)
        self.write(f"{name}.geojson", json.dumps(geo, sort_keys=True) + "\n")

    def stage_voronoi(self) -> int:
        tess = pipeline.make_tessellation(self.dataset, "voronoi")
        self._write_tessellation("voronoi", tess)
        return EXIT_OK

    def stage_best_server(self) -> int:
        strength, _ = self.fields()
        tess = pipeline.make_tessellation(self.dataset, "bestserver", strength)
        self._write_tessellation("best_server", tess)
        return EXIT_OK

    def _prior_kinds(self) -> list[str]:
        return self.config.prior_kinds()

    def _needs_dominance(self, kinds: list[str]) -> bool:
        return (self.config.likelihood == "strength"
                or any(k in ("network", "composite") for k in kinds))

    def stage_prior(self) -> int:
        kinds = self._prior_kinds()
        dom = self.fields()[1] if self._needs_dominance(kinds) else None
        for kind in kinds:
            dist = pipeline.make_prior(self.dataset, kind, dom)
            lines = ["tile_id,prob"]
            for t in np.flatnonzero(dist.probs > 0).tolist():
                lines.append(f"{t},{PROB_FORMAT.format(dist.probs[t])}")
            self.write(f"prior_{kind}.csv", "\n".join(lines) + "\n")
        return EXIT_OK

    def _likelihood(self):
        dom = self.fields()[1] if self.config.likelihood == "strength" else None
        return pipeline.make_likelihood(self.dataset, self.config.likelihood, dom)

    def stage_likelihood(self) -> int:
        llh = self._likelihood()
        lines = ["tile_id,cell_id,prob"]
        for cell_id, tile, value in sorted(llh.entries(),
                                           key=lambda e: (e[1], e[0])):
            lines.append(f"{tile},{cell_id},{PROB_FORMAT.format(value)}")
        self.write(f"likelihood_{self.config.likelihood}.csv",
                   "\n".join(lines) + "\n")
        return EXIT_OK

    def stage_posterior(self) -> int:
        kinds = self._prior_kinds()
        dom = self.fields()[1] if self._needs_dominance(kinds) else None
        llh = self._likelihood()
        for kind in kinds:
            prior = pipeline.make_prior(self.dataset, kind, dom)
            post = pipeline.make_posterior(prior, llh)
            for cell_id in post.empty_cells:
                log.warning("posterior (%s) for cell %s is empty", kind, cell_id)
            self.write(f"posterior_{kind}.csv",
                       dataio.format_output(dataio.posterior_rows(post)))
        return EXIT_OK

    def stage_ta(self) -> int:
        ta_cfg = self.config.ta
        if ta_cfg is None:
            raise ConfigError("the ta command requires a 'ta' config section "
                              "(or --cell/--tau overrides)")
        kinds = self._prior_kinds()
        kind = kinds[0] if len(kinds) == 1 else "composite"
        dom = self.fields()[1] if self._needs_dominance([kind]) else None
        prior = pipeline.make_prior(self.dataset, kind, dom)
        post = pipeline.make_posterior(prior, self._likelihood())
        cell = self.dataset.plan.by_id(ta_cfg.cell)
        spec = ta_cfg.spec()
        dist = ta_update(post, cell, spec, self.dataset.grid)
        if dist is None:
            log.warning("Timing Advance update for cell %s, tau=%d left no "
                        "probability mass", ta_cfg.cell, ta_cfg.tau)
            rows = []
        else:
            rows = dataio.ta_rows(ta_cfg.cell, spec, dist)
        self.write("posterior_ta.csv", dataio.format_output(rows))
        return EXIT_OK

    def stage_run_all(self) -> int:
        status = self.stage_validate()
        if status != EXIT_OK:
            return status
        for stage in (self.stage_strength, self.stage_voronoi,
                      self.stage_best_server, self.stage_prior,
                      self.stage_likelihood, self.stage_posterior):
            status = stage()
            if status != EXIT_OK:
                return status
        if self.config.ta is not None:
            return self.stage_ta()
        return EXIT_OK


def _apply_overrides(config: dataio.RunConfig, args) -> dataio.RunConfig:
    from dataclasses import replace

    updates: dict = {}
    if args.out:
        updates["output_dir"] = Path(args.out)
    if args.prior:
        updates["prior"] = args.prior
    if args.pi:
        parts = [float(p) for p in args.pi.split(",")]
        if len(parts) != 3:
            raise ConfigError("--pi needs three comma-separated weights")
        updates["pi"] = MixtureWeights(*parts)
    if args.likelihood:
        updates["likelihood"] = args.likelihood
    if args.shift is not None:
        updates["voronoi_shift"] = args.shift
    if args.cell or args.tau is not None or args.merge is not None:
        base = config.ta
        cell = args.cell or (base.cell if base else None)
        tau = args.tau if args.tau is not None else (base.tau if base else None)
        if cell is None or tau is None:
            raise ConfigError("--cell and --tau are both required when no "
                              "'ta' section is configured")
        merge = args.merge if args.merge is not None else (base.merge if base else 1)
        band = base.band_width if base else 78.12
        updates["ta"] = dataio.TAConfig(cell=cell, tau=tau, merge=merge,
                                        band_width=band)
        updates["ta"].spec()
    if updates:
        config = replace(config, **updates)
    return config


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)

    config_path = args.config or os.environ.get("CELLLOC_CONFIG")
    if not config_path:
        print("error: no config given (argument or CELLLOC_CONFIG)",
              file=sys.stderr)
        return EXIT_CONFIG

    t0 = time.perf_counter()
    try:
        config = dataio.load_config(config_path)
        config = _apply_overrides(config, args)
        runner = _Runner(config, args.threads)
        stage = {
            "validate": runner.stage_validate,
            "strength": runner.stage_strength,
            "best-server": runner.stage_best_server,
            "voronoi": runner.stage_voronoi,
            "prior": runner.stage_prior,
            "likelihood": runner.stage_likelihood,
            "posterior": runner.stage_posterior,
            "ta": runner.stage_ta,
            "run-all": runner.stage_run_all,
        }[args.command]
        status = stage()
    except (ConfigError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantError as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except CellLocError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    log.info("%s finished in %.3f s", args.command, time.perf_counter() - t0)
    return status


if __name__ == "__main__":
    sys.exit(main())
