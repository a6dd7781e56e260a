"""Read-compute HTTP JSON service behind the interactive explorer.

One process serves one dataset (grid + cell plan). Artifacts are cached
by a digest of every parameter that affects them; raw per-cell strength
survives logistic-curve changes since it only depends on the propagation
parameters. Responses for identical state and query are byte-identical.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import threading
from dataclasses import asdict, dataclass, replace

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import Response

from . import io as dataio
from . import pipeline
from .bayes import TA_MAX, ta_update
from .cells import Cell
from .errors import CellLocError, ConfigError, InvariantError
from .io import TAConfig
from .priors import MixtureWeights
from .propagation import DominanceParams, cell_strength, sparsify_strength


@dataclass(frozen=True)
class ServiceParams:
    """Session-adjustable model parameters."""

    s_mid: float
    s_steep: float
    min_dominance: float
    gamma_default: float

    def validate(self) -> None:
        if self.s_steep <= 0:
            raise ParamError("s_steep", f"must be > 0, got {self.s_steep}")
        if not 0.0 <= self.min_dominance < 1.0:
            raise ParamError("min_dominance",
                             f"must be in [0, 1), got {self.min_dominance}")
        if self.gamma_default <= 0:
            raise ParamError("gamma_default",
                             f"must be > 0, got {self.gamma_default}")

    def dominance(self) -> DominanceParams:
        return DominanceParams(s_mid=self.s_mid, s_steep=self.s_steep,
                               min_dominance=self.min_dominance)


class ParamError(ValueError):
    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class HttpError(Exception):
    def __init__(self, status: int, payload: dict):
        self.status = status
        self.payload = payload
        super().__init__(str(payload))


def _digest(*parts) -> str:
    return hashlib.sha256(repr(parts).encode()).hexdigest()[:16]


class SessionState:
    """Dataset plus parameter-keyed caches.

    Writers (parameter updates) and cache-filling computations serialize
    on one lock; completed artifacts are immutable so readers can share
    them freely.
    """

    def __init__(self, dataset: pipeline.Dataset):
        self.base_dataset = dataset
        cfg = dataset.config
        self.params = ServiceParams(
            s_mid=cfg.dominance.s_mid,
            s_steep=cfg.dominance.s_steep,
            min_dominance=cfg.dominance.min_dominance,
            gamma_default=cfg.cell_defaults.path_loss_exp,
        )
        self.dataset = self._reapply(self.params)
        self._lock = threading.RLock()
        self._raw_strength: tuple[str, dict[str, np.ndarray]] | None = None
        self._fields = None       # (key, (StrengthField, DominanceField))
        self._derived: dict = {}  # caches invalidated with the fields

    def _reapply(self, params: ServiceParams) -> pipeline.Dataset:
        defaults = replace(self.base_dataset.config.cell_defaults,
                           path_loss_exp=params.gamma_default)
        return self.base_dataset.replan(defaults)

    def _strength_key(self) -> str:
        return _digest("strength", self.params.gamma_default)

    def _fields_key(self) -> str:
        return _digest(self._strength_key(), self.params.s_mid,
                       self.params.s_steep, self.params.min_dominance)

    def raw_strength(self) -> dict[str, np.ndarray]:
        key = self._strength_key()
        with self._lock:
            if self._raw_strength is None or self._raw_strength[0] != key:
                cfg = self.base_dataset.config
                cells = sorted(self.dataset.plan.cells, key=lambda c: c.id)
                raw = {c.id: cell_strength(c, self.dataset.grid,
                                           cfg.max_pattern_loss_db)
                       for c in cells}
                self._raw_strength = (key, raw)
            return self._raw_strength[1]

    def fields(self):
        key = self._fields_key()
        with self._lock:
            if self._fields is None or self._fields[0] != key:
                pair = sparsify_strength(self.dataset.grid, self.raw_strength(),
                                         self.params.dominance())
                self._fields = (key, pair)
            return self._fields[1]

    def derived(self, name: str, key: tuple, compute):
        full_key = (name,) + key + (self._fields_key(),)
        with self._lock:
            if full_key not in self._derived:
                self._derived[full_key] = compute()
            return self._derived[full_key]

    def update_params(self, new: ServiceParams) -> dict:
        """Apply new parameters and invalidate exactly the stale caches.

        Returns which cached artifact families were retained/invalidated.
        Raw strength survives changes that only touch the logistic curve.
        """
        new.validate()
        with self._lock:
            if new == self.params:
                return {"retained": ["strength", "fields", "derived"],
                        "invalidated": []}
            gamma_changed = new.gamma_default != self.params.gamma_default
            self.params = new
            invalidated = ["fields", "derived"]
            retained = []
            self._fields = None
            self._derived = {}
            if gamma_changed:
                self._raw_strength = None
                self.dataset = self._reapply(new)
                invalidated.insert(0, "strength")
            else:
                retained.append("strength")
            return {"retained": retained, "invalidated": invalidated}


def _json_response(content, status_code: int = 200) -> Response:
    # json.dumps with sorted keys keeps responses byte-identical for
    # identical state and query.
    return Response(
        content=json.dumps(content, sort_keys=True, separators=(",", ":")),
        status_code=status_code,
        media_type="application/json",
    )


def _tile_pairs(tiles: np.ndarray, values: np.ndarray) -> list:
    return [[int(t), float(v)] for t, v in zip(tiles.tolist(), values.tolist())]


def _cell_info(c: Cell) -> dict:
    return {
        "id": c.id, "x": c.x, "y": c.y, "height": c.height,
        "directional": c.directional, "azimuth": c.azimuth, "tilt": c.tilt,
        "beam_h": c.beam_h, "beam_v": c.beam_v, "power": c.power,
        "path_loss_exp": c.path_loss_exp, "small": c.small,
    }


def create_app(config: dataio.RunConfig) -> FastAPI:
    dataset = pipeline.load_dataset(config)
    app = FastAPI(title="cellloc calibration service", docs_url="/docs")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )
    session = SessionState(dataset)
    app.state.session = session

    def grid_meta() -> dict:
        return session.dataset.grid.spec()

    def require_cell(cell_id: str | None) -> Cell:
        if not cell_id:
            raise HttpError(400, {"field": "cell", "error": "cell id required"})
        try:
            return session.dataset.plan.by_id(cell_id)
        except KeyError:
            raise HttpError(404, {"error": f"unknown cell id {cell_id!r}"}) from None

    def parse_pi(raw: str | None) -> MixtureWeights | None:
        if raw is None:
            return session.dataset.config.pi
        try:
            parts = [float(p) for p in raw.split(",")]
            if len(parts) != 3:
                raise ValueError("need three comma-separated weights")
            return MixtureWeights(*parts)
        except ValueError as exc:
            raise HttpError(400, {"field": "pi", "error": str(exc)}) from None

    def prior_dist(kind: str, pi: MixtureWeights | None):
        if kind not in dataio.PRIOR_KINDS:
            raise HttpError(400, {"field": "prior",
                                  "error": f"unknown prior kind {kind!r}"})
        pi_key = (pi.uniform, pi.landuse, pi.network) if pi else None
        dom = session.fields()[1] if kind in ("network", "composite") else None

        def compute():
            try:
                return pipeline.make_prior(session.dataset, kind, dom, pi)
            except (ConfigError, CellLocError) as exc:
                raise HttpError(400, {"field": "prior", "error": str(exc)}) from None

        return session.derived("prior", (kind, pi_key), compute)

    def likelihood_field(kind: str):
        if kind not in dataio.LIKELIHOOD_KINDS:
            raise HttpError(400, {"field": "likelihood",
                                  "error": f"unknown likelihood kind {kind!r}"})
        dom = session.fields()[1] if kind == "strength" else None

        def compute():
            try:
                return pipeline.make_likelihood(session.dataset, kind, dom)
            except (ValueError, CellLocError) as exc:
                raise HttpError(400, {"field": "likelihood",
                                      "error": str(exc)}) from None

        return session.derived("likelihood", (kind,), compute)

    def posterior_for(prior_kind: str, likelihood_kind: str,
                      pi: MixtureWeights | None):
        prior = prior_dist(prior_kind, pi)
        llh = likelihood_field(likelihood_kind)
        pi_key = (pi.uniform, pi.landuse, pi.network) if pi else None
        return session.derived(
            "posterior", (prior_kind, likelihood_kind, pi_key),
            lambda: pipeline.make_posterior(prior, llh))

    @app.exception_handler(HttpError)
    async def _http_error(_req: Request, exc: HttpError):
        return _json_response(exc.payload, exc.status)

    @app.exception_handler(InvariantError)
    async def _invariant_error(_req: Request, exc: InvariantError):
        return _json_response({"invariant": exc.invariant, "error": str(exc)}, 500)

    @app.get("/cells")
    def cells():
        plan = sorted(session.dataset.plan.cells, key=lambda c: c.id)
        return _json_response({
            "grid": grid_meta(),
            "cells": [_cell_info(c) for c in plan],
        })

    @app.get("/params")
    def get_params():
        return _json_response({"params": asdict(session.params)})

    @app.post("/params")
    async def post_params(request: Request):
        body = await request.json()
        if not isinstance(body, dict):
            raise HttpError(400, {"error": "params body must be an object"})
        allowed = {"s_mid", "s_steep", "min_dominance", "gamma_default"}
        unknown = set(body) - allowed
        if unknown:
            raise HttpError(400, {"field": sorted(unknown)[0],
                                  "error": "unknown parameter"})
        try:
            merged = replace(session.params,
                             **{k: float(v) for k, v in body.items()})
            result = session.update_params(merged)
        except ParamError as exc:
            raise HttpError(400, {"field": exc.field, "error": exc.message}) from None
        except (TypeError, ValueError) as exc:
            raise HttpError(400, {"error": f"invalid params: {exc}"}) from None
        return _json_response({"params": asdict(session.params), **result})

    @app.get("/tessellation")
    def tessellation(kind: str = "voronoi"):
        if kind not in ("voronoi", "bestserver"):
            raise HttpError(400, {"field": "kind",
                                  "error": f"unknown tessellation kind {kind!r}"})
        strength = session.fields()[0] if kind == "bestserver" else None

        def compute():
            try:
                return pipeline.make_tessellation(session.dataset, kind, strength)
            except ValueError as exc:
                raise HttpError(400, {"field": "kind", "error": str(exc)}) from None

        tess = session.derived("tessellation", (kind,), compute)
        assigned = np.flatnonzero(tess.assignment >= 0)
        return _json_response({
            "grid": grid_meta(),
            "kind": kind,
            "cells": list(tess.cell_ids),
            "tiles": [[int(t), int(tess.assignment[t])] for t in assigned.tolist()],
        })

    @app.get("/field")
    def field(kind: str = "dominance", cell: str | None = None):
        if kind not in ("strength", "dominance"):
            raise HttpError(400, {"field": "kind",
                                  "error": f"unknown field kind {kind!r}"})
        c = require_cell(cell)
        fields = session.fields()
        f = fields[0] if kind == "strength" else fields[1]
        if c.id in f:
            tiles, values = f.column(c.id)
        else:
            tiles = values = np.empty(0)
        return _json_response({
            "grid": grid_meta(),
            "kind": kind,
            "cell": c.id,
            "tiles": _tile_pairs(tiles, values),
        })

    @app.get("/prior")
    def prior(kind: str = "uniform", pi: str | None = None):
        dist = prior_dist(kind, parse_pi(pi))
        tiles = np.flatnonzero(dist.probs > 0)
        return _json_response({
            "grid": grid_meta(),
            "kind": kind,
            "tiles": _tile_pairs(tiles, dist.probs[tiles]),
        })

    @app.get("/likelihood")
    def likelihood(kind: str = "strength", cell: str | None = None):
        c = require_cell(cell)
        llh = likelihood_field(kind)
        if c.id in llh:
            tiles, values = llh.column(c.id)
        else:
            tiles = values = np.empty(0)
        return _json_response({
            "grid": grid_meta(),
            "kind": kind,
            "cell": c.id,
            "tiles": _tile_pairs(tiles, values),
        })

    @app.get("/posterior")
    def posterior(prior: str = "uniform", likelihood: str = "strength",
                  cell: str | None = None, pi: str | None = None):
        c = require_cell(cell)
        post = posterior_for(prior, likelihood, parse_pi(pi))
        if c.id in post.empty_cells or c.id not in post.cell_ids:
            return _json_response({
                "grid": grid_meta(), "cell": c.id, "empty": True, "tiles": [],
            })
        tiles, probs = post.column(c.id)
        return _json_response({
            "grid": grid_meta(),
            "cell": c.id,
            "empty": False,
            "tiles": _tile_pairs(tiles, probs),
        })

    @app.get("/posterior_ta")
    def posterior_ta(prior: str = "uniform", likelihood: str = "strength",
                     cell: str | None = None, tau: int = 0, b: int = 1,
                     pi: str | None = None):
        c = require_cell(cell)
        if not 0 <= tau <= TA_MAX:
            raise HttpError(400, {"field": "tau",
                                  "error": f"tau must be in [0, {TA_MAX}]"})
        if b < 0:
            raise HttpError(400, {"field": "b", "error": "b must be >= 0"})
        ta_cfg = session.dataset.config.ta
        band = ta_cfg.band_width if ta_cfg else 78.12
        post = posterior_for(prior, likelihood, parse_pi(pi))
        if c.id in post.empty_cells or c.id not in post.cell_ids:
            return _json_response({
                "grid": grid_meta(), "cell": c.id, "tau": tau, "b": b,
                "empty": True, "tiles": [],
            })
        spec = TAConfig(cell=c.id, tau=tau, merge=b, band_width=band).spec()
        dist = ta_update(post, c, spec, session.dataset.grid)
        if dist is None:
            return _json_response({
                "grid": grid_meta(), "cell": c.id, "tau": tau, "b": b,
                "empty": True, "tiles": [],
            })
        tiles = np.flatnonzero(dist.probs > 0)
        return _json_response({
            "grid": grid_meta(), "cell": c.id, "tau": tau, "b": b,
            "empty": False,
            "tiles": _tile_pairs(tiles, dist.probs[tiles]),
        })

    return app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cellloc-serve",
        description="Serve the interactive calibration API for one dataset.",
    )
    parser.add_argument("config", help="run config JSON")
    parser.add_argument("--listen", default="127.0.0.1:8757",
                        metavar="HOST:PORT")
    args = parser.parse_args(argv)

    import uvicorn

    host, _, port = args.listen.rpartition(":")
    app = create_app(dataio.load_config(args.config))
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
