// Explorer parity acceptance: with the network intercepted, every value
// the posterior layer renders must equal the corresponding service
// value, and the mixture sliders must reproduce the reference composite
// prior. The payloads in fixtures/island.json were captured verbatim
// from the calibration service running on the bundled island dataset.

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { LayerController } from "../src/layers.js";
import { LayerView } from "../src/render.js";
import { defaultViewState, normalizeSimplex } from "../src/state.js";
import type { CellsPayload, TilePair, TilesPayload } from "../src/types.js";
import { fakeService, requestsTo } from "./helpers.js";

const FIXTURE = JSON.parse(readFileSync(
  join(dirname(fileURLToPath(import.meta.url)), "fixtures", "island.json"),
  "utf-8",
)) as Record<string, unknown>;

const cellsPayload = FIXTURE.cells as CellsPayload;

function interceptedController() {
  const service = fakeService({
    "/cells": FIXTURE.cells,
    "/params": FIXTURE.params,
    "/prior": FIXTURE.prior_composite,
    "/tessellation": FIXTURE.tessellation_voronoi,
    "/field": FIXTURE.field_dominance_a1,
    "/likelihood": FIXTURE.likelihood_a2,
    "/posterior_ta": FIXTURE.posterior_ta_a1,
  });
  service.routes.set("/posterior", (req) =>
    req.query.get("cell") === "a1" ? FIXTURE.posterior_a1 : FIXTURE.posterior_a2);
  const view = new LayerView(620, 420);
  const errors: string[] = [];
  const controller = new LayerController(
    new ApiClient("", service.fetch), view, cellsPayload.cells,
    (m) => errors.push(m));
  return { service, view, controller, errors };
}

describe("explorer parity with the service", () => {
  it("renders the posterior layer values exactly as served (a2)", async () => {
    const { view, controller, errors } = interceptedController();
    const state = defaultViewState();
    state.layer = "posterior";
    state.selectedCell = "a2";
    const display = await controller.refresh(state);
    expect(errors).toEqual([]);
    expect(display).not.toBeNull();

    const served = (FIXTURE.posterior_a2 as TilesPayload).tiles;
    expect(view.lastValues.size).toBe(served.length);
    for (const [tile, value] of served) {
      expect(view.lastValues.get(tile)).toBe(value); // exact, not approximate
    }
    // the reference distribution: tiles (g1, g2, g3) -> (0, 5/7, 2/7)
    expect(view.lastValues.has(0)).toBe(false);
    expect(view.lastValues.get(1)).toBe(5 / 7);
    expect(view.lastValues.get(2)).toBe(2 / 7);
  });

  it("renders the posterior layer values exactly as served (a1)", async () => {
    const { view, controller } = interceptedController();
    const state = defaultViewState();
    state.layer = "posterior";
    state.selectedCell = "a1";
    await controller.refresh(state);
    const served = (FIXTURE.posterior_a1 as TilesPayload).tiles;
    for (const [tile, value] of served) {
      expect(view.lastValues.get(tile)).toBe(value);
    }
    expect(view.lastValues.get(0)).toBe(4 / 9);
    expect(view.lastValues.get(1)).toBe(5 / 9);
  });

  it("posts slider weights (0, 0.5, 0.5) and renders the composite prior", async () => {
    const { service, view, controller } = interceptedController();
    const state = defaultViewState();
    state.layer = "prior";
    state.priorKind = "composite";
    // drag the uniform slider to zero: the rest renormalizes to (0.5, 0.5)
    state.pi = normalizeSimplex([1 / 3, 1 / 3, 1 / 3], 0, 0);
    await controller.refresh(state);

    const [req] = requestsTo(service, "/prior");
    expect(req!.query.get("pi")).toBe("0,0.5,0.5");

    const served = (FIXTURE.prior_composite as TilesPayload).tiles;
    for (const [tile, value] of served) {
      expect(view.lastValues.get(tile)).toBe(value);
    }
    expect(view.lastValues.get(0)).toBe(1 / 4);
    expect(view.lastValues.get(1)).toBe(5 / 8);
    expect(view.lastValues.get(2)).toBe(1 / 8);
  });

  it("renders the tessellation exactly as served", async () => {
    const { view, controller } = interceptedController();
    const state = defaultViewState();
    state.layer = "tessellation";
    await controller.refresh(state);
    const served = FIXTURE.tessellation_voronoi as {
      cells: string[]; tiles: [number, number][];
    };
    for (const [tile, cellIndex] of served.tiles) {
      expect(view.lastValues.get(tile)).toBe(cellIndex);
    }
    expect(served.cells[view.lastValues.get(0)!]).toBe("a1");
    expect(served.cells[view.lastValues.get(2)!]).toBe("a2");
  });

  it("renders the distance-band posterior exactly as served", async () => {
    const { view, controller } = interceptedController();
    const state = defaultViewState();
    state.layer = "posterior_ta";
    state.selectedCell = "a1";
    state.tau = 19;
    await controller.refresh(state);
    const served = (FIXTURE.posterior_ta_a1 as TilesPayload).tiles;
    expect([...view.lastValues.entries()]).toEqual(served);
    expect(view.lastValues.get(1)).toBe(1);
  });

  it("keeps the stale layer visible when the service starts failing", async () => {
    const { service, view, controller, errors } = interceptedController();
    const state = defaultViewState();
    state.layer = "posterior";
    state.selectedCell = "a2";
    await controller.refresh(state);
    service.failWith("/posterior", 500,
                     { invariant: "normalization", error: "boom" });
    const display = await controller.refresh(state);
    expect(errors.length).toBe(1);
    expect(display!.stale).toBe(true);
    expect(view.lastValues.get(1)).toBe(5 / 7); // old values still shown
  });
});
