// Maps a view state to the one service call it needs and feeds the
// result into the layer view. No values are computed client-side.

import { ApiClient, ServiceError } from "./api.js";
import { LayerView, type DisplayList } from "./render.js";
import type { ViewState } from "./state.js";
import type { CellInfo, GridMeta, TilePair } from "./types.js";

export interface LayerData {
  label: string;
  grid: GridMeta;
  kind: "values" | "tessellation";
  tiles: TilePair[];
  cellIds: string[];
  empty: boolean;
}

function needCell(state: ViewState): string {
  if (!state.selectedCell) {
    throw new Error(`layer '${state.layer}' needs a selected cell`);
  }
  return state.selectedCell;
}

export async function fetchLayer(api: ApiClient, state: ViewState): Promise<LayerData> {
  const pi = state.priorKind === "composite" ? state.pi : undefined;
  switch (state.layer) {
    case "strength":
    case "dominance": {
      const cell = needCell(state);
      const data = await api.field(state.layer, cell);
      return {
        label: `${state.layer} of ${cell}`,
        grid: data.grid, kind: "values", tiles: data.tiles,
        cellIds: [], empty: data.tiles.length === 0,
      };
    }
    case "prior": {
      const data = await api.prior(state.priorKind, pi);
      return {
        label: `${state.priorKind} prior`,
        grid: data.grid, kind: "values", tiles: data.tiles,
        cellIds: [], empty: data.tiles.length === 0,
      };
    }
    case "likelihood": {
      const cell = needCell(state);
      const data = await api.likelihood(state.likelihoodKind, cell);
      return {
        label: `${state.likelihoodKind} likelihood of ${cell}`,
        grid: data.grid, kind: "values", tiles: data.tiles,
        cellIds: [], empty: data.tiles.length === 0,
      };
    }
    case "posterior": {
      const cell = needCell(state);
      const data = await api.posterior(state.priorKind, state.likelihoodKind,
                                       cell, pi);
      return {
        label: `posterior of ${cell} (${state.priorKind} × ${state.likelihoodKind})`,
        grid: data.grid, kind: "values", tiles: data.tiles,
        cellIds: [], empty: data.empty === true,
      };
    }
    case "posterior_ta": {
      const cell = needCell(state);
      const data = await api.posteriorTa(state.priorKind, state.likelihoodKind,
                                         cell, state.tau, state.b, pi);
      return {
        label: `posterior of ${cell}, distance band ${state.tau}±${state.b}`,
        grid: data.grid, kind: "values", tiles: data.tiles,
        cellIds: [], empty: data.empty === true,
      };
    }
    case "tessellation": {
      const data = await api.tessellation(state.tessellationKind);
      return {
        label: `${state.tessellationKind} tessellation`,
        grid: data.grid, kind: "tessellation", tiles: data.tiles,
        cellIds: data.cells, empty: data.tiles.length === 0,
      };
    }
  }
}

export class LayerController {
  constructor(
    private readonly api: ApiClient,
    readonly view: LayerView,
    private cells: readonly CellInfo[],
    private readonly onError: (message: string) => void,
  ) {}

  setCells(cells: readonly CellInfo[]): void {
    this.cells = cells;
  }

  /**
   * Fetch whatever the state selects and commit it. Stale responses are
   * dropped via the view's request tokens; on failure the previous layer
   * stays visible, flagged stale.
   */
  async refresh(state: ViewState): Promise<DisplayList | null> {
    const token = this.view.beginRequest();
    try {
      const data = await fetchLayer(this.api, state);
      if (data.kind === "tessellation") {
        return this.view.commitTessellation(
          token, data.label, data.grid, data.cellIds, data.tiles,
          this.cells, state.selectedCell);
      }
      return this.view.commitValues(
        token, data.label, data.grid, data.tiles, this.cells,
        state.selectedCell, data.empty);
    } catch (err) {
      const message = err instanceof ServiceError
        ? `${err.endpoint}: ${JSON.stringify(err.payload)}`
        : String(err);
      this.view.markStale(message);
      this.onError(message);
      return this.view.current();
    }
  }
}
