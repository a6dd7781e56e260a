// Layer rendering as data: the view computes a display list (tile
// rectangles, cell markers, legend) that a canvas painter draws. Keeping
// the list inspectable makes the thin-client property testable — every
// rendered value is held verbatim in `lastValues`.

import {
  categoricalColor,
  legendEntries,
  makeScale,
  valueBounds,
  type LegendEntry,
} from "./color.js";
import type { CellInfo, GridMeta, TilePair } from "./types.js";

export interface TileRect {
  tile: number;
  x: number;
  y: number;
  w: number;
  h: number;
  color: string;
  value: number;
}

export interface CellMarker {
  id: string;
  x: number;
  y: number;
  selected: boolean;
  small: boolean;
  /** Screen-space azimuth arrow end, for selected directional cells. */
  arrow: [number, number] | null;
}

export interface DisplayList {
  label: string;
  rects: TileRect[];
  markers: CellMarker[];
  legend: LegendEntry[];
  empty: boolean;
  stale: boolean;
  staleReason: string | null;
}

const ARROW_LENGTH_PX = 26;

/** Fits the grid bounding box into a view, north up, preserving aspect. */
export class GridTransform {
  readonly scale: number;
  readonly offsetX: number;
  readonly offsetY: number;

  constructor(
    public readonly grid: GridMeta,
    public readonly viewWidth: number,
    public readonly viewHeight: number,
    margin = 10,
  ) {
    const worldW = grid.n_cols * grid.tile_size;
    const worldH = grid.n_rows * grid.tile_size;
    this.scale = Math.min(
      (viewWidth - 2 * margin) / worldW,
      (viewHeight - 2 * margin) / worldH,
    );
    this.offsetX = (viewWidth - worldW * this.scale) / 2;
    this.offsetY = (viewHeight - worldH * this.scale) / 2;
  }

  toScreen(x: number, y: number): [number, number] {
    const sx = this.offsetX + (x - this.grid.origin_x) * this.scale;
    // y grows north in world space, south on screen
    const sy = this.viewHeight - this.offsetY
      - (y - this.grid.origin_y) * this.scale;
    return [sx, sy];
  }

  tileRect(tile: number): { x: number; y: number; w: number; h: number } {
    const col = tile % this.grid.n_cols;
    const row = Math.floor(tile / this.grid.n_cols);
    const x0 = this.grid.origin_x + col * this.grid.tile_size;
    const y0 = this.grid.origin_y + (row + 1) * this.grid.tile_size;
    const [sx, sy] = this.toScreen(x0, y0);
    const side = this.grid.tile_size * this.scale;
    return { x: sx, y: sy, w: side, h: side };
  }
}

function markers(
  transform: GridTransform,
  cells: readonly CellInfo[],
  selectedCell: string | null,
): CellMarker[] {
  return cells.map((c) => {
    const [sx, sy] = transform.toScreen(c.x, c.y);
    const selected = c.id === selectedCell;
    let arrow: [number, number] | null = null;
    if (selected && c.directional && c.azimuth !== null) {
      const rad = (c.azimuth * Math.PI) / 180;
      // azimuth is clockwise from north; screen y points down
      arrow = [
        sx + ARROW_LENGTH_PX * Math.sin(rad),
        sy - ARROW_LENGTH_PX * Math.cos(rad),
      ];
    }
    return {
      id: c.id, x: sx, y: sy, selected,
      small: c.small === true, arrow,
    };
  });
}

/**
 * One map layer. Requests are sequenced: a commit carrying a superseded
 * token is dropped so a slow response can never overwrite a newer one.
 */
export class LayerView {
  private seq = 0;
  private committed = 0;
  private display: DisplayList | null = null;

  /** tile id -> value exactly as received from the service. */
  lastValues: Map<number, number> = new Map();

  constructor(
    public readonly viewWidth: number,
    public readonly viewHeight: number,
  ) {}

  beginRequest(): number {
    return ++this.seq;
  }

  current(): DisplayList | null {
    return this.display;
  }

  /** Keep what is on screen but flag it stale (service unreachable). */
  markStale(reason: string): void {
    if (this.display) {
      this.display = { ...this.display, stale: true, staleReason: reason };
    }
  }

  commitValues(
    token: number,
    label: string,
    grid: GridMeta,
    tiles: readonly TilePair[],
    cells: readonly CellInfo[],
    selectedCell: string | null,
    empty = false,
  ): DisplayList | null {
    if (token < this.committed || token > this.seq) return null;
    this.committed = token;
    const transform = new GridTransform(grid, this.viewWidth, this.viewHeight);
    const bounds = valueBounds(tiles);
    const scale = makeScale(bounds.min, bounds.max);
    this.lastValues = new Map(tiles.map(([t, v]) => [t, v]));
    const rects = tiles.map(([t, v]) => ({
      tile: t, ...transform.tileRect(t), color: scale.color(v), value: v,
    }));
    this.display = {
      label,
      rects,
      markers: markers(transform, cells, selectedCell),
      legend: legendEntries(scale),
      empty,
      stale: false,
      staleReason: null,
    };
    return this.display;
  }

  commitTessellation(
    token: number,
    label: string,
    grid: GridMeta,
    cellIds: readonly string[],
    tiles: readonly [number, number][],
    cells: readonly CellInfo[],
    selectedCell: string | null,
  ): DisplayList | null {
    if (token < this.committed || token > this.seq) return null;
    this.committed = token;
    const transform = new GridTransform(grid, this.viewWidth, this.viewHeight);
    this.lastValues = new Map(tiles.map(([t, i]) => [t, i]));
    const rects = tiles.map(([t, i]) => ({
      tile: t, ...transform.tileRect(t), color: categoricalColor(i), value: i,
    }));
    this.display = {
      label,
      rects,
      markers: markers(transform, cells, selectedCell),
      legend: cellIds.map((_, i) => ({ value: i, color: categoricalColor(i) })),
      empty: tiles.length === 0,
      stale: false,
      staleReason: null,
    };
    return this.display;
  }
}
