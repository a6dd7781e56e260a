// Payload shapes of the calibration service (see docs/api.md in the
// repository root). The explorer renders these values untouched.

export interface GridMeta {
  origin_x: number;
  origin_y: number;
  tile_size: number;
  n_cols: number;
  n_rows: number;
}

export interface CellInfo {
  id: string;
  x: number;
  y: number;
  height: number | null;
  directional: boolean | null;
  azimuth: number | null;
  tilt: number | null;
  beam_h: number | null;
  beam_v: number | null;
  power: number | null;
  path_loss_exp: number | null;
  small: boolean | null;
}

export interface CellsPayload {
  grid: GridMeta;
  cells: CellInfo[];
}

/** [tile id, value]; tiles absent from the list carry value 0. */
export type TilePair = [number, number];

export interface TilesPayload {
  grid: GridMeta;
  tiles: TilePair[];
  cell?: string;
  kind?: string;
  tau?: number;
  b?: number;
  empty?: boolean;
}

export interface TessellationPayload {
  grid: GridMeta;
  kind: string;
  cells: string[];
  /** [tile id, index into cells] */
  tiles: [number, number][];
}

export interface SessionParams {
  s_mid: number;
  s_steep: number;
  min_dominance: number;
  gamma_default: number;
}

export interface ParamsPayload {
  params: SessionParams;
  retained?: string[];
  invalidated?: string[];
}
