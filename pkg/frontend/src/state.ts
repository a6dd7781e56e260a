// View state plus the client-side mirrors of server constraints. The
// mirrors only exist to give instant feedback; the service re-validates
// everything.

import type { SessionParams } from "./types.js";

export const TA_MAX = 1282;

export type LayerKind =
  | "strength"
  | "dominance"
  | "prior"
  | "likelihood"
  | "posterior"
  | "posterior_ta"
  | "tessellation";

export const LAYERS: readonly LayerKind[] = [
  "strength", "dominance", "prior", "likelihood", "posterior",
  "posterior_ta", "tessellation",
];

export type PriorKind = "uniform" | "landuse" | "network" | "composite";
export type LikelihoodKind = "strength" | "voronoi";
export type TessellationKind = "voronoi" | "bestserver";

/** Mixture weights (uniform, land use, network); kept on the simplex. */
export type Simplex = [number, number, number];

export interface ViewState {
  layer: LayerKind;
  selectedCell: string | null;
  priorKind: PriorKind;
  pi: Simplex;
  likelihoodKind: LikelihoodKind;
  tessellationKind: TessellationKind;
  tau: number;
  b: number;
}

export function defaultViewState(): ViewState {
  return {
    layer: "dominance",
    selectedCell: null,
    priorKind: "composite",
    pi: [0, 0.5, 0.5],
    likelihoodKind: "strength",
    tessellationKind: "voronoi",
    tau: 0,
    b: 1,
  };
}

/**
 * Move one mixture weight and renormalize the rest so the vector stays
 * on the simplex: the changed weight is clamped to [0, 1], the other two
 * share the remainder in their previous proportion (equally when both
 * were zero).
 */
export function normalizeSimplex(pi: Simplex, changed: number, value: number): Simplex {
  const next: Simplex = [...pi] as Simplex;
  const clamped = Math.min(1, Math.max(0, value));
  next[changed] = clamped;
  const others = [0, 1, 2].filter((i) => i !== changed) as [number, number];
  const rest = 1 - clamped;
  const otherSum = next[others[0]]! + next[others[1]]!;
  if (otherSum > 0) {
    next[others[0]] = (next[others[0]]! / otherSum) * rest;
    next[others[1]] = (next[others[1]]! / otherSum) * rest;
  } else {
    next[others[0]] = rest / 2;
    next[others[1]] = rest / 2;
  }
  return next;
}

export function simplexSum(pi: Simplex): number {
  return pi[0] + pi[1] + pi[2];
}

export function clampTau(value: number): number {
  if (!Number.isFinite(value)) return 0;
  return Math.min(TA_MAX, Math.max(0, Math.round(value)));
}

export function clampMerge(value: number): number {
  if (!Number.isFinite(value)) return 0;
  return Math.max(0, Math.round(value));
}

/**
 * Mirror of the service-side parameter invariants. Returns the name of
 * the offending field and a message, or null when acceptable.
 */
export function validateParams(
  params: Partial<SessionParams>,
): { field: string; message: string } | null {
  if (params.s_steep !== undefined && !(params.s_steep > 0)) {
    return { field: "s_steep", message: "steepness must be > 0" };
  }
  if (params.min_dominance !== undefined
      && !(params.min_dominance >= 0 && params.min_dominance < 1)) {
    return { field: "min_dominance", message: "cutoff must be in [0, 1)" };
  }
  if (params.gamma_default !== undefined && !(params.gamma_default > 0)) {
    return { field: "gamma_default", message: "path loss exponent must be > 0" };
  }
  return null;
}
