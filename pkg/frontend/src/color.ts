// Sequential color ramp for value layers (low -> yellow, high -> dark)
// and a categorical palette for tessellations.

import type { TilePair } from "./types.js";

const RAMP = [
  "#ffffcc", "#c7e9b4", "#7fcdbb", "#41b6c4",
  "#1d91c0", "#225ea8", "#0c2c84",
];

function hexToRgb(hex: string): [number, number, number] {
  return [
    parseInt(hex.slice(1, 3), 16),
    parseInt(hex.slice(3, 5), 16),
    parseInt(hex.slice(5, 7), 16),
  ];
}

function mix(a: string, b: string, t: number): string {
  const ra = hexToRgb(a);
  const rb = hexToRgb(b);
  const c = ra.map((v, i) => Math.round(v + (rb[i]! - v) * t));
  return `rgb(${c[0]},${c[1]},${c[2]})`;
}

export interface ColorScale {
  min: number;
  max: number;
  color(value: number): string;
}

export function makeScale(min: number, max: number): ColorScale {
  return {
    min,
    max,
    color(value: number): string {
      if (max <= min) return mix(RAMP[RAMP.length - 1]!, RAMP[RAMP.length - 1]!, 0);
      let t = (value - min) / (max - min);
      t = Math.min(1, Math.max(0, t));
      const scaled = t * (RAMP.length - 1);
      const idx = Math.min(RAMP.length - 2, Math.floor(scaled));
      return mix(RAMP[idx]!, RAMP[idx + 1]!, scaled - idx);
    },
  };
}

export function valueBounds(tiles: readonly TilePair[]): { min: number; max: number } {
  if (tiles.length === 0) return { min: 0, max: 1 };
  let min = Infinity;
  let max = -Infinity;
  for (const [, v] of tiles) {
    if (v < min) min = v;
    if (v > max) max = v;
  }
  return { min, max };
}

export interface LegendEntry {
  value: number;
  color: string;
}

export function legendEntries(scale: ColorScale, steps = 5): LegendEntry[] {
  const out: LegendEntry[] = [];
  for (let i = 0; i <= steps; i++) {
    const value = scale.min + ((scale.max - scale.min) * i) / steps;
    out.push({ value, color: scale.color(value) });
  }
  return out;
}

const CATEGORICAL_SATURATION = 62;
const CATEGORICAL_LIGHTNESS = 62;

/** Stable per-index hue for tessellation regions. */
export function categoricalColor(index: number): string {
  const hue = (index * 137.508) % 360; // golden-angle spacing
  return `hsl(${hue.toFixed(1)},${CATEGORICAL_SATURATION}%,${CATEGORICAL_LIGHTNESS}%)`;
}
