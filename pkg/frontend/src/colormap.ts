import type { Rgb } from "./raster.js";

// viridis anchor colors, linearly interpolated
const STOPS: Rgb[] = [
  [68, 1, 84],
  [71, 44, 122],
  [59, 81, 139],
  [44, 113, 142],
  [33, 144, 141],
  [39, 173, 129],
  [92, 200, 99],
  [170, 220, 50],
  [253, 231, 37],
];

export function viridis(t: number): Rgb {
  const u = Math.min(1, Math.max(0, t)) * (STOPS.length - 1);
  const k = Math.min(STOPS.length - 2, Math.floor(u));
  const f = u - k;
  const a = STOPS[k];
  const b = STOPS[k + 1];
  return [
    Math.round(a[0] + f * (b[0] - a[0])),
    Math.round(a[1] + f * (b[1] - a[1])),
    Math.round(a[2] + f * (b[2] - a[2])),
  ];
}

/** Quantized variant used for the velocity-magnitude contour panels. */
export function viridisLevels(t: number, levels: number): Rgb {
  const q = Math.min(levels - 1, Math.floor(Math.min(1, Math.max(0, t)) * levels));
  return viridis(q / (levels - 1));
}
