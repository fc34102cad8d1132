import * as fs from "node:fs";

import { viridis, viridisLevels } from "./colormap.js";
import type { DiagnosticsTable, SnapshotTable } from "./csv.js";
import { encodePng } from "./png.js";
import { BLACK, Canvas, GREY, WHITE, fmtNum } from "./raster.js";

export const HEATMAP_FIELDS = ["n", "T", "p"];

const L = 56; // margins around the field block
const R = 74;
const TOP = 20;
const BOT = 28;

function cellSize(nx: number, ny: number): number {
  return Math.min(16, Math.max(2, Math.floor(320 / Math.max(nx, ny))));
}

function minMax(a: Float64Array): [number, number] {
  let lo = Infinity;
  let hi = -Infinity;
  for (const v of a) {
    if (v < lo) lo = v;
    if (v > hi) hi = v;
  }
  return [lo, hi];
}

function drawAxes(cv: Canvas, x0: number, y0: number, w: number, h: number,
                  xlo: number, xhi: number, ylo: number, yhi: number): void {
  cv.line(x0, y0 + h, x0 + w, y0 + h, BLACK);
  cv.line(x0, y0, x0, y0 + h, BLACK);
  for (const f of [0, 0.5, 1]) {
    const px = Math.round(x0 + f * w);
    cv.line(px, y0 + h, px, y0 + h + 3, BLACK);
    const label = fmtNum(xlo + f * (xhi - xlo));
    cv.text(px - cv.textWidth(label) / 2, y0 + h + 6, label);
    const py = Math.round(y0 + h - f * h);
    cv.line(x0 - 3, py, x0, py, BLACK);
    const ylab = fmtNum(ylo + f * (yhi - ylo));
    cv.text(x0 - 5 - cv.textWidth(ylab), py - 3, ylab);
  }
}

function title(snap: SnapshotTable, prefix: string, time?: number): string {
  const t = time !== undefined ? `  T=${fmtNum(time)}S` : "";
  return `${prefix}  STEP ${snap.step}${t}`;
}

export function renderHeatmap(snap: SnapshotTable, field: string,
                              outPath: string, time?: number): void {
  const data = snap.fields.get(field);
  if (!data || !HEATMAP_FIELDS.includes(field)) {
    throw new Error(`unknown heatmap field: ${field}`);
  }
  const cs = cellSize(snap.nx, snap.ny);
  const W = L + snap.nx * cs + R;
  const H = TOP + snap.ny * cs + BOT;
  const cv = new Canvas(W, H);
  const [lo, hi] = minMax(data);
  const span = hi - lo;
  for (let i = 0; i < snap.nx; i++) {
    for (let j = 0; j < snap.ny; j++) {
      const t = span > 0 ? (data[i * snap.ny + j] - lo) / span : 0.5;
      cv.fillRect(L + i * cs, TOP + (snap.ny - 1 - j) * cs, cs, cs, viridis(t));
    }
  }
  const dx = snap.x[1] - snap.x[0];
  const dy = snap.y[1] - snap.y[0];
  drawAxes(cv, L, TOP, snap.nx * cs, snap.ny * cs,
           snap.x[0] - dx / 2, snap.x[snap.nx - 1] + dx / 2,
           snap.y[0] - dy / 2, snap.y[snap.ny - 1] + dy / 2);
  // colorbar
  const bx = L + snap.nx * cs + 10;
  const bh = snap.ny * cs;
  for (let k = 0; k < bh; k++) {
    const t = span > 0 ? 1 - k / (bh - 1) : 0.5;
    cv.fillRect(bx, TOP + k, 12, 1, viridis(t));
  }
  cv.text(bx + 16, TOP - 2, fmtNum(hi));
  cv.text(bx + 16, TOP + bh - 6, fmtNum(lo));
  cv.text(L, 6, title(snap, field, time));
  fs.writeFileSync(outPath, encodePng(W, H, cv.pixels));
}

export function renderQuiver(snap: SnapshotTable, outPath: string,
                             sharedMax: number, time?: number): void {
  const ux = snap.fields.get("ux")!;
  const uy = snap.fields.get("uy")!;
  const cs = cellSize(snap.nx, snap.ny);
  const pw = snap.nx * cs;
  const ph = snap.ny * cs;
  const gap = 26;
  const W = L + 3 * pw + 2 * gap + R;
  const H = TOP + ph + BOT;
  const cv = new Canvas(W, H);

  let localMax = 0;
  for (let k = 0; k < ux.length; k++) {
    localMax = Math.max(localMax, Math.hypot(ux[k], uy[k]));
  }
  const scale = sharedMax > 0 ? (1.4 * cs) / sharedMax : 0;

  // panel 1: arrows
  for (let i = 0; i < snap.nx; i++) {
    for (let j = 0; j < snap.ny; j++) {
      const k = i * snap.ny + j;
      const cx = L + i * cs + cs / 2;
      const cy = TOP + (snap.ny - 1 - j) * cs + cs / 2;
      const vx = ux[k] * scale;
      const vy = -uy[k] * scale;
      if (Math.abs(vx) < 0.5 && Math.abs(vy) < 0.5) {
        cv.set(Math.round(cx), Math.round(cy), GREY);
      } else {
        cv.arrow(cx - vx / 2, cy - vy / 2, cx + vx / 2, cy + vy / 2, BLACK);
      }
    }
  }
  // panels 2, 3: |ux| and |uy| level fills
  for (const [p, comp] of [[1, ux], [2, uy]] as const) {
    const x0 = L + p * (pw + gap);
    let hi = 0;
    for (const v of comp) hi = Math.max(hi, Math.abs(v));
    for (let i = 0; i < snap.nx; i++) {
      for (let j = 0; j < snap.ny; j++) {
        const t = hi > 0 ? Math.abs(comp[i * snap.ny + j]) / hi : 0;
        cv.fillRect(x0 + i * cs, TOP + (snap.ny - 1 - j) * cs, cs, cs,
                    viridisLevels(t, 10));
      }
    }
    cv.text(x0, TOP + ph + 6, p === 1 ? "|UX| LEVELS" : "|UY| LEVELS");
  }
  cv.text(L, 6, title(snap, `FLOW  MAX|U|=${fmtNum(localMax)}`, time));
  cv.text(L, TOP + ph + 6, "QUIVER (SHARED SCALE)");
  fs.writeFileSync(outPath, encodePng(W, H, cv.pixels));
}

export interface TimeseriesResult {
  column: string;
  outPath: string;
  annotation?: { maxStepRelDelta: number };
}

export function renderTimeseries(diag: DiagnosticsTable, column: string,
                                 outPath: string): TimeseriesResult {
  const col = diag.columns.get(column);
  const steps = diag.columns.get("step");
  if (!col || !steps) {
    throw new Error(`unknown diagnostics column: ${column}`);
  }
  const logScale = column === "first_law_residual";
  let values = Float64Array.from(col);
  if (logScale) {
    let minPos = Infinity;
    for (const v of values) {
      const a = Math.abs(v);
      if (a > 0 && a < minPos) minPos = a;
    }
    if (!Number.isFinite(minPos)) minPos = 1e-300;
    values = values.map((v) => Math.log10(Math.max(Math.abs(v), minPos / 10)));
  }

  const W = 720;
  const H = 400;
  const l = 86;
  const b = 30;
  const t = 22;
  const r = 14;
  const cv = new Canvas(W, H);
  const [ylo0, yhi0] = minMax(values);
  const pad = (yhi0 - ylo0) * 0.05;
  const ylo = ylo0 - (pad || Math.abs(ylo0) * 1e-3 || 1);
  const yhi = yhi0 + (pad || Math.abs(yhi0) * 1e-3 || 1);
  const [xlo, xhi] = [steps[0], steps[steps.length - 1]];
  const toX = (s: number) => l + ((s - xlo) / Math.max(1, xhi - xlo)) * (W - l - r);
  const toY = (v: number) => t + (1 - (v - ylo) / (yhi - ylo)) * (H - t - b);
  drawAxes(cv, l, t, W - l - r, H - t - b, xlo, xhi, ylo, yhi);
  for (let k = 1; k < values.length; k++) {
    cv.line(toX(steps[k - 1]), toY(values[k - 1]), toX(steps[k]), toY(values[k]),
            [178, 34, 34]);
  }
  const label = logScale ? `LOG10|${column}|` : column;
  cv.text(l, 6, label);

  const result: TimeseriesResult = { column, outPath };
  if (column === "E" && col.length > 1) {
    const e0 = Math.abs(col[0]) || 1;
    let maxDelta = 0;
    for (let k = 1; k < col.length; k++) {
      maxDelta = Math.max(maxDelta, Math.abs(col[k] - col[k - 1]));
    }
    const rel = maxDelta / e0;
    result.annotation = { maxStepRelDelta: rel };
    cv.text(l + 120, 6, `MAX STEP |DE|/|E0| = ${fmtNum(rel)}`);
  }
  fs.writeFileSync(outPath, encodePng(W, H, cv.pixels));
  return result;
}
