import { GLYPH_H, GLYPH_W, glyphFor } from "./font.js";

export type Rgb = readonly [number, number, number];

export const BLACK: Rgb = [0, 0, 0];
export const WHITE: Rgb = [255, 255, 255];
export const GREY: Rgb = [150, 150, 150];

export class Canvas {
  readonly width: number;
  readonly height: number;
  readonly pixels: Uint8Array;

  constructor(width: number, height: number, background: Rgb = WHITE) {
    this.width = width;
    this.height = height;
    this.pixels = new Uint8Array(width * height * 4);
    for (let k = 0; k < width * height; k++) {
      this.pixels[4 * k] = background[0];
      this.pixels[4 * k + 1] = background[1];
      this.pixels[4 * k + 2] = background[2];
      this.pixels[4 * k + 3] = 255;
    }
  }

  set(x: number, y: number, c: Rgb): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const k = 4 * (y * this.width + x);
    this.pixels[k] = c[0];
    this.pixels[k + 1] = c[1];
    this.pixels[k + 2] = c[2];
    this.pixels[k + 3] = 255;
  }

  fillRect(x0: number, y0: number, w: number, h: number, c: Rgb): void {
    for (let y = y0; y < y0 + h; y++) {
      for (let x = x0; x < x0 + w; x++) this.set(x, y, c);
    }
  }

  line(x0: number, y0: number, x1: number, y1: number, c: Rgb): void {
    // Bresenham
    let [xa, ya] = [Math.round(x0), Math.round(y0)];
    const [xb, yb] = [Math.round(x1), Math.round(y1)];
    const dx = Math.abs(xb - xa);
    const dy = -Math.abs(yb - ya);
    const sx = xa < xb ? 1 : -1;
    const sy = ya < yb ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.set(xa, ya, c);
      if (xa === xb && ya === yb) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        xa += sx;
      }
      if (e2 <= dx) {
        err += dx;
        ya += sy;
      }
    }
  }

  arrow(x0: number, y0: number, x1: number, y1: number, c: Rgb): void {
    this.line(x0, y0, x1, y1, c);
    const ang = Math.atan2(y1 - y0, x1 - x0);
    const head = 3;
    for (const da of [Math.PI * 0.8, -Math.PI * 0.8]) {
      this.line(x1, y1, x1 + head * Math.cos(ang + da), y1 + head * Math.sin(ang + da), c);
    }
  }

  text(x: number, y: number, s: string, c: Rgb = BLACK): void {
    let cx = Math.round(x);
    const cy = Math.round(y);
    for (const ch of s) {
      const rows = glyphFor(ch);
      for (let r = 0; r < GLYPH_H; r++) {
        for (let col = 0; col < GLYPH_W; col++) {
          if (rows[r][col] === "#") this.set(cx + col, cy + r, c);
        }
      }
      cx += GLYPH_W + 1;
    }
  }

  textWidth(s: string): number {
    return s.length * (GLYPH_W + 1) - 1;
  }
}

/** Compact scientific/plain label, e.g. -1.0E-8, 345.2, 0. */
export function fmtNum(v: number): string {
  if (v === 0) return "0";
  if (!Number.isFinite(v)) return String(v).toUpperCase();
  const a = Math.abs(v);
  if (a >= 0.01 && a < 10000) {
    const s = v.toPrecision(4);
    return s.includes(".") ? s.replace(/\.?0+$/, "") : s;
  }
  return v
    .toExponential(2)
    .toUpperCase()
    .replace(/\.?0+E/, "E")
    .replace("E+", "E");
}
