/** Software RGBA canvas: rectangles, lines, bitmap text. */

import { GLYPH_HEIGHT, GLYPH_WIDTH, glyph } from "./font.js";
import type { Image } from "./png.js";

export type Color = readonly [number, number, number];

export const WHITE: Color = [255, 255, 255];
export const BLACK: Color = [20, 20, 20];
export const GRAY: Color = [150, 150, 150];
export const LIGHT_GRAY: Color = [225, 225, 225];
export const SIM_COLOR: Color = [31, 119, 180]; // simulation: blue
export const THEORY_COLOR: Color = [255, 127, 14]; // closed form: orange
export const DIVERGED_COLOR: Color = [178, 24, 43];

export class Raster {
  readonly width: number;
  readonly height: number;
  readonly pixels: Uint8Array;

  constructor(width: number, height: number, background: Color = WHITE) {
    this.width = width;
    this.height = height;
    this.pixels = new Uint8Array(width * height * 4);
    for (let i = 0; i < width * height; i++) {
      this.pixels[i * 4] = background[0];
      this.pixels[i * 4 + 1] = background[1];
      this.pixels[i * 4 + 2] = background[2];
      this.pixels[i * 4 + 3] = 255;
    }
  }

  set(x: number, y: number, color: Color): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (Math.round(y) * this.width + Math.round(x)) * 4;
    this.pixels[i] = color[0];
    this.pixels[i + 1] = color[1];
    this.pixels[i + 2] = color[2];
    this.pixels[i + 3] = 255;
  }

  fillRect(x0: number, y0: number, w: number, h: number, color: Color): void {
    const x1 = Math.min(this.width, Math.round(x0 + w));
    const y1 = Math.min(this.height, Math.round(y0 + h));
    for (let y = Math.max(0, Math.round(y0)); y < y1; y++) {
      for (let x = Math.max(0, Math.round(x0)); x < x1; x++) {
        this.set(x, y, color);
      }
    }
  }

  /** Bresenham segment; `thick` widens it symmetrically. */
  line(x0: number, y0: number, x1: number, y1: number, color: Color, thick = 1): void {
    let ax = Math.round(x0);
    let ay = Math.round(y0);
    const bx = Math.round(x1);
    const by = Math.round(y1);
    const dx = Math.abs(bx - ax);
    const dy = -Math.abs(by - ay);
    const sx = ax < bx ? 1 : -1;
    const sy = ay < by ? 1 : -1;
    let err = dx + dy;
    const radius = Math.floor(thick / 2);
    for (;;) {
      if (thick <= 1) {
        this.set(ax, ay, color);
      } else {
        for (let oy = -radius; oy <= radius; oy++) {
          for (let ox = -radius; ox <= radius; ox++) {
            this.set(ax + ox, ay + oy, color);
          }
        }
      }
      if (ax === bx && ay === by) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        ax += sx;
      }
      if (e2 <= dx) {
        err += dx;
        ay += sy;
      }
    }
  }

  dashedVLine(x: number, y0: number, y1: number, color: Color, on = 4, off = 3): void {
    for (let y = Math.min(y0, y1); y <= Math.max(y0, y1); y++) {
      if (y % (on + off) < on) this.set(x, y, color);
    }
  }

  text(x: number, y: number, content: string, color: Color = BLACK, scale = 1): void {
    let cx = Math.round(x);
    for (const char of content) {
      const rows = glyph(char);
      for (let gy = 0; gy < GLYPH_HEIGHT; gy++) {
        for (let gx = 0; gx < GLYPH_WIDTH; gx++) {
          if (rows[gy] & (1 << (GLYPH_WIDTH - 1 - gx))) {
            this.fillRect(cx + gx * scale, y + gy * scale, scale, scale, color);
          }
        }
      }
      cx += (GLYPH_WIDTH + 1) * scale;
    }
  }

  image(): Image {
    return { width: this.width, height: this.height, pixels: this.pixels };
  }
}
