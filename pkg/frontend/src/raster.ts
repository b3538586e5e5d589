/**
 * Software rasterizer and PNG writer.
 *
 * Everything is integer pixel work on an RGBA buffer (no antialiasing,
 * no system fonts, no float-dependent rounding beyond Math.round), and
 * the PNG stream uses zlib at a fixed level, so a given scene always
 * encodes to identical bytes.
 */

import * as zlib from "zlib";
import { GLYPH_HEIGHT, GLYPH_WIDTH, glyphFor, textWidth } from "./font";
import { Color, Op, Scene, TextOp } from "./scene";

export class Raster {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number, background: Color) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 4);
    for (let i = 0; i < width * height; i++) {
      this.data[i * 4] = background[0];
      this.data[i * 4 + 1] = background[1];
      this.data[i * 4 + 2] = background[2];
      this.data[i * 4 + 3] = 255;
    }
  }

  set(x: number, y: number, color: Color): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 4;
    this.data[i] = color[0];
    this.data[i + 1] = color[1];
    this.data[i + 2] = color[2];
    this.data[i + 3] = 255;
  }

  fillRect(x: number, y: number, w: number, h: number, color: Color): void {
    const x0 = Math.round(x);
    const y0 = Math.round(y);
    for (let yy = y0; yy < y0 + Math.round(h); yy++) {
      for (let xx = x0; xx < x0 + Math.round(w); xx++) {
        this.set(xx, yy, color);
      }
    }
  }

  line(x1: number, y1: number, x2: number, y2: number, color: Color): void {
    // Bresenham on rounded endpoints
    let x = Math.round(x1);
    let y = Math.round(y1);
    const xe = Math.round(x2);
    const ye = Math.round(y2);
    const dx = Math.abs(xe - x);
    const dy = -Math.abs(ye - y);
    const sx = x < xe ? 1 : -1;
    const sy = y < ye ? 1 : -1;
    let err = dx + dy;
    for (;;) {
      this.set(x, y, color);
      if (x === xe && y === ye) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y += sy;
      }
    }
  }

  disc(cx: number, cy: number, r: number, color: Color): void {
    const x0 = Math.round(cx);
    const y0 = Math.round(cy);
    const rr = Math.round(r);
    for (let yy = -rr; yy <= rr; yy++) {
      for (let xx = -rr; xx <= rr; xx++) {
        if (xx * xx + yy * yy <= rr * rr) this.set(x0 + xx, y0 + yy, color);
      }
    }
  }

  text(op: TextOp): void {
    let x = Math.round(op.x);
    const y = Math.round(op.y);
    const width = textWidth(op.text, op.scale);
    if (op.anchor === "middle") x -= Math.round(width / 2);
    if (op.anchor === "end") x -= width;
    for (const ch of op.text) {
      const rows = glyphFor(ch);
      for (let r = 0; r < GLYPH_HEIGHT; r++) {
        for (let c = 0; c < GLYPH_WIDTH; c++) {
          if ((rows[r] >> (GLYPH_WIDTH - 1 - c)) & 1) {
            this.fillRect(x + c * op.scale, y + r * op.scale, op.scale, op.scale, op.color);
          }
        }
      }
      x += (GLYPH_WIDTH + 1) * op.scale;
    }
  }
}

export function renderRaster(scene: Scene): Raster {
  const raster = new Raster(scene.width, scene.height, scene.background);
  for (const op of scene.ops) {
    switch (op.kind) {
      case "rect":
        raster.fillRect(op.x, op.y, op.w, op.h, op.color);
        break;
      case "line":
        raster.line(op.x1, op.y1, op.x2, op.y2, op.color);
        break;
      case "disc":
        raster.disc(op.x, op.y, op.r, op.color);
        break;
      case "text":
        raster.text(op);
        break;
    }
  }
  return raster;
}

// -- PNG encoding ---------------------------------------------------------

const CRC_TABLE = (() => {
  const table = new Uint32Array(256);
  for (let n = 0; n < 256; n++) {
    let c = n;
    for (let k = 0; k < 8; k++) {
      c = c & 1 ? 0xedb88320 ^ (c >>> 1) : c >>> 1;
    }
    table[n] = c >>> 0;
  }
  return table;
})();

export function crc32(buf: Uint8Array): number {
  let c = 0xffffffff;
  for (let i = 0; i < buf.length; i++) {
    c = CRC_TABLE[(c ^ buf[i]) & 0xff] ^ (c >>> 8);
  }
  return (c ^ 0xffffffff) >>> 0;
}

function chunk(type: string, payload: Uint8Array): Buffer {
  const head = Buffer.alloc(4);
  head.writeUInt32BE(payload.length, 0);
  const body = Buffer.concat([Buffer.from(type, "ascii"), Buffer.from(payload)]);
  const crc = Buffer.alloc(4);
  crc.writeUInt32BE(crc32(body), 0);
  return Buffer.concat([head, body, crc]);
}

export function encodePng(raster: Raster): Buffer {
  const { width, height, data } = raster;
  const ihdr = Buffer.alloc(13);
  ihdr.writeUInt32BE(width, 0);
  ihdr.writeUInt32BE(height, 4);
  ihdr[8] = 8; // bit depth
  ihdr[9] = 6; // RGBA
  ihdr[10] = 0;
  ihdr[11] = 0;
  ihdr[12] = 0;
  const stride = width * 4;
  const filtered = Buffer.alloc((stride + 1) * height);
  for (let y = 0; y < height; y++) {
    filtered[y * (stride + 1)] = 0; // filter: none
    filtered.set(data.subarray(y * stride, (y + 1) * stride), y * (stride + 1) + 1);
  }
  const idat = zlib.deflateSync(filtered, { level: 9 });
  return Buffer.concat([
    Buffer.from([0x89, 0x50, 0x4e, 0x47, 0x0d, 0x0a, 0x1a, 0x0a]),
    chunk("IHDR", ihdr),
    chunk("IDAT", idat),
    chunk("IEND", new Uint8Array(0)),
  ]);
}
