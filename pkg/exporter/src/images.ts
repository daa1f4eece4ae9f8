/** Minimal image loading: binary PPM/PGM natively, PNG via pngjs. */

import * as fs from "fs";
import * as path from "path";
import { PNG } from "pngjs";

export interface RawImage {
  width: number;
  height: number;
  /** row-major RGB triples scaled to [0, 1] */
  data: Float32Array;
}

export const IMAGE_EXTENSIONS = [".ppm", ".pgm", ".png"];

export function readImage(file: string): RawImage {
  const ext = path.extname(file).toLowerCase();
  const buf = fs.readFileSync(file);
  if (ext === ".ppm" || ext === ".pgm") return parseNetpbm(buf, file);
  if (ext === ".png") return parsePng(buf);
  throw new Error(`unsupported image format: ${file}`);
}

function parsePng(buf: Buffer): RawImage {
  const png = PNG.sync.read(buf);
  const n = png.width * png.height;
  const data = new Float32Array(n * 3);
  for (let i = 0; i < n; i++) {
    data[i * 3] = png.data[i * 4] / 255;
    data[i * 3 + 1] = png.data[i * 4 + 1] / 255;
    data[i * 3 + 2] = png.data[i * 4 + 2] / 255;
  }
  return { width: png.width, height: png.height, data };
}

/** P6 (RGB) and P5 (gray, replicated to RGB), 8-bit, with # comments. */
function parseNetpbm(buf: Buffer, file: string): RawImage {
  let pos = 0;
  const token = (): string => {
    while (pos < buf.length) {
      const ch = buf[pos];
      if (ch === 0x23) {
        while (pos < buf.length && buf[pos] !== 0x0a) pos++;
      } else if (ch === 0x20 || ch === 0x09 || ch === 0x0a || ch === 0x0d) {
        pos++;
      } else break;
    }
    const start = pos;
    while (pos < buf.length && !/\s/.test(String.fromCharCode(buf[pos]))) pos++;
    return buf.toString("ascii", start, pos);
  };
  const magic = token();
  if (magic !== "P6" && magic !== "P5") {
    throw new Error(`${file}: expected binary PPM/PGM, found ${magic}`);
  }
  const width = parseInt(token(), 10);
  const height = parseInt(token(), 10);
  const maxval = parseInt(token(), 10);
  if (!(width > 0 && height > 0) || maxval <= 0 || maxval > 255) {
    throw new Error(`${file}: unsupported netpbm header`);
  }
  pos++; // single whitespace after maxval
  const n = width * height;
  const channels = magic === "P6" ? 3 : 1;
  if (buf.length - pos < n * channels) {
    throw new Error(`${file}: truncated pixel data`);
  }
  const data = new Float32Array(n * 3);
  for (let i = 0; i < n; i++) {
    if (channels === 3) {
      data[i * 3] = buf[pos + i * 3] / maxval;
      data[i * 3 + 1] = buf[pos + i * 3 + 1] / maxval;
      data[i * 3 + 2] = buf[pos + i * 3 + 2] / maxval;
    } else {
      const v = buf[pos + i] / maxval;
      data[i * 3] = data[i * 3 + 1] = data[i * 3 + 2] = v;
    }
  }
  return { width, height, data };
}

/** Write a P6 PPM from [0,1] RGB data (used by tests and fixtures). */
export function writePpm(file: string, img: RawImage): void {
  const header = Buffer.from(`P6\n${img.width} ${img.height}\n255\n`, "ascii");
  const body = Buffer.alloc(img.width * img.height * 3);
  for (let i = 0; i < body.length; i++) {
    body[i] = Math.max(0, Math.min(255, Math.round(img.data[i] * 255)));
  }
  fs.writeFileSync(file, Buffer.concat([header, body]));
}
