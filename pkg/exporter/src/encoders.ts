/** Image and text encoders behind one interface.
 *
 * Real exports wrap a tfjs classifier (vision side) and, when a suitable
 * text tower is available, a tfjs text model.  The `hashed:` encoders are
 * deterministic stand-ins built from integer hashing: useful for smoke
 * tests, pipeline development, and CI machines without model weights.
 */

import * as tf from "@tensorflow/tfjs";
import { RawImage } from "./images";
import { EmbeddingModel } from "./tfmodel";

export interface ImageEncoder {
  readonly name: string;
  readonly dim: number;
  embedBatch(images: RawImage[]): Promise<number[][]>;
}

export interface TextEncoder {
  readonly name: string;
  readonly dim: number;
  embed(text: string): number[];
}

/** FNV-1a, kept in uint32 arithmetic for cross-platform determinism. */
function fnv1a(text: string, seed: number): number {
  let h = (0x811c9dc5 ^ seed) >>> 0;
  for (let i = 0; i < text.length; i++) {
    h ^= text.charCodeAt(i);
    h = Math.imul(h, 0x01000193) >>> 0;
  }
  return h;
}

function accumulateHashed(out: Float64Array, token: string, seed: number): void {
  const h = fnv1a(token, seed);
  const bucket = h % out.length;
  const sign = (h >>> 16) & 1 ? 1 : -1;
  out[bucket] += sign;
}

function l2normalize(v: Float64Array): number[] {
  let norm = 0;
  for (const x of v) norm += x * x;
  norm = Math.sqrt(norm);
  if (norm === 0) {
    const out = new Array(v.length).fill(0);
    out[0] = 1; // arbitrary fixed direction for degenerate inputs
    return out;
  }
  return Array.from(v, (x) => x / norm);
}

/** Character-trigram hashing; unit norm; fully deterministic. */
export class HashedTextEncoder implements TextEncoder {
  readonly name: string;
  constructor(readonly dim: number, private readonly seed = 7) {
    this.name = `hashed-text:${dim}:${seed}`;
  }

  embed(text: string): number[] {
    const padded = `^^${text.toLowerCase()}$$`;
    const acc = new Float64Array(this.dim);
    for (let i = 0; i + 3 <= padded.length; i++) {
      accumulateHashed(acc, padded.slice(i, i + 3), this.seed);
    }
    return l2normalize(acc);
  }
}

/** Coarse 4x4 grayscale pooling hashed into the target dimension. */
export class HashedImageEncoder implements ImageEncoder {
  readonly name: string;
  constructor(readonly dim: number, private readonly seed = 11) {
    this.name = `hashed-image:${dim}:${seed}`;
  }

  async embedBatch(images: RawImage[]): Promise<number[][]> {
    return images.map((img) => this.embedOne(img));
  }

  private embedOne(img: RawImage): number[] {
    const cells = 4;
    const acc = new Float64Array(this.dim);
    for (let cy = 0; cy < cells; cy++) {
      for (let cx = 0; cx < cells; cx++) {
        let sum = 0;
        let count = 0;
        const y0 = Math.floor((cy * img.height) / cells);
        const y1 = Math.floor(((cy + 1) * img.height) / cells);
        const x0 = Math.floor((cx * img.width) / cells);
        const x1 = Math.floor(((cx + 1) * img.width) / cells);
        for (let y = y0; y < Math.max(y1, y0 + 1); y++) {
          for (let x = x0; x < Math.max(x1, x0 + 1); x++) {
            const o = (y * img.width + x) * 3;
            sum += (img.data[o] + img.data[o + 1] + img.data[o + 2]) / 3;
            count++;
          }
        }
        const level = Math.round((sum / Math.max(count, 1)) * 16);
        accumulateHashed(acc, `cell:${cx},${cy}:${level}`, this.seed);
      }
    }
    return l2normalize(acc);
  }
}

/** Vision encoder backed by a tfjs model's penultimate activations. */
export class TfImageEncoder implements ImageEncoder {
  readonly name: string;
  readonly dim: number;

  constructor(private readonly model: EmbeddingModel, name: string) {
    this.name = name;
    this.dim = model.dim;
  }

  async embedBatch(images: RawImage[]): Promise<number[][]> {
    const tensors = images.map((img) =>
      tf.tensor3d(img.data, [img.height, img.width, 3])
    );
    const out = tf.tidy(() => {
      const resized = tensors.map((t) =>
        tf.image.resizeBilinear(t as tf.Tensor3D, [
          this.model.inputHeight,
          this.model.inputWidth,
        ])
      );
      const batch = tf.stack(resized) as tf.Tensor4D;
      return this.model.embed(batch);
    });
    const rows = (await out.array()) as number[][];
    out.dispose();
    tensors.forEach((t) => t.dispose());
    return rows;
  }
}

export interface EncoderSpec {
  kind: "tfjs" | "hashed";
  /** model directory for tfjs, embedding dim for hashed */
  value: string;
}

/** Parse `--vision-model`/`--vlm-model` flags: a path, or `hashed:<dim>[:<seed>]`. */
export function parseEncoderSpec(flag: string): EncoderSpec {
  if (flag.startsWith("hashed:")) {
    return { kind: "hashed", value: flag.slice("hashed:".length) };
  }
  return { kind: "tfjs", value: flag };
}
