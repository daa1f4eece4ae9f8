/** Shared test scaffolding: a tiny deterministic dataset and classifier. */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";
import { RawImage, writePpm } from "../src/images";
import { diskSaveHandler } from "../src/tfmodel";

/** xorshift PRNG so fixtures are identical across runs and platforms. */
export function makeRng(seed: number): () => number {
  let s = seed >>> 0 || 1;
  return () => {
    s ^= s << 13;
    s >>>= 0;
    s ^= s >> 17;
    s ^= s << 5;
    s >>>= 0;
    return s / 0xffffffff;
  };
}

export function syntheticImage(rng: () => number, bias: number): RawImage {
  const size = 12;
  const data = new Float32Array(size * size * 3);
  for (let i = 0; i < data.length; i++) {
    data[i] = Math.min(1, Math.max(0, bias + 0.3 * (rng() - 0.5)));
  }
  return { width: size, height: size, data };
}

export interface MockDataset {
  root: string;
  classes: string[];
  concepts: string[];
  perClass: number;
}

/** `<root>/<split>/<class>/*.ppm` plus a root attributes.csv. */
export function buildMockDataset(root: string, perClass = 6): MockDataset {
  const classes = ["bright", "dark"];
  const concepts = ["glow", "shadow", "noise"];
  const rng = makeRng(1234);
  const attrLines = ["id," + concepts.join(",")];
  for (const split of ["train", "test"]) {
    for (const cls of classes) {
      const dir = path.join(root, split, cls);
      fs.mkdirSync(dir, { recursive: true });
      for (let i = 0; i < perClass; i++) {
        const bias = cls === "bright" ? 0.75 : 0.25;
        writePpm(path.join(dir, `img${i}.ppm`), syntheticImage(rng, bias));
        const id = `${split}/${cls}/img${i}`;
        const glow = cls === "bright" ? 1 : 0;
        const shadow = cls === "dark" ? 1 : 0;
        attrLines.push(`${id},${glow},${shadow},${i % 2}`);
      }
    }
  }
  fs.writeFileSync(path.join(root, "attributes.csv"), attrLines.join("\n") + "\n");
  return { root, classes, concepts, perClass };
}

/** flatten -> dense(embedDim, tanh) -> dense(nClasses); weights seeded.
 * tanh keeps every embedding unit responsive so the affine fit downstream
 * sees full-rank activations. */
export async function buildTinyClassifier(
  dir: string,
  embedDim = 8,
  nClasses = 2
): Promise<void> {
  const rng = makeRng(42);
  const model = tf.sequential();
  model.add(tf.layers.flatten({ inputShape: [12, 12, 3] }));
  model.add(tf.layers.dense({ units: embedDim, activation: "tanh", name: "embedding" }));
  model.add(tf.layers.dense({ units: nClasses, name: "logits" }));
  const shapes = model.getWeights().map((w) => w.shape);
  model.setWeights(
    shapes.map((shape) => {
      const size = shape.reduce((a, b) => a * (b as number), 1);
      return tf.tensor(
        Float32Array.from({ length: size }, () => rng() - 0.5),
        shape as number[]
      );
    })
  );
  await model.save(diskSaveHandler(dir));
}
