/** Loading tfjs layers models from disk with the pure-JS runtime.
 *
 * The plain `@tensorflow/tfjs` package has no `file://` IO handlers (those
 * live in tfjs-node), so saving and loading go through the two small
 * handlers below: `model.json` plus a single `weights.bin` per directory.
 */

import * as fs from "fs";
import * as path from "path";
import * as tf from "@tensorflow/tfjs";

export function diskSaveHandler(dir: string): tf.io.IOHandler {
  return {
    async save(artifacts: tf.io.ModelArtifacts): Promise<tf.io.SaveResult> {
      fs.mkdirSync(dir, { recursive: true });
      const weightsPath = "weights.bin";
      const manifest = [
        { paths: [weightsPath], weights: artifacts.weightSpecs ?? [] },
      ];
      fs.writeFileSync(
        path.join(dir, "model.json"),
        JSON.stringify({
          modelTopology: artifacts.modelTopology,
          format: artifacts.format,
          generatedBy: artifacts.generatedBy,
          convertedBy: artifacts.convertedBy ?? null,
          weightsManifest: manifest,
        })
      );
      fs.writeFileSync(
        path.join(dir, weightsPath),
        Buffer.from(artifacts.weightData as ArrayBuffer)
      );
      return {
        modelArtifactsInfo: {
          dateSaved: new Date(),
          modelTopologyType: "JSON",
        },
      };
    },
  };
}

export function diskLoadHandler(dir: string): tf.io.IOHandler {
  return {
    async load(): Promise<tf.io.ModelArtifacts> {
      const raw = JSON.parse(
        fs.readFileSync(path.join(dir, "model.json"), "utf-8")
      );
      const weightSpecs: tf.io.WeightsManifestEntry[] = [];
      const buffers: Buffer[] = [];
      for (const group of raw.weightsManifest) {
        weightSpecs.push(...group.weights);
        for (const p of group.paths) {
          buffers.push(fs.readFileSync(path.join(dir, p)));
        }
      }
      const all = Buffer.concat(buffers);
      return {
        modelTopology: raw.modelTopology,
        format: raw.format,
        generatedBy: raw.generatedBy,
        weightSpecs,
        weightData: all.buffer.slice(
          all.byteOffset,
          all.byteOffset + all.byteLength
        ),
      };
    },
  };
}

export interface EmbeddingModel {
  /** maps a [batch, h, w, 3] tensor to [batch, dim] embeddings */
  embed: (images: tf.Tensor4D) => tf.Tensor2D;
  inputHeight: number;
  inputWidth: number;
  dim: number;
  /** final linear layer, when the model ends in one: scores = A w + b */
  head: { A: number[][]; b: number[] } | null;
  nClasses: number | null;
}

/**
 * Split a classifier into encoder and final dense head.  The embedding is
 * the input of the last dense layer; its kernel/bias become the exported
 * head parameters (A is classes x dim, transposed from the kernel).
 */
export async function loadEmbeddingModel(modelDir: string): Promise<EmbeddingModel> {
  const model = (await tf.loadLayersModel(diskLoadHandler(modelDir))) as tf.LayersModel;
  const dense = [...model.layers]
    .reverse()
    .find((l) => l.getClassName() === "Dense");
  const inputShape = model.inputs[0].shape; // [null, h, w, 3]
  const height = inputShape[1] as number;
  const width = inputShape[2] as number;
  if (!dense) {
    const dim = model.outputs[0].shape[1] as number;
    return {
      embed: (x) => model.predict(x) as tf.Tensor2D,
      inputHeight: height,
      inputWidth: width,
      dim,
      head: null,
      nClasses: null,
    };
  }
  const embedModel = tf.model({
    inputs: model.inputs,
    outputs: dense.input as tf.SymbolicTensor,
  });
  const [kernel, bias] = dense.getWeights();
  const kernelArr = (await kernel.array()) as number[][]; // dim x classes
  const biasArr = (await bias.array()) as number[];
  const nClasses = kernelArr[0].length;
  const A: number[][] = [];
  for (let c = 0; c < nClasses; c++) {
    A.push(kernelArr.map((row) => row[c]));
  }
  return {
    embed: (x) => embedModel.predict(x) as tf.Tensor2D,
    inputHeight: height,
    inputWidth: width,
    dim: embedModel.outputs[0].shape[1] as number,
    head: { A, b: biasArr },
    nClasses,
  };
}
