#!/usr/bin/env node
/** Command line: export a dataset through two image encoders and one text
 * encoder into the verification toolkit's file formats.
 *
 *   conspec-export --dataset ./rival10 --split train,test --out ./export \
 *       --vision-model ./models/vision-tfjs --vlm-model hashed:512 \
 *       --batch-size 32
 *
 * Model flags accept a tfjs layers-model directory or `hashed:<dim>[:<seed>]`
 * for the deterministic stand-in encoders.
 */

import * as yargs from "yargs";
import {
  HashedImageEncoder,
  HashedTextEncoder,
  ImageEncoder,
  parseEncoderSpec,
  TfImageEncoder,
} from "./encoders";
import { exportCaptionsAndHead, exportEmbeddings } from "./export";
import { loadEmbeddingModel } from "./tfmodel";

async function buildImageEncoder(
  flag: string,
  role: string
): Promise<{ encoder: ImageEncoder; head: { A: number[][]; b: number[] } | null }> {
  const spec = parseEncoderSpec(flag);
  if (spec.kind === "hashed") {
    const [dim, seed] = spec.value.split(":").map(Number);
    if (!Number.isInteger(dim) || dim < 1) {
      throw new Error(`bad hashed encoder spec for ${role}: ${flag}`);
    }
    return {
      encoder: new HashedImageEncoder(dim, Number.isInteger(seed) ? seed : 11),
      head: null,
    };
  }
  const model = await loadEmbeddingModel(spec.value);
  return { encoder: new TfImageEncoder(model, `tfjs:${spec.value}`), head: model.head };
}

export async function run(argv: string[]): Promise<number> {
  const args = await yargs
    .default(argv)
    .option("dataset", { type: "string", demandOption: true, describe: "dataset root" })
    .option("split", { type: "string", default: "train,test", describe: "comma-separated splits" })
    .option("out", { type: "string", demandOption: true, describe: "output directory" })
    .option("batch-size", { type: "number", default: 32 })
    .option("vision-model", { type: "string", default: "hashed:64:11" })
    .option("vlm-model", { type: "string", default: "hashed:64:23" })
    .option("text-dim", { type: "number", describe: "text encoder dim (defaults to VLM dim)" })
    .strict()
    .parse();

  const vision = await buildImageEncoder(args["vision-model"], "vision");
  const vlm = await buildImageEncoder(args["vlm-model"], "vlm");
  const textDim = args["text-dim"] ?? vlm.encoder.dim;
  const job = {
    datasetRoot: args.dataset,
    splits: args.split.split(",").map((s) => s.trim()).filter(Boolean),
    outDir: args.out,
    batchSize: args["batch-size"],
    visionEncoder: vision.encoder,
    vlmEncoder: vlm.encoder,
    textEncoder: new HashedTextEncoder(textDim),
    head: vision.head,
  };
  const summary = await exportEmbeddings(job);
  const captions = await exportCaptionsAndHead(job, summary.classes, summary.concepts);
  console.log(
    `exported ${summary.rows} rows (${summary.classes.length} classes, ` +
      `${summary.concepts.length} concepts), dims ${summary.visionDim}/${summary.vlmDim}, ` +
      `${captions.captionRows} caption embeddings -> ${args.out}`
  );
  return 0;
}

if (require.main === module) {
  run(process.argv.slice(2))
    .then((code) => process.exit(code))
    .catch((err) => {
      console.error(`error: ${err.message}`);
      process.exit(1);
    });
}
