/** The export jobs: dataset + encoders in, verification-toolkit files out.
 *
 * Produced layout (all inside `outDir`):
 *
 *   embeddings_vision.csv   id,d0..d{p-1}   vision-model embeddings
 *   embeddings_vlm.csv      id,d0..d{p-1}   VLM image embeddings
 *   labels.csv              id,ground_truth,predicted
 *   attributes.csv          id,<concept>,...          (when annotated)
 *   captions.csv            caption,d0..d{p-1}        (text embeddings)
 *   head.json               {A, b, classes}
 *   templates.txt           one caption template per line
 *   <split>_ids.txt         row ids per exported split
 *   manifest.json           ties everything together
 */

import * as fs from "fs";
import * as path from "path";
import { captionHeader, csvLine, embeddingHeader } from "./csv";
import { AttributeTable, DatasetRow, classNames, readAttributeTable, scanSplit } from "./dataset";
import { ImageEncoder, TextEncoder } from "./encoders";
import { readImage } from "./images";
import { CAPTION_TEMPLATES, expandCaptions } from "./templates";

export interface ExportJob {
  datasetRoot: string;
  splits: string[];
  outDir: string;
  batchSize: number;
  visionEncoder: ImageEncoder;
  vlmEncoder: ImageEncoder;
  textEncoder: TextEncoder;
  /** classes x vision-dim linear head; omitted when the model has none */
  head: { A: number[][]; b: number[] } | null;
  /** overrides the attribute header as the concept vocabulary */
  concepts?: string[];
}

export interface ExportSummary {
  rows: number;
  classes: string[];
  concepts: string[];
  visionDim: number;
  vlmDim: number;
}

function argmax(xs: number[]): number {
  let best = 0;
  for (let i = 1; i < xs.length; i++) if (xs[i] > xs[best]) best = i;
  return best;
}

async function embedAll(
  rows: DatasetRow[],
  encoder: ImageEncoder,
  batchSize: number
): Promise<number[][]> {
  const out: number[][] = [];
  for (let start = 0; start < rows.length; start += batchSize) {
    const batch = rows.slice(start, start + batchSize).map((r) => readImage(r.file));
    out.push(...(await encoder.embedBatch(batch)));
  }
  return out;
}

export async function exportEmbeddings(job: ExportJob): Promise<ExportSummary> {
  fs.mkdirSync(job.outDir, { recursive: true });
  const rows = job.splits.flatMap((s) => scanSplit(job.datasetRoot, s));
  const classes = classNames(job.datasetRoot, job.splits);

  const vision = await embedAll(rows, job.visionEncoder, job.batchSize);
  const vlm = await embedAll(rows, job.vlmEncoder, job.batchSize);
  if (vision[0].length !== job.visionEncoder.dim || vlm[0].length !== job.vlmEncoder.dim) {
    throw new Error("encoder produced embeddings of an unexpected dimension");
  }

  let predicted: string[] | null = null;
  if (job.head) {
    if (job.head.A[0].length !== job.visionEncoder.dim) {
      throw new Error(
        `head expects dim ${job.head.A[0].length}, vision encoder gives ${job.visionEncoder.dim}`
      );
    }
    predicted = vision.map((w) => {
      const scores = job.head!.A.map(
        (rowA, c) => rowA.reduce((acc, a, i) => acc + a * w[i], 0) + job.head!.b[c]
      );
      return classes[argmax(scores)];
    });
  }

  writeCsv(
    path.join(job.outDir, "embeddings_vision.csv"),
    embeddingHeader(job.visionEncoder.dim),
    rows.map((r, i) => csvLine([r.id, ...vision[i]]))
  );
  writeCsv(
    path.join(job.outDir, "embeddings_vlm.csv"),
    embeddingHeader(job.vlmEncoder.dim),
    rows.map((r, i) => csvLine([r.id, ...vlm[i]]))
  );
  writeCsv(
    path.join(job.outDir, "labels.csv"),
    "id,ground_truth,predicted",
    rows.map((r, i) => csvLine([r.id, r.label, predicted ? predicted[i] : ""]))
  );
  for (const split of job.splits) {
    const ids = rows.filter((r) => r.split === split).map((r) => r.id);
    fs.writeFileSync(path.join(job.outDir, `${split}_ids.txt`), ids.join("\n") + "\n");
  }

  const attrs = readAttributeTable(job.datasetRoot);
  const concepts = exportAttributes(job, rows, attrs);
  writeManifest(job, classes, concepts, attrs !== null);
  return {
    rows: rows.length,
    classes,
    concepts,
    visionDim: job.visionEncoder.dim,
    vlmDim: job.vlmEncoder.dim,
  };
}

function exportAttributes(
  job: ExportJob,
  rows: DatasetRow[],
  attrs: AttributeTable | null
): string[] {
  if (!attrs) return job.concepts ?? [];
  const concepts = job.concepts ?? attrs.concepts;
  const lines = rows.map((r) => {
    const values = attrs.byId.get(r.id);
    if (!values) throw new Error(`attributes.csv has no row for ${r.id}`);
    return csvLine([r.id, ...values.map(String)]);
  });
  writeCsv(
    path.join(job.outDir, "attributes.csv"),
    ["id", ...concepts].join(","),
    lines
  );
  return concepts;
}

export async function exportCaptionsAndHead(
  job: ExportJob,
  classes: string[],
  concepts: string[]
): Promise<{ captionRows: number }> {
  fs.mkdirSync(job.outDir, { recursive: true });
  const names = [...concepts, ...classes];
  const lines: string[] = [];
  for (const name of names) {
    for (const caption of expandCaptions(name)) {
      lines.push(csvLine([caption, ...job.textEncoder.embed(caption)]));
    }
  }
  writeCsv(
    path.join(job.outDir, "captions.csv"),
    captionHeader(job.textEncoder.dim),
    lines
  );
  fs.writeFileSync(
    path.join(job.outDir, "templates.txt"),
    CAPTION_TEMPLATES.join("\n") + "\n"
  );
  if (job.head) {
    fs.writeFileSync(
      path.join(job.outDir, "head.json"),
      JSON.stringify({ A: job.head.A, b: job.head.b, classes })
    );
  }
  return { captionRows: lines.length };
}

function writeManifest(
  job: ExportJob,
  classes: string[],
  concepts: string[],
  hasAttributes: boolean
): void {
  const files: Record<string, unknown> = {
    embeddings: { vision: "embeddings_vision.csv", vlm: "embeddings_vlm.csv" },
    labels: "labels.csv",
    captions: "captions.csv",
    templates: "templates.txt",
  };
  if (hasAttributes) files.attributes = "attributes.csv";
  if (job.head) files.head = "head.json";
  const manifest = {
    dim: { vision: job.visionEncoder.dim, vlm: job.vlmEncoder.dim },
    class_names: classes,
    concept_names: concepts,
    files,
    splits: Object.fromEntries(job.splits.map((s) => [s, `${s}_ids.txt`])),
    exporter: {
      vision_model: job.visionEncoder.name,
      vlm_model: job.vlmEncoder.name,
      text_model: job.textEncoder.name,
    },
  };
  fs.writeFileSync(
    path.join(job.outDir, "manifest.json"),
    JSON.stringify(manifest, null, 2)
  );
}

function writeCsv(file: string, header: string, lines: string[]): void {
  fs.writeFileSync(file, header + "\n" + lines.join("\n") + "\n");
}
