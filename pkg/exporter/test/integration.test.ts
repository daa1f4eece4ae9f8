/** End-to-end: exported files must drive the Python verification toolkit.
 *
 * Skipped when the `conspec` CLI is not on PATH (the exporter itself has
 * no runtime dependency on it).
 */

import { spawnSync } from "child_process";
import * as fs from "fs";
import * as os from "os";
import * as path from "path";
import { beforeAll, describe, expect, it } from "vitest";
import { HashedImageEncoder, HashedTextEncoder, TfImageEncoder } from "../src/encoders";
import { exportCaptionsAndHead, exportEmbeddings } from "../src/export";
import { loadEmbeddingModel } from "../src/tfmodel";
import { buildMockDataset, buildTinyClassifier } from "./helpers";

function conspecAvailable(): boolean {
  return spawnSync("conspec", ["--version"], { encoding: "utf-8" }).status === 0;
}

const available = conspecAvailable();
const maybe = available ? describe : describe.skip;

maybe("conspec consumes exported files", () => {
  let out: string;

  beforeAll(async () => {
    const base = fs.mkdtempSync(path.join(os.tmpdir(), "exporter-int-"));
    const datasetRoot = path.join(base, "dataset");
    const modelDir = path.join(base, "model");
    out = path.join(base, "export");
    buildMockDataset(datasetRoot, 8);
    await buildTinyClassifier(modelDir, 8, 2);
    const model = await loadEmbeddingModel(modelDir);
    const job = {
      datasetRoot,
      splits: ["train", "test"],
      outDir: out,
      batchSize: 8,
      visionEncoder: new TfImageEncoder(model, "tfjs:tiny"),
      vlmEncoder: new HashedImageEncoder(16, 23),
      textEncoder: new HashedTextEncoder(16),
      head: model.head,
    };
    const summary = await exportEmbeddings(job);
    await exportCaptionsAndHead(job, summary.classes, summary.concepts);
  }, 120_000);

  it("fit-map runs on the exported manifest", () => {
    const res = spawnSync(
      "conspec",
      ["fit-map", "--manifest", path.join(out, "manifest.json"),
       "--out", path.join(out, "map.json")],
      { encoding: "utf-8" }
    );
    expect(res.stderr).toBe("");
    expect(res.status).toBe(0);
    expect(fs.existsSync(path.join(out, "map.json"))).toBe(true);
  });

  it("validate and verify run end to end", () => {
    const validate = spawnSync(
      "conspec",
      ["validate", "--manifest", path.join(out, "manifest.json"),
       "--class", "bright", "--out", path.join(out, "report.csv")],
      { encoding: "utf-8" }
    );
    expect(validate.stderr).toBe("");
    expect(validate.status).toBe(0);

    const specFile = path.join(out, "bright.spec");
    fs.writeFileSync(specFile, "predict(bright) => gt(glow, shadow)\n");
    const verify = spawnSync(
      "conspec",
      ["verify", "--manifest", path.join(out, "manifest.json"),
       "--class", "bright", "--region", "A1", "--specs", specFile,
       "--out-dir", path.join(out, "verify"), "--deterministic"],
      { encoding: "utf-8" }
    );
    expect(verify.stderr).toBe("");
    expect(verify.status).toBe(0);
    const report = fs
      .readFileSync(path.join(out, "verify", "report.jsonl"), "utf-8")
      .trim()
      .split("\n")
      .map((l) => JSON.parse(l));
    expect(report.length).toBe(1);
    expect(["proved", "counterexample", "vacuous"]).toContain(report[0].outcome);
  }, 60_000);
});

it("integration suite reports availability", () => {
  // visible marker in test output for whether the cross-package run happened
  console.log(`conspec CLI available: ${available}`);
  expect(typeof available).toBe("boolean");
});
