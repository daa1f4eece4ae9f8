/** Dataset discovery: `<root>/<split>/<class>/<image>` plus annotations.
 *
 * Row ids are `<split>/<class>/<stem>`, used consistently across every
 * exported file.  An optional `attributes.csv` at the dataset root
 * (header `id,<concept>,...`) carries binary concept annotations keyed by
 * those ids.
 */

import * as fs from "fs";
import * as path from "path";
import { IMAGE_EXTENSIONS } from "./images";

export interface DatasetRow {
  id: string;
  split: string;
  label: string;
  file: string;
}

export function scanSplit(root: string, split: string): DatasetRow[] {
  const splitDir = path.join(root, split);
  if (!fs.existsSync(splitDir)) {
    throw new Error(`dataset has no split directory: ${splitDir}`);
  }
  const rows: DatasetRow[] = [];
  const classes = fs
    .readdirSync(splitDir, { withFileTypes: true })
    .filter((d) => d.isDirectory())
    .map((d) => d.name)
    .sort();
  for (const cls of classes) {
    const clsDir = path.join(splitDir, cls);
    const files = fs
      .readdirSync(clsDir)
      .filter((f) => IMAGE_EXTENSIONS.includes(path.extname(f).toLowerCase()))
      .sort();
    for (const f of files) {
      const stem = f.slice(0, f.length - path.extname(f).length);
      rows.push({
        id: `${split}/${cls}/${stem}`,
        split,
        label: cls,
        file: path.join(clsDir, f),
      });
    }
  }
  if (rows.length === 0) {
    throw new Error(`split '${split}' of ${root} contains no images`);
  }
  return rows;
}

export function classNames(root: string, splits: string[]): string[] {
  const names = new Set<string>();
  for (const split of splits) {
    const splitDir = path.join(root, split);
    for (const d of fs.readdirSync(splitDir, { withFileTypes: true })) {
      if (d.isDirectory()) names.add(d.name);
    }
  }
  return [...names].sort();
}

export interface AttributeTable {
  concepts: string[];
  byId: Map<string, number[]>;
}

export function readAttributeTable(root: string): AttributeTable | null {
  const file = path.join(root, "attributes.csv");
  if (!fs.existsSync(file)) return null;
  const lines = fs.readFileSync(file, "utf-8").split(/\r?\n/).filter((l) => l.length);
  const header = lines[0].split(",");
  if (header[0] !== "id" || header.length < 2) {
    throw new Error(`${file}: expected header id,<concept>,...`);
  }
  const concepts = header.slice(1);
  const byId = new Map<string, number[]>();
  for (const line of lines.slice(1)) {
    const cells = line.split(",");
    if (cells.length !== header.length) {
      throw new Error(`${file}: ragged row for id ${cells[0]}`);
    }
    byId.set(
      cells[0],
      cells.slice(1).map((c) => {
        if (c !== "0" && c !== "1") throw new Error(`${file}: non-binary cell ${c}`);
        return Number(c);
      })
    );
  }
  return { concepts, byId };
}
