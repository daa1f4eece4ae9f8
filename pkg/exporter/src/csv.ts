/** CSV writing helpers matching the verification core's file formats. */

/** RFC-4180 escaping: quote when a cell contains comma, quote, or newline. */
export function csvEscape(cell: string): string {
  if (/[",\r\n]/.test(cell)) {
    return '"' + cell.replace(/"/g, '""') + '"';
  }
  return cell;
}

/**
 * Shortest round-trip decimal for a float. JS `String(number)` already
 * guarantees that `Number(String(x)) === x`, which is what the core's
 * readers rely on for bit-exact round trips.
 */
export function formatFloat(x: number): string {
  if (!Number.isFinite(x)) throw new Error(`non-finite value in export: ${x}`);
  if (Object.is(x, -0)) return "-0"; // String(-0) drops the sign
  return String(x);
}

export function csvLine(cells: (string | number)[]): string {
  return cells
    .map((c) => (typeof c === "number" ? formatFloat(c) : csvEscape(c)))
    .join(",");
}

export function embeddingHeader(dim: number): string {
  const cols = ["id"];
  for (let i = 0; i < dim; i++) cols.push(`d${i}`);
  return cols.join(",");
}

export function captionHeader(dim: number): string {
  const cols = ["caption"];
  for (let i = 0; i < dim; i++) cols.push(`d${i}`);
  return cols.join(",");
}
