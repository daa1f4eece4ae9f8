import { describe, expect, it } from "vitest";
import { csvEscape, csvLine, embeddingHeader, formatFloat } from "../src/csv";

describe("csv escaping", () => {
  it("quotes cells with commas and quotes", () => {
    expect(csvEscape("a photo of a {}.")).toBe("a photo of a {}.");
    expect(csvEscape("one, two")).toBe('"one, two"');
    expect(csvEscape('say "hi"')).toBe('"say ""hi"""');
  });

  it("keeps float round trips exact", () => {
    for (const x of [0.1, -0.0, 1e-300, 12345.6789, 1 / 3, 2 ** -52]) {
      expect(Number(formatFloat(x))).toBe(x);
    }
  });

  it("rejects non-finite values", () => {
    expect(() => formatFloat(NaN)).toThrow();
    expect(() => formatFloat(Infinity)).toThrow();
  });

  it("builds the documented headers", () => {
    expect(embeddingHeader(3)).toBe("id,d0,d1,d2");
    expect(csvLine(["x", 1.5, -2])).toBe("x,1.5,-2");
  });
});
