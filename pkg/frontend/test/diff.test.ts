import { describe, expect, it } from "vitest";

import { labelDiff } from "../src/diff.js";

describe("labelDiff", () => {
  it("computes the symmetric difference", () => {
    const diff = labelDiff(["TREA"], ["TREA", "HSYS"]);
    expect(diff.common).toEqual(["TREA"]);
    expect(diff.onlyA).toEqual([]);
    expect(diff.onlyB).toEqual(["HSYS"]);
  });

  it("is empty for equal sets regardless of order", () => {
    const diff = labelDiff(["HSYS", "TREA"], ["TREA", "HSYS"]);
    expect(diff.onlyA).toEqual([]);
    expect(diff.onlyB).toEqual([]);
    expect(diff.common).toEqual(["HSYS", "TREA"]);
  });

  it("handles disjoint sets", () => {
    const diff = labelDiff(["DIAG"], ["NUTR"]);
    expect(diff.common).toEqual([]);
    expect(diff.onlyA).toEqual(["DIAG"]);
    expect(diff.onlyB).toEqual(["NUTR"]);
  });
});
