import { describe, expect, it } from "vitest";

import {
  addDecimalStrings,
  compareDecimal,
  formatMoney,
  isDecimalString,
  scaleByPercent,
  suggestRanges,
} from "../src/money.js";

describe("decimal strings", () => {
  it("adds exactly, no float drift", () => {
    expect(addDecimalStrings(["0.1", "0.2"])).toBe("0.3");
    expect(addDecimalStrings(["170", "112", "123", "100", "80", "45"])).toBe("630");
    expect(addDecimalStrings(["93.5", "74.5", "42"])).toBe("210");
    expect(addDecimalStrings([])).toBe("0");
  });

  it("compares exactly", () => {
    expect(compareDecimal("630", "630.0")).toBe(0);
    expect(compareDecimal("629.999999", "630")).toBe(-1);
    expect(compareDecimal("630.000001", "630")).toBe(1);
  });

  it("renders wire amounts verbatim", () => {
    expect(formatMoney("174.4712990936514")).toBe("174.4712990936514");
    expect(formatMoney("630", "k")).toBe("630 k");
  });

  it("validates decimal syntax", () => {
    expect(isDecimalString("61.6")).toBe(true);
    expect(isDecimalString("-3")).toBe(true);
    expect(isDecimalString("1e5")).toBe(false);
    expect(isDecimalString("12.")).toBe(false);
  });
});

describe("range helper", () => {
  it("reproduces the engine's documented example", () => {
    // tentative values 100 and 200 with a 30% spread
    const ranges = suggestRanges(["100", "200"], 30);
    expect(ranges).toEqual([
      { lower: "70", upper: "130" },
      { lower: "140", upper: "260" },
    ]);
    expect(addDecimalStrings(["100", "200"])).toBe("300");
  });

  it("matches the bundled inheritance bounds at 20%", () => {
    const ranges = suggestRanges(["180", "120", "130", "77", "80", "45"], 20);
    expect(ranges.map((r) => r.lower)).toEqual(["144", "96", "104", "61.6", "64", "36"]);
  });

  it("scales exactly", () => {
    expect(scaleByPercent("61.6", 100)).toBe("61.6");
    expect(scaleByPercent("0.1", 30)).toBe("0.03");
  });
});
