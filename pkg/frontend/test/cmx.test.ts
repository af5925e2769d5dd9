import { describe, expect, it } from "vitest";

import {
  CmxFormatError,
  formatCmx,
  fromRows,
  makeMatrix,
  parseCmx,
  sameBits,
} from "../src/cmx.js";

describe("cmx round trips", () => {
  it("preserves every double bit-exactly through format/parse", () => {
    const m = makeMatrix(3, 2);
    const values = [
      0.1, -0.30000000000000004, 1e-308, -1e300, 12345.678901234567,
      Number.MIN_VALUE,
    ];
    for (let k = 0; k < m.re.length; k++) {
      m.re[k] = values[k];
      m.im[k] = -values[values.length - 1 - k];
    }
    const back = parseCmx(formatCmx(m));
    expect(sameBits(m, back)).toBe(true);
  });

  it("keeps the sign of negative zero", () => {
    const m = makeMatrix(1, 1);
    m.re[0] = -0;
    m.im[0] = 0;
    const text = formatCmx(m);
    expect(text).toBe("cmx 1 1\n-0 0\n");
    const back = parseCmx(text);
    expect(Object.is(back.re[0], -0)).toBe(true);
    expect(Object.is(back.im[0], 0)).toBe(true);
  });

  it("parses core-written layout with one pair per line", () => {
    const text = "cmx 2 2\n1.5 2.5\n-3 0\n0 0\n4.25 -1\n";
    const m = parseCmx(text);
    expect(m.rows).toBe(2);
    expect(m.cols).toBe(2);
    expect(Array.from(m.re)).toEqual([1.5, -3, 0, 4.25]);
    expect(Array.from(m.im)).toEqual([2.5, 0, 0, -1]);
  });

  it("tolerates arbitrary whitespace layout in the body", () => {
    const m = parseCmx("cmx 1 2\n  1 2\t3   4\n\n");
    expect(Array.from(m.re)).toEqual([1, 3]);
    expect(Array.from(m.im)).toEqual([2, 4]);
  });

  it("builds matrices from nested row lists", () => {
    const m = fromRows([
      [[1, 2], [3, 0]],
      [[0, -1], [5, 5]],
    ]);
    expect(m.rows).toBe(2);
    expect(m.re[3]).toBe(5);
    expect(m.im[2]).toBe(-1);
  });

  it.each([
    ["", "empty"],
    ["mat 2 2\n1 2\n", "wrong magic"],
    ["cmx 2\n1 2\n", "missing dimension"],
    ["cmx 0 2\n", "zero dimension"],
    ["cmx 1 1\n1\n", "odd scalar count"],
    ["cmx 1 1\n1 2 3\n", "extra scalars"],
    ["cmx 1 1\nx 2\n", "unparsable scalar"],
    ["cmx 1 1\nInfinity 0\n", "non-finite"],
    ["cmx 1 1\nNaN 0\n", "nan"],
  ])("rejects malformed document (%#: %s)", (text) => {
    expect(() => parseCmx(text as string)).toThrow(CmxFormatError);
  });

  it("refuses to format non-finite entries", () => {
    const m = makeMatrix(1, 1);
    m.re[0] = Infinity;
    expect(() => formatCmx(m)).toThrow(CmxFormatError);
  });
});
