import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, describe, expect, it } from "vitest";

import {
  CoreError,
  CoreUsageError,
  bindJvpEvd,
  bindJvpSvd,
  fromRows,
  genMatrix,
  parseCmx,
  sameBits,
  svdValues,
} from "../src/index.js";

const scratchDirs: string[] = [];

function scratchDir(): string {
  const dir = mkdtempSync(join(tmpdir(), "bridge-test-"));
  scratchDirs.push(dir);
  return dir;
}

afterAll(() => {
  for (const dir of scratchDirs) {
    rmSync(dir, { recursive: true, force: true });
  }
});

function cli(args: string[]): string {
  return execFileSync("python3", ["-m", "truncgrad", ...args], {
    encoding: "utf8",
  });
}

describe("bound truncated-SVD tangents", () => {
  it("reproduces the worked diagonal example exactly", () => {
    const a = fromRows([
      [[3, 0], [0, 0], [0, 0]],
      [[0, 0], [2, 0], [0, 0]],
      [[0, 0], [0, 0], [1, 0]],
    ]);
    const ones = fromRows([
      [[1, 0], [1, 0], [1, 0]],
      [[1, 0], [1, 0], [1, 0]],
      [[1, 0], [1, 0], [1, 0]],
    ]);
    const { dS } = bindJvpSvd(a, ones, 2);
    expect(dS.rows).toBe(2);
    expect(dS.cols).toBe(1);
    expect(Array.from(dS.re)).toEqual([1, 1]);
    expect(Array.from(dS.im)).toEqual([0, 0]);
  });

  it("matches direct CLI runs bit-for-bit on 10 shared instances", () => {
    const shapes: Array<[number, number]> = [
      [4, 4], [5, 5], [6, 6], [6, 4], [7, 5],
      [4, 6], [5, 7], [8, 8], [9, 6], [6, 9],
    ];
    for (let i = 0; i < shapes.length; i++) {
      const [n, m] = shapes[i];
      const dir = scratchDir();
      const aPath = join(dir, "A.cmx");
      const daPath = join(dir, "dA.cmx");
      const r = Math.min(n, m);
      const spectrum = Array.from({ length: r }, (_, k) => r - k + 0.5 * (k % 2));
      cli([
        "gen", "--kind", "prescribed", "--spectrum", spectrum.join(","),
        "--n", String(n), "--m", String(m), "--seed", String(100 + i),
        "--out", aPath,
      ]);
      cli([
        "gen", "--kind", "complex-gaussian", "--n", String(n),
        "--m", String(m), "--seed", String(200 + i), "--out", daPath,
      ]);
      const t = 1 + (i % (r - 1));
      const mode = i % 2 === 0 ? "explicit" : "iterative";
      cli([
        "jvp-svd", "--in", aPath, "--tangent", daPath, "--t", String(t),
        "--mode", mode, "--out-prefix", join(dir, "ref."),
      ]);
      const a = parseCmx(readFileSync(aPath, "ascii"));
      const da = parseCmx(readFileSync(daPath, "ascii"));
      const bound = bindJvpSvd(a, da, t, mode);
      const refDU = parseCmx(readFileSync(join(dir, "ref.dU.cmx"), "ascii"));
      const refDS = parseCmx(readFileSync(join(dir, "ref.dS.cmx"), "ascii"));
      const refDV = parseCmx(readFileSync(join(dir, "ref.dV.cmx"), "ascii"));
      expect(sameBits(bound.dU, refDU)).toBe(true);
      expect(sameBits(bound.dS, refDS)).toBe(true);
      expect(sameBits(bound.dV, refDV)).toBe(true);
    }
  }, 240_000);

  it("keeps dS fixed but moves dU/dV diagonals when alpha changes", () => {
    const a = genMatrix("complex-gaussian", { n: 4, m: 4, seed: 11 });
    const da = genMatrix("complex-gaussian", { n: 4, m: 4, seed: 12 });
    const half = bindJvpSvd(a, da, 2, "explicit", { alpha: 0.5 });
    const full = bindJvpSvd(a, da, 2, "explicit", { alpha: 1.0 });
    expect(sameBits(half.dS, full.dS)).toBe(true);
    expect(sameBits(half.dU, full.dU)).toBe(false);
    expect(sameBits(half.dV, full.dV)).toBe(false);
  }, 60_000);

  it("surfaces core numerical errors with the core error name", () => {
    const a = genMatrix("near-degenerate", { n: 4, m: 4, seed: 0, gap: 1e-14 });
    const da = genMatrix("complex-gaussian", { n: 4, m: 4, seed: 1 });
    try {
      bindJvpSvd(a, da, 2);
      expect.unreachable("degenerate kept pair must raise");
    } catch (err) {
      expect(err).toBeInstanceOf(CoreError);
      expect((err as CoreError).coreName).toBe("DegenerateSpectrum");
    }
    // broadened config lets the same instance through
    const tan = bindJvpSvd(a, da, 2, "explicit", { broaden: 1e-6 });
    expect(tan.dU.rows).toBe(4);
  }, 60_000);

  it("maps usage failures to CoreUsageError", () => {
    const a = genMatrix("complex-gaussian", { n: 3, m: 3, seed: 4 });
    const da = genMatrix("complex-gaussian", { n: 3, m: 3, seed: 5 });
    expect(() => bindJvpSvd(a, da, 9)).toThrow(CoreUsageError);
  }, 60_000);
});

describe("bound truncated-EVD tangents", () => {
  it("computes dlam for the identity direction and zeros pivot rows", () => {
    const a = fromRows([
      [[2, 0], [1, 0]],
      [[0, 0], [-1, 0]],
    ]);
    const eye = fromRows([
      [[1, 0], [0, 0]],
      [[0, 0], [1, 0]],
    ]);
    const { dlam, dx } = bindJvpEvd(a, eye, 1, "max-abs");
    expect(dlam.rows).toBe(1);
    expect(dlam.re[0]).toBeCloseTo(1, 12);
    expect(dlam.im[0]).toBeCloseTo(0, 12);
    // exactly one row of dx is pinned to exactly zero by the gauge
    const zeroRows = [0, 1].filter(
      (i) => dx.re[i] === 0 && dx.im[i] === 0,
    );
    expect(zeroRows.length).toBeGreaterThanOrEqual(1);
  });
});

describe("core value helpers", () => {
  it("reads singular values off the core", () => {
    const a = genMatrix("prescribed", { spectrum: [3, 2, 1] });
    const s = svdValues(a);
    expect(s.length).toBe(3);
    expect(s[0]).toBeCloseTo(3, 10);
    expect(s[1]).toBeCloseTo(2, 10);
    expect(s[2]).toBeCloseTo(1, 10);
  }, 60_000);
});
