/**
 * The three bound entry points: truncated-SVD tangents (explicit or
 * iterative) and truncated-EVD tangents. Results are numerically
 * identical to driving the core CLI by hand on the same inputs, because
 * that is exactly what happens underneath.
 */

import { ComplexMatrix } from "./cmx.js";
import { CoreOptions, runCore, withScratch } from "./core.js";

/** Mirrors the core release this bridge is built against. */
export const VERSION = "0.1.0";

export type SvdMode = "explicit" | "iterative";
export type GaugePolicy = "max-abs" | "max-product";

export interface GradOptions extends CoreOptions {
  /** diagonal phase split between dU and dV, default 0.5 */
  alpha?: number;
  /** relative degeneracy threshold, default 1e-12 */
  epsDeg?: number;
  /** Lorentzian broadening width; degenerate gaps error when omitted */
  broaden?: number;
  /** relative residual target for the iterative path's shifted solves */
  solverTol?: number;
}

export interface SvdJvp {
  dU: ComplexMatrix;
  dS: ComplexMatrix;
  dV: ComplexMatrix;
}

export interface EvdJvp {
  dlam: ComplexMatrix;
  dx: ComplexMatrix;
}

function gradFlags(options: GradOptions): string[] {
  const flags: string[] = [];
  if (options.alpha !== undefined) {
    flags.push("--alpha", String(options.alpha));
  }
  if (options.epsDeg !== undefined) {
    flags.push("--eps-deg", String(options.epsDeg));
  }
  if (options.broaden !== undefined) {
    flags.push("--broaden", String(options.broaden));
  }
  if (options.solverTol !== undefined) {
    flags.push("--solver-tol", String(options.solverTol));
  }
  return flags;
}

export function bindJvpSvd(
  a: ComplexMatrix,
  da: ComplexMatrix,
  t: number,
  mode: SvdMode = "explicit",
  options: GradOptions = {},
): SvdJvp {
  return withScratch((scratch) => {
    const inPath = scratch.putMatrix("A.cmx", a);
    const tanPath = scratch.putMatrix("dA.cmx", da);
    runCore(
      [
        "jvp-svd",
        "--in", inPath,
        "--tangent", tanPath,
        "--t", String(t),
        "--mode", mode,
        "--out-prefix", scratch.path("out."),
        ...gradFlags(options),
      ],
      options,
    );
    return {
      dU: scratch.getMatrix("out.dU.cmx"),
      dS: scratch.getMatrix("out.dS.cmx"),
      dV: scratch.getMatrix("out.dV.cmx"),
    };
  });
}

export function bindJvpEvd(
  a: ComplexMatrix,
  da: ComplexMatrix,
  p: number,
  gauge: GaugePolicy = "max-product",
  options: GradOptions = {},
): EvdJvp {
  return withScratch((scratch) => {
    const inPath = scratch.putMatrix("A.cmx", a);
    const tanPath = scratch.putMatrix("dA.cmx", da);
    runCore(
      [
        "jvp-evd",
        "--in", inPath,
        "--tangent", tanPath,
        "--p", String(p),
        "--gauge", gauge,
        "--out-prefix", scratch.path("out."),
        ...gradFlags(options),
      ],
      options,
    );
    return {
      dlam: scratch.getMatrix("out.dlam.cmx"),
      dx: scratch.getMatrix("out.dx.cmx"),
    };
  });
}

/** Leading singular values of a host matrix, via the core. */
export function svdValues(
  a: ComplexMatrix,
  t?: number,
  options: CoreOptions = {},
): number[] {
  return withScratch((scratch) => {
    const inPath = scratch.putMatrix("A.cmx", a);
    const args = ["svd", "--in", inPath];
    if (t !== undefined) {
      args.push("--t", String(t));
    }
    const out = runCore(args, options);
    return out
      .trim()
      .split("\n")
      .map((line) => Number(line));
  });
}

/** Deterministic core-generated test matrix, via the gen subcommand. */
export function genMatrix(
  kind: string,
  opts: {
    n?: number;
    m?: number;
    seed?: number;
    spectrum?: number[];
    gap?: number;
  } = {},
  options: CoreOptions = {},
): ComplexMatrix {
  return withScratch((scratch) => {
    const args = ["gen", "--kind", kind, "--out", scratch.path("A.cmx")];
    if (opts.n !== undefined) {
      args.push("--n", String(opts.n));
    }
    if (opts.m !== undefined) {
      args.push("--m", String(opts.m));
    }
    if (opts.seed !== undefined) {
      args.push("--seed", String(opts.seed));
    }
    if (opts.spectrum !== undefined) {
      args.push("--spectrum", opts.spectrum.join(","));
    }
    if (opts.gap !== undefined) {
      args.push("--gap", String(opts.gap));
    }
    runCore(args, options);
    return scratch.getMatrix("A.cmx");
  });
}
