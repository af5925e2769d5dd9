/**
 * A small forward-mode layer: dual numbers over complex matrices, a
 * primitive registry, and a central-difference utility for checking any
 * registered rule. The truncated-SVD and truncated-EVD primitives defer
 * both their values and their tangents to the core.
 */

import { ComplexMatrix, frobenius, makeMatrix } from "./cmx.js";
import {
  GradOptions,
  bindJvpEvd,
  bindJvpSvd,
  svdValues,
} from "./bridge.js";
import { runCore, withScratch } from "./core.js";

export interface Dual {
  primal: ComplexMatrix;
  tangent: ComplexMatrix;
}

export interface Primitive {
  name: string;
  /** primal outputs from primal inputs */
  apply(inputs: ComplexMatrix[]): ComplexMatrix[];
  /** output tangents from primal inputs and input tangents */
  jvp(inputs: ComplexMatrix[], tangents: ComplexMatrix[]): ComplexMatrix[];
}

const registry = new Map<string, Primitive>();

export function registerPrimitive(p: Primitive): void {
  if (registry.has(p.name)) {
    throw new Error(`primitive ${p.name} is already registered`);
  }
  registry.set(p.name, p);
}

export function getPrimitive(name: string): Primitive {
  const p = registry.get(name);
  if (!p) {
    throw new Error(`unknown primitive ${name}`);
  }
  return p;
}

/** Evaluate a primitive on dual numbers: primal and tangent in lockstep. */
export function callPrimitive(name: string, inputs: Dual[]): Dual[] {
  const p = getPrimitive(name);
  const primals = p.apply(inputs.map((d) => d.primal));
  const tangents = p.jvp(
    inputs.map((d) => d.primal),
    inputs.map((d) => d.tangent),
  );
  if (primals.length !== tangents.length) {
    throw new Error(`primitive ${name} returned mismatched outputs`);
  }
  return primals.map((primal, i) => ({ primal, tangent: tangents[i] }));
}

function zipMap(
  a: ComplexMatrix,
  b: ComplexMatrix,
  f: (x: number, y: number) => number,
): ComplexMatrix {
  if (a.rows !== b.rows || a.cols !== b.cols) {
    throw new Error("shape mismatch");
  }
  const out = makeMatrix(a.rows, a.cols);
  for (let k = 0; k < out.re.length; k++) {
    out.re[k] = f(a.re[k], b.re[k]);
    out.im[k] = f(a.im[k], b.im[k]);
  }
  return out;
}

export function add(a: ComplexMatrix, b: ComplexMatrix): ComplexMatrix {
  return zipMap(a, b, (x, y) => x + y);
}

export function scale(a: ComplexMatrix, s: number): ComplexMatrix {
  const out = makeMatrix(a.rows, a.cols);
  for (let k = 0; k < out.re.length; k++) {
    out.re[k] = s * a.re[k];
    out.im[k] = s * a.im[k];
  }
  return out;
}

/** Default central-difference step for checks: eps^(1/3) * (1 + ||A||_F). */
export function defaultStep(a: ComplexMatrix): number {
  return Math.cbrt(Number.EPSILON) * (1 + frobenius(a));
}

/**
 * Central differences of a vector-valued matrix function; the framework's
 * own checker for any registered tangent rule.
 */
export function numericalTangent(
  f: (m: ComplexMatrix) => number[],
  a: ComplexMatrix,
  da: ComplexMatrix,
  h?: number,
): number[] {
  const step = h ?? defaultStep(a);
  const plus = f(add(a, scale(da, step)));
  const minus = f(add(a, scale(da, -step)));
  if (plus.length !== minus.length) {
    throw new Error("quantity changed length under perturbation");
  }
  return plus.map((p, i) => (p - minus[i]) / (2 * step));
}

/** Truncated-SVD factors of a primal matrix, via the core. */
function svdFactors(a: ComplexMatrix, t: number): ComplexMatrix[] {
  return withScratch((scratch) => {
    const inPath = scratch.putMatrix("A.cmx", a);
    runCore([
      "svd",
      "--in", inPath,
      "--t", String(t),
      "--out-prefix", scratch.path("f."),
    ]);
    return [
      scratch.getMatrix("f.U.cmx"),
      scratch.getMatrix("f.S.cmx"),
      scratch.getMatrix("f.V.cmx"),
    ];
  });
}

/** Kept eigenvalues of a primal matrix, via the core. */
function evdValues(a: ComplexMatrix, p: number): ComplexMatrix[] {
  return withScratch((scratch) => {
    const inPath = scratch.putMatrix("A.cmx", a);
    runCore([
      "evd",
      "--in", inPath,
      "--p", String(p),
      "--out-prefix", scratch.path("f."),
    ]);
    return [scratch.getMatrix("f.lam.cmx")];
  });
}

export interface SvdPrimitiveConfig extends GradOptions {
  t: number;
  mode?: "explicit" | "iterative";
}

/** Register `name` as a truncated SVD of fixed rank with its tangent rule. */
export function registerTruncatedSvd(
  name: string,
  config: SvdPrimitiveConfig,
): void {
  const { t, mode = "explicit", ...options } = config;
  registerPrimitive({
    name,
    apply: (inputs) => svdFactors(inputs[0], t),
    jvp: (inputs, tangents) => {
      const { dU, dS, dV } = bindJvpSvd(inputs[0], tangents[0], t, mode, options);
      return [dU, dS, dV];
    },
  });
}

export interface EvdPrimitiveConfig extends GradOptions {
  p: number;
  gauge?: "max-abs" | "max-product";
}

/**
 * Register `name` as the kept-eigenvalue map of fixed order with its
 * tangent rule. Eigenvalues are gauge-invariant, so primal and tangent
 * form a coherent dual pair; eigenvector tangents live in the pivot
 * gauge and are reached directly through bindJvpEvd.
 */
export function registerKeptEigenvalues(
  name: string,
  config: EvdPrimitiveConfig,
): void {
  const { p, gauge = "max-product", ...options } = config;
  registerPrimitive({
    name,
    apply: (inputs) => evdValues(inputs[0], p),
    jvp: (inputs, tangents) => {
      const { dlam } = bindJvpEvd(inputs[0], tangents[0], p, gauge, options);
      return [dlam];
    },
  });
}

/** Singular values only, as plain numbers; handy for FD smoke checks. */
export function singularValues(a: ComplexMatrix, t?: number): number[] {
  return svdValues(a, t);
}
