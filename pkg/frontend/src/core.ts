/**
 * Subprocess gateway to the core package. Every exchange goes through cmx
 * files and the command line; no numerics live on this side. Each call
 * runs in its own scratch directory and child process, so the host
 * runtime holds no shared state while the core computes.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { ComplexMatrix, formatCmx, parseCmx } from "./cmx.js";

/** Numerical-precondition failure inside the core, exit code 1. */
export class CoreError extends Error {
  readonly coreName: string;

  constructor(coreName: string, message: string) {
    super(`${coreName}: ${message}`);
    this.name = "CoreError";
    this.coreName = coreName;
  }
}

/** Usage or I/O failure reported by the core, exit code 2. */
export class CoreUsageError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "CoreUsageError";
  }
}

export interface CoreOptions {
  /** interpreter used to launch the core; defaults to python3 */
  python?: string;
}

export function runCore(args: string[], options: CoreOptions = {}): string {
  const python = options.python ?? "python3";
  const proc = spawnSync(python, ["-m", "truncgrad", ...args], {
    encoding: "utf8",
    maxBuffer: 64 * 1024 * 1024,
  });
  if (proc.error) {
    throw proc.error;
  }
  if (proc.status === 0) {
    return proc.stdout;
  }
  const stderr = (proc.stderr ?? "").trim();
  if (proc.status === 1) {
    const match = stderr.match(/^error: (\w+): ([\s\S]*)$/m);
    if (match) {
      throw new CoreError(match[1], match[2]);
    }
    throw new CoreError("TruncgradError", stderr);
  }
  if (proc.status === 2) {
    throw new CoreUsageError(stderr.replace(/^error: /, ""));
  }
  throw new Error(`core exited with status ${proc.status}: ${stderr}`);
}

/** Scratch directory handle for marshalling one core call. */
export class Scratch {
  readonly dir: string;

  constructor() {
    this.dir = mkdtempSync(join(tmpdir(), "truncgrad-"));
  }

  path(name: string): string {
    return join(this.dir, name);
  }

  putMatrix(name: string, m: ComplexMatrix): string {
    const p = this.path(name);
    writeFileSync(p, formatCmx(m), { encoding: "ascii" });
    return p;
  }

  getMatrix(name: string): ComplexMatrix {
    return parseCmx(readFileSync(this.path(name), { encoding: "ascii" }));
  }

  getBytes(name: string): Buffer {
    return readFileSync(this.path(name));
  }

  dispose(): void {
    rmSync(this.dir, { recursive: true, force: true });
  }
}

export function withScratch<T>(fn: (scratch: Scratch) => T): T {
  const scratch = new Scratch();
  try {
    return fn(scratch);
  } finally {
    scratch.dispose();
  }
}
