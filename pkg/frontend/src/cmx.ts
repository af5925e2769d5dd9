/**
 * The cmx interchange format: a `cmx <rows> <cols>` header followed by
 * rows*cols whitespace-separated "re im" scalar pairs in row-major order.
 *
 * Matrices are dense complex arrays held as split re/im Float64Arrays so
 * every value survives the host -> core -> host trip bit-exactly.
 */

export interface ComplexMatrix {
  readonly rows: number;
  readonly cols: number;
  /** row-major, length rows*cols */
  readonly re: Float64Array;
  readonly im: Float64Array;
}

export class CmxFormatError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "CmxFormatError";
  }
}

export function makeMatrix(rows: number, cols: number): ComplexMatrix {
  if (!Number.isInteger(rows) || !Number.isInteger(cols) || rows < 1 || cols < 1) {
    throw new CmxFormatError(`invalid matrix shape ${rows}x${cols}`);
  }
  return { rows, cols, re: new Float64Array(rows * cols), im: new Float64Array(rows * cols) };
}

export function fromRows(rows: number[][][]): ComplexMatrix {
  const r = rows.length;
  const c = rows[0]?.length ?? 0;
  const out = makeMatrix(r, c);
  for (let i = 0; i < r; i++) {
    if (rows[i].length !== c) {
      throw new CmxFormatError("ragged rows");
    }
    for (let j = 0; j < c; j++) {
      out.re[i * c + j] = rows[i][j][0];
      out.im[i * c + j] = rows[i][j][1] ?? 0;
    }
  }
  return out;
}

function formatScalar(x: number): string {
  // toString is the shortest round-trip form; the core parses it back to
  // the identical double. Negative zero needs its sign kept explicitly.
  if (Object.is(x, -0)) {
    return "-0";
  }
  return x.toString();
}

export function formatCmx(m: ComplexMatrix): string {
  const n = m.rows * m.cols;
  if (m.re.length !== n || m.im.length !== n) {
    throw new CmxFormatError("matrix buffers do not match its shape");
  }
  const lines: string[] = [`cmx ${m.rows} ${m.cols}`];
  for (let k = 0; k < n; k++) {
    const re = m.re[k];
    const im = m.im[k];
    if (!Number.isFinite(re) || !Number.isFinite(im)) {
      throw new CmxFormatError(`non-finite entry at index ${k}`);
    }
    lines.push(`${formatScalar(re)} ${formatScalar(im)}`);
  }
  return lines.join("\n") + "\n";
}

export function parseCmx(text: string): ComplexMatrix {
  const firstBreak = text.indexOf("\n");
  const headerLine = (firstBreak < 0 ? text : text.slice(0, firstBreak)).trim();
  const header = headerLine.split(/\s+/);
  if (header.length !== 3 || header[0] !== "cmx") {
    throw new CmxFormatError(`bad header line ${JSON.stringify(headerLine)}`);
  }
  const rows = Number(header[1]);
  const cols = Number(header[2]);
  if (!Number.isInteger(rows) || !Number.isInteger(cols) || rows < 1 || cols < 1) {
    throw new CmxFormatError(`bad dimensions ${header[1]} x ${header[2]}`);
  }
  const body = firstBreak < 0 ? "" : text.slice(firstBreak + 1);
  const tokens = body.split(/\s+/).filter((t) => t.length > 0);
  const n = rows * cols;
  if (tokens.length !== 2 * n) {
    throw new CmxFormatError(
      `expected ${2 * n} scalars for ${rows}x${cols}, found ${tokens.length}`,
    );
  }
  const m = makeMatrix(rows, cols);
  for (let k = 0; k < n; k++) {
    const re = Number(tokens[2 * k]);
    const im = Number(tokens[2 * k + 1]);
    if (Number.isNaN(re) || Number.isNaN(im)) {
      throw new CmxFormatError(
        `unparsable scalar near ${JSON.stringify(tokens[2 * k])}`,
      );
    }
    if (!Number.isFinite(re) || !Number.isFinite(im)) {
      throw new CmxFormatError(`non-finite entry at index ${k}`);
    }
    m.re[k] = re;
    m.im[k] = im;
  }
  return m;
}

/** True when both matrices hold bit-identical doubles everywhere. */
export function sameBits(a: ComplexMatrix, b: ComplexMatrix): boolean {
  if (a.rows !== b.rows || a.cols !== b.cols) {
    return false;
  }
  for (let k = 0; k < a.re.length; k++) {
    if (!Object.is(a.re[k], b.re[k]) || !Object.is(a.im[k], b.im[k])) {
      return false;
    }
  }
  return true;
}

export function frobenius(m: ComplexMatrix): number {
  let s = 0;
  for (let k = 0; k < m.re.length; k++) {
    s += m.re[k] * m.re[k] + m.im[k] * m.im[k];
  }
  return Math.sqrt(s);
}
