"""Dense complex matrices: arithmetic helpers, seeded generation, cmx format.

The package-wide matrix carrier is a 2-D ``numpy.ndarray`` with dtype
``complex128`` in row-major order; spectra travel as 1-D ``float64``
arrays.  The helpers below validate shape and finiteness once at the
boundary; everything downstream assumes validated inputs and never
mutates an array it was handed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CmxFormatError, ShapeMismatch

MATRIX_KINDS = (
    "complex-gaussian",
    "real-gaussian",
    "prescribed-spectrum",
    "near-degenerate",
)


@dataclass(frozen=True)
class MatrixSeed:
    """Deterministic recipe for a generated test matrix."""

    seed: int
    kind: str = "complex-gaussian"
    spectrum: tuple[float, ...] | None = None
    gap: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in MATRIX_KINDS:
            raise ValueError(f"unknown matrix kind {self.kind!r}")
        if self.kind == "prescribed-spectrum" and not self.spectrum:
            raise ValueError("prescribed-spectrum needs a non-empty spectrum")
        if self.kind == "near-degenerate" and (self.gap is None or self.gap <= 0):
            raise ValueError("near-degenerate needs a positive gap")


def cmat(entries, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Validate and return a complex matrix (2-D complex128, row-major)."""
    a = np.array(entries, dtype=complex, order="C")
    if rows is not None:
        if cols is None:
            raise ValueError("rows and cols must be given together")
        try:
            a = a.reshape(rows, cols)
        except ValueError as exc:
            raise ShapeMismatch(f"cannot shape {a.size} entries as {rows}x{cols}") from exc
    if a.ndim != 2:
        raise ShapeMismatch(f"expected a matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def real_diag(values) -> np.ndarray:
    """Validate and return a real spectrum vector (1-D float64)."""
    s = np.array(values, dtype=float)
    if s.ndim != 1:
        raise ShapeMismatch(f"expected a vector, got ndim={s.ndim}")
    if not np.all(np.isfinite(s)):
        raise ValueError("spectrum entries must be finite")
    return s


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Entrywise product; operands must have identical shape."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeMismatch(f"hadamard needs equal shapes, got {a.shape} and {b.shape}")
    return a * b


def adjoint(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return np.asarray(a).conj().T


def frob(a: np.ndarray) -> float:
    """Frobenius norm."""
    return float(np.linalg.norm(a))


def haar_unitary(rng: np.random.Generator, k: int) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Gaussian with phase-fixed R."""
    z = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r).copy()
    d[d == 0] = 1.0
    return q * (d / np.abs(d))


def _near_degenerate_spectrum(r: int, gap: float) -> np.ndarray:
    if r < 2:
        raise ValueError("near-degenerate generation needs min(n, m) >= 2")
    # geometric ladder over two decades, then pin the top pair at the target
    # relative gap; the ladder keeps every other consecutive gap far larger
    ratio = 100.0 ** (-1.0 / max(r - 1, 1))
    sigma = 10.0 * ratio ** np.arange(r, dtype=float)
    sigma[1] = sigma[0] * (1.0 - gap)
    return sigma


def gen_matrix(spec: MatrixSeed, n: int, m: int) -> np.ndarray:
    """Deterministic matrix from a seed recipe; same inputs, same bytes."""
    if n < 1 or m < 1:
        raise ValueError(f"matrix dimensions must be positive, got {n}x{m}")
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "complex-gaussian":
        return (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))) / np.sqrt(2.0)
    if spec.kind == "real-gaussian":
        return rng.standard_normal((n, m)).astype(complex)
    r = min(n, m)
    if spec.kind == "prescribed-spectrum":
        sigma = np.sort(real_diag(spec.spectrum))[::-1]
        if sigma.size > r:
            raise ValueError(f"spectrum of length {sigma.size} exceeds min(n, m) = {r}")
        if np.any(sigma < 0):
            raise ValueError("prescribed singular values must be nonnegative")
    else:
        sigma = _near_degenerate_spectrum(r, float(spec.gap))
    k = sigma.size
    q1 = haar_unitary(rng, n)[:, :k]
    q2 = haar_unitary(rng, m)[:, :k]
    return (q1 * sigma) @ q2.conj().T


def _fmt(x: float) -> str:
    # 17 significant digits: exact binary64 round trip
    return format(float(x), ".17g")


def write_cmx(a: np.ndarray) -> str:
    """Serialize to the cmx text format (canonical: one "re im" pair per line)."""
    a = cmat(a)
    lines = [f"cmx {a.shape[0]} {a.shape[1]}"]
    for z in a.ravel(order="C"):
        lines.append(f"{_fmt(z.real)} {_fmt(z.imag)}")
    return "\n".join(lines) + "\n"


def read_cmx(text) -> np.ndarray:
    """Parse a cmx document; strict about header, entry count, and syntax."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise CmxFormatError(f"cmx data is not valid text: {exc}") from exc
    head, _, body = text.partition("\n")
    parts = head.split()
    if len(parts) != 3 or parts[0] != "cmx":
        raise CmxFormatError(f"bad cmx header: {head[:60]!r}")
    try:
        rows, cols = int(parts[1]), int(parts[2])
    except ValueError as exc:
        raise CmxFormatError(f"bad cmx dimensions in header: {head!r}") from exc
    if rows < 1 or cols < 1:
        raise CmxFormatError(f"bad cmx dimensions: {rows}x{cols}")
    tokens = body.split()
    want = 2 * rows * cols
    if len(tokens) != want:
        raise CmxFormatError(f"expected {want} scalars for {rows}x{cols}, got {len(tokens)}")
    try:
        vals = np.array([float(tok) for tok in tokens], dtype=float)
    except ValueError as exc:
        raise CmxFormatError(f"unparsable scalar: {exc}") from exc
    if not np.all(np.isfinite(vals)):
        raise CmxFormatError("non-finite entry in cmx data")
    return (vals[0::2] + 1j * vals[1::2]).reshape(rows, cols)


def save_cmx(path, a: np.ndarray) -> None:
    """Write a matrix to a cmx file."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(write_cmx(a))


def load_cmx(path) -> np.ndarray:
    """Read a matrix from a cmx file."""
    with open(path, "r", encoding="utf-8") as fh:
        return read_cmx(fh.read())
