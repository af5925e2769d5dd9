"""Full and truncated decompositions feeding the tangent kernels.

The default SVD provider is a self-contained one-sided Jacobi iteration,
accurate to a small multiple of machine precision at the matrix sizes this
package targets; ``platform`` providers delegate to numpy/LAPACK.  For
eigendecompositions the platform route is the default, with hermetic
fallbacks for Hermitian inputs (two-sided Jacobi) and for anything up to
4x4 (characteristic polynomial, Durand-Kerner roots, inverse iteration).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import GradConfig
from .errors import (
    DegenerateCut,
    NoConvergence,
    NonDiagonalizable,
    ShapeMismatch,
)
from .matcore import cmat, frob


@dataclass(frozen=True)
class FullSvd:
    """Thin SVD A = U diag(S) V^H with r = min(n, m) columns."""

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    def __post_init__(self) -> None:
        n, r = self.U.shape
        m, r2 = self.V.shape
        if r != r2 or self.S.shape != (r,) or r > min(n, m):
            raise ShapeMismatch("inconsistent SVD factor shapes")
        if np.any(self.S < 0) or np.any(np.diff(self.S) > 0):
            raise ValueError("singular values must be nonnegative and non-increasing")


@dataclass(frozen=True)
class SvdKept:
    """Leading t singular triples; the kept block is strictly positive."""

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    def __post_init__(self) -> None:
        t = self.S.shape[0] if self.S.ndim == 1 else -1
        if t < 1 or self.U.ndim != 2 or self.V.ndim != 2 \
                or self.U.shape[1] != t or self.V.shape[1] != t:
            raise ShapeMismatch("inconsistent kept-block shapes")
        if self.S[-1] <= 0.0:
            raise ValueError("kept singular values must be strictly positive")
        if np.any(np.diff(self.S) > 0):
            raise ValueError("kept singular values must be non-increasing")

    @property
    def t(self) -> int:
        return self.S.shape[0]


@dataclass(frozen=True)
class SvdDiscarded:
    """Trailing r - t singular triples; may be empty when t = r."""

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray

    def __post_init__(self) -> None:
        k = self.S.shape[0] if self.S.ndim == 1 else -1
        if k < 0 or self.U.ndim != 2 or self.V.ndim != 2 \
                or self.U.shape[1] != k or self.V.shape[1] != k:
            raise ShapeMismatch("inconsistent discarded-block shapes")
        if k and (np.any(self.S < 0) or np.any(np.diff(self.S) > 0)):
            raise ValueError("discarded singular values must be nonnegative, non-increasing")

    @property
    def count(self) -> int:
        return self.S.shape[0]


@dataclass(frozen=True)
class FullEvd:
    """Eigendecomposition A = X diag(lam) Y with Y = X^{-1}."""

    X: np.ndarray
    lam: np.ndarray
    Y: np.ndarray

    def __post_init__(self) -> None:
        n = self.lam.shape[0] if self.lam.ndim == 1 else -1
        if n < 1 or self.X.shape != (n, n) or self.Y.shape != (n, n):
            raise ShapeMismatch("inconsistent eigendecomposition shapes")


def orthonormal_complement(u: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of the columns of u.

    u must have orthonormal columns (j of them, possibly zero) in C^n;
    returns n x (n - j) by Gram-Schmidt over the standard basis, with a
    second orthogonalization pass for stability.
    """
    n = u.shape[0]
    have = [u[:, j] for j in range(u.shape[1])]
    out = []
    want = n - len(have)
    for i in range(n):
        if len(out) == want:
            break
        v = np.zeros(n, dtype=complex)
        v[i] = 1.0
        for _ in range(2):
            for w in have:
                v = v - w * np.vdot(w, v)
            for w in out:
                v = v - w * np.vdot(w, v)
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            out.append(v / nrm)
    if len(out) != want:
        raise ValueError("could not complete an orthonormal basis")
    return np.array(out).T if out else np.zeros((n, 0), dtype=complex)


def jacobi_svd(a: np.ndarray, *, max_sweeps: int = 30, tol_factor: float = 1e-14) -> FullSvd:
    """One-sided Jacobi SVD; the self-contained reference provider.

    Sweeps 2x2 unitary rotations over column pairs until all column Gram
    off-diagonals fall below tol_factor * ||A||_F^2; wide inputs go through
    the adjoint.  Zero singular values get orthonormal filler U columns.
    """
    a = cmat(a)
    n, m = a.shape
    if n < m:
        f = jacobi_svd(a.conj().T, max_sweeps=max_sweeps, tol_factor=tol_factor)
        return FullSvd(U=f.V, S=f.S, V=f.U)
    w = a.copy()
    v = np.eye(m, dtype=complex)
    scale = frob(a)
    if scale == 0.0:
        return FullSvd(U=np.eye(n, m, dtype=complex), S=np.zeros(m), V=v)
    thresh = tol_factor * scale * scale
    converged = False
    for _ in range(max_sweeps):
        rotated = False
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = np.vdot(w[:, p], w[:, q])
                if abs(apq) <= thresh:
                    continue
                rotated = True
                app = np.vdot(w[:, p], w[:, p]).real
                aqq = np.vdot(w[:, q], w[:, q]).real
                phi = apq / abs(apq)
                tau = (aqq - app) / (2.0 * abs(apq))
                sgn = 1.0 if tau >= 0 else -1.0
                t = sgn / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                phc = np.conj(phi)
                wp = w[:, p].copy()
                w[:, p] = c * wp - (s * phc) * w[:, q]
                w[:, q] = s * wp + (c * phc) * w[:, q]
                vp = v[:, p].copy()
                v[:, p] = c * vp - (s * phc) * v[:, q]
                v[:, q] = s * vp + (c * phc) * v[:, q]
        if not rotated:
            converged = True
            break
    if not converged:
        for p in range(m - 1):
            for q in range(p + 1, m):
                if abs(np.vdot(w[:, p], w[:, q])) > thresh:
                    raise NoConvergence("one-sided Jacobi SVD hit the sweep cap")
    sig = np.linalg.norm(w, axis=0)
    order = np.argsort(-sig, kind="stable")
    sig = sig[order]
    w = w[:, order]
    v = v[:, order]
    u = np.zeros((n, m), dtype=complex)
    tiny = np.finfo(float).eps * scale
    zero_cols = []
    for j in range(m):
        if sig[j] > tiny:
            u[:, j] = w[:, j] / sig[j]
        else:
            sig[j] = 0.0
            zero_cols.append(j)
    if zero_cols:
        live = [j for j in range(m) if j not in zero_cols]
        fill = orthonormal_complement(u[:, live])
        for idx, j in enumerate(zero_cols):
            u[:, j] = fill[:, idx]
    return FullSvd(U=u, S=sig, V=v)


def platform_svd(a: np.ndarray) -> FullSvd:
    """Thin SVD via the platform LAPACK routine."""
    u, s, vh = np.linalg.svd(cmat(a), full_matrices=False)
    return FullSvd(U=u, S=s, V=vh.conj().T)


SVD_PROVIDERS = {"jacobi": jacobi_svd, "platform": platform_svd}


def full_svd(a: np.ndarray, provider="jacobi") -> FullSvd:
    """Thin SVD through a named or callable provider."""
    fn = SVD_PROVIDERS[provider] if isinstance(provider, str) else provider
    return fn(a)


def truncate_svd(f: FullSvd, t: int, cfg: GradConfig | None = None):
    """Split a full SVD at rank t into kept and discarded blocks.

    Under the error policy, a relative gap below eps_deg at the cut (on the
    squared singular values, against the largest one) raises DegenerateCut;
    the Lorentzian policy lets degenerate cuts through so broadened
    pipelines stay finite.
    """
    cfg = cfg or GradConfig()
    r = f.S.shape[0]
    if not 1 <= t <= r:
        raise ValueError(f"t must lie in [1, {r}], got {t}")
    if f.S[t - 1] <= 0.0:
        raise ValueError("kept block would contain a zero singular value")
    if t < r and cfg.degeneracy_policy == "error":
        smax2 = f.S[0] ** 2
        if f.S[t - 1] ** 2 - f.S[t] ** 2 <= cfg.eps_deg * smax2:
            raise DegenerateCut(
                f"cut at t={t} splits singular values "
                f"{f.S[t - 1]:.17g} and {f.S[t]:.17g}")
    kept = SvdKept(U=f.U[:, :t].copy(), S=f.S[:t].copy(), V=f.V[:, :t].copy())
    disc = SvdDiscarded(U=f.U[:, t:].copy(), S=f.S[t:].copy(), V=f.V[:, t:].copy())
    return kept, disc


def _eig_order(lam: np.ndarray) -> np.ndarray:
    # non-increasing modulus; ties by decreasing real, then decreasing imag
    return np.lexsort((-lam.imag, -lam.real, -np.abs(lam)))


def _finalize_evd(a: np.ndarray, lam: np.ndarray, x: np.ndarray, invert) -> FullEvd:
    n = a.shape[0]
    order = _eig_order(lam)
    lam = lam[order]
    x = x[:, order]
    x = x / np.linalg.norm(x, axis=0)
    # a defective matrix can yield a basis whose inverse cancels exactly in
    # X Y - I, so gate on the condition number before trusting the inverse
    sx = np.linalg.svd(x, compute_uv=False)
    if sx[-1] == 0.0 or sx[0] / sx[-1] > 1e12:
        raise NonDiagonalizable("eigenvector matrix is too ill-conditioned")
    try:
        y = invert(x)
    except np.linalg.LinAlgError as exc:
        raise NonDiagonalizable("eigenvector matrix is singular") from exc
    if frob(x @ y - np.eye(n)) > 1e-10 * n:
        raise NonDiagonalizable("eigenvector matrix is too ill-conditioned")
    scale = max(frob(a), np.finfo(float).tiny)
    if frob(a @ x - x * lam) > 1e-10 * scale:
        raise NoConvergence("eigendecomposition residual above tolerance")
    return FullEvd(X=x, lam=lam, Y=y)


def platform_evd(a: np.ndarray) -> FullEvd:
    """Eigendecomposition via the platform LAPACK routine."""
    a = cmat(a)
    if a.shape[0] != a.shape[1]:
        raise ShapeMismatch("eigendecomposition needs a square matrix")
    lam, x = np.linalg.eig(a)
    return _finalize_evd(a, lam, x, np.linalg.inv)


def hermitian_jacobi_evd(a: np.ndarray, *, max_sweeps: int = 60) -> FullEvd:
    """Two-sided Jacobi eigendecomposition for Hermitian input."""
    a = cmat(a)
    n = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise ShapeMismatch("eigendecomposition needs a square matrix")
    if frob(a - a.conj().T) > 1e-12 * max(frob(a), np.finfo(float).tiny):
        raise ValueError("hermitian-jacobi provider needs a Hermitian matrix")
    w = 0.5 * (a + a.conj().T)
    x = np.eye(n, dtype=complex)
    scale = frob(w)
    if scale == 0.0:
        return FullEvd(X=x, lam=np.zeros(n, dtype=complex), Y=x.copy())
    thresh = 1e-14 * scale
    converged = False
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                z = w[p, q]
                if abs(z) <= thresh:
                    continue
                rotated = True
                phi = z / abs(z)
                tau = (w[q, q].real - w[p, p].real) / (2.0 * abs(z))
                sgn = 1.0 if tau >= 0 else -1.0
                t = sgn / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                rot = np.array([[c, s], [-s * np.conj(phi), c * np.conj(phi)]])
                w[:, [p, q]] = w[:, [p, q]] @ rot
                w[[p, q], :] = rot.conj().T @ w[[p, q], :]
                x[:, [p, q]] = x[:, [p, q]] @ rot
        if not rotated:
            converged = True
            break
    if not converged and np.max(np.abs(w - np.diag(np.diagonal(w)))) > thresh:
        raise NoConvergence("Hermitian Jacobi hit the sweep cap")
    lam = np.diagonal(w).real.astype(complex)
    return _finalize_evd(a, lam, x, lambda xx: xx.conj().T)


def _charpoly(a: np.ndarray) -> np.ndarray:
    # Faddeev-LeVerrier: monic coefficients [1, c1, ..., cn]
    n = a.shape[0]
    coeffs = [1.0 + 0.0j]
    m = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        am = a @ m
        ck = -np.trace(am) / k
        coeffs.append(ck)
        m = am + ck * np.eye(n, dtype=complex)
    return np.array(coeffs)


def _polyval(coeffs: np.ndarray, z: complex) -> complex:
    acc = 0.0 + 0.0j
    for c in coeffs:
        acc = acc * z + c
    return acc


def _durand_kerner(coeffs: np.ndarray, *, max_iter: int = 500) -> np.ndarray:
    deg = coeffs.shape[0] - 1
    radius = 1.0 + float(np.max(np.abs(coeffs[1:]))) if deg else 1.0
    z = radius * (0.4 + 0.9j) ** np.arange(1, deg + 1)
    for _ in range(max_iter):
        moved = 0.0
        for i in range(deg):
            denom = 1.0 + 0.0j
            for j in range(deg):
                if j != i:
                    d = z[i] - z[j]
                    denom *= d if d != 0 else 1e-40
            step = _polyval(coeffs, z[i]) / denom
            z[i] -= step
            moved = max(moved, abs(step))
        if moved <= 1e-15 * max(radius, 1.0):
            break
    return z


def _solve_small(b: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    # Gaussian elimination with partial pivoting; rhs may be a matrix
    b = b.astype(complex).copy()
    rhs = rhs.astype(complex).copy()
    if rhs.ndim == 1:
        rhs = rhs[:, None]
        squeeze = True
    else:
        squeeze = False
    n = b.shape[0]
    for col in range(n):
        piv = col + int(np.argmax(np.abs(b[col:, col])))
        if abs(b[piv, col]) == 0.0:
            raise np.linalg.LinAlgError("singular matrix in small solve")
        if piv != col:
            b[[col, piv]] = b[[piv, col]]
            rhs[[col, piv]] = rhs[[piv, col]]
        for row in range(col + 1, n):
            f = b[row, col] / b[col, col]
            b[row, col:] -= f * b[col, col:]
            rhs[row] -= f * rhs[col]
    out = np.zeros_like(rhs)
    for col in range(n - 1, -1, -1):
        out[col] = (rhs[col] - b[col, col + 1:] @ out[col + 1:]) / b[col, col]
    return out[:, 0] if squeeze else out


def _inverse_small(x: np.ndarray) -> np.ndarray:
    return _solve_small(x, np.eye(x.shape[0], dtype=complex))


def smalldim_evd(a: np.ndarray) -> FullEvd:
    """Hermetic eigendecomposition for matrices up to 4x4.

    Characteristic polynomial by Faddeev-LeVerrier, roots by Durand-Kerner,
    eigenvectors by shifted inverse iteration with a local Gaussian solve.
    """
    a = cmat(a)
    n = a.shape[0]
    if a.shape[0] != a.shape[1]:
        raise ShapeMismatch("eigendecomposition needs a square matrix")
    if n > 4:
        raise ValueError("smalldim provider is limited to 4x4")
    lam = _durand_kerner(_charpoly(a))
    scale = max(frob(a), 1.0)
    x = np.zeros((n, n), dtype=complex)
    for k in range(n):
        delta = 1e-10 * scale
        vec = None
        for _ in range(6):
            try:
                b = a - (lam[k] + delta) * np.eye(n, dtype=complex)
                vec = np.ones(n, dtype=complex) / math.sqrt(n)
                for _ in range(2):
                    vec = _solve_small(b, vec)
                    vec = vec / np.linalg.norm(vec)
                break
            except np.linalg.LinAlgError:
                delta *= 10.0
        if vec is None:
            raise NonDiagonalizable("inverse iteration failed for a small matrix")
        x[:, k] = vec
    return _finalize_evd(a, lam, x, _inverse_small)


EVD_PROVIDERS = {
    "platform": platform_evd,
    "hermitian-jacobi": hermitian_jacobi_evd,
    "smalldim": smalldim_evd,
}


def full_evd(a: np.ndarray, provider="platform") -> FullEvd:
    """Eigendecomposition through a named or callable provider.

    Eigenvalues come back sorted by non-increasing modulus (ties broken by
    decreasing real part, then decreasing imaginary part), eigenvectors
    normalized to unit 2-norm.  Matrices whose eigenbasis fails
    ||X Y - 1|| <= 1e-10 n are rejected as NonDiagonalizable.
    """
    fn = EVD_PROVIDERS[provider] if isinstance(provider, str) else provider
    return fn(a)
