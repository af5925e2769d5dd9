"""Projected minimal-residual Krylov solver for shifted linear systems.

One routine serves both iterative tangent paths: an Arnoldi process with
full (twice-repeated) orthogonalization and a minimal-residual extraction
from the small projected least-squares problem.  On Hermitian operators
this coincides with MINRES; on general operators it is restarted-free
GMRES.  Every generated basis vector is re-projected onto the deflated
subspace, so roundoff drift out of the complement never accumulates.
"""

from __future__ import annotations

import numpy as np

from .errors import NearSingularShift, NoConvergence


def projected_minres(apply_op, rhs: np.ndarray, *, tol: float, max_iter: int,
                     project=None, label: str = "shifted system"):
    """Solve apply_op(x) = rhs restricted to the range of ``project``.

    apply_op must map the projected subspace (numerically) to itself.  The
    iteration runs past ``tol`` toward its roundoff floor when it can, so
    callers get accuracy headroom for free.  Raises NearSingularShift when
    the Krylov space closes on itself with a large residual (the shifted
    operator is singular on the subspace) and NoConvergence at the cap.

    Returns (x, relative_residual).
    """
    if project is None:
        project = lambda v: v
    b = project(np.asarray(rhs, dtype=complex))
    beta = float(np.linalg.norm(b))
    if beta == 0.0:
        return np.zeros_like(b), 0.0
    eps = np.finfo(float).eps
    hard = max(min(tol, 1e-13), 4.0 * eps)
    basis = [b / beta]
    cols: list[np.ndarray] = []
    kmax = int(min(max_iter, b.size))
    best_x = None
    best_res = np.inf
    stalled = 0
    closed = False
    for k in range(kmax):
        w = project(apply_op(basis[k]))
        h = np.zeros(k + 2, dtype=complex)
        for _ in range(2):
            for i in range(k + 1):
                c = np.vdot(basis[i], w)
                h[i] += c
                w = w - c * basis[i]
        hnext = float(np.linalg.norm(w))
        h[k + 1] = hnext
        cols.append(h)
        hbar = np.zeros((k + 2, k + 1), dtype=complex)
        for j, col in enumerate(cols):
            hbar[: col.shape[0], j] = col
        e1 = np.zeros(k + 2, dtype=complex)
        e1[0] = beta
        y = np.linalg.lstsq(hbar, e1, rcond=None)[0]
        res = float(np.linalg.norm(e1 - hbar @ y))
        if res < best_res:
            x = np.zeros_like(b)
            for i in range(k + 1):
                x = x + y[i] * basis[i]
            best_x = project(x)
            if res > 0.98 * best_res:
                stalled += 1
            else:
                stalled = 0
            best_res = res
        else:
            stalled += 1
        hscale = max(float(np.max(np.abs(hbar))), 1.0)
        if hnext <= 100.0 * eps * hscale:
            closed = True
            break
        if best_res <= hard * beta or stalled >= 5:
            break
        basis.append(w / hnext)
    rel = best_res / beta
    if rel <= tol:
        return best_x, rel
    if closed:
        raise NearSingularShift(
            f"{label}: Krylov space closed with residual {rel:.3e} above tolerance {tol:.3e}")
    raise NoConvergence(
        f"{label}: residual {rel:.3e} above tolerance {tol:.3e} after {kmax} iterations")
