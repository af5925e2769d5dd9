"""Iterative-solver path: tangents of a truncated SVD without the
discarded factors.

The discarded-space contribution to (dU, dV) solves t shifted Hermitian
systems

    (s_j^2 - A A^H) x_j = rhs_j        (n <= m, mirrored otherwise)

deflated to the orthogonal complement of the kept singular subspace; the
identity U_perp S_perp V_perp^H = (1 - U U^H) A = A (1 - V V^H) supplies
every needed product without materializing a single discarded factor.
A thick-restarted Golub-Kahan-Lanczos routine provides the kept triples
for fully matrix-free pipelines.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import GradConfig
from .decomp import SvdKept, jacobi_svd
from .errors import DegenerateCut, NearSingularShift, NoConvergence, ShapeMismatch
from .krylov import projected_minres
from .matcore import MatrixSeed, cmat, frob
from .tsvd import SvdTangent, _check_direction, ds_kept, kept_rotations


@dataclass(frozen=True)
class ShiftedSystem:
    """One deflated shifted solve: (shift - operator) x = rhs on range(projector)."""

    operator: Callable[[np.ndarray], np.ndarray]
    shift: complex
    projector: Callable[[np.ndarray], np.ndarray]
    rhs: np.ndarray

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self.projector(self.shift * v - self.operator(v))


def project_discarded(a: np.ndarray, kept: SvdKept, side: str) -> Callable:
    """Action of the discarded low-rank remainder U_perp S_perp V_perp^H.

    side="left" applies (1 - U U^H) A; side="right" applies A (1 - V V^H).
    Both agree on every vector up to roundoff.
    """
    a = cmat(a)
    if side == "left":
        u = kept.U
        return lambda x: (lambda ax: ax - u @ (u.conj().T @ ax))(a @ x)
    if side == "right":
        v = kept.V
        return lambda x: a @ (x - v @ (v.conj().T @ x))
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def solve_sylvester_projected(system: ShiftedSystem,
                              cfg: GradConfig | None = None) -> np.ndarray:
    """Krylov solve of one deflated shifted system (see ``krylov``)."""
    cfg = cfg or GradConfig()
    rhs = np.asarray(system.rhs, dtype=complex)
    nrm = float(np.linalg.norm(rhs))
    if nrm > 0.0 and float(np.linalg.norm(system.projector(rhs) - rhs)) > 1e-12 * nrm:
        raise ValueError("right-hand side is not in the range of the projector")
    x, _ = projected_minres(
        lambda v: system.shift * v - system.operator(v), rhs,
        tol=cfg.solver_tol, max_iter=cfg.solver_max_iter,
        project=system.projector,
        label=f"shift {complex(system.shift):.6g}")
    return x


def solve_sylvester_dense(system: ShiftedSystem, *,
                          eps_deg: float = 1e-12) -> np.ndarray:
    """Dense complement-basis direct solve; the oracle for the Krylov path.

    Materializes the projector and operator column by column, limited to
    dimension 64 by design.
    """
    d = int(np.asarray(system.rhs).shape[0])
    if d > 64:
        raise ValueError("dense fallback is limited to dimension 64")
    eye = np.eye(d, dtype=complex)
    pmat = np.column_stack([system.projector(eye[:, j]) for j in range(d)])
    omat = np.column_stack(
        [system.shift * eye[:, j] - system.operator(eye[:, j]) for j in range(d)])
    uu, ss, _ = np.linalg.svd(pmat)
    rank = int(np.sum(ss > 1e-8))
    w = uu[:, :rank]
    small = w.conj().T @ omat @ w
    sv = np.linalg.svd(small, compute_uv=False)
    scale = max(float(sv[0]), abs(system.shift), np.finfo(float).tiny)
    if rank == 0 or float(sv[-1]) <= eps_deg * scale:
        raise NearSingularShift(
            f"shift {complex(system.shift):.6g} is singular on the deflated subspace")
    y = np.linalg.solve(small, w.conj().T @ np.asarray(system.rhs, dtype=complex))
    return w @ y


def _solve_columns(operator, shifts, projector, rhs_mat, cfg):
    out = np.zeros_like(rhs_mat)
    for j in range(rhs_mat.shape[1]):
        sysj = ShiftedSystem(operator=operator, shift=shifts[j],
                             projector=projector, rhs=rhs_mat[:, j])
        out[:, j] = solve_sylvester_projected(sysj, cfg)
    return out


def jvp_truncated_svd_iterative(a: np.ndarray, kept: SvdKept, da: np.ndarray,
                                cfg: GradConfig | None = None) -> SvdTangent:
    """Assemble (dU, dS, dV) from A and the kept factors alone.

    The kept-block rotations are shared with the explicit path; the
    discarded-space blocks come back in full-space coordinates (n x t and
    m x t), orthogonal to the kept subspaces within solver accuracy.
    """
    cfg = cfg or GradConfig()
    a = cmat(a)
    da = _check_direction(kept, da)
    if a.shape != da.shape:
        raise ShapeMismatch(f"matrix is {a.shape}, direction is {da.shape}")
    n, m = a.shape
    u, s, v = kept.U, kept.S, kept.V
    ds = ds_kept(kept, da)
    du1, dv1 = kept_rotations(kept, da, cfg)

    def proj_u(x):
        return x - u @ (u.conj().T @ x)

    def proj_v(x):
        return x - v @ (v.conj().T @ x)

    dav = proj_u(da @ v)
    dahu = proj_v(da.conj().T @ u)
    if n <= m:
        rhs = proj_u(dav * s[None, :] + a @ dahu)

        def op(x):
            return a @ (a.conj().T @ x)

        du2 = _solve_columns(op, s ** 2, proj_u, rhs, cfg)
        dv2 = dahu / s[None, :] + (a.conj().T @ du2) / s[None, :]
    else:
        rhs = proj_v(dahu * s[None, :] + a.conj().T @ dav)

        def op(x):
            return a.conj().T @ (a @ x)

        dv2 = _solve_columns(op, s ** 2, proj_v, rhs, cfg)
        du2 = dav / s[None, :] + (a @ dv2) / s[None, :]
    du = u @ du1 + du2
    dv = v @ dv1 + dv2
    return SvdTangent(dU=du, dS=ds, dV=dv, du1=du1, dv1=dv1, du2=du2, dv2=dv2)


def _unit(x: np.ndarray) -> np.ndarray:
    nrm = float(np.linalg.norm(x))
    return x / nrm if nrm > 0 else x


def _orth_against(x: np.ndarray, basis: np.ndarray) -> np.ndarray:
    for _ in range(2):
        if basis.shape[1]:
            x = x - basis @ (basis.conj().T @ x)
    return x


def _canonical_phase(u: np.ndarray, v: np.ndarray):
    # largest-modulus entry of u made real positive; v slaved to the same phase
    i = int(np.argmax(np.abs(u)))
    piv = u[i]
    if abs(piv) == 0.0:
        return u, v
    ph = np.conj(piv) / abs(piv)
    return u * ph, v * ph


def gkl_partial_svd(a: np.ndarray, t: int, *, max_iter: int = 60,
                    tol: float = 1e-12, seed: int | MatrixSeed = 0,
                    eps_deg: float = 1e-12) -> SvdKept:
    """Leading t singular triples by thick-restarted Golub-Kahan-Lanczos.

    Full reorthogonalization throughout; each cycle grows matched left and
    right bases to a small cap, Rayleigh-Ritz extracts Ritz triples from
    the projected matrix, and restarts keep a few triples beyond the
    requested t.  Convergence demands both residuals

        ||A v_k - s_k u_k||,  ||A^H u_k - s_k v_k||  <=  tol * s_1

    for every kept triple.  The cut gap is checked against the first
    discarded Ritz value before returning.
    """
    a = cmat(a)
    n, m = a.shape
    r = min(n, m)
    if not 1 <= t < r:
        raise ValueError(f"t must lie in [1, {r - 1}], got {t}")
    seed_int = seed.seed if isinstance(seed, MatrixSeed) else int(seed)
    rng = np.random.default_rng(seed_int)
    cap = int(min(max(5 * t, t + 3), r))
    keep = int(min(t + 2, cap - 1))

    def fresh(width):
        z = rng.standard_normal(width) + 1j * rng.standard_normal(width)
        return _unit(z)

    vb = _unit(fresh(m))[:, None]
    ub = np.zeros((n, 0), dtype=complex)
    for _ in range(max_iter):
        while vb.shape[1] < cap or ub.shape[1] < vb.shape[1]:
            if ub.shape[1] < vb.shape[1]:
                cand = _orth_against(a @ vb[:, -1], ub)
            else:
                cand = _orth_against(a.conj().T @ ub[:, -1], vb)
            if float(np.linalg.norm(cand)) < 1e-10:
                cand = _orth_against(fresh(cand.shape[0]),
                                     ub if ub.shape[1] < vb.shape[1] else vb)
            cand = _unit(cand)
            if ub.shape[1] < vb.shape[1]:
                ub = np.column_stack([ub, cand])
            else:
                vb = np.column_stack([vb, cand])
        small = jacobi_svd(ub.conj().T @ (a @ vb))
        ritz_u = ub @ small.U
        ritz_v = vb @ small.V
        sig = small.S
        res_u = a @ ritz_v[:, :t] - ritz_u[:, :t] * sig[None, :t]
        res_v = a.conj().T @ ritz_u[:, :t] - ritz_v[:, :t] * sig[None, :t]
        worst = max(float(np.max(np.linalg.norm(res_u, axis=0))),
                    float(np.max(np.linalg.norm(res_v, axis=0))))
        if sig[0] > 0 and worst <= tol * sig[0]:
            if (sig[t - 1] ** 2 - sig[t] ** 2) <= eps_deg * sig[0] ** 2:
                raise DegenerateCut(
                    f"cut at t={t} splits Ritz values {sig[t - 1]:.17g} and {sig[t]:.17g}")
            uk = ritz_u[:, :t].copy()
            vk = ritz_v[:, :t].copy()
            for j in range(t):
                uk[:, j], vk[:, j] = _canonical_phase(uk[:, j], vk[:, j])
            return SvdKept(U=uk, S=sig[:t].copy(), V=vk.copy())
        ub = ritz_u[:, :keep]
        vb = ritz_v[:, :keep]
    raise NoConvergence(f"partial SVD did not converge after {max_iter} restarts")
