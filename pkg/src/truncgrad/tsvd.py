"""Forward-mode tangents of the truncated SVD, explicit-truncation path.

Given the kept triple (U, S, V), the discarded triple, and a direction dA,
the directional derivatives decompose into small coefficient blocks

    dU = U du1 + U_perp du2 (+ tall correction),
    dV = V dv1 + V_perp dv2 (+ wide correction),

where du1/dv1 are anti-Hermitian t x t blocks driven by reciprocal
spectral gaps inside the kept set, du2/dv2 mix kept and discarded
subspaces, and the rectangular corrections account for the part of the
ambient space outside both singular subspaces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import GradConfig
from .decomp import SvdDiscarded, SvdKept
from .errors import DegenerateSpectrum, ShapeMismatch


@dataclass(frozen=True)
class SvdTangent:
    """Directional derivatives of a truncated SVD along one direction."""

    dU: np.ndarray
    dS: np.ndarray
    dV: np.ndarray
    du1: np.ndarray
    dv1: np.ndarray
    du2: np.ndarray
    dv2: np.ndarray


def _check_direction(kept: SvdKept, da: np.ndarray) -> np.ndarray:
    da = np.asarray(da, dtype=complex)
    n, m = kept.U.shape[0], kept.V.shape[0]
    if da.shape != (n, m):
        raise ShapeMismatch(f"direction must be {n}x{m}, got {da.shape}")
    return da


def ds_kept(kept: SvdKept, da: np.ndarray) -> np.ndarray:
    """Tangent of the kept singular values: Re diag(U^H dA V)."""
    da = _check_direction(kept, da)
    j = kept.U.conj().T @ da @ kept.V
    return np.real(np.diagonal(j)).copy()


def _recip(x: np.ndarray, cfg: GradConfig) -> np.ndarray:
    if cfg.degeneracy_policy == "lorentzian":
        return x / (x * x + cfg.eps_b * cfg.eps_b)
    return 1.0 / x


def gap_weights_kept(s: np.ndarray, cfg: GradConfig | None = None) -> np.ndarray:
    """Reciprocal gap weights 1/(s_j^2 - s_i^2) inside the kept block.

    Zero on the diagonal and antisymmetric.  Under the error policy an
    off-diagonal gap below eps_deg * max(s)^2 raises DegenerateSpectrum;
    the Lorentzian policy broadens instead and never raises.
    """
    cfg = cfg or GradConfig()
    s = np.asarray(s, dtype=float)
    t = s.shape[0]
    d = s[None, :] ** 2 - s[:, None] ** 2
    off = ~np.eye(t, dtype=bool)
    if cfg.degeneracy_policy == "error":
        smax2 = float(np.max(s) ** 2) if t else 0.0
        if t > 1 and np.min(np.abs(d[off])) <= cfg.eps_deg * smax2:
            raise DegenerateSpectrum("degenerate pair inside the kept singular values")
    w = np.zeros((t, t))
    w[off] = _recip(d[off], cfg)
    return w


def gap_weights_cross(s: np.ndarray, s_disc: np.ndarray,
                      cfg: GradConfig | None = None) -> np.ndarray:
    """Reciprocal gap weights 1/(s_j^2 - s_disc_i^2) across the cut."""
    cfg = cfg or GradConfig()
    s = np.asarray(s, dtype=float)
    s_disc = np.asarray(s_disc, dtype=float)
    d = s[None, :] ** 2 - s_disc[:, None] ** 2
    if cfg.degeneracy_policy == "error":
        smax2 = float(np.max(s) ** 2)
        if d.size and np.min(np.abs(d)) <= cfg.eps_deg * smax2:
            raise DegenerateSpectrum("kept and discarded singular values collide")
        return 1.0 / d
    return _recip(d, cfg)


def kept_rotations(kept: SvdKept, da: np.ndarray,
                   cfg: GradConfig | None = None):
    """Anti-Hermitian kept-block tangents (du1, dv1) = (U^H dU, V^H dV).

    Off-diagonal parts come from the reciprocal-gap weights; the purely
    imaginary diagonal i Im diag(J)/S is split alpha / -(1 - alpha)
    between du1 and dv1 (any split reconstructs dA identically, the split
    only moves phase drift between the two factors).
    """
    cfg = cfg or GradConfig()
    da = _check_direction(kept, da)
    s = kept.S
    j = kept.U.conj().T @ da @ kept.V
    jh = j.conj().T
    w = gap_weights_kept(s, cfg)
    du1 = w * (j * s[None, :] + s[:, None] * jh)
    dv1 = w * (s[:, None] * j + jh * s[None, :])
    dd = 1j * np.imag(np.diagonal(j)) / s
    idx = np.arange(s.shape[0])
    du1[idx, idx] = cfg.alpha * dd
    dv1[idx, idx] = -(1.0 - cfg.alpha) * dd
    return du1, dv1


def discarded_mixing(kept: SvdKept, disc: SvdDiscarded, da: np.ndarray,
                     cfg: GradConfig | None = None):
    """Cross-space blocks (du2, dv2) = (U_perp^H dU, V_perp^H dV)."""
    cfg = cfg or GradConfig()
    da = _check_direction(kept, da)
    if disc.count == 0:
        raise ValueError("discarded block is empty; nothing to mix")
    s = kept.S
    sp = disc.S
    p = disc.U.conj().T @ da @ kept.V
    q = disc.V.conj().T @ da.conj().T @ kept.U
    g = gap_weights_cross(s, sp, cfg)
    du2 = g * (p * s[None, :] + sp[:, None] * q)
    dv2 = g * (sp[:, None] * p + q * s[None, :])
    return du2, dv2


def tall_correction(kept: SvdKept, disc: SvdDiscarded, da: np.ndarray) -> np.ndarray:
    """dU contribution outside both singular subspaces (only when n > m)."""
    da = _check_direction(kept, da)
    m = da @ kept.V / kept.S[None, :]
    m = m - kept.U @ (kept.U.conj().T @ m)
    if disc.count:
        m = m - disc.U @ (disc.U.conj().T @ m)
    return m


def wide_correction(kept: SvdKept, disc: SvdDiscarded, da: np.ndarray) -> np.ndarray:
    """dV contribution outside both singular subspaces (only when n < m)."""
    da = _check_direction(kept, da)
    m = da.conj().T @ kept.U / kept.S[None, :]
    m = m - kept.V @ (kept.V.conj().T @ m)
    if disc.count:
        m = m - disc.V @ (disc.V.conj().T @ m)
    return m


def jvp_truncated_svd_explicit(kept: SvdKept, disc: SvdDiscarded, da: np.ndarray,
                               cfg: GradConfig | None = None) -> SvdTangent:
    """Assemble (dU, dS, dV) from the explicitly available discarded factors."""
    cfg = cfg or GradConfig()
    da = _check_direction(kept, da)
    n, m = da.shape
    t = kept.t
    ds = ds_kept(kept, da)
    du1, dv1 = kept_rotations(kept, da, cfg)
    if disc.count:
        du2, dv2 = discarded_mixing(kept, disc, da, cfg)
        du = kept.U @ du1 + disc.U @ du2
        dv = kept.V @ dv1 + disc.V @ dv2
    else:
        du2 = np.zeros((0, t), dtype=complex)
        dv2 = np.zeros((0, t), dtype=complex)
        du = kept.U @ du1
        dv = kept.V @ dv1
    if n > m:
        du = du + tall_correction(kept, disc, da)
    elif n < m:
        dv = dv + wide_correction(kept, disc, da)
    return SvdTangent(dU=du, dS=ds, dV=dv, du1=du1, dv1=dv1, du2=du2, dv2=dv2)
