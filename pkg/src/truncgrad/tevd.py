"""Forward-mode tangents of a truncated eigendecomposition.

For a diagonalizable A with kept right eigenvectors x (columns), left
rows y = rows of X^{-1}, and simple kept eigenvalues lam:

    dlam_k = (y dA x)_kk,
    dx     = x dx1 + dx2,

where dx2 solves one shifted system (lam_k - A) z = (1 - x y) dA x gamma
per kept pair on the complement of the kept invariant subspace, and dx1
carries the within-kept mixing plus a diagonal fixed by the pivot gauge:
each eigenvector is normalized so its pivot entry stays constant, which
pins row m_k of dx to exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import GradConfig
from .decomp import FullEvd
from .errors import (
    DegenerateCut,
    DegenerateSpectrum,
    ShapeMismatch,
    ZeroPivot,
)
from .matcore import cmat
from .tsvd_iter import ShiftedSystem, solve_sylvester_projected

GAUGE_POLICIES = ("max-abs", "max-product")


@dataclass(frozen=True)
class EvdKept:
    """Kept eigentriples: right vectors x, eigenvalues lam, left rows y."""

    x: np.ndarray
    lam: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        p = self.lam.shape[0] if self.lam.ndim == 1 else -1
        n = self.x.shape[0] if self.x.ndim == 2 else -1
        if p < 1 or self.x.shape != (n, p) or self.y.shape != (p, n):
            raise ShapeMismatch("inconsistent kept eigentriple shapes")
        if np.linalg.norm(self.y @ self.x - np.eye(p)) > 1e-10 * p:
            raise ValueError("left and right eigenvectors are not biorthonormal")

    @property
    def p(self) -> int:
        return self.lam.shape[0]


@dataclass(frozen=True)
class GaugeChoice:
    """Pivot rows and the normalization factors gamma_k = 1/x[m_k, k]."""

    policy: str
    pivots: tuple[int, ...]
    gamma: np.ndarray


@dataclass(frozen=True)
class EvdTangent:
    """Directional derivatives of the kept eigentriples along one direction."""

    dlam: np.ndarray
    dx: np.ndarray
    dx1: np.ndarray
    dx2: np.ndarray


def truncate_evd(f: FullEvd, p: int, cfg: GradConfig | None = None) -> EvdKept:
    """Keep the p leading eigentriples of a full eigendecomposition.

    Raises DegenerateSpectrum when two kept eigenvalues nearly coincide and
    DegenerateCut when a kept eigenvalue nearly meets a discarded one, both
    relative to the largest eigenvalue modulus.
    """
    cfg = cfg or GradConfig()
    n = f.lam.shape[0]
    if not 1 <= p <= n:
        raise ValueError(f"p must lie in [1, {n}], got {p}")
    scale = float(np.max(np.abs(f.lam)))
    if scale == 0.0:
        raise DegenerateSpectrum("spectrum is identically zero")
    for i in range(p):
        for j in range(i + 1, n):
            if abs(f.lam[i] - f.lam[j]) <= cfg.eps_deg * scale:
                if j < p:
                    raise DegenerateSpectrum(
                        f"kept eigenvalues {f.lam[i]:.8g} and {f.lam[j]:.8g} collide")
                raise DegenerateCut(
                    f"kept eigenvalue {f.lam[i]:.8g} collides with a discarded one")
    return EvdKept(x=f.X[:, :p].copy(), lam=f.lam[:p].copy(), y=f.Y[:p, :].copy())


def fix_gauge(kept: EvdKept, policy: str = "max-product") -> GaugeChoice:
    """Choose pivot rows; ties resolve to the lowest row index.

    "max-abs" picks the largest-modulus entry of each right eigenvector;
    "max-product" weighs it by the matching left-eigenvector entry, which
    keeps the diagonal correction well-conditioned even when the right
    eigenvector alone peaks on a row the left one barely touches.
    """
    if policy not in GAUGE_POLICIES:
        raise ValueError(f"unknown gauge policy {policy!r}")
    p = kept.p
    pivots = []
    gamma = np.zeros(p, dtype=complex)
    for k in range(p):
        if policy == "max-abs":
            weight = np.abs(kept.x[:, k])
        else:
            weight = np.abs(kept.x[:, k]) * np.abs(kept.y[k, :])
        m = int(np.argmax(weight))
        piv = kept.x[m, k]
        if abs(piv) == 0.0:
            raise ZeroPivot(f"pivot entry of eigenvector {k} vanishes")
        pivots.append(m)
        gamma[k] = 1.0 / piv
    return GaugeChoice(policy=policy, pivots=tuple(pivots), gamma=gamma)


def _check_direction_evd(kept: EvdKept, da: np.ndarray) -> np.ndarray:
    da = np.asarray(da, dtype=complex)
    n = kept.x.shape[0]
    if da.shape != (n, n):
        raise ShapeMismatch(f"direction must be {n}x{n}, got {da.shape}")
    return da


def dlambda(kept: EvdKept, da: np.ndarray) -> np.ndarray:
    """Eigenvalue tangents diag(y dA x); independent of the gauge."""
    da = _check_direction_evd(kept, da)
    return np.diagonal(kept.y @ da @ kept.x).copy()


def eig_gap_weights(lam: np.ndarray, cfg: GradConfig | None = None) -> np.ndarray:
    """Reciprocal eigenvalue gaps 1/(lam_k - lam_l), zero diagonal."""
    cfg = cfg or GradConfig()
    lam = np.asarray(lam, dtype=complex)
    p = lam.shape[0]
    d = lam[None, :] - lam[:, None]
    off = ~np.eye(p, dtype=bool)
    scale = float(np.max(np.abs(lam))) if p else 0.0
    if p > 1 and np.min(np.abs(d[off])) <= cfg.eps_deg * scale:
        raise DegenerateSpectrum("degenerate pair inside the kept eigenvalues")
    w = np.zeros((p, p), dtype=complex)
    w[off] = 1.0 / d[off]
    return w


def dx2_sylvester(a: np.ndarray, kept: EvdKept, gauge: GaugeChoice,
                  da: np.ndarray, cfg: GradConfig | None = None) -> np.ndarray:
    """Complement contribution dx2: one deflated shifted solve per kept pair."""
    cfg = cfg or GradConfig()
    a = cmat(a)
    da = _check_direction_evd(kept, da)
    x, y = kept.x, kept.y

    def proj(v):
        return v - x @ (y @ v)

    rhs = proj(proj(da @ x) * gauge.gamma[None, :])
    out = np.zeros_like(rhs)
    for k in range(kept.p):
        system = ShiftedSystem(
            operator=lambda v: a @ v,
            shift=complex(kept.lam[k]),
            projector=proj,
            rhs=rhs[:, k])
        out[:, k] = solve_sylvester_projected(system, cfg)
    return out


def dx1_block(kept: EvdKept, gauge: GaugeChoice, da: np.ndarray,
              dx2: np.ndarray, cfg: GradConfig | None = None) -> np.ndarray:
    """Within-kept mixing dx1; its diagonal zeroes the pivot rows of dx."""
    cfg = cfg or GradConfig()
    da = _check_direction_evd(kept, da)
    c = (kept.y @ da @ kept.x) * gauge.gamma[None, :]
    w = eig_gap_weights(kept.lam, cfg)
    dx1 = w * c
    for k in range(kept.p):
        m = gauge.pivots[k]
        mixed = kept.x[m, :] @ dx1[:, k]
        dx1[k, k] = -(mixed + dx2[m, k]) / kept.x[m, k]
    return dx1


def jvp_truncated_evd(a: np.ndarray, kept: EvdKept, da: np.ndarray,
                      policy: str = "max-product",
                      cfg: GradConfig | None = None) -> EvdTangent:
    """Assemble (dlam, dx) for pivot-normalized kept eigenvectors.

    The returned dx differentiates the eigenvectors x gamma whose pivot
    entries are held at 1, so its pivot rows are exactly zero.
    """
    cfg = cfg or GradConfig()
    a = cmat(a)
    da = _check_direction_evd(kept, da)
    if a.shape != da.shape:
        raise ShapeMismatch(f"matrix is {a.shape}, direction is {da.shape}")
    gauge = fix_gauge(kept, policy)
    dlam = dlambda(kept, da)
    dx2 = dx2_sylvester(a, kept, gauge, da, cfg)
    dx1 = dx1_block(kept, gauge, da, dx2, cfg)
    dx = kept.x @ dx1 + dx2
    for k in range(kept.p):
        dx[gauge.pivots[k], k] = 0.0
    return EvdTangent(dlam=dlam, dx=dx, dx1=dx1, dx2=dx2)
