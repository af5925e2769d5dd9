"""Finite-difference and algebraic verification of the tangent kernels.

The harness re-derives every analytic derivative two independent ways:
central finite differences on gauge-invariant quantities (singular values,
eigenvalues, subspace projectors, pivot-normalized eigenvectors), and the
exact block identities the tangents must satisfy at working precision.
Per-trial seeded generators make every suite deterministic and
order-independent; failures are recorded per trial and never abort a run.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .config import GradConfig
from .decomp import full_evd, full_svd, truncate_svd
from .errors import TruncgradError
from .matcore import MatrixSeed, frob, gen_matrix
from .tevd import fix_gauge, jvp_truncated_evd, truncate_evd
from .tsvd import jvp_truncated_svd_explicit
from .tsvd_iter import jvp_truncated_svd_iterative

CASES = ("svd-square", "svd-tall", "svd-wide", "svd-iterative", "evd")

# shared pass thresholds, all relative to ||dA||_F = 1 unless noted
TOL_RESIDUAL = 1e-12      # exact block identities
TOL_FD_VALUES = 1e-6      # singular-value / eigenvalue tangents vs FD
TOL_FD_PROJECTOR = 1e-5   # projector and eigenvector tangents vs FD
TOL_CROSS_PATH = 1e-9     # explicit vs iterative assembly
TOL_CONSTRAINT = 1e-11    # subspace constraints on the solved blocks


@dataclass
class FdReport:
    """Outcome of one verification trial."""

    case: str
    trial: int
    seed: int
    n: int
    m: int
    kept: int
    errors: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    passed: bool = True
    failure: str | None = None
    wall_time: float = 0.0


def default_fd_step(a: np.ndarray) -> float:
    """Central-difference step eps^(1/3) * (1 + ||A||_F)."""
    return float(np.finfo(float).eps ** (1.0 / 3.0) * (1.0 + frob(a)))


def fd_tangent(quantities, a: np.ndarray, da: np.ndarray, h: float):
    """Central differences of a tuple-valued matrix function."""
    if h <= 0:
        raise ValueError("finite-difference step must be positive")
    qp = quantities(a + h * da)
    qm = quantities(a - h * da)
    return tuple((p - q) / (2.0 * h) for p, q in zip(qp, qm, strict=True))


def phase_align(col: np.ndarray):
    """Rotate a vector so its largest-modulus entry is real positive.

    Returns (aligned, phase); ties pick the lowest index.  Zero columns
    have no canonical phase and are rejected.
    """
    col = np.asarray(col, dtype=complex)
    i = int(np.argmax(np.abs(col)))
    piv = col[i]
    if abs(piv) == 0.0:
        raise ValueError("cannot phase-align a zero column")
    ph = np.conj(piv) / abs(piv)
    return col * ph, ph


def normalized_projector(x: np.ndarray) -> np.ndarray:
    """sum_k x_k x_k^H / (x_k^H x_k); column-scale invariant."""
    nk = np.sum(np.abs(x) ** 2, axis=0)
    return (x / nk[None, :]) @ x.conj().T


def projector_tangent(x: np.ndarray, dx: np.ndarray) -> np.ndarray:
    """Derivative of ``normalized_projector`` from columns and their tangents."""
    out = np.zeros((x.shape[0], x.shape[0]), dtype=complex)
    for k in range(x.shape[1]):
        xk = x[:, k]
        dk = dx[:, k]
        nk = np.vdot(xk, xk).real
        term = np.outer(dk, xk.conj()) + np.outer(xk, dk.conj())
        dnk = 2.0 * np.vdot(xk, dk).real
        out += term / nk - np.outer(xk, xk.conj()) * (dnk / nk ** 2)
    return out


def match_nearest(ref: np.ndarray, vals: np.ndarray) -> np.ndarray:
    """Index of the nearest entry of vals for each entry of ref (no reuse)."""
    idx = np.array([int(np.argmin(np.abs(vals - r))) for r in ref])
    if len(set(idx.tolist())) != idx.shape[0]:
        raise ValueError("ambiguous eigenvalue matching")
    return idx


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def _fd_spectrum(rng: np.random.Generator, r: int) -> np.ndarray:
    # strictly descending ladder with absolute gaps in [0.2, 0.8]: keeps
    # every reciprocal-gap weight mild so FD truncation error stays small
    return 0.5 * np.arange(r, 0, -1) + 1.0 + 0.3 * rng.random(r)


def _draw_shape(case: str, rng: np.random.Generator, shape):
    if shape is not None:
        return int(shape[0]), int(shape[1])
    if case == "svd-square":
        n = int(rng.integers(4, 17))
        return n, n
    if case == "svd-tall":
        m = int(rng.integers(4, 13))
        return m + int(rng.integers(1, 5)), m
    if case == "svd-wide":
        n = int(rng.integers(4, 13))
        return n, n + int(rng.integers(1, 5))
    if case == "svd-iterative":
        kind = ["svd-square", "svd-tall", "svd-wide"][int(rng.integers(0, 3))]
        return _draw_shape(kind, rng, None)
    raise ValueError(f"no shape rule for case {case!r}")


def _svd_instance(case: str, rng: np.random.Generator, shape):
    n, m = _draw_shape(case, rng, shape)
    r = min(n, m)
    spectrum = tuple(float(s) for s in _fd_spectrum(rng, r))
    seed_int = int(rng.integers(0, 2 ** 31))
    a = gen_matrix(
        MatrixSeed(seed=seed_int, kind="prescribed-spectrum", spectrum=spectrum), n, m)
    da = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
    da = da / frob(da)
    t = int(rng.integers(1, r)) if r > 1 else 1
    return a, da, t


def _svd_quantities(t: int):
    def quantities(mat):
        f = full_svd(mat)
        u = f.U[:, :t]
        v = f.V[:, :t]
        return f.S[:t], u @ u.conj().T, v @ v.conj().T
    return quantities


def _svd_residuals(kept, disc, da, tan) -> dict:
    s = kept.S
    j = kept.U.conj().T @ da @ kept.V
    res = {}
    block = j - np.diag(tan.dS.astype(complex)) \
        - tan.du1 * s[None, :] - s[:, None] * tan.dv1.conj().T
    res["kept_block"] = frob(block)
    res["du1_antiherm"] = frob(tan.du1 + tan.du1.conj().T)
    res["dv1_antiherm"] = frob(tan.dv1 + tan.dv1.conj().T)
    if disc is not None and disc.count:
        sp = disc.S
        p = disc.U.conj().T @ da @ kept.V
        q = kept.U.conj().T @ da @ disc.V
        res["cross_lower"] = frob(tan.du2 * s[None, :] - sp[:, None] * tan.dv2 - p)
        res["cross_upper"] = frob(
            s[:, None] * tan.dv2.conj().T - tan.du2.conj().T * sp[None, :] - q)
    return res


def _run_svd_explicit(case, trial, seed, cfg, shape) -> FdReport:
    rng = _trial_rng(seed, trial)
    a, da, t = _svd_instance(case, rng, shape)
    n, m = a.shape
    rpt = FdReport(case=case, trial=trial, seed=seed, n=n, m=m, kept=t)
    f = full_svd(a)
    kept, disc = truncate_svd(f, t, cfg)
    tan = jvp_truncated_svd_explicit(kept, disc, da, cfg)
    rpt.residuals = _svd_residuals(kept, disc, da, tan)
    h = cfg.fd_step if cfg.fd_step is not None else default_fd_step(a)
    fd_s, fd_pu, fd_pv = fd_tangent(_svd_quantities(t), a, da, h)
    rpt.errors["ds_fd"] = float(np.linalg.norm(tan.dS - fd_s))
    dpu = tan.dU @ kept.U.conj().T + kept.U @ tan.dU.conj().T
    dpv = tan.dV @ kept.V.conj().T + kept.V @ tan.dV.conj().T
    rpt.errors["proj_u_fd"] = frob(dpu - fd_pu)
    rpt.errors["proj_v_fd"] = frob(dpv - fd_pv)
    rpt.passed = (
        all(v <= TOL_RESIDUAL for v in rpt.residuals.values())
        and rpt.errors["ds_fd"] <= TOL_FD_VALUES
        and rpt.errors["proj_u_fd"] <= TOL_FD_PROJECTOR
        and rpt.errors["proj_v_fd"] <= TOL_FD_PROJECTOR)
    return rpt


def _run_svd_iterative(case, trial, seed, cfg, shape) -> FdReport:
    rng = _trial_rng(seed, trial)
    a, da, t = _svd_instance(case, rng, shape)
    n, m = a.shape
    rpt = FdReport(case=case, trial=trial, seed=seed, n=n, m=m, kept=t)
    f = full_svd(a)
    kept, disc = truncate_svd(f, t, cfg)
    explicit = jvp_truncated_svd_explicit(kept, disc, da, cfg)
    iterative = jvp_truncated_svd_iterative(a, kept, da, cfg)
    rpt.errors["cross_du"] = frob(iterative.dU - explicit.dU)
    rpt.errors["cross_dv"] = frob(iterative.dV - explicit.dV)
    rpt.errors["cross_ds"] = float(np.linalg.norm(iterative.dS - explicit.dS))
    rpt.residuals["u_constraint"] = frob(kept.U.conj().T @ iterative.du2)
    rpt.residuals["v_constraint"] = frob(kept.V.conj().T @ iterative.dv2)
    pm_dahu = da.conj().T @ kept.U - kept.V @ (kept.V.conj().T @ (da.conj().T @ kept.U))
    pn_dav = da @ kept.V - kept.U @ (kept.U.conj().T @ (da @ kept.V))
    res_v = pm_dahu - iterative.dv2 * kept.S[None, :] + a.conj().T @ iterative.du2
    res_u = pn_dav - iterative.du2 * kept.S[None, :] + a @ iterative.dv2
    solver_bound = cfg.solver_tol * (1.0 + frob(a))
    rpt.residuals["complement_v"] = frob(res_v)
    rpt.residuals["complement_u"] = frob(res_u)
    rpt.passed = (
        rpt.errors["cross_du"] <= TOL_CROSS_PATH
        and rpt.errors["cross_dv"] <= TOL_CROSS_PATH
        and rpt.errors["cross_ds"] <= TOL_CROSS_PATH
        and rpt.residuals["u_constraint"] <= TOL_CONSTRAINT
        and rpt.residuals["v_constraint"] <= TOL_CONSTRAINT
        and rpt.residuals["complement_v"] <= solver_bound
        and rpt.residuals["complement_u"] <= solver_bound)
    return rpt


def _evd_instance(rng: np.random.Generator, hermitian: bool):
    n = int(rng.integers(4, 13))
    moduli = _fd_spectrum(rng, n)
    if hermitian:
        signs = np.where(rng.random(n) < 0.5, -1.0, 1.0)
        lam = moduli * signs
        q = _haar(rng, n)
        a = (q * lam) @ q.conj().T
        da = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        da = 0.5 * (da + da.conj().T)
    else:
        phases = np.exp(2j * np.pi * rng.random(n))
        lam = moduli * phases
        g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        g = g / np.linalg.norm(g, 2)
        x = _haar(rng, n) @ (np.eye(n) + 0.35 * g)
        a = x @ np.diag(lam) @ np.linalg.inv(x)
        da = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    da = da / frob(da)
    p = int(rng.integers(1, n))
    return a, da, p


def _haar(rng: np.random.Generator, k: int) -> np.ndarray:
    z = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r).copy()
    d[d == 0] = 1.0
    return q * (d / np.abs(d))


def _run_evd(case, trial, seed, cfg, shape) -> FdReport:
    rng = _trial_rng(seed, trial)
    hermitian = trial % 3 == 0
    a, da, p = _evd_instance(rng, hermitian)
    n = a.shape[0]
    rpt = FdReport(case=case, trial=trial, seed=seed, n=n, m=n, kept=p)
    f = full_evd(a)
    kept = truncate_evd(f, p, cfg)
    tan = jvp_truncated_evd(a, kept, da, cfg=cfg)
    gauge = fix_gauge(kept)
    gamma = gauge.gamma
    pivots = np.array(gauge.pivots)
    cols = np.arange(p)

    lam_scale = float(np.max(np.abs(kept.lam)))
    c = (kept.y @ da @ kept.x) * gamma[None, :]
    comm = tan.dx1 * kept.lam[None, :] - kept.lam[:, None] * tan.dx1
    rpt.residuals["kept_commutator"] = frob(
        c - np.diag(gamma * tan.dlam) - comm) / max(lam_scale, 1.0)
    rhs = da @ kept.x - kept.x @ (kept.y @ (da @ kept.x))
    rhs = rhs * gamma[None, :]
    rhs = rhs - kept.x @ (kept.y @ rhs)
    sylv = tan.dx2 * kept.lam[None, :] - a @ tan.dx2 - rhs
    rpt.residuals["sylvester"] = frob(sylv)
    rpt.residuals["y_constraint"] = frob(kept.y @ tan.dx2)
    raw = kept.x @ tan.dx1 + tan.dx2
    rpt.residuals["pivot_rows_raw"] = float(np.max(np.abs(raw[pivots, cols])))
    rpt.residuals["pivot_rows"] = float(np.max(np.abs(tan.dx[pivots, cols])))

    h = cfg.fd_step if cfg.fd_step is not None else default_fd_step(a)
    ref_lam = kept.lam

    def quantities(mat):
        g = full_evd(mat)
        idx = match_nearest(ref_lam, g.lam)
        lam_m = g.lam[idx]
        xm = g.X[:, idx]
        xm = xm / xm[pivots, cols][None, :]
        if hermitian:
            return lam_m, xm, normalized_projector(g.X[:, idx])
        return lam_m, xm

    fd = fd_tangent(quantities, a, da, h)
    rpt.errors["dlam_fd"] = float(np.linalg.norm(tan.dlam - fd[0]))
    rpt.errors["dx_fd"] = frob(tan.dx - fd[1]) / (1.0 + frob(tan.dx))
    checks = [
        all(v <= TOL_RESIDUAL for k, v in rpt.residuals.items()
            if k in ("kept_commutator", "y_constraint", "pivot_rows_raw")),
        rpt.residuals["pivot_rows"] == 0.0,
        rpt.residuals["sylvester"] <= cfg.solver_tol * (1.0 + frob(rhs)),
        rpt.errors["dlam_fd"] <= TOL_FD_VALUES,
        rpt.errors["dx_fd"] <= TOL_FD_PROJECTOR,
    ]
    if hermitian:
        xg = kept.x * gamma[None, :]
        dproj = projector_tangent(xg, tan.dx)
        rpt.errors["proj_fd"] = frob(dproj - fd[2])
        checks.append(rpt.errors["proj_fd"] <= TOL_FD_PROJECTOR)
    rpt.passed = all(checks)
    return rpt


_RUNNERS = {
    "svd-square": _run_svd_explicit,
    "svd-tall": _run_svd_explicit,
    "svd-wide": _run_svd_explicit,
    "svd-iterative": _run_svd_iterative,
    "evd": _run_evd,
}


def run_suite(case: str, trials: int, cfg: GradConfig | None = None,
              seed: int = 0, shape=None) -> list[FdReport]:
    """Run one verification case; one report per trial, failures recorded."""
    if case not in CASES:
        raise ValueError(f"unknown case {case!r}; choose from {CASES}")
    if trials < 1:
        raise ValueError("trials must be positive")
    cfg = cfg or GradConfig()
    runner = _RUNNERS[case]
    out = []
    for trial in range(trials):
        start = time.perf_counter()
        try:
            rpt = runner(case, trial, seed, cfg, shape)
        except TruncgradError as exc:
            rpt = FdReport(case=case, trial=trial, seed=seed, n=0, m=0, kept=0,
                           passed=False, failure=f"{type(exc).__name__}: {exc}")
        rpt.wall_time = time.perf_counter() - start
        out.append(rpt)
    return out


def serialize_reports(reports) -> str:
    """Canonical structured document; identical seeds give identical bytes.

    Timing is deliberately excluded so the serialization stays reproducible.
    """
    records = []
    for r in reports:
        records.append({
            "case": r.case,
            "trial": r.trial,
            "seed": r.seed,
            "n": r.n,
            "m": r.m,
            "kept": r.kept,
            "errors": {k: float(v) for k, v in sorted(r.errors.items())},
            "residuals": {k: float(v) for k, v in sorted(r.residuals.items())},
            "passed": bool(r.passed),
            "failure": r.failure,
        })
    doc = {"version": 1, "count": len(records), "records": records}
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def format_reports_text(reports) -> str:
    """Human-readable rendering, one line per trial plus a summary."""
    lines = []
    npass = 0
    for r in reports:
        if r.failure is not None:
            status = f"FAIL ({r.failure})"
        else:
            status = "PASS" if r.passed else "FAIL"
        worst_err = max(r.errors.values(), default=0.0)
        worst_res = max(r.residuals.values(), default=0.0)
        lines.append(
            f"{r.case}[{r.trial:03d}] n={r.n} m={r.m} kept={r.kept} "
            f"err={worst_err:.3e} res={worst_res:.3e} "
            f"t={r.wall_time * 1e3:.1f}ms {status}")
        npass += int(r.passed)
    lines.append(f"{'PASS' if npass == len(reports) else 'FAIL'} {npass}/{len(reports)}")
    return "\n".join(lines) + "\n"
