"""Command-line interface.

Single-process, deterministic given flags and input files.  Matrices
travel as cmx files; diagnostics go to stderr, data to stdout or output
files, never mixed.  Exit codes: 0 success, 1 numerical-precondition
failure (degeneracy, non-convergence, singular shifts, ...), 2 usage or
I/O error.
"""

from __future__ import annotations

import argparse
import sys

from .config import GradConfig
from .decomp import EVD_PROVIDERS, SVD_PROVIDERS, full_evd, full_svd, truncate_svd
from .errors import TruncgradError
from .matcore import MatrixSeed, gen_matrix, load_cmx, save_cmx
from .tevd import GAUGE_POLICIES, jvp_truncated_evd, truncate_evd
from .tsvd import jvp_truncated_svd_explicit
from .tsvd_iter import jvp_truncated_svd_iterative
from .verify import CASES, format_reports_text, run_suite, serialize_reports

_GEN_KINDS = ("complex-gaussian", "real-gaussian", "prescribed", "near-degenerate")


def _fmt17(x: float) -> str:
    return format(float(x), ".17g")


def _grad_config(args) -> GradConfig:
    policy = "lorentzian" if getattr(args, "broaden", None) is not None else "error"
    kwargs = {
        "alpha": getattr(args, "alpha", 0.5),
        "eps_deg": getattr(args, "eps_deg", 1e-12),
        "degeneracy_policy": policy,
        "solver_tol": getattr(args, "solver_tol", 1e-10),
    }
    if policy == "lorentzian":
        kwargs["eps_b"] = args.broaden
    if getattr(args, "fd_step", None) is not None:
        kwargs["fd_step"] = args.fd_step
    return GradConfig(**kwargs)


def _add_grad_flags(p: argparse.ArgumentParser, *, fd: bool = False) -> None:
    p.add_argument("--alpha", type=float, default=0.5,
                   help="diagonal phase split between dU and dV (default 0.5)")
    p.add_argument("--eps-deg", dest="eps_deg", type=float, default=1e-12,
                   help="relative degeneracy threshold (default 1e-12)")
    p.add_argument("--broaden", type=float, default=None, metavar="EPS_B",
                   help="switch to Lorentzian broadening with this width")
    p.add_argument("--solver-tol", dest="solver_tol", type=float, default=1e-10,
                   help="relative residual target for shifted solves")
    if fd:
        p.add_argument("--fd-step", dest="fd_step", type=float, default=None,
                       help="finite-difference step (default: eps^(1/3)*(1+||A||))")


def _out_prefix(args) -> str:
    if args.out_prefix is not None:
        return args.out_prefix
    stem = args.infile
    if stem.endswith(".cmx"):
        stem = stem[: -len(".cmx")]
    return stem + "."


def _cmd_gen(args) -> int:
    kind = "prescribed-spectrum" if args.kind == "prescribed" else args.kind
    spectrum = None
    if args.spectrum is not None:
        spectrum = tuple(float(tok) for tok in args.spectrum.split(",") if tok)
        if not spectrum:
            raise ValueError("empty spectrum")
    n, m = args.n, args.m
    if kind == "prescribed-spectrum":
        if spectrum is None:
            raise ValueError("--kind prescribed needs --spectrum")
        if n is None and m is None:
            n = m = len(spectrum)
    if n is None or m is None:
        raise ValueError("--n and --m are required for this kind")
    spec = MatrixSeed(seed=args.seed, kind=kind, spectrum=spectrum, gap=args.gap)
    save_cmx(args.out, gen_matrix(spec, n, m))
    print(f"wrote {n}x{m} {kind} matrix to {args.out}", file=sys.stderr)
    return 0


def _cmd_svd(args) -> int:
    a = load_cmx(args.infile)
    f = full_svd(a, provider=args.provider)
    cfg = _grad_config(args)
    if args.t is not None:
        kept, _ = truncate_svd(f, args.t, cfg)
        u, s, v = kept.U, kept.S, kept.V
    else:
        u, s, v = f.U, f.S, f.V
    for val in s:
        print(_fmt17(val))
    if args.out_prefix is not None:
        save_cmx(args.out_prefix + "U.cmx", u)
        save_cmx(args.out_prefix + "S.cmx", s.astype(complex)[:, None])
        save_cmx(args.out_prefix + "V.cmx", v)
        print(f"wrote factors with prefix {args.out_prefix}", file=sys.stderr)
    return 0


def _cmd_evd(args) -> int:
    a = load_cmx(args.infile)
    f = full_evd(a, provider=args.provider)
    cfg = _grad_config(args)
    if args.p is not None:
        kept = truncate_evd(f, args.p, cfg)
        x, lam, y = kept.x, kept.lam, kept.y
    else:
        x, lam, y = f.X, f.lam, f.Y
    for val in lam:
        print(f"{_fmt17(val.real)} {_fmt17(val.imag)}")
    if args.out_prefix is not None:
        save_cmx(args.out_prefix + "X.cmx", x)
        save_cmx(args.out_prefix + "lam.cmx", lam[:, None])
        save_cmx(args.out_prefix + "Y.cmx", y)
        print(f"wrote factors with prefix {args.out_prefix}", file=sys.stderr)
    return 0


def _cmd_jvp_svd(args) -> int:
    a = load_cmx(args.infile)
    da = load_cmx(args.tangent)
    cfg = _grad_config(args)
    f = full_svd(a, provider=args.provider)
    kept, disc = truncate_svd(f, args.t, cfg)
    if args.mode == "explicit":
        tan = jvp_truncated_svd_explicit(kept, disc, da, cfg)
    else:
        tan = jvp_truncated_svd_iterative(a, kept, da, cfg)
    prefix = _out_prefix(args)
    save_cmx(prefix + "dU.cmx", tan.dU)
    save_cmx(prefix + "dS.cmx", tan.dS.astype(complex)[:, None])
    save_cmx(prefix + "dV.cmx", tan.dV)
    print(f"wrote {prefix}dU.cmx {prefix}dS.cmx {prefix}dV.cmx", file=sys.stderr)
    return 0


def _cmd_jvp_evd(args) -> int:
    a = load_cmx(args.infile)
    da = load_cmx(args.tangent)
    cfg = _grad_config(args)
    policy = "max-abs" if args.gauge == "max-abs" else "max-product"
    f = full_evd(a, provider=args.provider)
    kept = truncate_evd(f, args.p, cfg)
    tan = jvp_truncated_evd(a, kept, da, policy=policy, cfg=cfg)
    prefix = _out_prefix(args)
    save_cmx(prefix + "dlam.cmx", tan.dlam[:, None])
    save_cmx(prefix + "dx.cmx", tan.dx)
    print(f"wrote {prefix}dlam.cmx {prefix}dx.cmx", file=sys.stderr)
    return 0


def _cmd_check(args) -> int:
    cfg = _grad_config(args)
    reports = run_suite(args.case, args.trials, cfg=cfg, seed=args.seed)
    if args.format == "structured":
        doc = serialize_reports(reports)
    else:
        doc = format_reports_text(reports)
    if args.report is not None:
        with open(args.report, "w", encoding="ascii", newline="\n") as fh:
            fh.write(doc)
        print(f"wrote report to {args.report}", file=sys.stderr)
    else:
        sys.stdout.write(doc)
    return 0 if all(r.passed for r in reports) else 1


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="truncgrad",
        description="Forward-mode derivatives of truncated SVD / eigendecompositions")
    sub = top.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a deterministic test matrix")
    g.add_argument("--kind", choices=_GEN_KINDS, default="complex-gaussian")
    g.add_argument("--n", type=int, default=None)
    g.add_argument("--m", type=int, default=None)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--spectrum", type=str, default=None,
                   help="comma-separated singular values for --kind prescribed")
    g.add_argument("--gap", type=float, default=None,
                   help="relative gap for --kind near-degenerate")
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_gen)

    s = sub.add_parser("svd", help="singular values (and factors) of a cmx matrix")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--t", type=int, default=None, help="keep only the top t triples")
    s.add_argument("--provider", choices=sorted(SVD_PROVIDERS), default="jacobi")
    s.add_argument("--out-prefix", dest="out_prefix", default=None)
    _add_grad_flags(s)
    s.set_defaults(func=_cmd_svd)

    e = sub.add_parser("evd", help="eigenvalues (and factors) of a cmx matrix")
    e.add_argument("--in", dest="infile", required=True)
    e.add_argument("--p", type=int, default=None, help="keep only the top p pairs")
    e.add_argument("--provider", choices=sorted(EVD_PROVIDERS), default="platform")
    e.add_argument("--out-prefix", dest="out_prefix", default=None)
    _add_grad_flags(e)
    e.set_defaults(func=_cmd_evd)

    js = sub.add_parser("jvp-svd", help="tangents of a truncated SVD")
    js.add_argument("--in", dest="infile", required=True)
    js.add_argument("--tangent", required=True)
    js.add_argument("--t", type=int, required=True)
    js.add_argument("--mode", choices=("explicit", "iterative"), default="explicit")
    js.add_argument("--provider", choices=sorted(SVD_PROVIDERS), default="jacobi")
    js.add_argument("--out-prefix", dest="out_prefix", default=None)
    _add_grad_flags(js)
    js.set_defaults(func=_cmd_jvp_svd)

    je = sub.add_parser("jvp-evd", help="tangents of a truncated eigendecomposition")
    je.add_argument("--in", dest="infile", required=True)
    je.add_argument("--tangent", required=True)
    je.add_argument("--p", type=int, required=True)
    je.add_argument("--gauge", choices=GAUGE_POLICIES, default="max-product")
    je.add_argument("--provider", choices=sorted(EVD_PROVIDERS), default="platform")
    je.add_argument("--out-prefix", dest="out_prefix", default=None)
    _add_grad_flags(je)
    je.set_defaults(func=_cmd_jvp_evd)

    c = sub.add_parser("check", help="run a finite-difference verification suite")
    c.add_argument("--case", choices=CASES, required=True)
    c.add_argument("--trials", type=int, default=20)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--format", choices=("text", "structured"), default="text")
    c.add_argument("--report", default=None, help="write the report here instead of stdout")
    _add_grad_flags(c, fd=True)
    c.set_defaults(func=_cmd_check)

    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TruncgradError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
