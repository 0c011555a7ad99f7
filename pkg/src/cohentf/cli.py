"""Command-line interface.

Exit codes: 0 success, 1 computation or hypothesis failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from typing import List, Optional

from . import constants as C
from .grid import make_grid
from .io import (
    read_operator,
    read_set,
    read_signal,
    read_tf,
    render_pgm,
    to_jsonable,
    write_json,
    write_operator,
    write_signal,
    write_tf,
)
from .operators import apply, cohen_op_matrix, localization_matrix, operator_norm, weyl_matrix
from .transforms import Sampled, cohen_rep, gabor, parse_kernel, wigner
from .uncertainty import (
    cohen_report,
    ds_bound_at,
    ds_bound_optimize,
    ds_classical_bound,
    localization_report,
    scaling_experiment,
)
from .verify import SEED, run_verify

logger = logging.getLogger("cohentf")


def _exponent(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity", "+inf"):
        return math.inf
    try:
        v = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an exponent: {text!r}")
    if not v >= 1:
        raise argparse.ArgumentTypeError(f"exponent must be >= 1, got {text}")
    return v


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _print_json(obj) -> None:
    print(json.dumps(to_jsonable(obj), indent=2))


def _load_kernel(spec: str):
    """``dirac``, ``gausswig:lam`` or a TF file holding a sampled kernel."""
    try:
        return parse_kernel(spec)
    except ValueError:
        return Sampled(read_tf(spec))


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def cmd_stft(args) -> int:
    f, g = read_signal(args.f), read_signal(args.g)
    write_tf(gabor(f, g), args.out)
    return 0


def cmd_wigner(args) -> int:
    f = read_signal(args.f)
    g = read_signal(args.g) if args.g else f
    write_tf(wigner(f, g), args.out)
    return 0


def cmd_cohen(args) -> int:
    f = read_signal(args.f)
    g = read_signal(args.g) if args.g else f
    kernel = _load_kernel(args.kernel)
    write_tf(cohen_rep(kernel, f, g, args.padding), args.out)
    return 0


_CONST_ARGS = {
    "A": ("p",),
    "H": ("p", "q", "d"),
    "C": ("p", "q", "d"),
    "wigner_bounded": ("r", "s", "p"),
    "loc": ("q", "d", "n_phi", "n_psi", "n_a"),
    "cohen": ("r", "s", "q", "p", "d"),
    "ds": ("r", "eps_t", "eps_omega", "d"),
}


def cmd_constants(args) -> int:
    need = _CONST_ARGS[args.name]
    missing = [a for a in need if getattr(args, a) is None]
    if missing:
        raise UsageError(f"constants eval --name {args.name} needs --{' --'.join(m.replace('_', '-') for m in missing)}")
    vals = {a: getattr(args, a) for a in need}
    fn = {
        "A": lambda v: C.babenko(v["p"]),
        "H": lambda v: C.h_const(v["p"], v["q"], v["d"]),
        "C": lambda v: C.c_const(v["p"], v["q"], v["d"]),
        "wigner_bounded": lambda v: C.wigner_bounded(v["r"], v["s"], v["p"]),
        "loc": lambda v: C.loc_norm_bound(v["q"], v["d"], v["n_phi"], v["n_psi"], v["n_a"]),
        "cohen": lambda v: C.cohen_norm_bound(v["r"], v["s"], v["q"], v["p"], v["d"]),
        "ds": lambda v: ds_bound_at(v["r"], v["eps_t"], v["eps_omega"], v["d"]),
    }[args.name]
    _print_json({"name": args.name, "args": vals, "value": fn(vals)})
    return 0


def cmd_op_build(args) -> int:
    a = read_tf(args.symbol)
    if args.type == "weyl":
        M = weyl_matrix(a, {"symbol": args.symbol})
    elif args.type == "loc":
        if not (args.win_phi and args.win_psi):
            raise UsageError("op build --type loc needs --win-phi and --win-psi")
        M = localization_matrix(a, read_signal(args.win_phi), read_signal(args.win_psi), args.path)
        M.provenance.update({"symbol": args.symbol, "phi": args.win_phi, "psi": args.win_psi})
    else:
        if not args.kernel:
            raise UsageError("op build --type cohen needs --kernel")
        M = cohen_op_matrix(a, _load_kernel(args.kernel), args.padding)
        M.provenance.update({"symbol": args.symbol})
    write_operator(M, args.out)
    return 0


def cmd_op_apply(args) -> int:
    M = read_operator(args.op)
    write_signal(apply(M, read_signal(args.signal)), args.out)
    return 0


def cmd_op_norm(args) -> int:
    M = read_operator(args.op)
    _print_json({"norm": operator_norm(M, args.method), "method": args.method})
    return 0


def cmd_up_check(args) -> int:
    f = read_signal(args.signal)
    T = read_set(args.set_t, f.grid)
    O = read_set(args.set_omega, f.grid.dual())
    if args.kernel:
        rep = cohen_report(f, _load_kernel(args.kernel), T, O)
    else:
        rep = localization_report(f, T, O, args.lambda1, args.lambda2, args.r_max)
    d = rep.to_dict()
    if args.out:
        write_json(d, args.out)
    else:
        _print_json(d)
    if not rep.applicable:
        logger.warning("hypotheses not satisfied: %s", {k: v for k, v in rep.hypothesis_flags.items() if not v})
        return 1
    if not rep.satisfied:
        logger.error("|T||Omega| = %.6g is below the bound %.6g", rep.product_TOmega, max(rep.bound_classical, rep.bound_improved))
        return 1
    return 0


def cmd_up_bound(args) -> int:
    opt = ds_bound_optimize(args.eps_t, args.eps_omega, args.d, args.r_max)
    _print_json(
        {
            "eps_T": args.eps_t,
            "eps_Omega": args.eps_omega,
            "d": args.d,
            "r_max": args.r_max,
            "bound_classical": ds_classical_bound(args.eps_t, args.eps_omega),
            "bound_improved": opt.bound,
            "r_star": opt.r_star,
            "at_boundary": opt.at_boundary,
        }
    )
    return 0


def cmd_up_scaling(args) -> int:
    grid = make_grid(args.n, args.dx)
    res = scaling_experiment(args.q, args.p, args.lambdas, grid)
    _print_json({"q": args.q, "p": args.p, "slope": res.slope, "expected": res.expected, "lambdas": res.lambdas, "ratios": res.ratios})
    return 0


def cmd_render(args) -> int:
    render_pgm(read_tf(args.tf), args.out)
    return 0


def cmd_verify(args) -> int:
    rep = run_verify(args.suite, args.seed)
    for c in rep.cases:
        print(f"[{c.status.upper()}] {c.id:<16} measured={c.measured:.6g} expected={c.expected:.6g} tol={c.tolerance:.3g}  {c.description}")
    print(f"suite={rep.suite} seed={rep.seed:#x} cases={len(rep.cases)} overall={'pass' if rep.overall else 'fail'}")
    if args.out:
        write_json(rep.to_dict(), args.out)
    return 0 if rep.overall else 1


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class UsageError(Exception):
    """Raised for argument combinations argparse cannot express (exit code 2)."""


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cohentf", description="Cohen-class time-frequency toolkit")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("stft", help="Gabor transform V_g f")
    s.add_argument("--f", required=True)
    s.add_argument("--g", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_stft)

    s = sub.add_parser("wigner", help="cross-Wigner transform Wig(f, g)")
    s.add_argument("--f", required=True)
    s.add_argument("--g", help="second signal (default: f)")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_wigner)

    s = sub.add_parser("cohen", help="Cohen-class representation sigma * Wig(f, g)")
    s.add_argument("--kernel", required=True, help="dirac, gausswig:LAM or a TF file")
    s.add_argument("--f", required=True)
    s.add_argument("--g")
    s.add_argument("--padding", choices=["periodic", "zero"], default="periodic")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_cohen)

    s = sub.add_parser("constants", help="sharp constants")
    csub = s.add_subparsers(dest="action", required=True)
    e = csub.add_parser("eval", help="evaluate a constant as JSON")
    e.add_argument("--name", required=True, choices=sorted(_CONST_ARGS))
    for name in ("p", "q", "r", "s"):
        e.add_argument(f"--{name}", type=_exponent)
    e.add_argument("--d", type=int, default=1)
    e.add_argument("--n-phi", type=float)
    e.add_argument("--n-psi", type=float)
    e.add_argument("--n-a", type=float)
    e.add_argument("--eps-t", type=float)
    e.add_argument("--eps-omega", type=float)
    e.set_defaults(func=cmd_constants)

    s = sub.add_parser("op", help="operator matrices")
    osub = s.add_subparsers(dest="action", required=True)
    b = osub.add_parser("build")
    b.add_argument("--type", required=True, choices=["weyl", "loc", "cohen"])
    b.add_argument("--symbol", required=True, help="TF file with the symbol")
    b.add_argument("--kernel", help="dirac, gausswig:LAM or a TF file")
    b.add_argument("--win-phi")
    b.add_argument("--win-psi")
    b.add_argument("--path", choices=["via_weyl", "direct"], default="via_weyl")
    b.add_argument("--padding", choices=["periodic", "zero"], default="periodic")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_op_build)
    a = osub.add_parser("apply")
    a.add_argument("--op", required=True)
    a.add_argument("--signal", required=True)
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_op_apply)
    nrm = osub.add_parser("norm")
    nrm.add_argument("--op", required=True)
    nrm.add_argument("--method", choices=["auto", "svd", "power"], default="auto")
    nrm.set_defaults(func=cmd_op_norm)

    s = sub.add_parser("up", help="uncertainty principles")
    usub = s.add_subparsers(dest="action", required=True)
    c = usub.add_parser("check")
    c.add_argument("--signal", required=True)
    c.add_argument("--set-t", required=True)
    c.add_argument("--set-omega", required=True)
    c.add_argument("--lambda1", type=float, default=1.0)
    c.add_argument("--lambda2", type=float, default=1.0)
    c.add_argument("--kernel")
    c.add_argument("--r-max", type=float, default=1e3)
    c.add_argument("--out")
    c.set_defaults(func=cmd_up_check)
    bd = usub.add_parser("bound")
    bd.add_argument("--eps-t", type=float, required=True)
    bd.add_argument("--eps-omega", type=float, required=True)
    bd.add_argument("--d", type=int, default=1)
    bd.add_argument("--r-max", type=float, default=1e3)
    bd.set_defaults(func=cmd_up_bound)
    sc = usub.add_parser("scaling")
    sc.add_argument("--q", type=_exponent, required=True)
    sc.add_argument("--p", type=_exponent, default=2.0)
    sc.add_argument("--lambdas", type=_float_list, default=[1.0, 2.0, 4.0, 8.0])
    sc.add_argument("--n", type=int, default=1024)
    sc.add_argument("--dx", type=float, default=1.0 / 32)
    sc.set_defaults(func=cmd_up_scaling)

    s = sub.add_parser("render", help="16-bit PGM of |F|")
    s.add_argument("--tf", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_render)

    s = sub.add_parser("verify", help="run the verification suite")
    s.add_argument("suite", nargs="?", default="all", choices=["all", "constants", "transforms", "operators", "uncertainty"])
    s.add_argument("--seed", type=lambda t: int(t, 0), default=None)
    s.add_argument("--out")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if getattr(args, "seed", 0) is None:
        args.seed = SEED
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"cohentf: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, NotImplementedError, OSError) as exc:
        print(f"cohentf: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
