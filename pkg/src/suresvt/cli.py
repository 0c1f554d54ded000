"""``suresvt`` command line.

Exit codes: 0 success, 1 verification or validation failure, 2 bad
arguments, 3 I/O error (including malformed input files).
"""

import argparse
import sys

import numpy as np

from . import io
from .blockwise import BlockConfig, bsvt, casorati, inverse_casorati
from .exceptions import BadBracketError, BadKindError, BadShapeError, SureSVTError
from .linalg import svd
from .risk import gen_test_matrix, log_grid, select_lambda, sweep, tau_from_snr
from .spectral import svt
from .validation import REAL, COMPLEX
from .verify import DEFAULT_SIZES, parse_sizes, run_all

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_ARGS = 2
EXIT_IO = 3


class ArgError(Exception):
    """Incompatible or invalid command-line values."""


# --------------------------------------------------------------- helpers


def parse_grid(text):
    """``lo:hi:count:log|lin`` -> ascending ndarray."""
    parts = text.split(":")
    if len(parts) != 4 or parts[3] not in ("log", "lin"):
        raise ArgError(f"grid must be lo:hi:count:log|lin, got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ArgError(f"bad grid {text!r}: {exc}") from exc
    if count < 2 or not lo < hi or lo < 0:
        raise ArgError("grid needs 0 <= lo < hi and count >= 2")
    if parts[3] == "log":
        if lo <= 0:
            raise ArgError("log grid needs lo > 0")
        return log_grid(lo, hi, count)
    return np.linspace(lo, hi, count)


def load_input(path):
    """Read MAT1/SER1; returns ``(matrix, series_or_None)``."""
    kind, obj = io.read_any(path)
    if kind == "ser":
        return casorati(obj), obj
    return obj, None


def estimator_for(args, x, series):
    if args.estimator == "svt":
        return "svt"
    if args.block_size is None:
        raise ArgError("--estimator bsvt needs --block-size")
    if series is not None:
        nx, ny = series.nx, series.ny
    elif args.nx is not None and args.ny is not None:
        nx, ny = args.nx, args.ny
    else:
        raise ArgError("--estimator bsvt needs --nx/--ny or a SER1 input")
    if nx * ny != x.shape[0]:
        raise ArgError(f"--nx*--ny = {nx * ny} does not match {x.shape[0]} rows")
    return BlockConfig(nx, ny, args.block_size)


def resolve_tau(args, x):
    if args.tau is not None:
        if not args.tau > 0:
            raise ArgError("--tau must be positive")
        return args.tau
    if args.snr is not None:
        return tau_from_snr(args.snr, *x.shape)
    return None


def out_stream(path):
    return sys.stdout if path in (None, "-") else open(path, "w", encoding="ascii", newline="\n")


def write_like_input(path, x, series):
    if series is None:
        io.write_matrix(path, x)
    else:
        io.write_series(path, inverse_casorati(x, series.nx, series.ny))


# --------------------------------------------------------------- commands


def cmd_gen(args):
    if args.kind not in (1, 2, 3, 4):
        raise BadKindError("kind must be 1..4")
    x = gen_test_matrix(args.kind, args.m, args.n, args.seed, args.field)
    io.write_matrix(args.out, x)
    return EXIT_OK


def cmd_svd(args):
    x, _ = load_input(args.input)
    s = svd(x).sigma
    tol = args.rank_tol * max(1.0, float(s[0]))
    print(f"shape={x.shape[0]}x{x.shape[1]}")
    print(f"rank={int(np.sum(s > tol))}")
    print(f"frobenius={io.fmt(np.linalg.norm(x))}")
    for v in s:
        print(io.fmt(v))
    return EXIT_OK


def cmd_sweep(args):
    x, series = load_input(args.input)
    grid = parse_grid(args.grid)
    est = estimator_for(args, x, series)
    tau = resolve_tau(args, x)
    x0 = None
    if args.mc:
        if args.x0 is None:
            raise ArgError("--mc needs --x0")
        x0, _ = load_input(args.x0)
        if x0.shape != x.shape:
            raise ArgError(f"--x0 shape {x0.shape} differs from input {x.shape}")
    elif args.x0 is not None:
        raise ArgError("--x0 is only used with --mc")
    res = sweep(x, grid, tau, est, x0=x0, trials=args.mc or 0, seed=args.seed)
    fh = out_stream(args.out)
    try:
        header = "lambda,sure" + (",mc_risk" if res.mc_risk is not None else "")
        fh.write(header + "\n")
        for i, lam in enumerate(res.lambdas):
            row = [io.fmt(lam), io.fmt(res.sure_values[i])]
            if res.mc_risk is not None:
                row.append(io.fmt(res.mc_risk[i]))
            fh.write(",".join(row) + "\n")
        fh.write(f"# argmin_lambda={io.fmt(res.argmin_lambda)}\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def _select(args, x, series):
    est = estimator_for(args, x, series)
    tau = resolve_tau(args, x)
    if tau is None:
        raise ArgError("threshold selection needs --tau or --snr")
    return select_lambda(x, tau, args.lo, args.hi, args.tol, est), est


def cmd_select(args):
    x, series = load_input(args.input)
    (lam, report), _ = _select(args, x, series)
    print(f"lambda={io.fmt(lam)}")
    print(f"sure={io.fmt(report.sure)}")
    return EXIT_OK


def cmd_denoise(args):
    x, series = load_input(args.input)
    if args.auto:
        (lam, _), est = _select(args, x, series)
        print(f"lambda={io.fmt(lam)}")
    else:
        est = estimator_for(args, x, series)
        lam = args.lam
        if not lam >= 0:
            raise ArgError("--lambda must be nonnegative")
    out = bsvt(x, est, lam) if isinstance(est, BlockConfig) else svt(x, lam)
    write_like_input(args.out, out, series)
    return EXIT_OK


def cmd_verify(args):
    try:
        sizes = parse_sizes(args.sizes) if args.sizes else DEFAULT_SIZES
    except ValueError as exc:
        raise ArgError(str(exc)) from exc
    results = run_all(sizes, args.seed, fault=args.inject_fault)
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"verification failed: {failed[0].name}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


# --------------------------------------------------------------- parser


def _add_tau(p, required):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--tau", type=float, help="noise standard deviation")
    g.add_argument("--snr", type=float, help="SNR = 1 / (sqrt(m n) tau)")


def _add_estimator(p):
    p.add_argument("--estimator", choices=("svt", "bsvt"), default="svt")
    p.add_argument("--block-size", type=int, help="block side k for bsvt")
    p.add_argument("--nx", type=int, help="image rows for MAT1 input with bsvt")
    p.add_argument("--ny", type=int, help="image columns for MAT1 input with bsvt")


def _add_bracket(p):
    p.add_argument("--lo", type=float, help="lower end of the search interval")
    p.add_argument("--hi", type=float, help="upper end of the search interval")
    p.add_argument("--tol", type=float, help="bracket width at which to stop")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="suresvt",
        description="Singular value thresholding with closed-form SURE.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a seeded test matrix")
    p.add_argument("--kind", type=int, required=True, help="ensemble 1..4")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--field", choices=(REAL, COMPLEX), default=REAL)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("svd", help="print the singular values and numerical rank")
    p.add_argument("input")
    p.add_argument("--rank-tol", type=float, default=1e-10,
                   help="relative tolerance for the rank count")
    p.set_defaults(func=cmd_svd)

    p = sub.add_parser("sweep", help="SURE (and Monte-Carlo risk) over a lambda grid")
    p.add_argument("input")
    _add_tau(p, required=True)
    p.add_argument("--grid", required=True, help="lo:hi:count:log|lin")
    _add_estimator(p)
    p.add_argument("--mc", type=int, help="Monte-Carlo trials (needs --x0)")
    p.add_argument("--x0", help="ground truth for --mc")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("select", help="minimize SURE by golden-section search")
    p.add_argument("input")
    _add_tau(p, required=True)
    _add_bracket(p)
    _add_estimator(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("denoise", help="apply SVT or block-wise SVT")
    p.add_argument("input")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--lambda", dest="lam", type=float)
    g.add_argument("--auto", action="store_true", help="choose lambda by SURE")
    _add_tau(p, required=False)
    _add_bracket(p)
    _add_estimator(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("verify", help="run the self-verification suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sizes", help="comma-separated MxN list, e.g. 5x4,3x6")
    p.add_argument("--inject-fault", action="store_true",
                   help="negate closed-form values (negative control; must fail)")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ArgError, BadKindError, BadShapeError, BadBracketError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except (io.FormatError, OSError) as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SureSVTError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())

