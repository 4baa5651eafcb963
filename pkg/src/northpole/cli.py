"""Command-line interface: ``northpole {sample,density,table,verify,haar}``.

Data goes to stdout (CSV or JSON), diagnostics to stderr.  Exit status is
0 on success, 1 when ``verify`` finds a failing check and 2 on usage
errors.  Identical arguments, including ``--seed``, give byte-identical
output.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import battery
from .densities import cdf_f, density_f
from .haar import DECOMPOSITION, QR, haar_batches
from .linalg import orthogonality_defect
from .mc import REFERENCE_TABLE, reproduce_table
from .pole import EXACT_MAX_K, sample_u_direct, sample_u_exact
from .rng import DEFAULT_SEED, RngStream

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2

DEFAULT_DIMS = tuple(REFERENCE_TABLE)


class UsageError(Exception):
    pass


def _fmt(x):
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(out, header, rows):
    out.write(",".join(header) + "\n")
    for row in rows:
        out.write(",".join(_fmt(v) for v in row) + "\n")


def write_json(out, config, rows):
    json.dump({"config": config, "rows": rows}, out)
    out.write("\n")


def _config(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "verbose")}


def _emit(args, out, header, rows):
    if args.format == "json":
        write_json(out, _config(args), [dict(zip(header, (_native(v) for v in row))) for row in rows])
    else:
        write_csv(out, header, rows)


def _native(v):
    return int(v) if isinstance(v, (int, np.integer)) else float(v)


def cmd_sample(args, out):
    if args.k < 1:
        raise UsageError("--k must be >= 1")
    stream = RngStream(args.seed).child(f"sample:{args.method}:{args.k}", args.p)
    if args.method == "exact":
        if args.k > EXACT_MAX_K:
            raise UsageError(f"no exact representation for k={args.k} (only k <= 3); use --method direct")
        if args.p < (2 if args.k == 1 else 3):
            raise UsageError(f"--method exact needs p >= {2 if args.k == 1 else 3} for k={args.k}")
        values = sample_u_exact(args.k, args.p, stream, args.n)
    else:
        haar = DECOMPOSITION if args.method == "decomposition" else QR
        if haar == DECOMPOSITION and args.p < 3:
            raise UsageError("the decomposition sampler needs p >= 3")
        values = sample_u_direct((args.k,), args.p, args.n, stream, method=haar)[args.k]
    _emit(args, out, ("index", "value"), enumerate(values))
    return EXIT_OK


def cmd_density(args, out):
    if args.p < 2:
        raise UsageError("degenerate density: f(.|1) is a pair of point masses; use p >= 2")
    if args.grid < 2:
        raise UsageError("--grid must be >= 2")
    h = 2.0 / args.grid
    # cell midpoints: evenly spaced, endpoints excluded
    xs = -1.0 + h * (np.arange(args.grid) + 0.5)
    _emit(args, out, ("x", "density", "cdf"), zip(xs, density_f(xs, args.p), cdf_f(xs, args.p)))
    return EXIT_OK


def _parse_dims(text):
    try:
        dims = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"cannot parse --dims {text!r}; expected comma-separated integers") from None
    if not dims or min(dims) < 3:
        raise UsageError("--dims must list integers >= 3")
    return dims


def cmd_table(args, out):
    dims = _parse_dims(args.dims)
    if args.n < 1000:
        raise UsageError("--n must be >= 1000 for the table")
    rows = reproduce_table(dims, args.n, RngStream(args.seed).child("table"))
    _emit(args, out, ("p", "prob_positive", "std_error", "n"),
          ((r.p, r.prob_positive, r.std_error, r.n) for r in rows))
    return EXIT_OK


def cmd_verify(args, out):
    components = battery.Components.mutant(args.mutant) if args.mutant else None
    report = battery.run_battery(args.seed, n=args.n, alpha=args.alpha, components=components,
                                 identity_n=args.identity_n)
    json.dump({"config": _config(args), **report.as_dict()}, out, indent=1)
    out.write("\n")
    if not report.passed:
        print("verification FAILED: " + ", ".join(report.failures), file=sys.stderr)
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def cmd_haar(args, out):
    if args.method not in (QR, DECOMPOSITION):
        raise UsageError("haar --method must be qr or decomposition")
    if args.method == DECOMPOSITION and args.p < 3:
        raise UsageError(f"the decomposition sampler needs p >= 3 (got p={args.p})")
    if args.p < 1:
        raise UsageError("--p must be >= 1")
    stream = RngStream(args.seed).child(f"haar:{args.method}", args.p)
    mats = np.concatenate(list(haar_batches(args.p, args.n, stream, method=args.method)))
    defects = orthogonality_defect(mats)
    if args.format == "json":
        rows = [{"index": i, "defect": float(d), "matrix": m.tolist()} for i, (m, d) in enumerate(zip(mats, defects))]
        write_json(out, _config(args), rows)
    else:
        header = ["index", "defect"] + [f"g{i + 1}_{j + 1}" for i in range(args.p) for j in range(args.p)]
        write_csv(out, header, ([i, d, *m.ravel()] for i, (m, d) in enumerate(zip(mats, defects))))
    return EXIT_OK


def _seed(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _alpha(text):
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 1)")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="northpole", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, n_default, fmt_default="csv"):
        p.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help="64-bit master seed (decimal or 0x hex)")
        p.add_argument("--n", type=int, default=n_default, help="number of draws")
        p.add_argument("--format", choices=("csv", "json"), default=fmt_default)

    s = sub.add_parser("sample", help="draw U_k = (G^k)_11 for Haar G")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--method", choices=("exact", "direct", "qr", "decomposition"), default="exact",
                   help="exact representation (k <= 3) or direct matrix powers (direct = qr)")
    common(s, 100_000)
    s.set_defaults(func=cmd_sample)

    d = sub.add_parser("density", help="tabulate f(.|p) and its CDF on a grid inside (-1, 1)")
    d.add_argument("--p", type=int, required=True)
    d.add_argument("--grid", type=int, default=201, help="number of grid points")
    d.add_argument("--format", choices=("csv", "json"), default="csv")
    d.set_defaults(func=cmd_density)

    t = sub.add_parser("table", help="estimate P(U_2 > 0) per dimension")
    t.add_argument("--dims", default=",".join(map(str, DEFAULT_DIMS)))
    common(t, 1_000_000)
    t.set_defaults(func=cmd_table)

    v = sub.add_parser("verify", help="run the verification battery, JSON report on stdout")
    v.add_argument("--seed", type=_seed, default=DEFAULT_SEED)
    v.add_argument("--n", type=int, default=100_000, help="draws per side for each KS check")
    v.add_argument("--alpha", type=_alpha, default=0.001)
    v.add_argument("--identity-n", type=int, default=10_000, help="draws per sampler for the identity checks")
    v.add_argument("--mutant", choices=sorted(battery.fixtures.MUTANTS),
                   help="run against a deliberately broken component")
    v.set_defaults(func=cmd_verify)

    h = sub.add_parser("haar", help="emit Haar matrices with their orthogonality defects")
    h.add_argument("--p", type=int, required=True)
    h.add_argument("--method", choices=(QR, DECOMPOSITION), default=QR)
    common(h, 1, fmt_default="json")
    h.set_defaults(func=cmd_haar)
    return parser


def main(argv=None, out=None):
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if getattr(args, "n", 1) < 1:
        print("northpole: error: --n must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"northpole: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
