"""Command-line interface.

    lastpc discover tabular [CSV | --builtin solar] [--log-si] [--kind cov|corr] ...
    lastpc discover gridded STACK_DIR [--pair T_v,H] [--beta0 15.5397] [--lag 12] ...
    lastpc emit-plotdata REPORT --which scree|loading-sd|beta-hist|pca-lines
    lastpc synth hypsometric OUT_DIR [--seed N] ...
    lastpc synth bivariate [--seed N] [--out FILE]
    lastpc demo pca-lines [CSV] [--seed N]

Exit codes: 0 success, 2 malformed input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .datagen import SynthSpec, solar_dataset, synth_bivariate_demo, synth_hypsometric
from .errors import ConvergenceError, DegenerateError, InputError
from .gridded import read_stack, write_stack
from .report import PLOTS, bivariate_demo, discover_gridded, discover_tabular, dumps, plot_data
from .table import DataTable

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

KIND_ALIASES = {"cov": "covariance", "covariance": "covariance",
                "corr": "correlation", "correlation": "correlation"}


def read_table_csv(path) -> DataTable:
    """Header row of names, optional ``#scale:`` line, then numeric rows.

    Other lines starting with ``#`` and blank lines are skipped. Errors
    carry the offending line number.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    names = None
    scale = None
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped[1:].strip()
            if body.lower().startswith("scale:"):
                if scale is not None:
                    raise InputError(f"{path}:{lineno}: duplicate #scale: line")
                try:
                    scale = [float(x) for x in body[6:].split(",")]
                except ValueError as exc:
                    raise InputError(f"{path}:{lineno}: bad #scale: value ({exc})") from None
                scale_line = lineno
            continue
        cells = next(csv.reader([line]))
        cells = [c.strip() for c in cells]
        if names is None:
            names = cells
            if any(not c for c in names):
                raise InputError(f"{path}:{lineno}: empty variable name in header")
            continue
        if len(cells) != len(names):
            raise InputError(f"{path}:{lineno}: expected {len(names)} values, got {len(cells)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from None
    if names is None:
        raise InputError(f"{path}: empty file (no header row)")
    if not rows:
        raise InputError(f"{path}: no data rows")
    if scale is not None and len(scale) != len(names):
        raise InputError(f"{path}:{scale_line}: #scale: has {len(scale)} entries "
                         f"for {len(names)} columns")
    return DataTable(tuple(names), rows, scale)


def _pair(text):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2 or not all(parts):
        raise argparse.ArgumentTypeError(f"expected two comma-separated names, got {text!r}")
    return tuple(parts)


def _crop(text):
    try:
        lo, hi = (float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LATMIN,LATMAX, got {text!r}") from None
    return lo, hi


def _pivot(text):
    if text == "auto":
        return "auto"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("pivot must be 'auto' or a 1-based column number") from None
    if value < 1:
        raise argparse.ArgumentTypeError("pivot column numbers start at 1")
    return value - 1


def _bins(text):
    if text == "fd":
        return "fd"
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("bins must be 'fd' or a positive integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError("bins must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lastpc", description=__doc__.split("\n")[0] or None)
    sub = parser.add_subparsers(dest="command", required=True)

    discover = sub.add_parser("discover", help="run a law-discovery pipeline")
    dsub = discover.add_subparsers(dest="mode", required=True)

    tab = dsub.add_parser("tabular", help="small table (cases x variables)")
    tab.add_argument("csv", nargs="?", help="CSV file with a header row")
    tab.add_argument("--builtin", choices=["solar"], help="use a bundled dataset")
    tab.add_argument("--log-si", action="store_true", help="natural log after SI conversion")
    tab.add_argument("--kind", default="cov", choices=sorted(KIND_ALIASES))
    tab.add_argument("--policy", default="error", choices=["error", "drop"],
                     help="constant-column policy")
    tab.add_argument("--pool", type=float, default=1.0,
                     help="fraction of smallest-eigenvalue eigenvectors searched for a law")
    tab.add_argument("--pivot", type=_pivot, default="auto",
                     help="1-based column used as integerization pivot, or 'auto'")
    tab.add_argument("--pivot-target", type=int, default=None,
                     help="fix the pivot's integer value instead of searching")
    tab.add_argument("--search-max", type=int, default=6,
                     help="search pivot targets 1..N (default 6)")
    tab.add_argument("--select", type=int, default=None, help="report this 1-based eigenvector")
    tab.add_argument("--out", help="write the report here instead of stdout")

    grd = dsub.add_parser("gridded", help="stack directory of gridded fields")
    grd.add_argument("stack", help="directory with meta.json and <field>.csv files")
    grd.add_argument("--law-fields", type=lambda s: tuple(p.strip() for p in s.split(",")),
                     default=None, help="fields whose loading spread ranks candidates")
    grd.add_argument("--pool", type=float, default=0.25)
    grd.add_argument("--pair", type=_pair, default=("T_v", "H"), help="X,Y fields for beta")
    grd.add_argument("--beta0", type=float, default=None, help="theoretical beta for the t-test")
    grd.add_argument("--lag", type=int, default=12, help="difference-filter lag (0 = off)")
    grd.add_argument("--crop", type=_crop, default=None, help="LATMIN,LATMAX (inclusive)")
    grd.add_argument("--select", type=int, default=None,
                     help="use this 1-based eigenvector instead of the top-ranked one")
    grd.add_argument("--policy", default="error", choices=["error", "drop"])
    grd.add_argument("--bins", type=_bins, default="fd", help="'fd' or a bin count")
    grd.add_argument("--min-loading", type=float, default=1e-8,
                     help="|loading| below this makes a grid point invalid")
    grd.add_argument("--out")

    emit = sub.add_parser("emit-plotdata", help="CSV data behind a report's figures")
    emit.add_argument("report")
    emit.add_argument("--which", required=True, help="|".join(PLOTS))
    emit.add_argument("--out", help="output CSV path (default: stdout)")

    synth = sub.add_parser("synth", help="write synthetic data")
    ssub = synth.add_subparsers(dest="what", required=True)
    hyp = ssub.add_parser("hypsometric", help="gridded T_v/H/V stack directory")
    hyp.add_argument("out_dir")
    defaults = SynthSpec()
    hyp.add_argument("--nlat", type=int, default=defaults.nlat)
    hyp.add_argument("--nlon", type=int, default=defaults.nlon)
    hyp.add_argument("--n-time", type=int, default=defaults.n_time)
    hyp.add_argument("--beta", type=float, default=defaults.beta_true)
    hyp.add_argument("--noise", type=float, default=defaults.noise_sd_fraction)
    hyp.add_argument("--radius", type=int, default=defaults.smoothing_radius)
    hyp.add_argument("--seasonal", type=float, default=0.0, help="12-step cycle amplitude")
    hyp.add_argument("--lat0", type=float, default=defaults.lat0)
    hyp.add_argument("--dlat", type=float, default=defaults.dlat)
    hyp.add_argument("--seed", type=int, default=0)
    biv = ssub.add_parser("bivariate", help="bivariate normal sample as CSV")
    biv.add_argument("--seed", type=int, default=0)
    biv.add_argument("--n", type=int, default=200)
    biv.add_argument("--out")

    demo = sub.add_parser("demo", help="small demonstrations")
    dm = demo.add_subparsers(dest="which", required=True)
    lines = dm.add_parser("pca-lines", help="PCA lines vs regression line for two columns")
    lines.add_argument("csv", nargs="?", help="two-column CSV (default: synthetic sample)")
    lines.add_argument("--seed", type=int, default=0)
    lines.add_argument("--out")
    return parser


def _write(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _table_csv(table: DataTable) -> str:
    lines = [",".join(table.variable_names)]
    lines += [",".join(repr(float(x)) for x in row) for row in table.values]
    return "\n".join(lines) + "\n"


def run(args) -> int:
    if args.command == "discover" and args.mode == "tabular":
        if (args.csv is None) == (args.builtin is None):
            raise InputError("give either a CSV path or --builtin")
        table = solar_dataset() if args.builtin == "solar" else read_table_csv(args.csv)
        report = discover_tabular(
            table, kind=KIND_ALIASES[args.kind], log_si=args.log_si,
            constant_column_policy=args.policy, pool=args.pool, pivot=args.pivot,
            target=args.pivot_target, search_max=args.search_max, select=args.select,
            source=f"builtin:{args.builtin}" if args.builtin else str(args.csv))
        _write(dumps(report), args.out)
    elif args.command == "discover":
        stack = read_stack(args.stack)
        report = discover_gridded(
            stack, law_fields=args.law_fields, pool=args.pool, pair=args.pair,
            beta0=args.beta0, lag=args.lag, crop=args.crop, select=args.select,
            constant_column_policy=args.policy, bins=args.bins,
            min_loading=args.min_loading, source=str(args.stack))
        _write(dumps(report), args.out)
    elif args.command == "emit-plotdata":
        try:
            report = json.loads(Path(args.report).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"{args.report}: cannot read report ({exc})") from None
        _write(plot_data(report, args.which), args.out)
    elif args.command == "synth" and args.what == "hypsometric":
        spec = SynthSpec(args.nlat, args.nlon, args.n_time, args.beta, args.noise,
                         args.radius, args.seed, args.seasonal, args.lat0, args.dlat)
        write_stack(synth_hypsometric(spec), args.out_dir)
    elif args.command == "synth":
        _write(_table_csv(synth_bivariate_demo(args.seed, args.n)), args.out)
    else:
        if args.csv:
            table = read_table_csv(args.csv)
            source = args.csv
        else:
            table = synth_bivariate_demo(args.seed)
            source = f"synthetic:seed={args.seed}"
        _write(dumps(bivariate_demo(table, source)), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except InputError as exc:
        print(f"lastpc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConvergenceError, DegenerateError, ArithmeticError) as exc:
        print(f"lastpc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
