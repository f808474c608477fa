"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data or format error, 3 numerical
failure (rank deficiency).
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .bench import export_csv, load_sweep_config, run_sweep, sweep_spec_from_dict
from .datagen import SyntheticSpec, generate
from .errors import RankDeficiencyError, SSNMFError
from .extract import ALGORITHMS, AGGREGATIONS, RANDOMIZED, AlgoConfig, extract_best
from .io import (
    HsiCube,
    clip_extremes,
    read_any_matrix,
    read_sidecar,
    sidecar_path,
    write_abundance_maps,
    write_any_matrix,
)
from .metrics import mrsa
from .solver import NnlsSettings, nnls_cd, relative_error

log = logging.getLogger("ssnmf")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _nonnegative_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative number, got {text}")
    return value


def _add_cube_flags(p):
    p.add_argument("--width", type=_positive_int, help="image width (pixels); enables cube preprocessing")
    p.add_argument("--height", type=_positive_int, help="image height (pixels)")
    p.add_argument("--sidecar", help="JSON sidecar with width/height/bands "
                                     "(default: input path with .json suffix, if present)")
    p.add_argument("--clip-k", type=int, default=10,
                   help="for image cubes, zero the pixels among the k largest of any band "
                        "(default 10; 0 disables)")


def build_parser():
    parser = _Parser(prog="ssnmf", description="Smoothed separable NMF: extraction, abundances, evaluation.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic instance X = WH + N")
    p.add_argument("--m", type=_positive_int, default=224, help="number of rows (bands), default 224")
    p.add_argument("--n", type=_positive_int, default=1000, help="number of columns, default 1000")
    p.add_argument("--r", type=_positive_int, default=10, help="number of endmembers, default 10")
    p.add_argument("--alpha", type=float, default=0.05, help="Dirichlet concentration, default 0.05")
    p.add_argument("--eps", type=_nonnegative_float, default=0.0, help="relative noise norm, default 0")
    p.add_argument("--seed", type=int, required=True, help="random seed")
    p.add_argument("--w-in", help="endmember matrix file to use instead of a random W")
    p.add_argument("--out", required=True, help="output directory for X, W and H")
    p.add_argument("--format", choices=("ssnmf", "csv"), default="ssnmf", help="output file format")

    p = sub.add_parser("extract", help="estimate endmembers from a data matrix")
    p.add_argument("--algo", choices=ALGORITHMS, required=True)
    p.add_argument("--r", type=_positive_int, required=True, help="number of endmembers")
    p.add_argument("--p", type=_positive_int, default=1, help="columns aggregated per endmember, default 1")
    p.add_argument("--agg", choices=AGGREGATIONS, default="median", help="aggregation for svca/sspa")
    p.add_argument("--seed", type=int, help="random seed (required for vca, alls, svca)")
    p.add_argument("--trials", type=_positive_int, default=1,
                   help="runs of a randomized algorithm; the one with lowest relative error is kept")
    p.add_argument("--power-iters", type=_positive_int, default=10, help="subspace iterations, default 10")
    p.add_argument("--in", dest="input", required=True, help="data matrix (SSNMF1 or .csv)")
    p.add_argument("--out", required=True, help="output endmember matrix")
    p.add_argument("--sets", help="output JSON with selected index sets (default: <out>.sets.json)")
    _add_cube_flags(p)

    p = sub.add_parser("abundances", help="nonnegative least squares abundances H for given X, W")
    p.add_argument("--in", dest="input", required=True, help="data matrix")
    p.add_argument("--w", required=True, help="endmember matrix")
    p.add_argument("--out", required=True, help="output abundance matrix")
    p.add_argument("--max-sweeps", type=_positive_int, default=500)
    p.add_argument("--rel-tol", type=float, default=1e-8)
    _add_cube_flags(p)

    p = sub.add_parser("eval", help="MRSA between two endmember matrices, or relative error of X ~ WH")
    p.add_argument("--true", dest="w_true", help="reference endmember matrix (MRSA mode)")
    p.add_argument("--est", dest="w_est", help="estimated endmember matrix (MRSA mode)")
    p.add_argument("--in", dest="input", help="data matrix (relative-error mode)")
    p.add_argument("--w", help="endmember matrix (relative-error mode)")
    p.add_argument("--max-sweeps", type=_positive_int, default=500)
    p.add_argument("--rel-tol", type=float, default=1e-8)
    _add_cube_flags(p)

    p = sub.add_parser("maps", help="render abundance maps as PGM images")
    p.add_argument("--h", dest="abundances", help="abundance matrix (r x width*height)")
    p.add_argument("--in", dest="input", help="data matrix, to compute H from --w")
    p.add_argument("--w", help="endmember matrix, used with --in")
    p.add_argument("--out", required=True, help="output directory")
    _add_cube_flags(p)

    p = sub.add_parser("bench", help="run a seeded experiment sweep from a JSON config")
    p.add_argument("--config", required=True, help="sweep configuration (JSON)")
    p.add_argument("--out", required=True, help="output CSV report")
    p.add_argument("--workers", type=_positive_int, help="parallel trials (overrides the config)")
    return parser


def _cube_geometry(args, path):
    """(width, height) when the input is an image cube, else None."""
    if args.width or args.height:
        if not (args.width and args.height):
            raise UsageError("--width and --height must be given together")
        return args.width, args.height
    side = args.sidecar or (sidecar_path(path) if path else None)
    if args.sidecar or (side and os.path.exists(side)):
        width, height, _ = read_sidecar(side)
        return width, height
    return None


def _load_data(args):
    X = read_any_matrix(args.input)
    geometry = _cube_geometry(args, args.input)
    if geometry is not None:
        cube = HsiCube(geometry[0], geometry[1], X)
        if args.clip_k > 0:
            cube, removed = clip_extremes(cube, args.clip_k)
            log.info("zeroed %d extreme pixels", removed.size)
        X = cube.data
    return X, geometry


def _nnls_settings(args):
    return NnlsSettings(max_sweeps=args.max_sweeps, rel_tol=args.rel_tol)


def cmd_synth(args):
    W_source = args.w_in or "random"
    spec = SyntheticSpec(m=args.m, n=args.n, r=args.r, alpha=args.alpha, epsilon=args.eps,
                         seed=args.seed, W_source=W_source)
    inst = generate(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ext = ".csv" if args.format == "csv" else ".ssnmf"
    for name, M in (("X", inst.X), ("W", inst.W_true), ("H", inst.H_true)):
        write_any_matrix(out / f"{name}{ext}", M)
    print(f"wrote X{ext}, W{ext}, H{ext} to {out} (noise norm {inst.noise_norm:.6g})")


def cmd_extract(args):
    if args.algo in RANDOMIZED and args.seed is None:
        raise UsageError(f"--seed is required for {args.algo}")
    if args.algo in ("vca", "spa") and args.p != 1:
        raise UsageError(f"{args.algo} selects single columns; --p must be 1")
    X, _ = _load_data(args)
    cfg = AlgoConfig(r=args.r, p=args.p, aggregation=args.agg, seed=args.seed or 0,
                     power_iters=args.power_iters)
    result, err = extract_best(X, args.algo, cfg, trials=args.trials)
    write_any_matrix(args.out, result.endmembers)
    sets_path = args.sets or f"{args.out}.sets.json"
    payload = result.to_json()
    payload["relative_error"] = err
    Path(sets_path).write_text(json.dumps(payload, indent=1) + "\n")
    print(f"relative_error\t{err:.10g}")


def cmd_abundances(args):
    X, _ = _load_data(args)
    H = nnls_cd(X, read_any_matrix(args.w), _nnls_settings(args))
    write_any_matrix(args.out, H)


def cmd_eval(args):
    if args.w_true and args.w_est:
        match = mrsa(read_any_matrix(args.w_true), read_any_matrix(args.w_est))
        print(f"mrsa_total\t{match.total:.10g}")
        print(f"mrsa_mean\t{match.mean:.10g}")
        print("permutation\t" + " ".join(str(int(j)) for j in match.permutation))
    elif args.input and args.w:
        X, _ = _load_data(args)
        err = relative_error(X, read_any_matrix(args.w), _nnls_settings(args))
        print(f"relative_error\t{err:.10g}")
        print(f"relative_error_percent\t{100 * err:.4f}")
    else:
        raise UsageError("eval needs either --true and --est, or --in and --w")


def cmd_maps(args):
    if args.abundances:
        H = read_any_matrix(args.abundances)
        geometry = _cube_geometry(args, None)
    elif args.input and args.w:
        X, geometry = _load_data(args)
        H = nnls_cd(X, read_any_matrix(args.w))
    else:
        raise UsageError("maps needs --h, or --in and --w")
    if geometry is None:
        raise UsageError("maps needs --width/--height or a sidecar")
    for path in write_abundance_maps(H, geometry[0], geometry[1], args.out):
        print(path)


def cmd_bench(args):
    cfg = load_sweep_config(args.config)
    if cfg.get("data") is not None:
        X = read_any_matrix(cfg["data"])
        geometry = None
        if cfg.get("width") and cfg.get("height"):
            geometry = (cfg["width"], cfg["height"])
        elif cfg.get("sidecar") or os.path.exists(sidecar_path(cfg["data"])):
            geometry = read_sidecar(cfg.get("sidecar") or sidecar_path(cfg["data"]))[:2]
        if geometry is not None and cfg.get("clip_k", 10) > 0:
            X = clip_extremes(HsiCube(geometry[0], geometry[1], X), cfg.get("clip_k", 10))[0].data
        cfg["data"] = X
    if args.workers:
        cfg["workers"] = args.workers
    report = run_sweep(sweep_spec_from_dict(cfg))
    export_csv(report, args.out)
    print(f"wrote {len(report)} rows to {args.out}")


COMMANDS = {
    "synth": cmd_synth,
    "extract": cmd_extract,
    "abundances": cmd_abundances,
    "eval": cmd_eval,
    "maps": cmd_maps,
    "bench": cmd_bench,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # --help/--version exit 0, parse errors exit EXIT_USAGE
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"ssnmf {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RankDeficiencyError as exc:
        print(f"ssnmf: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SSNMFError, OSError) as exc:
        print(f"ssnmf: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
