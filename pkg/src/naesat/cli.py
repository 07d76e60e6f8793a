"""Command-line front end.

Subcommands cover instance generation, single decimation runs, density
sweeps, the coupled-run overlap experiment, the exhaustive census, the
first-moment bound, and influence-range statistics.  Every subcommand
takes --seed, --out, and --format {csv,json}; results go to stdout when
--out is omitted.  Exit codes: 0 success, 2 invalid parameters, 3 I/O
failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import sys

import numpy as np

from .decimation import draw_ordering, draw_seeds, run
from .errors import (
    FormulaParseError,
    InvalidParametersError,
    TooLargeError,
    WindowUnreachableError,
)
from .harness import (
    ExperimentConfig,
    density_sweep,
    rule_from_config,
    stream,
    sweep_trend,
    write_records_csv,
    write_records_json,
)
from .influence import max_influence_stats, influence_range, write_histogram_csv
from .instance import evaluate, generate, load_formula, serialize
from .overlap import OverlapParams, census, first_moment_bound, interpolate, write_tuple_report


@contextlib.contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def _bits(assignment) -> str:
    return "".join(str(int(b)) for b in assignment)


def _add_common(sp):
    sp.add_argument("--seed", type=int, default=0, help="master seed")
    sp.add_argument("--out", default=None, help="output path (default stdout)")
    sp.add_argument(
        "--format", dest="fmt", choices=("csv", "json"), default="json",
        help="output encoding",
    )


def _add_rule(sp):
    sp.add_argument("--rule", choices=("uc", "bp", "sp"), default="uc")
    sp.add_argument("--t", type=int, default=1, help="message-passing rounds")
    sp.add_argument("--sp-mode", choices=("sample", "estimate"), default="sample")
    sp.add_argument("--sp-samples", type=int, default=200)


def _add_window(sp):
    sp.add_argument("--beta", type=float, required=True, help="window upper fraction")
    sp.add_argument("--eta", type=float, required=True, help="window width fraction")
    sp.add_argument("--m", type=int, default=2, help="tuple size")


def _config(args, **extra) -> ExperimentConfig:
    kw = dict(
        algorithm=args.rule,
        n=args.n,
        k=args.k,
        t=args.t,
        seed=args.seed,
        sp_mode=args.sp_mode,
        sp_samples=args.sp_samples,
    )
    kw.update(extra)
    cfg = ExperimentConfig(**kw)
    cfg.validate()
    return cfg


def cmd_gen(args) -> int:
    f = generate(args.n, args.k, args.d, stream(args.seed, "phi/0"))
    # the formula body is always the canonical text format; --format only
    # selects the wrapper
    with _sink(args.out) as fh:
        if args.fmt == "json":
            json.dump({"n": f.n, "k": f.k, "density": args.d, "formula": serialize(f)}, fh)
            fh.write("\n")
        else:
            fh.write(serialize(f))
    return 0


def cmd_solve(args) -> int:
    if (args.formula is None) == (args.d is None):
        raise InvalidParametersError("give exactly one of --formula or --d")
    if args.formula is not None:
        f = load_formula(args.formula)
        density = len(f.clauses) / f.n if f.n else 0.0
    else:
        f = generate(args.n, args.k, args.d, stream(args.seed, "phi/0"))
        density = args.d
    cfg = _config(args, n=f.n, k=f.k, density=float(density), trials=1)
    z = draw_ordering(f.n, stream(args.seed, "z/0"))
    u = draw_seeds(f.n, stream(args.seed, "u/0"))
    keys = stream(args.seed, "spinit/0").integers(0, 1 << 31, size=f.n, dtype=np.int64)
    tr = run(f, rule_from_config(cfg), z, u, init_keys=keys)
    sat = tr.violations == 0 and evaluate(f, tr.assignment).sat
    doc = {
        "algorithm": args.rule,
        "n": f.n,
        "k": f.k,
        "violations": tr.violations,
        "satisfied": bool(sat),
        "assignment": _bits(tr.assignment),
    }
    with _sink(args.out) as fh:
        if args.fmt == "json":
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
        else:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(doc.keys())
            w.writerow(doc.values())
    return 0


def cmd_sweep(args) -> int:
    grid = tuple(float(tok) for tok in args.grid.split(",") if tok.strip())
    cfg = _config(args, grid=grid, trials=args.trials)
    records = density_sweep(cfg)
    smooth = sweep_trend(records)
    with _sink(args.out) as fh:
        if args.fmt == "json":
            write_records_json(records, fh, smooth=smooth)
        else:
            write_records_csv(records, fh, smooth=smooth)
    return 0


def cmd_census(args) -> int:
    p = OverlapParams(beta=args.beta, eta=args.eta, m=args.m)
    f = generate(args.n, args.k, args.d, stream(args.seed, "phi/0"))
    res = census(f, p)
    doc = {
        "n": args.n,
        "k": args.k,
        "density": args.d,
        "beta": args.beta,
        "eta": args.eta,
        "m": args.m,
        "count": res.count,
        "empty": res.empty,
        "witness": None if res.witness is None else [_bits(w) for w in res.witness],
    }
    with _sink(args.out) as fh:
        if args.fmt == "json":
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
        else:
            w = csv.writer(fh, lineterminator="\n")
            keys = [k for k in doc if k != "witness"]
            w.writerow(keys)
            w.writerow(doc[k] for k in keys)
    return 0


def cmd_first_moment(args) -> int:
    p = OverlapParams(beta=args.beta, eta=args.eta, m=args.m)
    b = first_moment_bound(args.n, args.k, args.d, p)
    doc = {
        "n": args.n,
        "k": args.k,
        "density": args.d,
        "beta": args.beta,
        "eta": args.eta,
        "m": args.m,
        "value": b.value,
        "valid": b.valid,
        "per_clause": b.per_clause,
        "distance_sum": b.distance_sum,
    }
    with _sink(args.out) as fh:
        if args.fmt == "json":
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")
        else:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(doc.keys())
            w.writerow(doc.values())
    return 0


def cmd_influence(args) -> int:
    f = generate(args.n, args.k, args.d, stream(args.seed, "phi/0"))
    z = draw_ordering(f.n, stream(args.seed, "z/0"))
    with _sink(args.out) as fh:
        if args.x is not None:
            ir = influence_range(f, z, args.r, args.x)
            members = sorted(ir)
            if args.fmt == "json":
                json.dump(
                    {"x": args.x, "r": args.r, "size": len(ir), "members": members},
                    fh, sort_keys=True,
                )
                fh.write("\n")
            else:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["x", "r", "member"])
                for v in members:
                    w.writerow([args.x, args.r, v])
            return 0
        biggest, hist = max_influence_stats(f, z, args.r)
        if args.fmt == "json":
            json.dump(
                {"r": args.r, "max": biggest,
                 "histogram": {str(k): hist[k] for k in sorted(hist)}},
                fh, sort_keys=True,
            )
            fh.write("\n")
        else:
            write_histogram_csv(hist, fh)
    return 0


def cmd_overlap(args) -> int:
    p = OverlapParams(beta=args.beta, eta=args.eta, m=args.m)
    f = generate(args.n, args.k, args.d, stream(args.seed, "phi/0"))
    cfg = _config(args, n=f.n, k=f.k, density=args.d, trials=1)
    z = draw_ordering(f.n, stream(args.seed, "z/0"))
    report = interpolate(
        f, rule_from_config(cfg), z, p,
        replicates=args.replicates, rng=stream(args.seed, "overlap"),
    )
    with _sink(args.out) as fh:
        if args.fmt == "json":
            write_tuple_report(report, fh)
        else:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t0", "all_satisfying", "window_respected", "i", "j", "distance"])
            for i in range(p.m):
                for j in range(p.m):
                    w.writerow(
                        [report.t0, report.all_satisfying, report.window_respected,
                         i, j, int(report.distances[i, j])]
                    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="naesat",
        description="Random NAE-K-SAT instances, local decimation, and diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("gen", help="generate an instance file")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--d", type=float, required=True)
    _add_common(sp)
    sp.set_defaults(func=cmd_gen)

    sp = sub.add_parser("solve", help="run one decimation pass")
    sp.add_argument("--formula", default=None, help="instance file to load")
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--d", type=float, default=None)
    _add_rule(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("sweep", help="success rate across a density grid")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--grid", required=True, help="comma-separated densities")
    sp.add_argument("--trials", type=int, default=100)
    _add_rule(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("overlap", help="coupled runs inside a distance window")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--d", type=float, required=True)
    sp.add_argument("--replicates", type=int, default=8)
    _add_window(sp)
    _add_rule(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_overlap)

    sp = sub.add_parser("census", help="exhaustive tuple count on a small instance")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--d", type=float, required=True)
    _add_window(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_census)

    sp = sub.add_parser("first-moment", help="expected tuple-count upper bound")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--d", type=float, required=True)
    _add_window(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_first_moment)

    sp = sub.add_parser("influence", help="influence-range sizes")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--d", type=float, required=True)
    sp.add_argument("--r", type=int, default=2, help="variable-graph radius")
    sp.add_argument("--x", type=int, default=None, help="single source variable")
    _add_common(sp)
    sp.set_defaults(func=cmd_influence)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (
        InvalidParametersError,
        FormulaParseError,
        TooLargeError,
        WindowUnreachableError,
        ValueError,
    ) as exc:
        print(f"naesat: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"naesat: i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
