"""Command line entry point: ``sphdki run | partition | metrics | quadcheck``."""
import argparse
import json
import sys

import numpy as np

from .harmonics import solve_weights, verify_rule
from .partition import block_report, random_division, saj
from .sphere import DesignFormatError, load_design, quality_metrics


def _cmd_run(args):
    from .experiments import load_config, run, summarize

    cfg = load_config(args.config)
    out = args.out or cfg.output
    if not out:
        raise SystemExit("no output path: pass --out or set 'output' in the config")
    table = run(cfg)
    table.to_csv(out)
    print(f"{cfg.experiment}: {len(table)} rows -> {out}")
    if args.summary:
        for row in summarize(table):
            print(json.dumps(row))
    return 0


def _cmd_partition(args):
    X = load_design(args.points)
    if args.method == "saj":
        if args.c0 is None:
            raise SystemExit("--c0 is required for saj")
        p = saj(X, args.c0, seed=args.seed, cap_factor=args.cap_factor)
    else:
        if args.m is None:
            raise SystemExit("--m is required for random")
        p = random_division(X.shape[0], args.m, seed=args.seed)
    if args.out:
        p.save(args.out)
    else:
        sys.stdout.write(p.to_text())
    rep = block_report(p, X, c0=args.c0 if args.method == "saj" else None)
    lo, hi, mean = rep.size_stats
    print(
        f"blocks={p.m} size_min={lo} size_max={hi} size_mean={mean:.3f} "
        f"min_separation={rep.min_separation:.6g} violations={len(rep.violations)}",
        file=sys.stderr,
    )
    return 1 if rep.violations else 0


def _cmd_metrics(args):
    X = load_design(args.points)
    cand = load_design(args.candidates) if args.candidates else None
    q = quality_metrics(X, cand)
    print(json.dumps({
        "n_points": q.n_points,
        "separation_radius": q.separation_radius,
        "mesh_norm": q.mesh_norm,
        "mesh_ratio": q.mesh_ratio,
    }))
    return 0


def _cmd_quadcheck(args):
    X = load_design(args.points)
    if args.weights:
        w = np.loadtxt(args.weights, ndmin=1)
    elif args.solve:
        sol = solve_weights(X, args.degree)
        if not sol.feasible:
            print("no positive weights found", file=sys.stderr)
            return 1
        w = sol.weights
    else:
        w = np.full(X.shape[0], 1.0 / X.shape[0])
    rep = verify_rule(X, w, args.degree, tol=args.tol)
    if args.csv:
        rep.to_csv(args.csv)
    for k, r in rep.residuals.items():
        print(f"{k} {r:.3e} {'ok' if r <= rep.tol else 'FAIL'}")
    print(f"positive={rep.positive} normalized={rep.normalized} passed={rep.passed}")
    return 0 if rep.passed else 1


def build_parser():
    ap = argparse.ArgumentParser(prog="sphdki", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment from a TOML config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="CSV path (defaults to the config's 'output')")
    p.add_argument("--summary", action="store_true", help="print best-parameter means as JSON lines")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("partition", help="split a point file into blocks")
    p.add_argument("points")
    p.add_argument("--method", choices=("saj", "random"), default="saj")
    p.add_argument("--c0", type=float)
    p.add_argument("--m", type=int)
    p.add_argument("--cap-factor", type=int, choices=(1, 2), default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_partition)

    p = sub.add_parser("metrics", help="separation radius, mesh norm and mesh ratio of a point file")
    p.add_argument("points")
    p.add_argument("--candidates", help="point file used to estimate the mesh norm")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("quadcheck", help="verify a quadrature rule up to a degree")
    p.add_argument("points")
    p.add_argument("--degree", type=int, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--weights", help="one weight per line; equal weights if omitted")
    g.add_argument("--solve", action="store_true", help="solve for positive weights first (S^2 only)")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--csv")
    p.set_defaults(func=_cmd_quadcheck)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (DesignFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
