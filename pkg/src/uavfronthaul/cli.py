"""Command-line experiment runner.

    python -m uavfronthaul run SPEC.yaml [--seed S ...] [--trials N] [--no-mc] [--out DIR] [--workers W]
    python -m uavfronthaul recipe NAME   [same flags]
    python -m uavfronthaul optimize SPEC.yaml --sigma DEG [--seed S ...] [--out DIR]

The default output directory comes from ``$UAVFRONTHAUL_OUT`` (else
``./results``).  Exit status: 0 on success, 1 if any grid point failed,
2 on configuration errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .experiment import (RECIPES, ExperimentSpec, evaluate_grid, optimize_config, optimum_table_csv,
                         run_recipe, write_outputs)
from .geometry import ConfigError

OUT_ENV = "UAVFRONTHAUL_OUT"


def _default_out() -> Path:
    return Path(os.environ.get(OUT_ENV, "results"))


def _common(p: argparse.ArgumentParser, mc: bool = True) -> None:
    p.add_argument("--seed", type=int, nargs="+", help="topology seed(s); also seeds the Monte Carlo")
    p.add_argument("--out", type=Path, help=f"output directory (default ${OUT_ENV} or ./results)")
    p.add_argument("--workers", type=int, default=1, help="worker processes for grid points")
    if mc:
        p.add_argument("--trials", type=int, help="Monte Carlo trials per grid point")
        p.add_argument("--no-mc", action="store_true", help="closed-form results only")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m uavfronthaul", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config file")
    p.add_argument("spec", type=Path)
    _common(p)

    p = sub.add_parser("recipe", help="run a built-in recipe")
    p.add_argument("name", choices=sorted(RECIPES))
    _common(p)

    p = sub.add_parser("optimize", help="best (N', R_u) under the outage target")
    p.add_argument("spec", type=Path)
    p.add_argument("--sigma", type=float, required=True, help="vibration std in degrees")
    _common(p, mc=False)
    return parser


def _report(results) -> int:
    failed = [r for r in results if not r.ok]
    for r in failed:
        print(f"FAILED seed={r.seed} sigma={r.sigma_deg:g} N'={r.n_rx} R_u={r.reuse}: "
              f"{r.status}: {r.error}", file=sys.stderr)
    print(f"{len(results) - len(failed)}/{len(results)} grid points ok")
    return 1 if failed else 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = args.out if args.out is not None else _default_out()
    try:
        if args.command == "recipe":
            results = run_recipe(args.name, out / args.name, seeds=args.seed, trials=args.trials,
                                 no_mc=args.no_mc, workers=args.workers)
            print(f"wrote {out / args.name}")
            return _report(results)

        spec = ExperimentSpec.load(args.spec)
        if args.command == "run":
            spec = spec.with_overrides(seeds=args.seed, trials=args.trials, no_mc=args.no_mc,
                                       mc_seed=None if args.seed is None else args.seed[0])
            results = evaluate_grid(spec, args.workers)
            write_outputs(spec, results, out / spec.name)
            print(f"wrote {out / spec.name}")
            return _report(results)

        spec = spec.with_overrides(seeds=args.seed, no_mc=True)
        opts = [optimize_config(spec, args.sigma, seed, workers=args.workers) for seed in spec.seeds]
        for o in opts:
            if o.feasible:
                print(f"seed {o.seed}: N'={o.n_rx} R_u={o.reuse} capacity={o.capacity:.3f} bit/s/Hz")
            else:
                print(f"seed {o.seed}: no configuration meets P_out <= {o.target_outage:g}")
        ok = [o for o in opts if o.feasible]
        if len(opts) > 1 and ok:
            print(f"median over {len(ok)} feasible seeds: N'={np.median([o.n_rx for o in ok]):g} "
                  f"R_u={np.median([o.reuse for o in ok]):g} "
                  f"capacity={np.median([o.capacity for o in ok]):.3f} bit/s/Hz")
        if args.out is not None:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / f"{spec.name}_optimum_sigma{args.sigma:g}.csv").write_text(optimum_table_csv(opts))
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
