"""Command-line entry point.

Subcommands: bench (run a benchmark config), counterexample (the CV failure
mode), capacity (deletion-capacity lower bound), prox-check (prox solver vs
a brute-force grid oracle). Exit codes: 0 success, 2 config error,
3 numerical failure.
"""

import argparse
import json
import os
import sys
from dataclasses import fields

import numpy as np

from . import bench, counterexample, linalg, plots, prox, unlearner
from .errors import ConfigError, UnlearnkitError
from .objectives import L1, SmoothnessConstants

_LIST_KEYS = {"lam_grid", "mechanisms", "seeds", "explicit_ids"}
_BOOL_KEYS = {"has_header", "plots"}


def _coerce(key, raw):
    ftypes = {f.name: f for f in fields(bench.BenchConfig)}
    if key not in ftypes:
        raise ConfigError(f"unknown config key {key!r}")
    if key in _BOOL_KEYS:
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if key in _LIST_KEYS:
        parts = [p.strip() for p in raw.split(",") if p.strip()]
        if key == "mechanisms":
            return tuple(parts)
        if key == "seeds" or key == "explicit_ids":
            return tuple(int(p) for p in parts)
        return tuple(float(p) for p in parts)
    if key in ("n", "d", "label_column", "m", "eval_every"):
        return int(raw)
    if key in ("separation", "mix", "tol", "p_positive", "eps", "delta",
               "noise_override"):
        return float(raw)
    return raw.strip()


def _read_config_file(path):
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, raw = line.split("=", 1)
            values[key.strip()] = _coerce(key.strip(), raw)
    return values


def _cmd_bench(args):
    values = {}
    try:
        if args.config:
            values.update(_read_config_file(args.config))
        for f in fields(bench.BenchConfig):
            cli_value = getattr(args, f.name, None)
            if cli_value is not None:
                values[f.name] = _coerce(f.name, str(cli_value))
        if args.seed is not None:
            values["seeds"] = (args.seed,)
        if args.out is not None:
            values["out"] = args.out
        config = bench.BenchConfig(**values)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from exc
    report = bench.run_bench(config)
    out = config.out or "bench_report.jsonl"
    bench.write_report(report, out)
    print(f"wrote {len(report.records)} records to {out}")
    if config.plots:
        for p in plots.render_report_figures(report,
                                             os.path.dirname(os.path.abspath(out))):
            print(f"wrote {p}")
    return 0


def _cmd_counterexample(args):
    report = counterexample.run_counterexample(args.n, args.big_lambda)
    payload = json.dumps(report.to_dict(), indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload + "\n")
        print(f"wrote {args.out}")
    else:
        print(payload)
    return 0


def _cmd_capacity(args):
    constants = SmoothnessConstants(mu=args.mu, L=args.L, M=args.M, C=args.C)
    m = unlearner.capacity_lower_bound(args.n, args.d, args.eps, args.delta,
                                       args.gamma, constants)
    print(m)
    return 0


def _cmd_prox_check(args):
    """Compare prox_solve to a brute-force grid search on random problems."""
    rng = np.random.default_rng(args.seed or 0)
    worst = 0.0
    for trial in range(args.trials):
        d = 1 + trial % 2
        b = rng.standard_normal((d, d))
        h = b.T @ b + np.eye(d)
        v = rng.uniform(-2, 2, size=d)
        lam = rng.uniform(0.1, 1.0)
        factor = linalg.factorize(h)
        got = prox.prox_solve(prox.ProxProblem(v=v, metric=factor, lam=lam,
                                               reg=L1))
        grid = np.arange(-3.0, 3.0, 1e-4)
        if d == 1:
            vals = 0.5 * h[0, 0] * (grid - v[0]) ** 2 + lam * np.abs(grid)
            best = np.array([grid[np.argmin(vals)]])
        else:
            best = _grid_search_2d(h, v, lam, grid)
        worst = max(worst, float(np.max(np.abs(got - best))))
    ok = worst <= 1e-3
    print(f"prox-check: {args.trials} problems, worst gap {worst:.2e} "
          f"-> {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 3


def _grid_search_2d(h, v, lam, grid):
    # coarse-to-fine search keeps the 2-d oracle tractable at step 1e-4
    coarse = np.arange(-3.0, 3.0, 0.01)
    best, best_val = None, np.inf
    for a in coarse:
        diff0 = a - v[0]
        vals = (0.5 * (h[0, 0] * diff0**2 + 2 * h[0, 1] * diff0 * (coarse - v[1])
                       + h[1, 1] * (coarse - v[1]) ** 2)
                + lam * (abs(a) + np.abs(coarse)))
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val, best = vals[k], (a, coarse[k])
    fine0 = np.arange(best[0] - 0.02, best[0] + 0.02, 1e-4)
    fine1 = np.arange(best[1] - 0.02, best[1] + 0.02, 1e-4)
    best_val = np.inf
    for a in fine0:
        diff0 = a - v[0]
        vals = (0.5 * (h[0, 0] * diff0**2 + 2 * h[0, 1] * diff0 * (fine1 - v[1])
                       + h[1, 1] * (fine1 - v[1]) ** 2)
                + lam * (abs(a) + np.abs(fine1)))
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val, out = vals[k], np.array([a, fine1[k]])
    return out


def build_parser():
    parser = argparse.ArgumentParser(
        prog="unlearnkit",
        description="approximate unlearning mechanisms for convex ERM")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--out", default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p_bench = sub.add_parser("bench", help="run a benchmark configuration")
    p_bench.add_argument("--config", default=None,
                         help="key=value config file; flags override it")
    for f in fields(bench.BenchConfig):
        p_bench.add_argument(f"--{f.name.replace('_', '-')}", dest=f.name,
                             default=None)
    p_bench.set_defaults(func=_cmd_bench)

    p_ce = sub.add_parser("counterexample",
                          help="cross-validation failure-mode report")
    p_ce.add_argument("--n", type=int, required=True)
    p_ce.add_argument("--big-lambda", type=float,
                      default=counterexample.DEFAULT_BIG_LAMBDA)
    p_ce.set_defaults(func=_cmd_counterexample)

    p_cap = sub.add_parser("capacity", help="deletion-capacity lower bound")
    p_cap.add_argument("--n", type=int, required=True)
    p_cap.add_argument("--d", type=int, required=True)
    p_cap.add_argument("--eps", type=float, default=1.0)
    p_cap.add_argument("--delta", type=float, default=0.005)
    p_cap.add_argument("--gamma", type=float, default=0.01)
    p_cap.add_argument("--mu", type=float, required=True)
    p_cap.add_argument("--L", type=float, required=True)
    p_cap.add_argument("--M", type=float, required=True)
    p_cap.add_argument("--C", type=float, required=True)
    p_cap.set_defaults(func=_cmd_capacity)

    p_px = sub.add_parser("prox-check", help="prox solver vs grid oracle")
    p_px.add_argument("--trials", type=int, default=20)
    p_px.set_defaults(func=_cmd_prox_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (UnlearnkitError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
