"""Command-line entry points.

Exit codes: 0 success, 2 configuration error, 3 divergence.
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys

from .core import read_traces_csv
from .compressors import CompressorSpec, min_bits_lower_bound
from .harness import ConfigError, compute_tcc, load_config, run_experiment, tune_grid
from .lowerbound import simulate_progress


def _cmd_run(args) -> int:
    config = load_config(args.config)
    result = run_experiment(config)
    for eps, tcc in result.tcc.items():
        print(f"eps={eps:g}: {tcc}")
    if result.raw_path:
        print(f"raw trace: {result.raw_path}")
        print(f"summary:   {result.summary_path}")
    final = result.summary["subopt_mean"][-1]
    print(f"final mean suboptimality: {final:.6g} after {result.summary['round'][-1]} rounds")
    return 3 if result.diverged else 0


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if not parser.read(args.grid) or "grid" not in parser:
        raise ConfigError(f"grid file {args.grid} needs a [grid] section")
    grid = {key: [float(tok) for tok in val.replace(",", " ").split()]
            for key, val in parser.items("grid")}
    best, results = tune_grid(config, grid, budget_fraction=args.budget)
    print(f"evaluated {len(results)} grid points over a "
          f"{args.budget:.0%} horizon")
    for params, final in results:
        score = "diverged" if math.isinf(final) else f"{final:.6g}"
        print(f"  {params} -> {score}")
    print(f"best: {best}")
    return 0


def _cmd_lowerbound(args) -> int:
    if args.audit:
        from .algorithms import adiana_schedule_sc
        from .lowerbound import floor_audit
        from .problems import gen_zero_chain_sc
        s = args.s or max(1, round(args.d / (1.0 + args.omega)))
        hard = gen_zero_chain_sc(L=args.kappa, mu=1.0, n=args.n, d=args.d)
        spec = CompressorSpec("random_s", d=args.d, s=s)
        sched = adiana_schedule_sc(hard.problem.L, 1.0, args.n, spec.omega)
        rows = floor_audit(hard, spec, sched, T=args.rounds, seed=args.seed)
        lines = ["round,prog,subopt,floor,within"]
        lines += [f"{r.round},{r.prog},{r.subopt!r},{r.floor!r},{int(r.ok)}"
                  for r in rows]
        summary = (f"floor audit: {len(rows)} checkpoints, "
                   f"{sum(not r.ok for r in rows)} violations, "
                   f"max reach {max(r.prog for r in rows)}")
    else:
        stats = simulate_progress(args.omega, args.n, args.rounds, args.trials,
                                  seed=args.seed)
        bound = stats.lemma_threshold
        lines = ["trial,final_reach,bound,within"]
        lines += [f"{t},{int(b)},{bound!r},{int(b <= bound)}"
                  for t, b in enumerate(stats.B_final)]
        summary = (f"mean final reach {stats.mean_final:.3f} "
                   f"(advance probability predicts {stats.expected_final:.3f}); "
                   f"fraction within reach bound {stats.frac_within:.4f} "
                   f"(guarantee {1 - math.exp(-1):.4f})")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    print(summary, file=sys.stderr)
    return 0


def _cmd_bits(args) -> int:
    spec = CompressorSpec(kind=args.compressor, d=args.d, s=args.s,
                          bits_per_entry=args.r)
    if spec.fixed_length:
        cost = spec.per_message_bits()
        print(f"per-message bits: {cost}")
    else:
        print(f"per-message bits: data-dependent, at least {spec.min_message_bits()}")
    floor = min_bits_lower_bound(args.d, spec.omega, args.r)
    print(f"omega: {spec.omega:.6g}")
    print(f"unbiased-compression floor: {floor:.6g} bits")
    return 0


def _cmd_tcc(args) -> int:
    traces = read_traces_csv(args.raw_csv)
    for eps in args.eps:
        print(f"eps={eps:g}: {compute_tcc(traces, eps)}")
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="commsim",
        description="Distributed optimization under communication compression")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a configured experiment ensemble")
    p.add_argument("config")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("sweep", help="grid-tune parameters on a truncated horizon")
    p.add_argument("config")
    p.add_argument("--grid", required=True)
    p.add_argument("--budget", type=float, default=0.2)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("lowerbound", help="simulate the prefix-growth race, "
                       "or audit a real run against the suboptimality floor")
    p.add_argument("--omega", type=float, required=True)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--audit", action="store_true",
                   help="run the compressed accelerated method on the hard "
                        "chain instance and emit per-checkpoint floor rows")
    p.add_argument("--kappa", type=float, default=1e4,
                   help="chain condition number for --audit")
    p.add_argument("--d", type=int, default=200, help="chain depth for --audit")
    p.add_argument("--s", type=int, help="kept coordinates for --audit")
    p.set_defaults(func=_cmd_lowerbound)

    p = sub.add_parser("bits", help="per-message cost and information floor")
    p.add_argument("--compressor", required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--s", type=int)
    p.add_argument("--r", type=int, default=64)
    p.set_defaults(func=_cmd_bits)

    p = sub.add_parser("tcc", help="evaluate total communication cost from a raw trace CSV")
    p.add_argument("raw_csv")
    p.add_argument("--eps", type=float, action="append", required=True)
    p.set_defaults(func=_cmd_tcc)

    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
