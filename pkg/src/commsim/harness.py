"""Experiment orchestration.

Flat INI-style configs (sections [problem], [algorithm], [compressor],
[run]) drive multi-trial seeded runs, raw/summary CSV emission, total
communication cost evaluation at target accuracies, and deterministic
log-grid parameter tuning over a truncated horizon.

The expectation in the round-count definition is approximated by the sample
mean across trials; trial t uses master seed ``seed + t``.  The environment
variable COMMSIM_SEED overrides the configured base seed.
"""

from __future__ import annotations

import configparser
import itertools
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .core import (ProblemInstance, Trace, precompute_reference,
                   summarize_traces, write_summary_csv, write_traces_csv)
from .compressors import CompressorSpec
from .problems import (LeastSquaresSpec, gen_constructed_quadratic,
                       gen_least_squares, gen_zero_chain_gc, gen_zero_chain_sc,
                       load_libsvm)
from .algorithms import (PRESETS, adiana_schedule_gc, adiana_schedule_sc,
                         manual_schedule, run_adiana, run_diana, run_ef21,
                         run_nesterov)


class ConfigError(ValueError):
    """Raised for malformed or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    problem: dict
    algorithm: dict
    compressor: dict
    run: dict

    @property
    def trials(self) -> int:
        return int(self.run.get("trials", 1))

    @property
    def rounds(self) -> int:
        return int(self.run["rounds"])

    @property
    def seed(self) -> int:
        env = os.environ.get("COMMSIM_SEED")
        return int(env) if env else int(self.run.get("seed", 0))

    @property
    def eps_targets(self) -> list[float]:
        raw = self.run.get("eps", "")
        if not raw:
            return []
        eps = [float(tok) for tok in str(raw).replace(",", " ").split()]
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("eps targets must be strictly decreasing")
        return eps


def load_config(path) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    sections = {s: dict(parser.items(s)) for s in parser.sections()}
    for required in ("problem", "algorithm", "run"):
        if required not in sections:
            raise ConfigError(f"config is missing the [{required}] section")
    cfg = ExperimentConfig(problem=sections["problem"],
                           algorithm=sections["algorithm"],
                           compressor=sections.get("compressor", {}),
                           run=sections["run"])
    if cfg.trials < 1:
        raise ConfigError("trials must be >= 1")
    if "rounds" not in cfg.run:
        raise ConfigError("[run] needs a rounds entry")
    cfg.eps_targets  # validate ordering eagerly
    return cfg


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def build_problem(cfg: dict) -> ProblemInstance:
    kind = cfg.get("kind")
    try:
        if kind == "least_squares":
            spec = LeastSquaresSpec(n=int(cfg.get("n", 400)), M=int(cfg.get("m", 25)),
                                    d=int(cfg.get("d", 20)),
                                    cond=float(cfg.get("cond", 100)),
                                    seed=int(cfg.get("seed", 0)))
            return gen_least_squares(spec)
        if kind == "constructed_quadratic":
            return gen_constructed_quadratic(mu=float(cfg.get("mu", 1.0)),
                                             L=float(cfg.get("l", 1e4)),
                                             d=int(cfg.get("d", 20)),
                                             n=int(cfg.get("n", 400)))
        if kind == "zero_chain_sc":
            hard = gen_zero_chain_sc(L=float(cfg.get("l", 1e4)),
                                     mu=float(cfg.get("mu", 1.0)),
                                     n=int(cfg.get("n", 8)),
                                     d=int(cfg.get("d", 200)),
                                     delta=float(cfg.get("delta", 1.0)))
            return hard.problem
        if kind == "zero_chain_gc":
            hard = gen_zero_chain_gc(L=float(cfg.get("l", 1.0)),
                                     n=int(cfg.get("n", 2)),
                                     d=int(cfg.get("d", 100)),
                                     delta=float(cfg.get("delta", 1.0)))
            return hard.problem
        if kind == "libsvm":
            prob = load_libsvm(cfg["path"], n=int(cfg.get("n", 400)))
            precompute_reference(prob)
            return prob
    except (ValueError, KeyError, OSError) as exc:
        raise ConfigError(f"bad [problem] section: {exc}") from exc
    raise ConfigError(f"unknown problem kind {kind!r}")


def build_compressor(cfg: dict, d: int) -> Optional[CompressorSpec]:
    kind = cfg.get("kind", "none")
    if kind in ("none", ""):
        return None
    try:
        s = int(cfg["s"]) if "s" in cfg else None
        return CompressorSpec(kind=kind, d=d, s=s,
                              randomness=cfg.get("randomness", "independent"),
                              bits_per_entry=int(cfg.get("bits_per_entry", 64)))
    except ValueError as exc:
        raise ConfigError(f"bad [compressor] section: {exc}") from exc


def _apply_preset(alg: dict, comp: dict) -> tuple[dict, dict]:
    name = alg.get("preset")
    if not name:
        return alg, comp
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    entry = PRESETS[name]
    merged_alg = {k: v for k, v in entry.items() if k != "compressor"}
    merged_alg.update({k: v for k, v in alg.items() if k != "preset"})
    merged_comp = dict(entry.get("compressor", {}))
    merged_comp.update(comp)
    return merged_alg, merged_comp


def make_runner(config: ExperimentConfig,
                problem: ProblemInstance) -> Callable[[int], Trace]:
    """Compile config sections into a seeded single-trial runner."""
    alg, comp_cfg = _apply_preset(dict(config.algorithm), dict(config.compressor))
    name = alg.get("algorithm") or alg.get("name")
    T = config.rounds
    stride = int(config.run["checkpoint_every"]) if "checkpoint_every" in config.run else None
    spec = build_compressor(comp_cfg, problem.d)

    def need_spec():
        if spec is None:
            raise ConfigError(f"{name} needs a [compressor] section")
        return spec

    try:
        if name == "nesterov":
            eta, theta = float(alg["eta"]), float(alg["theta"])

            def runner(seed):
                return run_nesterov(problem, eta, theta, T, checkpoint_every=stride)
            return runner
        if name == "diana":
            gamma = float(alg["gamma"])
            alpha = float(alg["alpha"]) if "alpha" in alg else None

            def runner(seed):
                return run_diana(problem, need_spec(), gamma, T, seed,
                                 alpha=alpha, checkpoint_every=stride)
            return runner
        if name == "ef21":
            gamma = float(alg["gamma"])

            def runner(seed):
                return run_ef21(problem, need_spec(), gamma, T, seed,
                                checkpoint_every=stride)
            return runner
        if name == "adiana":
            sp = need_spec()
            regime = alg.get("schedule", "manual")
            if regime == "sc":
                sched = adiana_schedule_sc(problem.L, problem.mu, problem.n, sp.omega)
            elif regime == "gc":
                sched = adiana_schedule_gc(problem.L, problem.n, sp.omega)
            else:
                sched = manual_schedule(
                    eta=float(alg["eta"]), theta1=float(alg["theta1"]),
                    theta2=float(alg["theta2"]), p=float(alg["p"]),
                    alpha=float(alg["alpha"]) if "alpha" in alg
                    else 1.0 / (1.0 + sp.omega),
                    mu=problem.mu)
            h0 = alg.get("h0", "zero")
            track = str(config.run.get("track_lyapunov", "")).lower() in ("1", "true", "yes")

            def runner(seed):
                return run_adiana(problem, sp, sched, T, seed, h0=h0,
                                  track_lyapunov=track, checkpoint_every=stride)
            return runner
    except KeyError as exc:
        raise ConfigError(f"[algorithm] {name} is missing parameter {exc}") from exc
    raise ConfigError(f"unknown algorithm {name!r}")


# ---------------------------------------------------------------------------
# Total communication cost
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TccResult:
    reached: bool
    rounds: Optional[int]
    bits: Optional[float]

    def __str__(self) -> str:
        if not self.reached:
            return "unreached"
        return f"T_eps={self.rounds} bits={self.bits:.6g}"


def compute_tcc(traces: Sequence[Trace], epsilon: float) -> TccResult:
    """First checkpoint where the trial-averaged suboptimality reaches
    epsilon, and the cumulative per-worker bits spent by then."""
    if not traces:
        raise ValueError("empty trace ensemble")
    summary = summarize_traces(traces)
    mask = summary["subopt_mean"] <= epsilon
    if not mask.any():
        return TccResult(False, None, None)
    idx = int(np.argmax(mask))
    return TccResult(True, int(summary["round"][idx]), float(summary["bits_cum"][idx]))


def tcc_dominates(traces_a: Sequence[Trace], traces_b: Sequence[Trace],
                  epsilon: float) -> bool:
    """Certify that ensemble a reaches epsilon with strictly fewer bits than b.

    When b has not reached epsilon by the end of its (possibly capped) run,
    its eventual cost can only exceed the bits it has already spent, so the
    comparison remains a strict certificate.
    """
    a = compute_tcc(traces_a, epsilon)
    if not a.reached:
        return False
    b = compute_tcc(traces_b, epsilon)
    if b.reached:
        return a.bits < b.bits
    b_spent = float(summarize_traces(traces_b)["bits_cum"][-1])
    return a.bits < b_spent


# ---------------------------------------------------------------------------
# Experiments
# ---------------------------------------------------------------------------

@dataclass
class ExperimentResult:
    config: ExperimentConfig
    traces: list[Trace]
    summary: dict
    tcc: dict = field(default_factory=dict)
    raw_path: Optional[Path] = None
    summary_path: Optional[Path] = None

    @property
    def diverged(self) -> bool:
        return any(t.diverged for t in self.traces)


def run_experiment(config: ExperimentConfig,
                   problem: Optional[ProblemInstance] = None) -> ExperimentResult:
    """Run the configured trial ensemble and emit raw + summary CSVs.

    Output rows are canonical (ordered by trial then round), so reruns with
    the same config and seed are byte-identical.
    """
    if problem is None:
        problem = build_problem(config.problem)
    runner = make_runner(config, problem)
    base = config.seed
    traces = [runner(base + t) for t in range(config.trials)]
    summary = summarize_traces(traces)
    result = ExperimentResult(config=config, traces=traces, summary=summary)
    for eps in config.eps_targets:
        result.tcc[eps] = compute_tcc(traces, eps)
    out = config.run.get("out")
    if out:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        result.raw_path = out.with_name(out.name + "_raw.csv")
        result.summary_path = out.with_name(out.name + "_summary.csv")
        write_traces_csv(traces, result.raw_path)
        write_summary_csv(summary, result.summary_path)
    return result


# ---------------------------------------------------------------------------
# Deterministic grid tuning
# ---------------------------------------------------------------------------

def tune_grid(config: ExperimentConfig, grid: dict[str, Sequence[float]],
              budget_fraction: float = 0.2,
              problem: Optional[ProblemInstance] = None) -> tuple[dict, list]:
    """Evaluate every grid point over the first ``budget_fraction`` of the
    round budget; return (best parameter dict, per-point results).

    The winner minimizes final trial-averaged suboptimality; ties break
    toward the smaller step size (eta or gamma), then lexicographic parameter
    order.  Diverged points are reported with infinite score; if every point
    diverges a ConfigError lists the grid.
    """
    if not (0 < budget_fraction <= 1):
        raise ConfigError("budget_fraction must lie in (0, 1]")
    if not grid:
        raise ConfigError("empty tuning grid")
    if problem is None:
        problem = build_problem(config.problem)
    horizon = max(1, int(round(config.rounds * budget_fraction)))
    names = sorted(grid)
    results = []
    for combo in itertools.product(*(grid[k] for k in names)):
        params = dict(zip(names, combo))
        trial_cfg = ExperimentConfig(
            problem=config.problem,
            algorithm={**config.algorithm,
                       **{k: repr(v) for k, v in params.items()}},
            compressor=config.compressor,
            run={**config.run, "rounds": str(horizon), "out": ""})
        try:
            res = run_experiment(trial_cfg, problem=problem)
            final = math.inf if res.diverged else float(res.summary["subopt_mean"][-1])
        except (FloatingPointError, OverflowError):
            final = math.inf
        results.append((params, final))
    step_name = next((k for k in ("eta", "gamma") if k in names), None)

    def sort_key(item):
        params, final = item
        step = params.get(step_name, math.inf) if step_name else math.inf
        return (final, step, tuple(params[k] for k in names))

    results.sort(key=sort_key)
    best, best_final = results[0]
    if math.isinf(best_final):
        raise ConfigError(f"every grid point diverged: {grid}")
    return best, results
