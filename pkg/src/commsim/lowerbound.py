"""Progress-measure machinery behind the communication lower bounds.

Chain-structured instances let any linear-spanning algorithm grow the set of
nonzero coordinates by at most one per round, and only when the single
responsible worker's freshly touched coordinate survives its compressor's
selection.  This module provides the nonzero-prefix measure, a Monte-Carlo
simulation of that survival race, the closed-form suboptimality floors, the
round-count expressions the floors imply, and an audit that replays a real
compressed run against its floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import ProblemInstance
from .compressors import CompressorSpec
from .problems import HardInstance, chain_decay_ratio
from .algorithms import ParamSchedule, run_adiana

# Round-off fills coordinates the exact-arithmetic argument treats as zero.
PROG_TOL = 1e-12


def prog(x, tol: float = PROG_TOL) -> int:
    """1-based index of the last entry with |x_j| > tol; 0 when none."""
    if tol < 0:
        raise ValueError("tol must be >= 0")
    x = np.asarray(x, dtype=np.float64)
    nz = np.nonzero(np.abs(x) > tol)[0]
    return int(nz[-1]) + 1 if nz.size else 0


@dataclass
class ProgressStats:
    """Ensemble statistics of the prefix-growth simulation."""
    omega: float
    n: int
    T: int
    trials: int
    seed: int
    B_final: np.ndarray            # (trials,) final prefix reach
    paths: Optional[np.ndarray]    # (trials, T+1) trajectories when kept

    @property
    def advance_prob(self) -> float:
        return 1.0 / (1.0 + self.omega)

    @property
    def mean_final(self) -> float:
        return float(self.B_final.mean())

    @property
    def expected_final(self) -> float:
        return self.T * self.advance_prob

    @property
    def lemma_threshold(self) -> float:
        """Reach bound e*p*T that holds with probability >= 1 - 1/e."""
        return math.e * self.T * self.advance_prob

    @property
    def frac_within(self) -> float:
        return float(np.mean(self.B_final <= self.lemma_threshold))


def simulate_progress(omega: float, n: int, T: int, trials: int,
                      seed: int = 0, keep_paths: bool = False) -> ProgressStats:
    """Simulate the prefix reach B^t over T rounds.

    Each round exactly one worker can extend the prefix, and its fresh
    coordinate survives independent random sparsification with probability
    1/(1+omega); hence B^T is a Binomial(T, 1/(1+omega)) variable.  The
    worker count n is recorded for bookkeeping but does not enter the
    dynamics (the responsible worker always exists).
    """
    if omega < 0 or n < 1 or trials < 1:
        raise ValueError("need omega >= 0, n >= 1, trials >= 1")
    if T < math.ceil(1.0 + omega):
        raise ValueError("need T >= ceil(1 + omega) rounds for the reach bound")
    p = 1.0 / (1.0 + omega)
    rng = np.random.default_rng(seed)
    advances = rng.random((trials, T)) < p
    paths = None
    if keep_paths:
        paths = np.zeros((trials, T + 1), dtype=np.int64)
        paths[:, 1:] = np.cumsum(advances, axis=1)
    B_final = advances.sum(axis=1).astype(np.int64)
    return ProgressStats(omega=omega, n=n, T=T, trials=trials, seed=seed,
                         B_final=B_final, paths=paths)


def sc_floor(prog_value: int, mu: float, kappa: float, n: int,
             delta: float) -> float:
    """Suboptimality floor (mu/2) q^(2 prog) delta of the strongly convex
    chain family, with q the chain decay ratio for (kappa, n)."""
    if prog_value < 0:
        raise ValueError("prog must be >= 0")
    q = chain_decay_ratio(kappa, n)
    return 0.5 * mu * q ** (2 * prog_value) * delta


def gc_opt_at_prog(k: int, lam: float, L: float, n: int) -> float:
    """Optimal value of the generally convex chain over prefixes of reach k:
    -lam^2 L k / (4 n (k+1))."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return -lam ** 2 * L * k / (4.0 * n * (k + 1.0))


def theory_rounds(case: str, omega: float, n: int, *,
                  kappa: Optional[float] = None, mu: Optional[float] = None,
                  L: Optional[float] = None, delta: Optional[float] = None,
                  eps: Optional[float] = None) -> float:
    """Round-count lower-bound expression with unit constants.

    'sc': (omega + (1 + omega/sqrt(n)) sqrt(kappa)) * ln(mu*delta/eps)
    'gc': omega * ln(L*delta/eps) + (1 + omega/sqrt(n)) * sqrt(L*delta/eps)

    Order-level only; use for ratio and trend comparisons, never absolutes.
    """
    if case == "sc":
        if None in (kappa, mu, delta, eps):
            raise ValueError("sc case needs kappa, mu, delta, eps")
        return (omega + (1.0 + omega / math.sqrt(n)) * math.sqrt(kappa)) \
            * math.log(mu * delta / eps)
    if case == "gc":
        if None in (L, delta, eps):
            raise ValueError("gc case needs L, delta, eps")
        return omega * math.log(L * delta / eps) \
            + (1.0 + omega / math.sqrt(n)) * math.sqrt(L * delta / eps)
    raise ValueError("case must be 'sc' or 'gc'")


def savings_ratio(omega: float, kappa: float, n: int) -> float:
    """Rounds with independent compression relative to the best possible
    without independence: (omega + (1 + omega/sqrt(n)) sqrt(kappa)) /
    ((1 + omega) sqrt(kappa))."""
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    return (omega + (1.0 + omega / math.sqrt(n)) * math.sqrt(kappa)) \
        / ((1.0 + omega) * math.sqrt(kappa))


# ---------------------------------------------------------------------------
# Floor audit of real runs
# ---------------------------------------------------------------------------

@dataclass
class FloorAuditRow:
    round: int
    prog: int
    subopt: float
    floor: float

    @property
    def ok(self) -> bool:
        return self.subopt >= self.floor * (1.0 - 1e-6)


def floor_audit(hard: HardInstance, comp: CompressorSpec, sched: ParamSchedule,
                T: int, seed: int = 0) -> list[FloorAuditRow]:
    """Run the compressed accelerated method on a strongly convex chain
    instance and record (prefix reach, suboptimality, floor) per checkpoint."""
    if hard.q is None:
        raise ValueError("floor audit needs a strongly convex chain family")
    rows: list[FloorAuditRow] = []

    def hook(k, state, xhat, sub):
        reach = prog(xhat)
        rows.append(FloorAuditRow(round=k, prog=reach, subopt=sub,
                                  floor=hard.floor(reach)))

    run_adiana(hard.problem, comp, sched, T, seed, hook=hook)
    return rows
