"""Shared primitives: dense vectors, the distributed problem abstraction with
per-worker gradient oracles, and the run-trace record used by every algorithm.

All vectors are dense 1-D float64 numpy arrays.  Problem instances are
immutable after construction (the lazily computed reference optimum is cached
exactly once); oracles must be pure functions of their inputs.
"""

from __future__ import annotations

import math
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.sparse.linalg import LinearOperator, eigsh
from scipy.sparse.linalg import ArpackNoConvergence

Vector = NDArray[np.float64]

# Reported suboptimality is floored here so log-scale plots never see zero.
SUBOPT_FLOOR = 1e-15

TRACE_COLUMNS = (
    "algorithm", "compressor", "omega", "n", "d", "seed",
    "trial", "round", "bits_cum", "subopt", "lyapunov",
)
TRACE_HEADER = ",".join(TRACE_COLUMNS)


def as_vector(x, d: Optional[int] = None) -> Vector:
    """Coerce to a finite 1-D float64 array, checking length when given."""
    v = np.ascontiguousarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if d is not None and v.shape[0] != d:
        raise ValueError(f"dimension mismatch: expected length {d}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


class ProblemInstance:
    """A sum-structured objective f(x) = (1/n) sum_i f_i(x) with oracles.

    Parameters
    ----------
    n, d : worker count and dimension.
    local_value, local_grad : per-worker oracles ``(i, x) -> float | vector``
        with workers indexed ``0..n-1``.
    L, mu : smoothness / strong-convexity constants valid for every f_i.
    delta : bound on ||x0 - x*||^2 (may be filled by ``precompute_reference``).
    x0 : starting point shared by all algorithms (defaults to zero).
    x_star, f_star : minimizer / optimal value when known in closed form.
    batch_value : optional fast path computing f(x) directly.
    batch_grads : optional fast path returning the (n, d) array of all local
        gradients at once; algorithms use it when present.
    metadata : free-form reproducibility notes (condition numbers, seeds...).
    """

    def __init__(self, n: int, d: int,
                 local_value: Callable[[int, Vector], float],
                 local_grad: Callable[[int, Vector], Vector],
                 L: float, mu: float,
                 delta: Optional[float] = None,
                 x0: Optional[Vector] = None,
                 x_star: Optional[Vector] = None,
                 f_star: Optional[float] = None,
                 name: str = "problem",
                 batch_value: Optional[Callable[[Vector], float]] = None,
                 batch_grads: Optional[Callable[[Vector], np.ndarray]] = None,
                 metadata: Optional[dict] = None):
        if n < 1 or d < 1:
            raise ValueError("need n >= 1 workers and d >= 1 dimensions")
        if not (L >= mu >= 0):
            raise ValueError("constants must satisfy L >= mu >= 0")
        self.n = int(n)
        self.d = int(d)
        self.L = float(L)
        self.mu = float(mu)
        self.name = name
        self._local_value = local_value
        self._local_grad = local_grad
        self._batch_value = batch_value
        self._batch_grads = batch_grads
        self.x0 = np.zeros(d) if x0 is None else as_vector(x0, d)
        self.x_star = None if x_star is None else as_vector(x_star, d)
        self._f_star = None if f_star is None else float(f_star)
        self.delta = None if delta is None else float(delta)
        self.metadata = dict(metadata or {})

    # -- oracles ---------------------------------------------------------

    def worker_value(self, i: int, x: Vector) -> float:
        return float(self._local_value(i, x))

    def worker_grad(self, i: int, x: Vector) -> Vector:
        return self._local_grad(i, x)

    def worker_grads(self, x: Vector) -> np.ndarray:
        """All n local gradients at x, stacked as an (n, d) array."""
        if self._batch_grads is not None:
            return self._batch_grads(x)
        out = np.empty((self.n, self.d))
        for i in range(self.n):
            out[i] = self._local_grad(i, x)
        return out

    def f(self, x: Vector) -> float:
        if self._batch_value is not None:
            return float(self._batch_value(x))
        return sum(self._local_value(i, x) for i in range(self.n)) / self.n

    def grad(self, x: Vector) -> Vector:
        return self.worker_grads(x).mean(axis=0)

    # -- reference optimum -------------------------------------------------

    @property
    def has_f_star(self) -> bool:
        return self._f_star is not None

    @property
    def f_star(self) -> float:
        if self._f_star is None:
            raise RuntimeError(
                "f_star is not available for this instance; call "
                "precompute_reference(problem) once (or construct with f_star=...)")
        return self._f_star

    def _set_reference(self, f_star: float, x_star: Optional[Vector] = None) -> None:
        # One-time cache fill; instances otherwise stay immutable.
        self._f_star = float(f_star)
        if self.x_star is None and x_star is not None:
            self.x_star = np.array(x_star)
        if self.delta is None and self.x_star is not None:
            self.delta = float(np.dot(self.x0 - self.x_star, self.x0 - self.x_star))

    def kappa(self) -> float:
        return math.inf if self.mu == 0 else self.L / self.mu


def grad_full(problem: ProblemInstance, x) -> Vector:
    """Arithmetic mean of the n local gradients, (1/n) sum_i grad f_i(x)."""
    x = as_vector(x, problem.d)
    return problem.grad(x)


def suboptimality(problem: ProblemInstance, x) -> float:
    """f(x) - f*; requires a known or precomputed optimal value."""
    x = as_vector(x, problem.d)
    gap = problem.f(x) - problem.f_star
    if gap < -1e-9:
        raise RuntimeError(
            f"suboptimality {gap:.3e} < -1e-9: the cached f_star is inconsistent")
    return gap


# ---------------------------------------------------------------------------
# Reference optimum for instances without a closed form
# ---------------------------------------------------------------------------

def precompute_reference(problem: ProblemInstance,
                         max_iters: int = 100_000,
                         grad_tol: float = 1e-12) -> float:
    """Compute and cache f* by a high-precision uncompressed accelerated run.

    Runs momentum gradient descent with constants estimated by power/Lanczos
    iteration, stopping at ``max_iters`` iterations or gradient norm below
    ``grad_tol``, whichever comes first.  Also fills x_star / delta when the
    instance lacks them.
    """
    if problem.has_f_star:
        return problem.f_star
    L_est, mu_est = estimate_smoothness(problem, trials=2, seed=0)
    eta = 1.0 / L_est
    x = problem.x0.copy()
    x_prev = x.copy()
    best_f, best_x = problem.f(x), x.copy()
    t = 1.0
    theta_sc = math.sqrt(mu_est / L_est) if mu_est > 1e-12 * L_est else None
    for k in range(max_iters):
        if theta_sc is not None:
            beta = (1 - theta_sc) / (1 + theta_sc)
        else:
            t_next = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
            beta = (t - 1) / t_next
            t = t_next
        y = x + beta * (x - x_prev)
        g = problem.grad(y)
        gnorm = float(np.linalg.norm(g))
        x_prev = x
        x = y - eta * g
        fx = problem.f(x)
        if fx < best_f:
            best_f, best_x = fx, x.copy()
        if gnorm <= grad_tol:
            break
    problem._set_reference(best_f, best_x)
    return problem.f_star


def _hvp(problem: ProblemInstance, x: Vector, eps: float = 1e-5):
    """Hessian-vector product oracle from central gradient differences."""
    def mv(v):
        v = np.asarray(v, dtype=np.float64).ravel()
        nv = np.linalg.norm(v)
        if nv == 0:
            return np.zeros_like(v)
        h = eps / nv
        return (problem.grad(x + h * v) - problem.grad(x - h * v)) / (2 * h)
    return mv


def estimate_smoothness(problem: ProblemInstance, trials: int = 3,
                        seed: int = 0) -> tuple[float, float]:
    """Estimate the extreme curvature (L_est, mu_est) of f at the start point.

    Uses Lanczos iteration on the Hessian-vector oracle (exact for
    quadratics, finite-difference otherwise).  ``trials`` controls the number
    of random restarts; the extreme estimates over restarts are returned.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    d = problem.d
    mv = _hvp(problem, problem.x0)
    op = LinearOperator((d, d), matvec=mv, dtype=np.float64)
    rng = np.random.default_rng(seed)
    L_est, mu_est = -math.inf, math.inf

    def _extreme(which, v0):
        try:
            vals = eigsh(op, k=1, which=which, v0=v0, maxiter=20_000,
                         tol=1e-12, return_eigenvectors=False)
            return float(vals[0])
        except ArpackNoConvergence as exc:  # pragma: no cover - rare
            if len(exc.eigenvalues):
                return float(exc.eigenvalues[0])
            raise

    if d == 1:
        v = np.ones(1)
        lam = float(mv(v)[0])
        return lam, lam
    for _ in range(trials):
        v0 = rng.standard_normal(d)
        L_est = max(L_est, _extreme("LA", v0))
        mu_est = min(mu_est, _extreme("SA", v0))
    return L_est, max(mu_est, 0.0)


def check_gradients(problem: ProblemInstance, probes: int = 100, seed: int = 0,
                    scale: float = 1.0, rtol: float = 1e-5) -> float:
    """Verify oracle gradients against central finite differences of values.

    Returns the worst relative error over directional derivatives at random
    probe points; raises AssertionError when it exceeds ``rtol``.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(probes):
        i = int(rng.integers(problem.n))
        x = scale * rng.standard_normal(problem.d)
        v = rng.standard_normal(problem.d)
        v /= np.linalg.norm(v)
        h = 1e-6 * (1.0 + np.linalg.norm(x))
        fd = (problem.worker_value(i, x + h * v) - problem.worker_value(i, x - h * v)) / (2 * h)
        an = float(np.dot(problem.worker_grad(i, x), v))
        denom = max(abs(fd), abs(an), 1e-8)
        worst = max(worst, abs(fd - an) / denom)
    if worst > rtol:
        raise AssertionError(f"gradient/value oracle mismatch: rel err {worst:.3e} > {rtol:.1e}")
    return worst


# ---------------------------------------------------------------------------
# Run traces
# ---------------------------------------------------------------------------

class Trace:
    """Per-round record of one algorithm run.

    Each record holds the round index, the suboptimality of the algorithm's
    output rule at that round, cumulative per-worker bits transmitted (the
    cross-worker average for message-dependent compressors), and optionally a
    potential-function diagnostic value.
    """

    def __init__(self, algorithm: str, compressor: str, omega: float,
                 n: int, d: int, seed: int, track_lyapunov: bool = False):
        self.algorithm = algorithm
        self.compressor = compressor
        self.omega = float(omega)
        self.n = int(n)
        self.d = int(d)
        self.seed = int(seed)
        self.rounds: list[int] = []
        self.subopt: list[float] = []
        self.bits_cum: list[float] = []
        self.lyapunov: Optional[list[float]] = [] if track_lyapunov else None
        self.diverged = False

    def record(self, rnd: int, subopt: float, bits_cum: float,
               lyapunov: Optional[float] = None) -> None:
        if self.rounds and rnd <= self.rounds[-1]:
            raise ValueError("round indices must be strictly increasing")
        if self.bits_cum and bits_cum < self.bits_cum[-1]:
            raise ValueError("cumulative bits must be non-decreasing")
        if not math.isfinite(bits_cum):
            raise ValueError("non-finite bit count")
        self.rounds.append(int(rnd))
        self.subopt.append(max(float(subopt), SUBOPT_FLOOR))
        self.bits_cum.append(float(bits_cum))
        if self.lyapunov is not None:
            self.lyapunov.append(float(lyapunov) if lyapunov is not None else math.nan)

    def __len__(self) -> int:
        return len(self.rounds)


def _fmt(x: float) -> str:
    # repr gives the shortest round-trip decimal, keeping CSV bytes stable.
    return repr(float(x))


def write_traces_csv(traces: Sequence[Trace], path) -> None:
    """Serialize a trial ensemble under the fixed trace schema."""
    lines = [TRACE_HEADER]
    for trial, tr in enumerate(traces):
        prefix = (f"{tr.algorithm},{tr.compressor},{_fmt(tr.omega)},"
                  f"{tr.n},{tr.d},{tr.seed},{trial}")
        for idx in range(len(tr)):
            if tr.lyapunov is not None and not math.isnan(tr.lyapunov[idx]):
                ly = _fmt(tr.lyapunov[idx])
            else:
                ly = ""
            lines.append(f"{prefix},{tr.rounds[idx]},{_fmt(tr.bits_cum[idx])},"
                         f"{_fmt(tr.subopt[idx])},{ly}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_traces_csv(path) -> list[Trace]:
    with open(path) as fh:
        header = fh.readline().strip()
        if header != TRACE_HEADER:
            raise ValueError(f"unexpected trace header: {header!r}")
        traces: dict[int, Trace] = {}
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(TRACE_COLUMNS):
                raise ValueError(f"malformed trace row at line {lineno}")
            alg, comp, omega, n, d, seed, trial, rnd, bits, sub, ly = parts
            trial = int(trial)
            if trial not in traces:
                traces[trial] = Trace(alg, comp, float(omega), int(n), int(d),
                                      int(seed), track_lyapunov=bool(ly))
            tr = traces[trial]
            if tr.lyapunov is None and ly:
                tr.lyapunov = [math.nan] * len(tr)
            tr.record(int(rnd), float(sub), float(bits),
                      float(ly) if ly else None)
    return [traces[t] for t in sorted(traces)]


def summarize_traces(traces: Sequence[Trace]) -> dict:
    """Per-round mean and standard deviation of suboptimality across trials.

    All traces must share the same checkpoint grid (they do, for a fixed
    experiment config).  Bits are averaged across trials as well; for
    fixed-length compressors every trial carries identical bit counts.
    """
    if not traces:
        raise ValueError("empty trace ensemble")
    rounds = np.array(traces[0].rounds)
    m = min(len(t) for t in traces)
    rounds = rounds[:m]
    for t in traces[1:]:
        if not np.array_equal(np.array(t.rounds[:m]), rounds):
            raise ValueError("traces have mismatched checkpoint grids")
    sub = np.array([t.subopt[:m] for t in traces])
    bits = np.array([t.bits_cum[:m] for t in traces])
    return {
        "round": rounds,
        "bits_cum": bits.mean(axis=0),
        "subopt_mean": sub.mean(axis=0),
        "subopt_std": sub.std(axis=0),
        "trials": len(traces),
    }


SUMMARY_COMMENT = ("# bits_cum is the cumulative per-worker cost "
                   "(cross-worker average per round, cross-trial mean)")
SUMMARY_HEADER = "round,bits_cum,subopt_mean,subopt_std,trials"


def write_summary_csv(summary: dict, path) -> None:
    lines = [SUMMARY_COMMENT, SUMMARY_HEADER]
    trials = summary["trials"]
    for i in range(len(summary["round"])):
        lines.append(f"{int(summary['round'][i])},{_fmt(summary['bits_cum'][i])},"
                     f"{_fmt(summary['subopt_mean'][i])},{_fmt(summary['subopt_std'][i])},"
                     f"{trials}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_summary_csv(path) -> dict:
    rows = []
    trials = 1
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if line == SUMMARY_HEADER:
                continue
            rnd, bits, mean, std, trials = line.split(",")
            rows.append((int(rnd), float(bits), float(mean), float(std)))
            trials = int(trials)
    arr = np.array(rows)
    return {
        "round": arr[:, 0].astype(int),
        "bits_cum": arr[:, 1],
        "subopt_mean": arr[:, 2],
        "subopt_std": arr[:, 3],
        "trials": trials,
    }
