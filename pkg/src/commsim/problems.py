"""Problem instance generators.

Covers conditioned synthetic least squares, logistic regression over LIBSVM
text files partitioned contiguously across workers, the two-family piecewise
quadratic used for the headline compression experiment, and the zero-chain
instance families whose suboptimality admits closed-form floors in terms of
the reach of the nonzero prefix.

Quadratic instances are represented through per-worker pairs (H_i, c_i) with
f_i(x) = x'H_i x / 2 - c_i'x, which keeps gradients exact (no round-off fill
outside the sparsity pattern, a requirement for progress-measure audits).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import ProblemInstance, as_vector


# ---------------------------------------------------------------------------
# Quadratic plumbing
# ---------------------------------------------------------------------------

def _quadratic_instance(Hs: np.ndarray, cs: np.ndarray, L: float, mu: float,
                        name: str, metadata: dict,
                        x0: Optional[np.ndarray] = None) -> ProblemInstance:
    """Instance from stacked per-worker quadratics f_i = x'H_i x/2 - c_i'x."""
    n, d = cs.shape
    H_f = Hs.mean(axis=0)
    c_f = cs.mean(axis=0)
    x_star = np.linalg.solve(H_f, c_f)
    f_star = -0.5 * float(c_f @ x_star)

    def local_value(i, x):
        return 0.5 * float(x @ (Hs[i] @ x)) - float(cs[i] @ x)

    def local_grad(i, x):
        return Hs[i] @ x - cs[i]

    def batch_value(x):
        return 0.5 * float(x @ (H_f @ x)) - float(c_f @ x)

    Hs_flat = Hs.reshape(n * d, d)

    def batch_grads(x):
        return (Hs_flat @ x).reshape(n, d) - cs

    prob = ProblemInstance(
        n=n, d=d, local_value=local_value, local_grad=local_grad,
        L=L, mu=mu, x0=x0, x_star=x_star, f_star=f_star, name=name,
        batch_value=batch_value, batch_grads=batch_grads, metadata=metadata)
    if prob.delta is None:
        start = prob.x0 - x_star
        prob.delta = float(start @ start)
    return prob


def _link_matrix(d: int, links: Sequence[int], ends: Sequence[int]) -> np.ndarray:
    """sum over 0-based link starts j of (e_j - e_{j+1})(e_j - e_{j+1})' plus
    e_k e_k' for each 0-based index k in ``ends``."""
    T = np.zeros((d, d))
    for j in links:
        T[j, j] += 1.0
        T[j + 1, j + 1] += 1.0
        T[j, j + 1] -= 1.0
        T[j + 1, j] -= 1.0
    for k in ends:
        T[k, k] += 1.0
    return T


# ---------------------------------------------------------------------------
# Least squares
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LeastSquaresSpec:
    """Conditioned synthetic least squares: n workers with M rows each.

    ``cond`` is the target condition number of the stacked data matrix whose
    singular values are reset to an arithmetic sequence from 1 to ``cond``
    (the quadratic objective then has condition number cond**2).
    """
    n: int = 400
    M: int = 25
    d: int = 20
    cond: float = 100.0
    seed: int = 0

    def __post_init__(self):
        if self.n * self.M < self.d:
            raise ValueError("need n*M >= d rows to control all singular values")
        if self.cond < 1:
            raise ValueError("cond must be >= 1")


def least_squares_from_matrices(blocks: np.ndarray,
                                rhs: Optional[np.ndarray] = None,
                                metadata: Optional[dict] = None) -> ProblemInstance:
    """Least-squares instance f_i(x) = ||A_i x - b_i||^2 / 2 from explicit data.

    ``blocks`` has shape (n, M, d); ``rhs`` shape (n, M) defaults to zeros.
    The minimizer comes from the normal equations of the stacked system, so
    f* is exact; runs start from the origin.
    """
    blocks = np.asarray(blocks, dtype=np.float64)
    n, M, d = blocks.shape
    if rhs is None:
        rhs = np.zeros((n, M))
    rhs = np.asarray(rhs, dtype=np.float64).reshape(n, M)
    grams = np.einsum("nmd,nme->nde", blocks, blocks)
    lin = np.einsum("nmd,nm->nd", blocks, rhs)
    sv = np.linalg.svd(blocks, compute_uv=False)
    L = float(np.max(sv[:, 0]) ** 2)
    mu = float(np.min(sv[:, -1]) ** 2) if M >= d else 0.0
    stacked = blocks.reshape(n * M, d)
    b_flat = rhs.reshape(n * M)
    H_f = stacked.T @ stacked / n
    c_f = stacked.T @ b_flat / n
    const = float(b_flat @ b_flat) / (2.0 * n)
    x_star = np.linalg.solve(H_f, c_f)
    f_star = 0.5 * float(x_star @ (H_f @ x_star)) - float(c_f @ x_star) + const

    def local_value(i, x):
        r = blocks[i] @ x - rhs[i]
        return 0.5 * float(r @ r)

    def local_grad(i, x):
        return grams[i] @ x - lin[i]

    def batch_value(x):
        return 0.5 * float(x @ (H_f @ x)) - float(c_f @ x) + const

    grams_flat = grams.reshape(n * d, d)   # one GEMV beats n batched ones

    def batch_grads(x):
        return (grams_flat @ x).reshape(n, d) - lin

    meta = dict(metadata or {})
    sg = np.linalg.svd(stacked, compute_uv=False)
    meta.update({
        "sigma_max": float(sg[0]),
        "sigma_min": float(sg[-1]),
        "L_avg_hessian": float(sg[0] ** 2 / n),
        "mu_avg_hessian": float(sg[-1] ** 2 / n),
        "kappa_f": float((sg[0] / sg[-1]) ** 2),
    })
    return ProblemInstance(
        n=n, d=d, local_value=local_value, local_grad=local_grad,
        L=L, mu=mu, delta=float(x_star @ x_star),
        x_star=x_star, f_star=f_star, name="least_squares",
        batch_value=batch_value, batch_grads=batch_grads, metadata=meta)


def gen_least_squares(spec: LeastSquaresSpec) -> ProblemInstance:
    """Gaussian data matrix reconditioned via SVD, rows split contiguously.

    Right-hand sides are Gaussian, rescaled so the start-to-optimum distance
    ||x0 - x*||^2 equals 10*d (runs start from the origin); this keeps the
    initial suboptimality well above the usual accuracy targets while f*
    stays available in closed form through the normal equations.
    """
    rng = np.random.default_rng(spec.seed)
    G = rng.standard_normal((spec.n * spec.M, spec.d))
    U, _, Vt = np.linalg.svd(G, full_matrices=False)
    sv = np.linspace(1.0, spec.cond, spec.d)
    stacked = (U * sv) @ Vt
    b = rng.standard_normal(spec.n * spec.M)
    H_f = stacked.T @ stacked / spec.n
    x_star = np.linalg.solve(H_f, stacked.T @ b / spec.n)
    b *= math.sqrt(10.0 * spec.d / float(x_star @ x_star))
    blocks = stacked.reshape(spec.n, spec.M, spec.d)
    return least_squares_from_matrices(
        blocks, rhs=b.reshape(spec.n, spec.M),
        metadata={"seed": spec.seed, "cond": spec.cond,
                  "rows_per_worker": spec.M})


# ---------------------------------------------------------------------------
# LIBSVM logistic regression
# ---------------------------------------------------------------------------

def parse_libsvm(path) -> tuple[np.ndarray, list[tuple[np.ndarray, np.ndarray]], int]:
    """Read LIBSVM sparse text: one 'label idx:val ...' line per point.

    Indices are 1-based.  Returns (labels, per-point (indices, values) pairs,
    max feature index).  Malformed lines raise ValueError with their number.
    """
    labels = []
    rows = []
    d_max = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                labels.append(float(parts[0]))
                idx, val = [], []
                for tok in parts[1:]:
                    i_str, v_str = tok.split(":")
                    i = int(i_str)
                    if i < 1:
                        raise ValueError("feature indices are 1-based")
                    idx.append(i)
                    val.append(float(v_str))
            except (ValueError, IndexError) as exc:
                raise ValueError(f"malformed LIBSVM line {lineno}: {exc}") from None
            if idx:
                d_max = max(d_max, max(idx))
            rows.append((np.array(idx, dtype=np.int64), np.array(val)))
    return np.array(labels), rows, d_max


def write_libsvm(labels, rows, path) -> None:
    """Inverse of ``parse_libsvm`` (used for round-trip checks)."""
    with open(path, "w") as fh:
        for lab, (idx, val) in zip(labels, rows):
            toks = [f"{lab:+g}"]
            toks += [f"{int(i)}:{v:g}" for i, v in zip(idx, val)]
            fh.write(" ".join(toks) + "\n")


def _map_labels(labels: np.ndarray) -> np.ndarray:
    uniq = np.unique(labels)
    if set(uniq).issubset({-1.0, 1.0}):
        return labels.copy()
    if len(uniq) > 2:
        raise ValueError(f"expected binary labels, got {len(uniq)} classes")
    out = np.where(labels == uniq[0], -1.0, 1.0)
    return out


def load_libsvm(path, n: int) -> ProblemInstance:
    """Logistic regression with the datapoints split contiguously over n workers.

    Worker i (1-based) owns points (i-1)*M+1 .. i*M where M = floor(N/n);
    trailing points beyond n*M are dropped.  The loss is the mean logistic
    loss per worker; features are used raw and labels mapped to {-1, +1}.
    """
    labels, rows, d = parse_libsvm(path)
    N = len(rows)
    M = N // n
    if M < 1:
        raise ValueError(f"fewer than n={n} usable datapoints ({N}) in {path}")
    labels = _map_labels(labels[: n * M])
    A = np.zeros((n * M, d))
    for r, (idx, val) in enumerate(rows[: n * M]):
        A[r, idx - 1] = val
    blocks = A.reshape(n, M, d)
    B = labels.reshape(n, M)
    lam_max = np.linalg.svd(blocks, compute_uv=False)[:, 0] ** 2
    L = float(np.max(lam_max)) / (4.0 * M)

    def local_value(i, x):
        marg = B[i] * (blocks[i] @ x)
        return float(np.logaddexp(0.0, -marg).mean())

    def local_grad(i, x):
        marg = B[i] * (blocks[i] @ x)
        coef = -B[i] / (1.0 + np.exp(marg))      # -b * sigmoid(-b a'x)
        return blocks[i].T @ coef / M

    def batch_value(x):
        marg = B * (A @ x).reshape(n, M)
        return float(np.logaddexp(0.0, -marg).mean())

    def batch_grads(x):
        marg = B * (A @ x).reshape(n, M)
        coef = -B / (1.0 + np.exp(marg))
        return np.einsum("nmd,nm->nd", blocks, coef) / M

    meta = {"points_per_worker": M, "points_total": N, "source": str(path)}
    return ProblemInstance(
        n=n, d=d, local_value=local_value, local_grad=local_grad,
        L=L, mu=0.0, name="logistic", batch_value=batch_value,
        batch_grads=batch_grads, metadata=meta)


# ---------------------------------------------------------------------------
# Two-family constructed quadratic
# ---------------------------------------------------------------------------

def gen_constructed_quadratic(mu: float = 1.0, L: float = 1e4,
                              d: int = 20, n: int = 400) -> ProblemInstance:
    """Piecewise-quadratic instance whose coordinates activate one at a time.

    Workers in the first half carry the even-start chain links plus both end
    terms and a linear pull on the first coordinate; the second half carries
    the odd-start links.  Default constants mu=1, L=1e4, d=20, n=400.
    """
    if d % 2 or n % 2:
        raise ValueError("constructed quadratic needs even d and even n")
    if not (L >= mu > 0):
        raise ValueError("need L >= mu > 0")
    scale = (L - mu) / 2.0
    # family 1: [x]_1^2, [x]_d^2, links (2,3),(4,5),...,(d-2,d-1)  [1-based]
    T1 = _link_matrix(d, links=range(1, d - 2, 2), ends=(0, d - 1))
    # family 2: links (1,2),(3,4),...,(d-1,d)  [1-based]
    T2 = _link_matrix(d, links=range(0, d - 1, 2), ends=())
    H1 = mu * np.eye(d) + scale * T1
    H2 = mu * np.eye(d) + scale * T2
    c1 = np.zeros(d)
    c1[0] = scale
    Hs = np.empty((n, d, d))
    cs = np.zeros((n, d))
    half = n // 2
    Hs[:half] = H1
    Hs[half:] = H2
    cs[:half] = c1
    meta = {"families": 2, "mu": mu, "L": L}
    prob = _quadratic_instance(Hs, cs, L=L, mu=mu,
                               name="constructed_quadratic", metadata=meta)

    # two distinct worker gradients per round is all this instance needs
    def batch_grads(x):
        out = np.empty((n, d))
        out[:half] = H1 @ x - c1
        out[half:] = H2 @ x
        return out

    prob._batch_grads = batch_grads
    return prob


# ---------------------------------------------------------------------------
# Zero-chain hard instances
# ---------------------------------------------------------------------------

@dataclass
class HardInstance:
    """A chain-structured instance plus its closed-form geometry.

    ``floor(k)`` evaluates the suboptimality floor available to any iterate
    whose nonzero prefix reaches coordinate k (strongly convex families);
    ``opt_at_prog(k)`` gives the constrained optimal value over that prefix
    (generally convex chain family).
    """
    problem: ProblemInstance
    family: str
    lam: float
    q: Optional[float] = None

    def floor(self, k: int) -> float:
        if self.q is None:
            raise ValueError(f"family {self.family} has no geometric floor")
        return 0.5 * self.problem.mu * self.q ** (2 * k) * self.problem.delta

    def opt_at_prog(self, k: int) -> float:
        if self.family != "gc-example1":
            raise ValueError("prefix-constrained optimum is specific to gc-example1")
        p = self.problem
        return -self.lam ** 2 * p.L * k / (4.0 * p.n * (k + 1))

    def advancing_worker(self, k: int) -> int:
        """0-based worker able to extend the prefix from reach k."""
        return (k - 1) % self.problem.n


def chain_decay_ratio(kappa: float, n: int) -> float:
    """Per-coordinate geometric decay of the chain minimizer."""
    if kappa < 1 or n < 1:
        raise ValueError("need kappa >= 1 and n >= 1")
    if kappa == 1:
        return 0.0
    return 1.0 - 2.0 / (1.0 + math.sqrt(1.0 + 2.0 * (kappa - 1.0) / n))


def _chain_links(d: int, n: int, worker: int) -> list[int]:
    """0-based link starts owned by 1-based ``worker`` under free truncation."""
    starts = []
    j = worker if worker < n else n          # 1-based first link start
    while j + 1 <= d:
        starts.append(j - 1)                 # 0-based
        j += n
    return starts


def gen_zero_chain_sc(L: float, mu: float, n: int, d: int,
                      delta: float = 1.0,
                      family: str = "sc-example1") -> HardInstance:
    """Strongly convex rotated-chain family with geometric suboptimality floor.

    Gradients touch coordinate k+1 only through the worker owning the chain
    link that starts at k.  The truncation at coordinate d drops the final
    link (free boundary); the declared delta is the exact ||x0 - x*||^2 of
    the truncated instance and the relative truncation error against the
    requested ``delta`` is recorded in metadata (with a warning flag when it
    exceeds 1e-6, i.e. when d is too small for deep floors).

    ``family='sc-homogeneous'`` replicates the single-worker chain on every
    worker; its true smoothness exceeds the requested L and is declared
    instead (the distributed family is exactly L-smooth for n >= 2).
    """
    if not (L > mu > 0) or d < 2:
        raise ValueError("need L > mu > 0 and d >= 2")
    if family not in ("sc-example1", "sc-homogeneous"):
        raise ValueError(f"unknown strongly convex chain family {family!r}")
    kappa = L / mu
    n_eff = n if family == "sc-example1" else 1
    q = chain_decay_ratio(kappa, n_eff)
    lam = math.sqrt((1.0 - q * q) * delta / (q * q))
    scale = (L - mu) / 2.0

    Hs = np.empty((n, d, d))
    cs = np.zeros((n, d))
    if family == "sc-example1":
        for w in range(1, n + 1):
            ends = (0,) if w == n else ()
            T = _link_matrix(d, _chain_links(d, n, w), ends)
            Hs[w - 1] = mu * np.eye(d) + scale * T
        cs[n - 1, 0] = lam * scale
    else:
        T = _link_matrix(d, _chain_links(d, 1, 1), ends=(0,))
        H = mu * np.eye(d) + scale * T
        c = np.zeros(d)
        c[0] = lam * scale
        Hs[:] = H
        cs[:] = c

    true_L = float(max(np.linalg.eigvalsh(Hs[i])[-1] for i in range(n)))
    declared_L = L if family == "sc-example1" and n >= 2 else true_L
    meta = {"family": family, "q": q, "lam": lam, "requested_L": L,
            "requested_delta": delta}
    prob = _quadratic_instance(Hs, cs, L=declared_L, mu=mu,
                               name=f"chain-{family}", metadata=meta)
    trunc_err = abs(prob.delta - delta) / delta
    prob.metadata["delta_truncation_rel_error"] = trunc_err
    prob.metadata["truncation_warning"] = bool(trunc_err > 1e-6)
    return HardInstance(problem=prob, family=family, lam=lam, q=q)


def gen_zero_chain_gc(L: float, n: int, d: int, delta: float = 1.0,
                      family: str = "gc-example1") -> HardInstance:
    """Generally convex hard families.

    'gc-example1' (default) is the chain with the final link clamped
    ([x]_d^2 stays with its owner), which makes the minimizer exactly linear
    in the coordinate index and gives f* = -lam^2 L d / (4 n (d+1)).
    'gc-example3' delegates to the homogeneous-quadratic family with a dense
    linear pull on the last worker.
    """
    if family == "gc-example3":
        return gen_zero_chain_gc3(L, n, d, delta)
    if family != "gc-example1":
        raise ValueError(f"unknown generally convex family {family!r}")
    if L <= 0 or d < 2:
        raise ValueError("need L > 0 and d >= 2")
    lam = math.sqrt(3.0 * delta / d)
    scale = L / 2.0
    last_owner = (d - 1) % n + 1             # 1-based owner of the clamped end
    Hs = np.empty((n, d, d))
    cs = np.zeros((n, d))
    for w in range(1, n + 1):
        ends = []
        if w == n:
            ends.append(0)
        if w == last_owner:
            ends.append(d - 1)
        T = _link_matrix(d, _chain_links(d, n, w), ends)
        Hs[w - 1] = scale * T
    cs[n - 1, 0] = lam * scale

    k_idx = np.arange(1, d + 1)
    x_star = lam * (1.0 - k_idx / (d + 1.0))
    f_star = -lam ** 2 * L * d / (4.0 * n * (d + 1.0))
    declared_L = L
    if n == 1:
        declared_L = float(max(np.linalg.eigvalsh(Hs[i])[-1] for i in range(n)))
    meta = {"family": "gc-example1", "lam": lam, "requested_delta": delta,
            "start_distance_sq": float(x_star @ x_star)}
    prob = _quadratic_instance(Hs, cs, L=declared_L, mu=0.0,
                               name="chain-gc-example1", metadata=meta)
    prob.delta = float(delta)
    # closed forms beat the generic solve numerically; keep them authoritative
    assert np.allclose(prob.x_star, x_star, atol=1e-8)
    prob.x_star = x_star
    prob._f_star = f_star
    return HardInstance(problem=prob, family="gc-example1", lam=lam)


def gen_zero_chain_gc3(L: float, n: int, d: int, delta: float = 1.0) -> HardInstance:
    """Homogeneous-quadratic family with a dense linear pull on the last worker.

    Not a chain: its difficulty is that every coordinate of the pull must
    individually survive compression.  lam = L*sqrt(delta/d) makes
    ||x0 - x*||^2 = delta exactly.
    """
    if L <= 0 or d < 1:
        raise ValueError("need L > 0 and d >= 1")
    lam = L * math.sqrt(delta / d)
    Hs = np.broadcast_to(L * np.eye(d), (n, d, d)).copy()
    cs = np.zeros((n, d))
    cs[n - 1] = -n * lam                     # f_n has +n*lam*<1, x>
    meta = {"family": "gc-example3", "lam": lam, "requested_delta": delta}
    prob = _quadratic_instance(Hs, cs, L=L, mu=L, name="chain-gc-example3",
                               metadata=meta)
    return HardInstance(problem=prob, family="gc-example3", lam=lam)


def format_metadata(problem: ProblemInstance) -> str:
    """Flat key-value dump of an instance's reproducibility metadata."""
    lines = [f"name = {problem.name}", f"n = {problem.n}", f"d = {problem.d}",
             f"L = {problem.L!r}", f"mu = {problem.mu!r}"]
    if problem.delta is not None:
        lines.append(f"delta = {problem.delta!r}")
    if problem.has_f_star:
        lines.append(f"f_star = {problem.f_star!r}")
    for key in sorted(problem.metadata):
        lines.append(f"{key} = {problem.metadata[key]!r}")
    return "\n".join(lines)
