"""Unbiased compression operators with exact bit accounting.

The module provides the omega-unbiased compressor contract (unbiased output,
variance at most omega*||x||^2), concrete operators (random-s sparsification,
natural rounding to powers of two, norm-scaled random quantization, identity,
and the unscaled sparsifier used by error-feedback baselines), independent and
shared randomness modes, Elias-gamma integer coding, and the information lower
bound on per-message bits.

Randomness is counter-based: every draw is keyed by (master seed, stream
lane, round, call), so outputs are reproducible regardless of evaluation
order, and a single worker's output can be recomputed in isolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import as_vector

KINDS = ("identity", "random_s", "unscaled_random_s", "natural", "quantize")

# Stream lanes: workers draw from lane 1 (independent) or lane 2 (shared);
# lane 0 is reserved for server-side coin flips.
LANE_SERVER = 0
LANE_WORKERS = 1
LANE_SHARED = 2

_U64 = np.uint64
_MASK64 = (1 << 64) - 1


def ceil_log2(m: int) -> int:
    """ceil(log2(m)) for integers m >= 1."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return (m - 1).bit_length()


def keyed_rng(master_seed: int, lane: int, rnd: int, call: int) -> np.random.Generator:
    """Counter-based generator for one (seed, lane, round, call) cell.

    Distinct cells occupy disjoint counter blocks (round/call live in the two
    high counter words), so streams never overlap however much each consumes.
    """
    key = np.array([master_seed & _MASK64, lane & _MASK64], dtype=_U64)
    counter = np.array([0, 0, call & _MASK64, rnd & _MASK64], dtype=_U64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


@dataclass(frozen=True)
class CompressorSpec:
    """Static description of a compression operator.

    kind : one of KINDS.
    d : input dimension.
    s : kept coordinates (random_s / unscaled_random_s) or quantization level
        count (quantize, default ceil(sqrt(d))).
    randomness : 'independent' (distinct worker streams) or 'shared' (one
        stream replicated across workers).
    bits_per_entry : raw bits r charged per transmitted float (default 64).
    """

    kind: str
    d: int
    s: Optional[int] = None
    randomness: str = "independent"
    bits_per_entry: int = 64

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown compressor kind {self.kind!r}")
        if self.randomness not in ("independent", "shared"):
            raise ValueError("randomness must be 'independent' or 'shared'")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.kind in ("random_s", "unscaled_random_s"):
            if self.s is None or not (1 <= self.s <= self.d):
                raise ValueError("random_s needs 1 <= s <= d")
        if self.kind == "quantize" and self.s is None:
            object.__setattr__(self, "s", math.ceil(math.sqrt(self.d)))

    @property
    def omega(self) -> float:
        """Declared variance parameter of the operator."""
        if self.kind == "identity":
            return 0.0
        if self.kind in ("random_s", "unscaled_random_s"):
            return self.d / self.s - 1.0
        if self.kind == "natural":
            return 1.0 / 8.0
        # norm-scaled quantization with s levels
        return min(self.d / self.s ** 2, math.sqrt(self.d) / self.s)

    @property
    def fixed_length(self) -> bool:
        return self.kind != "quantize"

    def per_message_bits(self) -> int:
        """Exact bits of one message for fixed-length operators.

        random-s transmits r bits per kept entry plus a combinatorial-rank
        index code of ceil(log2 C(d, s)) bits; natural rounding transmits a
        sign and an 11-bit exponent per entry.
        """
        r, d = self.bits_per_entry, self.d
        if self.kind == "identity":
            return r * d
        if self.kind in ("random_s", "unscaled_random_s"):
            return r * self.s + ceil_log2(math.comb(d, self.s))
        if self.kind == "natural":
            return 12 * d
        raise ValueError("quantize messages are data-dependent; "
                         "use min_message_bits() or measure per call")

    def min_message_bits(self) -> int:
        """A lower bound on any single message's cost (exact when fixed)."""
        if self.fixed_length:
            return self.per_message_bits()
        # norm float + d sign bits + one unary-coded zero level per entry
        return 64 + self.d + self.d

    def label(self) -> str:
        tag = {"independent": "id", "shared": "sd"}[self.randomness]
        if self.kind == "identity":
            return "identity"
        if self.kind == "random_s":
            return f"{tag}-rand{self.s}"
        if self.kind == "unscaled_random_s":
            return f"{tag}-urand{self.s}"
        return f"{tag}-{self.kind}"


class CompressorState:
    """A compressor spec bound to n workers and a master randomness seed.

    ``compress`` / ``compress_all`` are pure functions of (spec, seed,
    worker, round, call, input); states hold no mutable stream position and
    may be shared freely across threads.
    """

    def __init__(self, spec: CompressorSpec, master_seed: int, n: int):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.spec = spec
        self.master_seed = int(master_seed)
        self.n = int(n)

    # -- randomness blocks -------------------------------------------------

    def _uniform_block(self, rnd: int, call: int) -> np.ndarray:
        """(n, d) uniforms; in shared mode one row broadcast to all workers.

        With a single worker the two modes are the same operator, so both
        draw from the shared lane and coincide exactly.
        """
        d = self.spec.d
        if self.spec.randomness == "shared" or self.n == 1:
            gen = keyed_rng(self.master_seed, LANE_SHARED, rnd, call)
            row = gen.random(d)
            return np.broadcast_to(row, (self.n, d))
        gen = keyed_rng(self.master_seed, LANE_WORKERS, rnd, call)
        return gen.random((self.n, d))

    # -- compression -------------------------------------------------------

    def compress_all(self, rnd: int, call: int, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Compress one message per worker.

        X is an (n, d) array of per-worker inputs (or a single vector that is
        first broadcast).  Returns (Y, bits) where Y is (n, d) and bits the
        per-worker bit cost of this call.
        """
        spec = self.spec
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = np.broadcast_to(X, (self.n, spec.d))
        if X.shape != (self.n, spec.d):
            raise ValueError(f"dimension mismatch: expected {(self.n, spec.d)}, got {X.shape}")

        if spec.kind == "identity":
            bits = np.full(self.n, spec.per_message_bits(), dtype=np.float64)
            return X.copy(), bits

        if spec.kind in ("random_s", "unscaled_random_s"):
            U = self._uniform_block(rnd, call)
            # the s smallest uniforms per row give a uniform random s-subset
            if spec.s == 1:
                keep = np.argmin(U, axis=1)[:, None]
            elif spec.s == spec.d:
                keep = np.broadcast_to(np.arange(spec.d), (self.n, spec.d))
            else:
                keep = np.argpartition(U, spec.s - 1, axis=1)[:, :spec.s]
            rows = np.arange(self.n)[:, None]
            Y = np.zeros((self.n, spec.d))
            scale = spec.d / spec.s if spec.kind == "random_s" else 1.0
            Y[rows, keep] = X[rows, keep] * scale
            bits = np.full(self.n, spec.per_message_bits(), dtype=np.float64)
            return Y, bits

        if spec.kind == "natural":
            U = self._uniform_block(rnd, call)
            mant, expo = np.frexp(np.abs(X))         # |x| = mant * 2^expo, mant in [0.5, 1)
            p_up = 2.0 * mant - 1.0                  # chance of rounding to the upper power
            up = (U < p_up).astype(np.int64)
            Y = np.sign(X) * np.ldexp(1.0, expo - 1 + up)
            Y[X == 0.0] = 0.0
            bits = np.full(self.n, spec.per_message_bits(), dtype=np.float64)
            return Y, bits

        # quantize: round |x_j|/||x|| onto s uniform levels, unbiasedly
        U = self._uniform_block(rnd, call)
        s = spec.s
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        safe = np.where(norms > 0, norms, 1.0)
        scaled = np.abs(X) / safe * s
        low = np.floor(scaled)
        level = (low + (U < (scaled - low))).astype(np.int64)
        Y = np.sign(X) * norms * (level / s)
        bits = np.empty(self.n, dtype=np.float64)
        for i in range(self.n):
            bits[i] = 64 + spec.d + sum(elias_gamma_length(int(v) + 1) for v in level[i])
        return Y, bits

    def compress(self, worker: int, rnd: int, call: int, x) -> tuple[np.ndarray, float]:
        """Compress one worker's message; identical to its compress_all row."""
        if not (0 <= worker < self.n):
            raise ValueError(f"worker index {worker} out of range 0..{self.n - 1}")
        x = as_vector(x, self.spec.d)
        X = np.broadcast_to(x, (self.n, self.spec.d))
        Y, bits = self.compress_all(rnd, call, X)
        return Y[worker].copy(), float(bits[worker])

    def per_round_bits(self, calls: int = 1) -> float:
        """Fixed per-round per-worker cost (fixed-length operators only)."""
        return calls * float(self.spec.per_message_bits())


def compress(state: CompressorState, worker: int, rnd: int, call: int, x):
    """Functional alias for ``CompressorState.compress``."""
    return state.compress(worker, rnd, call, x)


# ---------------------------------------------------------------------------
# Empirical moment checks
# ---------------------------------------------------------------------------

def empirical_moments(state: CompressorState, x, trials: int,
                      worker: int = 0) -> tuple[np.ndarray, float]:
    """Sample mean of C(x) and sample mean of ||C(x) - x||^2 over fresh draws."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    x = as_vector(x, state.spec.d)
    acc = np.zeros_like(x)
    var = 0.0
    for t in range(trials):
        y, _ = state.compress(worker, t, 0, x)
        acc += y
        diff = y - x
        var += float(np.dot(diff, diff))
    return acc / trials, var / trials


def aggregate_variance(state: CompressorState, x, trials: int) -> float:
    """Sample mean of ||(1/n) sum_i C_i(x) - x||^2 across fresh rounds."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    x = as_vector(x, state.spec.d)
    total = 0.0
    for t in range(trials):
        Y, _ = state.compress_all(t, 0, x)
        diff = Y.mean(axis=0) - x
        total += float(np.dot(diff, diff))
    return total / trials


# ---------------------------------------------------------------------------
# Elias-gamma integer coding
# ---------------------------------------------------------------------------

def elias_gamma_length(v: int) -> int:
    """Code length in bits of the Elias-gamma code of v >= 1."""
    if v < 1:
        raise ValueError("Elias-gamma is defined for integers >= 1 "
                         "(shift values by +1 to admit zeros)")
    return 2 * (v.bit_length() - 1) + 1


def elias_encode(values) -> str:
    """Concatenated Elias-gamma codes of positive integers, as a '0'/'1' string.

    The code of v is (b-1) zeros followed by the b-bit binary expansion of v,
    where b = floor(log2 v) + 1; it is prefix-free and self-delimiting.
    Zero is not encodable directly: callers with nonnegative data (e.g.
    quantization levels) shift by +1 before encoding.
    """
    out = []
    for v in values:
        v = int(v)
        if v < 1:
            raise ValueError("Elias-gamma is defined for integers >= 1 "
                             "(shift values by +1 to admit zeros)")
        b = v.bit_length()
        out.append("0" * (b - 1) + format(v, "b"))
    return "".join(out)


def elias_decode(bits: str) -> list[int]:
    """Inverse of ``elias_encode``; raises ValueError on malformed input."""
    values = []
    i, n = 0, len(bits)
    while i < n:
        zeros = 0
        while i < n and bits[i] == "0":
            zeros += 1
            i += 1
        if i >= n:
            raise ValueError("malformed bitstring: dangling zero run")
        if i + zeros + 1 > n:
            raise ValueError("malformed bitstring: truncated codeword")
        word = bits[i:i + zeros + 1]
        i += zeros + 1
        values.append(int(word, 2))
    return values


# ---------------------------------------------------------------------------
# Information lower bound on per-message cost
# ---------------------------------------------------------------------------

def min_bits_lower_bound(d: int, omega: float, r: int = 64) -> float:
    """Fewest bits any omega-unbiased compressor can transmit per message.

    With entries resolved to r bits, an operator with omega below
    1/(4^r - 1) is effectively lossless and must pay r*d bits; otherwise the
    bound is d*log4(1 + 1/omega).
    """
    if d < 1 or r < 1 or omega < 0:
        raise ValueError("need d >= 1, r >= 1, omega >= 0")
    if omega * (4 ** r - 1) <= 1.0:
        return float(r * d)
    return d * math.log(1.0 + 1.0 / omega) / math.log(4.0)
