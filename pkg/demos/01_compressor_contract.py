"""A tour of the compression operators and their bit accounting.

Every operator C is unbiased (E[C(x)] = x) with relative variance at most a
declared omega; aggressive operators transmit far fewer bits per message but
inject more noise.  The script measures both sides of that trade empirically
and compares each operator's per-message cost against the information floor
any unbiased operator must pay.
"""

import numpy as np

from commsim import (CompressorSpec, CompressorState, aggregate_variance,
                     empirical_moments, min_bits_lower_bound)

d, trials = 20, 20_000
x = np.random.default_rng(0).standard_normal(d)
xn2 = float(x @ x)

print(f"input dimension d={d}, ||x||^2 = {xn2:.3f}, {trials} samples per operator\n")
print(f"{'operator':>14} {'omega':>8} {'bits/msg':>9} {'floor':>8} "
      f"{'mean err (se)':>14} {'var ratio':>10}")

for kind, s in [("identity", None), ("random_s", 4), ("random_s", 2),
                ("random_s", 1), ("natural", None), ("quantize", None)]:
    spec = CompressorSpec(kind, d=d, s=s)
    st = CompressorState(spec, master_seed=1, n=1)
    mean, var = empirical_moments(st, x, trials)
    err = np.linalg.norm(mean - x)
    se = np.sqrt(spec.omega * xn2 / trials) if spec.omega else 0.0
    bits = spec.per_message_bits() if spec.fixed_length else spec.min_message_bits()
    tag = f"{kind}" + (f"(s={s})" if s else "")
    ratio = var / (spec.omega * xn2) if spec.omega else 0.0
    print(f"{tag:>14} {spec.omega:>8.3f} {bits:>9} "
          f"{min_bits_lower_bound(d, spec.omega):>8.2f} "
          f"{err:>7.4f} ({se:.4f}) {ratio:>10.3f}")

print("""
Aggregation: averaging n independently compressed copies divides the variance
by n; with shared randomness the copies are identical and nothing cancels.
""")
n = 20
for randomness in ("independent", "shared"):
    spec = CompressorSpec("random_s", d=d, s=1, randomness=randomness)
    st = CompressorState(spec, master_seed=2, n=n)
    v = aggregate_variance(st, x, 5000)
    print(f"  {randomness:>12}: E||mean_i C_i(x) - x||^2 / ||x||^2 = {v / xn2:.3f} "
          f"(omega = {spec.omega:.0f}, omega/n = {spec.omega / n:.2f})")
