"""Parameter schedules in one place.

Prints the derived strongly-convex schedule (constant), the generally-convex
schedule (decaying mixing weight, growing capped step), and the corrected
schedule of the accelerated generally-convex relative, plus the potential
decay guarantee the strongly-convex schedule certifies.
"""

from commsim import (adiana_schedule_gc, adiana_schedule_sc, canita_schedule,
                     contraction_rate_bound)

L, mu, n, omega = 1e4, 1.0, 400, 19.0
sc = adiana_schedule_sc(L, mu, n, omega)
print(f"strongly convex (L={L:g}, mu={mu:g}, n={n}, omega={omega:g}):")
print(f"  eta={sc.eta(0):.6e}  theta1={sc.theta1(0):.6e}  theta2={sc.theta2:.6e}")
print(f"  alpha=p={sc.alpha:.4f}  beta={sc.beta:.10f}  gamma={sc.gamma(0):.6e}")
print(f"  guaranteed per-round potential contraction: "
      f"{contraction_rate_bound(omega, L / mu, n):.8f}")

gc = adiana_schedule_gc(L=1.0, n=n, omega=omega)
print(f"\ngenerally convex (L=1, n={n}, omega={omega:g}): "
      f"alpha={gc.alpha:.4f}, p=theta2={gc.theta2:.4f}, beta=1")
print(f"  {'k':>6} {'theta1_k':>12} {'eta_k':>12} {'gamma_k':>12}")
for k in (0, 10, 100, 1000, 10000):
    print(f"  {k:>6} {gc.theta1(k):>12.6f} {gc.eta(k):>12.6e} {gc.gamma(k):>12.6e}")

print(f"\ncorrected accelerated-GC schedule (n={n}, omega={omega:g}, L=1):")
print(f"  {'t':>6} {'theta_t':>10} {'eta_t':>12} {'p':>8} {'b':>8}")
for t in (0, 10, 100, 1000):
    c = canita_schedule(n, omega, t, L=1.0)
    print(f"  {t:>6} {c.theta:>10.6f} {c.eta:>12.6e} {c.p:>8.4f} {c.b:>8.4f}")
