"""Query costs three ways: search, pair distinguishing, and the 4k^2 wall.

1. Grover search: the two-dimensional rotation picture predicts the full
   statevector simulation to machine precision, and the optimal iteration
   count scales like sqrt(N/M).
2. Distinguishing two barely different states (trace distance D0) by
   amplitude amplification takes ~ pi/(16 D0) reflections — cost scales
   like 1/D0, not 1/D0^2.
3. No driver can beat the progress bound: the cumulative deviation D_k
   between runs on oracles differing in one item obeys D_k <= 4k^2.
"""
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from qcoarse import (
    GroverPlan,
    RngStream,
    bbbv_deviation,
    distinguish_sim,
    grover_search_2d,
    grover_search_full,
    plan_distinguish,
    pure_pair_at_distance,
)

print("== search ==")
for n_qubits in (3, 5, 8, 10):
    n = 2 ** n_qubits
    plan = GroverPlan.for_search(n, 1)
    full = grover_search_full(n_qubits, [n // 3], plan.predicted_R)
    two_d = grover_search_2d(plan, plan.predicted_R)
    print(f"  N = {n:5d}: R = {plan.predicted_R:3d}, success = {two_d:.6f}, "
          f"|full - 2d| = {abs(full - two_d):.2e}")

print("\n== distinguishing a pair at trace distance D0 ==")
print(f"  {'D0':>7} {'predicted':>10} {'simulated':>10}")
for d0 in (0.1, 0.05, 0.02, 0.01, 0.005, 0.001):
    plan = plan_distinguish(d0)
    r, s = pure_pair_at_distance(d0)
    sim = distinguish_sim(r, s)
    print(f"  {d0:7.3f} {plan.predicted_iters:10.2f} "
          f"{sim['iters_to_success']:10d}")

print("\n== progress bound ==")
fig, ax = plt.subplots(figsize=(5, 4))
k = None
for driver in ("grover", "random", "identity"):
    trace = bbbv_deviation(6, driver=driver, k_max=20, rng=RngStream(7))
    k = trace.k_values
    ax.plot(k[1:], trace.D_k[1:], "o-", ms=3, label=driver)
    frac = trace.D_k[-1] / (4.0 * k[-1] ** 2)
    print(f"  driver {driver:8s}: D_20 = {trace.D_k[-1]:8.3f} "
          f"= {frac:.3f} of the 4k^2 bound")
ax.plot(k[1:], 4.0 * k[1:].astype(float) ** 2, "k--", label=r"$4k^2$")
ax.set_xlabel("queries $k$")
ax.set_ylabel("cumulative deviation $D_k$")
ax.set_yscale("log")
ax.legend()
fig.tight_layout()
fig.savefig("progress_bound.png", dpi=150)
print("wrote progress_bound.png")
