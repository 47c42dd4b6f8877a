"""How fast random states forget their small factor.

Draw Haar-random pure states on C^2 x C^d2, reduce to the 2-dim factor, and
measure the trace distance to the maximally mixed state.  The sample mean
stays below (1/2)sqrt(d1/d2) and falls off like 1/sqrt(d2).
"""
import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from qcoarse import RngStream, trace_distance

D1 = 2
D2_LIST = [4, 8, 16, 32, 64, 128, 256, 512]
SAMPLES = 150

means = []
bounds = []
for i, d2 in enumerate(D2_LIST):
    g = RngStream(2024, i).generator()
    dists = []
    for _ in range(SAMPLES):
        psi = g.standard_normal(D1 * d2) + 1j * g.standard_normal(D1 * d2)
        psi /= np.linalg.norm(psi)
        m = psi.reshape(D1, d2)
        dists.append(trace_distance(m @ m.conj().T, np.eye(D1) / D1))
    means.append(np.mean(dists))
    bounds.append(0.5 * math.sqrt(D1 / d2))
    print(f"d2 = {d2:4d}   mean D = {means[-1]:.6f}   bound = {bounds[-1]:.6f}"
          f"   ratio = {means[-1] / bounds[-1]:.3f}")

slope = np.polyfit(np.log(D2_LIST), np.log(means), 1)[0]
print(f"\nlog-log slope of the mean against d2: {slope:.4f}  (expect ~ -1/2)")

fig, ax = plt.subplots(figsize=(5, 4))
ax.loglog(D2_LIST, means, "o-", label="sample mean")
ax.loglog(D2_LIST, bounds, "k--", label=r"$\frac{1}{2}\sqrt{d_1/d_2}$")
ax.set_xlabel("environment dimension $d_2$")
ax.set_ylabel("trace distance to maximal mixing")
ax.legend()
fig.tight_layout()
fig.savefig("page_contraction.png", dpi=150)
print("wrote page_contraction.png")
