"""Contrast the two limit behaviours with seeded ensembles.

On the triangle the proportions head to the uniform point (slowly: the
contraction rate of the mean-field flow near uniform is 1/4, so the noise
floor shrinks like n^(-1/4)). On the 4-cycle the limit is a random point
of the two-valued segment: the distance to the segment dies out while the
fitted segment coordinate p stays spread across runs.
"""

import numpy as np

from urnflow.corpus import load_corpus_graph
from urnflow.simulate import monte_carlo

k3 = load_corpus_graph("k3")
summary = monte_carlo(k3, [1, 1, 1], steps=100_000, runs=100, master_seed=12)
print("triangle, 100 runs x 1e5 steps:")
print(f"  distance to uniform: mean {summary.mean_distance:.4f}, "
      f"max {summary.max_distance:.4f}")

c4 = load_corpus_graph("c4")
summary = monte_carlo(c4, [1, 1, 1, 1], steps=100_000, runs=200, master_seed=12)
print("\n4-cycle, 200 runs x 1e5 steps:")
print(f"  distance to segment: mean {summary.mean_distance:.5f}, "
      f"max {summary.max_distance:.5f}")
print(f"  fitted p across runs: std {np.std(summary.omega_p):.4f} "
      f"(spread => the limit really is random)")

hist, edges = np.histogram(summary.omega_p, bins=10, range=(0.0, 0.5))
print("\n  histogram of fitted p over [0, 0.5]:")
for k, count in enumerate(hist):
    bar = "#" * count
    print(f"  [{edges[k]:.2f}, {edges[k + 1]:.2f})  {bar}")
