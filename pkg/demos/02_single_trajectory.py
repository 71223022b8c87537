"""Simulate one trajectory of the ball process on the triangle and watch
the proportions settle toward the uniform point.

Every edge adds one ball per step, so after n steps the total count is
N0 + n*N exactly; the printed rows show the proportion vector x(n) and its
L1 distance to (1/3, 1/3, 1/3) at powers of ten.
"""

import numpy as np

from urnflow.corpus import load_corpus_graph
from urnflow.jsonio import trajectory_csv
from urnflow.simulate import run

g = load_corpus_graph("k3")
traj = run(g, [1, 1, 1], steps=1_000_000, seed=2024, sample_stride=100)

print(f"graph {traj.graph}, seed {traj.seed}, {len(traj.sample_steps)} recorded points")
print(f"{'n':>9} {'tau':>7}  x(n) and L1 distance to uniform")
for mark in [0, 100, 1_000, 10_000, 100_000, 1_000_000]:
    idx = int(np.searchsorted(traj.sample_steps, mark))
    x = traj.points[idx]
    d = np.abs(x - 1 / 3).sum()
    print(f"{mark:>9} {traj.tau[idx]:>7.3f}  ({x[0]:.4f}, {x[1]:.4f}, {x[2]:.4f})  {d:.4f}")

csv = trajectory_csv(traj)
print("\nfirst trajectory CSV lines:")
print("\n".join(csv.splitlines()[:4]))
