"""Enumerate and classify every stationary point of a few small graphs.

The stationary set decomposes over faces of the simplex: a support S is
admissible when its complement is an independent set, and each admissible
face carries at most one critical point of the energy (one representative
point when the face carries a whole interval). The sign test on the zero
coordinates decides stability; the spectrum is the cross-check.
"""

import numpy as np

from urnflow.corpus import load_corpus_graph
from urnflow.equilibria import find_equilibria, limit_object

for name in ["k3", "p3", "p4", "c5", "star3", "c4"]:
    g = load_corpus_graph(name)
    print(f"\n=== {name} ===")
    for e in find_equilibria(g):
        point = np.round(e.point, 6)
        spectrum = np.round(e.spectrum, 4)
        print(f"  {str(point.tolist()):<42} {e.classification:<13} "
              f"residual {e.residual:.1e}  spectrum {spectrum.tolist()}")
    limit = limit_object(g)
    if limit.kind == "UniquePoint":
        print(f"  limit prediction: converges to {np.round(limit.point.point, 6).tolist()}")
    elif limit.kind == "OmegaSegment":
        seg = limit.segment
        print(f"  limit prediction: random point of the segment p+q={seg.p_plus_q}")
    elif limit.kind == "InteriorInterval":
        print(f"  stationary interval, eta range {limit.interval.eta_range} ({limit.note})")
    else:
        print(f"  finite non-unstable set, {len(limit.points)} point(s) ({limit.note})")
