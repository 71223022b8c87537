"""Walk the bundled graph corpus and show how each graph is classified.

The classification drives everything downstream: graphs that are not
balanced-bipartite have a deterministic limit point, regular bipartite
graphs have a segment of candidate limits, and the remaining class only
gets its stationary structure reported.
"""

from urnflow.corpus import corpus_names, load_corpus_graph
from urnflow.graphs import classify_graph

print(f"{'graph':<8} {'m':>2} {'N':>2}  {'bipartite':<9} {'balanced':<8} "
      f"{'regular':<7} {'class'}")
for name in corpus_names():
    g = load_corpus_graph(name)
    gc = classify_graph(g)
    if not (gc.bipartite and gc.balanced):
        family = "unique limit point"
    elif gc.regular:
        family = "segment of limits"
    else:
        family = "interval / finite set (no guarantee)"
    print(f"{name:<8} {g.m:>2} {g.n_edges:>2}  {str(gc.bipartite):<9} "
          f"{str(gc.balanced):<8} {str(gc.regular):<7} {family}")
