"""Graph representation, parsing and structural classification.

Vertices are numbered 1..m in files and on all emitted output, 0..m-1
internally. Graphs are simple, undirected and connected; anything else is
rejected at parse time.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import ParseError, ValidationError

__all__ = ["Graph", "GraphClass", "make_graph", "parse_graph", "classify_graph"]


@dataclass(frozen=True)
class Graph:
    """Finite simple connected graph.

    ``edges`` keeps the input order; simulation iterates edges in exactly
    this order, which pins down how random draws are consumed.
    """

    m: int
    edges: tuple[tuple[int, int], ...]
    adjacency: tuple[tuple[int, ...], ...]
    name: str = ""

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def __repr__(self) -> str:
        tag = self.name or f"graph(m={self.m}, edges={self.n_edges})"
        return f"<Graph {tag}>"


@dataclass(frozen=True)
class GraphClass:
    """Structural classification driving the limit-prediction dispatch."""

    bipartite: bool
    bipartition: Optional[tuple[tuple[int, ...], tuple[int, ...]]]
    balanced: bool
    regular: bool
    degree: Optional[int]


def make_graph(m: int, edges: Sequence[tuple[int, int]], name: str = "") -> Graph:
    """Validate and build a Graph from 0-based edge pairs."""
    if m < 1:
        raise ValidationError("graph needs at least one vertex")
    seen = set()
    cleaned = []
    for i, j in edges:
        if not (0 <= i < m and 0 <= j < m):
            raise ValidationError(f"edge ({i + 1},{j + 1}) out of range 1..{m}")
        if i == j:
            raise ValidationError(f"self-loop at vertex {i + 1}")
        key = (i, j) if i < j else (j, i)
        if key in seen:
            raise ValidationError(f"duplicate edge ({key[0] + 1},{key[1] + 1})")
        seen.add(key)
        cleaned.append((i, j))

    nbrs = [[] for _ in range(m)]
    for i, j in cleaned:
        nbrs[i].append(j)
        nbrs[j].append(i)

    # connectivity via BFS from vertex 0
    if m > 1 or cleaned:
        visited = [False] * m
        visited[0] = True
        queue = deque([0])
        count = 1
        while queue:
            v = queue.popleft()
            for w in nbrs[v]:
                if not visited[w]:
                    visited[w] = True
                    count += 1
                    queue.append(w)
        if count != m:
            raise ValidationError("graph is not connected")

    return Graph(
        m=m,
        edges=tuple(cleaned),
        adjacency=tuple(tuple(sorted(ns)) for ns in nbrs),
        name=name,
    )


def parse_graph(text: str, name: str = "") -> Graph:
    """Parse a graph document.

    Two formats are accepted: an edge list (one ``i j`` pair per line,
    ``#`` comments and blank lines ignored) and a JSON object
    ``{"m": int, "edges": [[i, j], ...]}``. Vertex ids must be the
    contiguous range 1..m.
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return _parse_json(text, name)
    return _parse_edge_list(text, name)


def _parse_edge_list(text: str, name: str) -> Graph:
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: expected two vertex ids, got {raw!r}")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer vertex id in {raw!r}") from None
        if i < 1 or j < 1:
            raise ParseError(f"line {lineno}: vertex ids must be positive")
        pairs.append((i, j))
    if not pairs:
        raise ParseError("no edges found")
    return _finish(pairs, name)


def _parse_json(text: str, name: str) -> Graph:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON graph document: {exc}") from None
    if not isinstance(doc, dict) or "m" not in doc or "edges" not in doc:
        raise ParseError('JSON graph document needs keys "m" and "edges"')
    m = doc["m"]
    if not isinstance(m, int) or m < 1:
        raise ParseError('"m" must be a positive integer')
    pairs = []
    for k, pair in enumerate(doc["edges"]):
        if (
            not isinstance(pair, (list, tuple))
            or len(pair) != 2
            or not all(isinstance(v, int) for v in pair)
        ):
            raise ParseError(f"edge #{k} is not a pair of integers")
        pairs.append((pair[0], pair[1]))
    return _finish(pairs, name, m=m)


def _finish(pairs: list[tuple[int, int]], name: str, m: Optional[int] = None) -> Graph:
    max_id = max(max(i, j) for i, j in pairs)
    if m is None:
        m = max_id
    elif max_id > m:
        raise ValidationError(f"edge references vertex {max_id} but m={m}")
    used = set()
    for i, j in pairs:
        used.add(i)
        used.add(j)
    missing = set(range(1, m + 1)) - used
    if missing:
        raise ValidationError(
            f"vertex ids are not contiguous 1..{m}: no edge touches {sorted(missing)}"
        )
    return make_graph(m, [(i - 1, j - 1) for i, j in pairs], name=name)


def classify_graph(g: Graph) -> GraphClass:
    """Classify bipartiteness, balancedness and regularity.

    The bipartition is canonical: part A is the one containing vertex 1.
    Classification is a pure function of the graph, so identical input
    documents always yield identical results.
    """
    color = [-1] * g.m
    color[0] = 0
    queue = deque([0])
    bipartite = True
    while queue and bipartite:
        v = queue.popleft()
        for w in g.adjacency[v]:
            if color[w] == -1:
                color[w] = 1 - color[v]
                queue.append(w)
            elif color[w] == color[v]:
                bipartite = False
                break

    degrees = [g.degree(i) for i in range(g.m)]
    regular = len(set(degrees)) == 1
    degree = degrees[0] if regular else None

    if not bipartite:
        return GraphClass(False, None, False, regular, degree)

    part_a = tuple(i for i in range(g.m) if color[i] == 0)
    part_b = tuple(i for i in range(g.m) if color[i] == 1)
    return GraphClass(
        bipartite=True,
        bipartition=(part_a, part_b),
        balanced=len(part_a) == len(part_b),
        regular=regular,
        degree=degree,
    )
