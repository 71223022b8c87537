"""Mean-field dynamics on the simplex.

The ball process on a graph with N edges has the averaged drift

    F_i(x) = -x_i + (1/N) * sum over neighbours j of x_i / (x_i + x_j),

which is the gradient-like field F_i = x_i * dL/dx_i of the concave energy

    L(x) = -sum_i x_i + (1/N) * sum over edges {i,j} of log(x_i + x_j).

Everything here is a pure function of (graph, point). Point arguments
broadcast over leading axes: shape (..., m) in, shape (..., m) out.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegeneratePair, DomainError, LeftDomain, NotRegularBipartite, SparseTrajectory
from .graphs import Graph, GraphClass, classify_graph

__all__ = [
    "SimplexPoint",
    "FlowResult",
    "vector_field",
    "lyapunov",
    "lyapunov_grad",
    "uniqueness_lyapunov",
    "pair_ratio_sum",
    "jacobian",
    "jacobian_bipartite",
    "flow",
    "shadowing_gap",
    "domain_constant",
    "in_simplex",
    "in_domain",
]

SIMPLEX_TOL = 1e-12
FLOW_MEMBERSHIP_TOL = 1e-9


@lru_cache(maxsize=None)
def _edge_arrays(g: Graph):
    """Edge endpoint indices and one-hot incidence matrices, cached per graph."""
    ei = np.array([e[0] for e in g.edges], dtype=np.intp)
    ej = np.array([e[1] for e in g.edges], dtype=np.intp)
    inc_i = np.zeros((g.n_edges, g.m))
    inc_j = np.zeros((g.n_edges, g.m))
    inc_i[np.arange(g.n_edges), ei] = 1.0
    inc_j[np.arange(g.n_edges), ej] = 1.0
    return ei, ej, inc_i, inc_j


def _pair_sums(g: Graph, x: np.ndarray) -> np.ndarray:
    ei, ej, _, _ = _edge_arrays(g)
    s = x[..., ei] + x[..., ej]
    if np.any(s <= 0.0):
        raise DegeneratePair("some edge has x_i + x_j <= 0")
    return s


def vector_field(g: Graph, x) -> np.ndarray:
    """Drift F(x). Sums to 1 - sum(x), hence to 0 on the simplex."""
    x = np.asarray(x, dtype=float)
    ei, ej, inc_i, inc_j = _edge_arrays(g)
    s = _pair_sums(g, x)
    ri = x[..., ei] / s
    return -x + (ri @ inc_i + (1.0 - ri) @ inc_j) / g.n_edges


def lyapunov(g: Graph, x) -> np.ndarray:
    """Energy L(x); strictly increasing along non-stationary flow orbits."""
    x = np.asarray(x, dtype=float)
    s = _pair_sums(g, x)
    return -x.sum(axis=-1) + np.log(s).sum(axis=-1) / g.n_edges


def lyapunov_grad(g: Graph, x) -> np.ndarray:
    """Gradient of L: dL/dx_i = -1 + (1/N) * sum over neighbours of 1/(x_i+x_j).

    Satisfies F_i(x) = x_i * (dL/dx_i) identically.
    """
    x = np.asarray(x, dtype=float)
    _, _, inc_i, inc_j = _edge_arrays(g)
    inv = 1.0 / _pair_sums(g, x)
    return -1.0 + (inv @ (inc_i + inc_j)) / g.n_edges


def uniqueness_lyapunov(g: Graph, w, x) -> np.ndarray:
    """Relative entropy H(x) = sum over the support P of w of w_i log x_i.

    Non-positive on the simplex, maximal exactly at x = w, and
    non-decreasing along flow orbits whenever w is a non-unstable
    stationary point.
    """
    w = np.asarray(w, dtype=float)
    x = np.asarray(x, dtype=float)
    support = w > SIMPLEX_TOL
    xs = x[..., support]
    if np.any(xs <= 0.0):
        raise DomainError("x vanishes on the support of w")
    return (w[support] * np.log(xs)).sum(axis=-1)


def pair_ratio_sum(g: Graph, w, v) -> np.ndarray:
    """f(v) = sum over edges of (w_i + w_j) / (v_i + v_j).

    Equals N at v = w; for graphs that are not balanced-bipartite and
    non-unstable w it is >= N everywhere on the domain, with equality
    only at w. The time derivative of uniqueness_lyapunov along the flow
    is f(v)/N - 1.
    """
    w = np.asarray(w, dtype=float)
    v = np.asarray(v, dtype=float)
    ei, ej, _, _ = _edge_arrays(g)
    return ((w[..., ei] + w[..., ej]) / _pair_sums(g, v)).sum(axis=-1)


def jacobian(g: Graph, v) -> np.ndarray:
    """Jacobian matrix of the drift at a single point v.

    Entry (i, j) vanishes unless j == i or j is adjacent to i.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("jacobian expects a single point")
    _pair_sums(g, v)
    m, n_edges = g.m, g.n_edges
    J = np.zeros((m, m))
    grad = lyapunov_grad(g, v)
    for i, j in g.edges:
        h = -1.0 / (v[i] + v[j]) ** 2 / n_edges  # d2L/dvi dvj on this edge
        J[i, j] += v[i] * h
        J[j, i] += v[j] * h
        J[i, i] += v[i] * h
        J[j, j] += v[j] * h
    J[np.diag_indices(m)] += grad
    return J


def jacobian_bipartite(g: Graph, p: float, q: float, gc: GraphClass | None = None) -> np.ndarray:
    """Closed-form Jacobian for a regular bipartite graph at the two-value
    point (p on part A, q on part B), in the original vertex order.

    Requires p, q >= 0 with p + q = 2/m. Annihilates the direction
    (+1 on A, -1 on B) for every such point.
    """
    gc = gc or classify_graph(g)
    if not (gc.bipartite and gc.regular):
        raise NotRegularBipartite("closed-form Jacobian needs a regular bipartite graph")
    if p < 0 or q < 0 or abs(p + q - 2.0 / g.m) > 1e-12:
        raise ValueError("need p, q >= 0 with p + q = 2/m")
    part_a, part_b = gc.bipartition
    r = gc.degree
    half = g.m // 2
    M = np.zeros((half, half))
    pos_a = {v: k for k, v in enumerate(part_a)}
    pos_b = {v: k for k, v in enumerate(part_b)}
    for i, j in g.edges:
        if i in pos_a:
            M[pos_a[i], pos_b[j]] = 1.0
        else:
            M[pos_a[j], pos_b[i]] = 1.0
    block = np.zeros((g.m, g.m))
    scale = g.m / (2.0 * r)
    block[:half, :half] = np.eye(half) * (scale * r * q)
    block[:half, half:] = -scale * p * M
    block[half:, :half] = -scale * q * M.T
    block[half:, half:] = np.eye(half) * (scale * r * p)
    block -= np.eye(g.m)
    perm = np.array(part_a + part_b)
    J = np.zeros((g.m, g.m))
    J[np.ix_(perm, perm)] = block
    return J


# -- domain -------------------------------------------------------------------

def domain_constant(g: Graph, x0) -> float:
    """Pair-sum floor c for the invariant domain containing x0.

    Chosen as min(1/(2N), half the smallest edge-pair sum of x0), which
    keeps c below 1/N and x0 inside the domain."""
    x0 = np.asarray(x0, dtype=float)
    s = _pair_sums(g, x0)
    return float(min(0.5 / g.n_edges, 0.5 * s.min()))


def in_simplex(x, tol: float = SIMPLEX_TOL) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.all(x >= -tol) and np.all(np.abs(x.sum(axis=-1) - 1.0) <= tol))


def in_domain(g: Graph, x, c: float, tol: float = SIMPLEX_TOL) -> bool:
    x = np.asarray(x, dtype=float)
    ei, ej, _, _ = _edge_arrays(g)
    s = x[..., ei] + x[..., ej]
    return in_simplex(x, tol) and bool(np.all(s >= c - tol))


@dataclass(frozen=True)
class SimplexPoint:
    """Validated point of the constrained simplex, tagged with its graph."""

    coords: np.ndarray
    graph: str
    c: float


def simplex_point(g: Graph, coords, c: float | None = None) -> SimplexPoint:
    coords = np.asarray(coords, dtype=float)
    if coords.shape != (g.m,):
        raise DomainError(f"expected {g.m} coordinates, got shape {coords.shape}")
    if not in_simplex(coords):
        raise DomainError("coordinates are not a probability vector")
    if c is None:
        c = domain_constant(g, coords)
    if not in_domain(g, coords, c):
        raise DomainError(f"point violates the edge pair-sum floor c={c}")
    return SimplexPoint(coords=coords, graph=g.name, c=c)


# -- flow ---------------------------------------------------------------------

@dataclass(frozen=True)
class FlowResult:
    endpoint: SimplexPoint
    t: float
    steps: int
    max_violation: float
    min_step_dL: float
    total_dL: float


def _rk4_step(g: Graph, x: np.ndarray, h: float) -> np.ndarray:
    k1 = vector_field(g, x)
    k2 = vector_field(g, x + 0.5 * h * k1)
    k3 = vector_field(g, x + 0.5 * h * k2)
    k4 = vector_field(g, x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _violation(g: Graph, x: np.ndarray, c: float) -> float:
    ei, ej, _, _ = _edge_arrays(g)
    s = x[..., ei] + x[..., ej]
    return float(max(0.0, -x.min(), c - s.min()))


def flow(g: Graph, x0, t: float, dt: float = 1e-2, c: float | None = None) -> FlowResult:
    """Integrate dv/dt = F(v) from x0 for time t with fixed-step RK4.

    The iterate is renormalized to unit sum after every step. A step that
    would leave the invariant domain is retried with a halved step size,
    up to 20 times, before LeftDomain is raised.
    """
    x = np.asarray(x0, dtype=float).copy()
    if not in_simplex(x):
        raise DomainError("x0 is not a probability vector")
    if c is None:
        c = domain_constant(g, x)
    if not in_domain(g, x, c):
        raise DomainError("x0 violates the pair-sum floor")

    remaining = float(t)
    steps = 0
    max_violation = 0.0
    min_dL = np.inf
    L_prev = float(lyapunov(g, x))
    L_start = L_prev
    while remaining > 1e-9 * dt:
        h = min(dt, remaining)
        for halving in range(21):
            # a stage of an oversized step can leave the domain outright;
            # treat that the same as a constraint violation and halve
            try:
                cand = _rk4_step(g, x, h)
            except DegeneratePair:
                cand = None
            if cand is None or not np.all(np.isfinite(cand)):
                viol = np.inf
            else:
                drift = abs(cand.sum() - 1.0)
                cand = cand / cand.sum()
                viol = max(_violation(g, cand, c), drift)
            if viol <= FLOW_MEMBERSHIP_TOL:
                break
            if halving == 20:
                raise LeftDomain(
                    f"step at t={t - remaining:.6g} violates the domain by {viol:.3e}"
                )
            h *= 0.5
        np.clip(cand, 0.0, None, out=cand)
        x = cand / cand.sum()
        max_violation = max(max_violation, viol)
        remaining -= h
        steps += 1
        L_now = float(lyapunov(g, x))
        min_dL = min(min_dL, L_now - L_prev)
        L_prev = L_now

    if steps == 0:
        min_dL = 0.0
    return FlowResult(
        endpoint=simplex_point(g, x, c),
        t=float(t),
        steps=steps,
        max_violation=max_violation,
        min_step_dL=float(min_dL),
        total_dL=float(L_prev - L_start),
    )


def flow_batch(g: Graph, x0, t: float, dt: float = 1e-2) -> tuple[np.ndarray, float, np.ndarray]:
    """Integrate a batch of starting points (k, m) simultaneously.

    Returns (endpoints, min per-step dL over the whole batch, total dL per
    trajectory). Used for ensemble-level checks; no step halving, so all
    starts should be comfortably interior.
    """
    x = np.atleast_2d(np.asarray(x0, dtype=float)).copy()
    n_steps = int(np.ceil(t / dt - 1e-12))
    min_dL = np.inf
    L_prev = lyapunov(g, x)
    L_start = L_prev.copy()
    remaining = float(t)
    for _ in range(n_steps):
        h = min(dt, remaining)
        x = _rk4_step(g, x, h)
        x /= x.sum(axis=-1, keepdims=True)
        remaining -= h
        L_now = lyapunov(g, x)
        min_dL = min(min_dL, float((L_now - L_prev).min()))
        L_prev = L_now
    return x, float(min_dL), L_prev - L_start


# -- shadowing diagnostic -----------------------------------------------------

def interpolate_trajectory(taus: np.ndarray, points: np.ndarray, t) -> np.ndarray:
    """Piecewise-linear interpolation of recorded points on the tau scale."""
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape + (points.shape[1],))
    for col in range(points.shape[1]):
        out[..., col] = np.interp(t, taus, points[:, col])
    return out


def shadowing_gap(traj, g: Graph, T: float, dt: float = 1e-2) -> list[tuple[float, float]]:
    """How far the recorded process drifts from the flow over windows of
    length T (on the tau time scale).

    For each recorded time t with t + T inside the record, integrates the
    flow from the recorded point and reports the maximum L1 distance to
    the interpolated process over the window. Diagnostic only.
    """
    taus = np.asarray(traj.tau, dtype=float)
    points = np.asarray(traj.points, dtype=float)
    if len(taus) < 2:
        raise SparseTrajectory("need at least two recorded points")
    spacing = np.diff(taus).max()
    if spacing > T / 10.0:
        raise SparseTrajectory(
            f"max tau spacing {spacing:.4g} exceeds T/10 = {T / 10.0:.4g}"
        )
    t_end = taus[-1]
    base = np.nonzero(taus + T <= t_end)[0]
    if base.size == 0:
        return []

    n_sub = max(1, int(np.ceil(T / dt)))
    h = T / n_sub
    x = points[base].copy()
    gaps = np.zeros(base.size)
    for k in range(1, n_sub + 1):
        x = _rk4_step(g, x, h)
        x /= x.sum(axis=-1, keepdims=True)
        ref = interpolate_trajectory(taus, points, taus[base] + k * h)
        d = np.abs(x - ref).sum(axis=-1)
        np.maximum(gaps, d, out=gaps)
    return [(float(taus[i]), float(gaps[k])) for k, i in enumerate(base)]
