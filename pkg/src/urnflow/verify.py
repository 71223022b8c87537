"""Bundled verification suite tying the simulation to the theory.

Each check measures one invariant on a given graph and compares it to a
threshold. The quick level covers the exact identities and the
equilibrium analysis; the full level adds an ensemble convergence check.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import dynamics, equilibria, simulate
from .graphs import Graph, classify_graph

__all__ = ["Check", "VerifyReport", "Tolerances", "run_verification", "sample_domain_points"]


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    op: str  # "le" or "ge"


@dataclass(frozen=True)
class VerifyReport:
    graph: str
    level: str
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


@dataclass(frozen=True)
class Tolerances:
    decomposition: float = 1e-12
    grad_fd: float = 1e-6
    jacobian_fd: float = 1e-5
    field_identity: float = 1e-12
    residual: float = equilibria.RESIDUAL_TOL
    segment_residual: float = equilibria.SEGMENT_RESIDUAL_TOL
    zero_eig: float = equilibria.ZERO_EIG_TOL
    negative_eig: float = -1e-6
    ratio_slack: float = 1e-12
    flow_dL: float = -1e-9
    unique_distance: float = 0.02
    segment_distance: float = 0.05

    def with_overrides(self, overrides: dict[str, float] | None) -> "Tolerances":
        if not overrides:
            return self
        unknown = set(overrides) - set(self.__dataclass_fields__)
        if unknown:
            raise KeyError(f"unknown tolerance names: {sorted(unknown)}")
        return replace(self, **overrides)


def _le(name: str, value: float, threshold: float) -> Check:
    return Check(name, value <= threshold, float(value), float(threshold), "le")


def _ge(name: str, value: float, threshold: float) -> Check:
    return Check(name, value >= threshold, float(value), float(threshold), "ge")


def sample_domain_points(
    g: Graph, n: int, rng: np.random.Generator, min_coord: float = 0.0
) -> np.ndarray:
    """Uniform samples of the simplex, rejected against the pair-sum floor
    c = 1/(2N) and an optional coordinate floor."""
    c = 0.5 / g.n_edges
    ei = np.array([e[0] for e in g.edges])
    ej = np.array([e[1] for e in g.edges])
    rows = []
    have = 0
    while have < n:
        batch = rng.dirichlet(np.ones(g.m), size=max(64, n))
        ok = (batch[:, ei] + batch[:, ej]).min(axis=1) >= c
        if min_coord > 0.0:
            ok &= batch.min(axis=1) >= min_coord
        batch = batch[ok]
        rows.append(batch)
        have += len(batch)
    return np.concatenate(rows)[:n]


def _fd_grad_error(g: Graph, points: np.ndarray, h: float = 1e-6) -> float:
    worst = 0.0
    for x in points:
        grad = dynamics.lyapunov_grad(g, x)
        for i in range(g.m):
            e = np.zeros(g.m)
            e[i] = h
            fd = (dynamics.lyapunov(g, x + e) - dynamics.lyapunov(g, x - e)) / (2 * h)
            worst = max(worst, abs(fd - grad[i]))
    return worst


def _fd_jacobian_error(g: Graph, points: np.ndarray, h: float = 1e-6) -> float:
    worst = 0.0
    for x in points:
        J = dynamics.jacobian(g, x)
        for j in range(g.m):
            e = np.zeros(g.m)
            e[j] = h
            fd = (dynamics.vector_field(g, x + e) - dynamics.vector_field(g, x - e)) / (2 * h)
            worst = max(worst, np.abs(fd - J[:, j]).max())
    return worst


def _decomposition_check(g: Graph, steps: int, rng: np.random.Generator) -> float:
    state = simulate.init_state(g, [1] * g.m)
    worst = 0.0
    for _ in range(steps):
        nxt = simulate.step(state, g, rng)
        worst = max(worst, simulate.decomposition_residual(state, nxt, g))
        state = nxt
    return worst


def run_verification(
    g: Graph,
    level: str = "quick",
    seed: int = 20240809,
    tolerances: Tolerances | None = None,
) -> VerifyReport:
    if level not in ("quick", "full"):
        raise ValueError("level must be 'quick' or 'full'")
    tol = tolerances or Tolerances()
    rng = np.random.default_rng(seed)
    gc = classify_graph(g)
    checks: list[Check] = []

    # exact one-step identity of the simulation rewrite
    checks.append(
        _le("decomposition_identity", _decomposition_check(g, 2000, rng), tol.decomposition)
    )

    # calculus cross-checks at random interior points
    pts = sample_domain_points(g, 25, rng, min_coord=0.01)
    checks.append(_le("gradient_finite_difference", _fd_grad_error(g, pts), tol.grad_fd))
    checks.append(_le("jacobian_finite_difference", _fd_jacobian_error(g, pts), tol.jacobian_fd))
    f_vals = dynamics.vector_field(g, pts)
    identity_err = np.abs(f_vals - pts * dynamics.lyapunov_grad(g, pts)).max()
    checks.append(_le("field_gradient_identity", float(identity_err), tol.field_identity))
    checks.append(
        _le("field_sum_conservation", float(np.abs(f_vals.sum(axis=1)).max()), tol.field_identity)
    )

    # equilibrium structure; classification raises on sign/spectrum mismatch
    try:
        eqs = equilibria.find_equilibria(g)
    except equilibria.InconsistentClassification:
        eqs = None
        checks.append(_ge("sign_spectrum_agreement", 0.0, 1.0))
    if eqs is not None:
        checks.append(
            _le("equilibrium_residuals", max(e.residual for e in eqs), tol.residual)
        )
        checks.append(_ge("sign_spectrum_agreement", 1.0, 1.0))

    limit = None
    if eqs is not None and not (gc.bipartite and gc.balanced):
        try:
            limit = equilibria.limit_object(g, gc)
        except equilibria.UniquenessViolation:
            checks.append(_ge("single_non_unstable", 0.0, 1.0))
        if limit is not None:
            checks.append(_ge("single_non_unstable", 1.0, 1.0))
            w = limit.point.point
            samples = sample_domain_points(g, 2000 if level == "quick" else 10_000, rng)
            f_min = float(dynamics.pair_ratio_sum(g, w, samples).min())
            checks.append(_ge("ratio_sum_lower_bound", f_min - g.n_edges, -tol.ratio_slack))
    elif eqs is not None:
        limit = equilibria.limit_object(g, gc)

    if gc.bipartite and gc.regular:
        seg = equilibria.omega_segment(g, gc)
        resid = max(
            float(np.abs(dynamics.vector_field(g, seg.point(p))).sum())
            for p in np.linspace(0.0, seg.p_plus_q, 23)[1:-1]
        )
        checks.append(_le("segment_stationarity", resid, tol.segment_residual))
        worst_zero = 0.0
        worst_rest = -np.inf
        for p in np.linspace(0.0, seg.p_plus_q, 22)[1:-1]:
            eigs = equilibria.spectrum(g, seg.point(float(p)))
            others = np.delete(eigs, np.abs(eigs).argmin())
            worst_zero = max(worst_zero, float(np.abs(eigs).min()))
            worst_rest = max(worst_rest, float(others.max()))
        checks.append(_le("segment_simple_zero_eigenvalue", worst_zero, tol.zero_eig))
        checks.append(_le("segment_transverse_eigenvalues", worst_rest, tol.negative_eig))

    if gc.bipartite and gc.balanced:
        interval = equilibria.interior_interval(g, gc)
        if interval is not None:
            lo, hi = interval.eta_range
            resid = max(
                float(np.abs(dynamics.vector_field(g, interval.point(float(eta)))).sum())
                for eta in np.linspace(lo, hi, 52)[1:-1]
            )
            checks.append(_le("interior_interval_residuals", resid, tol.residual))

    # energy monotone along the flow
    starts = sample_domain_points(g, 5, rng, min_coord=0.02)
    _, min_dL, total_dL = dynamics.flow_batch(g, starts, t=20.0, dt=1e-2)
    checks.append(_ge("flow_energy_monotonicity", min_dL, tol.flow_dL))
    checks.append(_ge("flow_energy_strict_increase", float(total_dL.min()), 0.0))

    if level == "full" and limit is not None:
        summary = simulate.monte_carlo(
            g, [1] * g.m, steps=100_000, runs=100, master_seed=seed, limit=limit
        )
        if limit.kind == "UniquePoint":
            frac = float(np.mean(summary.distances <= tol.unique_distance))
            checks.append(_ge("ensemble_convergence", frac, 0.95))
        else:
            checks.append(
                _le("ensemble_convergence", summary.max_distance, tol.segment_distance)
            )
            # distance to the limit object should decrease across decades
            dec = _decade_distances(g, limit, steps=100_000, runs=20, seed=seed + 1)
            checks.append(
                _ge("distance_decreasing_across_decades", float(dec[0] - dec[-1]), 0.0)
            )

    return VerifyReport(graph=g.name or f"m{g.m}e{g.n_edges}", level=level, checks=tuple(checks))


def _decade_distances(
    g: Graph, limit: equilibria.LimitResult, steps: int, runs: int, seed: int
) -> list[float]:
    """Median distance to the limit object at n = steps/100, steps/10, steps."""
    marks = [steps // 100, steps // 10, steps]
    per_mark = {n: [] for n in marks}
    for k in range(runs):
        traj = simulate.run(
            g, [1] * g.m, steps, simulate.stream_seed(seed, k), sample_stride=steps // 100
        )
        for n in marks:
            idx = int(np.searchsorted(traj.sample_steps, n))
            per_mark[n].append(
                equilibria.distance_to_limit(limit, g, traj.points[idx])
            )
    return [float(np.median(per_mark[n])) for n in marks]
