"""Exact simulation of the reinforced ball process.

Each step adds one ball per edge: the ball on edge {i,j} goes to i with
probability B_i/(B_i+B_j), all edges drawing against the counts frozen at
the start of the step. Randomness is reproducible: a run is a pure
function of (graph, initial counts, steps, seed), and ensemble runs use
per-run streams derived from (master seed, run index) so results do not
depend on execution order or parallelism.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import equilibria as eqmod
from .dynamics import vector_field
from .errors import CountOverflow, InvalidInitial, NotSuccessor
from .graphs import Graph, classify_graph

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

__all__ = [
    "UrnState",
    "Trajectory",
    "EnsembleSummary",
    "init_state",
    "step",
    "proportions",
    "step_schedule",
    "noise_term",
    "decomposition_residual",
    "run",
    "monte_carlo",
    "stream_seed",
]

_INT64_MAX = np.iinfo(np.int64).max
_CHUNK = 1 << 18  # steps per uniforms block


@dataclass(frozen=True)
class UrnState:
    """Ball counts after n steps; the total is N0 + n * N exactly."""

    counts: np.ndarray  # int64, shape (m,)
    n: int
    n0: int

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class Trajectory:
    """Proportion vectors recorded at a subsampled step schedule."""

    graph: str
    seed: int
    sample_steps: np.ndarray  # int64 step indices n
    points: np.ndarray        # float64, shape (k, m)
    gamma: np.ndarray         # gamma_n at the sampled steps
    tau: np.ndarray           # tau_n = sum_{k<n} gamma_k at the sampled steps
    max_decomposition_residual: Optional[float] = None


@dataclass(frozen=True)
class EnsembleSummary:
    """Per-run final states of an ensemble plus distance-to-limit statistics."""

    graph: str
    runs: int
    steps: int
    master_seed: int
    final_points: np.ndarray       # (runs, m)
    distances: np.ndarray          # (runs,) L1 distance to the predicted limit
    mean_distance: float
    max_distance: float
    limit: eqmod.LimitResult
    omega_p: Optional[np.ndarray] = None   # fitted segment coordinate per run
    max_decomposition_residual: Optional[float] = None
    trajectories: Optional[list[Trajectory]] = None


def init_state(g: Graph, initial_counts: Sequence[int]) -> UrnState:
    counts = np.asarray(initial_counts, dtype=np.int64)
    if counts.shape != (g.m,):
        raise InvalidInitial(f"need {g.m} initial counts, got shape {counts.shape}")
    if np.any(counts < 1):
        raise InvalidInitial("every vertex needs at least one initial ball")
    return UrnState(counts=counts.copy(), n=0, n0=int(counts.sum()))


def step(s: UrnState, g: Graph, rng: np.random.Generator) -> UrnState:
    """One simulation step: N independent edge draws against frozen counts."""
    if s.total > _INT64_MAX - g.n_edges:
        raise CountOverflow("ball counts would overflow int64")
    ei = np.array([e[0] for e in g.edges], dtype=np.intp)
    ej = np.array([e[1] for e in g.edges], dtype=np.intp)
    ci = s.counts[ei].astype(float)
    cj = s.counts[ej].astype(float)
    wins = rng.random(g.n_edges) < ci / (ci + cj)
    receivers = np.where(wins, ei, ej)
    inc = np.bincount(receivers, minlength=g.m).astype(np.int64)
    return UrnState(counts=s.counts + inc, n=s.n + 1, n0=s.n0)


def proportions(s: UrnState) -> np.ndarray:
    """Ball fractions x_i(n) = B_i(n) / (N0 + nN)."""
    return s.counts / s.total


def step_schedule(g: Graph, n0: int, n: int) -> tuple[float, float]:
    """(gamma_n, tau_n) of the stochastic-approximation rewrite:
    gamma_n = 1/(N0/N + n + 1), tau_n = sum_{k<n} gamma_k."""
    a = n0 / g.n_edges
    gamma_n = 1.0 / (a + n + 1.0)
    tau_n = float(np.sum(1.0 / (a + 1.0 + np.arange(n)))) if n > 0 else 0.0
    return gamma_n, tau_n


def noise_term(s_before: UrnState, s_after: UrnState, g: Graph) -> np.ndarray:
    """The martingale increment u(n) of the step from s_before to s_after:
    u_i = (1/N) * sum over neighbours j of (indicator(ball to i) - x_i/(x_i+x_j)).

    Satisfies x(n+1) - x(n) = gamma_n * (F(x(n)) + u(n)) exactly.
    """
    inc = s_after.counts - s_before.counts
    if (
        s_after.n != s_before.n + 1
        or s_after.n0 != s_before.n0
        or np.any(inc < 0)
        or int(inc.sum()) != g.n_edges
    ):
        raise NotSuccessor("states are not one step apart")
    x = proportions(s_before)
    ei = np.array([e[0] for e in g.edges], dtype=np.intp)
    ej = np.array([e[1] for e in g.edges], dtype=np.intp)
    p = x[ei] / (x[ei] + x[ej])
    expected = np.zeros(g.m)
    np.add.at(expected, ei, p)
    np.add.at(expected, ej, 1.0 - p)
    return (inc - expected) / g.n_edges


def decomposition_residual(s_before: UrnState, s_after: UrnState, g: Graph) -> float:
    """L1 residual of x(n+1) - x(n) = gamma_n * (F(x(n)) + u(n))."""
    x0 = proportions(s_before)
    x1 = proportions(s_after)
    gamma_n, _ = step_schedule(g, s_before.n0, s_before.n)
    u = noise_term(s_before, s_after, g)
    f = vector_field(g, x0)
    return float(np.abs(x1 - x0 - gamma_n * (f + u)).sum())


# -- bulk simulation kernel -----------------------------------------------------

def _sim_chunk_py(counts, ei, ej, uniforms, rec_rel, out_counts, rec_pos,
                  n_start, n0_over_n, check):
    """Advance `counts` by uniforms.shape[0] steps, recording rows of
    `out_counts` at the relative step offsets in rec_rel. Returns
    (new rec_pos, max decomposition residual seen)."""
    n_edges = ei.shape[0]
    m = counts.shape[0]
    steps = uniforms.shape[0]
    inc = np.zeros(m, dtype=np.int64)
    fexp = np.zeros(m, dtype=np.float64)
    max_res = 0.0
    total = np.int64(0)
    for i in range(m):
        total += counts[i]
    for s in range(steps):
        for i in range(m):
            inc[i] = 0
            fexp[i] = 0.0
        for e in range(n_edges):
            a = ei[e]
            b = ej[e]
            p = counts[a] / (counts[a] + counts[b])
            if uniforms[s, e] < p:
                inc[a] += 1
            else:
                inc[b] += 1
            fexp[a] += p
            fexp[b] += 1.0 - p
        if check:
            n = n_start + s
            gamma = 1.0 / (n0_over_n + n + 1.0)
            t1 = total + n_edges
            res = 0.0
            for i in range(m):
                x = counts[i] / total
                drift = -x + fexp[i] / n_edges
                noise = (inc[i] - fexp[i]) / n_edges
                dx = (counts[i] + inc[i]) / t1 - x
                res += abs(dx - gamma * (drift + noise))
            if res > max_res:
                max_res = res
        for i in range(m):
            counts[i] += inc[i]
        total += n_edges
        if rec_pos < rec_rel.shape[0] and rec_rel[rec_pos] == s + 1:
            for i in range(m):
                out_counts[rec_pos, i] = counts[i]
            rec_pos += 1
    return rec_pos, max_res


if njit is not None:
    _sim_chunk = njit(cache=True, nogil=True)(_sim_chunk_py)
else:  # pragma: no cover
    _sim_chunk = _sim_chunk_py


def default_stride(steps: int, cap: int = 10_000) -> int:
    """Smallest stride keeping a trajectory at or under `cap` points."""
    return max(1, -(-steps // cap))


def run(
    g: Graph,
    initial_counts: Sequence[int],
    steps: int,
    seed,
    sample_stride: Optional[int] = None,
    check_decomposition: bool = False,
) -> Trajectory:
    """Simulate one trajectory; deterministic in (graph, counts, steps, seed).

    Records the proportions every `sample_stride` steps (default: at most
    10^4 points) plus the final step. With check_decomposition, the exact
    one-step identity residual is tracked across every simulated step.
    """
    state = init_state(g, initial_counts)
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if state.n0 + steps * g.n_edges > _INT64_MAX:
        raise CountOverflow(f"{steps} steps would overflow 64-bit ball counts")
    stride = sample_stride or default_stride(steps)
    if stride < 1:
        raise ValueError("sample_stride must be >= 1")

    rec_steps = list(range(0, steps + 1, stride))
    if rec_steps[-1] != steps:
        rec_steps.append(steps)
    rec_steps = np.array(rec_steps, dtype=np.int64)

    m = g.m
    ei = np.array([e[0] for e in g.edges], dtype=np.int64)
    ej = np.array([e[1] for e in g.edges], dtype=np.int64)
    counts = state.counts.copy()
    out_counts = np.zeros((len(rec_steps), m), dtype=np.int64)
    out_counts[0] = counts
    rng = np.random.default_rng(seed)
    n0_over_n = state.n0 / g.n_edges

    tau = np.zeros(len(rec_steps))
    tau_carry = 0.0
    rec_pos = 1  # row 0 is the initial state
    done = 0
    max_res = 0.0
    while done < steps:
        block = min(_CHUNK, steps - done)
        uniforms = rng.random((block, g.n_edges))
        rel = rec_steps[(rec_steps > done) & (rec_steps <= done + block)] - done
        sub = out_counts[rec_pos : rec_pos + len(rel)]
        new_pos, res = _sim_chunk(
            counts, ei, ej, uniforms, rel, sub, 0, done, n0_over_n, check_decomposition
        )
        assert new_pos == len(rel)
        # tau at the sampled steps: cumulative sum of gamma over the block
        gammas = 1.0 / (n0_over_n + 1.0 + done + np.arange(block))
        cum = np.cumsum(gammas)
        tau[rec_pos : rec_pos + len(rel)] = tau_carry + cum[rel - 1]
        tau_carry += cum[-1]
        rec_pos += new_pos
        done += block
        max_res = max(max_res, res)

    points = out_counts / (state.n0 + rec_steps[:, None] * g.n_edges)
    gamma = 1.0 / (n0_over_n + rec_steps + 1.0)

    # recorded points must be probability vectors; exact integer counts make
    # this a cheap sanity check rather than a numerical tolerance question
    sums = points.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-12) or np.any(points < 0.0):
        raise AssertionError("recorded point left the simplex")
    if np.any(np.diff(tau) <= 0.0):
        raise AssertionError("tau schedule is not strictly increasing")

    return Trajectory(
        graph=g.name or f"m{g.m}e{g.n_edges}",
        seed=_seed_label(seed),
        sample_steps=rec_steps,
        points=points,
        gamma=gamma,
        tau=tau,
        max_decomposition_residual=max_res if check_decomposition else None,
    )


def _seed_label(seed) -> int:
    return int(seed) if np.isscalar(seed) else -1


def stream_seed(master_seed: int, run_index: int) -> int:
    """Derived seed for run k of an ensemble; a pure function of its inputs."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(run_index,))
    return int(ss.generate_state(1, np.uint64)[0])


def _thread_count(threads: Optional[int]) -> int:
    if threads is not None:
        return max(1, threads)
    env = os.environ.get("URNFLOW_THREADS", "")
    if env.strip():
        return max(1, int(env))
    return os.cpu_count() or 1


def monte_carlo(
    g: Graph,
    initial_counts: Sequence[int],
    steps: int,
    runs: int,
    master_seed: int,
    sample_stride: Optional[int] = None,
    check_decomposition: bool = False,
    keep_trajectories: bool = False,
    limit: Optional[eqmod.LimitResult] = None,
    threads: Optional[int] = None,
) -> EnsembleSummary:
    """Ensemble of independent runs with per-run derived streams.

    Run k consumes the stream seeded by stream_seed(master_seed, k), so the
    summary is identical whatever the execution order or thread count.
    Distances are measured against the predicted limit object (computed
    here unless supplied).
    """
    if runs < 1:
        raise ValueError("runs must be >= 1")
    if limit is None:
        limit = eqmod.limit_object(g)
    gc = classify_graph(g)

    def one(k: int) -> Trajectory:
        return run(
            g,
            initial_counts,
            steps,
            stream_seed(master_seed, k),
            sample_stride=sample_stride,
            check_decomposition=check_decomposition,
        )

    n_threads = _thread_count(threads)
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            trajectories = list(pool.map(one, range(runs)))
    else:
        trajectories = [one(k) for k in range(runs)]

    final_points = np.stack([t.points[-1] for t in trajectories])
    distances = np.array(
        [eqmod.distance_to_limit(limit, g, x) for x in final_points]
    )
    omega_p = None
    if gc.bipartite and gc.regular:
        omega_p = final_points[:, list(gc.bipartition[0])].mean(axis=1)
    max_res = None
    if check_decomposition:
        max_res = max(t.max_decomposition_residual for t in trajectories)

    return EnsembleSummary(
        graph=g.name or f"m{g.m}e{g.n_edges}",
        runs=runs,
        steps=steps,
        master_seed=master_seed,
        final_points=final_points,
        distances=distances,
        mean_distance=float(distances.mean()),
        max_distance=float(distances.max()),
        limit=limit,
        omega_p=omega_p,
        max_decomposition_residual=max_res,
        trajectories=trajectories if keep_trajectories else None,
    )
