import numpy as np
import pytest

import urnflow.dynamics as dyn
import urnflow.simulate as sim
from urnflow.errors import DegeneratePair, DomainError, SparseTrajectory
from urnflow.graphs import classify_graph, parse_graph
from urnflow.verify import sample_domain_points


def test_field_k3_hand_value(k3):
    f = dyn.vector_field(k3, [0.5, 0.25, 0.25])
    assert np.allclose(f, [-1 / 18, 1 / 36, 1 / 36], atol=1e-15)


def test_field_vanishes_at_uniform_on_regular_graphs(corpus):
    for name in ["k3", "c4", "c5", "c6", "c7", "k33", "k2"]:
        g = corpus[name]
        f = dyn.vector_field(g, np.full(g.m, 1.0 / g.m))
        assert np.abs(f).max() < 1e-15


def test_field_sum_zero_on_simplex(corpus):
    rng = np.random.default_rng(0)
    for g in corpus.values():
        pts = sample_domain_points(g, 50, rng)
        sums = dyn.vector_field(g, pts).sum(axis=1)
        assert np.abs(sums).max() <= 1e-12


def test_field_degenerate_pair(k3):
    with pytest.raises(DegeneratePair):
        dyn.vector_field(k3, [1.0, 0.0, 0.0])


def test_field_boundary_extension(p3):
    # x_2 = 0 with positive pair sums: the 0/(0+x) terms are exact zeros
    f = dyn.vector_field(p3, [0.5, 0.0, 0.5])
    assert np.abs(f).max() < 1e-15


def test_lyapunov_values(k2, k3):
    assert dyn.lyapunov(k2, [0.5, 0.5]) == pytest.approx(-1.0, abs=1e-15)
    assert dyn.lyapunov(k3, [1 / 3, 1 / 3, 1 / 3]) == pytest.approx(
        -1 + np.log(2 / 3), abs=1e-15
    )


def test_lyapunov_automorphism_invariance(k3, c4):
    x = np.array([0.5, 0.3, 0.2])
    for perm in [(1, 2, 0), (2, 0, 1), (0, 2, 1)]:
        assert dyn.lyapunov(k3, x[list(perm)]) == pytest.approx(
            dyn.lyapunov(k3, x), abs=1e-14
        )
    y = np.array([0.4, 0.3, 0.2, 0.1])
    rotated = y[[1, 2, 3, 0]]  # cyclic rotation is an automorphism of the 4-cycle
    assert dyn.lyapunov(c4, rotated) == pytest.approx(dyn.lyapunov(c4, y), abs=1e-14)


def test_grad_hand_values(p3, k3):
    grad = dyn.lyapunov_grad(p3, [0.5, 0.0, 0.5])
    assert grad[1] == pytest.approx(1.0, abs=1e-14)
    grad = dyn.lyapunov_grad(k3, np.full(3, 1 / 3))
    assert np.abs(grad).max() < 1e-14


def test_field_is_coordinate_times_grad(corpus):
    rng = np.random.default_rng(1)
    for g in corpus.values():
        pts = sample_domain_points(g, 1000, rng)
        f = dyn.vector_field(g, pts)
        prod = pts * dyn.lyapunov_grad(g, pts)
        assert np.abs(f - prod).max() <= 1e-12


def test_grad_matches_finite_differences(corpus):
    rng = np.random.default_rng(2)
    h = 1e-6
    for name in ["k3", "c4", "star4", "rand3"]:
        g = corpus[name]
        for x in sample_domain_points(g, 25, rng, min_coord=0.01):
            grad = dyn.lyapunov_grad(g, x)
            for i in range(g.m):
                e = np.zeros(g.m)
                e[i] = h
                fd = (dyn.lyapunov(g, x + e) - dyn.lyapunov(g, x - e)) / (2 * h)
                assert abs(fd - grad[i]) <= 1e-6


def test_uniqueness_lyapunov_values(k3):
    w = np.full(3, 1 / 3)
    assert dyn.uniqueness_lyapunov(k3, w, w) == pytest.approx(np.log(1 / 3))
    with pytest.raises(DomainError):
        dyn.uniqueness_lyapunov(k3, w, np.array([0.5, 0.5, 0.0]))


def test_uniqueness_lyapunov_monotone_along_flow(k3):
    # dH/dt = f(v)/N - 1 >= 0; check H non-decreasing along an RK4 orbit
    rng = np.random.default_rng(3)
    w = np.full(3, 1 / 3)
    x = sample_domain_points(k3, 1, rng, min_coord=0.05)[0]
    h_prev = dyn.uniqueness_lyapunov(k3, w, x)
    for _ in range(200):
        x = dyn.flow(k3, x, t=0.25, dt=1e-2).endpoint.coords
        h_now = dyn.uniqueness_lyapunov(k3, w, x)
        assert h_now >= h_prev - 1e-9
        h_prev = h_now


def test_pair_ratio_sum_values(k3):
    w = np.full(3, 1 / 3)
    assert dyn.pair_ratio_sum(k3, w, w) == pytest.approx(3.0, abs=1e-13)
    f = dyn.pair_ratio_sum(k3, w, np.array([0.5, 0.25, 0.25]))
    assert f == pytest.approx(28 / 9, abs=1e-13)


def test_pair_ratio_sum_lower_bound_sampling(corpus):
    rng = np.random.default_rng(4)
    from urnflow.equilibria import limit_object

    for name in ["k3", "p3", "c5", "star3", "rand7"]:
        g = corpus[name]
        w = limit_object(g).point.point
        samples = sample_domain_points(g, 10_000, rng)
        vals = dyn.pair_ratio_sum(g, w, samples)
        assert vals.min() >= g.n_edges - 1e-12


def test_jacobian_closed_form_k3(k3):
    J = dyn.jacobian(k3, np.full(3, 1 / 3))
    expected = -(np.eye(3) + np.ones((3, 3))) / 4
    assert np.abs(J - expected).max() <= 1e-14
    eigs = np.sort(np.linalg.eigvalsh((J + J.T) / 2))
    assert np.allclose(eigs, [-1, -0.25, -0.25], atol=1e-12)


def test_jacobian_sparsity(corpus):
    g = corpus["rand4"]
    rng = np.random.default_rng(5)
    x = sample_domain_points(g, 1, rng, min_coord=0.01)[0]
    J = dyn.jacobian(g, x)
    adj = {frozenset(e) for e in g.edges}
    for i in range(g.m):
        for j in range(g.m):
            if i != j and frozenset((i, j)) not in adj:
                assert J[i, j] == 0.0


def test_jacobian_matches_finite_differences(corpus):
    rng = np.random.default_rng(6)
    h = 1e-6
    for name in ["k3", "c4", "rand2"]:
        g = corpus[name]
        for x in sample_domain_points(g, 15, rng, min_coord=0.01):
            J = dyn.jacobian(g, x)
            for j in range(g.m):
                e = np.zeros(g.m)
                e[j] = h
                fd = (dyn.vector_field(g, x + e) - dyn.vector_field(g, x - e)) / (2 * h)
                assert np.abs(fd - J[:, j]).max() <= 1e-5


def test_jacobian_bipartite_matches_general(corpus):
    for name in ["c4", "c6", "k33", "k2"]:
        g = corpus[name]
        gc = classify_graph(g)
        total = 2.0 / g.m
        for p in np.linspace(0.0, total, 22):
            q = total - p
            Jb = dyn.jacobian_bipartite(g, p, q, gc)
            point = np.full(g.m, q)
            point[list(gc.bipartition[0])] = p
            J = dyn.jacobian(g, point)
            assert np.abs(J - Jb).max() <= 1e-12
            direction = np.where(np.isin(np.arange(g.m), gc.bipartition[0]), 1.0, -1.0)
            assert np.abs(Jb @ direction).max() <= 1e-12


def test_jacobian_bipartite_c4_spectra(c4):
    eigs = np.sort(np.linalg.eigvals(dyn.jacobian_bipartite(c4, 0.25, 0.25)).real)
    assert np.allclose(eigs, [-1, -0.5, -0.5, 0], atol=1e-12)
    eigs = np.sort(np.linalg.eigvals(dyn.jacobian_bipartite(c4, 0.0, 0.5)).real)
    assert np.allclose(eigs, [-1, -1, 0, 0], atol=1e-12)


def test_jacobian_bipartite_requires_regular_bipartite(k3):
    from urnflow.errors import NotRegularBipartite

    with pytest.raises(NotRegularBipartite):
        dyn.jacobian_bipartite(k3, 0.2, 0.2)


def test_flow_fixes_equilibria(k3, c4):
    res = dyn.flow(k3, np.full(3, 1 / 3), t=10.0)
    assert np.abs(res.endpoint.coords - 1 / 3).max() <= 1e-9
    res = dyn.flow(c4, [0.1, 0.4, 0.1, 0.4], t=10.0)
    assert np.abs(res.endpoint.coords - [0.1, 0.4, 0.1, 0.4]).max() <= 1e-9


def test_flow_k3_converges_to_uniform(k3):
    res = dyn.flow(k3, [0.5, 0.25, 0.25], t=50.0, dt=1e-2)
    assert np.abs(res.endpoint.coords - 1 / 3).sum() <= 1e-6
    assert res.min_step_dL >= -1e-9
    assert res.total_dL > 0


def test_flow_stays_in_domain(corpus):
    rng = np.random.default_rng(7)
    for name in ["k3", "c5", "rand6"]:
        g = corpus[name]
        x0 = sample_domain_points(g, 1, rng, min_coord=0.02)[0]
        res = dyn.flow(g, x0, t=30.0)
        assert res.max_violation <= 1e-9
        assert dyn.in_simplex(res.endpoint.coords, tol=1e-9)


def test_flow_lyapunov_monotone(corpus):
    rng = np.random.default_rng(8)
    for name in ["p4", "star4", "rand9"]:
        g = corpus[name]
        x0 = sample_domain_points(g, 1, rng, min_coord=0.02)[0]
        res = dyn.flow(g, x0, t=30.0)
        assert res.min_step_dL >= -1e-9


def test_flow_rejects_bad_start(k3):
    with pytest.raises(DomainError):
        dyn.flow(k3, [0.7, 0.7, -0.4], t=1.0)


def test_shadowing_gap_self_consistency(k3):
    # a trajectory generated by the flow itself has gaps at integration error
    taus = np.linspace(0.0, 8.0, 801)
    points = np.zeros((len(taus), 3))
    x = np.array([0.5, 0.25, 0.25])
    points[0] = x
    for k in range(1, len(taus)):
        x = dyn.flow(k3, x, t=float(taus[k] - taus[k - 1]), dt=1e-3).endpoint.coords
        points[k] = x

    class Recorded:
        pass

    rec = Recorded()
    rec.tau = taus
    rec.points = points
    gaps = dyn.shadowing_gap(rec, k3, T=1.0)
    assert gaps and max(v for _, v in gaps) <= 1e-6
    assert all(v >= 0 for _, v in gaps)


def test_shadowing_gap_decreases_over_decades(k3):
    traj = sim.run(k3, [1, 1, 1], 100_000, seed=11, sample_stride=1)
    gaps = dyn.shadowing_gap(traj, k3, T=5.0)
    ts = np.array([t for t, _ in gaps])
    gs = np.array([v for _, v in gaps])
    n_of = np.searchsorted(traj.tau, ts)
    n_max = n_of.max()
    first = gs[n_of < n_max / 100]
    last = gs[n_of >= n_max / 10]
    assert first.size and last.size
    assert last.max() < first.max()


def test_shadowing_gap_rejects_sparse(k3):
    traj = sim.run(k3, [1, 1, 1], 10_000, seed=1, sample_stride=2000)
    with pytest.raises(SparseTrajectory):
        dyn.shadowing_gap(traj, k3, T=1.0)


def test_gaps_csv_format(k3):
    from urnflow.jsonio import gaps_csv

    traj = sim.run(k3, [1, 1, 1], 20_000, seed=4, sample_stride=1)
    gaps = dyn.shadowing_gap(traj, k3, T=5.0)
    lines = gaps_csv(gaps).splitlines()
    assert lines[0] == "t,gap"
    t, gap = lines[1].split(",")
    assert float(t) >= 0 and float(gap) >= 0


def test_domain_constant(k3):
    c = dyn.domain_constant(k3, np.full(3, 1 / 3))
    assert c == pytest.approx(min(1 / 6, 1 / 3))
    g2 = parse_graph("1 2")
    assert dyn.domain_constant(g2, [0.9, 0.1]) == pytest.approx(0.5)
