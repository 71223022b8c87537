import numpy as np
import pytest

import urnflow.equilibria as eq
from urnflow.dynamics import jacobian, lyapunov_grad, vector_field
from urnflow.errors import (
    NotBalancedBipartite,
    NotRegularBipartite,
    TooLarge,
    UniquenessViolation,
)
from urnflow.graphs import make_graph


def _supports(faces):
    return {tuple(s) for s in faces}


def test_enumerate_faces_k3(k3):
    assert _supports(eq.enumerate_faces(k3)) == {(0, 1, 2), (0, 1), (0, 2), (1, 2)}


def test_enumerate_faces_k2(k2):
    assert _supports(eq.enumerate_faces(k2)) == {(0, 1), (0,), (1,)}


def test_enumerate_faces_p3(p3):
    assert _supports(eq.enumerate_faces(p3)) == {
        (0, 1, 2), (0, 1), (1, 2), (0, 2), (1,),
    }


def test_enumerate_faces_complements_are_independent(corpus):
    for g in corpus.values():
        adj = {frozenset(e) for e in g.edges}
        for S in eq.enumerate_faces(g):
            z = set(range(g.m)) - set(S)
            assert all(frozenset((a, b)) not in adj for a in z for b in z if a < b)


def test_enumerate_faces_ordering(k3):
    faces = eq.enumerate_faces(k3)
    assert faces[0] == (0, 1, 2)
    assert faces == sorted(faces, key=lambda s: (-len(s), s))


def test_enumerate_faces_bound():
    edges = [(i, i + 1) for i in range(25)]
    g = make_graph(26, edges)
    with pytest.raises(TooLarge):
        eq.enumerate_faces(g)


def test_face_critical_point_k3(k3):
    v = eq.face_critical_point(k3, (0, 1, 2))
    assert np.allclose(v, 1 / 3, atol=1e-12)
    v = eq.face_critical_point(k3, (0, 1))
    assert np.allclose(v, [0.5, 0.5, 0.0], atol=1e-12)


def test_face_critical_point_p3_single(p3):
    v = eq.face_critical_point(p3, (1,))
    assert v.tolist() == [0.0, 1.0, 0.0]
    assert np.abs(vector_field(p3, v)).sum() <= 1e-15


def test_face_critical_point_boundary_exit(p3, corpus):
    # P3's full face has no critical point: stationarity needs 1/(v1+v2)=0
    assert eq.face_critical_point(p3, (0, 1, 2)) is None
    # star: mixed center+leaf faces exit too
    star = corpus["star3"]
    assert eq.face_critical_point(star, (0, 1, 2)) is None


def test_face_critical_point_degenerate_exit(corpus):
    # this face's maximizer is a segment endpoint with vanishing gradient,
    # the hard case for exit detection
    assert eq.face_critical_point(corpus["c6"], (0, 1, 2, 3, 4)) is None


def test_find_equilibria_k3(k3):
    eqs = eq.find_equilibria(k3)
    assert len(eqs) == 4
    stable = [e for e in eqs if not e.unstable]
    assert len(stable) == 1
    assert np.allclose(stable[0].point, 1 / 3, atol=1e-11)
    boundary = [e for e in eqs if e.unstable]
    for e in boundary:
        assert sorted(np.round(e.point, 10)) == [0.0, 0.5, 0.5]
        assert max(e.sign_test.values()) == pytest.approx(1 / 3, abs=1e-10)


def test_find_equilibria_p3(p3):
    eqs = {tuple(np.round(e.point, 8)): e for e in eq.find_equilibria(p3)}
    center = eqs[(0.0, 1.0, 0.0)]
    assert not center.unstable
    assert center.sign_test[0] == pytest.approx(-0.5, abs=1e-12)
    assert center.sign_test[2] == pytest.approx(-0.5, abs=1e-12)
    split = eqs[(0.5, 0.0, 0.5)]
    assert split.unstable
    assert split.sign_test[1] == pytest.approx(1.0, abs=1e-12)


def test_find_equilibria_star(corpus):
    star = corpus["star3"]
    eqs = eq.find_equilibria(star)
    stable = [e for e in eqs if not e.unstable]
    assert len(stable) == 1
    assert np.allclose(stable[0].point, [1, 0, 0, 0], atol=1e-12)
    assert all(
        v == pytest.approx(-2 / 3, abs=1e-12) for v in stable[0].sign_test.values()
    )


def test_find_equilibria_p4_set(corpus):
    pts = sorted(
        tuple(np.round(e.point, 8)) for e in eq.find_equilibria(corpus["p4"])
    )
    third = round(1 / 3, 8)
    two_thirds = round(2 / 3, 8)
    assert pts == sorted(
        [
            (0.0, 0.5, 0.5, 0.0),
            (third, 0.0, two_thirds, 0.0),
            (0.0, two_thirds, 0.0, third),
        ]
    )


def test_residuals_verified_independently(corpus):
    for name in ["k3", "c5", "rand8"]:
        for e in eq.find_equilibria(corpus[name]):
            assert np.abs(vector_field(corpus[name], e.point)).sum() <= 1e-10
            assert e.residual <= 1e-10


def test_interior_equilibria_are_non_unstable(corpus):
    for g in corpus.values():
        for e in eq.find_equilibria(g):
            if not e.zeros:
                assert not e.unstable
            grad = lyapunov_grad(g, e.point)
            for i in e.support:
                assert abs(grad[i]) <= 1e-8


def test_classify_requires_equilibrium(k3):
    from urnflow.errors import DomainError

    with pytest.raises(DomainError):
        eq.classify_equilibrium(k3, np.array([0.6, 0.3, 0.1]))


def test_jacobi_matches_numpy_on_random_symmetric():
    rng = np.random.default_rng(9)
    for n in [1, 2, 3, 5, 8, 12]:
        a = rng.standard_normal((n, n))
        a = (a + a.T) / 2
        mine = np.sort(eq.jacobi_eigenvalues(a))
        ref = np.sort(np.linalg.eigvalsh(a))
        assert np.abs(mine - ref).max() <= 1e-11


def test_spectrum_closed_forms(k3, c4):
    eigs = eq.spectrum(k3, np.full(3, 1 / 3))
    assert np.allclose(eigs, [-1, -0.25, -0.25], atol=1e-12)
    seg = eq.omega_segment(c4)
    eigs = eq.spectrum(c4, seg.midpoint)
    assert np.allclose(eigs, [-1, -0.5, -0.5, 0], atol=1e-12)


def test_spectrum_matches_full_jacobian_eigenvalues(corpus):
    for name in ["c5", "rand3", "star5", "p4"]:
        g = corpus[name]
        for e in eq.find_equilibria(g):
            ref = np.sort(np.linalg.eigvals(jacobian(g, e.point)).real)
            assert np.abs(np.array(e.spectrum) - ref).max() <= 1e-9


def test_spectrum_all_real(corpus):
    for e in eq.find_equilibria(corpus["rand10"]):
        assert all(isinstance(v, float) for v in e.spectrum)


def test_spectrum_rejects_degenerate_support(k3):
    from urnflow.errors import DegeneratePoint

    v = np.array([0.5, 0.5 - 1e-15, 1e-15])
    with pytest.raises(DegeneratePoint):
        eq.spectrum(k3, v, support=(0, 1, 2))


def test_omega_segment_c4(c4):
    seg = eq.omega_segment(c4)
    assert seg.p_plus_q == pytest.approx(0.5)
    assert seg.part_a == (0, 2) and seg.part_b == (1, 3)
    lo, hi = seg.endpoints
    assert np.allclose(lo, [0, 0.5, 0, 0.5]) and np.allclose(hi, [0.5, 0, 0.5, 0])
    assert np.allclose(seg.midpoint, 0.25)
    for p in np.linspace(0.01, 0.49, 25):
        assert np.abs(vector_field(c4, seg.point(p))).sum() <= 1e-12


def test_omega_segment_k2(k2):
    seg = eq.omega_segment(k2)
    assert seg.p_plus_q == pytest.approx(1.0)
    assert np.allclose(seg.point(0.3), [0.3, 0.7])


def test_omega_segment_requires_regular_bipartite(k3):
    with pytest.raises(NotRegularBipartite):
        eq.omega_segment(k3)


def test_project_to_omega(c4):
    seg = eq.omega_segment(c4)
    for p in [0.0, 0.1, 0.25, 0.5]:
        _, d = eq.project_to_omega(c4, seg.point(p))
        assert d <= 1e-15
    delta = 0.03
    x = np.array([0.25 + delta, 0.25, 0.25 - delta, 0.25])
    nearest, d = eq.project_to_omega(c4, x)
    assert d <= 2 * delta + 1e-15
    # swapping the parts with p <-> q relabeling preserves the distance
    swapped = np.array([x[1], x[0], x[3], x[2]])
    _, d2 = eq.project_to_omega(c4, swapped)
    assert d2 == pytest.approx(d, abs=1e-14)


def test_interior_interval_c4(c4):
    iv = eq.interior_interval(c4)
    assert np.allclose(iv.base, 0.25, atol=1e-12)
    assert iv.eta_range[0] == pytest.approx(-0.25, abs=1e-12)
    assert iv.eta_range[1] == pytest.approx(0.25, abs=1e-12)
    for eta in np.linspace(-0.24, 0.24, 50):
        assert np.abs(vector_field(c4, iv.point(eta))).sum() <= 1e-10


def test_interior_interval_k2(k2):
    iv = eq.interior_interval(k2)
    assert np.allclose(iv.base, 0.5, atol=1e-12)
    assert iv.eta_range == (pytest.approx(-0.5), pytest.approx(0.5))


def test_interior_interval_empty_for_p4(corpus):
    assert eq.interior_interval(corpus["p4"]) is None


def test_interior_interval_requires_balanced(k3, p3):
    with pytest.raises(NotBalancedBipartite):
        eq.interior_interval(k3)
    with pytest.raises(NotBalancedBipartite):
        eq.interior_interval(p3)


def test_limit_object_dispatch(corpus):
    lim = eq.limit_object(corpus["k3"])
    assert lim.kind == "UniquePoint"
    assert np.allclose(lim.point.point, 1 / 3, atol=1e-11)

    lim = eq.limit_object(corpus["star3"])
    assert lim.kind == "UniquePoint"
    assert np.allclose(lim.point.point, [1, 0, 0, 0], atol=1e-11)

    lim = eq.limit_object(corpus["c5"])
    assert lim.kind == "UniquePoint"
    assert np.allclose(lim.point.point, 0.2, atol=1e-11)

    lim = eq.limit_object(corpus["c4"])
    assert lim.kind == "OmegaSegment"
    assert lim.segment.p_plus_q == pytest.approx(0.5)

    lim = eq.limit_object(corpus["p4"])
    assert lim.kind == "FiniteSet"
    assert len(lim.points) == 1
    assert np.allclose(lim.points[0].point, [0, 0.5, 0.5, 0], atol=1e-11)
    assert lim.note

    lim = eq.limit_object(corpus["rand1"])
    assert lim.kind == "InteriorInterval"


def test_limit_object_uniqueness_violation(k3, monkeypatch):
    fake = eq.find_equilibria(k3)
    doubled = [e for e in fake if not e.unstable] * 2
    monkeypatch.setattr(eq, "find_equilibria", lambda g: doubled)
    with pytest.raises(UniquenessViolation):
        eq.limit_object(k3)


def test_distance_to_limit(corpus):
    k3 = corpus["k3"]
    lim = eq.limit_object(k3)
    assert eq.distance_to_limit(lim, k3, np.full(3, 1 / 3)) <= 1e-11
    assert eq.distance_to_limit(lim, k3, [0.5, 0.25, 0.25]) == pytest.approx(1 / 3, abs=1e-9)

    c4 = corpus["c4"]
    lim = eq.limit_object(c4)
    seg = lim.segment
    assert eq.distance_to_limit(lim, c4, seg.point(0.12)) <= 1e-12

    rand1 = corpus["rand1"]
    lim = eq.limit_object(rand1)
    iv = lim.interval
    inner = iv.point(0.8 * iv.eta_range[1])
    assert eq.distance_to_limit(lim, rand1, inner) <= 1e-10


def test_grid_oracle_m3(corpus):
    # brute-force residual scan over the 2-simplex grid, both directions
    for name in ["k3", "p3"]:
        g = corpus[name]
        pts = []
        for i in range(201):
            for j in range(201 - i):
                pts.append((i / 200, j / 200, (200 - i - j) / 200))
        pts = np.array(pts)
        ei = np.array([e[0] for e in g.edges])
        ej = np.array([e[1] for e in g.edges])
        ok = (pts[:, ei] + pts[:, ej]).min(axis=1) > 0
        pts = pts[ok]
        residuals = np.abs(vector_field(g, pts)).sum(axis=1)
        found = np.stack([e.point for e in eq.find_equilibria(g)])
        # low-residual grid points lie near some returned equilibrium
        near = pts[residuals <= 1e-3]
        for x in near:
            assert np.abs(found - x).sum(axis=1).min() <= 0.02
        # every returned equilibrium lies near a grid-local residual minimum
        for e in found:
            close = np.abs(pts - e).sum(axis=1) <= 0.02
            assert residuals[close].min() <= 2e-3
