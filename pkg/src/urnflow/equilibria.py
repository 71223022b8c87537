"""Stationary points of the mean-field dynamics and limit prediction.

Stationary points are enumerated face by face: a support set S is
admissible when its complement Z is independent in the graph (an edge
inside Z would force a vanishing pair sum), and on each admissible face
the stationary points are exactly the critical points of the energy L
restricted to that face.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import dynamics
from .dynamics import lyapunov_grad, vector_field
from .errors import (
    DegeneratePoint,
    DomainError,
    InconsistentClassification,
    NoConvergence,
    NotBalancedBipartite,
    NotRegularBipartite,
    TooLarge,
    UniquenessViolation,
)
from .graphs import Graph, GraphClass, classify_graph

__all__ = [
    "Equilibrium",
    "OmegaSegment",
    "InteriorInterval",
    "LimitResult",
    "enumerate_faces",
    "face_critical_point",
    "find_equilibria",
    "classify_equilibrium",
    "spectrum",
    "jacobi_eigenvalues",
    "omega_segment",
    "interior_interval",
    "limit_object",
    "project_to_omega",
    "distance_to_limit",
]

FACE_ENUMERATION_BOUND = 24
RESIDUAL_TOL = 1e-10
SEGMENT_RESIDUAL_TOL = 1e-12
CLASS_EPS = 1e-8          # sign-test threshold for instability
ZERO_EIG_TOL = 1e-9
DEDUP_TOL = 1e-8
SUPPORT_TOL = 1e-12


@dataclass(frozen=True)
class Equilibrium:
    """A verified stationary point with its stability classification."""

    point: np.ndarray
    support: tuple[int, ...]
    zeros: tuple[int, ...]
    residual: float
    classification: str                 # "unstable" | "non-unstable"
    sign_test: dict[int, float]         # zero coordinate -> dL/dv_i there
    spectrum: tuple[float, ...]

    @property
    def unstable(self) -> bool:
        return self.classification == "unstable"


@dataclass(frozen=True)
class OmegaSegment:
    """Two-valued stationary segment of a regular bipartite graph:
    value p on part A and q = p_plus_q - p on part B, p in [0, p_plus_q]."""

    m: int
    p_plus_q: float
    part_a: tuple[int, ...]
    part_b: tuple[int, ...]

    def point(self, p: float) -> np.ndarray:
        if p < -1e-15 or p > self.p_plus_q + 1e-15:
            raise DomainError(f"p={p} outside [0, {self.p_plus_q}]")
        x = np.full(self.m, self.p_plus_q - p)
        x[list(self.part_a)] = p
        return x

    @property
    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        return self.point(0.0), self.point(self.p_plus_q)

    @property
    def midpoint(self) -> np.ndarray:
        return self.point(self.p_plus_q / 2.0)


@dataclass(frozen=True)
class InteriorInterval:
    """One-parameter family of interior stationary points of a balanced
    bipartite graph: base shifted by +eta on part A and -eta on part B."""

    base: np.ndarray
    part_a: tuple[int, ...]
    part_b: tuple[int, ...]
    eta_range: tuple[float, float]      # open interval around eta = 0

    @property
    def direction(self) -> np.ndarray:
        d = np.full(self.base.shape, -1.0)
        d[list(self.part_a)] = 1.0
        return d

    def point(self, eta: float) -> np.ndarray:
        lo, hi = self.eta_range
        if eta <= lo or eta >= hi:
            raise DomainError(f"eta={eta} outside open interval ({lo}, {hi})")
        return self.base + eta * self.direction


@dataclass(frozen=True)
class LimitResult:
    """Tagged prediction of the almost-sure limit object."""

    kind: str  # "UniquePoint" | "OmegaSegment" | "InteriorInterval" | "FiniteSet"
    point: Optional[Equilibrium] = None
    segment: Optional[OmegaSegment] = None
    interval: Optional[InteriorInterval] = None
    points: tuple[Equilibrium, ...] = field(default=())
    note: str = ""


# -- face enumeration ---------------------------------------------------------

def enumerate_faces(g: Graph, bound: int = FACE_ENUMERATION_BOUND) -> list[tuple[int, ...]]:
    """All admissible supports S, sorted by size descending then
    lexicographically. S is admissible when [m] \\ S is independent;
    the empty support is excluded, the full support included."""
    if g.m > bound:
        raise TooLarge(f"m={g.m} exceeds the enumeration bound {bound}")
    adj_mask = [0] * g.m
    for i, j in g.edges:
        adj_mask[i] |= 1 << j
        adj_mask[j] |= 1 << i
    independent = [0]
    for v in range(g.m):
        bit = 1 << v
        independent.extend([s | bit for s in independent if not (s & adj_mask[v])])
    full = (1 << g.m) - 1
    supports = []
    for z in independent:
        s = full ^ z
        if s == 0:
            continue
        supports.append(tuple(i for i in range(g.m) if s >> i & 1))
    supports.sort(key=lambda s: (-len(s), s))
    return supports


# -- face solver ---------------------------------------------------------------

def _face_grad_terms(g: Graph, v: np.ndarray, sel: np.ndarray) -> np.ndarray:
    """(1/N) sum over neighbours of 1/(v_i + v_j), for the selected vertices.

    Equals 1 + dL/dv_i; the face solver drives it to 1."""
    ei, ej, inc_i, inc_j = dynamics._edge_arrays(g)
    inv = 1.0 / (v[ei] + v[ej])
    return (inv @ (inc_i + inc_j))[sel] / g.n_edges


def face_critical_point(
    g: Graph,
    support,
    tol: float = 1e-12,
    max_iter: int = 100_000,
) -> Optional[np.ndarray]:
    """Critical point of L restricted to the face with the given support.

    Primary method: damped multiplicative fixed-point iteration from the
    face's uniform point. The update keeps coordinates positive and its
    fixed points on the unit-sum face are exactly the stationary points
    of the dynamics with support inside S. When the maximizing sequence
    exits to the face boundary the face has no critical point and None is
    returned. Exits where the vanishing coordinate's gradient also tends
    to zero make the multiplicative iteration crawl; a slow-progress
    window then hands over to projected gradient ascent, whose simplex
    projection can land exactly on the boundary and settle the question.
    """
    S = sorted(support)
    sel = np.array(S, dtype=np.intp)
    v = np.zeros(g.m)
    v[sel] = 1.0 / len(S)
    if len(S) == 1:
        return v

    status, v = _multiplicative_phase(g, v, sel, tol, min(30_000, max_iter))
    if status == "converged":
        return v
    if status == "boundary":
        return None

    # ascent stalls once energy gains drop below float resolution, i.e. at
    # coordinate scale ~1e-8 for a boundary-bound maximizer; 1e-6 separates
    # that cleanly from genuine interior critical points
    v = _projected_ascent(g, v, sel)
    if v[sel].min() < 1e-6:
        return None
    v = _newton_polish(g, v, sel, tol)
    if v is None:
        raise NoConvergence(
            f"face solver failed to resolve support {tuple(i + 1 for i in S)}"
        )
    return v


def _multiplicative_phase(
    g: Graph, v: np.ndarray, sel: np.ndarray, tol: float, iters: int, alpha: float = 0.5
) -> tuple[str, np.ndarray]:
    """Damped multiplicative updates; returns (status, point) with status
    'converged', 'boundary' (exit to a subface) or 'slow'."""
    v = v.copy()
    exit_streak = 0
    streak_best = np.inf
    window_resid = np.inf
    for it in range(iters):
        gvals = _face_grad_terms(g, v, sel)
        if not np.all(np.isfinite(gvals)):
            return "boundary", v
        resid = np.abs(gvals - 1.0).max()
        if resid <= tol:
            return "converged", v

        # strict boundary exit: a coordinate pinned below 1e-12 for 100
        # consecutive iterations while the residual has stopped improving
        if v[sel].min() < 1e-12:
            if resid < streak_best * (1.0 - 1e-6):
                streak_best = resid
                exit_streak = 0
            else:
                exit_streak += 1
                if exit_streak >= 100:
                    return "boundary", v
        else:
            exit_streak = 0
            streak_best = np.inf

        # less than a 4x residual drop per 500 iterations means the
        # iteration is crawling (healthy faces contract much faster)
        if it % 500 == 499:
            if resid > 0.25 * window_resid:
                return "slow", v
            window_resid = resid

        v[sel] *= (1.0 - alpha) + alpha * gvals
        np.clip(v, 0.0, None, out=v)
        v[sel] = np.maximum(v[sel], 1e-300)
        v[sel] /= v[sel].sum()
    return "slow", v


def _newton_polish(g: Graph, v: np.ndarray, sel: np.ndarray, tol: float,
                   iters: int = 50) -> Optional[np.ndarray]:
    """Finish an interior face solve with Newton steps on the stationarity
    system (gradient of L zero on the face, unit sum), solved through the
    bordered KKT matrix. Least squares keeps the step meaningful when the
    face hosts a neutral direction."""
    v = v.copy()
    k = len(sel)
    ones = np.ones(k)
    for _ in range(iters):
        grad = lyapunov_grad(g, v)[sel]
        if np.abs(grad).max() <= tol:
            return v
        H = _face_hessian(g, v, sel)
        kkt = np.zeros((k + 1, k + 1))
        kkt[:k, :k] = H
        kkt[:k, k] = ones
        kkt[k, :k] = ones
        rhs = np.concatenate([-grad, [0.0]])
        delta = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:k]
        step = 1.0
        neg = delta < 0.0
        if neg.any():
            step = min(1.0, 0.9 * float((v[sel][neg] / -delta[neg]).min()))
        if step < 1e-12:
            return None
        v[sel] = v[sel] + step * delta
        v[sel] /= v[sel].sum()
    return None


def _face_hessian(g: Graph, v: np.ndarray, sel: np.ndarray) -> np.ndarray:
    """Hessian of L restricted to the selected coordinates."""
    local = {int(i): a for a, i in enumerate(sel)}
    k = len(sel)
    H = np.zeros((k, k))
    for i, j in g.edges:
        val = -1.0 / (v[i] + v[j]) ** 2 / g.n_edges
        ii = local.get(i)
        jj = local.get(j)
        if ii is not None:
            H[ii, ii] += val
        if jj is not None:
            H[jj, jj] += val
        if ii is not None and jj is not None:
            H[ii, jj] += val
            H[jj, ii] += val
    return H


def _project_simplex(y: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the unit simplex (zeros allowed)."""
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    ks = np.arange(1, len(y) + 1)
    mask = u - css / ks > 0.0
    rho = ks[mask][-1]
    theta = css[rho - 1] / rho
    return np.maximum(y - theta, 0.0)


def _safe_energy(g: Graph, v: np.ndarray) -> float:
    ei, ej, _, _ = dynamics._edge_arrays(g)
    s = v[ei] + v[ej]
    with np.errstate(divide="ignore"):
        return float(-v.sum() + np.log(s).sum() / g.n_edges)


def _projected_ascent(
    g: Graph, v: np.ndarray, sel: np.ndarray, max_iter: int = 5000
) -> np.ndarray:
    """Projected gradient ascent on L over the closed face.

    The projection may zero coordinates exactly, which is what identifies
    maximizers on the face boundary. Stops when no step improves L."""
    v = v.copy()
    energy = _safe_energy(g, v)
    step = 1.0
    for _ in range(max_iter):
        grad = lyapunov_grad(g, v)[sel]
        d = grad - grad.mean()
        step = max(step * 2.0, 1.0)
        improved = False
        for _ in range(80):
            cand = v.copy()
            cand[sel] = _project_simplex(v[sel] + step * d)
            cand_energy = _safe_energy(g, cand)
            if cand_energy > energy + 1e-15:
                improved = True
                break
            step *= 0.5
        if not improved:
            return v
        v, energy = cand, cand_energy
    return v


# -- classification -----------------------------------------------------------

def _split_support(v: np.ndarray, support=None) -> tuple[np.ndarray, np.ndarray]:
    if support is None:
        pos = v > SUPPORT_TOL
    else:
        pos = np.zeros(v.shape, dtype=bool)
        pos[list(support)] = True
    P = np.nonzero(pos)[0]
    Z = np.nonzero(~pos)[0]
    return P, Z


def jacobi_eigenvalues(a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues of a small dense symmetric matrix by cyclic Jacobi
    rotations, iterated until the off-diagonal Frobenius norm is below tol."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if n <= 1:
        return a.reshape(-1).copy()
    skip_floor = tol / (4.0 * n * n)  # entries this small cannot lift off() above tol
    for _ in range(max_sweeps):
        hollow = a.copy()
        np.fill_diagonal(hollow, 0.0)
        if np.sqrt((hollow**2).sum()) <= tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip_floor:
                    continue
                diff = a[q, q] - a[p, p]
                if diff == 0.0:
                    t = 1.0
                else:
                    theta = diff / (2.0 * apq)
                    if abs(theta) > 1e150:
                        t = 0.5 / theta
                    else:
                        t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
    else:
        raise NoConvergence("Jacobi sweeps did not reach the off-diagonal tolerance")
    return np.diag(a).copy()


def spectrum(g: Graph, v, support=None) -> np.ndarray:
    """Eigenvalues (all real) of the Jacobian at a stationary point.

    With coordinates split into the zero set Z and the support P, the
    Jacobian is block triangular: its spectrum is the Z-diagonal of the
    energy gradient together with the eigenvalues of the P-block, which is
    self-adjoint under the weighting 1/v_i and is symmetrized by
    conjugation with diag(sqrt(v_i)) before running Jacobi rotations.
    """
    v = np.asarray(v, dtype=float)
    P, Z = _split_support(v, support)
    if P.size and v[P].min() < 1e-14:
        raise DegeneratePoint("support coordinate below 1e-14")
    grad = lyapunov_grad(g, v)
    a_eigs = grad[Z]
    if P.size:
        B = dynamics.jacobian(g, v)[np.ix_(P, P)]
        d = np.sqrt(v[P])
        sym = B * (d[None, :] / d[:, None])
        sym = 0.5 * (sym + sym.T)
        b_eigs = jacobi_eigenvalues(sym)
    else:
        b_eigs = np.empty(0)
    return np.sort(np.concatenate([a_eigs, b_eigs]))


def classify_equilibrium(
    g: Graph,
    v,
    support=None,
    eps: float = CLASS_EPS,
    residual_tol: float = RESIDUAL_TOL,
) -> tuple[str, dict[int, float], np.ndarray]:
    """Stability verdict for a stationary point.

    Primary test: some zero coordinate with a positive energy gradient
    means unstable. The spectrum is computed as a cross-check and must
    agree (a positive eigenvalue exactly when the sign test fires).
    """
    v = np.asarray(v, dtype=float)
    resid = float(np.abs(vector_field(g, v)).sum())
    if resid > residual_tol:
        raise DomainError(f"point is not an equilibrium: residual {resid:.3e}")
    P, Z = _split_support(v, support)
    grad = lyapunov_grad(g, v)
    sign_test = {int(i): float(grad[i]) for i in Z}
    unstable_sign = any(val > eps for val in sign_test.values())
    eigs = spectrum(g, v, support=tuple(P))
    unstable_spec = bool(eigs.size and eigs.max() > eps)
    if unstable_sign != unstable_spec:
        raise InconsistentClassification(
            f"sign test says {'unstable' if unstable_sign else 'non-unstable'} but "
            f"spectrum {np.round(eigs, 12).tolist()} disagrees"
        )
    verdict = "unstable" if unstable_sign else "non-unstable"
    return verdict, sign_test, eigs


def _as_equilibrium(g: Graph, v: np.ndarray, support) -> Equilibrium:
    resid = float(np.abs(vector_field(g, v)).sum())
    P, Z = _split_support(v, support)
    verdict, sign_test, eigs = classify_equilibrium(g, v, support=tuple(P))
    return Equilibrium(
        point=v,
        support=tuple(int(i) for i in P),
        zeros=tuple(int(i) for i in Z),
        residual=resid,
        classification=verdict,
        sign_test=sign_test,
        spectrum=tuple(float(e) for e in eigs),
    )


def find_equilibria(
    g: Graph,
    residual_tol: float = RESIDUAL_TOL,
    dedup_tol: float = DEDUP_TOL,
) -> list[Equilibrium]:
    """All stationary points in the domain, classified.

    Union of the face critical points over all admissible faces,
    deduplicated. Residuals are re-verified through the vector field,
    independently of the face solver's own convergence test. For a
    balanced bipartite graph whose interior holds a whole interval of
    stationary points, the full-support entry is the interval's
    representative base point.
    """
    found: list[Equilibrium] = []
    for S in enumerate_faces(g):
        v = face_critical_point(g, S)
        if v is None:
            continue
        resid = float(np.abs(vector_field(g, v)).sum())
        if resid > residual_tol:
            raise NoConvergence(
                f"face {tuple(i + 1 for i in S)} returned residual {resid:.3e}"
            )
        if any(np.abs(v - e.point).sum() < dedup_tol for e in found):
            continue
        found.append(_as_equilibrium(g, v, support=S))
    return found


# -- limit objects ------------------------------------------------------------

def omega_segment(g: Graph, gc: GraphClass | None = None) -> OmegaSegment:
    """The stationary segment of a regular bipartite graph: p on part A,
    q on part B with p + q = 2/m."""
    gc = gc or classify_graph(g)
    if not (gc.bipartite and gc.regular):
        raise NotRegularBipartite("stationary segment needs a regular bipartite graph")
    seg = OmegaSegment(
        m=g.m,
        p_plus_q=2.0 / g.m,
        part_a=gc.bipartition[0],
        part_b=gc.bipartition[1],
    )
    for p in np.linspace(0.0, seg.p_plus_q, 23)[1:-1]:
        resid = float(np.abs(vector_field(g, seg.point(float(p)))).sum())
        if resid > SEGMENT_RESIDUAL_TOL:
            raise NoConvergence(f"segment point p={p} has residual {resid:.3e}")
    return seg


def interior_interval(
    g: Graph, gc: GraphClass | None = None, n_check: int = 50
) -> Optional[InteriorInterval]:
    """Interval of interior stationary points of a balanced bipartite
    graph, or None when the interior holds no stationary point.

    The interior stationary set of a balanced bipartite graph is either
    empty or the full interval obtained by shifting one stationary point
    by +eta on part A and -eta on part B.
    """
    gc = gc or classify_graph(g)
    if not (gc.bipartite and gc.balanced):
        raise NotBalancedBipartite("interior interval needs a balanced bipartite graph")
    base = face_critical_point(g, tuple(range(g.m)))
    if base is None:
        return None
    part_a, part_b = gc.bipartition
    lo = -float(base[list(part_a)].min())
    hi = float(base[list(part_b)].min())
    interval = InteriorInterval(
        base=base, part_a=part_a, part_b=part_b, eta_range=(lo, hi)
    )
    for eta in np.linspace(lo, hi, n_check + 2)[1:-1]:
        resid = float(np.abs(vector_field(g, interval.point(float(eta)))).sum())
        if resid > RESIDUAL_TOL:
            raise NoConvergence(f"interval point eta={eta} has residual {resid:.3e}")
    return interval


CONJECTURE_NOTE = (
    "no convergence guarantee for non-regular balanced-bipartite graphs; "
    "reporting the stationary structure only"
)


def limit_object(g: Graph, gc: GraphClass | None = None) -> LimitResult:
    """Predict the almost-sure limit object for the ball process on g.

    Not balanced-bipartite graphs converge to the unique non-unstable
    stationary point; regular bipartite graphs to a random point of the
    two-valued segment. For the remaining class (balanced bipartite,
    non-regular) the stationary structure is reported without a
    convergence guarantee.
    """
    gc = gc or classify_graph(g)
    if not (gc.bipartite and gc.balanced):
        eqs = find_equilibria(g)
        stable = [e for e in eqs if not e.unstable]
        if len(stable) != 1:
            raise UniquenessViolation(
                f"expected exactly one non-unstable equilibrium, found {len(stable)}: "
                + "; ".join(str(np.round(e.point, 6).tolist()) for e in stable)
            )
        return LimitResult(kind="UniquePoint", point=stable[0])
    if gc.regular:
        return LimitResult(kind="OmegaSegment", segment=omega_segment(g, gc))
    interval = interior_interval(g, gc)
    if interval is not None:
        return LimitResult(kind="InteriorInterval", interval=interval, note=CONJECTURE_NOTE)
    eqs = find_equilibria(g)
    stable = tuple(e for e in eqs if not e.unstable)
    return LimitResult(kind="FiniteSet", points=stable, note=CONJECTURE_NOTE)


def project_to_omega(g: Graph, x, gc: GraphClass | None = None) -> tuple[np.ndarray, float]:
    """Nearest point (in L1) of the stationary segment, with the distance.

    The L1 distance to the parametrized segment is piecewise linear in p,
    so the minimizer is a clipped median of per-vertex candidates.
    """
    gc = gc or classify_graph(g)
    if not (gc.bipartite and gc.regular):
        raise NotRegularBipartite("projection needs a regular bipartite graph")
    x = np.asarray(x, dtype=float)
    total = 2.0 / g.m
    cand = x.copy()
    cand[list(gc.bipartition[1])] = total - x[list(gc.bipartition[1])]
    p = float(np.clip(np.median(cand), 0.0, total))
    seg = OmegaSegment(
        m=g.m, p_plus_q=total, part_a=gc.bipartition[0], part_b=gc.bipartition[1]
    )
    nearest = seg.point(p)
    return nearest, float(np.abs(x - nearest).sum())


def distance_to_limit(limit: LimitResult, g: Graph, x) -> float:
    """L1 distance from x to the predicted limit object."""
    x = np.asarray(x, dtype=float)
    if limit.kind == "UniquePoint":
        return float(np.abs(x - limit.point.point).sum())
    if limit.kind == "OmegaSegment":
        seg = limit.segment
        cand = x.copy()
        cand[list(seg.part_b)] = seg.p_plus_q - x[list(seg.part_b)]
        p = float(np.clip(np.median(cand), 0.0, seg.p_plus_q))
        return float(np.abs(x - seg.point(p)).sum())
    if limit.kind == "InteriorInterval":
        iv = limit.interval
        c = (x - iv.base) * iv.direction
        eta = float(np.clip(np.median(c), iv.eta_range[0], iv.eta_range[1]))
        return float(np.abs(x - (iv.base + eta * iv.direction)).sum())
    if limit.kind == "FiniteSet":
        return min(float(np.abs(x - e.point).sum()) for e in limit.points)
    raise ValueError(f"unknown limit kind {limit.kind!r}")
