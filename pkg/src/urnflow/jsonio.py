"""Deterministic JSON and CSV emission.

All floating-point output is printed with 17 significant digits, which
round-trips doubles exactly: parsing an emitted document and re-emitting
it is byte-identical.
"""

from __future__ import annotations

import numpy as np

from . import equilibria as eqmod
from . import simulate as simmod
from .graphs import Graph, GraphClass

__all__ = [
    "fmt_float",
    "dumps",
    "trajectory_csv",
    "gaps_csv",
    "classification_dict",
    "segment_dict",
    "interval_dict",
    "equilibrium_dict",
    "limit_dict",
    "ensemble_dict",
    "flow_dict",
]


def fmt_float(x: float) -> str:
    s = format(float(x), ".17g")
    # keep the token recognizable as a JSON number
    return s if any(ch in s for ch in ".eE") or s.lstrip("-").startswith("inf") else s + ".0"


def dumps(obj, indent: int = 2) -> str:
    """JSON text with .17g floats and insertion-ordered keys."""
    pieces: list[str] = []
    _emit(obj, pieces, indent, 0)
    return "".join(pieces)


def _emit(obj, out: list[str], indent: int, level: int) -> None:
    pad = " " * (indent * (level + 1))
    closing = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for k, (key, val) in enumerate(obj.items()):
            out.append(f'{pad}"{key}": ')
            _emit(val, out, indent, level + 1)
            out.append(",\n" if k < len(obj) - 1 else "\n")
        out.append(closing + "}")
    elif isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            out.append("[]")
            return
        scalars = all(not isinstance(v, (dict, list, tuple)) for v in obj)
        if scalars:
            out.append("[" + ", ".join(_scalar(v) for v in obj) + "]")
        else:
            out.append("[\n")
            for k, val in enumerate(obj):
                out.append(pad)
                _emit(val, out, indent, level + 1)
                out.append(",\n" if k < len(obj) - 1 else "\n")
            out.append(closing + "]")
    else:
        out.append(_scalar(obj))


def _scalar(v) -> str:
    if v is None:
        return "null"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    raise TypeError(f"cannot serialize {type(v)}")


# -- domain objects -> plain dicts ---------------------------------------------

def _vec(x) -> list[float]:
    return [float(v) for v in np.asarray(x).ravel()]


def _ids(indices) -> list[int]:
    """0-based internal vertex indices -> 1-based output ids."""
    return [int(i) + 1 for i in indices]


def classification_dict(g: Graph, gc: GraphClass) -> dict:
    out = {
        "m": g.m,
        "edges": g.n_edges,
        "bipartite": gc.bipartite,
        "balanced": gc.balanced,
        "regular": gc.regular,
        "r": gc.degree,
    }
    if gc.bipartition is not None:
        out["A"] = _ids(gc.bipartition[0])
        out["B"] = _ids(gc.bipartition[1])
    return out


def equilibrium_dict(e: eqmod.Equilibrium) -> dict:
    return {
        "point": _vec(e.point),
        "support": _ids(e.support),
        "residual": float(e.residual),
        "classification": e.classification,
        "sign_test": {str(i + 1): float(v) for i, v in sorted(e.sign_test.items())},
        "spectrum": _vec(e.spectrum),
    }


def segment_dict(seg: eqmod.OmegaSegment) -> dict:
    return {
        "p_plus_q": float(seg.p_plus_q),
        "A": _ids(seg.part_a),
        "B": _ids(seg.part_b),
        "endpoints": [_vec(seg.endpoints[0]), _vec(seg.endpoints[1])],
        "midpoint": _vec(seg.midpoint),
    }


def interval_dict(iv: eqmod.InteriorInterval) -> dict:
    return {
        "base": _vec(iv.base),
        "direction": _vec(iv.direction),
        "eta_range": [float(iv.eta_range[0]), float(iv.eta_range[1])],
        "A": _ids(iv.part_a),
        "B": _ids(iv.part_b),
    }


def limit_dict(limit: eqmod.LimitResult) -> dict:
    out: dict = {"kind": limit.kind}
    if limit.kind == "UniquePoint":
        out["payload"] = {
            "point": _vec(limit.point.point),
            "support": _ids(limit.point.support),
            "sign_test": {
                str(i + 1): float(v) for i, v in sorted(limit.point.sign_test.items())
            },
        }
    elif limit.kind == "OmegaSegment":
        out["payload"] = segment_dict(limit.segment)
    elif limit.kind == "InteriorInterval":
        out["payload"] = interval_dict(limit.interval)
    else:
        out["payload"] = {"points": [equilibrium_dict(e) for e in limit.points]}
    if limit.note:
        out["note"] = limit.note
    return out


def ensemble_dict(summary: simmod.EnsembleSummary) -> dict:
    out = {
        "graph": summary.graph,
        "runs": summary.runs,
        "steps": summary.steps,
        "seed": summary.master_seed,
        "limit": limit_dict(summary.limit),
        "final_points": [_vec(row) for row in summary.final_points],
        "distances": _vec(summary.distances),
        "stats": {
            "mean_distance": summary.mean_distance,
            "max_distance": summary.max_distance,
        },
    }
    if summary.omega_p is not None:
        edges = np.linspace(0.0, 2.0 / summary.final_points.shape[1], 21)
        counts, _ = np.histogram(summary.omega_p, bins=edges)
        out["omega_p"] = {
            "values": _vec(summary.omega_p),
            "histogram": {"bin_edges": _vec(edges), "counts": [int(c) for c in counts]},
        }
    if summary.max_decomposition_residual is not None:
        out["max_decomposition_residual"] = summary.max_decomposition_residual
    return out


def flow_dict(res) -> dict:
    return {
        "t": res.t,
        "point": _vec(res.endpoint.coords),
        "steps": res.steps,
        "max_violation": res.max_violation,
        "min_step_dL": res.min_step_dL,
        "total_dL": res.total_dL,
    }


def trajectory_csv(traj: simmod.Trajectory) -> str:
    m = traj.points.shape[1]
    lines = ["n,tau," + ",".join(f"x_{i + 1}" for i in range(m))]
    for k in range(len(traj.sample_steps)):
        row = [str(int(traj.sample_steps[k])), fmt_float(traj.tau[k])]
        row += [fmt_float(v) for v in traj.points[k]]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def gaps_csv(gaps: list[tuple[float, float]]) -> str:
    lines = ["t,gap"]
    lines += [f"{fmt_float(t)},{fmt_float(gap)}" for t, gap in gaps]
    return "\n".join(lines) + "\n"
