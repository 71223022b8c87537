"""Command-line front end.

    urnflow <classify|equilibria|limit|simulate|ode|verify> [flags]

Exit codes: 0 ok, 1 verification failure, 2 parse/validation error,
3 theory contradiction, 4 I/O failure, 5 domain error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import dynamics, equilibria, jsonio, simulate, verify
from .errors import (
    DegeneratePair,
    DegeneratePoint,
    DomainError,
    InconsistentClassification,
    InvalidInitial,
    LeftDomain,
    NotBalancedBipartite,
    NotRegularBipartite,
    ParseError,
    SparseTrajectory,
    TooLarge,
    UniquenessViolation,
    ValidationError,
)
from .graphs import classify_graph, parse_graph

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_PARSE = 2
EXIT_THEORY = 3
EXIT_IO = 4
EXIT_DOMAIN = 5

_PARSE_ERRORS = (ParseError, ValidationError)
_THEORY_ERRORS = (UniquenessViolation, InconsistentClassification)
_DOMAIN_ERRORS = (
    DegeneratePair,
    DegeneratePoint,
    DomainError,
    InvalidInitial,
    LeftDomain,
    NotBalancedBipartite,
    NotRegularBipartite,
    SparseTrajectory,
    TooLarge,
)


def _load_graph(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _IOFailure(str(exc)) from exc
    return parse_graph(text, name=Path(path).stem)


class _IOFailure(Exception):
    pass


def cmd_classify(args) -> int:
    g = _load_graph(args.graph)
    gc = classify_graph(g)
    print(jsonio.dumps(jsonio.classification_dict(g, gc)))
    return EXIT_OK


def _equilibria_payload(g):
    gc = classify_graph(g)
    eqs = equilibria.find_equilibria(g)
    payload = {"graph": g.name, "equilibria": [jsonio.equilibrium_dict(e) for e in eqs]}
    if gc.bipartite and gc.balanced:
        interval = equilibria.interior_interval(g, gc)
        payload["interior_interval"] = (
            jsonio.interval_dict(interval) if interval is not None else None
        )
    return payload, eqs


def cmd_equilibria(args) -> int:
    g = _load_graph(args.graph)
    try:
        payload, eqs = _equilibria_payload(g)
    except _THEORY_ERRORS as exc:
        print(jsonio.dumps({"error": type(exc).__name__, "detail": str(exc)}))
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_THEORY
    if args.table:
        print(f"{'support':<18} {'classification':<14} {'residual':<10} point")
        for e in eqs:
            support = ",".join(str(i + 1) for i in e.support)
            coords = " ".join(f"{v:.6f}" for v in e.point)
            print(f"{support:<18} {e.classification:<14} {e.residual:<10.2e} {coords}")
        if payload.get("interior_interval"):
            iv = payload["interior_interval"]
            print(
                f"interior interval: eta in ({iv['eta_range'][0]:.6f}, "
                f"{iv['eta_range'][1]:.6f}) around the full-support point"
            )
    else:
        print(jsonio.dumps(payload))
    return EXIT_OK


def cmd_limit(args) -> int:
    g = _load_graph(args.graph)
    limit = equilibria.limit_object(g)
    print(jsonio.dumps(jsonio.limit_dict(limit)))
    return EXIT_OK


def _parse_point(text: str, m: int) -> np.ndarray:
    parts = text.replace(",", " ").split()
    if len(parts) != m:
        raise DomainError(f"expected {m} coordinates, got {len(parts)}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError:
        raise DomainError(f"cannot parse point {text!r}") from None


def cmd_ode(args) -> int:
    g = _load_graph(args.graph)
    x0 = _parse_point(args.x0, g.m) if args.x0 else np.full(g.m, 1.0 / g.m)
    res = dynamics.flow(g, x0, t=args.t, dt=args.dt)
    print(jsonio.dumps(jsonio.flow_dict(res)))
    return EXIT_OK


def _load_config(args) -> dict:
    cfg = {
        "steps": 100_000,
        "runs": 100,
        "seed": 0,
        "stride": None,
        "initial": None,
        "out": "urnflow_out",
        "trajectories": True,
        "tolerances": {},
    }
    if args.config:
        try:
            cfg.update(json.loads(Path(args.config).read_text(encoding="utf-8")))
        except OSError as exc:
            raise _IOFailure(str(exc)) from exc
    for key in ("steps", "runs", "seed", "stride", "out"):
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    if getattr(args, "initial", None):
        cfg["initial"] = [int(v) for v in args.initial.replace(",", " ").split()]
    if getattr(args, "no_trajectories", False):
        cfg["trajectories"] = False
    if cfg["steps"] < 0 or cfg["runs"] < 1:
        raise DomainError("need steps >= 0 and runs >= 1")
    return cfg


def cmd_simulate(args) -> int:
    g = _load_graph(args.graph)
    cfg = _load_config(args)
    initial = cfg["initial"] or [1] * g.m
    summary = simulate.monte_carlo(
        g,
        initial,
        steps=cfg["steps"],
        runs=cfg["runs"],
        master_seed=cfg["seed"],
        sample_stride=cfg["stride"],
        keep_trajectories=cfg["trajectories"],
    )
    out_dir = Path(cfg["out"])
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if summary.trajectories is not None:
            for k, traj in enumerate(summary.trajectories):
                path = out_dir / f"{g.name or 'run'}_run{k:04d}.csv"
                path.write_text(jsonio.trajectory_csv(traj), encoding="utf-8")
        ensemble_path = out_dir / f"{g.name or 'ensemble'}_ensemble.json"
        ensemble_path.write_text(jsonio.dumps(jsonio.ensemble_dict(summary)) + "\n",
                                 encoding="utf-8")
    except OSError as exc:
        raise _IOFailure(str(exc)) from exc
    print(f"wrote {ensemble_path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    g = _load_graph(args.graph)
    overrides = {}
    if args.config:
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise _IOFailure(str(exc)) from exc
        overrides.update(
            {k: float(v) for k, v in cfg.get("tolerances", {}).items()}
        )
    for item in args.tol or []:
        key, _, value = item.partition("=")
        if not value:
            raise DomainError(f"bad --tol entry {item!r}; expected name=value")
        overrides[key] = float(value)
    try:
        tolerances = verify.Tolerances().with_overrides(overrides)
    except KeyError as exc:
        raise DomainError(str(exc)) from None
    report = verify.run_verification(g, level=args.level, tolerances=tolerances)
    doc = {
        "graph": report.graph,
        "level": report.level,
        "checks": [
            {
                "name": c.name,
                "status": "pass" if c.passed else "fail",
                "value": c.value,
                "threshold": c.threshold,
                "op": c.op,
            }
            for c in report.checks
        ],
        "overall": "pass" if report.passed else "fail",
    }
    print(jsonio.dumps(doc))
    return EXIT_OK if report.passed else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="urnflow",
        description="Simulate and analyze the reinforced ball process on a graph.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="structural classification as JSON")
    p.add_argument("graph")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("equilibria", help="enumerate and classify equilibria")
    p.add_argument("graph")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="table", action="store_false", default=False)
    fmt.add_argument("--table", dest="table", action="store_true")
    p.set_defaults(func=cmd_equilibria)

    p = sub.add_parser("limit", help="predicted limit object as JSON")
    p.add_argument("graph")
    p.set_defaults(func=cmd_limit)

    p = sub.add_parser("simulate", help="seeded ensemble simulation")
    p.add_argument("graph")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--stride", type=int, default=None)
    p.add_argument("--initial", type=str, default=None,
                   help="per-vertex initial counts, e.g. '1,1,2'")
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--no-trajectories", action="store_true")
    p.add_argument("--config", type=str, default=None, help="JSON config file")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("ode", help="integrate the mean-field flow")
    p.add_argument("graph")
    p.add_argument("--x0", type=str, default=None,
                   help="starting point, e.g. '0.5,0.25,0.25' (default uniform)")
    p.add_argument("--t", type=float, default=50.0)
    p.add_argument("--dt", type=float, default=1e-2)
    p.set_defaults(func=cmd_ode)

    p = sub.add_parser("verify", help="run the bundled verification suite")
    p.add_argument("graph")
    p.add_argument("--level", choices=["quick", "full"], default="quick")
    p.add_argument("--tol", action="append", default=None,
                   help="tolerance override name=value (repeatable)")
    p.add_argument("--config", type=str, default=None,
                   help='JSON config file; reads the "tolerances" object')
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _PARSE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except _THEORY_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_THEORY
    except _IOFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except _DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
