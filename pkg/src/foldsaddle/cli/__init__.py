"""Command-line interface.

Subcommands print JSON to stdout. Exit codes: 0 success, 1 a verification
check failed, 2 bad usage or parameters outside the admissible domain.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import shlex
import sys
from pathlib import Path

import numpy as np

from .. import bifurcation as bif
from ..family import ParameterError, TauKind, key_points, make_system
from ..sigma import pseudo_equilibria, region_intervals
from ..structures import find_canard_cycles, find_sigma_graph
from .emit import PortraitStyle, emit_portrait, emit_sphere, emit_tables
from .verify import format_result, run_checks

__all__ = ["main", "run", "build_parser", "read_config"]

log = logging.getLogger("foldsaddle")


def read_config(path) -> list[str]:
    """Turn ``key = value`` lines into ``--key value`` arguments.

    Blank lines and ``#`` comments are skipped; keys may use ``_`` or ``-``.
    """
    args: list[str] = []
    for n, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        args.append("--" + key.replace("_", "-"))
        args.extend(shlex.split(value))
    return args


def _pair(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}") from exc
    return lo, hi


def _res(text: str) -> tuple[int, int]:
    parts = [int(v) for v in text.replace("x", ",").split(",")]
    return (parts[0], parts[0]) if len(parts) == 1 else (parts[0], parts[1])


def _params(p: argparse.ArgumentParser, *, lam: bool = True, beta: bool = True) -> None:
    p.add_argument("--tau", choices=["inv", "vis"], default="inv")
    if lam:
        p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    if beta:
        p.add_argument("--beta", type=float, required=True)
    p.add_argument("--epsilon0", type=float, default=None,
                   help="lower bound offset for alpha (default: min(-1, alpha - 1))")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="foldsaddle", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="file of 'key = value' lines; command-line flags win")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="case label and class of one parameter point")
    _params(p)

    p = sub.add_parser("portrait", help="write an SVG phase portrait")
    _params(p)
    p.add_argument("--out", required=True)
    p.add_argument("--fan", type=int, default=13)

    p = sub.add_parser("diagram", help="classify a (lambda, beta) grid")
    _params(p, lam=False, beta=False)
    p.add_argument("--lambda-range", type=_pair, default=(-0.99, 0.99))
    p.add_argument("--beta-range", type=_pair, default=(-0.85, 0.85))
    p.add_argument("--resolution", type=_res, default=(200, 200))
    p.add_argument("--csv", required=True)
    p.add_argument("--json", required=True)

    p = sub.add_parser("boundaries", help="ordered boundary values in lambda")
    _params(p, lam=False)
    p.add_argument("--no-fold", action="store_true", help="skip the cycle-fold search")

    p = sub.add_parser("cycles", help="canard cycles and sigma-graph")
    _params(p)

    p = sub.add_parser("sphere", help="labels on a small sphere around the origin")
    p.add_argument("--tau", choices=["inv", "vis"], default="inv")
    p.add_argument("--radius", type=float, default=0.05)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--csv", required=True)

    p = sub.add_parser("verify", help="run the self-check suite")
    p.add_argument("--only", choices=["acceptance", "invariants"], default=None)
    return parser


def _epsilon0(ns) -> float:
    return ns.epsilon0 if ns.epsilon0 is not None else min(-1.0, ns.alpha - 1.0)


def _system(ns):
    return make_system(ns.tau, ns.lam, ns.alpha, ns.beta, epsilon0=_epsilon0(ns))


def _num(v):
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return None
    return float(v)


def _cmd_classify(ns) -> dict:
    s = _system(ns)
    label = bif.classify_case(ns.tau, ns.lam, ns.alpha, ns.beta, epsilon0=_epsilon0(ns))
    return {
        "tau": ns.tau, "lambda": ns.lam, "alpha": ns.alpha, "beta": ns.beta,
        "regime": bif.regime_of(ns.tau, ns.alpha, ns.beta).name,
        "case": str(label),
        "class": str(bif.topological_class(label)),
        "points": {k: list(v) for k, v in key_points(s).as_dict().items()},
    }


def _cmd_portrait(ns) -> dict:
    s = _system(ns)
    path = emit_portrait(s, ns.out, PortraitStyle(fan=ns.fan))
    return {"svg": str(path)}


def _cmd_diagram(ns) -> dict:
    diagram = bif.sweep_grid(ns.tau, ns.alpha, ns.lambda_range, ns.beta_range, ns.resolution)
    csv_path, json_path = emit_tables(diagram, ns.csv, ns.json)
    return {"csv": str(csv_path), "json": str(json_path), "histogram": diagram.histogram()}


def _cmd_boundaries(ns) -> dict:
    bd = bif.boundaries(ns.tau, ns.alpha, ns.beta, with_fold=not ns.no_fold)
    slot = bif.fold_bracket(ns.tau, ns.alpha, ns.beta)
    return {
        "regime": bd.regime.name,
        "values": {k: _num(v) for k, v in bd.values},
        "fold_bracket": None if slot is None else dict(zip(("name", "lo", "hi"), slot)),
        "first_case": bd.first_index,
        "printed": {k: _num(v) for k, v in bd.printed.items()},
        "notes": list(bd.notes),
    }


def _cmd_cycles(ns) -> dict:
    s = _system(ns)
    cycles = [
        {"x": c.fixed_abscissa, "landing": c.landing, "kind": c.kind.value,
         "derivative": c.derivative, "stability": c.stability.value, "residual": c.residual}
        for c in find_canard_cycles(s)
    ]
    graph = find_sigma_graph(s)
    return {
        "cycles": cycles,
        "sigma_graph": None if graph is None else {
            "kind": graph.kind.value, "vertices": [name for name, _ in graph.vertices]},
        "pseudo_equilibria": [
            {"x": p.abscissa, "stability": p.stability.value, "region": p.region.value}
            for p in pseudo_equilibria(s)
        ],
        "regions": [[a, b, r.value] for a, b, r in region_intervals(s, -1.0, 1.0)],
    }


def _cmd_sphere(ns) -> dict:
    samples = bif.sweep_sphere(ns.tau, ns.radius, ns.samples)
    path = emit_sphere(samples, ns.csv)
    labels = sorted({str(s.label) for s in samples}, key=bif.CaseLabel.parse)
    return {"csv": str(path), "samples": len(samples), "labels": labels}


_COMMANDS = {
    "classify": _cmd_classify,
    "portrait": _cmd_portrait,
    "diagram": _cmd_diagram,
    "boundaries": _cmd_boundaries,
    "cycles": _cmd_cycles,
    "sphere": _cmd_sphere,
}


def _inject_config(argv: list[str]) -> list[str]:
    """Move ``--config`` contents right after the subcommand so that explicit
    flags, which come later, override them."""
    argv = list(argv)
    path = None
    for k, a in enumerate(argv):
        if a == "--config" and k + 1 < len(argv):
            path = argv[k + 1]
            del argv[k:k + 2]
            break
        if a.startswith("--config="):
            path = a.split("=", 1)[1]
            del argv[k]
            break
    if path is None:
        return argv
    extra = read_config(path)
    for k, a in enumerate(argv):
        if a in _COMMANDS or a == "verify":
            return argv[:k + 1] + extra + argv[k + 1:]
    return argv + extra


def run(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(_inject_config(argv))
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    except (OSError, ParameterError) as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.DEBUG if ns.verbose else logging.WARNING)
    np.random.seed(ns.seed)
    if ns.command == "verify":
        results = run_checks(ns.seed, invariants=ns.only != "acceptance",
                             acceptance=ns.only != "invariants")
        for r in results:
            print(format_result(r), file=sys.stderr)
        payload = {"passed": all(r.passed for r in results),
                   "checks": [{"key": r.key, "title": r.title, "passed": r.passed, "detail": r.detail}
                              for r in results]}
        json.dump(payload, out, indent=2)
        out.write("\n")
        return 0 if payload["passed"] else 1
    try:
        if getattr(ns, "tau", None) is not None:
            TauKind.parse(ns.tau)
        payload = _COMMANDS[ns.command](ns)
    except (ParameterError, bif.DegenerateBetaError, bif.OrderingError) as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    json.dump(payload, out, indent=2)
    out.write("\n")
    return 0


def main() -> int:
    return run()
