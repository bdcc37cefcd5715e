"""Canard cycles (fixed points of the return map) and Σ-graphs."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .family import FilippovSystem, TauKind, key_points
from .flow import (
    Arc,
    ArcSide,
    ReturnMapDomainError,
    ratio_law_derivative,
    return_map,
    return_map_array,
    return_map_domain,
    upper_primitive,
    x_return,
)
from .sigma import RegionType, classify_point, pseudo_equilibria

__all__ = [
    "CycleKind",
    "CycleStability",
    "CanardCycle",
    "SigmaGraph",
    "MissingPointError",
    "connection_defect",
    "find_sigma_graph",
    "find_canard_cycles",
    "cycle_kind",
    "one_sided_drift",
]

HYPERBOLIC_TOL = 1e-6
CLOSE_PAIR = 1e-9
_BRENT = dict(xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


class CycleKind(str, Enum):
    I = "I"
    II = "II"
    III = "III"


class CycleStability(str, Enum):
    ATTRACTOR = "attractor"
    REPELLER = "repeller"
    NONHYPERBOLIC = "nonhyperbolic"


@dataclass(frozen=True)
class CanardCycle:
    """A closed orbit through ``(fixed_abscissa, 0)``.

    ``derivative`` is the forward return-map slope; ``landing`` is where the
    upper arc meets the switching line.
    """

    fixed_abscissa: float
    landing: float
    kind: CycleKind
    derivative: float
    stability: CycleStability
    residual: float


@dataclass(frozen=True)
class SigmaGraph:
    vertices: tuple[tuple[str, tuple[float, float]], ...]
    edges: tuple[Arc, ...]
    kind: CycleKind

    def is_closed(self, tol: float = 1e-9) -> bool:
        for a, b in zip(self.edges, self.edges[1:] + self.edges[:1]):
            if math.dist(a.end, b.start) > tol:
                return False
        return True


class MissingPointError(ValueError):
    """A separatrix foot or lower fold is absent for the given ``beta``."""


def _named_abscissa(system: FilippovSystem, name: str) -> float:
    kp = key_points(system)
    if name == "h" and kp.h is not None:
        return kp.h[0]
    if name == "j" and kp.j is not None:
        return kp.j[0]
    if name == "i" and kp.lower_fold_name == "i":
        return kp.e_or_i[0]
    raise MissingPointError(f"point {name!r} does not exist for beta={system.beta}")


def connection_defect(system: FilippovSystem, start: str, end: str) -> float:
    """Signed mismatch ``F(u_end) - F(u_start)`` of the upper quadrature.

    It vanishes exactly when one upper orbit passes through both named
    points of the switching line.
    """
    if system.beta <= 0.0:
        raise MissingPointError("connections need beta > 0")
    xs, xe = _named_abscissa(system, start), _named_abscissa(system, end)
    return float(upper_primitive(system, xe - system.lam) - upper_primitive(system, xs - system.lam))


def _separatrix_edges(system: FilippovSystem) -> tuple[Arc, Arc]:
    b = system.beta
    stable = Arc(ArcSide.LOWER, (b, 0.0), (0.0, -b), math.inf, "closed_form", "saddle")
    unstable = Arc(ArcSide.LOWER, (0.0, -b), (-b, 0.0), math.inf, "closed_form", "sigma")
    return stable, unstable


def find_sigma_graph(system: FilippovSystem, tol: float = 1e-10) -> SigmaGraph | None:
    """Saddle-loop graph through ``h`` and ``j`` (invisible case) or the
    graph through the coincident folds ``d = i`` (visible case)."""
    if system.beta <= 0.0:
        return None
    b, lam = system.beta, system.lam
    stable, unstable = _separatrix_edges(system)
    if system.tau is TauKind.INV:
        if not (-0.5 < -b - lam < 0.0 < b - lam < 1.0):
            return None
        if abs(connection_defect(system, "h", "j")) >= tol:
            return None
        top = Arc(ArcSide.UPPER, (-b, 0.0), (b, 0.0), 2.0 * b)
        verts = (("h", (-b, 0.0)), ("j", (b, 0.0)), ("S", (0.0, -b)))
        return SigmaGraph(verts, (top, stable, unstable), CycleKind.I)
    i1 = system.lower_fold
    if abs(lam - i1) >= tol:
        return None
    verts = [("h", (-b, 0.0)), ("d", (lam, 0.0))]
    for pe in pseudo_equilibria(system, (-b, b)):
        if -b < pe.abscissa < b and abs(pe.abscissa - lam) > 1e-9:
            verts.append((f"P[{pe.stability.value}]", (pe.abscissa, 0.0)))
    verts += [("j", (b, 0.0)), ("S", (0.0, -b))]
    left = Arc(ArcSide.SLIDING, (-b, 0.0), (lam, 0.0), math.inf, "closed_form", "boundary")
    right = Arc(ArcSide.SLIDING, (lam, 0.0), (b, 0.0), math.inf, "closed_form", "boundary")
    return SigmaGraph(tuple(verts), (left, right, stable, unstable), CycleKind.III)


def cycle_kind(system: FilippovSystem, xs) -> CycleKind:
    """Kind from the regions of the switching-line points of a closed orbit."""
    regions = [classify_point(system, float(x)).type for x in xs]
    if all(r is RegionType.SEWING for r in regions):
        return CycleKind.I
    return CycleKind.III


def _stability(derivative: float) -> CycleStability:
    if abs(derivative - 1.0) < HYPERBOLIC_TOL:
        return CycleStability.NONHYPERBOLIC
    return CycleStability.REPELLER if derivative > 1.0 else CycleStability.ATTRACTOR


def _make_cycle(system: FilippovSystem, x: float) -> CanardCycle:
    d = ratio_law_derivative(system, x)
    x1 = x_return(system, x)
    res = return_map(system, x) - x
    return CanardCycle(x, x1, cycle_kind(system, (x, x1)), d, _stability(d), abs(res))


def find_canard_cycles(
    system: FilippovSystem,
    interval: tuple[float, float] | None = None,
    resolution: float = 1e-3,
) -> list[CanardCycle]:
    """All fixed points of the forward return map in ``interval``.

    The interval (default: the whole return-map domain) is scanned at
    ``resolution``; sign changes of ``eta(x) - x`` are refined by Brent's
    method. A second pass locates the extrema of ``eta(x) - x`` (zeros of
    ``eta' - 1``) so that close pairs hidden between grid points and tangent
    fixed points are not missed.
    """
    dom = return_map_domain(system)
    if dom is None:
        return []
    lo, hi = dom
    if interval is not None:
        lo, hi = max(lo, interval[0]), min(hi, interval[1])
    if not lo < hi:
        return []
    n = max(int(math.ceil((hi - lo) / resolution)), 16)
    # endpoints are excluded: the derivative blows up at the fold end
    xs = np.linspace(lo, hi, n + 2)[1:-1]
    eta, deta = return_map_array(system, xs)
    g, dg = eta - xs, deta - 1.0

    def gap(x: float) -> float:
        return return_map(system, x) - x

    def slope(x: float) -> float:
        return ratio_law_derivative(system, x) - 1.0

    roots: list[float] = []
    ok = np.isfinite(g)
    for k in range(len(xs) - 1):
        if not (ok[k] and ok[k + 1]):
            continue
        if g[k] == 0.0:
            roots.append(float(xs[k]))
        elif g[k] * g[k + 1] < 0.0:
            roots.append(brentq(gap, xs[k], xs[k + 1], **_BRENT))
    okd = np.isfinite(dg)
    for k in range(len(xs) - 1):
        if not (okd[k] and okd[k + 1]) or dg[k] * dg[k + 1] >= 0.0:
            continue
        xc = brentq(slope, xs[k], xs[k + 1], **_BRENT)
        gc = gap(xc)
        if abs(gc) <= 1e-13:
            roots.append(xc)
            continue
        left, right = xs[max(k - 1, 0)], xs[min(k + 2, len(xs) - 1)]
        for a, b in ((left, xc), (xc, right)):
            try:
                ga, gb = gap(a), gap(b)
            except ReturnMapDomainError:
                continue
            if ga * gb < 0.0:
                roots.append(brentq(gap, a, b, **_BRENT))
    cycles: list[CanardCycle] = []
    for r in sorted(roots):
        if cycles and abs(cycles[-1].fixed_abscissa - r) < CLOSE_PAIR:
            continue
        cycles.append(_make_cycle(system, r))
    return cycles


def one_sided_drift(system: FilippovSystem, x: float, steps: int = 50) -> float:
    """Net displacement after ``steps`` returns from ``x`` (sign shows whether
    nearby orbits move toward or away from the fold)."""
    start = x
    for _ in range(steps):
        try:
            x = return_map(system, x)
        except ReturnMapDomainError:
            break
    return x - start
