"""Region classification on the switching line, the direction function and
pseudo-equilibria."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq

from .family import FilippovSystem, FoldVisibility, Side, TauKind, fold_kind

__all__ = [
    "RegionType",
    "Stability",
    "RegionKind",
    "PseudoEquilibrium",
    "DegenerateDenominatorError",
    "classify_point",
    "direction",
    "direction_array",
    "filippov_combination",
    "pseudo_equilibria",
    "visible_pseudo_roots",
    "region_intervals",
]

TOL = 1e-12


class RegionType(str, Enum):
    SEWING = "Sewing"
    ESCAPING = "Escaping"
    SLIDING = "Sliding"
    TANGENCY = "Tangency"
    PSEUDO_EQUILIBRIUM = "PseudoEquilibrium"
    BOUNDARY_EQUILIBRIUM = "BoundaryEquilibrium"


class Stability(str, Enum):
    SADDLE = "SigmaSaddle"
    ATTRACTOR = "SigmaAttractor"
    REPELLER = "SigmaRepeller"


@dataclass(frozen=True)
class RegionKind:
    """Region of a point of the switching line.

    ``side`` and ``visibility`` are set for tangencies (``side`` is ``"both"``
    when both fields are tangent), ``stability`` for pseudo-equilibria.
    """

    type: RegionType
    side: str | None = None
    visibility: FoldVisibility | None = None
    stability: Stability | None = None
    region: RegionType | None = None

    def __str__(self) -> str:
        if self.type is RegionType.TANGENCY:
            vis = self.visibility.value if self.visibility else "degenerate"
            return f"Tangency({self.side}, {vis})"
        if self.type is RegionType.PSEUDO_EQUILIBRIUM:
            return f"PseudoEquilibrium({self.stability.value})"
        return self.type.value


@dataclass(frozen=True)
class PseudoEquilibrium:
    abscissa: float
    stability: Stability
    region: RegionType


class DegenerateDenominatorError(ZeroDivisionError):
    """``Y.f - X.f`` vanishes, so the direction function is undefined."""


def _lie(system: FilippovSystem, x):
    return system.xf(x), system.yf(x, 0.0)


def direction_array(system: FilippovSystem, x) -> np.ndarray:
    """Vectorised direction function; entries with a zero denominator are NaN."""
    x = np.asarray(x, dtype=float)
    d1, d2 = system.upper(x, 0.0)
    e1, e2 = system.lower(x, 0.0)
    den = e2 - d2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (e2 * d1 - d2 * e1) / den
    return np.where(np.abs(den) < 1e-14, np.nan, out)


def direction(system: FilippovSystem, x: float) -> float:
    """Direction function ``H = (E2 D1 - D2 E1) / (E2 - D2)`` at ``(x, 0)``.

    The sign of ``H`` orients the sliding and escaping dynamics.
    """
    d1, d2 = system.upper(x, 0.0)
    e1, e2 = system.lower(x, 0.0)
    den = float(e2 - d2)
    if abs(den) < 1e-14:
        raise DegenerateDenominatorError(f"Y.f - X.f vanishes at x={x}")
    return float((e2 * d1 - d2 * e1) / den)


def filippov_combination(system: FilippovSystem, x: float) -> tuple[float, float]:
    """Convex combination ``c X + (1 - c) Y`` tangent to the switching line."""
    d = np.array(system.upper(x, 0.0), dtype=float)
    e = np.array(system.lower(x, 0.0), dtype=float)
    c = e[1] / (e[1] - d[1])
    z = c * d + (1.0 - c) * e
    return float(z[0]), float(z[1])


def _open_region(xf: float, yf: float) -> RegionType:
    if xf * yf > 0:
        return RegionType.SEWING
    return RegionType.ESCAPING if xf > 0 else RegionType.SLIDING


def _stability(system: FilippovSystem, x: float, region: RegionType, tol: float) -> Stability:
    step = 1e-6
    for _ in range(8):
        left = direction_array(system, x - step)
        right = direction_array(system, x + step)
        if np.isfinite(left) and np.isfinite(right) and abs(left) > tol and abs(right) > tol:
            break
        step *= 10.0
    if region is RegionType.SLIDING:
        return Stability.ATTRACTOR if left > 0 > right else Stability.SADDLE
    return Stability.REPELLER if left < 0 < right else Stability.SADDLE


def classify_point(system: FilippovSystem, x: float, tol: float = TOL) -> RegionKind:
    """Classify ``(x, 0)``; tangencies take precedence over open regions."""
    system.check_window(x, 0.0)
    if system.beta == 0.0 and abs(x) <= tol:
        return RegionKind(RegionType.BOUNDARY_EQUILIBRIUM)
    xf, yf = (float(v) for v in _lie(system, x))
    x_tan, y_tan = abs(xf) <= tol, abs(yf) <= tol
    if x_tan and y_tan:
        return RegionKind(RegionType.TANGENCY, side="both")
    if x_tan or y_tan:
        side = Side.UPPER if x_tan else Side.LOWER
        try:
            vis = fold_kind(system, side, (x, 0.0), tol)
        except ValueError:
            vis = None
        return RegionKind(RegionType.TANGENCY, side=side.value, visibility=vis)
    region = _open_region(xf, yf)
    if region is not RegionType.SEWING:
        if abs(direction(system, x)) <= tol:
            return RegionKind(
                RegionType.PSEUDO_EQUILIBRIUM,
                stability=_stability(system, x, region, tol),
                region=region,
            )
    return RegionKind(region)


def region_intervals(system: FilippovSystem, lo: float, hi: float) -> list[tuple[float, float, RegionType]]:
    """Split ``[lo, hi]`` at the zeros of ``X.f`` and ``Y.f`` into open-region pieces."""
    cuts = [lo, hi]
    for r in _xf_zeros(system) + _yf_zeros(system):
        if lo < r < hi:
            cuts.append(r)
    cuts = sorted(set(cuts))
    out = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (a + b)
        xf, yf = (float(v) for v in _lie(system, mid))
        if xf == 0.0 or yf == 0.0:
            continue
        out.append((a, b, _open_region(xf, yf)))
    return out


def _xf_zeros(system: FilippovSystem) -> list[float]:
    if system.tau is TauKind.INV:
        return [system.lam, system.lam + 1.0]
    return [system.lam]


def _yf_zeros(system: FilippovSystem) -> list[float]:
    return [system.lower_fold]


def visible_pseudo_roots(system: FilippovSystem) -> list[float]:
    """Closed-form zeros of the numerator of ``H`` for the visible case.

    For ``alpha = -1`` the numerator is linear with root
    ``beta*lam/(beta - 1)``. Otherwise it is the quadratic
    ``(1+a) x^2 - B x - C`` with ``B = (a-1)(1-b) + lam(1+a)`` and
    ``C = b(1 + a + lam(a-1))``.
    """
    if system.tau is not TauKind.VIS:
        return []
    a, b, lam = system.alpha, system.beta, system.lam
    if a == -1.0:
        return [b * lam / (b - 1.0)]
    B = (a - 1.0) * (1.0 - b) + lam * (1.0 + a)
    C = b * (1.0 + a + lam * (a - 1.0))
    disc = B * B + 4.0 * (1.0 + a) * C
    if disc < 0:
        return []
    s = math.sqrt(disc)
    return sorted([(B + s) / (2.0 * (1.0 + a)), (B - s) / (2.0 * (1.0 + a))])


def pseudo_equilibria(
    system: FilippovSystem,
    interval: tuple[float, float] | None = None,
    tol: float = TOL,
    resolution: float = 1e-3,
) -> list[PseudoEquilibrium]:
    """All zeros of ``H`` on the sliding and escaping parts of ``interval``.

    Each open-region piece is scanned at ``resolution`` and sign changes are
    refined by Brent's method. For the visible case the closed-form roots are
    added (and polished) when they fall inside a non-sewing piece.
    """
    lo, hi = interval if interval is not None else (system.window.xmin, system.window.xmax)
    system.check_window(lo, 0.0)
    system.check_window(hi, 0.0)
    pieces = [p for p in region_intervals(system, lo, hi) if p[2] is not RegionType.SEWING]
    roots: list[tuple[float, RegionType]] = []

    def h(x: float) -> float:
        return direction(system, x)

    for a, b, region in pieces:
        n = max(int(math.ceil((b - a) / resolution)), 2)
        grid = np.linspace(a, b, n + 1)[1:-1]
        if grid.size == 0:
            continue
        vals = direction_array(system, grid)
        for k in np.flatnonzero(vals == 0.0):
            roots.append((float(grid[k]), region))
        for k in np.flatnonzero(vals[:-1] * vals[1:] < 0):
            r = brentq(h, grid[k], grid[k + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
            roots.append((r, region))
        for q in visible_pseudo_roots(system):
            if a < q < b:
                roots.append((_polish(h, q, a, b), region))
    out: list[PseudoEquilibrium] = []
    for r, region in sorted(roots):
        if out and abs(out[-1].abscissa - r) < 1e-9:
            continue
        if abs(h(r)) > max(tol, 1e-12) * 10:
            continue
        out.append(PseudoEquilibrium(r, _stability(system, r, region, tol), region))
    return out


def _polish(h, q: float, a: float, b: float) -> float:
    """Refine a closed-form root with Brent's method on a small bracket."""
    if h(q) == 0.0:
        return q
    for w in (1e-12, 1e-10, 1e-8, 1e-6):
        left, right = max(a, q - w), min(b, q + w)
        if left < right and h(left) * h(right) < 0:
            return brentq(h, left, right, xtol=1e-16, rtol=4 * np.finfo(float).eps)
    return q
