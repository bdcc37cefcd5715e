"""Arc maps of both fields, sliding motion, Filippov trajectories and the
first-return map on the switching line.

Upper arcs are solved by quadrature: with ``u = x - lam`` and ``x' = 1`` the
orbit is ``y(u) = y0 + F(u) - F(u0)`` where ``F(u) = a1 u^2/2 + a2 u^3/3``.
Lower arcs use eigen-coordinates ``p = x + y + beta`` and ``q = x - y - beta``
which evolve as ``p' = alpha p`` and ``q' = q``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np
from scipy.integrate import quad, solve_ivp
from scipy.optimize import brentq

from .family import FilippovSystem, FoldVisibility, Side, TauKind, fold_kind
from .sigma import RegionType, direction, pseudo_equilibria, region_intervals

__all__ = [
    "ArcSide",
    "Termination",
    "Arc",
    "Trajectory",
    "ReturnMap",
    "ReturnMapDomainError",
    "StepFailureError",
    "upper_primitive",
    "upper_partner",
    "x_return",
    "lower_return",
    "y_return",
    "lower_state",
    "return_map_domain",
    "return_map",
    "return_map_array",
    "ratio_law_derivative",
    "finite_difference_derivative",
    "return_map_derivative",
    "upper_arc",
    "lower_arc",
    "numeric_arc",
    "slide_arc",
    "integrate",
    "arc_points",
]

_EPS = np.finfo(float).eps
_BRENT = dict(xtol=1e-15, rtol=4 * _EPS, maxiter=200)
SIGMA_TOL = 1e-12
CLOSURE_TOL = 1e-9


class ArcSide(str, Enum):
    UPPER = "upper"
    LOWER = "lower"
    SLIDING = "sliding"


class Termination(str, Enum):
    WINDOW_EXIT = "window_exit"
    TIME_LIMIT = "time_limit"
    PSEUDO_EQUILIBRIUM = "pseudo_equilibrium"
    ESCAPING_NONUNIQUE = "escaping_nonunique"
    CLOSED = "closed"
    EQUILIBRIUM = "equilibrium"


@dataclass(frozen=True)
class Arc:
    """One smooth piece of a Filippov orbit.

    ``transit`` is the elapsed time; for upper arcs it equals the horizontal
    displacement since ``x' = 1``. ``stop`` records why the arc ended
    (``"sigma"``, ``"window"``, ``"time"``, ``"boundary"``,
    ``"pseudo_equilibrium"``). Numeric arcs keep their sampled ``points``.
    """

    side: ArcSide
    start: tuple[float, float]
    end: tuple[float, float]
    transit: float
    method: str = "closed_form"
    stop: str = "sigma"
    points: np.ndarray | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Trajectory:
    arcs: tuple[Arc, ...]
    termination: Termination

    @property
    def sigma_abscissas(self) -> list[float]:
        """Abscissas where arcs end on the switching line, in order."""
        return [a.end[0] for a in self.arcs if a.stop in ("sigma", "boundary")]

    @property
    def total_time(self) -> float:
        return float(sum(a.transit for a in self.arcs))


class ReturnMapDomainError(ValueError):
    """The first-return map is undefined at the requested abscissa."""


class StepFailureError(RuntimeError):
    """An event could not be bracketed; indicates an internal inconsistency."""


# --- upper field -------------------------------------------------------------

def upper_primitive(system: FilippovSystem, u):
    """``F(u) = a1 u^2/2 + a2 u^3/3``, the height gained along an upper orbit."""
    u = np.asarray(u, dtype=float)
    return system.a1 * u * u / 2.0 + system.a2 * u ** 3 / 3.0


def upper_partner(u0):
    """Closed-form partner of ``u0`` in ``(-1/2, 0)`` under ``F(u) = -u^2/2 + u^3/3``.

    Dividing ``F(u) - F(u0)`` by ``u - u0`` leaves a quadratic whose smaller
    root is the landing coordinate in ``(0, 1)``. Outside ``(-1/2, 0]`` the
    result is NaN.
    """
    u0 = np.asarray(u0, dtype=float)
    with np.errstate(invalid="ignore"):
        r = ((3.0 - 2.0 * u0) - np.sqrt(3.0 * (1.0 + 2.0 * u0) * (3.0 - 2.0 * u0))) / 4.0
    return np.where((u0 > -0.5) & (u0 <= 0.0), r, np.nan)


def x_return(system: FilippovSystem, x0: float) -> float | None:
    """Landing abscissa of the upper arc leaving ``(x0, 0)``.

    The cubic ``F(u) - F(u0)`` is bracketed on ``(0, 1)`` where it changes
    sign exactly once. Returns ``None`` when the arc does not come back
    (visible fold, or a start outside ``(lam - 1/2, lam]``) or leaves the
    window.
    """
    if system.tau is not TauKind.INV:
        return None
    u0 = float(x0) - system.lam
    if u0 == 0.0:
        return float(x0)
    if not -0.5 < u0 < 0.0:
        return None
    f0 = float(upper_primitive(system, u0))
    phi = lambda u: float(upper_primitive(system, u)) - f0
    u1 = brentq(phi, 0.0, 1.0, **_BRENT)
    x1 = system.lam + u1
    w = system.window
    if x0 < w.xmin or x1 > w.xmax or -f0 > w.ymax:
        return None
    return float(x1)


# --- lower field -------------------------------------------------------------

def lower_state(system: FilippovSystem, start, t):
    """Closed-form position at time ``t`` on the lower orbit through ``start``."""
    x0, y0 = float(start[0]), float(start[1])
    b, a = system.beta, system.alpha
    p0, q0 = x0 + y0 + b, x0 - y0 - b
    t = np.asarray(t, dtype=float)
    p, q = p0 * np.exp(a * t), q0 * np.exp(t)
    return (p + q) / 2.0, (p - q) / 2.0 - b


def lower_return(system: FilippovSystem, x0: float) -> tuple[float, float] | None:
    """Landing abscissa and transit time of the lower arc leaving ``(x0, 0)``.

    Solves ``(x0 + b) e^{a t} - (x0 - b) e^{t} = 2 b`` for its positive root.
    The left side is convex in ``t`` when ``x0 - b < 0``, so after its single
    minimum there is one crossing, found by bracketing. For ``a = -1`` the
    equation is a quadratic in ``w = e^t``.
    """
    a, b = system.alpha, system.beta
    x0 = float(x0)
    yf = 0.5 * ((a - 1.0) * x0 + (1.0 + a) * b)
    p0, q0 = x0 + b, x0 - b
    if not yf < 0.0 or not q0 < 0.0 or not p0 > 0.0:
        return None
    if a == -1.0:
        w = p0 / (-q0)
        t = math.log(w)
        x2 = -x0
    else:
        g = lambda t: p0 * math.exp(a * t) - q0 * math.exp(t) - 2.0 * b
        t_min = math.log(q0 / (a * p0)) / (a - 1.0)
        t_hi = max(t_min, math.log(2.0 * b / -q0)) + 1e-3
        while g(t_hi) <= 0.0:
            t_hi = 2.0 * t_hi + 1.0
        t = brentq(g, t_min, t_hi, xtol=1e-14, rtol=4 * _EPS, maxiter=200)
        x2 = 0.5 * (p0 * math.exp(a * t) + q0 * math.exp(t))
    w = system.window
    y_min = 0.5 * _lower_min_gap(a, p0, q0) - b
    if x2 < w.xmin or y_min < w.ymin:
        return None
    return float(x2), float(t)


def _lower_min_gap(a: float, p0: float, q0: float) -> float:
    """Minimum over ``t >= 0`` of ``p0 e^{a t} - q0 e^t`` (``p0 > 0 > q0``)."""
    t = math.log(q0 / (a * p0)) / (a - 1.0)
    t = max(t, 0.0)
    return p0 * math.exp(a * t) - q0 * math.exp(t)


def y_return(system: FilippovSystem, x0: float) -> float | None:
    """Landing abscissa of the lower arc leaving ``(x0, 0)``, if any."""
    out = lower_return(system, x0)
    return None if out is None else out[0]


# --- return map --------------------------------------------------------------

def return_map_domain(system: FilippovSystem) -> tuple[float, float] | None:
    """Open interval of starts whose upper and lower arcs both come back.

    The upper arc needs ``x0 - lam`` in ``(-1/2, 0)``; its landing point must
    fall in ``(i1, beta)`` so that the lower arc departs downward and returns
    before reaching the stable separatrix foot.
    """
    if system.tau is not TauKind.INV or system.beta <= 0.0:
        return None
    lam, b = system.lam, system.beta
    i1 = system.lower_fold
    lo = lam - 0.5
    if b - lam < 1.0:
        if b - lam <= 0.0:
            return None
        lo = max(lo, lam + float(upper_partner_inverse(b - lam)))
    hi = lam if i1 <= lam else lam + float(upper_partner_inverse(i1 - lam))
    lo = max(lo, system.window.xmin)
    if not lo < hi:
        return None
    return lo, hi


def upper_partner_inverse(u1):
    """Departure coordinate in ``(-1/2, 0)`` whose upper arc lands at ``u1`` in ``(0, 1)``.

    The partner relation is symmetric, so this is the other root of the same
    deflated quadratic taken on the negative side.
    """
    u1 = np.asarray(u1, dtype=float)
    with np.errstate(invalid="ignore"):
        r = ((3.0 - 2.0 * u1) - np.sqrt(3.0 * (1.0 + 2.0 * u1) * (3.0 - 2.0 * u1))) / 4.0
    return np.where((u1 >= 0.0) & (u1 < 1.0), r, np.nan)


def return_map(system: FilippovSystem, x0: float) -> float:
    """Forward first return ``eta(x0) = y_return(x_return(x0))``."""
    x1 = x_return(system, x0)
    if x1 is None:
        raise ReturnMapDomainError(f"upper arc from x0={x0} does not return")
    x2 = y_return(system, x1)
    if x2 is None:
        raise ReturnMapDomainError(f"lower arc from x1={x1} does not return")
    return x2


def ratio_law_derivative(system: FilippovSystem, x0: float) -> float:
    """``eta'`` from transversal ratios and the divergence of each field.

    ``eta'(x0) = [X.f(x0)/X.f(x1)] [Y.f(x1)/Y.f(x2)] exp((1 + alpha) t_Y)``.
    """
    x1 = x_return(system, x0)
    if x1 is None:
        raise ReturnMapDomainError(f"upper arc from x0={x0} does not return")
    low = lower_return(system, x1)
    if low is None:
        raise ReturnMapDomainError(f"lower arc from x1={x1} does not return")
    x2, t = low
    xf0, xf1 = float(system.xf(x0)), float(system.xf(x1))
    yf1, yf2 = float(system.yf(x1)), float(system.yf(x2))
    return (xf0 / xf1) * (yf1 / yf2) * math.exp((1.0 + system.alpha) * t)


def finite_difference_derivative(system: FilippovSystem, x0: float, step: float = 1e-6) -> float:
    """Central difference of the return map with the given step."""
    return (return_map(system, x0 + step) - return_map(system, x0 - step)) / (2.0 * step)


def return_map_derivative(system: FilippovSystem, x0: float, method: str = "ratio") -> float:
    """Derivative of the return map; ``method`` is ``"ratio"`` or ``"central"``."""
    if method == "ratio":
        return ratio_law_derivative(system, x0)
    if method == "central":
        return finite_difference_derivative(system, x0)
    raise ValueError(f"unknown method {method!r}")


def _lower_return_newton(alpha, beta, x1):
    """Vectorised lower return from the right by Newton's method.

    Returns landing abscissa and transit time (NaN where there is no return).
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    p0, q0 = x1 + beta, x1 - beta
    ok = (q0 < 0) & (p0 > 0) & ((alpha - 1.0) * x1 + (1.0 + alpha) * beta < 0)
    p0 = np.where(ok, p0, 1.0)
    q0 = np.where(ok, q0, -1.0)
    b = np.where(ok, beta, 0.25)
    a = np.broadcast_to(alpha, x1.shape)
    with np.errstate(all="ignore"):
        t = np.maximum(np.log(2.0 * b / -q0), 0.0) + 1e-3
        for _ in range(200):
            ea, et = np.exp(a * t), np.exp(t)
            g = p0 * ea - q0 * et - 2.0 * b
            dg = a * p0 * ea - q0 * et
            step = g / dg
            t = t - step
            if np.all(np.abs(step) <= 4e-16 * (1.0 + t)):
                break
        x2 = 0.5 * (p0 * np.exp(a * t) + q0 * np.exp(t))
    return np.where(ok, x2, np.nan), np.where(ok, t, np.nan)


def eta_arrays(lam, alpha, beta, x0):
    """Vectorised return map and its ratio-law derivative for the invisible case.

    All arguments broadcast together. Uses the closed-form upper partner and a
    Newton solve for the lower arc (closed form when ``alpha == -1``). Entries
    outside the return-map domain are NaN.
    """
    lam = np.asarray(lam, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    u0 = x0 - lam
    u0 = np.where(u0 < 0.0, u0, np.nan)
    u1 = upper_partner(u0)
    x1 = lam + u1
    shape = np.broadcast(lam, alpha, beta, x0).shape
    x1 = np.broadcast_to(x1, shape)
    a = np.broadcast_to(alpha, shape)
    b = np.broadcast_to(beta, shape)
    if np.all(a == -1.0):
        with np.errstate(all="ignore"):
            ok = (x1 > 0) & (x1 < b)
            t = np.where(ok, np.log((x1 + b) / (b - x1)), np.nan)
            x2 = np.where(ok, -x1, np.nan)
    else:
        x2, t = _lower_return_newton(a, b, x1)
    with np.errstate(all="ignore"):
        xf0 = u0 * (u0 - 1.0)
        xf1 = u1 * (u1 - 1.0)
        yf1 = 0.5 * ((a - 1.0) * x1 + (1.0 + a) * b)
        yf2 = 0.5 * ((a - 1.0) * x2 + (1.0 + a) * b)
        d = (xf0 / xf1) * (yf1 / yf2) * np.exp((1.0 + a) * t)
    return x2, d


def return_map_array(system: FilippovSystem, xs) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``eta`` and ``eta'`` over ``xs`` (NaN outside the domain)."""
    if system.tau is not TauKind.INV or system.beta <= 0.0:
        nan = np.full(np.shape(xs), np.nan)
        return nan, nan.copy()
    return eta_arrays(system.lam, system.alpha, system.beta, xs)


@dataclass(frozen=True)
class ReturnMap:
    """Forward first-return map restricted to its domain of definition."""

    system: FilippovSystem
    domain: tuple[float, float] | None

    @classmethod
    def of(cls, system: FilippovSystem) -> "ReturnMap":
        return cls(system, return_map_domain(system))

    def __call__(self, x0: float) -> float:
        return return_map(self.system, x0)

    def derivative(self, x0: float, method: str = "ratio") -> float:
        return return_map_derivative(self.system, x0, method)

    def evaluate(self, xs) -> tuple[np.ndarray, np.ndarray]:
        return return_map_array(self.system, xs)


# --- general arcs ------------------------------------------------------------

def _first_root(fun: Callable[[float], float], t0: float, t1: float, breaks, skip_start: bool):
    """First root of ``fun`` in ``(t0, t1]`` given its monotone pieces.

    ``breaks`` are the interior critical points. When ``skip_start`` is set,
    ``fun(t0) == 0`` and the first monotone piece cannot hold another root.
    """
    pts = [t0] + sorted(b for b in breaks if t0 < b < t1) + [t1]
    pieces = list(zip(pts[:-1], pts[1:]))
    if skip_start:
        pieces = pieces[1:]
    for a, b in pieces:
        fa, fb = fun(a), fun(b)
        if fa == 0.0 and a > t0:
            return a
        if fa * fb < 0.0:
            return brentq(fun, a, b, **_BRENT)
        if fb == 0.0:
            return b
    return None


def _expsum_critical(c1: float, r1: float, c2: float, r2: float) -> list[float]:
    """Critical times of ``c1 e^{r1 t} + c2 e^{r2 t}`` (at most one)."""
    if c1 == 0.0 or c2 == 0.0 or r1 == r2:
        return []
    ratio = -(c2 * r2) / (c1 * r1)
    if not ratio > 0.0:
        return []
    return [math.log(ratio) / (r1 - r2)]


def upper_arc(system: FilippovSystem, start, max_time: float = math.inf) -> Arc:
    """Closed-form upper arc from ``start`` (``y >= 0``) to Σ, the window edge
    or the time limit."""
    x0, y0 = float(start[0]), float(start[1])
    lam, w = system.lam, system.window
    u0 = x0 - lam
    f0 = float(upper_primitive(system, u0))
    height = lambda u: y0 + float(upper_primitive(system, u)) - f0
    u_end = min(w.xmax - lam, u0 + max_time)
    breaks = [0.0, 1.0] if system.tau is TauKind.INV else [0.0]
    candidates = []
    if u_end > u0:
        land = _first_root(height, u0, u_end, breaks, skip_start=(y0 == 0.0))
        if land is not None:
            candidates.append((land, "sigma"))
        top = _first_root(lambda u: height(u) - w.ymax, u0, u_end, breaks, skip_start=False)
        if top is not None:
            candidates.append((top, "window"))
    candidates.append((u_end, "window" if u_end == w.xmax - lam else "time"))
    u1, stop = min(candidates, key=lambda c: c[0])
    y1 = 0.0 if stop == "sigma" else height(u1)
    return Arc(ArcSide.UPPER, (x0, y0), (lam + u1, y1), u1 - u0, "closed_form", stop)


def lower_arc(system: FilippovSystem, start, max_time: float = math.inf) -> Arc:
    """Closed-form lower arc from ``start`` (``y <= 0``)."""
    x0, y0 = float(start[0]), float(start[1])
    a, b, w = system.alpha, system.beta, system.window
    p0, q0 = x0 + y0 + b, x0 - y0 - b
    horizon = min(max_time, 200.0)
    # y(t) = p0/2 e^{a t} - q0/2 e^t - b and x(t) = p0/2 e^{a t} + q0/2 e^t
    ycrit = _expsum_critical(p0 / 2, a, -q0 / 2, 1.0)
    xcrit = _expsum_critical(p0 / 2, a, q0 / 2, 1.0)

    def y_at(t):
        return 0.5 * (p0 * math.exp(a * t) - q0 * math.exp(t)) - b

    def x_at(t):
        return 0.5 * (p0 * math.exp(a * t) + q0 * math.exp(t))

    candidates = []
    land = _first_root(y_at, 0.0, horizon, ycrit, skip_start=(y0 == 0.0))
    if land is not None:
        candidates.append((land, "sigma"))
    for fun, crit in (
        (lambda t: y_at(t) - w.ymin, ycrit),
        (lambda t: x_at(t) - w.xmin, xcrit),
        (lambda t: x_at(t) - w.xmax, xcrit),
    ):
        r = _first_root(fun, 0.0, horizon, crit, skip_start=False)
        if r is not None and r > 0.0:
            candidates.append((r, "window"))
    candidates.append((horizon, "time"))
    t1, stop = min(candidates, key=lambda c: c[0])
    end = (x_at(t1), 0.0 if stop == "sigma" else y_at(t1))
    return Arc(ArcSide.LOWER, (x0, y0), end, t1, "closed_form", stop)


def numeric_arc(
    system: FilippovSystem,
    side: Side | str,
    start,
    max_time: float = 50.0,
    rtol: float = 1e-12,
    atol: float = 1e-14,
    max_step: float = 0.05,
) -> Arc:
    """Arc of one field by adaptive Runge-Kutta (DOP853) with event location
    on the switching line and on the window edges.

    The upper field is polynomial, so the error estimate alone lets a single
    step jump over a whole excursion above the line; ``max_step`` keeps the
    sign-change test on ``y`` meaningful."""
    side = Side.parse(side)
    w = system.window
    field_fn = system.upper if side is Side.UPPER else system.lower

    def rhs(_t, s):
        vx, vy = field_fn(s[0], s[1])
        return [float(vx), float(vy)]

    def hit_sigma(_t, s):
        return s[1]

    hit_sigma.terminal = True
    hit_sigma.direction = -1.0 if side is Side.UPPER else 1.0
    edges = []
    for idx, bound in ((0, w.xmin), (0, w.xmax), (1, w.ymin), (1, w.ymax)):
        ev = lambda _t, s, idx=idx, bound=bound: s[idx] - bound
        ev.terminal = True
        edges.append(ev)
    sol = solve_ivp(
        rhs,
        (0.0, max_time),
        [float(start[0]), float(start[1])],
        method="DOP853",
        events=[hit_sigma, *edges],
        rtol=rtol,
        atol=atol,
        max_step=max_step,
        dense_output=True,
    )
    if sol.status == -1:
        raise StepFailureError(sol.message)
    t_end = float(sol.t[-1])
    stop = "time"
    if sol.status == 1:
        if sol.t_events[0].size:
            stop = "sigma"
        else:
            stop = "window"
    end = sol.y[:, -1].copy()
    if stop == "sigma":
        end[1] = 0.0
    samples = sol.sol(np.linspace(0.0, t_end, 200)).T if t_end > 0 else sol.y.T
    arc_side = ArcSide.UPPER if side is Side.UPPER else ArcSide.LOWER
    return Arc(arc_side, (float(start[0]), float(start[1])), (float(end[0]), float(end[1])),
               t_end, "numeric", stop, samples)


# --- sliding -----------------------------------------------------------------

def _sliding_piece(system: FilippovSystem, x0: float, heading: float):
    w = system.window
    for a, b, region in region_intervals(system, w.xmin, w.xmax):
        if region is not RegionType.SLIDING:
            continue
        if a < x0 < b or (x0 == a and heading > 0) or (x0 == b and heading < 0):
            return a, b
    return None


def slide_arc(system: FilippovSystem, x0: float, max_time: float = math.inf, tol: float = SIGMA_TOL) -> Arc:
    """Sliding motion ``x' = H(x)`` from ``x0`` until the edge of its sliding
    interval, an asymptotic pseudo-equilibrium, or the time limit."""
    x0 = float(x0)
    h0 = direction(system, x0)
    if abs(h0) <= tol:
        return Arc(ArcSide.SLIDING, (x0, 0.0), (x0, 0.0), 0.0, "numeric", "pseudo_equilibrium")
    heading = math.copysign(1.0, h0)
    piece = _sliding_piece(system, x0, heading)
    if piece is None:
        raise ValueError(f"x0={x0} is not in a sliding region")
    a, b = piece
    target = b if heading > 0 else a
    lo, hi = (x0, target) if heading > 0 else (target, x0)
    eqs = [p.abscissa for p in pseudo_equilibria(system, (max(lo, system.window.xmin), hi))
           if lo < p.abscissa < hi]
    if eqs:
        target = min(eqs) if heading > 0 else max(eqs)
        stop = "pseudo_equilibrium"
        transit = math.inf
    else:
        at_edge = (target == system.window.xmin or target == system.window.xmax)
        stop = "window" if at_edge else "boundary"
        transit = abs(quad(lambda s: 1.0 / direction(system, s), x0, target, limit=200)[0])
    if transit > max_time:
        sol = solve_ivp(lambda _t, s: [direction(system, s[0])], (0.0, max_time), [x0],
                        method="DOP853", rtol=1e-12, atol=1e-14)
        return Arc(ArcSide.SLIDING, (x0, 0.0), (float(sol.y[0, -1]), 0.0), max_time, "numeric", "time")
    return Arc(ArcSide.SLIDING, (x0, 0.0), (float(target), 0.0), transit, "numeric", stop)


# --- trajectories ------------------------------------------------------------

def _departure(system: FilippovSystem, x: float, tol: float):
    """Decide how an orbit leaves ``(x, 0)``: ``"upper"``, ``"lower"``,
    ``"slide"``, ``"escape"``, ``"pseudo"``, ``"equilibrium"`` or a nudge."""
    if system.beta == 0.0 and abs(x) <= tol:
        return "equilibrium", x
    xf, yf = float(system.xf(x)), float(system.yf(x))
    xz, yz = abs(xf) <= tol, abs(yf) <= tol
    if xz and yz:
        return "pseudo", x
    if xz:
        if yf < 0:
            return "lower", x
        vis = _visibility(system, Side.UPPER, x, tol)
        return ("upper" if vis is FoldVisibility.VISIBLE else "slide"), x
    if yz:
        if xf > 0:
            return "upper", x
        vis = _visibility(system, Side.LOWER, x, tol)
        if vis is FoldVisibility.VISIBLE:
            return "lower", x
        return "nudge", x + math.copysign(1e-9, direction(system, x))
    if xf > 0 and yf > 0:
        return "upper", x
    if xf < 0 and yf < 0:
        return "lower", x
    if xf < 0 < yf:
        if abs(direction(system, x)) <= tol:
            return "pseudo", x
        return "slide", x
    return "escape", x


def _visibility(system: FilippovSystem, side: Side, x: float, tol: float):
    try:
        return fold_kind(system, side, (x, 0.0), tol)
    except ValueError:
        return None


def integrate(
    system: FilippovSystem,
    start,
    max_time: float = 50.0,
    *,
    max_arcs: int = 1000,
    method: str = "closed_form",
    tol: float = SIGMA_TOL,
) -> Trajectory:
    """Forward Filippov orbit from ``start`` as a chain of arcs.

    Crossing happens at sewing points, sliding starts where both fields push
    toward Σ, and arrival in the escaping region stops the orbit because the
    forward continuation is not unique. The orbit is declared closed when a
    departure from Σ repeats an earlier one within ``1e-9``.
    """
    x, y = float(start[0]), float(start[1])
    system.check_window(x, y)
    if abs(x) <= tol and abs(y + system.beta) <= tol:
        return Trajectory((), Termination.EQUILIBRIUM)
    arcs: list[Arc] = []
    seen: dict[str, list[float]] = {"upper": [], "lower": []}
    elapsed = 0.0
    for _ in range(max_arcs):
        remaining = max_time - elapsed
        if remaining <= 0.0:
            return Trajectory(tuple(arcs), Termination.TIME_LIMIT)
        if y > 0.0:
            kind = "upper"
        elif y < 0.0:
            kind = "lower"
        else:
            kind, x_new = _departure(system, x, tol)
            if kind == "nudge":
                x = x_new
                continue
            if kind == "equilibrium":
                return Trajectory(tuple(arcs), Termination.EQUILIBRIUM)
            if kind == "pseudo":
                return Trajectory(tuple(arcs), Termination.PSEUDO_EQUILIBRIUM)
            if kind == "escape":
                return Trajectory(tuple(arcs), Termination.ESCAPING_NONUNIQUE)
            if kind in seen:
                if any(abs(x - s) <= CLOSURE_TOL for s in seen[kind]):
                    return Trajectory(tuple(arcs), Termination.CLOSED)
                seen[kind].append(x)
        if kind == "slide":
            arc = slide_arc(system, x, remaining, tol)
        elif method == "numeric":
            arc = numeric_arc(system, kind, (x, y), min(remaining, 200.0))
        elif kind == "upper":
            arc = upper_arc(system, (x, y), remaining)
        else:
            arc = lower_arc(system, (x, y), remaining)
        arcs.append(arc)
        elapsed += arc.transit
        x, y = arc.end
        if arc.stop == "window":
            return Trajectory(tuple(arcs), Termination.WINDOW_EXIT)
        if arc.stop == "time":
            return Trajectory(tuple(arcs), Termination.TIME_LIMIT)
        if arc.stop == "pseudo_equilibrium":
            return Trajectory(tuple(arcs), Termination.PSEUDO_EQUILIBRIUM)
        if arc.side is not ArcSide.SLIDING and arc.transit == 0.0:
            raise StepFailureError(f"zero-length {arc.side.value} arc at x={x}")
    return Trajectory(tuple(arcs), Termination.TIME_LIMIT)


def arc_points(system: FilippovSystem, arc: Arc, n: int = 64) -> np.ndarray:
    """Sample ``n`` points along an arc, shape ``(n, 2)``."""
    if arc.points is not None:
        return np.asarray(arc.points)
    if arc.side is ArcSide.SLIDING:
        xs = np.linspace(arc.start[0], arc.end[0], n)
        return np.column_stack([xs, np.zeros(n)])
    if arc.side is ArcSide.UPPER:
        xs = np.linspace(arc.start[0], arc.end[0], n)
        u0 = arc.start[0] - system.lam
        ys = arc.start[1] + upper_primitive(system, xs - system.lam) - upper_primitive(system, u0)
        ys[-1] = arc.end[1]
        return np.column_stack([xs, ys])
    t_end = arc.transit if math.isfinite(arc.transit) else 30.0
    ts = np.linspace(0.0, t_end, n)
    xs, ys = lower_state(system, arc.start, ts)
    ys = np.array(ys)
    ys[-1] = arc.end[1]
    return np.column_stack([xs, ys])
