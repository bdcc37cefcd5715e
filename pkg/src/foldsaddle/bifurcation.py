"""Boundary values in the ``lam`` direction, case labels, topological classes
and parameter sweeps."""
from __future__ import annotations

import functools
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .family import BETA_BOUND, FamilyParams, FilippovSystem, TauKind, lower_fold_abscissa
from .flow import (
    ReturnMapDomainError,
    eta_arrays,
    ratio_law_derivative,
    return_map,
    upper_partner_inverse,
)
from .structures import find_canard_cycles

__all__ = [
    "Regime",
    "CaseLabel",
    "TopologicalClass",
    "Boundaries",
    "CycleFold",
    "Diagram",
    "SphereSample",
    "NoBracketError",
    "NoCycleWindowError",
    "OrderingError",
    "AmbiguityError",
    "DegenerateBetaError",
    "alpha0",
    "mu0",
    "lambda0",
    "formula_L0",
    "formula_L1",
    "formula_L2_printed",
    "formula_M0",
    "formula_M1",
    "formula_M2",
    "regime_of",
    "solve_connection_lambda",
    "boundaries",
    "locate_cycle_fold",
    "find_cycle_fold",
    "fold_bracket",
    "classify_case",
    "topological_class",
    "case_witnesses",
    "enumerate_cases",
    "count_fixed_points",
    "sweep_grid",
    "sweep_sphere",
]


class NoBracketError(ValueError):
    """No sign change of the connection residual in the admissible range."""


class NoCycleWindowError(ValueError):
    """No parameter with two return-map fixed points was found."""


class OrderingError(ValueError):
    """Boundary values are not strictly increasing in the expected order."""


class AmbiguityError(ValueError):
    """``lam`` is within tolerance of two distinct boundaries."""


class DegenerateBetaError(ZeroDivisionError):
    """The closed form is singular at ``beta = 0``; carries the limit value."""

    def __init__(self, message: str, limit: float):
        super().__init__(message)
        self.limit = limit


# --- closed forms ------------------------------------------------------------

def _root_s(beta: float) -> float:
    return math.sqrt(9.0 - 12.0 * beta * beta)


def alpha0(beta: float, *, allow_limit: bool = False) -> float:
    """Resonant eigenvalue: ``1 - 12 b / (-3 + 6 b + sqrt(9 - 12 b^2))``.

    At ``beta = 0`` the expression is 0/0 with limit ``-1``; that value is
    returned only when ``allow_limit`` is set.
    """
    if beta == 0.0:
        if allow_limit:
            return -1.0
        raise DegenerateBetaError("alpha0 is singular at beta = 0 (limit -1)", -1.0)
    return 1.0 - 12.0 * beta / (-3.0 + 6.0 * beta + _root_s(beta))


def mu0(beta: float, *, allow_limit: bool = False) -> float:
    """``alpha0 + 1``, the same threshold in the shifted parameter ``mu``."""
    if beta == 0.0:
        if allow_limit:
            return 0.0
        raise DegenerateBetaError("mu0 is singular at beta = 0 (limit 0)", 0.0)
    return 2.0 - 12.0 * beta / (-3.0 + 6.0 * beta + _root_s(beta))


def lambda0(beta: float) -> float:
    """Fold position of the saddle loop through ``h`` and ``j``."""
    return (-3.0 + _root_s(beta)) / 6.0


def formula_L0(beta: float) -> float:
    s = _root_s(beta)
    inner = 15.0 + s - 2.0 * beta * (-3.0 + 2.0 * beta + s)
    return (-9.0 - 6.0 * beta + s + math.sqrt(2.0) * math.sqrt(inner)) / 12.0


def formula_L1(beta: float) -> float:
    return -0.5 + _root_s(beta) / 6.0


def formula_L2_printed(beta: float) -> float:
    """Closed form as printed for the i-to-j connection at resonance.

    Kept for reference only: it disagrees with the connection root.
    """
    s = _root_s(beta)
    inner = 15.0 + s + 2.0 * beta * (-3.0 + 2.0 * beta + s)
    return (-9.0 + 6.0 * beta + s + math.sqrt(2.0) * math.sqrt(inner)) / 12.0


def formula_M0(alpha: float, beta: float) -> float:
    a, b = alpha, beta
    am = a - 1.0
    rad = 9.0 * am ** 4 - 12.0 * am ** 2 * b * b
    num = -3.0 - 3.0 * a * (-2.0 + a + 2.0 * am * b) + math.sqrt(rad)
    return num / (6.0 * am ** 2)


def formula_M1(alpha: float, beta: float) -> float:
    return -0.5 + _root_s(beta) / 6.0


def formula_M2(alpha: float, beta: float) -> float:
    a, b = alpha, beta
    am = a - 1.0
    rad = 9.0 * am ** 4 - 12.0 * am ** 2 * a * a * b * b
    num = -3.0 + 6.0 * b - 3.0 * a * (-2.0 + a + 2.0 * b) + math.sqrt(rad)
    return num / (6.0 * am ** 2)


# --- regimes and labels ------------------------------------------------------

class Regime(Enum):
    THM1 = 1
    THM2 = 2
    THM3 = 3
    THM4 = 4
    THM5 = 5
    THM6 = 6

    @property
    def theorem(self) -> int:
        return self.value

    @property
    def tau(self) -> TauKind:
        return TauKind.INV if self.value <= 3 else TauKind.VIS

    @property
    def case_count(self) -> int:
        return {1: 19, 2: 21, 3: 21}.get(self.value, 13)

    @classmethod
    def parse(cls, value: "Regime | int | str") -> "Regime":
        if isinstance(value, Regime):
            return value
        text = str(value).lower().removeprefix("thm")
        return cls(int(text))


@dataclass(frozen=True, order=True)
class CaseLabel:
    """Case ``index`` of theorem ``theorem``; printed as ``"<index>_<theorem>"``."""

    theorem: int
    index: int

    def __post_init__(self) -> None:
        limit = {1: 19, 2: 21, 3: 21}.get(self.theorem, 13)
        if self.theorem not in range(1, 7) or not 1 <= self.index <= limit:
            raise ValueError(f"invalid case label {self.index}_{self.theorem}")

    def __str__(self) -> str:
        return f"{self.index}_{self.theorem}"

    @classmethod
    def parse(cls, text: str) -> "CaseLabel":
        index, theorem = str(text).strip().split("_")
        return cls(int(theorem), int(index))


@dataclass(frozen=True)
class TopologicalClass:
    representative: CaseLabel

    def __str__(self) -> str:
        return str(self.representative)


def regime_of(tau: TauKind | str, alpha: float, beta: float, tol: float = 1e-9) -> Regime:
    """Regime from ``alpha`` against ``alpha0(beta)`` (invisible) or ``-1`` (visible)."""
    tau = TauKind.parse(tau)
    ref = -1.0 if tau is TauKind.VIS else alpha0(beta, allow_limit=True)
    offset = 0 if tau is TauKind.INV else 3
    if abs(alpha - ref) <= tol * max(1.0, abs(ref)):
        return Regime(1 + offset)
    return Regime((2 if alpha > ref else 3) + offset)


# --- connection oracle -------------------------------------------------------

_PAIRS = {"h->i": ("h", "i"), "h->j": ("h", "j"), "i->j": ("i", "j")}


def _pair(pair) -> tuple[str, str]:
    if isinstance(pair, tuple):
        return pair
    key = str(pair).replace("→", "->").replace(" ", "").lower()
    if key not in _PAIRS:
        raise ValueError(f"unknown connection {pair!r}; use one of {sorted(_PAIRS)}")
    return _PAIRS[key]


def _foot(name: str, alpha: float, beta: float) -> float:
    if name == "h":
        return -beta
    if name == "j":
        return beta
    return lower_fold_abscissa(alpha, beta)


def solve_connection_lambda(tau: TauKind | str, alpha: float, beta: float, pair) -> float:
    """Fold position ``lam`` at which one upper orbit joins the two named feet.

    The residual ``F(x_to - lam) - F(x_from - lam)`` is scanned over the
    ``lam`` values for which the orbit leaves ``x_from`` upward and lands at
    ``x_to`` (for the invisible fold: ``x_from - lam`` in ``(-1/2, 0)`` and
    ``x_to - lam`` in ``(0, 1)``), then refined by Brent's method.
    """
    tau = TauKind.parse(tau)
    if not beta > 0.0:
        raise NoBracketError("connections need beta > 0")
    start, end = _pair(pair)
    xa, xb = _foot(start, alpha, beta), _foot(end, alpha, beta)
    a1, a2 = tau.coefficients

    def F(u):
        return a1 * u * u / 2.0 + a2 * u ** 3 / 3.0

    def resid(lam):
        return F(xb - lam) - F(xa - lam)

    if tau is TauKind.INV:
        lo, hi = max(xa, xb - 1.0, -1.0), min(xb, xa + 0.5, 1.0)
    else:
        lo, hi = max(xa, -1.0), min(xb, 1.0)
    if not lo < hi:
        raise NoBracketError(f"empty admissible range for {start}->{end}")
    grid = np.linspace(lo, hi, 401)[1:-1]
    vals = resid(grid)
    idx = np.flatnonzero(vals[:-1] * vals[1:] <= 0.0)
    if idx.size == 0:
        raise NoBracketError(f"no sign change of the {start}->{end} residual")
    k = idx[0]
    if vals[k] == 0.0:
        return float(grid[k])
    return brentq(resid, grid[k], grid[k + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)


# --- cycle fold --------------------------------------------------------------

@dataclass(frozen=True)
class CycleFold:
    """Parameter and abscissa where two fixed points of the return map merge."""

    lam: float
    x: float
    derivative: float
    residual: float


def _domain_arrays(lam, alpha: float, beta: float):
    lam = np.asarray(lam, dtype=float)
    i1 = lower_fold_abscissa(alpha, beta)
    lo = lam - 0.5
    lo = np.where(beta - lam < 1.0, np.maximum(lo, lam + upper_partner_inverse(np.clip(beta - lam, 0, 1 - 1e-16))), lo)
    hi = np.where(i1 <= lam, lam, lam + upper_partner_inverse(np.clip(i1 - lam, 0, 1 - 1e-16)))
    lo = np.maximum(lo, -1.0)
    return lo, hi


def _system(lam: float, alpha: float, beta: float) -> FilippovSystem:
    eps = min(-1.0, alpha - 1.0)
    return FilippovSystem(FamilyParams(TauKind.INV, lam, alpha, beta, eps))


def _row_extrema(s, g, dg):
    """Grid extrema of ``g`` in one row: (index, vertex s, vertex value, kind)."""
    out = []
    ok = np.isfinite(dg) & np.isfinite(g)
    for k in np.flatnonzero(ok[:-1] & ok[1:] & (dg[:-1] * dg[1:] < 0.0)):
        kind = 1 if dg[k] > 0 else -1  # +1: local max of g
        j = min(max(k, 1), len(s) - 2)
        if not (ok[j - 1] and ok[j + 1]):
            continue
        y0, y1, y2 = g[j - 1], g[j], g[j + 1]
        den = y0 - 2.0 * y1 + y2
        shift = 0.0 if den == 0.0 else 0.5 * (y0 - y2) / den
        shift = max(-1.0, min(1.0, shift))
        value = y1 - 0.25 * (y0 - y2) * shift
        ds = s[1] - s[0]
        out.append((k, s[j] + shift * ds, value, kind))
    return out


class _Extremum:
    """Exact extremum value of ``eta(x) - x`` near a reference position, as a
    function of ``lam``."""

    def __init__(self, alpha: float, beta: float, s_ref: float, kind: int, n_x: int):
        self.alpha, self.beta = alpha, beta
        self.s_ref, self.kind = s_ref, kind
        self.s = np.linspace(0.0, 1.0, n_x + 2)[1:-1]
        self.last_x = math.nan

    def __call__(self, lam: float) -> float:
        lo, hi = _domain_arrays(lam, self.alpha, self.beta)
        lo, hi = float(lo), float(hi)
        if not lo < hi:
            return math.nan
        xs = lo + self.s * (hi - lo)
        eta, deta = eta_arrays(lam, self.alpha, self.beta, xs)
        g, dg = eta - xs, deta - 1.0
        cands = [e for e in _row_extrema(self.s, g, dg) if e[3] == self.kind]
        if not cands:
            return math.nan
        k = min(cands, key=lambda e: abs(e[1] - self.s_ref))[0]
        system = _system(lam, self.alpha, self.beta)
        slope = lambda x: ratio_law_derivative(system, x) - 1.0
        try:
            xc = brentq(slope, xs[k], xs[k + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps)
            self.last_x = xc
            return return_map(system, xc) - xc
        except (ValueError, ReturnMapDomainError):
            return math.nan


def _fold_brackets(alpha, beta, lams, n_x):
    """Scan ``lam`` and return brackets ``(lam_a, lam_b, s_ref, kind)`` where an
    extremum of ``eta(x) - x`` changes sign, including thin windows that fit
    between two grid values."""
    s = np.linspace(0.0, 1.0, n_x + 2)[1:-1]
    lo, hi = _domain_arrays(lams, alpha, beta)
    valid = lo < hi
    xs = lo[:, None] + s[None, :] * (hi - lo)[:, None]
    eta, deta = eta_arrays(lams[:, None], alpha, beta, xs)
    g, dg = eta - xs, deta - 1.0
    rows = [(_row_extrema(s, g[r], dg[r]) if valid[r] else []) for r in range(len(lams))]
    brackets = []
    for r in range(len(lams) - 1):
        for (_, sc, val, kind) in rows[r]:
            nxt = [e for e in rows[r + 1] if e[3] == kind and abs(e[1] - sc) < 0.1]
            if not nxt:
                continue
            val2 = min(nxt, key=lambda e: abs(e[1] - sc))[2]
            if val * val2 < 0.0:
                brackets.append((lams[r], lams[r + 1], sc, kind))
                continue
            if r == 0:
                continue
            prev = [e for e in rows[r - 1] if e[3] == kind and abs(e[1] - sc) < 0.1]
            if not prev:
                continue
            val0 = min(prev, key=lambda e: abs(e[1] - sc))[2]
            if val0 * val > 0.0 and abs(val) < abs(val0) and abs(val) < abs(val2):
                brackets.append((lams[r - 1], lams[r + 1], sc, -2 * kind))
    return brackets


def locate_cycle_fold(
    tau: TauKind | str,
    alpha: float,
    beta: float,
    lambda_range: tuple[float, float] | None = None,
    *,
    n_lambda: int = 240,
    n_x: int = 500,
) -> CycleFold:
    """Largest ``lam`` in ``lambda_range`` where two return-map fixed points merge.

    Folds are zeros, in ``lam``, of the value of ``eta(x) - x`` at one of its
    interior extrema. The extrema are tracked on a ``lam`` grid; sign changes
    and near-misses (thin windows between grid values) are refined by Brent's
    method. The default range is the open interval between the first
    ``lam`` where the upper orbit through ``i`` or the saddle loop forms and
    the ``i``-to-``j`` connection.
    """
    tau = TauKind.parse(tau)
    if tau is not TauKind.INV or beta <= 0.0:
        raise NoCycleWindowError("the return map exists only for the invisible fold with beta > 0")
    if lambda_range is None:
        lambda_range = default_fold_range(alpha, beta)
    lo, hi = lambda_range
    lo, hi = max(lo, -1.0 + 1e-12), min(hi, 1.0 - 1e-12)
    if not lo < hi:
        raise NoCycleWindowError("empty search range")
    lams = np.linspace(lo, hi, n_lambda + 2)[1:-1]
    folds: list[CycleFold] = []
    for la, lb, sc, kind in _fold_brackets(alpha, beta, lams, n_x):
        if abs(kind) == 2:
            psi = _Extremum(alpha, beta, sc, kind // 2, n_x)
            sgn = math.copysign(1.0, psi(0.5 * (la + lb)) or 1.0)
            res = minimize_scalar(lambda t: sgn * _nan_big(psi(t)), bounds=(la, lb),
                                  method="bounded", options={"xatol": 1e-14})
            if not sgn * res.fun < 0.0:
                continue
            pieces = [(la, res.x), (res.x, lb)]
        else:
            psi = _Extremum(alpha, beta, sc, kind, n_x)
            pieces = [(la, lb)]
        for a, b in pieces:
            fa, fb = psi(a), psi(b)
            if not (np.isfinite(fa) and np.isfinite(fb)) or fa * fb > 0.0:
                continue
            lam_f = brentq(psi, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
            gap = psi(lam_f)
            x_c = psi.last_x
            system = _system(lam_f, alpha, beta)
            folds.append(CycleFold(lam_f, x_c, ratio_law_derivative(system, x_c), abs(gap)))
    if not folds:
        raise NoCycleWindowError(
            f"no two-cycle window for alpha={alpha}, beta={beta} in ({lo:.6g}, {hi:.6g})"
        )
    return max(folds, key=lambda f: f.lam)


def _nan_big(v: float) -> float:
    return 1e3 if not np.isfinite(v) else v


def default_fold_range(alpha: float, beta: float) -> tuple[float, float]:
    """``(max(i1, lam0), i-to-j connection)``: the stretch where the fold is expected."""
    start = max(lower_fold_abscissa(alpha, beta), lambda0(beta))
    return start, solve_connection_lambda(TauKind.INV, alpha, beta, "i->j")


@functools.lru_cache(maxsize=4096)
def _cached_fold(alpha: float, beta: float, lambda_range) -> CycleFold | None:
    try:
        return locate_cycle_fold(TauKind.INV, alpha, beta, lambda_range)
    except NoCycleWindowError:
        return None


def find_cycle_fold(
    tau: TauKind | str,
    alpha: float,
    beta: float,
    lambda_range: tuple[float, float] | None = None,
) -> float:
    """``lam`` of the cycle fold (cached); raises :class:`NoCycleWindowError`."""
    tau = TauKind.parse(tau)
    if tau is not TauKind.INV or beta <= 0.0:
        raise NoCycleWindowError("the return map exists only for the invisible fold with beta > 0")
    fold = _cached_fold(float(alpha), float(beta), None if lambda_range is None else tuple(lambda_range))
    if fold is None:
        rng = lambda_range or default_fold_range(alpha, beta)
        raise NoCycleWindowError(
            f"no two-cycle window for alpha={alpha}, beta={beta} in ({rng[0]:.6g}, {rng[1]:.6g})"
        )
    return fold.lam


# --- boundaries --------------------------------------------------------------

@dataclass(frozen=True)
class Boundaries:
    """Ordered boundary values in ``lam`` for one ``(alpha, beta)``.

    ``values`` is a tuple of ``(name, value)``; a ``None`` value marks a
    boundary that does not occur (no cycle fold), in which case the interval
    it would open is empty. ``first_index`` is the case index below the first
    boundary. ``printed`` holds closed forms that were superseded.
    """

    tau: TauKind
    regime: Regime
    alpha: float
    beta: float
    values: tuple[tuple[str, float | None], ...]
    first_index: int
    printed: dict = field(default_factory=dict, compare=False)
    notes: tuple[str, ...] = ()

    def as_dict(self) -> dict[str, float | None]:
        return dict(self.values)

    def defined(self) -> list[tuple[str, float]]:
        return [(n, v) for n, v in self.values if v is not None]

    def label_for(self, lam: float, tol: float = 1e-9) -> CaseLabel:
        return CaseLabel(self.regime.theorem, _index_for(lam, self.values, self.first_index, tol))


def _index_for(lam: float, values, first: int, tol: float) -> int:
    hits = [(k, v) for k, (_, v) in enumerate(values)
            if v is not None and abs(lam - v) <= tol * max(1.0, abs(v))]
    if hits:
        if len({round(v, 15) for _, v in hits}) > 1:
            names = [values[k][0] for k, _ in hits]
            raise AmbiguityError(f"lambda={lam} is within tolerance of {names}")
        return first + 2 * hits[0][0] + 1
    below = 0
    eff = -math.inf
    for k, (_, v) in enumerate(values):
        eff = eff if v is None else v
        if lam > eff:
            below = k + 1
        else:
            break
    return first + 2 * below


_FOLD_NAME = {Regime.THM1: "L3", Regime.THM2: "M3", Regime.THM3: "M3"}


def _base_values(tau: TauKind, regime: Regime, alpha: float, beta: float):
    """Boundary list without the cycle fold (``None`` in its slot)."""
    printed: dict[str, float] = {}
    if beta < 0.0:
        return (("e1", lower_fold_abscissa(alpha, beta)),), 1, printed
    if beta == 0.0:
        return (("s1", 0.0),), 4, printed
    b = beta
    if tau is TauKind.VIS:
        return (("h1", -b), ("i1", lower_fold_abscissa(alpha, b)), ("j1", b)), 7, printed
    if regime is Regime.THM1:
        l2 = solve_connection_lambda(tau, alpha, b, "i->j")
        printed["L2"] = formula_L2_printed(b)
        vals = (("-beta", -b), ("L0", formula_L0(b)), ("L1", formula_L1(b)),
                ("L3", None), ("L2", l2), ("beta", b))
    elif regime is Regime.THM2:
        vals = (("-beta", -b), ("M0", formula_M0(alpha, b)), ("M1", formula_M1(alpha, b)),
                ("i1", lower_fold_abscissa(alpha, b)), ("M3", None),
                ("M2", formula_M2(alpha, b)), ("beta", b))
    else:
        vals = (("-beta", -b), ("M0", formula_M0(alpha, b)), ("i1", lower_fold_abscissa(alpha, b)),
                ("M1", formula_M1(alpha, b)), ("M3", None),
                ("M2", formula_M2(alpha, b)), ("beta", b))
    return vals, 7, printed


def _fold_slot(values) -> tuple[int, float, float] | None:
    for k, (name, _) in enumerate(values):
        if name in ("L3", "M3"):
            return k, values[k - 1][1], values[k + 1][1]
    return None


def fold_bracket(tau: TauKind | str, alpha: float, beta: float) -> tuple[str, float, float] | None:
    """Name and neighbouring boundaries of the cycle-fold slot, if the regime has one."""
    values = boundaries(tau, alpha, beta, with_fold=False).values
    slot = _fold_slot(values)
    return None if slot is None else (values[slot[0]][0], slot[1], slot[2])


@functools.lru_cache(maxsize=4096)
def _boundaries(tau: TauKind, alpha: float, beta: float, tol: float, with_fold: bool) -> Boundaries:
    regime = regime_of(tau, alpha, beta, tol)
    values, first, printed = _base_values(tau, regime, alpha, beta)
    notes: list[str] = []
    slot = _fold_slot(values)
    if slot is not None:
        k, a, b = slot
        name = values[k][0]
        if with_fold:
            fold = _cached_fold(alpha, beta, (a, b))
            if fold is None:
                notes.append(f"{name}: no two-cycle window in ({a:.9g}, {b:.9g}); interval before the fold is empty")
            else:
                values = values[:k] + ((name, fold.lam),) + values[k + 1:]
        else:
            notes.append(f"{name}: not computed")
    if "L2" in printed:
        l2 = dict(values)["L2"]
        notes.append(
            f"L2: printed closed form gives {printed['L2']:.10g}, "
            f"connection root gives {l2:.10g} (deviation {printed['L2'] - l2:+.3e})"
        )
    defined = [v for _, v in values if v is not None]
    if any(b2 <= b1 for b1, b2 in zip(defined, defined[1:])):
        raise OrderingError(f"boundaries out of order for {regime.name}: {values}")
    return Boundaries(tau, regime, alpha, beta, values, first, printed, tuple(notes))


def boundaries(
    tau: TauKind | str,
    alpha: float,
    beta: float,
    *,
    tol: float = 1e-9,
    with_fold: bool = True,
) -> Boundaries:
    """Ordered boundary values in ``lam`` for the regime of ``(alpha, beta)``.

    The L/M closed forms are used except for ``L2``, which is taken from the
    ``i``-to-``j`` connection root; the printed ``L2`` form is kept in
    ``printed`` and flagged in ``notes``. ``L3``/``M3`` come from
    :func:`locate_cycle_fold` on the stretch between their neighbours.
    """
    return _boundaries(TauKind.parse(tau), float(alpha), float(beta), float(tol), bool(with_fold))


def classify_case(
    tau: TauKind | str,
    lam: float,
    alpha: float,
    beta: float,
    tol: float = 1e-9,
    *,
    epsilon0: float = -1.0,
) -> CaseLabel:
    """Case label of ``(lam, alpha, beta)``; equalities are decided within ``tol``
    (relative)."""
    tau = TauKind.parse(tau)
    FamilyParams(tau, lam, alpha, beta, epsilon0)
    base = boundaries(tau, alpha, beta, tol=tol, with_fold=False)
    slot = _fold_slot(base.values)
    if slot is not None and slot[1] < lam < slot[2]:
        base = boundaries(tau, alpha, beta, tol=tol, with_fold=True)
    return base.label_for(lam, tol)


# --- topological classes -----------------------------------------------------

def topological_class(label: CaseLabel) -> TopologicalClass:
    """Representative of the topological class of ``label``.

    Invisible regimes 2 and 3: cases 1-11 map to the same index of regime 1,
    12-14 are classes of their own, 15-16 map to 13-14 of regime 1 and
    17-21 map to 15-19 of regime 1. Visible regimes are all distinct.
    """
    t, k = label.theorem, label.index
    if t in (2, 3):
        if k <= 11:
            return TopologicalClass(CaseLabel(1, k))
        if k >= 15:
            return TopologicalClass(CaseLabel(1, k - 2))
    return TopologicalClass(label)


# --- witnesses and enumeration -----------------------------------------------

_WITNESS_EPSILON0 = -3.0
_NEG_BETA, _POS_BETA = -0.3, 0.5


def _witness_alpha(regime: Regime, beta: float, delta: float) -> float:
    if regime.tau is TauKind.VIS:
        return {4: -1.0, 5: -1.0 + delta, 6: -1.0 - delta}[regime.theorem]
    ref = alpha0(beta, allow_limit=True)
    if regime is Regime.THM1:
        return ref
    return ref + delta if regime is Regime.THM2 else ref - delta


def _fold_witness(regime: Regime) -> tuple[float, float] | None:
    """An ``(alpha, beta)`` in the regime with a cycle fold between its neighbours."""
    betas = (0.8, 0.85, 0.75, 0.7, 0.6, 0.5)
    deltas = (0.0,) if regime is Regime.THM1 else (0.02, 0.05, 0.1, 0.2)
    for b in betas:
        for d in deltas:
            a = _witness_alpha(regime, b, d)
            if not -1.0 + _WITNESS_EPSILON0 < a < 0.0:
                continue
            try:
                bd = boundaries(TauKind.INV, a, b)
            except (OrderingError, NoBracketError):
                continue
            if all(v is not None for _, v in bd.values):
                return a, b
    return None


def _lambda_points(values, first: int) -> list[tuple[int, float]]:
    """Witness ``lam`` for every case index: boundary values and midpoints."""
    defined = [(k, v) for k, (_, v) in enumerate(values) if v is not None]
    out = []
    prev = -1.0
    for pos, (k, v) in enumerate(defined):
        gap_lo = prev if pos else max(-1.0, v - 0.1)
        # interval below boundary k, then boundary k itself
        if pos == 0 or defined[pos - 1][0] == k - 1:
            out.append((first + 2 * k, 0.5 * (gap_lo + v)))
        out.append((first + 2 * k + 1, v))
        prev = v
    last_k = defined[-1][0]
    top = min(1.0, prev + 0.1)
    out.append((first + 2 * (last_k + 1), 0.5 * (prev + top)))
    return out


def case_witnesses(
    tau: TauKind | str, regime: Regime | int | str
) -> list[tuple[CaseLabel, tuple[float, float, float]]]:
    """One ``(lam, alpha, beta)`` per reachable case of a regime, with its label."""
    tau = TauKind.parse(tau)
    regime = Regime.parse(regime)
    if regime.tau is not tau:
        raise ValueError(f"regime {regime.name} does not belong to tau={tau.value}")
    rows: list[tuple[float, float]] = []
    for b in (_NEG_BETA, 0.0):
        rows.append((_witness_alpha(regime, b, 0.5 if tau is TauKind.VIS else 0.1), b))
    if tau is TauKind.INV:
        rows.append(_fold_witness(regime) or (_witness_alpha(regime, _POS_BETA, 0.45), _POS_BETA))
    else:
        rows.append((_witness_alpha(regime, _POS_BETA, 0.5), _POS_BETA))
    out = []
    for a, b in rows:
        bd = boundaries(tau, a, b)
        for _, lam in _lambda_points(bd.values, bd.first_index):
            label = classify_case(tau, lam, a, b, epsilon0=_WITNESS_EPSILON0)
            out.append((label, (lam, a, b)))
    return out


def enumerate_cases(tau: TauKind | str, regime: Regime | int | str) -> list[CaseLabel]:
    """Labels realised by one witness per case (classified, not assumed)."""
    seen: list[CaseLabel] = []
    for label, _ in case_witnesses(tau, regime):
        if label not in seen:
            seen.append(label)
    return seen


def count_fixed_points(tau: TauKind | str, lam: float, alpha: float, beta: float) -> int:
    tau = TauKind.parse(tau)
    if tau is not TauKind.INV or beta <= 0.0:
        return 0
    return len(find_canard_cycles(_system(lam, alpha, beta)))


# --- sweeps ------------------------------------------------------------------

@dataclass
class Diagram:
    """Labelled ``(lam, beta)`` grid for one ``alpha``.

    ``labels`` and ``classes`` have shape ``(len(betas), len(lambdas))``.
    ``near_boundary`` marks cells within half a cell of a boundary value.
    """

    tau: TauKind
    alpha: float
    lambdas: np.ndarray
    betas: np.ndarray
    labels: np.ndarray
    classes: np.ndarray
    near_boundary: np.ndarray
    polylines: dict[str, list[tuple[float, float]]]
    rows: list[Boundaries]

    def histogram(self) -> dict[str, int]:
        return dict(sorted(Counter(self.labels.ravel().tolist()).items()))

    def generic_labels(self) -> set[str]:
        return set(self.labels[~self.near_boundary].ravel().tolist())

    def regime_name(self) -> str:
        return ",".join(sorted({r.regime.name for r in self.rows}))


def _grid(lo: float, hi: float, n: int) -> np.ndarray:
    return np.array([0.5 * (lo + hi)]) if n == 1 else np.linspace(lo, hi, n)


def sweep_grid(
    tau: TauKind | str,
    alpha: float,
    lambda_range: tuple[float, float],
    beta_range: tuple[float, float],
    resolution: tuple[int, int] | int = (200, 200),
    tol: float = 1e-9,
) -> Diagram:
    """Classify every cell of a ``(lam, beta)`` grid at fixed ``alpha``.

    ``resolution`` is ``(n_lambda, n_beta)``; the boundary list is computed
    once per ``beta`` row.
    """
    tau = TauKind.parse(tau)
    nl, nb = (resolution, resolution) if isinstance(resolution, int) else resolution
    lams = _grid(*lambda_range, nl)
    betas = _grid(*beta_range, nb)
    dl = (lams[1] - lams[0]) if nl > 1 else 0.0
    labels = np.empty((nb, nl), dtype=object)
    classes = np.empty((nb, nl), dtype=object)
    near = np.zeros((nb, nl), dtype=bool)
    polylines: dict[str, list[tuple[float, float]]] = {}
    rows = []
    for r, b in enumerate(betas):
        bd = boundaries(tau, alpha, float(b), tol=tol)
        rows.append(bd)
        for name, v in bd.defined():
            polylines.setdefault(name, []).append((v, float(b)))
            near[r] |= np.abs(lams - v) < 0.5 * dl
        for c, lam in enumerate(lams):
            label = bd.label_for(float(lam), tol)
            labels[r, c] = str(label)
            classes[r, c] = str(topological_class(label))
    if tau is TauKind.INV and len(betas) > 1:
        ref = np.array([alpha0(float(b), allow_limit=True) for b in betas]) - alpha
        for r in np.flatnonzero(ref[:-1] * ref[1:] < 0):
            bstar = brentq(lambda b: alpha0(b, allow_limit=True) - alpha, betas[r], betas[r + 1])
            polylines.setdefault("alpha0", []).extend([(float(lams[0]), bstar), (float(lams[-1]), bstar)])
    return Diagram(tau, float(alpha), lams, betas, labels, classes, near, polylines, rows)


@dataclass(frozen=True)
class SphereSample:
    """A point ``(lam, mu, beta)`` with ``mu = alpha + 1`` on a small sphere."""

    point: tuple[float, float, float]
    label: CaseLabel
    source: str

    @property
    def direction(self) -> tuple[float, float, float]:
        r = math.sqrt(sum(c * c for c in self.point))
        return tuple(c / r for c in self.point)


def _fibonacci(n: int) -> np.ndarray:
    k = np.arange(n) + 0.5
    z = 1.0 - 2.0 * k / n
    phi = k * math.pi * (3.0 - math.sqrt(5.0))
    rho = np.sqrt(1.0 - z * z)
    return np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])


def _regime_mu(tau: TauKind, beta: float) -> float:
    return 0.0 if tau is TauKind.VIS else mu0(beta, allow_limit=True)


def _boundary_names(tau: TauKind, regime: Regime, beta: float) -> list[str]:
    values, _, _ = _base_values(tau, regime, -1.0 if regime.theorem in (1, 4) else -0.5, beta)
    return [n for n, _ in values if n not in ("L3", "M3")]


def _boundary_value(tau: TauKind, name: str, alpha: float, beta: float) -> float:
    regime = regime_of(tau, alpha, beta)
    values, _, _ = _base_values(tau, regime, alpha, beta)
    return dict(values)[name]


def sweep_sphere(
    tau: TauKind | str,
    radius: float = 0.05,
    samples: int = 10_000,
    *,
    boundary_points: bool = True,
    curve_samples: int = 24,
    tol: float = 1e-9,
) -> list[SphereSample]:
    """Classify points of the sphere ``lam^2 + mu^2 + beta^2 = radius^2``.

    Samples are a Fibonacci lattice. With ``boundary_points`` the regime
    surface and every boundary surface are intersected with the sphere by
    one-dimensional root finding, so codimension-one and -two cases appear.
    """
    tau = TauKind.parse(tau)
    r = float(radius)
    out: list[SphereSample] = []

    def add(lam: float, mu: float, beta: float, source: str) -> None:
        alpha = mu - 1.0
        if not (-1 < lam < 1 and abs(beta) < BETA_BOUND and alpha < 0):
            return
        try:
            label = classify_case(tau, lam, alpha, beta, tol, epsilon0=min(-1.0, alpha - 1.0))
        except (AmbiguityError, OrderingError, NoBracketError, ValueError):
            return
        out.append(SphereSample((lam, mu, beta), label, source))

    for lam, mu, beta in r * _fibonacci(samples):
        add(float(lam), float(mu), float(beta), "sample")
    if not boundary_points:
        return out
    # beta = 0 circle, including the poles (0, +-r, 0)
    for th in np.linspace(0.0, 2.0 * math.pi, 4 * curve_samples, endpoint=False):
        add(r * math.cos(th), r * math.sin(th), 0.0, "beta=0")
    for lam in (-r, r):
        add(lam, 0.0, 0.0, "beta=0,regime")
    betas = np.concatenate([np.linspace(-r, 0, curve_samples + 1)[1:-1], np.linspace(0, r, curve_samples + 1)[1:-1]])
    # regime surface
    for b in betas:
        mu = _regime_mu(tau, float(b))
        rest = r * r - mu * mu - b * b
        if rest > 0:
            for sgn in (-1.0, 1.0):
                add(sgn * math.sqrt(rest), mu, float(b), "regime")
    # boundary surfaces inside each open regime, and on the regime surface
    for b in betas:
        b = float(b)
        for regime in _regimes(tau):
            if regime.theorem in (1, 4):
                continue
            for name in _boundary_names(tau, regime, b):
                _sphere_in_regime(tau, regime, name, b, r, add)
    # points on the regime surface where a boundary is met (codimension two)
    for regime in _regimes(tau):
        if regime.theorem not in (1, 4):
            continue
        for sign in (-1.0, 1.0):
            for name in _boundary_names(tau, regime, sign * r / 2):
                _sphere_regime_corner(tau, name, sign, r, add)
    return out


def _regimes(tau: TauKind) -> tuple[Regime, ...]:
    return (Regime.THM1, Regime.THM2, Regime.THM3) if tau is TauKind.INV else (Regime.THM4, Regime.THM5, Regime.THM6)


def _sphere_in_regime(tau, regime, name, b, r, add):
    ref = _regime_mu(tau, b)
    span = math.sqrt(max(r * r - b * b, 0.0))
    lo, hi = (ref, span) if regime.theorem in (2, 5) else (-span, ref)
    if not lo < hi:
        return

    def resid(mu):
        try:
            lam = _boundary_value(tau, name, mu - 1.0, b)
        except (NoBracketError, ValueError):
            return math.nan
        return lam * lam + mu * mu + b * b - r * r

    grid = np.linspace(lo, hi, 66)[1:-1]
    vals = np.array([resid(m) for m in grid])
    for k in np.flatnonzero(np.isfinite(vals[:-1]) & np.isfinite(vals[1:]) & (vals[:-1] * vals[1:] < 0)):
        mu = brentq(resid, grid[k], grid[k + 1], xtol=1e-15)
        add(_boundary_value(tau, name, mu - 1.0, b), mu, b, f"surface:{name}")


def _sphere_regime_corner(tau, name, sign, r, add):
    def resid(b):
        mu = _regime_mu(tau, b)
        try:
            lam = _boundary_value(tau, name, mu - 1.0, b)
        except (NoBracketError, ValueError):
            return math.nan
        return lam * lam + mu * mu + b * b - r * r

    grid = sign * np.linspace(0.0, r, 66)[1:-1]
    vals = np.array([resid(float(b)) for b in grid])
    for k in np.flatnonzero(np.isfinite(vals[:-1]) & np.isfinite(vals[1:]) & (vals[:-1] * vals[1:] < 0)):
        b = brentq(lambda t: resid(t), grid[k], grid[k + 1], xtol=1e-15)
        mu = _regime_mu(tau, b)
        add(_boundary_value(tau, name, mu - 1.0, b), mu, b, f"corner:{name}")
