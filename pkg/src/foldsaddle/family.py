"""The two-field normal form with a fold above the switching line and a saddle below.

The upper field is ``X = (1, a1*u + a2*u**2)`` with ``u = x - lam``; the lower
field is linear with a saddle at ``(0, -beta)`` whose eigenvalues are ``alpha``
and ``1``. The switching function is ``f(x, y) = y``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "TauKind",
    "Side",
    "FoldVisibility",
    "ParameterError",
    "NotAFoldError",
    "WindowError",
    "Window",
    "FamilyParams",
    "FilippovSystem",
    "KeyPoints",
    "make_system",
    "lie_derivative",
    "key_points",
    "fold_kind",
    "lower_fold_abscissa",
]

BETA_BOUND = math.sqrt(3.0) / 2.0


class TauKind(str, Enum):
    """Type of the upper fold: invisible (``inv``) or visible (``vis``)."""

    INV = "inv"
    VIS = "vis"

    @property
    def coefficients(self) -> tuple[float, float]:
        """Linear and quadratic coefficients of ``X.f`` in ``u = x - lam``."""
        return (-1.0, 1.0) if self is TauKind.INV else (1.0, 0.0)

    @classmethod
    def parse(cls, value: "TauKind | str") -> "TauKind":
        if isinstance(value, TauKind):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ParameterError(f"tau must be 'inv' or 'vis', got {value!r}") from None


class Side(str, Enum):
    UPPER = "upper"
    LOWER = "lower"

    @classmethod
    def parse(cls, value: "Side | str") -> "Side":
        return value if isinstance(value, Side) else cls(str(value).lower())


class FoldVisibility(str, Enum):
    VISIBLE = "visible"
    INVISIBLE = "invisible"


class ParameterError(ValueError):
    """A family parameter lies outside its admissible range."""


class NotAFoldError(ValueError):
    """The queried point is not a quadratic tangency of the requested field."""


class WindowError(ValueError):
    """A point lies outside the analysis window."""


@dataclass(frozen=True)
class Window:
    """Closed rectangle ``[xmin, xmax] x [ymin, ymax]``."""

    xmin: float = -1.0
    xmax: float = 1.0
    ymin: float = -1.0
    ymax: float = 1.0

    def __post_init__(self) -> None:
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise ValueError("window must have positive width and height")

    def contains(self, x: float, y: float, slack: float = 1e-12) -> bool:
        return (
            self.xmin - slack <= x <= self.xmax + slack
            and self.ymin - slack <= y <= self.ymax + slack
        )


@dataclass(frozen=True)
class FamilyParams:
    """Parameters of the family.

    Attributes
    ----------
    tau : TauKind
        Fold type of the upper field.
    lam : float
        Abscissa of the upper fold, in ``(-1, 1)``.
    alpha : float
        Stable eigenvalue of the lower saddle, in ``(-1 + epsilon0, 0)``.
    beta : float
        Vertical offset of the saddle, ``|beta| < sqrt(3)/2``.
    epsilon0 : float
        Negative offset fixing the lower end of the ``alpha`` range.
    """

    tau: TauKind
    lam: float
    alpha: float
    beta: float
    epsilon0: float = -1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "tau", TauKind.parse(self.tau))
        for name in ("lam", "alpha", "beta", "epsilon0"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if not self.epsilon0 < 0.0:
            raise ParameterError(f"epsilon0 must be negative, got {self.epsilon0}")
        if not -1.0 < self.lam < 1.0:
            raise ParameterError(f"lambda must lie in (-1, 1), got {self.lam}")
        if not -BETA_BOUND < self.beta < BETA_BOUND:
            raise ParameterError(
                f"beta must lie in (-sqrt(3)/2, sqrt(3)/2), got {self.beta}"
            )
        lo = -1.0 + self.epsilon0
        if not lo < self.alpha < 0.0:
            raise ParameterError(f"alpha must lie in ({lo}, 0), got {self.alpha}")


def lower_fold_abscissa(alpha: float, beta: float) -> float:
    """Abscissa where the lower field is tangent to the switching line."""
    return (1.0 + alpha) * beta / (1.0 - alpha)


@dataclass(frozen=True)
class FilippovSystem:
    """The upper/lower field pair together with an analysis window."""

    params: FamilyParams
    window: Window = field(default_factory=Window)

    @property
    def tau(self) -> TauKind:
        return self.params.tau

    @property
    def lam(self) -> float:
        return self.params.lam

    @property
    def alpha(self) -> float:
        return self.params.alpha

    @property
    def beta(self) -> float:
        return self.params.beta

    @property
    def a1(self) -> float:
        return self.tau.coefficients[0]

    @property
    def a2(self) -> float:
        return self.tau.coefficients[1]

    @property
    def lower_matrix(self) -> np.ndarray:
        """Linear part of the lower field (symmetric, eigenvalues ``alpha`` and 1)."""
        a = 0.5 * (1.0 + self.alpha)
        c = 0.5 * (self.alpha - 1.0)
        return np.array([[a, c], [c, a]])

    @property
    def saddle(self) -> tuple[float, float]:
        return (0.0, -self.beta)

    @property
    def lower_fold(self) -> float:
        return lower_fold_abscissa(self.alpha, self.beta)

    @property
    def secondary_fold(self) -> float | None:
        """The second zero ``lam + 1`` of ``X.f`` for the invisible case."""
        return self.lam + 1.0 if self.tau is TauKind.INV else None

    def secondary_fold_in_window(self) -> bool:
        s = self.secondary_fold
        return s is not None and self.window.xmin <= s <= self.window.xmax

    # --- fields -----------------------------------------------------------
    def upper(self, x, y):
        """Upper field ``X`` (vectorised)."""
        x = np.asarray(x, dtype=float)
        u = x - self.lam
        return np.ones_like(x + 0.0 * np.asarray(y, dtype=float)), self.a1 * u + self.a2 * u * u

    def lower(self, x, y):
        """Lower field ``Y`` (vectorised)."""
        x = np.asarray(x, dtype=float)
        z = np.asarray(y, dtype=float) + self.beta
        a = 0.5 * (1.0 + self.alpha)
        c = 0.5 * (self.alpha - 1.0)
        return a * x + c * z, c * x + a * z

    def xf(self, x):
        """``X.f`` on the line ``y = const`` (it does not depend on ``y``)."""
        u = np.asarray(x, dtype=float) - self.lam
        return self.a1 * u + self.a2 * u * u

    def yf(self, x, y=0.0):
        """``Y.f`` at ``(x, y)``."""
        return self.lower(x, y)[1]

    def divergence(self, side: Side | str, x, y):
        side = Side.parse(side)
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        value = 0.0 if side is Side.UPPER else 1.0 + self.alpha
        return np.full(shape, value)

    def check_window(self, x: float, y: float) -> None:
        if not self.window.contains(x, y):
            raise WindowError(f"point ({x}, {y}) lies outside the analysis window")


def make_system(
    tau: TauKind | str,
    lam: float,
    alpha: float,
    beta: float,
    *,
    epsilon0: float = -1.0,
    window: Window | None = None,
) -> FilippovSystem:
    """Build a :class:`FilippovSystem`, validating every parameter bound."""
    params = FamilyParams(TauKind.parse(tau), lam, alpha, beta, epsilon0)
    return FilippovSystem(params, window or Window())


def lie_derivative(system: FilippovSystem, side: Side | str, point, order: int = 1) -> float:
    """Iterated Lie derivative of ``f = y`` along the upper or lower field.

    For the upper field ``X.f = g(u)`` with ``x' = 1``, so higher orders are
    plain ``x``-derivatives of ``g``. The lower field is affine,
    ``Y(p) = A (p - S)``, hence ``Y^n.f(p) = e2 . A^n (p - S)``.
    """
    if order not in (1, 2, 3):
        raise ValueError("order must be 1, 2 or 3")
    side = Side.parse(side)
    x, y = float(point[0]), float(point[1])
    system.check_window(x, y)
    if side is Side.UPPER:
        u = x - system.lam
        a1, a2 = system.a1, system.a2
        return (a1 * u + a2 * u * u, a1 + 2.0 * a2 * u, 2.0 * a2)[order - 1]
    A = system.lower_matrix
    v = np.array([x, y + system.beta])
    return float((np.linalg.matrix_power(A, order) @ v)[1])


@dataclass(frozen=True)
class KeyPoints:
    """Named points: the upper fold ``d``, saddle ``S``, separatrix feet ``h``
    and ``j`` (only for ``beta > 0``) and the lower fold (``e`` when
    ``beta < 0``, ``i`` when ``beta > 0``)."""

    d: tuple[float, float]
    S: tuple[float, float]
    h: tuple[float, float] | None
    j: tuple[float, float] | None
    e_or_i: tuple[float, float] | None
    lower_fold_name: str | None

    def as_dict(self) -> dict[str, tuple[float, float]]:
        out = {"d": self.d, "S": self.S}
        if self.h is not None:
            out["h"] = self.h
            out["j"] = self.j
        if self.e_or_i is not None:
            out[self.lower_fold_name] = self.e_or_i
        return out


def key_points(system: FilippovSystem) -> KeyPoints:
    beta = system.beta
    h = j = fold = None
    name = None
    if beta > 0:
        h, j = (-beta, 0.0), (beta, 0.0)
    if beta != 0:
        fold = (system.lower_fold, 0.0)
        name = "i" if beta > 0 else "e"
    return KeyPoints((system.lam, 0.0), (0.0, -beta), h, j, fold, name)


def fold_kind(
    system: FilippovSystem, side: Side | str, point, tol: float = 1e-12
) -> FoldVisibility:
    """Visibility of a quadratic tangency of one field with the switching line."""
    side = Side.parse(side)
    first = lie_derivative(system, side, point, 1)
    second = lie_derivative(system, side, point, 2)
    if abs(first) > tol or abs(second) <= tol:
        raise NotAFoldError(
            f"{side.value} field has no quadratic fold at {tuple(point)} "
            f"(first={first:.3e}, second={second:.3e})"
        )
    visible = second > 0 if side is Side.UPPER else second < 0
    return FoldVisibility.VISIBLE if visible else FoldVisibility.INVISIBLE
