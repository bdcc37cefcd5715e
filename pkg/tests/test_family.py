from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foldsaddle.family import (
    BETA_BOUND,
    FamilyParams,
    FoldVisibility,
    ParameterError,
    TauKind,
    Window,
    WindowError,
    fold_kind,
    key_points,
    lie_derivative,
    lower_fold_abscissa,
    make_system,
)

lams = st.floats(-0.95, 0.95)
alphas = st.floats(-1.95, -0.05)
betas = st.floats(-0.85, 0.85)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(lam=1.0, alpha=-1.0, beta=0.5),
        dict(lam=-1.0, alpha=-1.0, beta=0.5),
        dict(lam=0.0, alpha=0.0, beta=0.5),
        dict(lam=0.0, alpha=-2.5, beta=0.5),
        dict(lam=0.0, alpha=-1.0, beta=0.9),
        dict(lam=0.0, alpha=-1.0, beta=0.5, epsilon0=0.1),
        dict(lam=math.nan, alpha=-1.0, beta=0.5),
    ],
)
def test_rejects_parameters_outside_domain(kwargs):
    with pytest.raises(ParameterError):
        make_system("inv", **kwargs)


def test_epsilon0_widens_alpha_range():
    make_system("inv", 0.0, -2.5, 0.5, epsilon0=-3.0)
    assert BETA_BOUND == pytest.approx(math.sqrt(3.0) / 2.0)


@pytest.mark.parametrize("text,expected", [("inv", TauKind.INV), ("VIS", TauKind.VIS), (TauKind.INV, TauKind.INV)])
def test_tau_parse(text, expected):
    assert TauKind.parse(text) is expected


def test_tau_coefficients():
    assert TauKind.INV.coefficients == (-1.0, 1.0)
    assert TauKind.VIS.coefficients == (1.0, 0.0)
    with pytest.raises(ValueError):
        TauKind.parse("both")


def test_frozen_params():
    p = FamilyParams(TauKind.INV, 0.1, -1.0, 0.5)
    with pytest.raises(Exception):
        p.lam = 0.2


@settings(max_examples=60, deadline=None)
@given(lams, alphas, betas, st.sampled_from(["inv", "vis"]))
def test_lower_field_spectrum_and_saddle(lam, alpha, beta, tau):
    s = make_system(tau, lam, alpha, beta)
    ev = np.sort(np.linalg.eigvals(s.lower_matrix))
    assert ev == pytest.approx(sorted([alpha, 1.0]), abs=1e-12)
    assert s.lower(*s.saddle) == pytest.approx((0.0, 0.0), abs=1e-14)
    assert float(s.divergence("lower", 0.0, 0.0)) == pytest.approx(1.0 + alpha)


@settings(max_examples=60, deadline=None)
@given(lams, alphas, betas, st.floats(-0.9, 0.9), st.floats(-0.9, 0.9))
def test_upper_divergence_matches_finite_difference(lam, alpha, beta, x, y):
    s = make_system("inv", lam, alpha, beta)
    h = 1e-6
    div = (s.upper(x + h, y)[0] - s.upper(x - h, y)[0]) / (2 * h) + (
        s.upper(x, y + h)[1] - s.upper(x, y - h)[1]
    ) / (2 * h)
    assert div == pytest.approx(float(s.divergence("upper", x, y)), abs=1e-8)


@pytest.mark.parametrize("order", [1, 2, 3])
def test_lower_lie_derivatives_are_matrix_powers(order):
    s = make_system("inv", 0.1, -0.7, 0.4)
    p = np.array([0.3, 0.0])
    expected = (np.linalg.matrix_power(s.lower_matrix, order) @ (p - np.array(s.saddle)))[1]
    assert lie_derivative(s, "lower", p, order) == pytest.approx(expected, rel=1e-13)


def test_lie_derivative_order_is_bounded():
    s = make_system("inv", 0.1, -0.7, 0.4)
    with pytest.raises(ValueError):
        lie_derivative(s, "lower", (0.0, 0.0), 4)


def test_upper_lie_derivative_is_the_vertical_component():
    s = make_system("inv", 0.2, -1.0, 0.5)
    for x in (-0.4, 0.0, 0.7):
        u = x - 0.2
        assert lie_derivative(s, "upper", (x, 0.0), 1) == pytest.approx(-u + u * u)
        assert lie_derivative(s, "upper", (x, 0.0), 2) == pytest.approx(-1 + 2 * u)


@pytest.mark.parametrize(
    "tau,beta,upper,lower",
    [
        ("inv", 0.5, "invisible", "invisible"),
        ("inv", -0.5, "invisible", "visible"),
        ("vis", 0.5, "visible", "invisible"),
        ("vis", -0.5, "visible", "visible"),
    ],
)
def test_fold_visibility(tau, beta, upper, lower):
    s = make_system(tau, -0.1, -0.6, beta)
    assert fold_kind(s, "upper", (s.lam, 0.0)) is FoldVisibility(upper)
    assert fold_kind(s, "lower", (s.lower_fold, 0.0)) is FoldVisibility(lower)


def test_lower_fold_formula():
    for a, b in [(-1.0, 0.5), (-0.5, 0.3), (-1.7, -0.2)]:
        s = make_system("inv", 0.0, a, b)
        assert s.yf(lower_fold_abscissa(a, b)) == pytest.approx(0.0, abs=1e-15)
    assert lower_fold_abscissa(-1.0, 0.5) == 0.0


@pytest.mark.parametrize("beta,names", [(0.5, {"d", "S", "h", "j", "i"}), (-0.5, {"d", "S", "e"}), (0.0, {"d", "S"})])
def test_key_points(beta, names):
    s = make_system("inv", 0.1, -1.0, beta)
    kp = key_points(s).as_dict()
    assert set(kp) == names
    assert kp["S"] == (0.0, -beta)
    if beta > 0:
        assert kp["h"] == (-beta, 0.0) and kp["j"] == (beta, 0.0)


def test_window_checks():
    w = Window()
    assert w.contains(0.0, 0.0) and not w.contains(1.5, 0.0)
    s = make_system("inv", 0.0, -1.0, 0.5)
    with pytest.raises(WindowError):
        s.check_window(2.0, 0.0)
