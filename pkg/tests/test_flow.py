from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from foldsaddle.family import make_system
from foldsaddle.flow import (
    ArcSide,
    ReturnMap,
    ReturnMapDomainError,
    Termination,
    arc_points,
    eta_arrays,
    finite_difference_derivative,
    integrate,
    lower_arc,
    lower_return,
    lower_state,
    numeric_arc,
    ratio_law_derivative,
    return_map,
    return_map_derivative,
    return_map_domain,
    slide_arc,
    upper_arc,
    upper_partner,
    upper_partner_inverse,
    upper_primitive,
    x_return,
    y_return,
)

from conftest import SINGLE_CYCLE_X


def F(u):
    return -u * u / 2.0 + u ** 3 / 3.0


@settings(max_examples=200, deadline=None)
@given(st.floats(-0.4999, -1e-6))
def test_upper_partner_matches_primitive(u0):
    u1 = float(upper_partner(u0))
    assert 0.0 < u1 < 1.0
    assert F(u1) == pytest.approx(F(u0), abs=1e-14)
    assert float(upper_partner_inverse(u1)) == pytest.approx(u0, abs=1e-10)


def test_upper_partner_outside_range_is_nan():
    assert np.isnan(upper_partner(-0.6)) and np.isnan(upper_partner(0.1))
    assert float(upper_partner(0.0)) == 0.0
    assert float(upper_partner(-0.5)) != float(upper_partner(-0.5))  # open end


@settings(max_examples=100, deadline=None)
@given(st.floats(-0.5, 0.5), st.floats(-0.499, -0.001))
def test_x_return_agrees_with_closed_form(lam, u0):
    s = make_system("inv", lam, -1.0, 0.5)
    x1 = x_return(s, lam + u0)
    assume(x1 is not None)
    assert x1 == pytest.approx(lam + float(upper_partner(u0)), abs=1e-12)
    assert float(upper_primitive(s, x1 - lam)) == pytest.approx(F(u0), abs=1e-14)


def test_x_return_frozen_value_and_limits():
    s = make_system("inv", 0.0, -1.0, 0.5)
    assert x_return(s, -0.2) == pytest.approx(0.23153415615735093, abs=1e-14)
    assert x_return(s, 0.0) == 0.0
    assert x_return(s, -0.6) is None
    assert x_return(make_system("vis", 0.0, -1.0, 0.5), -0.2) is None


@pytest.mark.parametrize("x0", [0.05, 0.2, 0.45])
def test_symmetric_lower_return(x0):
    s = make_system("inv", 0.0, -1.0, 0.5)
    x2, t = lower_return(s, x0)
    assert x2 == pytest.approx(-x0, abs=1e-15)
    assert t == pytest.approx(math.log((x0 + 0.5) / (0.5 - x0)))
    assert lower_state(s, (x0, 0.0), t)[1] == pytest.approx(0.0, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.floats(-1.9, -0.1), st.floats(0.2, 0.8), st.floats(0.05, 0.95))
def test_lower_return_lands_on_the_line(alpha, beta, frac):
    s = make_system("inv", 0.0, alpha, beta)
    i1 = s.lower_fold
    x1 = i1 + frac * (beta - i1)
    out = lower_return(s, x1)
    assume(out is not None)
    x2, t = out
    assert t > 0 and x2 < i1
    assert lower_state(s, (x1, 0.0), t)[1] == pytest.approx(0.0, abs=1e-12)


def test_lower_return_rejects_upward_starts():
    s = make_system("inv", 0.0, -1.0, 0.5)
    assert lower_return(s, -0.2) is None
    assert y_return(s, 0.6) is None


def test_return_map_frozen_value():
    s = make_system("inv", 0.0, -1.0, 0.5)
    assert return_map(s, -0.2) == pytest.approx(-0.23153415615735093, abs=1e-14)
    with pytest.raises(ReturnMapDomainError):
        return_map(s, 0.3)


def test_domain_endpoints():
    s = make_system("inv", 0.0, -1.0, 0.5)
    lo, hi = return_map_domain(s)
    assert hi == 0.0
    # the arc from lo lands exactly on the separatrix foot beta
    assert x_return(s, lo) == pytest.approx(0.5, abs=1e-12)
    assert return_map_domain(make_system("vis", 0.0, -1.0, 0.5)) is None
    assert return_map_domain(make_system("inv", 0.0, -1.0, -0.5)) is None


def test_single_cycle_derivative(single_cycle_system):
    d = ratio_law_derivative(single_cycle_system, SINGLE_CYCLE_X)
    assert d == pytest.approx(1.7880309555926772, abs=1e-12)
    assert finite_difference_derivative(single_cycle_system, SINGLE_CYCLE_X) == pytest.approx(d, rel=1e-8)
    assert return_map_derivative(single_cycle_system, SINGLE_CYCLE_X, "central") == pytest.approx(d, rel=1e-8)
    with pytest.raises(ValueError):
        return_map_derivative(single_cycle_system, SINGLE_CYCLE_X, "spline")


@settings(max_examples=60, deadline=None)
@given(st.floats(-0.2, 0.1), st.floats(-1.8, -0.3), st.floats(0.3, 0.7), st.floats(0.05, 0.95))
def test_ratio_law_matches_central_difference(lam, alpha, beta, frac):
    s = make_system("inv", lam, alpha, beta)
    dom = return_map_domain(s)
    assume(dom is not None and dom[1] - dom[0] > 1e-3)
    x = dom[0] + frac * (dom[1] - dom[0])
    assume(min(x - dom[0], dom[1] - x) > 1e-4)
    r = ratio_law_derivative(s, x)
    fd = finite_difference_derivative(s, x, step=1e-7)
    assert r == pytest.approx(fd, rel=1e-4)


@pytest.mark.parametrize("alpha", [-1.0, -0.6, -1.4])
def test_vectorised_return_map_matches_scalar(alpha):
    s = make_system("inv", -0.05, alpha, 0.5)
    lo, hi = return_map_domain(s)
    xs = np.linspace(lo, hi, 30)[1:-1]
    eta, deta = eta_arrays(s.lam, alpha, 0.5, xs)
    rm = ReturnMap.of(s)
    for x, e, d in zip(xs, eta, deta):
        assert e == pytest.approx(rm(float(x)), abs=1e-12)
        assert d == pytest.approx(rm.derivative(float(x)), rel=1e-9)


@pytest.mark.parametrize("side,start", [("upper", (-0.3, 0.0)), ("upper", (0.2, 0.1)), ("lower", (0.3, 0.0)),
                                        ("lower", (-0.2, -0.3))])
def test_numeric_arc_agrees_with_closed_form(side, start):
    s = make_system("inv", 0.0, -0.7, 0.5)
    closed = (upper_arc if side == "upper" else lower_arc)(s, start)
    num = numeric_arc(s, side, start)
    assert num.stop == closed.stop
    assert math.dist(num.end, closed.end) < 1e-8
    assert num.transit == pytest.approx(closed.transit, rel=1e-8)


def test_upper_arc_transit_equals_horizontal_displacement():
    s = make_system("inv", 0.0, -1.0, 0.5)
    arc = upper_arc(s, (-0.2, 0.0))
    assert arc.transit == pytest.approx(arc.end[0] - arc.start[0])
    assert arc.stop == "sigma"


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 0.45))
def test_symmetric_saddle_first_integral(x0):
    s = make_system("inv", 0.0, -1.0, 0.5)
    pts = numeric_arc(s, "lower", (x0, 0.0)).points
    c = pts[:, 0] ** 2 - (pts[:, 1] + 0.5) ** 2
    assert np.max(np.abs(c - c[0])) < 1e-10


def test_single_cycle_orbit_closes(single_cycle_system):
    tr = integrate(single_cycle_system, (SINGLE_CYCLE_X, 0.0), 50.0)
    assert tr.termination is Termination.CLOSED
    assert [a.side for a in tr.arcs] == [ArcSide.UPPER, ArcSide.LOWER]
    assert tr.sigma_abscissas[-1] == pytest.approx(SINGLE_CYCLE_X, abs=1e-12)
    num = integrate(single_cycle_system, (SINGLE_CYCLE_X, 0.0), 50.0, method="numeric")
    assert num.termination is Termination.CLOSED


def test_sliding_to_pseudo_equilibrium():
    s = make_system("inv", -0.1, -0.6, 0.4)
    arc = slide_arc(s, -0.05)
    assert arc.stop == "pseudo_equilibrium" and math.isinf(arc.transit)
    assert arc.end[0] == pytest.approx(0.05047917630102131, abs=1e-12)
    # approach is asymptotic, so a finite budget runs out next to it
    tr = integrate(s, (-0.05, 0.0), 50.0)
    assert tr.termination is Termination.TIME_LIMIT
    assert tr.arcs[-1].end[0] == pytest.approx(0.05047917630102131, abs=1e-9)
    assert integrate(s, (0.05047917630102131, 0.0)).termination is Termination.PSEUDO_EQUILIBRIUM


def test_sliding_is_truncated_by_time():
    s = make_system("inv", -0.1, -0.6, 0.4)
    arc = slide_arc(s, -0.05, max_time=0.1)
    assert arc.stop == "time" and -0.05 < arc.end[0] < 0.0505


def test_escaping_start_stops():
    s = make_system("inv", -0.1, -1.0, 0.5)
    assert integrate(s, (0.95, 0.0)).termination is Termination.ESCAPING_NONUNIQUE


def test_equilibrium_start_and_window_exit():
    s = make_system("inv", 0.0, -1.0, 0.5)
    assert integrate(s, (0.0, -0.5)).termination is Termination.EQUILIBRIUM
    assert integrate(s, (-0.9, 0.5)).termination is Termination.WINDOW_EXIT


@pytest.mark.parametrize("side", ["upper", "lower"])
def test_arc_points_end_on_arc(side):
    s = make_system("inv", 0.0, -1.0, 0.5)
    arc = upper_arc(s, (-0.2, 0.0)) if side == "upper" else lower_arc(s, (0.2, 0.0))
    pts = arc_points(s, arc, 32)
    assert pts.shape == (32, 2)
    assert tuple(pts[0]) == pytest.approx(arc.start) and tuple(pts[-1]) == pytest.approx(arc.end)
