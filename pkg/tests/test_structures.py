from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foldsaddle import bifurcation as bif
from foldsaddle.family import make_system
from foldsaddle.flow import return_map
from foldsaddle.structures import (
    CycleKind,
    CycleStability,
    MissingPointError,
    connection_defect,
    find_canard_cycles,
    find_sigma_graph,
    one_sided_drift,
)

from conftest import SINGLE_CYCLE_X


def test_single_repelling_cycle(single_cycle_system):
    (cyc,) = find_canard_cycles(single_cycle_system)
    assert cyc.fixed_abscissa == pytest.approx(SINGLE_CYCLE_X, abs=1e-12)
    assert cyc.landing == pytest.approx(-SINGLE_CYCLE_X, abs=1e-12)
    assert cyc.kind is CycleKind.I
    assert cyc.stability is CycleStability.REPELLER
    assert cyc.residual < 1e-14


def test_repeller_pushes_orbits_away(single_cycle_system):
    inside = one_sided_drift(single_cycle_system, SINGLE_CYCLE_X + 1e-3, steps=5)
    assert inside > 0.0


@pytest.mark.parametrize("lam", [0.0, 0.05, 0.1, 0.2])
def test_no_cycles_for_symmetric_saddle_right_of_fold(lam):
    # alpha = -1 gives eta(x) = -x_return(x) > x whenever lam >= 0
    assert find_canard_cycles(make_system("inv", lam, -1.0, 0.5)) == []


def test_fold_pair_near_saddle_node():
    a = bif.alpha0(0.8)
    fold = bif.locate_cycle_fold("inv", a, 0.8)
    below = find_canard_cycles(make_system("inv", fold.lam - 1e-4, a, 0.8, epsilon0=-3.0))
    above = find_canard_cycles(make_system("inv", fold.lam + 1e-4, a, 0.8, epsilon0=-3.0))
    assert len(below) == 2 and above == []
    outer, inner = below
    assert outer.derivative > 1.0 > inner.derivative
    for c in below:
        assert return_map(make_system("inv", fold.lam - 1e-4, a, 0.8, epsilon0=-3.0),
                          c.fixed_abscissa) == pytest.approx(c.fixed_abscissa, abs=1e-13)


def test_restricting_interval(single_cycle_system):
    assert find_canard_cycles(single_cycle_system, (-0.3, -0.1)) == []
    assert len(find_canard_cycles(single_cycle_system, (-0.4, -0.3))) == 1


@settings(max_examples=40, deadline=None)
@given(st.floats(-1.8, -0.2), st.floats(0.1, 0.7))
def test_connection_defect_vanishes_on_the_loop(alpha, beta):
    m1 = bif.formula_M1(alpha, beta)
    if not -1.0 < m1 < 1.0:
        return
    s = make_system("inv", m1, alpha, beta)
    if not (-0.5 < -beta - m1 < 0.0 < beta - m1 < 1.0):
        return
    assert abs(connection_defect(s, "h", "j")) < 1e-13
    graph = find_sigma_graph(s)
    assert graph is not None and graph.kind is CycleKind.I and graph.is_closed()


def test_no_graph_off_the_connection():
    assert find_sigma_graph(make_system("inv", 0.1, -0.6, 0.4)) is None
    assert find_sigma_graph(make_system("inv", 0.1, -0.6, -0.4)) is None


def test_visible_graph_through_coincident_folds():
    s = make_system("vis", 0.0, -1.0, 0.5)
    graph = find_sigma_graph(s)
    assert graph.kind is CycleKind.III
    assert [name for name, _ in graph.vertices] == ["h", "d", "j", "S"]
    assert graph.is_closed()


def test_missing_points():
    s = make_system("inv", 0.0, -1.0, -0.3)
    with pytest.raises(MissingPointError):
        connection_defect(s, "h", "j")
