from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foldsaddle import bifurcation as bif
from foldsaddle.bifurcation import CaseLabel, Regime
from foldsaddle.family import ParameterError, TauKind

TRUE_L2 = 0.17403813685354


@pytest.mark.parametrize("beta", [0.1, 0.3, 0.5, 0.7])
@pytest.mark.parametrize("alpha", [-0.5, -1.0, -1.5])
def test_closed_forms_match_connection_roots(alpha, beta):
    for pair, formula in (("h->i", bif.formula_M0), ("h->j", bif.formula_M1), ("i->j", bif.formula_M2)):
        try:
            root = bif.solve_connection_lambda("inv", alpha, beta, pair)
        except bif.NoBracketError:
            continue
        assert root == pytest.approx(formula(alpha, beta), abs=1e-10)


def test_spot_values():
    assert bif.formula_M0(-1.0, 0.5) == pytest.approx(-0.27128644612183095, abs=1e-14)
    assert bif.formula_M1(-1.0, 0.5) == pytest.approx(-0.09175170953613704, abs=1e-14)
    assert bif.formula_M2(-1.0, 0.5) == pytest.approx(0.22871355387816905, abs=1e-14)
    assert bif.formula_L0(0.5) == pytest.approx(-0.30996319686429336, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.02, 0.85))
def test_resonance_identities(beta):
    a0 = bif.alpha0(beta)
    assert bif.mu0(beta) == pytest.approx(a0 + 1.0, abs=1e-14)
    assert bif.formula_L1(beta) == pytest.approx((1 + a0) * beta / (1 - a0), abs=1e-12)
    assert bif.lambda0(beta) == pytest.approx(bif.formula_L1(beta), abs=1e-12)
    assert bif.formula_M0(a0, beta) == pytest.approx(bif.formula_L0(beta), abs=1e-12)


def test_alpha0_is_singular_at_zero():
    with pytest.raises(bif.DegenerateBetaError) as info:
        bif.alpha0(0.0)
    assert info.value.limit == -1.0
    assert bif.alpha0(0.0, allow_limit=True) == -1.0


def test_l2_uses_connection_root_and_keeps_printed_value():
    a0 = bif.alpha0(0.5)
    bd = bif.boundaries("inv", a0, 0.5, with_fold=False)
    assert bd.as_dict()["L2"] == pytest.approx(TRUE_L2, abs=1e-12)
    assert bd.as_dict()["L2"] == pytest.approx(bif.formula_M2(a0, 0.5), abs=1e-12)
    assert bd.printed["L2"] == pytest.approx(0.2027191084, abs=1e-9)
    assert any(n.startswith("L2:") for n in bd.notes)


@pytest.mark.parametrize(
    "tau,alpha,beta,regime",
    [("inv", -1.0, 0.5, Regime.THM2), ("inv", -1.8, 0.5, Regime.THM3), ("inv", bif.alpha0(0.5), 0.5, Regime.THM1),
     ("vis", -1.0, 0.5, Regime.THM4), ("vis", -0.5, 0.5, Regime.THM5), ("vis", -1.5, 0.5, Regime.THM6)],
)
def test_regimes(tau, alpha, beta, regime):
    assert bif.regime_of(tau, alpha, beta) is regime
    assert regime.tau is TauKind(tau)


@pytest.mark.parametrize(
    "tau,lam,alpha,beta,label",
    [
        ("inv", -0.2, -1.0, 0.5, "11_2"),
        ("inv", 0.5, -1.0, 0.5, "20_2"),
        ("inv", -0.9, -1.0, -0.3, "1_3"),
        ("vis", 0.1, -1.0, 0.5, "11_4"),
    ],
)
def test_classify_case_examples(tau, lam, alpha, beta, label):
    assert str(bif.classify_case(tau, lam, alpha, beta)) == label


def test_classification_on_and_between_boundaries():
    bd = bif.boundaries("inv", -1.0, 0.5)
    values = [v for _, v in bd.defined()]
    labels = [bif.classify_case("inv", v, -1.0, 0.5) for v in values]
    mids = [bif.classify_case("inv", 0.5 * (a + b), -1.0, 0.5) for a, b in zip(values, values[1:])]
    seq = sorted(set(labels + mids))
    assert all(b.index > a.index for a, b in zip(seq, seq[1:]))


def test_classify_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        bif.classify_case("inv", 1.2, -1.0, 0.5)


@pytest.mark.parametrize("regime,count", [(1, 19), (2, 21), (3, 21), (4, 13), (5, 13), (6, 13)])
def test_every_case_has_a_witness(regime, count):
    labels = bif.enumerate_cases(Regime.parse(regime).tau, regime)
    assert len(labels) == count
    assert [lab.index for lab in labels] == list(range(1, count + 1))


def test_class_totals():
    for tau, regs, total in (("inv", (1, 2, 3), 25), ("vis", (4, 5, 6), 39)):
        classes = {str(bif.topological_class(lab)) for r in regs for lab in bif.enumerate_cases(tau, r)}
        assert len(classes) == total


def test_case_label_parsing():
    lab = CaseLabel.parse("13_2")
    assert (lab.theorem, lab.index) == (2, 13) and str(lab) == "13_2"
    with pytest.raises(ValueError):
        CaseLabel(1, 20)
    assert Regime.parse("thm3") is Regime.THM3


def test_cycle_fold_in_thm1_bracket():
    a = bif.alpha0(0.8)
    fold = bif.locate_cycle_fold("inv", a, 0.8)
    assert fold.lam == pytest.approx(-0.29373, abs=1e-5)
    assert abs(fold.derivative - 1.0) < 1e-6
    lo, hi = bif.default_fold_range(a, 0.8)
    assert lo < fold.lam < hi


def test_missing_fold_is_reported():
    with pytest.raises(bif.NoCycleWindowError):
        bif.find_cycle_fold("inv", -1.0, 0.5)
    bd = bif.boundaries("inv", -1.0, 0.5)
    assert bd.as_dict()["M3"] is None
    assert any(n.startswith("M3:") for n in bd.notes)


def test_sweep_grid_small():
    d = bif.sweep_grid("inv", -1.0, (-0.9, 0.9), (-0.8, 0.8), (40, 40))
    assert d.labels.shape == (40, 40)
    assert sum(d.histogram().values()) == 1600
    for r in (0, 20, 39):
        for c in (0, 17, 39):
            assert d.labels[r, c] == str(bif.classify_case("inv", d.lambdas[c], -1.0, d.betas[r]))
    assert {"M0", "M2"} <= set(d.polylines)


def test_sweep_grid_marks_alpha0_crossing():
    d = bif.sweep_grid("inv", -1.4, (-0.5, 0.5), (0.1, 0.8), (5, 30))
    assert "alpha0" in d.polylines


def test_sphere_sweep_is_deterministic_and_on_sphere():
    a = bif.sweep_sphere("vis", 0.05, 200)
    b = bif.sweep_sphere("vis", 0.05, 200)
    assert [str(s.label) for s in a] == [str(s.label) for s in b]
    for s in a:
        assert math.fsum(c * c for c in s.point) == pytest.approx(0.05 ** 2, rel=1e-9)
