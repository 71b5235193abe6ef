from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fiscaleq.closed_form import (
    check_propositions,
    consumption,
    employment_coefficients,
    price_form_a,
    price_form_b,
    private_employment,
    profit_threshold_lambda,
    solve_equilibrium,
)
from fiscaleq.errors import DegenerateDenominator, InternalInconsistency
from fiscaleq.model import SCENARIO_A, SCENARIO_B, validate

from conftest import scenarios

# Exact rationals worked by hand from the employment identity and the
# symmetric price condition (cross-checked against the discrete oracle in
# test_oracle.py).
A_EXACT = dict(L=Fraction(130, 3), q=Fraction(1, 13), p=Fraction(26, 25), Pi=Fraction(-13, 15))
B_EXACT = dict(L=Fraction(46), q=Fraction(7, 92), p=Fraction(184, 175), Pi=Fraction(23, 175))


@pytest.mark.parametrize("cfg, exact", [(SCENARIO_A, A_EXACT), (SCENARIO_B, B_EXACT)],
                         ids=["A", "B"])
def test_frozen_equilibria(cfg, exact):
    eq = solve_equilibrium(validate(cfg))
    for key, value in exact.items():
        assert getattr(eq, key) == pytest.approx(float(value), rel=1e-13), key


def test_scenario_b_rounded_values(scenario_b):
    eq = solve_equilibrium(scenario_b)
    assert eq.L == pytest.approx(46.0, abs=5e-6)
    assert eq.q == pytest.approx(0.0760870, abs=5e-8)
    assert eq.p == pytest.approx(1.0514286, abs=5e-8)
    assert eq.Pi == pytest.approx(0.1314286, abs=5e-8)


def test_doubling_wage_doubles_price_and_profit(scenario_a):
    base = solve_equilibrium(scenario_a)
    doubled = solve_equilibrium(scenario_a.with_values(w=2.0))
    assert doubled.p == pytest.approx(2.08, rel=1e-15)
    assert doubled.Pi == 2 * base.Pi
    assert doubled.q == base.q and doubled.L == base.L


def test_price_forms_agree_on_b(scenario_b):
    L = private_employment(scenario_b)
    q = consumption(scenario_b, L)
    assert price_form_a(scenario_b, L, q) == pytest.approx(1.0514286, abs=5e-8)
    assert price_form_b(scenario_b, L, q) == pytest.approx(1.0514286, abs=5e-8)


def test_form_a_without_purchase_is_markup_rule(scenario_a):
    s = scenario_a
    L = private_employment(s)
    expected = s.m * s.w + s.alpha * (1 - s.tau) * s.w / s.N
    assert expected == pytest.approx(1.04)
    assert price_form_a(s, L) == pytest.approx(expected, rel=1e-15)


def test_small_alpha_price_tends_to_marginal_cost(scenario_b):
    s = scenario_b.with_values(alpha=1e-9)
    L = private_employment(s)
    q = consumption(s, L)
    mw = s.m * s.w
    assert price_form_a(s, L, q) == pytest.approx(mw, rel=1e-8)
    assert price_form_b(s, L, q) == pytest.approx(mw, rel=1e-8)


def test_degenerate_probes_raise(scenario_b):
    with pytest.raises(DegenerateDenominator):
        price_form_a(scenario_b, L=0.1, q=0.0)          # L + Lg - alpha g < 0
    with pytest.raises(DegenerateDenominator):
        price_form_b(scenario_b, L=46.0, q=2.0)


def test_price_cross_check_guards_against_bad_routes(scenario_b, monkeypatch):
    import fiscaleq.closed_form as cf
    monkeypatch.setattr(cf, "price_form_b", lambda s, L, q: 1.1)
    with pytest.raises(InternalInconsistency):
        cf.solve_equilibrium(scenario_b)


def test_propositions_scenario_a(scenario_a):
    eq = solve_equilibrium(scenario_a)
    r = check_propositions(scenario_a, eq)
    assert r.margin_positive and r.markup_positive
    assert r.profit_bound == pytest.approx(1 / 6, rel=1e-14)
    assert not r.condition_holds and not r.profit_nonneg
    assert r.implication_holds
    assert not eq.flags.profit_nonneg and not eq.flags.nonneg_profit_condition_holds


def test_propositions_scenario_b(scenario_b):
    eq = solve_equilibrium(scenario_b)
    r = check_propositions(scenario_b, eq)
    assert r.margin_positive and r.markup_positive and r.profit_nonneg
    # L = N(m*46*q + m*g + F) = 10*(3.5 + 1.1) = 46
    assert 10 * (46 * float(B_EXACT["q"]) + 1.0 + 0.1) == pytest.approx(46.0, rel=1e-15)
    assert abs(r.employment_residual) <= 1e-15
    assert r.all_hold


def test_lambda_scenario_b(scenario_b):
    lam = profit_threshold_lambda(scenario_b)
    expected = (1 - 10 * 7 / 92) * 13.5 - 11
    assert lam == pytest.approx(expected, rel=1e-14)
    assert lam == pytest.approx(-7.7717391, abs=5e-8)


def test_lambda_without_purchase(scenario_a):
    s = scenario_a
    assert profit_threshold_lambda(s) == pytest.approx(-s.N * s.F, rel=1e-15)
    s0 = s.with_values(F=0.0, Lg=1.0)
    assert profit_threshold_lambda(s0) == 0.0


def test_employment_coefficients_reproduce_solution(scenario_b):
    a, bg, bl = employment_coefficients(scenario_b)
    s = scenario_b.with_values(Lg=3.0)
    assert a + bg * s.g + bl * s.Lg == pytest.approx(private_employment(s), rel=1e-14)


# Properties over the admissible box --------------------------------------

@settings(max_examples=300, deadline=None)
@given(scenarios())
def test_identities_hold(s):
    eq = solve_equilibrium(s)
    assert eq.p > 0 and eq.L > 0
    assert 0 < s.N * s.m * eq.q < 1
    assert s.N * eq.p * eq.q == pytest.approx((1 - s.tau) * s.w, rel=1e-12)
    assert abs(eq.p - eq.p_check) <= 1e-10 * eq.p
    r = check_propositions(s, eq)
    assert r.all_hold
    assert r.implication_holds


@settings(max_examples=200, deadline=None)
@given(scenarios(), st.floats(0.01, 100.0))
def test_wage_homogeneity(s, c):
    base = solve_equilibrium(s)
    scaled = solve_equilibrium(s.with_values(w=c * s.w))
    assert scaled.p == pytest.approx(c * base.p, rel=1e-12)
    assert scaled.markup == pytest.approx(c * base.markup, rel=1e-11)
    assert abs(scaled.Pi - c * base.Pi) <= 1e-12 * c * (abs(base.Pi) + s.F * s.w)
    assert scaled.q == pytest.approx(base.q, rel=1e-12)
    assert scaled.L == base.L
    assert scaled.welfare == pytest.approx(base.welfare, rel=1e-12)
    assert scaled.flags == base.flags or abs(base.Pi) < 1e-12 * s.F * s.w


@settings(max_examples=100, deadline=None)
@given(scenarios(), st.floats(0.1, 10.0))
def test_employment_ignores_wage(s, w):
    assert private_employment(s.with_values(w=w)) == private_employment(s)
