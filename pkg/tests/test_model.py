import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from fiscaleq.errors import InadmissibleParameters
from fiscaleq.model import (
    SCENARIO_A,
    SCENARIO_B,
    FLAT_KEYS,
    ScenarioConfig,
    UtilitySpec,
    utility_of_bundle,
    validate,
    violations,
)

from conftest import scenarios


def test_scenario_a_is_admissible():
    s = validate(SCENARIO_A)
    assert s.N * s.m == 10 > s.alpha


def test_nm_not_above_alpha_rejected():
    cfg = SCENARIO_A.with_values(N=1.0, m=0.3)
    with pytest.raises(InadmissibleParameters) as info:
        validate(cfg)
    assert info.value.violations == ["Nm > alpha violated"]


@pytest.mark.parametrize("tau", [0.0, 1.0, -0.1, 1.5])
def test_tau_boundaries_excluded(tau):
    with pytest.raises(InadmissibleParameters) as info:
        validate(SCENARIO_A.with_values(tau=tau))
    assert "tau in (0,1) violated" in info.value.violations


def test_every_violation_is_listed():
    cfg = SCENARIO_B.with_values(alpha=-1.0, m=0.0, w=0.0, g=-1.0, Lg=-2.0, kappa=0.0,
                                 F=-1.0, N=-1.0)
    assert set(violations(cfg)) == {
        "alpha > 0 violated", "m > 0 violated", "w > 0 violated", "g >= 0 violated",
        "Lg >= 0 violated", "kappa > 0 violated", "F >= 0 violated", "N > 0 violated"}


def test_zero_wage_rejected():
    with pytest.raises(InadmissibleParameters, match="w > 0"):
        validate(SCENARIO_B.with_values(w=0.0))


def test_zero_activity_economy_rejected():
    with pytest.raises(InadmissibleParameters, match=r"F \+ g \+ Lg > 0"):
        validate(SCENARIO_B.with_values(F=0.0, g=0.0, Lg=0.0))


def test_non_finite_rejected():
    with pytest.raises(InadmissibleParameters, match="not finite"):
        validate(SCENARIO_B.with_values(N=math.nan))


def test_validate_never_clamps():
    cfg = SCENARIO_B.with_values(g=-1e-300)
    with pytest.raises(InadmissibleParameters):
        validate(cfg)


@settings(max_examples=100, deadline=None)
@given(scenarios())
def test_validate_is_idempotent(s):
    assert validate(s.config) == s
    assert validate(s) == s


def test_flat_roundtrip():
    flat = SCENARIO_B.to_flat()
    assert tuple(flat) == FLAT_KEYS
    assert ScenarioConfig.from_flat(flat) == SCENARIO_B


def test_with_values_rejects_unknown_key():
    with pytest.raises(KeyError):
        SCENARIO_B.with_values(beta=1.0)


def test_utility_at_zero_is_n_times_k_minus_kappa():
    assert utility_of_bundle(0.0, UtilitySpec(alpha=1.0, kappa=1.0, k=1.0), 2.0) == 0.0


def test_utility_single_variety_matches_high_precision():
    expected = float(-mpmath.exp(-1))
    assert utility_of_bundle(1.0, UtilitySpec(alpha=1.0, kappa=1.0, k=0.0), 1.0) == pytest.approx(
        expected, rel=1e-15)
    assert expected == pytest.approx(-0.3678794, abs=1e-7)


def test_utility_asymptote():
    spec = UtilitySpec(alpha=1.0, kappa=1.0, k=1.0)
    assert utility_of_bundle(50.0, spec, 3.0) == pytest.approx(3.0, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(q=st.floats(0.0, 5.0), alpha=st.floats(0.05, 1.5), kappa=st.floats(0.1, 10.0),
       k=st.floats(-5.0, 5.0), N=st.floats(0.5, 50.0))
def test_utility_increasing_and_concave(q, alpha, kappa, k, N):
    spec = UtilitySpec(alpha, kappa, k)
    h = 1e-2
    lo, mid, hi = (utility_of_bundle(x, spec, N) for x in (q, q + h, q + 2 * h))
    assert lo < mid < hi
    assert hi - 2 * mid + lo < 0
