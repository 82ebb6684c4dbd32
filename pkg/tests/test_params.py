import math
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hhlab import params as P
from hhlab.params import (EstimateQuery, ProblemParams, SpaceParams, classify, critical_exponents,
                          estimate_admissible, exponent, meyer_admissible, scaling_regime,
                          solver_constants)

REGIMES = {P.DOUBLE_SUBCRITICAL, P.SINGLE_CRITICAL_I, P.SINGLE_CRITICAL_II, P.DOUBLE_CRITICAL,
           P.SUPERCRITICAL, P.OUTSIDE, P.SUBCRITICAL_NONINTEGRABLE, P.CRITICAL_NONINTEGRABLE}
VERDICTS = {P.UNCONDITIONAL, P.NONUNIQUE, P.SUFFICIENT_ONLY, P.CRITERION, P.ILL_POSED, P.OPEN}


def test_exponent_parsing():
    assert exponent("5/3") == F(5, 3)
    assert exponent(2) == F(2) and isinstance(exponent(2), F)
    assert exponent("inf") == math.inf and exponent("∞") == math.inf
    assert exponent("0.25") == F(1, 4)
    assert exponent(0.3) == 0.3
    for bad in (True, float("nan"), -math.inf, None):
        with pytest.raises((TypeError, ValueError)):
            exponent(bad)


def test_inv_and_compare():
    assert P.inv(math.inf) == 0
    with pytest.raises(P.DomainError):
        P.inv(0)
    assert P.compare(F(1, 3), F(1, 3)) == 0
    assert P.compare(F(1, 3) + F(1, 10**15), F(1, 3)) == 1
    assert P.compare(1 / 3, F(1, 3)) == 0
    assert P.compare(math.inf, 10**9) == 1


def test_param_validation():
    with pytest.raises(ValueError):
        ProblemParams(0, 0, 2)
    with pytest.raises(ValueError):
        ProblemParams(3, 0, 1)
    with pytest.raises(ValueError):
        SpaceParams(F(1, 2))
    with pytest.raises(ValueError):
        SpaceParams(math.inf, 2)
    with pytest.raises(ValueError):
        SpaceParams(2, 0)


def test_critical_exponents_double_critical_example():
    ce = critical_exponents(ProblemParams(3, 0, 3), SpaceParams(3, 2, 0))
    assert ce.q_c == 3 and ce.Q_c == 3
    assert ce.alpha_star == 3
    assert ce.alpha_F == F(5, 3) and ce.alpha_HS == 5
    assert ce.s_c == 0 and ce.S_c == 0


def test_critical_exponents_reject_nonintegrable_weight():
    with pytest.raises(P.DomainError):
        critical_exponents(ProblemParams(2, -2, 2), SpaceParams(2))


def test_serrin_exponent_low_dimension():
    assert P.serrin_exponent(2, F(0)) == math.inf
    assert P.serrin_exponent(5, F(1)) == 2


def test_verdict_carries_space_label():
    v = classify(ProblemParams(3, 0, 3), SpaceParams(3, 2, 0))
    assert v.solution_space.label() == "C([0,T]; L^{3,2}_{0})"
    assert v.as_dict()["citation"] == "double-critical-uniqueness"
    nu = classify(ProblemParams(3, 0, 3), SpaceParams(3, math.inf, 0))
    assert nu.solution_space.label().startswith("C([0,T]; closure")
    assert any("L^{3,2}_{0}" in n for n in nu.notes)


def test_sufficient_condition_names_the_duhamel_space():
    v = classify(ProblemParams(3, 0, 2), SpaceParams(2, 3, 0))
    assert v.verdict == P.SUFFICIENT_ONLY
    # conjugate of 3 is 3/2, times alpha - 1 = 1
    assert "L^{2,3/2}_{0}" in v.notes[0]


rationals = st.fractions(min_value=F(-3, 2), max_value=F(3), max_denominator=12)


@st.composite
def tuples(draw):
    d = draw(st.integers(1, 6))
    gamma = draw(st.fractions(min_value=F(-5, 2), max_value=F(2), max_denominator=8))
    alpha = draw(st.fractions(min_value=F(9, 8), max_value=F(6), max_denominator=8))
    q = draw(st.one_of(st.fractions(min_value=F(1), max_value=F(12), max_denominator=8),
                       st.just(math.inf)))
    r = math.inf if q == math.inf else draw(st.one_of(
        st.fractions(min_value=F(1, 2), max_value=F(8), max_denominator=4), st.just(math.inf)))
    s = draw(rationals)
    return ProblemParams(d, gamma, alpha), SpaceParams(q, r, s)


@settings(max_examples=400, deadline=None)
@given(tuples(), st.booleans())
def test_classifier_is_total(tp, exterior):
    p, sp = tp
    if p.d + p.gamma <= 0 and not (p.d == 1 and p.gamma == -1):
        return
    v = classify(p, sp, exterior=exterior)
    assert v.regime in REGIMES and v.verdict in VERDICTS
    if v.verdict in (P.UNCONDITIONAL, P.SUFFICIENT_ONLY, P.CRITERION):
        assert v.solution_space is not None
    if v.verdict == P.OPEN or v.verdict == P.ILL_POSED:
        assert v.solution_space is None


@settings(max_examples=400, deadline=None)
@given(tuples())
def test_scaling_trichotomy(tp):
    """Exactly one of sub-, exact and supercritical, decided by exact rational arithmetic."""
    p, sp = tp
    if p.d + p.gamma <= 0:
        return
    x = sp.scaling_sum(p.d)
    inv_qc = (2 + p.gamma) / (p.d * (p.alpha - 1))
    regime = scaling_regime(p, sp)
    assert isinstance(x, F)
    if x > inv_qc:
        assert regime == P.SUPERCRITICAL
    elif x == inv_qc:
        assert regime in (P.DOUBLE_CRITICAL, P.SINGLE_CRITICAL_II, P.CRITICAL_NONINTEGRABLE)
    else:
        assert regime in (P.DOUBLE_SUBCRITICAL, P.SINGLE_CRITICAL_I, P.SUBCRITICAL_NONINTEGRABLE)


@settings(max_examples=300, deadline=None)
@given(tuples())
def test_nonuniqueness_only_at_or_beyond_criticality(tp):
    p, sp = tp
    if p.d + p.gamma <= 0 or (p.d == 1 and p.gamma == -1):
        return
    v = classify(p, sp)
    if v.verdict == P.NONUNIQUE:
        assert v.regime in (P.DOUBLE_CRITICAL, P.SUPERCRITICAL)
    if v.regime == P.DOUBLE_CRITICAL and v.verdict == P.UNCONDITIONAL:
        assert sp.r <= critical_exponents(p, sp).alpha_star - 1


@settings(max_examples=200, deadline=None)
@given(tuples())
def test_float_inputs_agree_away_from_boundaries(tp):
    p, sp = tp
    if p.d + p.gamma <= 0 or (p.d == 1 and p.gamma == -1):
        return
    exact = classify(p, sp)
    pf = ProblemParams(p.d, float(p.gamma), float(p.alpha))
    spf = SpaceParams(float(sp.q), float(sp.r), float(sp.s))
    approx = classify(pf, spf)
    assert (approx.regime, approx.verdict) == (exact.regime, exact.verdict)


def test_estimate_examples():
    ans = estimate_admissible(EstimateQuery((1, 1, 0), ("inf", "inf", 0), 3))
    assert ans.admissible and ans.decay_exponent == F(-3, 2)
    bad = estimate_admissible(EstimateQuery((2, math.inf, 0), (2, 2, 0), 3))
    assert not bad.admissible and bad.violated_conditions == (P.EQUAL_SUM_R,)
    up = estimate_admissible(EstimateQuery((2, 2, 0), (2, 2, 1), 3))
    assert P.WEIGHT_ORDER in up.violated_conditions
    end = estimate_admissible(EstimateQuery((1, 2, 0), (2, 2, 0), 3))
    assert P.SOURCE_ENDPOINT in end.violated_conditions
    tgt = estimate_admissible(EstimateQuery((2, 2, 0), (math.inf, 2, 0), 3))
    assert P.TARGET_ENDPOINT in tgt.violated_conditions


def test_meyer_examples():
    ok = meyer_admissible(EstimateQuery((1, 1, 0), (3, math.inf, 0), 3))
    assert ok.admissible and ok.decay_exponent == 0
    off = meyer_admissible(EstimateQuery((1, 1, 0), (2, math.inf, 0), 3))
    assert P.SCALING_BALANCE in off.violated_conditions
    with pytest.raises(ValueError):
        meyer_admissible(EstimateQuery((1, 1, 0), (3, math.inf, 0), 2))


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 6), rationals, rationals, rationals, rationals)
def test_decay_exponent_is_exact(d, a, b, s1, s2):
    q1 = 1 / (F(1, 2) + a / 6) if a / 6 + F(1, 2) > 0 else 1
    q2 = 1 / (F(1, 2) + b / 6) if b / 6 + F(1, 2) > 0 else 1
    ans = estimate_admissible(EstimateQuery((q1, 2, s1), (max(q2, F(3, 2)), 2, s2), d))
    want = -F(d, 2) * (1 / F(q1) - 1 / F(max(q2, F(3, 2)))) - (s1 - s2) / 2
    assert ans.decay_exponent == want


def test_solver_constants_double_critical():
    sc = solver_constants(ProblemParams(3, 0, 3), SpaceParams(3, 4, 0), F(9, 2))
    assert sc.delta == 0
    assert sc.beta == F(1, 6)
    # lower end 1/q - 2/(d alpha*) = 1/3 - 2/9; the midpoint 2/9 is the default auxiliary exponent
    assert sc.window == (F(1, 9), F(1, 3))
    assert sc.aux_inside and not sc.window_empty


def test_solver_constants_subcritical_gain():
    sc = solver_constants(ProblemParams(3, 0, 2), SpaceParams(4, math.inf, 0), 6)
    # delta = d (alpha-1)/2 (1/q_c - 1/q) = 3/2 (2/3 - 1/4)
    assert sc.delta == F(5, 8)
    assert sc.beta == F(1, 8)
    with pytest.raises(P.DomainError):
        solver_constants(ProblemParams(2, 0, 2), SpaceParams(2), 3)


def test_float_gamma_is_tolerant():
    v = classify(ProblemParams(3, 1e-14, 3), SpaceParams(3, 2, 0))
    assert v.regime == P.DOUBLE_CRITICAL


def test_critical_exponents_subcritical_example():
    ce = critical_exponents(ProblemParams(3, 0, 2), SpaceParams(4))
    assert (ce.q_c, ce.Q_c, ce.s_c, ce.S_c) == (F(3, 2), 2, F(5, 4), F(3, 4))
    assert critical_exponents(ProblemParams(1, 0, 2), SpaceParams(1)).alpha_star == math.inf


def test_local_integrability_examples():
    p = ProblemParams(3, 0, 3)
    assert P.nonlinearity_locally_integrable(p, SpaceParams(3, 2, 0))
    assert not P.nonlinearity_locally_integrable(p, SpaceParams(3, 4, 0))
    assert P.nonlinearity_locally_integrable(ProblemParams(3, 0, 2), SpaceParams(10, math.inf, 0))


def test_estimate_violations_are_all_reported():
    r_drop = estimate_admissible(EstimateQuery((2, 2, 0), (2, 1, 0), 3))
    assert r_drop.violated_conditions == (P.EQUAL_SUM_R,)
    # 1/4 + 1/3 > 1/2, so the sums are out of order as well as the weights
    both = estimate_admissible(EstimateQuery((2, math.inf, 0), (4, math.inf, 1), 3))
    assert set(both.violated_conditions) == {P.SUM_ORDER, P.WEIGHT_ORDER}


def test_meyer_balance_is_checked():
    ans = meyer_admissible(EstimateQuery((F(3, 2), 1, 0), (3, math.inf, 0), 3))
    assert ans.violated_conditions == (P.SCALING_BALANCE,)


def test_solver_constants_other_aux():
    sc = solver_constants(ProblemParams(3, 0, 3), SpaceParams(3, 2, 0), 6)
    assert sc.aux_inside and sc.beta == F(1, 4)
    outside = solver_constants(ProblemParams(3, 0, 3), SpaceParams(3, 2, 0), 12)
    assert not outside.aux_inside


@st.composite
def problems(draw):
    d = draw(st.integers(3, 8))
    gamma = draw(st.fractions(min_value=F(-19, 10), max_value=F(4), max_denominator=20))
    alpha = draw(st.fractions(min_value=F(11, 10), max_value=F(8), max_denominator=20))
    return ProblemParams(d, gamma, alpha)


def sign(x):
    return (x > 0) - (x < 0)


@settings(max_examples=2000, deadline=None)
@given(problems())
def test_serrin_trichotomy(p):
    ce = critical_exponents(p, SpaceParams(2))
    assert sign(p.alpha - ce.alpha_star) == sign(ce.q_c - ce.Q_c)


@settings(max_examples=400, deadline=None)
@given(tuples())
def test_uniqueness_needs_integrability(tp):
    p, sp = tp
    if p.d + p.gamma <= 0 or (p.d == 1 and p.gamma == -1):
        return
    if classify(p, sp).verdict == P.UNCONDITIONAL:
        assert P.nonlinearity_locally_integrable(p, sp)


@settings(max_examples=300, deadline=None)
@given(problems(), st.fractions(min_value=F(1, 20), max_value=F(19, 20), max_denominator=40),
       st.fractions(min_value=F(-1, 2), max_value=F(1, 2), max_denominator=8))
def test_regime_depends_on_the_scaling_sum_only(p, x, shift):
    """Moving (q, s) along s/d + 1/q = x keeps the regime."""
    s1 = F(0)
    s2 = shift * p.d
    q1, q2 = 1 / (x - s1 / p.d), None
    if x - s2 / p.d <= 0:
        return
    q2 = 1 / (x - s2 / p.d)
    if q1 < 1 or q2 < 1:
        return
    a = scaling_regime(p, SpaceParams(q1, 2, s1))
    b = scaling_regime(p, SpaceParams(q2, 2, s2))
    assert a == b


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 6), st.fractions(min_value=F(7, 6), max_value=20, max_denominator=6),
       st.fractions(min_value=F(-1), max_value=F(1), max_denominator=6),
       st.fractions(min_value=F(1, 2), max_value=F(6), max_denominator=4),
       st.fractions(min_value=0, max_value=F(6), max_denominator=4))
def test_identity_pair_is_admissible(d, q, s, r1, dr):
    """Same (q, s) on both sides with r1 <= r2: admissible with exponent 0."""
    x = s / d + 1 / q
    if not 0 < x < 1:
        return
    ans = estimate_admissible(EstimateQuery((q, r1, s), (q, r1 + dr, s), d))
    assert ans.admissible and ans.decay_exponent == 0
