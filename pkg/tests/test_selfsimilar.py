import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from hhlab.lorentz import lorentz_norm
from hhlab.selfsimilar import (ALGEBRAIC_SLOW, GAUSSIAN_FAST, SIGN_CHANGE, _rhs, _series, convergence_window,
                               fujita_exponent, mild_residual, norm_scaling_check, series_coefficients,
                               shoot_profile, similarity_power, sobolev_exponent, start_radius, tail_report)


@pytest.fixture(scope="module")
def prof(profile333):
    return profile333.value


@pytest.fixture(scope="module")
def weighted():
    return shoot_profile(3, -1.0, 2.0)


def _oracle_kind(a, d=3, alpha=3.0):
    # plain two-term start at r = 1e-4 and an implicit integrator
    k = 1 / (alpha - 1)
    r0 = 1e-4
    c2, c3 = -k * a / (2 * d), -a**alpha / (2 * d)
    y0 = [a + (c2 + c3) * r0**2, 2 * (c2 + c3) * r0]

    def f(r, y):
        return [y[1], -((d - 1) / r + r / 2) * y[1] - k * y[0] - abs(y[0]) ** (alpha - 1) * y[0]]

    def hit(r, y):
        return y[0]

    hit.terminal = True
    sol = solve_ivp(f, (r0, 12.0), y0, method="Radau", rtol=1e-11, atol=1e-30, events=hit)
    return sol.status == 1


def test_shooting_value_against_independent_shooter(prof):
    lo, hi = 1.0, 10.0
    for _ in range(45):
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if _oracle_kind(mid) else (mid, hi)
    assert prof.a == pytest.approx(0.5 * (lo + hi), rel=1e-7)


def test_profile_is_positive_and_fast(prof):
    assert prof.classification == GAUSSIAN_FAST
    assert prof.tail_power == -2
    W = prof.W
    live = W.values != 0
    assert np.all(W.values[live] > 0)
    rep = tail_report(prof)
    assert rep["classification"] == GAUSSIAN_FAST
    assert rep["gaussian_slope"] == pytest.approx(-1, abs=0.01)
    assert rep["drift"] < 0.01
    assert rep["tail_constant"] > 0


@pytest.mark.parametrize("which", ["prof", "weighted"])
def test_ode_residual(which, request):
    p = request.getfixturevalue(which)
    r = np.linspace(0.05, p.r_fit - 0.05, 300)
    assert np.max(np.abs(p.ode_residual(r))) < 1e-8
    # near the origin the terms grow like r^gamma, so compare against their size
    r = np.geomspace(1e-6, 0.05, 40)
    w, dw = p(r), p.derivative(r)
    size = np.abs(p.k * w) + r**p.gamma * np.abs(w) ** p.alpha + np.abs((p.d - 1) / r * dw)
    assert np.max(np.abs(p.ode_residual(r, h=r * 1e-2)) / size) < 1e-8


@pytest.mark.parametrize("gamma,alpha", [(0.0, 3.0), (-1.0, 2.0), (-0.5, 2.5), (0.5, 2.0)])
def test_series_solves_the_equation(gamma, alpha):
    # exact derivatives of the truncated series: the residual is of the first neglected order
    d, a = 3, 2.0
    c = series_coefficients(a, d, gamma, alpha)
    k = similarity_power(d, gamma, alpha)
    r = np.geomspace(1e-7, start_radius(a, gamma, alpha), 20)
    w, w1, w2 = (np.zeros_like(r) for _ in range(3))
    for (i, j), coef in np.ndenumerate(c):
        m = 2 * i + (2 + gamma) * j
        w += coef * r**m
        if m:
            w1 += coef * m * r ** (m - 1)
            w2 += coef * m * (m - 1) * r ** (m - 2)
    res = w2 + ((d - 1) / r + r / 2) * w1 + k * w + r**gamma * np.abs(w) ** (alpha - 1) * w
    size = np.abs(k * w) + r**gamma * np.abs(w) ** alpha
    assert np.max(np.abs(res) / size) < 1e-12
    sw, sdw = _series(a, r, d, gamma, alpha)
    assert np.allclose(sw, w, rtol=1e-15) and np.allclose(sdw, w1, rtol=1e-14)


def test_series_low_order_terms():
    d, gamma, alpha, a = 3, 0.0, 3.0, 2.0
    c = series_coefficients(a, d, gamma, alpha)
    k = similarity_power(d, gamma, alpha)
    assert c[0, 0] == a
    assert c[1, 0] == pytest.approx(-k * a / (2 * d))
    assert c[0, 1] == pytest.approx(-a**alpha / ((2 + gamma) * (d + gamma)))


def test_zero_solves_the_equation():
    f = _rhs(3, 0.0, 3.0)
    assert f(1.0, [0.0, 0.0]) == [0.0, 0.0]
    w, dw = _series(0.0, np.array([1e-4]), 3, 0.0, 3.0)
    assert w[0] == 0 and dw[0] == 0


@pytest.mark.parametrize("m", range(9))
def test_moments_of_the_tail_vanish(prof, m):
    r = np.linspace(prof.r_fit, 10 * prof.r_fit, 200)
    g = r**m * prof(r)
    live = g > 0
    assert np.all(np.diff(g[live]) < 0)
    assert g[live][-1] < 1e-250


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(0.01, 100.0), st.floats(0.0, 5.0))
def test_self_similarity(prof, lam, t, x):
    # u(lam^2 t, lam x) lam^(2k) = u(t, x)
    p = prof
    nodes = np.array([max(x, 1e-6), 2 * max(x, 1e-6)])
    lhs = p.radial(lam * nodes, lam**2 * t).values * lam ** (2 * p.k)
    rhs = p.radial(nodes, t).values
    assert rhs[0] == pytest.approx(t ** -p.k * p(nodes[:1] / math.sqrt(t))[0], rel=1e-15)
    assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-300)


@pytest.mark.parametrize("q,slope,vanishing", [(2, 0.25, True), (3, 0.0, False), (6, -0.25, False)])
def test_norm_scaling(prof, q, slope, vanishing):
    rep = norm_scaling_check(prof, q, 2, 0, np.geomspace(1e-2, 1e2, 5))
    assert rep.expected == pytest.approx(slope, abs=1e-15)
    assert rep.slope == pytest.approx(slope, abs=1e-3)
    assert rep.vanishing is vanishing
    if q == 3:
        assert max(rep.norms) / min(rep.norms) == pytest.approx(1, abs=1e-3)


def test_norm_scaling_precondition(prof):
    with pytest.raises(ValueError):
        norm_scaling_check(prof, 1, 1, 0, [1.0, 2.0])
    with pytest.raises(ValueError):
        norm_scaling_check(prof, 2, 2, -2, [1.0, 2.0])


def test_triple_of_solutions(prof):
    # 0 and plus/minus the profile solution: positive norms for t > 0 and vanishing as t -> 0 below the scaling space
    ts = [1e-4, 1e-2, 1.0]
    norms = [lorentz_norm(prof.radial(time=t), 2, 2) for t in ts]
    assert all(n > 0 for n in norms)
    assert norms[0] < norms[1] < norms[2]
    assert norms[0] / norms[2] == pytest.approx(1e-4 ** 0.25, rel=1e-3)
    minus = prof.radial(time=1.0).scaled(-1.0)
    assert lorentz_norm(minus, 2, 2) == norms[-1]


def test_mild_residual_zero_profile():
    assert mild_residual(None, 1.0) == 0.0


def test_mild_residual_needs_convergence(prof):
    assert convergence_window(3, 0.0, 3.0, 1, 0) is None
    with pytest.raises(ValueError):
        mild_residual(prof, 1.0, q=1, r=1)


def test_convergence_window_conditions():
    d, gamma, alpha = 3, 0.0, 3.0
    for q, s in [(2, 0), (3, 0), (6, 0), (2, 0.5)]:
        qt, st_ = convergence_window(d, gamma, alpha, q, s)
        total = alpha / qt + alpha * st_ / d
        assert st_ >= (s + gamma) / alpha - 1e-15
        assert 0 < alpha / qt < 1
        assert total < (gamma + d) / d
        assert 1 / q + (gamma + s) / d < total < 2 / d + 1 / q + (gamma + s) / d


def test_shooting_preconditions():
    assert fujita_exponent(3, 0) == pytest.approx(5 / 3)
    assert sobolev_exponent(3, 0) == 5
    assert sobolev_exponent(2, 0) == math.inf
    with pytest.raises(ValueError):
        shoot_profile(3, 0.0, 1.5)
    with pytest.raises(ValueError):
        shoot_profile(3, 0.0, 5.0)
    with pytest.raises(ValueError):
        shoot_profile(2, 0.0, 3.0)
    with pytest.raises(ValueError):
        shoot_profile(3, 0.0, 3.0, a_window=(1e-3, 1e-2))
    with pytest.raises(ValueError):
        shoot_profile(3, 1.0, 3.0)


def test_outside_theory_is_flagged(prof):
    p = shoot_profile(3, 1.0, 4.0, allow_outside=True)
    assert p.outside_theory and p.classification == GAUSSIAN_FAST
    assert not prof.outside_theory


def test_start_radius_shrinks_for_large_values():
    assert start_radius(1.0, 0.0, 3.0) == 1e-3
    assert start_radius(1e3, 0.0, 3.0) < 1e-3
    with pytest.raises(RuntimeError):
        start_radius(1e30, 0.0, 3.0)


def test_labels_are_distinct():
    assert len({GAUSSIAN_FAST, ALGEBRAIC_SLOW, SIGN_CHANGE}) == 3
