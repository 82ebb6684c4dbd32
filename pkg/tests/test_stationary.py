import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from hhlab.lorentz import lorentz_norm
from hhlab.stationary import (HITS_ZERO, INCONCLUSIVE, REMOVABLE, SINGULAR, Bands, ClassificationError,
                              EmdenProfile, _integrate, _outcome, asymptotic_constant, build_extension,
                              cutoff, flux_limit_constant, limit_constant, sample_times, smooth_step,
                              smooth_step_derivatives, solve_emden, upper_bound_check)

CASES = [(3, 0.0), (4, 0.0), (3, -1.0)]


@pytest.fixture(params=CASES, ids=lambda c: f"d{c[0]}g{c[1]:g}")
def prof(request, emden):
    return emden(*request.param).value


def test_profile_shape(prof):
    assert prof.classification == SINGULAR
    assert np.all(prof.u > 0)
    assert np.all(np.diff(prof.u) < 0)
    assert np.all(prof.flux > 0)
    assert -0.05 < prof.phase_ratio[-1] <= 0
    assert prof.t[-1] == pytest.approx(1e3)


def test_ode_resubstitution(prof):
    assert np.max(prof.ode_residual()) < 1e-8


def test_integral_identity(prof):
    assert np.max(np.abs(prof.integral_identity_residual())) < 1e-6


def test_radial_equation_in_r(prof):
    r = np.geomspace(1e-6, 0.5, 60)
    assert np.max(prof.pde_residual(r)) < 1e-6


def test_matches_direct_integration_in_r(prof):
    # integrate U'' + (d-1)/r U' + r^gamma U^p = 0 inward from r = 1
    d, g, p = prof.d, prof.gamma, prof.p

    def rhs(r, y):
        return [y[1], -(d - 1) / r * y[1] - r**g * y[0] ** p]

    r_end = 1e-3
    sol = solve_ivp(rhs, (1.0, r_end), [float(prof.U(1.0)), float(prof.dU(1.0))],
                    method="DOP853", rtol=1e-13, atol=1e-14, dense_output=True)
    r = np.geomspace(r_end, 1.0, 25)
    assert np.max(np.abs(sol.sol(r)[0] / prof.U(r) - 1)) < 1e-8


def _lane_emden(xi_end):
    x0 = 1e-6
    sol = solve_ivp(lambda x, y: [y[1], -y[0] ** 3 - 2 * y[1] / x], (x0, xi_end),
                    [1 - x0**2 / 6, -x0 / 3], method="DOP853", rtol=1e-13, atol=1e-15)
    return sol.y[0, -1], sol.y[1, -1]


def test_threshold_is_the_regular_solution(emden):
    # the regular solutions of Lap U + U^3 = 0 in 3d are lam theta(lam r) with theta the
    # Lane-Emden function of index 3; matching u(0) = r U at r = 1 fixes lam
    prof = emden(3, 0.0).value
    u0 = prof.u[0]
    lam = brentq(lambda x: x * _lane_emden(x)[0] - u0, 0.01, 2.0, xtol=1e-14)
    theta, dtheta = _lane_emden(lam)
    assert prof.threshold_slope == pytest.approx(-(lam * theta + lam**2 * dtheta), rel=1e-8)


def test_asymptotics(prof):
    rep = asymptotic_constant(prof)
    d, g = prof.d, prof.gamma
    assert rep.estimate == pytest.approx(limit_constant(d, g), rel=0.10)
    assert rep.flux_estimate == pytest.approx(flux_limit_constant(d, g), rel=0.10)
    assert rep.monotone


def test_limit_constants():
    assert limit_constant(3) == pytest.approx(math.sqrt(0.5), rel=1e-15)
    assert limit_constant(4) == pytest.approx(2.0, rel=1e-15)
    assert flux_limit_constant(3) == pytest.approx(2 ** -0.5, rel=1e-15)
    # flux and profile limits differ by the factor (d-2) at leading order
    for d, g in CASES:
        assert flux_limit_constant(d, g) == pytest.approx((d - 2) * limit_constant(d, g), rel=1e-12)


def test_extrapolation_beats_the_endpoint(emden):
    rep = asymptotic_constant(emden(3, 0.0).value)
    exact = limit_constant(3)
    assert abs(rep.estimate - exact) < abs(rep.last_value - exact)


def test_upper_bound(prof):
    rep = upper_bound_check(prof)
    assert rep.bounded
    m = prof.t >= 2
    assert np.all(prof.t[m] ** prof.decay_power * prof.u[m] <= rep.constant * (1 + 1e-12))
    # the scaled profile climbs to its limit from below, so the sup over a finite
    # range sits at the right end and stays under the limit constant
    assert rep.argmax == prof.t[-1] and not rep.interior
    assert rep.constant < limit_constant(prof.d, prof.gamma)


@pytest.mark.parametrize("u0", [0.1, 0.5, 1.0])
def test_second_order_asymptotics(u0):
    # for d = 3, gamma = 0 the slow branch is u' = -u^3 - 3u^5 + O(u^7), so
    # t - 1/(2u^2) - 3 log u tends to a constant with an O(1/t) error
    prof = solve_emden(3, 0.0, u0=u0)
    t = np.array([100.0, 300.0, 1000.0])
    u = prof.value(t)
    c = t - 1 / (2 * u**2) - 3 * np.log(u)
    assert abs(c[2] - c[1]) < 0.02
    assert abs(c[2] - c[1]) < abs(c[1] - c[0])


def _profile(t, u, d=3):
    u_t = np.gradient(u, t)
    return EmdenProfile(t, u, u_t, 3.0, d, 0.0, 0.0, REMOVABLE)


def test_upper_bound_on_removable_decay():
    t = sample_times(1e3)
    rep = upper_bound_check(_profile(t, np.exp(-t)))
    assert rep.bounded and rep.constant < 1


def test_upper_bound_flags_growth():
    t = sample_times(1e3)[1:]
    rep = upper_bound_check(_profile(t, t ** -0.4))
    assert not rep.bounded


def test_bands():
    b = Bands()
    assert b.classify(-0.01, 3) == SINGULAR
    assert b.classify(0.0, 3) == SINGULAR
    assert b.classify(-0.98, 3) == REMOVABLE
    assert b.classify(-0.5, 3) == INCONCLUSIVE
    assert Bands(singular=0.6).classify(-0.5, 3) == SINGULAR


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 1.0))
def test_dichotomy(frac):
    # slopes in (-(d-2) u0, 0] with u0 = 1: below the regular threshold u hits zero,
    # above it the trajectory lands on the singular branch
    d, p = 3, 3.0
    threshold = -0.5480160006331369
    slope = -1 + 1e-9 + frac * (1 - 1e-9)
    kind = _outcome(_integrate(d, p, 1.0, slope, 1e3), d, Bands())
    assert kind in (HITS_ZERO, SINGULAR, REMOVABLE)
    if slope < threshold - 1e-6:
        assert kind == HITS_ZERO
    elif slope > threshold + 1e-6:
        assert kind == SINGULAR


def test_bad_input():
    with pytest.raises(ValueError):
        solve_emden(3, 0.0, u0=0.0)
    with pytest.raises(ValueError):
        solve_emden(3, 0.0, u0=-1.0)
    with pytest.raises(ValueError):
        solve_emden(2, 0.0, u0=1.0)
    with pytest.raises(ValueError):
        solve_emden(3, -2.0, u0=1.0)
    with pytest.raises(ValueError):
        solve_emden(3, 0.0, u0=1.0, slope_window=(-0.2, -0.5))
    with pytest.raises(ClassificationError):
        solve_emden(3, 0.0, u0=1.0, slope_window=(-0.99, -0.9))


def test_sample_times():
    t = sample_times(1e3)
    assert t[0] == 0 and t[-1] == pytest.approx(1e3)
    assert np.all(np.diff(t) > 0)


# cutoff


@given(st.floats(-1.0, 2.0))
def test_smooth_step_symmetry(x):
    assert smooth_step(x) + smooth_step(1 - x) == pytest.approx(1.0, abs=1e-15)
    assert 0 <= smooth_step(x) <= 1


def test_smooth_step_is_monotone_and_flat_at_the_ends():
    x = np.linspace(-0.5, 1.5, 2001)
    s = smooth_step(x)
    assert np.all(np.diff(s) >= 0)
    assert np.all(s[x <= 0] == 0) and np.all(s[x >= 1] == 1)
    d1, d2 = smooth_step_derivatives(np.array([1e-3, 0.999]))
    assert np.all(np.abs(d1) < 1e-100) and np.all(np.abs(d2) < 1e-100)


def test_smooth_step_derivatives_against_differences():
    x = np.linspace(0.05, 0.95, 19)
    h = 1e-4
    d1, d2 = smooth_step_derivatives(x)
    fd1 = (smooth_step(x + h) - smooth_step(x - h)) / (2 * h)
    fd2 = (smooth_step(x + h) - 2 * smooth_step(x) + smooth_step(x - h)) / h**2
    assert np.max(np.abs(d1 - fd1)) < 1e-6
    assert np.max(np.abs(d2 - fd2)) < 1e-4


def test_cutoff_ends():
    assert cutoff(0.1, 0.25, 0.5) == 1.0
    assert cutoff(0.5, 0.25, 0.5) == 0.0
    assert 0 < cutoff(0.375, 0.25, 0.5) < 1


# extension


def test_extension_support(extension3):
    ext = extension3
    inner, outer = ext.cutoff
    assert (inner, outer) == (0.25, 0.5)
    V, R = ext.V0, ext.R
    assert np.all(V.values >= 0)
    assert not np.any(V.values[V.nodes >= outer])
    live = R.nodes[R.values != 0]
    assert live.min() >= inner / 2 and live.max() <= outer
    assert not np.any(R.values[R.nodes <= inner])
    assert np.all(np.isfinite(R.values)) and np.max(np.abs(R.values)) > 0


def test_extension_matches_profile_inside(extension3):
    V, prof = extension3.V0, extension3.profile
    m = V.nodes <= 0.25
    assert np.array_equal(V.values[m], prof.U(V.nodes[m]))
    assert V.head_exponent == 1.0 and V.head_log == 0.5


def test_residual_against_differences(extension3):
    # independent check of R = Lap V0 + V0^3 with second differences in r
    prof = extension3.profile

    def v(r):
        return cutoff(r, 0.25, 0.5) * prof.U(r)

    R = extension3.R
    m = (R.nodes > 0.27) & (R.nodes < 0.48)
    r = R.nodes[m]
    h = 1e-4
    lap = (v(r + h) - 2 * v(r) + v(r - h)) / h**2 + 2 / r * (v(r + h) - v(r - h)) / (2 * h)
    want = lap + v(r) ** 3
    assert np.max(np.abs(R.values[m] - want)) < 1e-5 * np.max(np.abs(want))


def test_extension_norms(extension3):
    V = extension3.V0
    assert lorentz_norm(V, 3, 2, 0) == math.inf
    assert math.isfinite(lorentz_norm(V, 3, 4, 0))
    assert math.isfinite(lorentz_norm(V, 3, math.inf, 0))
    assert lorentz_norm(V, 4, math.inf, 0) == math.inf


def test_extension_rejects_bad_radii(emden):
    prof = emden(3, 0.0).value
    for radii in [(0.5, 0.25), (0.0, 0.5), (0.25, 1.0), (0.3, 0.3)]:
        with pytest.raises(ValueError):
            build_extension(prof, radii)
