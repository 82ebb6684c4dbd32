"""Singular radial stationary solutions of Lap U + |x|^gamma U^p = 0, p = (d+gamma)/(d-2).

Writing U(r) = r^-(d-2) u(t) with t = -log r turns the equation into the
autonomous system

    u' = v - (d-2) u,    v' = -u^p,

where v = u' + (d-2) u is the radial flux -r^(d-1) U'(r). The integrator works
with (log u, v/u), so trajectories that decay exponentially never underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .radial import RadialFunction, log_grid

HITS_ZERO = "hits-zero"
SINGULAR = "singular"
REMOVABLE = "removable"
INCONCLUSIVE = "inconclusive"


class ClassificationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Bands:
    """Classification of the phase ratio u'/u at the final time."""

    singular: float = 0.05
    removable: float = 0.05

    def classify(self, ratio, d):
        if -self.singular < ratio <= 0:
            return SINGULAR
        if ratio < -(d - 2) + self.removable:
            return REMOVABLE
        return INCONCLUSIVE


@dataclass
class EmdenProfile:
    t: np.ndarray
    u: np.ndarray
    u_t: np.ndarray
    p: float
    d: int
    gamma: float
    slope: float
    classification: str
    threshold_slope: float | None = None
    dense: object = field(default=None, repr=False)  # callable t -> (log u, v/u)
    _spline: CubicHermiteSpline | None = field(default=None, repr=False)

    @property
    def decay_power(self):
        """(d-2)/(2+gamma), the power of t in the decay of u."""
        return (self.d - 2) / (2 + self.gamma)

    @property
    def flux(self):
        return self.u_t + (self.d - 2) * self.u

    @property
    def phase_ratio(self):
        return self.u_t / self.u

    def _log_spline(self):
        if self._spline is None:
            self._spline = CubicHermiteSpline(self.t, np.log(self.u), self.phase_ratio)
        return self._spline

    def value(self, t):
        """u at arbitrary t in the integration range.

        Uses the integrator's dense output when present, otherwise a cubic
        Hermite interpolant of log u.
        """
        if self.dense is not None:
            return np.exp(self.dense(t)[0])
        return np.exp(self._log_spline()(t))

    def derivative(self, t):
        if self.dense is not None:
            ell, w = self.dense(t)
            return np.exp(ell) * (w - (self.d - 2))
        s = self._log_spline()
        return np.exp(s(t)) * s(t, 1)

    def flux_at(self, t):
        return self.derivative(t) + (self.d - 2) * self.value(t)

    def pde_residual(self, r, h=1e-3):
        """Relative residual of -(r^(d-1) U')' = r^(d-1+gamma) U^p at radii r.

        -(r^(d-1) U')' is d/dr of the flux, taken by a fourth-order centred
        difference in log r of the flux itself (not of the right-hand side).
        """
        r = np.asarray(r, float)
        t = -np.log(r)
        f = self.flux_at
        dflux = (-f(t - 2 * h) + 8 * f(t - h) - 8 * f(t + h) + f(t + 2 * h)) / (12 * h)
        lhs = dflux / r
        rhs = r ** (self.d - 1 + self.gamma) * self.U(r) ** self.p
        return np.abs(lhs / rhs - 1)

    def U(self, r):
        """The stationary solution at radius r (0 < r <= 1)."""
        r = np.asarray(r, float)
        return r ** (-(self.d - 2)) * self.value(-np.log(r))

    def dU(self, r):
        r = np.asarray(r, float)
        t = -np.log(r)
        return -r ** (1 - self.d) * (self.derivative(t) + (self.d - 2) * self.value(t))

    def ode_residual(self):
        """Re-substitution residual of the first-order system over each stored step.

        Each step is integrated with the cubic Hermite interpolant built from the
        node values and the right-hand side evaluated at the nodes (Gauss-Legendre,
        exact for the interpolant); the residual is how far the increments miss.
        """
        t, u, v = self.t, self.u, self.flux
        fu = v - (self.d - 2) * u
        fv = -u ** self.p
        x, w = np.polynomial.legendre.leggauss(6)
        h = np.diff(t)
        s = 0.5 * (x[None, :] + 1.0)
        h00, h10 = 2 * s**3 - 3 * s**2 + 1, s**3 - 2 * s**2 + s
        h01, h11 = -2 * s**3 + 3 * s**2, s**3 - s**2

        def interp(y, dy):
            return (h00 * y[:-1, None] + h10 * h[:, None] * dy[:-1, None]
                    + h01 * y[1:, None] + h11 * h[:, None] * dy[1:, None])

        uq = interp(u, fu)
        vq = interp(v, fv)
        wq = 0.5 * h[:, None] * w[None, :]
        ru = np.diff(u) - np.sum(wq * (vq - (self.d - 2) * uq), axis=1)
        rv = np.diff(v) + np.sum(wq * np.abs(uq) ** self.p, axis=1)
        return np.maximum(np.abs(ru), np.abs(rv))

    def integral_identity_residual(self):
        """u' + (d-2) u - int_t^inf u^p at every node.

        The integral is accumulated over the stored steps (Gauss-Legendre on the
        Hermite interpolant) and the part beyond the last node comes from the
        power law fitted to the last two nodes.
        """
        t, u = self.t, self.u
        fu = self.u_t
        x, w = np.polynomial.legendre.leggauss(6)
        h = np.diff(t)
        s = 0.5 * (x[None, :] + 1.0)
        uq = ((2 * s**3 - 3 * s**2 + 1) * u[:-1, None] + (s**3 - 2 * s**2 + s) * h[:, None] * fu[:-1, None]
              + (-2 * s**3 + 3 * s**2) * u[1:, None] + (s**3 - s**2) * h[:, None] * fu[1:, None])
        pieces = np.sum(0.5 * h[:, None] * w[None, :] * uq ** self.p, axis=1)
        rest = np.concatenate([np.cumsum(pieces[::-1])[::-1], [0.0]])
        return self.flux - (rest + self.tail_integral())

    def tail_integral(self):
        """int_{t_max}^inf u^p from the expansion of the flux along the singular branch.

        On that branch v = (d-2) u - u^p/(d-2) - p u^(2p-1)/(d-2)^3 + O(u^(3p-2)),
        and v(t) is exactly the remaining integral of u^p.
        """
        u, k, p = self.u[-1], self.d - 2, self.p
        return k * u - u ** p / k - p * u ** (2 * p - 1) / k ** 3

    def trend(self):
        """(t, t^beta u) for t >= 1."""
        m = self.t >= 1
        return self.t[m], self.t[m] ** self.decay_power * self.u[m]


def _rhs(d, p):
    def f(t, y):
        ell, w = y
        return [w - (d - 2), -math.exp((p - 1) * ell) - w * (w - (d - 2))]
    return f


def _flux_zero(t, y):
    return y[1]


_flux_zero.terminal = True
_flux_zero.direction = -1


def _integrate(d, p, u0, slope, t_max, dense=False, rtol=1e-13, atol=1e-14):
    # once the flux v turns negative u is doomed to reach zero in finite time
    return solve_ivp(_rhs(d, p), (0.0, t_max), [math.log(u0), (slope + (d - 2) * u0) / u0],
                     method="DOP853", rtol=rtol, atol=atol, events=_flux_zero,
                     dense_output=dense)


def _outcome(sol, d, bands):
    w = sol.y[1, -1]
    if sol.status == 1 or w <= 0:
        return HITS_ZERO
    if sol.status == -1:
        # the step size collapsed while v/u was diving toward zero
        return HITS_ZERO if w < 0.5 * (d - 2) else INCONCLUSIVE
    return bands.classify(w - (d - 2), d)


def sample_times(t_max, h=0.02):
    """Uniform spacing h on [0, 1], then ratio 1 + h up to t_max."""
    head = np.linspace(0.0, 1.0, int(round(1 / h)) + 1)
    n = int(math.ceil(math.log(t_max) / math.log1p(h)))
    return np.concatenate([head, np.geomspace(1.0, t_max, max(n, 2) + 1)[1:]])


def solve_emden(d: int, gamma: float = 0.0, u0: float | None = None, slope_window=None,
                t_max: float = 1e3, bands: Bands = Bands(), tol: float = 1e-10) -> EmdenProfile:
    """Singular-branch trajectory with u(0) = u0.

    Low initial slopes make u reach zero; above a threshold every trajectory
    settles on the slowly decaying singular branch, while the threshold itself
    is the removable (regular) solution. Bisection locates the threshold and the
    returned trajectory is the singular candidate farthest from it, the upper end
    of the window.

    Without u0 the start value is 1, halved until the zero slope lands on the
    singular branch (for small p a large start value exhausts the flux first).
    """
    if u0 is None:
        for k in range(20):
            try:
                return solve_emden(d, gamma, 2.0**-k, slope_window, t_max, bands, tol)
            except ClassificationError:
                if k == 19:
                    raise
    if d < 3:
        raise ValueError("the singular stationary profile needs d >= 3")
    if not gamma > -2:
        raise ValueError("need gamma > -2")
    if not u0 > 0:
        raise ValueError("u0 must be positive")
    p = (d + gamma) / (d - 2)
    lo, hi = (-(d - 2) * u0 * (1 - 1e-9), 0.0) if slope_window is None else slope_window
    if not -(d - 2) * u0 <= lo < hi <= 0:
        raise ValueError("slope window must lie in (-(d-2) u0, 0]")
    top = _integrate(d, p, u0, hi, t_max, dense=True)
    top_kind = _outcome(top, d, bands)
    if top_kind != SINGULAR:
        raise ClassificationError(f"upper slope gives a {top_kind} trajectory at t_max={t_max:g}")
    bottom_kind = _outcome(_integrate(d, p, u0, lo, t_max), d, bands)
    threshold = None
    if bottom_kind == HITS_ZERO:
        a, b = lo, hi
        while b - a > tol * max(1.0, abs(a)):
            mid = 0.5 * (a + b)
            kind = _outcome(_integrate(d, p, u0, mid, min(t_max, 200.0)), d, bands)
            if kind == HITS_ZERO:
                a = mid
            else:
                b = mid
        threshold = 0.5 * (a + b)
    elif bottom_kind != SINGULAR:
        raise ClassificationError(f"lower slope gives a {bottom_kind} trajectory")
    t = sample_times(t_max)
    ell, w = top.sol(t)
    u = np.exp(ell)
    u_t = u * (w - (d - 2))
    return EmdenProfile(t, u, u_t, p, d, float(gamma), hi, top_kind, threshold, dense=top.sol)


def limit_constant(d, gamma=0.0):
    """Limit of t^beta u(t) on the singular branch, beta = (d-2)/(2+gamma)."""
    beta = (d - 2) / (2 + gamma)
    return ((d - 2) ** 2 / (2 + gamma)) ** beta


def flux_limit_constant(d, gamma=0.0):
    """Limit of t^beta times the flux int_t^inf u^p."""
    beta = (d - 2) / (2 + gamma)
    return (2 + gamma) ** (-beta) * (d - 2) ** ((2 * d + gamma - 2) / (2 + gamma))


@dataclass
class AsymptoticReport:
    estimate: float
    last_value: float
    monotone: bool
    flux_estimate: float
    samples: list


def _extrapolate(t, g):
    """Limit of g as t -> inf from a least-squares fit of c + k1 log(t)/t + k2/t over the last decade."""
    m = t >= t[-1] / 10
    tt = t[m]
    basis = np.stack([np.ones_like(tt), np.log(tt) / tt, 1.0 / tt], axis=1)
    coef, *_ = np.linalg.lstsq(basis, g[m], rcond=None)
    return float(coef[0])


def asymptotic_constant(prof: EmdenProfile) -> AsymptoticReport:
    if prof.classification != SINGULAR:
        raise ValueError("needs a singular-branch profile")
    t, g = prof.trend()
    tail = g[t >= t[-1] / 10]
    dg = np.diff(tail)
    monotone = bool(np.all(dg >= 0) or np.all(dg <= 0))
    est = _extrapolate(t, g)
    flux_est = _extrapolate(t, t ** prof.decay_power * prof.flux[prof.t >= 1])
    idx = np.unique(np.geomspace(1, t.size, 12).astype(int) - 1)
    return AsymptoticReport(est, float(g[-1]), monotone, flux_est,
                            [(float(t[i]), float(g[i])) for i in idx])


@dataclass
class BoundReport:
    bounded: bool
    constant: float
    argmax: float
    interior: bool


def upper_bound_check(prof: EmdenProfile, t_min: float = 2.0) -> BoundReport:
    """Is u(t) <= C t^-beta over t >= t_min with a single C?

    The ratio t^beta u is taken as bounded when it is finite and its change
    over the last doubling of t is smaller than over the doubling before.
    Exponentially decaying trajectories are bounded outright.
    """
    m = prof.t >= t_min
    t = prof.t[m]
    if t.size < 3 or t[-1] < 4 * t_min:
        raise ValueError("profile too short for the bound check")
    g = t ** prof.decay_power * prof.u[m]
    k = int(np.argmax(g))
    tm = t[-1]
    g1, g2, g3 = np.interp([tm / 4, tm / 2, tm], t, g)
    settling = abs(g3 - g2) <= abs(g2 - g1) or g3 <= g2
    bounded = bool(np.all(np.isfinite(g)) and settling)
    return BoundReport(bounded, float(g[k]), float(t[k]), 0 < k < t.size - 1)


# compactly supported extension


def smooth_step(x):
    """0 for x <= 0, 1 for x >= 1, exp(-1/x) / (exp(-1/x) + exp(-1/(1-x))) between."""
    x = np.asarray(x, float)
    inner = (x > 0) & (x < 1)
    xi = np.where(inner, x, 0.5)
    # ratio form: 1 / (1 + exp(1/x - 1/(1-x)))
    with np.errstate(over="ignore"):
        z = np.clip(1.0 / xi - 1.0 / (1.0 - xi), -700, 700)
    s = 1.0 / (1.0 + np.exp(z))
    return np.where(x >= 1, 1.0, np.where(x <= 0, 0.0, s))


def smooth_step_derivatives(x):
    """First and second derivatives of smooth_step."""
    x = np.asarray(x, float)
    inner = (x > 0) & (x < 1)
    xi = np.where(inner, x, 0.5)
    s = smooth_step(xi)
    z1 = -1.0 / xi**2 - 1.0 / (1.0 - xi) ** 2          # d/dx of (1/x - 1/(1-x))
    z2 = 2.0 / xi**3 - 2.0 / (1.0 - xi) ** 3
    d1 = -s * (1 - s) * z1
    d2 = -s * (1 - s) * z2 - (1 - 2 * s) * d1 * z1
    return np.where(inner, d1, 0.0), np.where(inner, d2, 0.0)


def cutoff(r, inner, outer):
    """1 on r <= inner, 0 on r >= outer, smooth in between."""
    return smooth_step((outer - np.asarray(r, float)) / (outer - inner))


@dataclass
class ExtendedProfile:
    V0: RadialFunction
    R: RadialFunction
    cutoff: tuple
    profile: EmdenProfile


def extension_residual(prof: EmdenProfile, r, radii):
    """Lap(cutoff U0) + |x|^gamma (cutoff U0)^p at radii r, from the product rule."""
    inner, outer = radii
    r = np.asarray(r, float)
    d, g, p = prof.d, prof.gamma, prof.p
    U = prof.U(r)
    dU = prof.dU(r)
    width = outer - inner
    x = (outer - r) / width
    eta = smooth_step(x)
    e1, e2 = smooth_step_derivatives(x)
    deta, d2eta = -e1 / width, e2 / width**2
    out = d2eta * U + deta * (2 * dU + (d - 1) * U / r) + r**g * U**p * (eta**p - eta)
    return np.where((r <= inner) | (r >= outer), 0.0, out)


def build_extension(prof: EmdenProfile, radii=(0.25, 0.5), nodes=None) -> ExtendedProfile:
    """V0 = cutoff * U0 and R = Lap V0 + |x|^gamma V0^p.

    R is evaluated from the closed form of the Laplacian of a product, using
    Lap U0 = -|x|^gamma U0^p, so it vanishes identically where the cutoff is one.
    """
    inner, outer = radii
    if not 0 < inner < outer < 1:
        raise ValueError("need 0 < inner < outer < 1")
    if prof.classification != SINGULAR:
        raise ValueError("needs a singular-branch profile")
    nodes = log_grid() if nodes is None else np.asarray(nodes, float)
    if -math.log(nodes[0]) > prof.t[-1]:
        raise ValueError("profile does not reach the innermost node")
    d, g = prof.d, prof.gamma
    inside = nodes < outer
    r = nodes[inside]
    eta = cutoff(r, inner, outer)
    U = prof.U(r)
    R = extension_residual(prof, r, radii)
    v0 = np.zeros(nodes.size)
    v0[inside] = eta * U
    rr = np.zeros(nodes.size)
    rr[inside] = np.where(r <= inner, 0.0, R)
    beta = (d - 2) / (2 + g)
    V0 = RadialFunction(nodes, v0, d, head_exponent=float(d - 2), head_log=beta, tail_exponent=None)
    Rf = RadialFunction(nodes, rr, d, head_exponent=None, tail_exponent=None)
    return ExtendedProfile(V0, Rf, (inner, outer), prof)


def laplacian_fd(fn, d, r, h=1e-3):
    """Radial Laplacian of the callable fn at r, fourth-order differences in s = log r.

    Lap f = r^-2 (f_ss + (d-2) f_s).
    """
    s = np.log(np.asarray(r, float))
    f = [fn(np.exp(s + k * h)) for k in (-2, -1, 0, 1, 2)]
    fs = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
    fss = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h * h)
    return (fss + (d - 2) * fs) / np.exp(2 * s)
