"""Forward self-similar solutions u(t, x) = t^-k W(x / sqrt(t)) with k = (2+gamma)/(2(alpha-1)).

The profile solves the radial ODE

    W'' + ((d-1)/r + r/2) W' + k W + r^gamma |W|^(alpha-1) W = 0,  W(0) = a, W'(0) = 0.

Small a gives positive profiles with algebraic decay r^-2k; large a makes W
change sign. The boundary value a* between the two gives the rapidly decaying
profile W ~ C r^(2k-d) exp(-r^2/4), found by bisection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq
from scipy.special import binom

from .heat import duhamel
from .lorentz import lorentz_norm
from .params import as_float
from .radial import RadialFunction, log_grid

GAUSSIAN_FAST = "gaussian_fast"
ALGEBRAIC_SLOW = "algebraic_slow"
SIGN_CHANGE = "sign_change"

R_START = 1e-3
R_END = 14.0


def similarity_power(d, gamma, alpha):
    return (2 + gamma) / (2 * (alpha - 1))


def fujita_exponent(d, gamma):
    return 1 + (2 + gamma) / d


def sobolev_exponent(d, gamma):
    return math.inf if d <= 2 else (d + 2 + 2 * gamma) / (d - 2)


def gamma_covered(d, gamma):
    """Range of gamma where positive rapidly decaying profiles are known to exist."""
    top = math.sqrt(3) - 1 if d == 3 else 0.0
    return -2 < gamma <= top


SERIES_DEGREE = 4


def _truncated_product(x, y):
    n = x.shape[0]
    out = np.zeros_like(x)
    for i in range(n):
        for j in range(n - i):
            if x[i, j]:
                out[i:, j:] += x[i, j] * y[: n - i, : n - j]
    # keep total degree below n
    return np.where(np.add.outer(np.arange(n), np.arange(n)) < n, out, 0.0)


def series_coefficients(a, d, gamma, alpha, degree=SERIES_DEGREE):
    """Coefficients c[i, j] of W = sum c[i, j] r^(2i + (2+gamma) j) about r = 0.

    The radial operator maps r^m to m (m+d-2) r^(m-2), so each coefficient is fixed
    by the drift and linear terms at (i-1, j) and the power term at (i, j-1).
    |W|^(alpha-1) W is expanded as |a|^(alpha-1) a (1 + z)^alpha with z = W/a - 1.
    """
    k = similarity_power(d, gamma, alpha)
    n = degree + 1
    c = np.zeros((n, n))
    c[0, 0] = a

    def e(i, j):
        return 2 * i + (2 + gamma) * j

    for total in range(1, n):
        z = c / a
        z[0, 0] = 0.0
        power, term = np.zeros((n, n)), np.zeros((n, n))
        term[0, 0] = 1.0
        for m in range(total):
            power += binom(alpha, m) * term
            term = _truncated_product(term, z)
        power *= abs(a) ** (alpha - 1) * a
        for i in range(total + 1):
            j = total - i
            rhs = (e(i - 1, j) / 2 + k) * c[i - 1, j] if i else 0.0
            if j:
                rhs += power[i, j - 1]
            m = e(i, j)
            c[i, j] = -rhs / (m * (m + d - 2))
    return c


def _series(a, r, d, gamma, alpha):
    """W and W' near r = 0 from the double power series."""
    r = np.asarray(r, float)
    if a == 0:
        return np.zeros_like(r), np.zeros_like(r)
    c = series_coefficients(a, d, gamma, alpha)
    w, dw = np.zeros_like(r), np.zeros_like(r)
    for (i, j), coef in np.ndenumerate(c):
        if coef:
            m = 2 * i + (2 + gamma) * j
            w = w + coef * r**m
            if m:
                dw = dw + coef * m * r ** (m - 1)
    return w, dw


def _rhs(d, gamma, alpha):
    k = similarity_power(d, gamma, alpha)

    def f(r, y):
        w, dw = y
        return [dw, -((d - 1) / r + 0.5 * r) * dw - k * w - r**gamma * abs(w) ** (alpha - 1) * w]
    return f


def _zero(r, y):
    return y[0]


_zero.terminal = True


def start_radius(a, gamma, alpha):
    """Where the series hands over to the integrator.

    Keeps a^(alpha-1) r^(2+gamma) below 1e-4, so the neglected terms of the series
    are of relative size 1e-20.
    """
    r = min(R_START, (1e-4 / max(abs(a), 1.0) ** (alpha - 1)) ** (1 / (2 + gamma)))
    if r < 1e-12:
        raise RuntimeError("series start radius too small for this shooting value")
    return r


def _shoot(a, d, gamma, alpha, r_end=R_END):
    r0 = start_radius(a, gamma, alpha)
    y0 = _series(a, r0, d, gamma, alpha)
    return solve_ivp(_rhs(d, gamma, alpha), (r0, r_end), [float(y0[0]), float(y0[1])], method="DOP853",
                     rtol=1e-13, atol=1e-300, events=_zero, dense_output=True)


def _kind(sol):
    return SIGN_CHANGE if sol.status == 1 else ALGEBRAIC_SLOW


@dataclass
class SimilarityProfile:
    """W on [0, inf): series near 0, ODE dense output up to r_fit, Gaussian tail beyond."""

    a: float
    d: int
    gamma: float
    alpha: float
    classification: str
    r_fit: float
    tail_constant: float
    outside_theory: bool
    sol: object = field(repr=False)

    @property
    def k(self):
        return similarity_power(self.d, self.gamma, self.alpha)

    @property
    def tail_power(self):
        """Power of r in the rapid decay, 2k - d."""
        return 2 * self.k - self.d

    def __call__(self, r):
        r = np.asarray(r, float)
        out = np.empty_like(r)
        lo = r < start_radius(self.a, self.gamma, self.alpha)
        hi = r > self.r_fit
        mid = ~(lo | hi)
        out[lo] = _series(self.a, r[lo], self.d, self.gamma, self.alpha)[0]
        if mid.any():
            out[mid] = self.sol(r[mid])[0]
        rh = r[hi]
        out[hi] = self.tail_constant * rh ** self.tail_power * np.exp(-rh**2 / 4)
        return out

    def derivative(self, r):
        r = np.asarray(r, float)
        out = np.empty_like(r)
        lo = r < start_radius(self.a, self.gamma, self.alpha)
        hi = r > self.r_fit
        mid = ~(lo | hi)
        out[lo] = _series(self.a, r[lo], self.d, self.gamma, self.alpha)[1]
        if mid.any():
            out[mid] = self.sol(r[mid])[1]
        rh = r[hi]
        out[hi] = (self.tail_constant * rh ** self.tail_power * np.exp(-rh**2 / 4)
                   * (self.tail_power / rh - rh / 2))
        return out

    def radial(self, nodes=None, time=1.0) -> RadialFunction:
        """u(time) = time^-k W(r / sqrt(time)) on the grid."""
        nodes = log_grid() if nodes is None else np.asarray(nodes, float)
        vals = time ** (-self.k) * self(nodes / math.sqrt(time))
        vals = np.where(np.abs(vals) < 1e-300, 0.0, vals)
        return RadialFunction(nodes, vals, self.d, head_exponent=0.0, tail_exponent=None)

    @property
    def W(self) -> RadialFunction:
        return self.radial()

    def normalized_tail(self, r):
        """r^(d-2k) exp(r^2/4) W(r), which tends to the tail constant."""
        r = np.asarray(r, float)
        return r ** (-self.tail_power) * np.exp(r**2 / 4) * self(r)

    def ode_residual(self, r, h=1e-3):
        """Residual of the profile equation; W'' by a five-point difference of the dense W'."""
        r = np.asarray(r, float)
        w, d1 = self(r), self.derivative(r)
        d2 = (8 * (self.derivative(r + h) - self.derivative(r - h))
              - (self.derivative(r + 2 * h) - self.derivative(r - 2 * h))) / (12 * h)
        return (d2 + ((self.d - 1) / r + 0.5 * r) * d1 + self.k * w
                + r**self.gamma * np.abs(w) ** (self.alpha - 1) * w)


def _fit_radius(sol, d, gamma, alpha, r_end=R_END):
    """Largest r where the trajectory still follows the rapid decay.

    The rapid branch has r W'/W = (2k - d) - r^2/2 up to O(r^-2); the slow branch
    has r W'/W -> -2k. Trust the solution while the log-derivative stays within
    ten percent of the rapid value.
    """
    k = similarity_power(d, gamma, alpha)
    r = np.linspace(2.0, r_end, 4000)
    w, dw = sol(r)
    ok = w > 0
    fast = (2 * k - d) - r**2 / 2
    rel = np.where(ok, (r * dw / np.where(ok, w, 1.0) - fast) / np.abs(fast), np.inf)
    good = np.abs(rel) < 0.1
    # the O(r^-2) correction can exceed ten percent near r = 2, so the trusted
    # stretch starts wherever agreement first sets in
    first = np.argmax(good) if good.any() else r.size
    bad = np.nonzero(~good[first:])[0]
    stop = first + (bad[0] if bad.size else r.size - first)
    if stop - first < 10:
        raise RuntimeError("profile never settles on the rapidly decaying branch")
    return float(r[stop - 1] * 0.85)


def shoot_profile(d: int, gamma: float, alpha: float, a_window=(1e-3, 50.0),
                  tol: float = 1e-15, allow_outside: bool = False) -> SimilarityProfile:
    """Rapidly decaying positive profile by bisection on W(0)."""
    if d < 3:
        raise ValueError("the shooter needs d >= 3")
    if not gamma > -2:
        raise ValueError("need gamma > -2")
    lo_a, hi_a = fujita_exponent(d, gamma), sobolev_exponent(d, gamma)
    if not lo_a < alpha < hi_a:
        raise ValueError(f"alpha must lie in ({lo_a:g}, {hi_a:g}) for a positive rapidly decaying profile")
    outside = not gamma_covered(d, gamma)
    if outside and not allow_outside:
        raise ValueError("gamma outside the range where such profiles are known to exist; "
                         "pass allow_outside=True to try anyway")
    a, b = a_window
    if not 0 < a < b:
        raise ValueError("a_window must be positive and increasing")
    if _kind(_shoot(a, d, gamma, alpha)) != ALGEBRAIC_SLOW or _kind(_shoot(b, d, gamma, alpha)) != SIGN_CHANGE:
        raise ValueError("window does not bracket the sign change")
    while b - a > tol * b:
        m = 0.5 * (a + b)
        if m in (a, b):
            break
        if _kind(_shoot(m, d, gamma, alpha)) == SIGN_CHANGE:
            b = m
        else:
            a = m
    sol = _shoot(a, d, gamma, alpha).sol
    r_fit = _fit_radius(sol, d, gamma, alpha)
    k = similarity_power(d, gamma, alpha)
    c = float(sol(r_fit)[0] * r_fit ** (d - 2 * k) * math.exp(r_fit**2 / 4))
    return SimilarityProfile(a, d, float(gamma), float(alpha), GAUSSIAN_FAST, r_fit, c, outside, sol)


def tail_report(prof: SimilarityProfile):
    """Tail diagnostics below r_fit.

    drift is the relative spread of r^(-tail_power) e^(r^2/4) W over the last decade of
    decay, i.e. from where W is ten times its value at r_fit out to r_fit.
    """
    end = prof.r_fit
    r_lo = brentq(lambda x: prof(x) - 10 * prof(end), 1e-3, end)
    c = prof.normalized_tail(np.linspace(r_lo, end, 50))
    r = np.linspace(end / 2, end, 50)
    slope = np.polyfit(r**2 / 4, np.log(prof(r)) - prof.tail_power * np.log(r), 1)[0]
    return {"tail_constant": prof.tail_constant, "decade_start": float(r_lo),
            "drift": float((c.max() - c.min()) / np.abs(c).max()),
            "gaussian_slope": float(slope),
            "classification": GAUSSIAN_FAST if abs(slope + 1) < 0.05 and c.min() > 0 else ALGEBRAIC_SLOW}


@dataclass
class ScalingReport:
    slope: float
    expected: float
    norms: list
    vanishing: bool


def norm_scaling_check(prof: SimilarityProfile, q, r, s, t_grid) -> ScalingReport:
    """Log-log slope in t of the L^{q,r}_s norm of the solution at time t."""
    q_, s_ = as_float(q), as_float(s)
    d = prof.d
    x = s_ / d + 1 / q_
    if not 0 < x < 1:
        raise ValueError("need 0 < s/d + 1/q < 1")
    inv_qc = (2 + prof.gamma) / (d * (prof.alpha - 1))
    expected = 0.5 * d * (x - inv_qc)
    base = prof.W
    ts = np.asarray(t_grid, float)
    norms = []
    for t in ts:
        psi = base.dilated(1 / math.sqrt(t)).scaled(t ** (-prof.k))
        norms.append(lorentz_norm(psi, q, r, s))
    slope = float(np.polyfit(np.log(ts), np.log(norms), 1)[0])
    return ScalingReport(slope, expected, norms, x > inv_qc)


def convergence_window(d, gamma, alpha, q, s):
    """Auxiliary (q~, s~) that make the Duhamel integral of the solution converge absolutely, or None.

    Needs s~ >= (s+gamma)/alpha, 0 < alpha/q~ < 1, alpha/q~ + alpha s~/d < (gamma+d)/d and
    1/q + (gamma+s)/d < alpha/q~ + alpha s~/d < 2/d + 1/q + (gamma+s)/d.
    """
    q, s = as_float(q), as_float(s)
    lower = 1 / q + (gamma + s) / d
    upper = min((gamma + d) / d, 2 / d + lower)
    if not lower < upper:
        return None
    total = 0.5 * (lower + upper)
    y = (s + gamma) / d               # alpha s~ / d at its smallest
    xq = total - y                    # alpha / q~
    if not 0 < xq < 1:
        xq = min(max(xq, 1e-6), 1 - 1e-6)
        y = total - xq
    return alpha / xq, d * y / alpha


def mild_residual(prof: SimilarityProfile | None, t: float, q=2, r=2, s=0, d=None, gamma=0.0,
                  alpha=None, levels: int = 6, order: int = 8, nodes=None) -> float:
    """|u(t) - int_0^t e^{(t-tau) Lap}(|x|^gamma |u|^(alpha-1) u)(tau) d tau| / |u(t)|.

    ``prof=None`` stands for the zero solution, whose residual is zero.
    """
    if prof is None:
        return 0.0
    d, gamma, alpha = prof.d, prof.gamma, prof.alpha
    if convergence_window(d, gamma, alpha, q, s) is None:
        raise ValueError("no auxiliary space makes the Duhamel integral converge")
    nodes = log_grid() if nodes is None else nodes

    def source(tau):
        psi = prof.radial(nodes, tau).values
        return RadialFunction(nodes, nodes**gamma * np.abs(psi) ** (alpha - 1) * psi, d,
                              head_exponent=-gamma if gamma < 0 else 0.0, tail_exponent=None)

    # the source mass scales like tau^(d/2 + gamma/2 - k alpha); only a blow-up is an endpoint weight
    b = max(0.0, prof.k * alpha - 0.5 * (d + gamma))
    rhs = duhamel(source, t, (0.0, b), levels=levels, order=order)
    lhs = prof.radial(nodes, t)
    diff = lhs.with_values(lhs.values - rhs.values)
    return lorentz_norm(diff, q, r, s) / lorentz_norm(lhs, q, r, s)
