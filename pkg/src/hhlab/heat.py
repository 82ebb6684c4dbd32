"""The heat semigroup on radial functions, its Duhamel integral, and decay-rate probes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline
from scipy.special import gammaln, roots_jacobi

from . import _heat_py
from .lorentz import lorentz_norm
from .params import (EQUAL_SUM_R, EstimateQuery, as_float, estimate_admissible, exponent,
                     meyer_admissible)
from .radial import RadialFunction, log_grid, sphere_area

try:
    from . import _heat_core
except ImportError:  # no compiler at install time
    _heat_core = None

FLUSH = 1e-300
GL_ORDER = 8
WINDOW = 13.0      # kernel window half-width in units of sqrt(t); exp(-WINDOW^2/4) < 1e-18
PANEL_REL = 0.15   # panel width relative to radius near the origin
PANEL_ABS = 0.5    # panel width in units of sqrt(t) further out


def backend() -> str:
    return "compiled" if _heat_core is not None else "python"


@lru_cache(maxsize=None)
def _gauss_legendre(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


@dataclass(frozen=True)
class HeatKernelEvaluator:
    """Spherical average of the Gaussian kernel, K_t(r, rho) = mean over |y|=rho of G_t(x - y).

    Dimensions 1 and 3 have elementary closed forms. Other dimensions integrate
    exp(z cos(theta)) sin(theta)^(d-2) with Gauss-Legendre nodes, summing in the
    log domain so large r*rho/t does not overflow.
    """

    d: int
    order: int = 96
    log_domain: bool = True
    mode: str = field(init=False)

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be positive")
        mode = {1: "closed_form_d1", 3: "closed_form_d3"}.get(self.d, "angular_quadrature")
        object.__setattr__(self, "mode", mode)

    def kernel(self, r, rho, t):
        r, rho = np.broadcast_arrays(np.asarray(r, float), np.asarray(rho, float))
        if t <= 0:
            raise ValueError("t must be positive")
        gap = -(r - rho) ** 2 / (4 * t)
        z = r * rho / (2 * t)
        if self.mode == "closed_form_d1":
            return (4 * math.pi * t) ** -0.5 * np.exp(gap) * 0.5 * (1 + np.exp(-2 * z))
        if self.mode == "closed_form_d3":
            zs = np.where(z > 0, z, 1.0)
            ratio = np.where(z > 0, -np.expm1(-2 * zs) / (2 * zs), 1.0)
            return (4 * math.pi * t) ** -1.5 * np.exp(gap) * ratio
        return (4 * math.pi * t) ** (-0.5 * self.d) * np.exp(gap + self._log_angular(z))

    def _log_angular(self, z):
        """log of the normalised sphere mean of exp(z (cos(theta) - 1)).

        Nodes are spread over the angles where the integrand exceeds exp(-46).
        """
        x, w = _gauss_legendre(self.order)
        z = np.asarray(z, float)[..., None]
        top = np.arccos(np.clip(1.0 - 46.0 / np.maximum(z, 1e-300), -1.0, 1.0))
        theta = 0.5 * top * (x + 1)
        jac = 0.5 * top * w * np.sin(theta) ** (self.d - 2)
        norm = math.exp(0.5 * math.log(math.pi) + gammaln(0.5 * (self.d - 1)) - gammaln(0.5 * self.d))
        expo = z * (np.cos(theta) - 1.0)
        if self.log_domain:
            peak = np.max(expo, axis=-1, keepdims=True)
            s = np.sum(jac * np.exp(expo - peak), axis=-1)
            return np.log(s / norm) + peak[..., 0]
        return np.log(np.sum(jac * np.exp(expo), axis=-1) / norm)

    def mass(self, r, t, n=4000):
        """|S^{d-1}| * integral of K_t(r, rho) rho^{d-1} d rho, which should be one."""
        w = WINDOW * math.sqrt(t)
        lo, hi = max(0.0, r - w), r + w
        x, wt = _gauss_legendre(GL_ORDER)
        edges = np.linspace(lo, hi, n // GL_ORDER + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        rho = (mid[:, None] + half[:, None] * x).ravel()
        ww = (half[:, None] * wt).ravel()
        return sphere_area(self.d) * float(np.sum(ww * self.kernel(r, rho, t) * rho ** (self.d - 1)))


def head_mass(f: RadialFunction) -> float:
    """Integral over R^d of the head continuation (the part of f inside r0)."""
    if f.head_exponent is None or f.values[0] == 0:
        return 0.0
    a, b = f.head_exponent, f.head_log
    l0 = -math.log(f.r0)
    s_max = math.inf if f.head_cutoff is None else f.head_cutoff - l0
    if s_max <= 0:
        return 0.0
    k = f.d - a
    if math.isinf(s_max) and k <= 0:
        raise ValueError("head is not integrable against the heat kernel")
    if b == 0 and k != 0:
        val = -math.expm1(-k * s_max) / k
    else:
        val, _ = quad(lambda s: math.exp(-k * s) * ((l0 + s) / l0) ** (-b), 0, s_max, limit=200)
    return sphere_area(f.d) * f.values[0] * f.r0 ** f.d * val


def _interpolant(f: RadialFunction):
    """Spline data for the convolution: cubic in log r, of log |f| when f is positive."""
    xs = np.log(f.nodes)
    v = f.values
    if f.mode == "step":
        return _heat_py.STEP, xs, np.zeros((4, xs.size - 1)), v
    nz = np.nonzero(v)[0]
    last = int(nz[-1]) if nz.size else 0
    if nz.size and np.all(v[: last + 1] > 0) and last >= 3:
        # past the last positive node the function is zero (and has no tail)
        xs_p = xs[: last + 1]
        coef = CubicSpline(xs_p, np.log(v[: last + 1])).c
        return _heat_py.LOG_SPLINE, xs_p, np.ascontiguousarray(coef), v
    coef = CubicSpline(xs, v).c
    return _heat_py.LIN_SPLINE, xs, np.ascontiguousarray(coef), v


def _tail_params(f: RadialFunction):
    if f.tail_exponent is None or f.values[-1] == 0:
        return None
    vN = f.values[-1]
    return (math.log(abs(vN)), math.log(f.rN), float(f.tail_exponent), float(f.tail_log),
            math.copysign(1.0, vN))


def _covered_panels(targets, r0, rho_end, width, rel, delta):
    """Panels over [r0, rho_end] that meet some target window [r - width, r + width].

    Geometric (ratio 1 + rel) below delta/rel, uniform of width <= delta above,
    generated only inside the merged windows so wide grids stay cheap.
    """
    knee = delta / rel
    parts = []
    if r0 < knee:
        parts.append(_heat_py.panel_edges(r0, min(knee, rho_end), rel, delta))
    if rho_end > knee:
        lo = np.maximum(targets - width, knee)
        hi = np.minimum(targets + width, rho_end)
        ok = lo < hi
        lo, hi = lo[ok], hi[ok]
        if lo.size:
            start = np.r_[True, lo[1:] > hi[:-1]]
            g_lo = lo[start]
            g_hi = hi[np.r_[start[1:], True]]
            for a, b in zip(g_lo, g_hi):
                parts.append(np.linspace(a, b, max(1, int(math.ceil((b - a) / delta))) + 1))
    if not parts:
        return np.empty(0), np.empty(0)
    lo = np.concatenate([p[:-1] for p in parts])
    hi = np.concatenate([p[1:] for p in parts])
    return lo, hi


def _quadrature_points(f, t, mode, xs, coef, step_vals, tail, rho_end):
    """Gauss-Legendre points with weights times f, shared by all targets."""
    sq = math.sqrt(t)
    width = WINDOW * sq
    lo, hi = _covered_panels(f.nodes, f.r0, rho_end, width, PANEL_REL, PANEL_ABS * sq)
    if mode == _heat_py.STEP:
        breaks = f.nodes
    else:
        # near-coincident node pairs mark jumps
        jump = np.nonzero(f.nodes[1:] < f.nodes[:-1] * (1 + 1e-6))[0]
        breaks = np.concatenate([f.nodes[jump], f.nodes[jump + 1]])
    if breaks.size and lo.size:
        k = np.searchsorted(lo, breaks, side="right") - 1
        inner = (k >= 0) & (breaks < hi[np.maximum(k, 0)]) & (breaks > lo[np.maximum(k, 0)])
        if np.any(inner):
            # split panels at breaks; the gaps between merged windows stay excluded
            e = np.union1d(np.concatenate([lo, hi]), breaks[inner])
            mid = 0.5 * (e[1:] + e[:-1])
            k = np.searchsorted(lo, mid, side="right") - 1
            cov = (k >= 0) & (mid < hi[np.maximum(k, 0)])
            lo, hi = e[:-1][cov], e[1:][cov]
    gx, gw = _gauss_legendre(GL_ORDER)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    pts = (mid[:, None] + half[:, None] * gx).ravel()
    w = (half[:, None] * gw).ravel()
    return pts, np.ascontiguousarray(w * _heat_py.evaluate(pts, mode, xs, coef, step_vals, tail))


def apply_semigroup(f: RadialFunction, t: float, use_compiled: bool | None = None) -> RadialFunction:
    """e^{t Lap} f on the grid of f."""
    t = float(t)
    if not t > 0:
        raise ValueError("t must be positive")
    mode, xs, coef, step_vals = _interpolant(f)
    tail = _tail_params(f)
    sq = math.sqrt(t)
    width = WINDOW * sq
    rho_end = f.rN + width if tail is not None else f.rN
    if tail is None:
        nz = np.nonzero(f.values)[0]
        if nz.size == 0 and f.head_exponent is None:
            return f.with_values(np.zeros_like(f.values), head_exponent=0.0, head_cutoff=None)
        if nz.size and nz[-1] + 1 < f.nodes.size:
            rho_end = float(f.nodes[nz[-1] + 1])
    pts, wf = _quadrature_points(f, t, mode, xs, coef, step_vals, tail, rho_end)
    compiled = (_heat_core is not None) if use_compiled is None else use_compiled
    if compiled and _heat_core is None:
        raise RuntimeError("compiled heat core is not available")
    core = _heat_core if compiled else _heat_py
    out = core.heat_sum(f.nodes, t, f.d, pts, wf, width)
    m = head_mass(f)
    if m:
        out = out + m * (4 * math.pi * t) ** (-0.5 * f.d) * np.exp(-f.nodes ** 2 / (4 * t))
    out = np.where(np.abs(out) < FLUSH, 0.0, out)
    return RadialFunction(f.nodes, out, f.d, head_exponent=0.0,
                          tail_exponent=f.tail_exponent if tail is not None else None,
                          tail_log=f.tail_log if tail is not None else 0.0)


# Duhamel integral


def _source(fs, tau):
    return fs if isinstance(fs, RadialFunction) else fs(tau)


def _panels(t, levels):
    """Panel edges graded geometrically toward both ends of [0, t]."""
    left = [0.0] + [0.5 * t * 2.0 ** (-k) for k in range(levels - 1, 0, -1)]
    right = [t - 0.5 * t * 2.0 ** (-k) for k in range(1, levels)] + [t]
    return np.array(left + [0.5 * t] + right)


def duhamel(fs, t: float, endpoint_exponents=(0.0, 0.0), levels: int = 6, order: int = 8,
            start: float = 0.0):
    """Integral over (start, t) of e^{(t - tau) Lap} fs(tau) d tau.

    ``fs`` is a RadialFunction (constant in time) or a callable of tau.
    ``endpoint_exponents = (a, b)`` says the integrand behaves like (t - tau)^-a
    near tau = t and tau^-b near 0. The end panels use Gauss-Jacobi rules with
    those weights; the interior panels are Gauss-Legendre. The tau^-b weight
    only applies when the interval starts at 0.
    """
    a, b = (float(e) for e in endpoint_exponents)
    if a >= 1 or b >= 1:
        raise ValueError("endpoint exponent >= 1: the time integral diverges")
    if not 0 <= start < t:
        raise ValueError("need 0 <= start < t")
    if start > 0:
        b = 0.0
    edges = start + _panels(float(t - start), levels)
    total = None

    def add(tau, weight):
        nonlocal total
        g = apply_semigroup(_source(fs, tau), t - tau)
        total = g.values * weight if total is None else total + g.values * weight
        return g

    gx, gw = _gauss_legendre(order)
    template = None
    for i in range(edges.size - 1):
        lo, hi = edges[i], edges[i + 1]
        half = 0.5 * (hi - lo)
        if i == 0 and b:
            x, w = roots_jacobi(order, 0.0, -b)
            taus = lo + half * (x + 1)
            weights = half ** (1 - b) * w * taus ** b
        elif i == edges.size - 2 and a:
            x, w = roots_jacobi(order, -a, 0.0)
            taus = lo + half * (x + 1)
            weights = half ** (1 - a) * w * (t - taus) ** a
        else:
            taus = lo + half * (gx + 1)
            weights = half * gw
        for tau, wt in zip(taus, weights):
            template = add(float(tau), float(wt))
    return template.with_values(np.where(np.abs(total) < FLUSH, 0.0, total))


# decay probes


def _norm(f, space):
    q, r, s = space
    return lorentz_norm(f, q, r, s)


@dataclass
class SlopeReport:
    slope: float
    per_function: list
    t_grid: list
    proxy: list
    constant: float

    def rows(self):
        return list(zip(self.t_grid, self.proxy))


def measure_decay_slope(dictionary, source, target, t_grid) -> SlopeReport:
    """Log-log slope in t of the dictionary maximum of |e^{t Lap} f|_target / |f|_source."""
    dictionary = list(dictionary)
    if not dictionary:
        raise ValueError("empty dictionary")
    d = dictionary[0].d
    ans = estimate_admissible(EstimateQuery(source, target, d))
    if not ans.admissible:
        raise ValueError(f"inadmissible exponents: {', '.join(ans.violated_conditions)}")
    src = [tuple(as_float(exponent(v)) for v in source)]
    tgt = tuple(as_float(exponent(v)) for v in target)
    ts = np.asarray(t_grid, float)
    lt = np.log(ts)
    table = np.empty((len(dictionary), ts.size))
    for i, f in enumerate(dictionary):
        base = _norm(f, src[0])
        for j, t in enumerate(ts):
            table[i, j] = _norm(apply_semigroup(f, t), tgt) / base
    proxy = table.max(axis=0)
    slope = float(np.polyfit(lt, np.log(proxy), 1)[0])
    per = [float(np.polyfit(lt, np.log(row), 1)[0]) for row in table]
    expo = as_float(ans.decay_exponent)
    const = float(np.exp(np.mean(np.log(proxy) - expo * lt)))
    return SlopeReport(slope, per, ts.tolist(), proxy.tolist(), const)


def default_dictionary(d, nodes=None):
    """Gaussians, truncated power tails at several scales, and indicators."""
    nodes = log_grid() if nodes is None else nodes
    out = [RadialFunction.gaussian(d, t, nodes) for t in (0.25, 1.0, 4.0)]
    for scale in (1.0, 4.0):
        out.append(RadialFunction.from_callable(lambda r, c=scale: (1 + r / c) ** (-d - 1.0), d, nodes))
    out += [RadialFunction.indicator_ball(d, rad, nodes=nodes) for rad in (0.5, 2.0)]
    return out


def dilation_dictionary(d, scales=None, nodes=None):
    """A Gaussian, an indicator and a smooth algebraic bump, each at many dilations.

    The operator norm at time t is the sup over dilations at time 1 rescaled by
    t^exponent, so a dictionary closed under dilation (up to its finite range)
    measures the exponent for any admissible pair, not only for L^1 sources.
    """
    nodes = log_grid(1e-6, 1e3, 1024) if nodes is None else nodes
    scales = 2.0 ** np.arange(-6, 7) if scales is None else scales
    shapes = [RadialFunction.gaussian(d, 1.0, nodes), RadialFunction.indicator_ball(d, 1.0, nodes=nodes),
              RadialFunction.from_callable(lambda r: (1 + r) ** (-d - 1.0), d, nodes)]
    return [f.dilated(lam) for f in shapes for lam in scales]


@dataclass
class NecessityReport:
    condition: str
    source_norm: float
    radii: list
    target_norms: list
    diverges: bool

    def ratios(self):
        v = self.target_norms
        return [v[i + 1] / v[i] for i in range(len(v) - 1)]


def necessity_witness(condition_tag: str, source, target, d: int, log_power: float = 2.0,
                      radii=None, n: int = 2048) -> NecessityReport:
    """Counterexample to the smoothing bound when the source fine index exceeds the target one.

    Builds f = (1+r)^(-d/q1-s1) log(2+r)^(-log_power/r1), checks its source norm is
    finite, then follows the target norm of e^{Lap}(f restricted to B_R) as R grows.
    """
    if condition_tag != EQUAL_SUM_R:
        raise ValueError(f"unsupported condition tag {condition_tag!r}")
    if not log_power > 1:
        raise ValueError("log power must exceed one, otherwise the source norm is infinite")
    q1, r1, s1 = (as_float(exponent(v)) for v in source)
    q2, r2, s2 = (as_float(exponent(v)) for v in target)
    if abs((s1 / d + 1 / q1) - (s2 / d + 1 / q2)) > 1e-12:
        raise ValueError("the witness needs equal scaling sums")
    radii = [10 ** 0.5 * 10 ** (0.5 * (2 ** k - 1)) for k in range(5)] if radii is None else list(radii)
    nodes = np.geomspace(1e-6, 4 * max(radii), n)
    lp = 0.0 if math.isinf(r1) else log_power / r1

    def profile(r):
        return (1 + r) ** (-d / q1 - s1) * np.log(2 + r) ** (-lp)

    full = RadialFunction(nodes, profile(nodes), d, head_exponent=0.0,
                          tail_exponent=d / q1 + s1, tail_log=lp)
    src = lorentz_norm(full, q1, r1, s1)
    norms = []
    for rad in radii:
        fr = full.truncated(rad)
        norms.append(lorentz_norm(apply_semigroup(fr, 1.0), q2, r2, s2))
    grows = all(b > a for a, b in zip(norms, norms[1:]))
    ratios = [b / a for a, b in zip(norms, norms[1:])]
    return NecessityReport(condition_tag, src, radii, norms, grows and min(ratios) > 1.1)


def meyer_probe(fs, t_values, source, target, d: int, sup_norm: float | None = None):
    """|Duhamel integral at t|_target / sup over tau of |fs(tau)|_source, for each t."""
    ans = meyer_admissible(EstimateQuery(source, target, d))
    if not ans.admissible:
        raise ValueError(f"inadmissible exponents: {', '.join(ans.violated_conditions)}")
    src = tuple(as_float(exponent(v)) for v in source)
    tgt = tuple(as_float(exponent(v)) for v in target)
    if sup_norm is None:
        if not isinstance(fs, RadialFunction):
            raise ValueError("pass sup_norm for time-dependent sources")
        sup_norm = _norm(fs, src)
    out = []
    for t in t_values:
        if sup_norm == 0:
            out.append(0.0)
            continue
        out.append(_norm(duhamel(fs, t), tgt) / sup_norm)
    return np.array(out)
