"""Distribution functions, decreasing rearrangements and weighted Lorentz quasi-norms.

Norms are evaluated through the layer-cake identity

    ||f||_{q,r}^r = q * int_0^inf lam^(r-1) d_f(lam)^(r/q) dlam

which agrees with the rearrangement definition. On level ranges where no
grid cell crosses, d_f is constant and the integral is closed form; where
a power-law cell crosses, the integrand is smooth and is integrated by
Gauss-Legendre in log(lam). The analytic head and tail pieces are handled
separately so that integrability is decided exactly from their exponents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .params import as_float, exponent
from .radial import RadialFunction, ball_volume, log_grid  # noqa: F401  (re-exported)

INF = math.inf
_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)
_SPAN = 0.25  # max log-width of one Gauss-Legendre panel
_EXP_TOL = 1e-12


def _same(a, b):
    return abs(a - b) <= _EXP_TOL * max(1.0, abs(a), abs(b))


def _as_float(x):
    return as_float(exponent(x)) if isinstance(x, str) else float(x)


# decomposition of |x|^s |f| into cells plus analytic ends

@dataclass
class _Head:
    logv0: float
    l0: float
    A: float
    B: float
    lc: float  # analytic part lives on -log r in (lc, L)
    L: float

    def logh(self, ell):
        out = self.logv0 + self.A * (ell - self.l0)
        if self.B:
            out = out - self.B * np.log(ell / self.l0)
        return out

    def slope(self, ell):
        return self.A - (self.B / ell if self.B else 0.0)


@dataclass
class _Tail:
    logvN: float
    uN: float
    a: float
    b: float
    uc: float  # analytic part lives on log r in (uc, inf)

    def logt(self, u):
        out = self.logvN - self.a * (u - self.uN)
        if self.b:
            out = out - self.b * np.log(u / self.uN)
        return out

    def slope(self, u):
        return self.a + (self.b / u if self.b else 0.0)


class _Layout:
    """Cells (power or step) plus optional analytic head and tail."""

    def __init__(self, f: RadialFunction, s: float):
        g = f.weighted(s)
        self.d = g.d
        self.V = ball_volume(g.d)
        x = g.nodes
        v = np.abs(g.values)
        ra, rb, va, vb = [], [], [], []
        if g.mode == "step":
            ra.append(x[:-1]); rb.append(x[1:]); va.append(v[:-1]); vb.append(v[:-1])
        else:
            ok = (v[:-1] > 0) & (v[1:] > 0)
            ra.append(x[:-1][ok]); rb.append(x[1:][ok]); va.append(v[:-1][ok]); vb.append(v[1:][ok])
        self.head = None
        self.head_flat = False
        self.tail = None
        self.tail_flat = False
        self.tail_growing = False

        if g.head_exponent is not None and v[0] > 0:
            A, B = float(g.head_exponent), float(g.head_log)
            l0 = -math.log(x[0])
            L = INF if g.head_cutoff is None else float(g.head_cutoff)
            if L > l0:
                if A > 0 or (A == 0 and B < 0):
                    self.head = _Head(math.log(v[0]), l0, A, B, l0, L)
                elif A == 0 and B == 0:
                    inner = 0.0 if L == INF else math.exp(-L)
                    ra.append(np.array([inner])); rb.append(x[:1])
                    va.append(v[:1]); vb.append(v[:1])
                else:
                    # decaying head: finitely many fine cells carry all but a negligible sliver
                    lo = max(l0, min(L, l0 + 25.0))
                    ells = np.linspace(l0, lo, 401)
                    hd = _Head(math.log(v[0]), l0, A, B, l0, L)
                    vals = np.exp(hd.logh(ells))
                    rr = np.exp(-ells)[::-1]
                    vals = vals[::-1]
                    ra.append(rr[:-1]); rb.append(rr[1:]); va.append(vals[:-1]); vb.append(vals[1:])

        if g.tail_exponent is not None and v[-1] > 0:
            a, b = float(g.tail_exponent), float(g.tail_log)
            if a > 0 or (a == 0 and b > 0):
                uN = math.log(x[-1])
                self.tail = _Tail(math.log(v[-1]), uN, a, b, uN)
            elif a == 0 and b == 0:
                self.tail_flat = True
                self.tail_level = float(v[-1])
            else:
                self.tail_growing = True

        self.ra = np.concatenate(ra) if ra else np.zeros(0)
        self.rb = np.concatenate(rb) if rb else np.zeros(0)
        self.va = np.concatenate(va) if va else np.zeros(0)
        self.vb = np.concatenate(vb) if vb else np.zeros(0)
        self._interleave()
        self._finish()

    def _add_cells(self, rr, vals):
        self.ra = np.concatenate([self.ra, rr[:-1]])
        self.rb = np.concatenate([self.rb, rr[1:]])
        self.va = np.concatenate([self.va, vals[:-1]])
        self.vb = np.concatenate([self.vb, vals[1:]])

    def _interleave(self):
        pos = (self.va > 0) | (self.vb > 0)
        # the tail is matched against the grid cells only, so take its floor before head cells join
        if np.any(pos):
            low = float(np.min(np.minimum(self.va, self.vb)[pos]))
            if low <= 0:
                low = float(np.min(np.maximum(self.va, self.vb)[pos]))
        if self.head is not None and np.any(pos):
            hd = self.head
            top = float(np.max(np.maximum(self.va, self.vb)))
            if math.exp(hd.logh(hd.l0)) < top:
                target = math.log(top)
                if hd.L < INF and hd.logh(hd.L) <= target:
                    lw = hd.L
                else:
                    hi = hd.l0 + 1.0
                    while hd.logh(hi) < target:
                        hi = hd.l0 + 2 * (hi - hd.l0)
                    lw = optimize.brentq(lambda e: hd.logh(e) - target, hd.l0, hi, xtol=1e-14)
                n = int(min(20000, max(8, math.ceil((lw - hd.l0) / 0.002))))
                ells = np.linspace(hd.l0, lw, n + 1)
                vals = np.exp(hd.logh(ells))[::-1]
                self._add_cells(np.exp(-ells)[::-1], vals)
                hd.lc = lw
                if lw >= hd.L:
                    self.head = None
        if self.tail is not None and np.any(pos):
            tl = self.tail
            if math.exp(tl.logvN) > low:
                target = math.log(low)
                hi = tl.uN + 1.0
                while tl.logt(hi) > target and hi - tl.uN < 60:
                    hi = tl.uN + 2 * (hi - tl.uN)
                hi = min(hi, tl.uN + 60.0)
                if tl.logt(hi) > target:
                    uw = hi
                else:
                    uw = optimize.brentq(lambda u: tl.logt(u) - target, tl.uN, hi, xtol=1e-14)
                n = int(min(20000, max(8, math.ceil((uw - tl.uN) / 0.002))))
                us = np.linspace(tl.uN, uw, n + 1)
                self._add_cells(np.exp(us), np.exp(tl.logt(us)))
                tl.uc = uw

    def _finish(self):
        d, V = self.d, self.V
        keep = (self.va > 0) | (self.vb > 0)
        step_like = self.va == self.vb
        # a cell with one zero end contributes nothing in power mode; drop it
        keep &= step_like | ((self.va > 0) & (self.vb > 0))
        self.ra, self.rb, self.va, self.vb = self.ra[keep], self.rb[keep], self.va[keep], self.vb[keep]
        safe = np.where(self.ra > 0, self.ra, self.rb)
        lr = np.where(self.ra > 0, np.log(self.rb / safe), np.inf)
        self.m = np.where(self.ra > 0, V * safe ** d * np.expm1(d * np.where(self.ra > 0, lr, 0.0)),
                          V * self.rb ** d)
        self.lr = lr
        self.lo = np.minimum(self.va, self.vb)
        self.hi = np.maximum(self.va, self.vb)
        self.active = self.lo < self.hi
        self.head_base = 0.0
        self.head_top = None
        if self.head is not None:
            hd = self.head
            inner = 0.0 if hd.L == INF else math.exp(-d * hd.L)
            self.head_base = V * (math.exp(-d * hd.lc) - inner)
            self.head_top = math.exp(hd.logh(hd.lc))
        self.total = float(np.sum(self.m)) + self.head_base
        self.tail_top = None
        if self.tail is not None:
            self.tail_top = math.exp(self.tail.logt(self.tail.uc))

    # pointwise distribution function

    def cells_measure(self, lam):
        full = np.sum(self.m[self.lo > lam])
        act = self.active & (self.lo <= lam) & (self.hi > lam)
        return float(full + np.sum(self._partial(np.flatnonzero(act), np.full(np.count_nonzero(act), lam))))

    def _partial(self, idx, lam):
        d, V = self.d, self.V
        va, vb, ra, rb, lr = self.va[idx], self.vb[idx], self.ra[idx], self.rb[idx], self.lr[idx]
        dec = va > vb
        out = np.empty(idx.size)
        if np.any(dec):
            k = d * lr[dec] / np.log(va[dec] / vb[dec])
            out[dec] = V * ra[dec] ** d * np.expm1(k * np.log(va[dec] / lam[dec]))
        inc = ~dec
        if np.any(inc):
            k = d * lr[inc] / np.log(vb[inc] / va[inc])
            out[inc] = -V * rb[inc] ** d * np.expm1(-k * np.log(vb[inc] / lam[inc]))
        return out

    def distribution(self, lam: float) -> float:
        if lam <= 0:
            raise ValueError("level must be positive")
        d, V = self.d, self.V
        if self.tail_growing:
            return INF
        if self.tail_flat and lam < self.tail_level:
            return INF
        if self.head is not None and lam >= self.head_top:
            hd = self.head
            target = math.log(lam)
            if hd.L < INF and hd.logh(hd.L) <= target:
                return 0.0
            hi = hd.lc + 1.0
            while hd.logh(hi) < target and hi < hd.L:
                hi = hd.lc + 2 * (hi - hd.lc)
            hi = min(hi, hd.L)
            ell = optimize.brentq(lambda e: hd.logh(e) - target, hd.lc, hi, xtol=1e-14)
            inner = 0.0 if hd.L == INF else math.exp(-d * hd.L)
            return V * max(math.exp(-d * ell) - inner, 0.0)
        out = self.head_base + self.cells_measure(lam)
        if self.tail is not None and lam < self.tail_top:
            tl = self.tail
            target = math.log(lam)
            hi = tl.uc + 1.0
            while tl.logt(hi) > target:
                hi = tl.uc + 2 * (hi - tl.uc)
            u = optimize.brentq(lambda x: tl.logt(x) - target, tl.uc, hi, xtol=1e-14)
            out += V * math.exp(d * tl.uc) * math.expm1(d * (u - tl.uc))
        return out


def distribution_function(f: RadialFunction, lam, s: float = 0.0):
    """Measure of {|x|^s |f(x)| > lam} in R^d."""
    lay = _Layout(f, s)
    if np.ndim(lam) == 0:
        return lay.distribution(float(lam))
    return np.array([lay.distribution(float(v)) for v in np.ravel(lam)]).reshape(np.shape(lam))


# the norm

def _levels(lay):
    pts = [lay.va, lay.vb]
    if lay.head_top is not None:
        pts.append(np.array([lay.head_top]))
    if lay.tail_top is not None:
        pts.append(np.array([lay.tail_top]))
    b = np.unique(np.concatenate(pts))
    return b[b > 0]


def _middle(lay, q, r, b):
    """Integral (or sup) over levels between consecutive breakpoints b[k] < b[k+1]."""
    if b.size < 2:
        return (0.0 if r != INF else 0.0), []
    lo, hi = b[:-1], b[1:]
    # constant part: cells whose lower value is >= hi, plus the head block
    order = np.argsort(lay.lo)
    lo_sorted = lay.lo[order]
    csum = np.concatenate([[0.0], np.cumsum(lay.m[order][::-1])])[::-1]  # csum[i] = sum m over sorted[i:]
    const = csum[np.searchsorted(lo_sorted, hi, side="left")]
    if lay.head_top is not None:
        const = const + np.where(lay.head_top >= hi, lay.head_base, 0.0)
    # active power cells: indices of their breakpoint span
    act = np.flatnonzero(lay.active)
    k0 = np.searchsorted(b, lay.lo[act])
    k1 = np.searchsorted(b, lay.hi[act])
    counts = k1 - k0
    n_active = np.zeros(lo.size, dtype=int)
    if counts.sum():
        np.add.at(n_active, np.repeat(k0, counts) + _ranges(counts), 1)
    quiet = n_active == 0

    if r == INF:
        cand = []
        # left limits at each breakpoint of quiet intervals: sup of lam * d^(1/q) at lam -> hi
        cand.append(hi[quiet] * const[quiet] ** (1.0 / q))
    else:
        total = q * float(np.sum(const[quiet] ** (r / q) * (hi[quiet] ** r - lo[quiet] ** r))) / r

    busy = np.flatnonzero(~quiet)
    if busy.size == 0:
        if r == INF:
            return max((float(np.max(c)) if c.size else 0.0) for c in cand), []
        return total, []
    # Gauss-Legendre panels in log(lam)
    span = np.log(hi[busy] / lo[busy])
    npan = np.maximum(1, np.ceil(span / _SPAN).astype(int))
    pan_iv = np.repeat(busy, npan)
    pan_j = _ranges(npan)
    width = np.repeat(span / npan, npan)
    left = np.log(lo[pan_iv]) + pan_j * width
    ng = _GL_X.size
    loglam = (left[:, None] + 0.5 * width[:, None] * (_GL_X[None, :] + 1.0)).ravel()
    wts = (0.5 * width[:, None] * _GL_W[None, :]).ravel()
    pt_iv = np.repeat(pan_iv, ng)
    # endpoints of each busy interval are also evaluated (for the supremum)
    if r == INF:
        loglam = np.concatenate([loglam, np.log(hi[busy])])
        pt_iv = np.concatenate([pt_iv, busy])
    lam = np.exp(loglam)
    dval = const[pt_iv].copy()
    # distribute active cells onto points of intervals they span
    pt_order = np.argsort(pt_iv, kind="stable")
    iv_sorted = pt_iv[pt_order]
    start = np.searchsorted(iv_sorted, np.arange(lo.size), side="left")
    stop = np.searchsorted(iv_sorted, np.arange(lo.size), side="right")
    c_start = start[np.minimum(k0, lo.size - 1)]
    c_stop = stop[np.maximum(k1 - 1, 0)]
    c_len = np.where(counts > 0, c_stop - c_start, 0)
    if c_len.sum():
        cell_rep = np.repeat(act, c_len)
        pos = pt_order[np.repeat(c_start, c_len) + _ranges(c_len)]
        part = lay._partial(cell_rep, lam[pos])
        np.add.at(dval, pos, part)
    if r == INF:
        vals = lam * np.maximum(dval, 0.0) ** (1.0 / q)
        best = float(np.max(vals))
        for c in cand:
            if c.size:
                best = max(best, float(np.max(c)))
        return best, [(lam, dval)]
    integrand = np.exp(r * loglam) * np.maximum(dval, 0.0) ** (r / q)
    total += q * float(np.sum(integrand * wts))
    return total, []


def _ranges(counts):
    """Concatenation of arange(c) for c in counts."""
    counts = np.asarray(counts, dtype=int)
    if counts.size == 0 or counts.sum() == 0:
        return np.zeros(0, dtype=int)
    ends = np.cumsum(counts)
    idx = np.arange(ends[-1])
    return idx - np.repeat(ends - counts, counts)


def _quad_half_line(fun, x_max=INF):
    """Integral of fun(y) over y in [0, y_max] with y = e^x - 1 (x_max in the y variable)."""
    xm = INF if x_max == INF else math.log1p(x_max)

    def g(x):
        if x > 700.0:
            return 0.0
        return fun(math.expm1(x)) * math.exp(x)

    if xm == INF:
        pieces = [(0.0, 2.0), (2.0, 6.0), (6.0, 12.0), (12.0, INF)]
    else:
        cuts = [c for c in (2.0, 6.0, 12.0) if c < xm]
        edges = [0.0] + cuts + [xm]
        pieces = list(zip(edges[:-1], edges[1:]))
    total = 0.0
    for a, bnd in pieces:
        val, _ = integrate.quad(g, a, bnd, limit=400, epsabs=0.0, epsrel=1e-13)
        total += val
    return total


def _head_part(lay, q, r):
    hd = lay.head
    if hd is None:
        return 0.0
    d, V = lay.d, lay.V
    rate = hd.A - d / q
    if hd.L == INF:
        if rate > 0 and not _same(hd.A, d / q):
            return INF
        if _same(hd.A, d / q):
            if r == INF and hd.B < 0:
                return INF
            if r != INF and hd.B * r <= 1 + _EXP_TOL:
                return INF

    # log of lam * d(lam)^(1/q) along the head, arranged to avoid cancellation at large -log r
    base = hd.logh(hd.lc) + (math.log(V) - d * hd.lc) / q

    def loggap(y):
        ell = hd.lc + y
        out = base + rate * y
        if hd.B:
            out -= hd.B * math.log(ell / hd.lc)
        if hd.L < INF:
            gap = hd.L - ell
            if gap <= 0:
                return -INF
            out += math.log(-math.expm1(-d * gap)) / q
        return out

    span = INF if hd.L == INF else hd.L - hd.lc
    if r == INF:
        if hd.L == INF and _same(hd.A, d / q):
            return math.exp(base)
        ys = np.concatenate([[0.0], np.geomspace(1e-6, 1e6 if span == INF else span, 400)])
        return _sup_exp(loggap, ys)

    def integrand(y):
        lg = loggap(y)
        if lg == -INF:
            return 0.0
        return q * hd.slope(hd.lc + y) * math.exp(r * lg)

    return _quad_half_line(integrand, span)


def _tail_part(lay, q, r, floor_measure):
    tl = lay.tail
    d, V = lay.d, lay.V
    if _same(tl.a, d / q):
        if r == INF and tl.b < 0:
            return INF
        if r != INF and tl.b * r <= 1 + _EXP_TOL:
            return INF
    elif tl.a < d / q:
        return INF
    base = V * math.exp(d * tl.uc)
    rate = d / q - tl.a
    start = tl.logt(tl.uc)

    def loggap(y):
        x = d * y
        if x > 40.0:
            out = start + (math.log(base) + math.log1p((floor_measure - base) * math.exp(-x) / base)) / q
            out += rate * y
        else:
            if floor_measure <= 0 and x <= 0:
                return -INF
            out = tl.logt(tl.uc + y) + math.log(floor_measure + base * math.expm1(x)) / q
            return out
        if tl.b:
            out -= tl.b * math.log((tl.uc + y) / tl.uc)
        return out

    if r == INF:
        ys = np.concatenate([[0.0], np.geomspace(1e-8, 1e4, 600)])
        return _sup_exp(loggap, ys)

    def integrand(y):
        lg = loggap(y)
        if lg == -INF:
            return 0.0
        return q * tl.slope(tl.uc + y) * math.exp(r * lg)

    return _quad_half_line(integrand)


def _sup_exp(loggap, ys):
    vals = np.array([loggap(y) for y in ys])
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo_y, hi_y = ys[max(i - 1, 0)], ys[min(i + 1, ys.size - 1)]
    if hi_y > lo_y:
        res = optimize.minimize_scalar(lambda y: -loggap(y), bounds=(lo_y, hi_y), method="bounded",
                                       options={"xatol": 1e-12})
        best = max(best, -float(res.fun))
    return math.exp(best)


def lorentz_norm(f: RadialFunction, q, r, s=0.0) -> float:
    """Quasi-norm of |x|^s f in the Lorentz space L^{q,r}(R^d); +inf when it diverges."""
    q, r, s = _as_float(q), _as_float(r), float(s)
    if not q > 0 or not r > 0:
        raise ValueError("q and r must be positive")
    if q == INF and r != INF:
        raise ValueError("q = inf requires r = inf")
    lay = _Layout(f, s)
    if q == INF:
        if lay.tail_growing:
            return INF
        best = float(np.max(lay.hi)) if lay.hi.size else 0.0
        if lay.head is not None:
            hd = lay.head
            if hd.L == INF:
                return INF
            best = max(best, math.exp(hd.logh(hd.L)))
        if lay.tail is not None:
            best = max(best, lay.tail_top)
        if lay.tail_flat:
            best = max(best, lay.tail_level)
        return best
    if lay.tail_growing:
        return INF
    if lay.tail_flat:
        return INF

    b = _levels(lay)
    mid, _ = _middle(lay, q, r, b)
    top = _head_part(lay, q, r)
    if top == INF:
        return INF
    bottom_cut = float(b[0]) if b.size else 0.0
    if lay.tail is not None:
        bottom = _tail_part(lay, q, r, lay.total)
        if bottom == INF:
            return INF
        # the tail anchor is the lowest breakpoint, so nothing sits between
    else:
        if r == INF:
            bottom = bottom_cut * lay.total ** (1.0 / q)
        else:
            bottom = q * lay.total ** (r / q) * bottom_cut ** r / r
    if r == INF:
        return max(mid, top, bottom)
    return (mid + top + bottom) ** (1.0 / r)


# rearrangement

@dataclass
class StepRearrangement:
    """Decreasing rearrangement sampled at the level breakpoints.

    ``levels`` are the distinct node values in decreasing order and
    ``breakpoints[k]`` is the measure of {f > levels[k]}. Between breakpoints
    f* is evaluated exactly by inverting the distribution function.
    """

    levels: np.ndarray
    breakpoints: np.ndarray
    head: dict | None
    tail: dict | None
    _layout: object

    def distribution(self, lam):
        return self._layout.distribution(float(lam))

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return np.array([self._value(v) for v in t])

    def _value(self, t):
        lay = self._layout
        if t < 0:
            raise ValueError("t must be nonnegative")
        if lay.tail is None and not lay.tail_flat and t >= lay.total and lay.head is None:
            return 0.0
        if lay.tail_flat and lay.distribution(lay.tail_level * (1 + 1e-12)) <= t:
            return lay.tail_level
        top = float(self.levels[0]) if self.levels.size else 0.0
        if lay.head is not None and lay.head.L < INF:
            hi = math.exp(lay.head.logh(lay.head.L))
        else:
            hi = max(top, 1e-300)
            while lay.distribution(hi) > t:
                hi *= 2.0
        lo = float(self.levels[-1]) if self.levels.size else hi
        while lay.distribution(lo) <= t:
            lo *= 0.5
            if lo < 1e-300:
                return 0.0
        lo_l, hi_l = math.log(lo), math.log(hi)
        # bisection for inf{lam : d(lam) <= t}
        while hi_l - lo_l > 1e-13:
            mid = 0.5 * (lo_l + hi_l)
            if lay.distribution(math.exp(mid)) <= t:
                hi_l = mid
            else:
                lo_l = mid
        return math.exp(hi_l)


def rearrange(f: RadialFunction, s: float = 0.0) -> StepRearrangement:
    lay = _Layout(f, s)
    levels = _levels(lay)[::-1]
    bps = np.array([lay.distribution(float(v)) for v in levels])
    head = None
    if lay.head is not None:
        hd = lay.head
        head = {"exponent": hd.A, "log_exponent": hd.B, "anchor_level": lay.head_top,
                "measure": lay.head_base}
    tail = None
    if lay.tail is not None:
        tl = lay.tail
        tail = {"exponent": tl.a, "log_exponent": tl.b, "anchor_level": lay.tail_top}
    return StepRearrangement(levels, bps, head, tail, lay)


# empirical inequality probes

def product(f: RadialFunction, g: RadialFunction) -> RadialFunction:
    """Pointwise product on f's grid; continuation exponents add."""
    if f.d != g.d:
        raise ValueError("dimension mismatch")
    vals = f.values * g(f.nodes)
    head = None if (f.head_exponent is None or g.head_exponent is None) else f.head_exponent + g.head_exponent
    tail = None if (f.tail_exponent is None or g.tail_exponent is None) else f.tail_exponent + g.tail_exponent
    hlog = f.head_log + g.head_log if head is not None and f.r0 < 1 else 0.0
    tlog = f.tail_log + g.tail_log if tail is not None and f.rN > 1 else 0.0
    cut = [c for c in (f.head_cutoff, g.head_cutoff) if c is not None]
    return RadialFunction(f.nodes, vals, f.d, head_exponent=head, head_log=hlog,
                          tail_exponent=tail, tail_log=tlog, mode=f.mode,
                          head_cutoff=min(cut) if cut else None)


@dataclass
class WitnessReport:
    ratios: np.ndarray
    max_ratio: float
    dilation_spread: float
    detail: dict


def _inv(x):
    return 0.0 if x == INF else 1.0 / x


def holder_check(f, g, pairs, dilations=(0.25, 0.5, 1.0, 2.0, 4.0)) -> WitnessReport:
    """Ratio ||fg||_{q,r} / (||f||_{q1,r1} ||g||_{q2,r2}) over dilations f(lam x), g(lam x).

    ``pairs`` is ((q1, r1), (q2, r2), (q, r)).
    """
    (q1, r1), (q2, r2), (q, r) = [tuple(_as_float(v) for v in p) for p in pairs]
    if abs(_inv(q) - _inv(q1) - _inv(q2)) > 1e-12:
        raise ValueError("need 1/q = 1/q1 + 1/q2")
    if _inv(r) > _inv(r1) + _inv(r2) + 1e-12:
        raise ValueError("need 1/r <= 1/r1 + 1/r2")
    ratios = []
    for lam in dilations:
        fl, gl = f.dilated(lam), g.dilated(lam)
        num = lorentz_norm(product(fl, gl), q, r)
        den = lorentz_norm(fl, q1, r1) * lorentz_norm(gl, q2, r2)
        ratios.append(num / den if den > 0 else 0.0)
    ratios = np.array(ratios)
    spread = float(np.max(ratios) / np.min(ratios)) if np.all(ratios > 0) else INF
    return WitnessReport(ratios, float(np.max(ratios)), spread, {"dilations": list(dilations)})


def young_check(f, kernel, pairs, dilations=(0.25, 0.5, 1.0, 2.0, 4.0)) -> WitnessReport:
    """Ratio ||f*g||_{q,r} / (||f||_{q1,r1} ||g||_{q2,r2}) for Gaussian-mixture g.

    ``kernel`` is a list of (mass, time) pairs meaning sum mass * G_time.
    Dilating f by lam and g by lam keeps the ratio invariant when the
    exponents satisfy the scaling relation.
    """
    from .heat import apply_semigroup

    if not isinstance(kernel, (list, tuple)) or not all(
            isinstance(k, (list, tuple)) and len(k) == 2 for k in kernel):
        raise ValueError("kernel must be a list of (mass, time) Gaussian components")
    (q1, r1), (q2, r2), (q, r) = [tuple(_as_float(v) for v in p) for p in pairs]
    if abs(_inv(q) + 1 - _inv(q1) - _inv(q2)) > 1e-12:
        raise ValueError("need 1/q + 1 = 1/q1 + 1/q2")
    if _inv(r) > _inv(r1) + _inv(r2) + 1e-12:
        raise ValueError("need 1/r <= 1/r1 + 1/r2")
    ratios = []
    for lam in dilations:
        fl = f.dilated(lam)
        # g(lam x) = lam^-d * sum mass G_{t/lam^2}(x)
        comps = [(m * lam ** (-f.d), t / lam ** 2) for m, t in kernel]
        conv = None
        for m, t in comps:
            part = apply_semigroup(fl, t).scaled(m)
            conv = part if conv is None else conv.with_values(conv.values + part.values)
        gfun = RadialFunction.gaussian(f.d, comps[0][1], nodes=fl.nodes, mass=comps[0][0])
        for m, t in comps[1:]:
            gfun = gfun.with_values(gfun.values + RadialFunction.gaussian(f.d, t, nodes=fl.nodes, mass=m).values)
        num = lorentz_norm(conv, q, r)
        den = lorentz_norm(fl, q1, r1) * lorentz_norm(gfun, q2, r2)
        ratios.append(num / den if den > 0 else 0.0)
    ratios = np.array(ratios)
    spread = float(np.max(ratios) / np.min(ratios)) if np.all(ratios > 0) else INF
    return WitnessReport(ratios, float(np.max(ratios)), spread, {"dilations": list(dilations)})


def liminf_vanishing_probe(f: RadialFunction, q, r, s=0.0, n=60, span=(1e-300, 1e300)):
    """Running minima of |x|^(s+d/q) |log|x||^(1/r) |f(x)| toward 0 and toward infinity."""
    q, r = _as_float(q), _as_float(r)
    if r == INF:
        raise ValueError("the probe needs r < inf")
    expo = s + f.d * _inv(q)
    inner = np.geomspace(min(0.5, f.r0), span[0], n)
    outer = np.geomspace(max(2.0, f.rN), span[1], n)

    def probe(rad):
        with np.errstate(over="ignore", under="ignore", divide="ignore"):
            logv = (expo * np.log(rad) + np.log(np.abs(np.log(rad))) / r
                    + np.log(np.maximum(np.abs(f(rad)), 1e-320)))
        vals = np.where(np.abs(f(rad)) > 0, np.exp(np.minimum(logv, 700)), 0.0)
        return np.minimum.accumulate(vals)

    return {"toward_zero": probe(inner), "toward_infinity": probe(outer),
            "radii_zero": inner, "radii_infinity": outer}
