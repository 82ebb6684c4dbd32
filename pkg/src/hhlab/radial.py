"""Radial functions on a log-graded grid with power-law head and tail continuations."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaln

DEFAULT_RMIN = 1e-8
DEFAULT_RMAX = 1e3
DEFAULT_N = 2048


def log_grid(rmin=DEFAULT_RMIN, rmax=DEFAULT_RMAX, n=DEFAULT_N):
    return np.geomspace(rmin, rmax, n)


def ball_volume(d: int) -> float:
    """Volume of the unit ball in R^d."""
    return math.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1.0))


def sphere_area(d: int) -> float:
    return d * ball_volume(d)


@dataclass(frozen=True, eq=False)
class RadialFunction:
    """Samples of a radial function plus analytic continuations.

    Between nodes the magnitude is interpolated as a power law (``mode="power"``)
    or held constant from the left node (``mode="step"``). Below the first node
    the function continues as ``v0 (r/r0)^-head_exponent (log r / log r0)^-head_log``
    and beyond the last node as ``vN (r/rN)^-tail_exponent (log r / log rN)^-tail_log``.
    A ``None`` exponent means the function vanishes there. ``head_cutoff`` (a
    value of -log r) truncates the head continuation, which is how the norm of
    a truncated singular profile is evaluated without underflow.
    """

    nodes: np.ndarray
    values: np.ndarray
    d: int
    head_exponent: float | None = 0.0
    head_log: float = 0.0
    tail_exponent: float | None = None
    tail_log: float = 0.0
    mode: str = "power"
    head_cutoff: float | None = None

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        values = np.array(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape or nodes.size < 2:
            raise ValueError("nodes and values must be 1-D arrays of equal length >= 2")
        if not np.all(nodes > 0) or not np.all(np.diff(nodes) > 0):
            raise ValueError("nodes must be positive and strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        if self.mode not in ("power", "step"):
            raise ValueError("mode must be 'power' or 'step'")
        if self.head_exponent is not None and self.head_log != 0 and nodes[0] >= 1:
            raise ValueError("a logarithmic head needs r0 < 1")
        if self.tail_exponent is not None and self.tail_log != 0 and nodes[-1] <= 1:
            raise ValueError("a logarithmic tail needs rN > 1")
        nodes.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "d", int(self.d))

    # construction helpers

    @classmethod
    def from_callable(cls, fn, d, nodes=None, **kw):
        nodes = log_grid() if nodes is None else np.asarray(nodes, dtype=float)
        return cls(nodes, np.asarray(fn(nodes), dtype=float), d, **kw)

    @classmethod
    def power_law(cls, a, d, coeff=1.0, log_power=0.0, nodes=None):
        """coeff * r^-a * |log r|^-log_power near the origin (log part only if log_power != 0)."""
        nodes = log_grid() if nodes is None else np.asarray(nodes, dtype=float)
        vals = coeff * nodes ** (-a)
        if log_power:
            vals = vals * np.abs(np.log(nodes)) ** (-log_power)
            tail = a if nodes[-1] > 1 else None
            return cls(nodes, vals, d, head_exponent=a, head_log=log_power,
                       tail_exponent=tail, tail_log=log_power if tail is not None else 0.0)
        return cls(nodes, vals, d, head_exponent=a, tail_exponent=a)

    @classmethod
    def gaussian(cls, d, t=1.0, nodes=None, mass=1.0):
        """mass times the heat kernel (4 pi t)^(-d/2) exp(-r^2/(4t))."""
        nodes = log_grid() if nodes is None else np.asarray(nodes, dtype=float)
        vals = mass * (4 * math.pi * t) ** (-0.5 * d) * np.exp(-nodes ** 2 / (4 * t))
        return cls(nodes, vals, d, head_exponent=0.0, tail_exponent=None)

    @classmethod
    def from_shells(cls, edges, levels, d, head=False):
        """Piecewise constant: levels[i] on [edges[i], edges[i+1]).

        With ``head=True`` the first level extends down to the origin.
        """
        edges = np.asarray(edges, dtype=float)
        levels = np.asarray(levels, dtype=float)
        if edges.size != levels.size + 1:
            raise ValueError("need one more edge than levels")
        vals = np.append(levels, 0.0)
        return cls(edges, vals, d, head_exponent=0.0 if head else None,
                   tail_exponent=None, mode="step")

    @classmethod
    def indicator_ball(cls, d, radius=1.0, height=1.0, nodes=None):
        nodes = log_grid() if nodes is None else np.asarray(nodes, dtype=float)
        inner = nodes[nodes < radius]
        outer = nodes[nodes > radius]
        edges = np.concatenate([inner, [radius], outer])
        vals = np.concatenate([np.full(inner.size, height), np.zeros(outer.size + 1)])
        return cls(edges, vals, d, head_exponent=0.0, tail_exponent=None, mode="step")

    # evaluation

    @property
    def r0(self):
        return float(self.nodes[0])

    @property
    def rN(self):
        return float(self.nodes[-1])

    def head_value(self, r):
        r = np.asarray(r, dtype=float)
        if self.head_exponent is None:
            return np.zeros_like(r)
        v0 = self.values[0]
        out = v0 * (r / self.r0) ** (-self.head_exponent)
        if self.head_log:
            out = out * (np.log(r) / math.log(self.r0)) ** (-self.head_log)
        if self.head_cutoff is not None:
            out = np.where(-np.log(r) > self.head_cutoff, 0.0, out)
        return out

    def tail_value(self, r):
        r = np.asarray(r, dtype=float)
        if self.tail_exponent is None:
            return np.zeros_like(r)
        vN = self.values[-1]
        out = vN * (r / self.rN) ** (-self.tail_exponent)
        if self.tail_log:
            out = out * (np.log(r) / math.log(self.rN)) ** (-self.tail_log)
        return out

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        scalar = r.ndim == 0
        r = np.atleast_1d(r)
        out = np.empty_like(r)
        lo = r < self.r0
        hi = r > self.rN
        mid = ~(lo | hi)
        out[lo] = self.head_value(r[lo])
        out[hi] = self.tail_value(r[hi])
        if np.any(mid):
            out[mid] = self._interior(r[mid])
        return out[0] if scalar else out

    def _interior(self, r):
        x, v = self.nodes, self.values
        i = np.clip(np.searchsorted(x, r, side="right") - 1, 0, x.size - 2)
        if self.mode == "step":
            return np.where(r >= x[-1], v[-1], v[i])
        left, right = v[i], v[i + 1]
        w = np.log(r / x[i]) / np.log(x[i + 1] / x[i])
        same = (left * right) > 0
        out = left + w * (right - left)
        with np.errstate(divide="ignore", invalid="ignore"):
            pw = np.sign(left) * np.abs(left) ** (1 - w) * np.abs(right) ** w
        return np.where(same, pw, out)

    # transformations

    def with_values(self, values, **kw):
        return replace(self, values=np.asarray(values, dtype=float), **kw)

    def abs(self):
        return self.with_values(np.abs(self.values))

    def weighted(self, s):
        """|x|^s f with continuation exponents shifted accordingly."""
        if s == 0:
            return self
        head = None if self.head_exponent is None else self.head_exponent - s
        tail = None if self.tail_exponent is None else self.tail_exponent - s
        return replace(self, values=self.values * self.nodes ** s,
                       head_exponent=head, tail_exponent=tail)

    def scaled(self, c):
        return self.with_values(c * self.values)

    def dilated(self, lam):
        """x -> f(lam x), represented on the grid nodes / lam."""
        if lam <= 0:
            raise ValueError("dilation factor must be positive")
        if (self.head_log and self.nodes[0] / lam >= 1) or (self.tail_log and self.nodes[-1] / lam <= 1):
            return self.from_callable(self, self.d, nodes=self.nodes).resampled(self.nodes / lam)
        cutoff = None if self.head_cutoff is None else self.head_cutoff - math.log(lam)
        return replace(self, nodes=self.nodes / lam, head_cutoff=cutoff)

    def resampled(self, nodes):
        nodes = np.asarray(nodes, dtype=float)
        return replace(self, nodes=nodes, values=self(nodes))

    def truncated(self, radius):
        """f times the indicator of the ball of the given radius, on the same grid.

        A node just outside the radius carries the jump to zero.
        """
        inner = self.nodes[self.nodes < radius]
        outer = self.nodes[self.nodes > radius * (1 + 1e-9)]
        edge = np.array([radius, radius * (1 + 1e-9)])
        nodes = np.concatenate([inner, edge, outer]) if outer.size else np.append(inner, radius)
        vals = np.concatenate([self(inner), [self(radius), 0.0], np.zeros(outer.size)])[: nodes.size]
        if self.mode == "step":
            vals[inner.size] = 0.0
        return replace(self, nodes=nodes, values=vals, tail_exponent=None, tail_log=0.0)

    def restricted_exterior(self, radius):
        """f times the indicator of |x| > radius, on the same grid."""
        inner = self.nodes[self.nodes < radius * (1 - 1e-9)]
        outer = self.nodes[self.nodes > radius]
        if not inner.size:
            return replace(self, nodes=np.insert(outer, 0, radius),
                           values=np.insert(self(outer), 0, self(radius)),
                           head_exponent=None, head_log=0.0, head_cutoff=None)
        nodes = np.concatenate([inner, [radius * (1 - 1e-9), radius], outer])
        vals = np.concatenate([np.zeros(inner.size), [0.0, self(radius)], self(outer)])
        if self.mode == "step":
            vals[inner.size] = 0.0
        return replace(self, nodes=nodes, values=vals, head_exponent=None, head_log=0.0,
                       head_cutoff=None)

    def with_head_cutoff(self, cutoff):
        return replace(self, head_cutoff=cutoff)

    # serialization

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        buf.write(f"# d={self.d} head_exponent={_fmt(self.head_exponent)} head_log={float(self.head_log)!r} "
                  f"tail_exponent={_fmt(self.tail_exponent)} tail_log={float(self.tail_log)!r} "
                  f"mode={self.mode} head_cutoff={_fmt(self.head_cutoff)}\n")
        buf.write("radius,value\n")
        for r, v in zip(self.nodes, self.values):
            buf.write(f"{float(r)!r},{float(v)!r}\n")
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source):
        if hasattr(source, "read"):
            text = source.read()
        elif isinstance(source, str) and "\n" in source:
            text = source
        else:
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        lines = text.splitlines()
        if not lines or not lines[0].startswith("#"):
            raise ValueError("missing header line")
        meta = dict(item.split("=", 1) for item in lines[0][1:].split())
        rows = [ln.split(",") for ln in lines[2:] if ln.strip()]
        data = np.array(rows, dtype=float)
        return cls(data[:, 0], data[:, 1], int(meta["d"]),
                   head_exponent=_parse(meta.get("head_exponent")),
                   head_log=float(meta.get("head_log", 0.0)),
                   tail_exponent=_parse(meta.get("tail_exponent")),
                   tail_log=float(meta.get("tail_log", 0.0)),
                   mode=meta.get("mode", "power"),
                   head_cutoff=_parse(meta.get("head_cutoff")))

    def integral(self) -> float:
        """Integral of f over R^d (trapezoid in log r plus analytic ends)."""
        x, v = self.nodes, self.values
        area = sphere_area(self.d)
        if self.mode == "step":
            shells = ball_volume(self.d) * (x[1:] ** self.d - x[:-1] ** self.d)
            mid = float(np.sum(v[:-1] * shells))
        else:
            mid = area * float(np.trapezoid(v * x ** self.d, np.log(x)))
        head = 0.0
        if self.head_exponent is not None and self.head_cutoff is None:
            k = self.d - self.head_exponent
            if k <= 0:
                return math.inf
            if self.head_log == 0:
                head = area * v[0] * x[0] ** self.d / k
            else:
                from scipy.integrate import quad

                l0 = -math.log(x[0])
                val, _ = quad(lambda ell: math.exp(-k * (ell - l0)) * (ell / l0) ** (-self.head_log),
                              l0, math.inf)
                head = area * v[0] * x[0] ** self.d * val
        tail = 0.0
        if self.tail_exponent is not None and v[-1] != 0:
            k = self.tail_exponent - self.d
            if k <= 0:
                return math.inf
            tail = area * v[-1] * x[-1] ** self.d / k
        return mid + head + tail


def _fmt(x):
    return "none" if x is None else repr(float(x))


def _parse(text):
    if text is None or text == "none":
        return None
    return float(text)
