"""Picard construction of mild solutions, regular and singular, and the non-uniqueness demo.

A mild solution on (0, T] is represented by snapshots at the geometric times
T 2^(j-K), j = 1..K. Between snapshots only the Duhamel correction (the
snapshot minus the free evolution) is interpolated, linearly in log tau; the
free evolution itself is recomputed at every quadrature time. The Duhamel
integral at t_j is marched from t_(j-1) with the semigroup property, and the
accepted iterate is certified against an independent quadrature over (0, t_j)
at twice the resolution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from .heat import apply_semigroup, duhamel
from .lorentz import lorentz_norm
from .params import (DOUBLE_CRITICAL, NONUNIQUE, ProblemParams, SpaceParams, as_float,
                     classify, critical_exponents, exponent, inv, solver_constants)
from .radial import RadialFunction, log_grid

REGULAR, SINGULAR = "regular", "singular"


class ContractionError(RuntimeError):
    """Picard iteration did not contract within the T-shrink budget."""


class DensityError(RuntimeError):
    """The weighted free evolution does not vanish as t -> 0."""


class SplitError(RuntimeError):
    """No split radius makes the singular core of V0 small enough."""


class Refused(ValueError):
    """The parameters do not support the requested demonstration."""

    def __init__(self, verdict):
        super().__init__(f"refused: classifier verdict is {verdict.verdict}")
        self.verdict = verdict


def default_nodes():
    return log_grid(1e-6, 1e2, 1024)


@dataclass(frozen=True)
class PicardConfig:
    problem: ProblemParams
    space: SpaceParams
    q_aux: object
    beta: float
    delta: float
    T: float = 1e-2
    snapshots: int = 6
    max_iter: int = 40
    tol: float = 1e-7
    residual_tol: float = 1e-3
    contraction_cap: float = 0.8
    shrink_budget: int = 12
    levels: int = 3
    order: int = 6
    split_eps: float = 0.25
    nodes: np.ndarray = field(default_factory=default_nodes, repr=False)

    @classmethod
    def for_problem(cls, problem: ProblemParams, space: SpaceParams, q_aux=None, **kw):
        """Config with beta and delta from the solver constants; q_aux defaults to mid-window."""
        if q_aux is None:
            lo, hi = solver_constants(problem, space, space.q).window
            q_aux = 1 / ((Fraction(lo) + Fraction(hi)) / 2)
        sc = solver_constants(problem, space, q_aux)
        if not sc.aux_inside:
            raise ValueError(f"1/q_aux must lie in {tuple(map(str, sc.window))}")
        return cls(problem, space, exponent(q_aux), as_float(sc.beta), as_float(sc.delta), **kw)

    def times(self, T=None):
        T = self.T if T is None else T
        return T * 2.0 ** (np.arange(1, self.snapshots + 1) - self.snapshots)

    def kato(self, f: RadialFunction, t: float) -> float:
        return t**self.beta * lorentz_norm(f, self.q_aux, math.inf, self.space.s)

    def norm(self, f: RadialFunction, r=None) -> float:
        sp = self.space
        return lorentz_norm(f, sp.q, sp.r if r is None else r, sp.s)


@dataclass
class MildSolution:
    branch: str
    T: float
    times: np.ndarray
    snapshots: list
    free: list
    kato_trace: list
    residual_trace: list
    distances: list
    contraction: float
    halvings: int
    config: PicardConfig = field(repr=False)
    perturbation: list = field(default_factory=list, repr=False)

    @property
    def accepted(self):
        return [res <= self.config.residual_tol for res in self.residual_trace]

    @property
    def certified(self) -> bool:
        return all(self.accepted)

    def duhamel_terms(self):
        """Snapshot minus the free evolution of the initial data."""
        return [u.with_values(u.values - g.values) for u, g in zip(self.snapshots, self.free)]

    def manifest(self) -> dict:
        return {"branch": self.branch, "T": self.T, "times": list(map(float, self.times)),
                "kato_trace": list(map(float, self.kato_trace)),
                "residual_trace": list(map(float, self.residual_trace)),
                "distances": list(map(float, self.distances)),
                "contraction": float(self.contraction), "halvings": self.halvings,
                "certified": self.certified}

    def save(self, directory):
        """Write one CSV per snapshot plus manifest.json."""
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        names = []
        for j, u in enumerate(self.snapshots):
            name = f"snapshot_{j:02d}.csv"
            (out / name).write_text(u.to_csv())
            names.append(name)
        man = self.manifest() | {"files": names}
        (out / "manifest.json").write_text(json.dumps(man, indent=2))
        return out


def _power(u, alpha):
    return np.abs(u) ** (alpha - 1) * u


class _Nonlinearity:
    """|x|^gamma (|w + V|^(alpha-1)(w + V) - |V|^(alpha-1) V) as a RadialFunction of w.

    With no background V this is the plain nonlinearity. Around the singular
    stationary profile the difference behaves like alpha V^(alpha-1) w near the
    origin, which is r^-2 |log r|^-1 for the critical power.
    """

    def __init__(self, problem: ProblemParams, background: RadialFunction | None):
        self.d = problem.d
        self.gamma = as_float(problem.gamma)
        self.alpha = as_float(problem.alpha)
        if background is not None and not np.any(background.values):
            background = None
        self.background = background
        if background is None:
            self.head = (-self.gamma if self.gamma else 0.0, 0.0)
        else:
            self.head = ((self.alpha - 1) * background.head_exponent - self.gamma,
                         (self.alpha - 1) * background.head_log)
            self.base = _power(background.values, self.alpha)

    def __call__(self, w: RadialFunction) -> RadialFunction:
        nodes = w.nodes
        if self.background is None:
            vals = _power(w.values, self.alpha)
        else:
            vals = _power(w.values + self.background.values, self.alpha) - self.base
        if self.gamma:
            vals = vals * nodes**self.gamma
        tail = None
        if w.tail_exponent is not None:
            tail = self.alpha * w.tail_exponent - self.gamma
        return RadialFunction(nodes, vals, self.d, head_exponent=self.head[0],
                              head_log=self.head[1], tail_exponent=tail,
                              tail_log=self.alpha * w.tail_log if tail is not None else 0.0)


class _Trajectory:
    """tau -> free(tau) + interpolated correction, with the free evolution cached."""

    def __init__(self, u0: RadialFunction, times, corrections, power, scale=None):
        self.u0 = u0
        self.times = np.asarray(times, float)
        self.corr = corrections
        self.power = power
        self.scale = scale
        self.cache = {}

    def free(self, tau):
        key = float(tau)
        if key not in self.cache:
            self.cache[key] = apply_semigroup(self.u0, key)
        return self.cache[key]

    def with_corrections(self, corrections):
        nxt = _Trajectory(self.u0, self.times, corrections, self.power)
        nxt.cache = self.cache
        return nxt

    def correction(self, tau):
        ts, c = self.times, self.corr
        if tau <= ts[0]:
            return c[0] * (tau / ts[0]) ** self.power
        if tau >= ts[-1]:
            return c[-1]
        j = int(np.searchsorted(ts, tau)) - 1
        theta = math.log(tau / ts[j]) / math.log(ts[j + 1] / ts[j])
        return (1 - theta) * c[j] + theta * c[j + 1]

    def __call__(self, tau):
        g = self.free(tau)
        if self.scale is not None:
            return g.with_values(self.scale * g.values)
        return g.with_values(g.values + self.correction(tau))


def _march(source, times, levels, order):
    """Duhamel integral at each snapshot time, stepping with the semigroup property."""
    out, prev, t_prev = [], None, 0.0
    for t in times:
        piece = duhamel(source, t, levels=levels, order=order, start=t_prev)
        vals = piece.values
        if prev is not None:
            vals = vals + apply_semigroup(prev, t - t_prev).values
        prev = piece.with_values(vals)
        out.append(prev)
        t_prev = t
    return out


def _free_kato_decays(u0, cfg: PicardConfig, T):
    """Density check: t^beta |e^{t Lap} u0|_{q_aux, inf} must fall as t -> 0."""
    ts = T * 2.0 ** -np.arange(0, cfg.snapshots + 8)
    trace = np.array([cfg.kato(apply_semigroup(u0, t), t) for t in ts])
    if not np.any(trace):
        return True
    return trace[-1] < 0.9 * trace.max()


def _run(u0, cfg: PicardConfig, T, nonlin, forcing, first):
    """Picard iteration at fixed T. Returns (trajectory, snapshots, distances) or None."""
    times = cfg.times(T)
    n = cfg.nodes.size
    power = max(cfg.delta, 0.0)
    scale = {"free": 1.0, "zero": 0.0}.get(first, first)
    traj = _Trajectory(u0, times, [np.zeros(n)] * times.size, power, scale=float(scale))
    forced = None
    if forcing is not None:
        forced = [f.values for f in _march(forcing, times, cfg.levels, cfg.order)]
    current = [traj(t) for t in times]
    dists = []
    for _ in range(cfg.max_iter):
        pieces = _march(lambda tau: nonlin(traj(tau)), times, cfg.levels, cfg.order)
        corr = [p.values for p in pieces]
        if forced is not None:
            corr = [c + fv for c, fv in zip(corr, forced)]
        traj = traj.with_corrections(corr)
        new = [traj(t) for t in times]
        dist = max(cfg.kato(a.with_values(a.values - b.values), t)
                   for a, b, t in zip(new, current, times))
        size = max(cfg.kato(a, t) for a, t in zip(new, times))
        dists.append(dist)
        current = new
        if len(dists) >= 3 and dists[-1] > cfg.contraction_cap * dists[-2]:
            return None, dists
        if dist <= cfg.tol * max(size, 1e-300):
            return (traj, current), dists
    return None, dists


def _certify(traj, snapshots, totals, cfg: PicardConfig, nonlin, forcing):
    """Relative residual at each snapshot with an independent quadrature over (0, t)."""
    out = []
    lv, od = cfg.levels + 1, 2 * cfg.order
    for t, u, total in zip(traj.times, snapshots, totals):
        rhs = traj.free(t).values + duhamel(lambda tau: nonlin(traj(tau)), t, levels=lv, order=od).values
        if forcing is not None:
            rhs = rhs + duhamel(forcing, t, levels=lv, order=od).values
        diff = u.with_values(u.values - rhs, head_exponent=0.0, head_log=0.0)
        size = cfg.norm(total)
        # the zero solution has nothing to compare against, so its residual is absolute
        out.append(cfg.norm(diff) / size if size else cfg.norm(diff))
    return out


def _solve(u0, cfg: PicardConfig, background=None, forcing=None, first="free", check_density=True):
    nonlin = _Nonlinearity(cfg.problem, background)
    if forcing is not None and not np.any(forcing.values):
        forcing = None
    T = cfg.T
    if check_density and not _free_kato_decays(u0, cfg, T):
        raise DensityError("t^beta |e^{t Lap} u0| does not vanish as t -> 0")
    for halvings in range(cfg.shrink_budget + 1):
        result, dists = _run(u0, cfg, T, nonlin, forcing, first)
        if result is not None:
            traj, snaps = result
            ratios = [b / a for a, b in zip(dists[1:-1], dists[2:]) if a > 0]
            factor = max(ratios) if ratios else 0.0
            return traj, snaps, dists, factor, halvings, T, nonlin, forcing
        T /= 2
    raise ContractionError(f"no contraction after {cfg.shrink_budget} halvings of T")


def solve_regular(u0: RadialFunction, cfg: PicardConfig, first="free") -> MildSolution:
    """Picard iterates from e^{t Lap} u0 (or from ``first`` times it; "zero" for 0)."""
    traj, snaps, dists, factor, halvings, T, nonlin, _ = _solve(u0, cfg, first=first)
    res = _certify(traj, snaps, snaps, cfg, nonlin, None)
    return MildSolution(REGULAR, T, traj.times, snaps, [traj.free(t) for t in traj.times],
                        [cfg.kato(u, t) for u, t in zip(snaps, traj.times)], res, dists,
                        factor, halvings, replace(cfg, T=T))


@dataclass
class CrossCheck:
    """Picard runs from several first iterates, compared at a common T."""

    T: float
    gaps: dict
    solutions: dict = field(repr=False)

    @property
    def max_gap(self):
        return max(self.gaps.values()) if self.gaps else 0.0


def uniqueness_cross_check(u0: RadialFunction, cfg: PicardConfig, firsts=("free", "zero", 2.0)):
    """Relative L^{q,r}_s distance of each run to the first one, maximised over snapshots.

    A start is a scale factor on the free evolution ("free" = 1, "zero" = 0).
    Runs that had to shrink T force the others onto the same T.
    """
    T, sols = cfg.T, {}
    while True:
        for f in firsts:
            if f not in sols or sols[f].T != T:
                sols[f] = solve_regular(u0, replace(cfg, T=T), first=f)
        low = min(s.T for s in sols.values())
        if all(s.T == low for s in sols.values()):
            break
        T = low
    ref = sols[firsts[0]]
    gaps = {}
    for f in firsts[1:]:
        gaps[str(f)] = max(cfg.norm(a.with_values(a.values - b.values)) / cfg.norm(a)
                           for a, b in zip(ref.snapshots, sols[f].snapshots))
    return CrossCheck(T, gaps, sols)


def split_radius(V0: RadialFunction, cfg: PicardConfig, eps=None):
    """Largest radius whose inner part of V0 has weak norm below eps (bisection in log r)."""
    eps = cfg.split_eps if eps is None else eps
    sp = cfg.space

    def inner(rho):
        return lorentz_norm(V0.truncated(rho), sp.q, math.inf, sp.s)

    lo, hi = math.log(V0.nodes[1]), math.log(V0.nodes[-1])
    if inner(math.exp(lo)) >= eps:
        raise SplitError("even the innermost part of V0 is not eps-small")
    if inner(math.exp(hi)) < eps:
        return math.exp(hi)
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if inner(math.exp(mid)) < eps else (lo, mid)
    return math.exp(lo)


def solve_singular(u0: RadialFunction, extension, cfg: PicardConfig, first="free") -> MildSolution:
    """v = w + V0 with w solving the problem perturbed around V0, forced by R.

    The original equation holds for v exactly when w satisfies the perturbed one,
    because V0 = e^{t Lap} V0 + int e^{(t-tau) Lap}(|x|^gamma V0^alpha - R) follows
    from Lap V0 + |x|^gamma V0^alpha = R. The certified residual is that of w,
    measured relative to the norm of v.
    """
    V0, R = extension.V0, extension.R
    degenerate = not np.any(V0.values) and not np.any(R.values)
    if not degenerate:
        split_radius(V0, cfg)
    w0 = u0.with_values(u0.values - V0.values) if not degenerate else u0
    background = None if degenerate else V0
    forcing = None if degenerate else R
    traj, snaps, dists, factor, halvings, T, nonlin, forcing = _solve(
        w0, cfg, background, forcing, first, check_density=degenerate)
    if degenerate:
        full = snaps
    else:
        full = [V0.with_values(V0.values + w.values) for w in snaps]
    res = _certify(traj, snaps, full, cfg, nonlin, forcing)
    free = [apply_semigroup(u0, t) for t in traj.times]
    sol = MildSolution(SINGULAR, T, traj.times, full, free,
                       [cfg.kato(w, t) for w, t in zip(snaps, traj.times)], res, dists,
                       factor, halvings, replace(cfg, T=T), perturbation=snaps)
    return sol


def head_exponent(f: RadialFunction, r_max=1e-2):
    """Local power of f at the origin and the log power carried by its head.

    The power is the least-squares slope of -log|f| against log r over the
    innermost decade of nodes below r_max. A free fit of the log power over one
    or two decades is swamped by the lower-order terms, so that part is read
    from the analytic continuation instead.
    """
    m = (f.nodes < r_max) & (f.values != 0)
    r = f.nodes[m]
    if r.size < 3:
        return 0.0, 0.0
    r = r[r <= 10 * r[0]]
    if r.size < 3:
        r = f.nodes[m][:3]
    vals = np.abs(f.values[m][: r.size])
    slope = np.polyfit(np.log(r), np.log(vals), 1)[0]
    return float(-slope), float(f.head_log if f.head_exponent is not None else 0.0)


@dataclass
class DemoReport:
    T: float
    times: list
    regular: MildSolution = field(repr=False)
    singular: MildSolution = field(repr=False)
    separation: list
    margin: float
    head_regular: tuple
    head_singular: tuple
    verdict: str

    @property
    def residual_ok(self):
        return self.regular.certified and self.singular.certified

    def as_dict(self):
        return {"T": self.T, "times": list(map(float, self.times)),
                "separation": list(map(float, self.separation)), "margin": self.margin,
                "regular": self.regular.manifest(), "singular": self.singular.manifest(),
                "head_exponent_regular": list(self.head_regular),
                "head_exponent_singular": list(self.head_singular),
                "verdict": self.verdict}


@dataclass
class SelfSimilarTriple:
    """Zero data with three solutions: 0 and plus/minus the self-similar one."""

    profile: object
    verdict: str
    norms: dict

    def as_dict(self):
        return {"verdict": self.verdict, "shooting_value": self.profile.a,
                "solutions": ["0", "+selfsimilar", "-selfsimilar"],
                "norms": {str(k): v for k, v in self.norms.items()}}


def _selfsimilar_triple(problem, space, verdict, t_grid=(1e-2, 1e-1, 1.0)):
    from .selfsimilar import norm_scaling_check, shoot_profile
    prof = shoot_profile(problem.d, as_float(problem.gamma), as_float(problem.alpha))
    rep = norm_scaling_check(prof, space.q, space.r, space.s, t_grid)
    return SelfSimilarTriple(prof, verdict.verdict, dict(zip(t_grid, rep.norms)))


def nonuniqueness_demo(u0: RadialFunction | None, problem: ProblemParams, space: SpaceParams,
                       cfg: PicardConfig | None = None, extension=None):
    """Regular and singular solutions from the same data, or the self-similar triple."""
    verdict = classify(problem, space)
    if verdict.verdict != NONUNIQUE:
        raise Refused(verdict)
    if verdict.regime != DOUBLE_CRITICAL:
        if u0 is not None and np.any(u0.values):
            raise Refused(verdict)
        return _selfsimilar_triple(problem, space, verdict)
    cfg = PicardConfig.for_problem(problem, space) if cfg is None else cfg
    if extension is None:
        from .stationary import build_extension, solve_emden
        prof = solve_emden(problem.d, as_float(problem.gamma))
        extension = build_extension(prof, nodes=cfg.nodes)
    u0 = extension.V0 if u0 is None else u0
    T = cfg.T
    while True:
        reg = solve_regular(u0, replace(cfg, T=T))
        sing = solve_singular(u0, extension, replace(cfg, T=reg.T))
        if sing.T == reg.T:
            break
        T = sing.T
    sep = []
    for u, v in zip(reg.snapshots, sing.snapshots):
        diff = v.with_values(v.values - u.values)
        sep.append(lorentz_norm(diff, space.q, math.inf, space.s))
    late = [s for s, t in zip(sep, reg.times) if t >= reg.T / 4]
    return DemoReport(reg.T, list(reg.times), reg, sing, sep, float(min(late)),
                      head_exponent(reg.snapshots[-1]), head_exponent(sing.snapshots[-1]),
                      verdict.verdict)


@dataclass
class CriterionReport:
    space: tuple
    norms: dict
    violators: list
    vacuous: bool

    def as_dict(self):
        return {"space": [str(x) for x in self.space], "norms": self.norms,
                "violators": self.violators, "vacuous": self.vacuous}


def criterion_exponent(problem: ProblemParams, space: SpaceParams):
    """Second Lorentz index of the space in which the Duhamel part must lie for uniqueness."""
    verdict = classify(problem, space)
    if verdict.regime == DOUBLE_CRITICAL:
        return critical_exponents(problem, space).alpha_star - 1
    r = space.r
    r_conj = Fraction(1) if r == math.inf else 1 / (1 - inv(r))
    return r_conj * (problem.alpha - 1)


def uniqueness_criterion_probe(u: MildSolution, v: MildSolution, problem: ProblemParams,
                               space: SpaceParams) -> CriterionReport:
    """Duhamel-part norms of both solutions in the criterion space at their snapshot times."""
    r_crit = criterion_exponent(problem, space)
    crit = (space.q, r_crit, space.s)
    same = u is v or (len(u.snapshots) == len(v.snapshots) and all(
        np.array_equal(a.values, b.values) for a, b in zip(u.snapshots, v.snapshots)))
    norms, violators = {}, []
    for sol in ((u,) if same else (u, v)):
        vals = [lorentz_norm(f, *crit) for f in sol.duhamel_terms()]
        norms[sol.branch] = vals
        if any(math.isinf(x) for x in vals):
            violators.append(sol.branch)
    return CriterionReport(crit, norms, violators, same)


def refinement_norms(f: RadialFunction, q, r, s, cutoffs):
    """Norms with the head truncated at -log r = cutoff, for growing cutoffs."""
    return [lorentz_norm(f.with_head_cutoff(c), q, r, s) for c in cutoffs]


def nonlinear_gain(u0: RadialFunction, cfg: PicardConfig, t_grid, levels=None, order=None):
    """Fitted exponent of |N(e^{t Lap} u0)(t)| / K(t)^alpha in t, with K the Kato norm.

    For data homogeneous under the scaling this is exactly the time-gain exponent.
    """
    nonlin = _Nonlinearity(cfg.problem, None)
    alpha = as_float(cfg.problem.alpha)
    levels = cfg.levels + 2 if levels is None else levels
    order = cfg.order if order is None else order
    ratios = []
    for t in t_grid:
        N = duhamel(lambda tau: nonlin(apply_semigroup(u0, tau)), t, levels=levels, order=order)
        ratios.append(cfg.norm(N) / cfg.kato(apply_semigroup(u0, t), t) ** alpha)
    slope = float(np.polyfit(np.log(t_grid), np.log(ratios), 1)[0])
    return slope, ratios
