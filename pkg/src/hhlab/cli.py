"""hhlab command line.

    hhlab classify --d 3 --gamma 0 --alpha 3 --q 3 --r 2
    hhlab atlas --axes s-q --d 3 --gamma -1 --alpha 2
    hhlab norm --function gaussian --d 3 --q 2 --r 2
    hhlab evolve --input gaussian.csv --t 1
    hhlab estimate-scan --pair "1,1,0->inf,inf,0" --d 3
    hhlab stationary --d 3 --gamma 0 --tmax 1000
    hhlab selfsimilar --d 3 --gamma 0 --alpha 3
    hhlab nonunique --d 3 --gamma 0 --alpha 3 --q 3 --r 4

Every subcommand accepts --out (default: $HHLAB_OUT, else ./hhlab-out) and
--emit-config, which prints a JSON run config instead of running. Such a
config re-runs with ``hhlab --config run.json``.

Exit codes: 0 success, 1 numerical failure, 2 usage error, 3 refused by the
classifier.
"""

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import _svg
from .params import DOUBLE_CRITICAL, DomainError, ProblemParams, SpaceParams, classify, exponent

OK, NUMERICAL, USAGE, REFUSED = 0, 1, 2, 3
ENV_OUT = "HHLAB_OUT"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict
    out: str
    seed: int = 0
    version: int = 1
    extra: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls(**data)


# output helpers


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])


def _write_json(path, data):
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


def _num(x):
    x = float(x)
    return x if math.isfinite(x) else str(x)


# argument types


def _exp(text):
    try:
        return exponent(text)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _problem(ns):
    return ProblemParams(ns.d, _exp(ns.gamma), _exp(ns.alpha))


def _space(ns):
    return SpaceParams(_exp(ns.q), _exp(ns.r), _exp(ns.s))


def _triple(text):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise UsageError(f"expected q,r,s but got {text!r}")
    return tuple(_exp(p) for p in parts)


def _function(ns):
    from .radial import RadialFunction, log_grid
    nodes = log_grid()
    if ns.input:
        return RadialFunction.from_csv(ns.input)
    if ns.d is None:
        raise UsageError("--d is required with --function")
    kind, par = ns.function, ns.param
    if kind == "gaussian":
        return RadialFunction.gaussian(ns.d, 1.0 if par is None else par, nodes)
    if kind == "indicator":
        return RadialFunction.indicator_ball(ns.d, 1.0 if par is None else par, nodes=nodes)
    if kind == "power":
        if par is None:
            raise UsageError("--param (the decay exponent) is required for --function power")
        return RadialFunction.power_law(par, ns.d, nodes=nodes)
    raise UsageError("give --input or --function")


# commands


def cmd_classify(ns, out):
    v = classify(_problem(ns), _space(ns), exterior=ns.exterior)
    print(v.summary())
    for note in v.notes:
        print("  " + note)
    if ns.json:
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "classify.json", v.as_dict())
    return OK


VERDICT_COLORS = {
    "UnconditionalUniqueness": "#8fd18f",
    "NonUniqueness": "#f08c8c",
    "SufficientConditionOnly": "#f5d36b",
    "UniquenessCriterion": "#9ec5f0",
    "IllPosedNonlinearity": "#b0b0b0",
    "Open": "#ececec",
    "invalid": "#ffffff",
}


def _atlas_point(axes, x, y, ns):
    """(problem, space) for a lattice point, or None when the point is not a valid tuple."""
    d, gamma = ns.d, _exp(ns.gamma)
    if axes == "alpha-q":
        alpha, inv_q, s = x, y, _exp(ns.s)
    elif axes == "s-q":
        alpha, inv_q, s = _exp(ns.alpha), y, x * d
    else:
        alpha, inv_q, s = x, 1 / float(_exp(ns.q)) if _exp(ns.q) != math.inf else 0.0, y
    if not 0 <= inv_q <= 1 or not float(alpha) > 1:
        return None
    q = math.inf if inv_q == 0 else 1 / inv_q
    r = _exp(ns.r)
    if q == math.inf:
        r = math.inf
    try:
        return ProblemParams(d, gamma, float(alpha)), SpaceParams(q, r, float(s))
    except ValueError:
        return None


def _atlas_curves(axes, ns, xs):
    d, g = ns.d, float(_exp(ns.gamma))
    curves = []
    if axes == "alpha-q":
        s = float(_exp(ns.s))
        curves.append(("scale-critical", xs, [(2 + g) / (d * (a - 1)) - s / d for a in xs]))
        curves.append(("integrability-critical", xs, [(d + g) / (d * a) - s / d for a in xs]))
    elif axes == "s-q":
        a = float(_exp(ns.alpha))
        curves.append(("scale-critical", xs, [(2 + g) / (d * (a - 1)) - x for x in xs]))
        curves.append(("integrability-critical", xs, [(d + g) / (d * a) - x for x in xs]))
    else:
        q = float(_exp(ns.q))
        inv_q = 0.0 if q == math.inf else 1 / q
        curves.append(("scale-critical", xs, [(2 + g) / (a - 1) - d * inv_q for a in xs]))
        curves.append(("integrability-critical", xs, [(d + g) / a - d * inv_q for a in xs]))
        curves.append(("d-2-d/q", xs, [d - 2 - d * inv_q for _ in xs]))
    return curves


ATLAS_DEFAULTS = {
    "alpha-q": ((1.05, 6.0), (0.0, 1.0)),
    "s-q": ((-0.6, 0.6), (0.0, 1.0)),
    "alpha-s": ((1.05, 6.0), (-2.0, 2.0)),
}


def cmd_atlas(ns, out):
    need = {"alpha-q": ("s",), "s-q": ("alpha",), "alpha-s": ("q",)}[ns.axes]
    for name in need:
        if getattr(ns, name) is None:
            raise UsageError(f"--{name} is required for the {ns.axes} atlas")
    (x0, x1), (y0, y1) = ATLAS_DEFAULTS[ns.axes]
    x0, x1 = ns.x_range or (x0, x1)
    y0, y1 = ns.y_range or (y0, y1)
    if not (x0 < x1 and y0 < y1) or ns.n < 1:
        raise UsageError("degenerate axis range")
    n = ns.n
    hx, hy = (x1 - x0) / n, (y1 - y0) / n
    rows, cells = [], []
    for i in range(n):
        for j in range(n):
            x, y = x0 + (i + 0.5) * hx, y0 + (j + 0.5) * hy
            pt = _atlas_point(ns.axes, x, y, ns)
            try:
                v = classify(*pt) if pt is not None else None
            except (DomainError, ValueError):
                v = None
            regime, verdict = (v.regime, v.verdict) if v is not None else ("invalid", "invalid")
            rows.append((x, y, regime, verdict))
            cells.append((x - hx / 2, y - hy / 2, hx, hy, verdict))
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "atlas.csv", ["x", "y", "regime", "verdict"], rows)
    xs = list(np.linspace(x0, x1, 200))
    labels = {"alpha-q": ("alpha", "1/q"), "s-q": ("s/d", "1/q"), "alpha-s": ("alpha", "s")}[ns.axes]
    used = {c[4] for c in cells}
    colors = {k: v for k, v in VERDICT_COLORS.items() if k in used}
    svg = _svg.cell_map(cells, colors, _atlas_curves(ns.axes, ns, xs),
                        title=f"verdicts, d={ns.d}, gamma={ns.gamma}", xlabel=labels[0],
                        ylabel=labels[1], xr=(x0, x1), yr=(y0, y1))
    (out / "atlas.svg").write_text(svg)
    print(f"{len(rows)} cells -> {out / 'atlas.csv'}")
    return OK


def cmd_norm(ns, out):
    from .lorentz import lorentz_norm
    f = _function(ns)
    val = lorentz_norm(f, _exp(ns.q), _exp(ns.r), float(_exp(ns.s)))
    print(repr(val))
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "norm.json", {"q": ns.q, "r": ns.r, "s": ns.s, "norm": _num(val)})
    return OK


def cmd_evolve(ns, out):
    from .heat import apply_semigroup
    f = _function(ns)
    if not ns.t > 0:
        raise UsageError("--t must be positive")
    use = {"auto": None, "yes": True, "no": False}[ns.compiled]
    g = apply_semigroup(f, ns.t, use_compiled=use)
    out.mkdir(parents=True, exist_ok=True)
    g.to_csv(out / "evolved.csv")
    m = (f.nodes >= 1e-3) & (f.nodes <= 1e2)
    svg = _svg.line_plot([("input", f.nodes[m], np.abs(f.values[m])),
                          (f"t={ns.t:g}", g.nodes[m], np.abs(g.values[m]))],
                         title="radial profile", xlabel="r", ylabel="|f|", logx=True, logy=True)
    (out / "evolve.svg").write_text(svg)
    print(out / "evolved.csv")
    return OK


def cmd_estimate_scan(ns, out):
    from .heat import dilation_dictionary, measure_decay_slope
    from .params import EstimateQuery, estimate_admissible
    try:
        src_text, tgt_text = ns.pair.split("->")
    except ValueError:
        raise UsageError("--pair must look like q1,r1,s1->q2,r2,s2") from None
    src, tgt = _triple(src_text), _triple(tgt_text)
    ans = estimate_admissible(EstimateQuery(src, tgt, ns.d))
    if not ans.admissible:
        print("inadmissible: " + ", ".join(ans.violated_conditions))
        return REFUSED
    ts = np.geomspace(ns.t_min, ns.t_max, ns.n)
    rep = measure_decay_slope(dilation_dictionary(ns.d), src, tgt, ts)
    expected = float(ans.decay_exponent)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "scan.csv", ["t", "proxy"], rep.rows())
    _write_json(out / "scan.json", {"pair": ns.pair, "d": ns.d, "slope": rep.slope,
                                    "expected": expected, "per_function": rep.per_function})
    (out / "scan.svg").write_text(_svg.line_plot(
        [("operator-norm proxy", rep.t_grid, rep.proxy),
         (f"slope {expected:g}", rep.t_grid, [rep.constant * t**expected for t in rep.t_grid])],
        title=ns.pair, xlabel="t", ylabel="ratio", logx=True, logy=True))
    print(f"slope {rep.slope:.6f} (expected {expected:.6f})")
    return OK


def cmd_stationary(ns, out):
    from .stationary import asymptotic_constant, limit_constant, solve_emden, upper_bound_check
    prof = solve_emden(ns.d, float(_exp(ns.gamma)), u0=ns.u0, t_max=ns.tmax)
    rep = asymptotic_constant(prof)
    bound = upper_bound_check(prof)
    t, g = prof.trend()
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "trend.csv", ["t", "scaled_u"], zip(t, g))
    _write_csv(out / "profile.csv", ["t", "u", "u_t"], zip(prof.t, prof.u, prof.u_t))
    exact = limit_constant(ns.d, float(_exp(ns.gamma)))
    _write_json(out / "stationary.json", {
        "d": ns.d, "gamma": ns.gamma, "t_max": ns.tmax, "u0": float(prof.u[0]),
        "estimate": rep.estimate, "last_value": rep.last_value, "monotone": rep.monotone,
        "flux_estimate": rep.flux_estimate, "limit_constant": exact,
        "phase_ratio_end": float(np.ravel(prof.phase_ratio)[-1]),
        "bounded": bound.bounded, "bound_constant": bound.constant})
    (out / "trend.svg").write_text(_svg.line_plot(
        [("scaled profile", t, g), ("limit", [t[0], t[-1]], [exact, exact])],
        title=f"d={ns.d}, gamma={ns.gamma}", xlabel="t", ylabel="t^k u", logx=True))
    print(f"estimate {rep.estimate:.6f} (limit {exact:.6f})")
    return OK


def cmd_selfsimilar(ns, out):
    from .selfsimilar import mild_residual, norm_scaling_check, shoot_profile, tail_report
    prof = shoot_profile(ns.d, float(_exp(ns.gamma)), float(_exp(ns.alpha)),
                         allow_outside=ns.allow_outside)
    tail = tail_report(prof)
    ts = np.geomspace(1e-2, 1e2, 9)
    scale = norm_scaling_check(prof, _exp(ns.q), _exp(ns.r), _exp(ns.s), ts)
    info = {"d": ns.d, "gamma": ns.gamma, "alpha": ns.alpha, "shooting_value": prof.a,
            "classification": prof.classification, "outside_theory": prof.outside_theory,
            "tail": tail, "scaling_slope": scale.slope, "scaling_expected": scale.expected,
            "vanishing_at_zero": scale.vanishing}
    if ns.residual:
        info["mild_residual"] = {str(t): mild_residual(prof, t) for t in ns.residual}
    r = np.linspace(0.0, prof.r_fit, 400)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "profile.csv", ["r", "W"], zip(r, prof(r)))
    _write_csv(out / "scaling.csv", ["t", "norm"], zip(ts, scale.norms))
    _write_json(out / "selfsimilar.json", info)
    (out / "profile.svg").write_text(_svg.line_plot(
        [("W", r[1:], prof(r[1:]))], title="self-similar profile", xlabel="r", ylabel="W", logy=True))
    print(f"a* = {prof.a:.12g}, tail {tail['classification']}")
    return OK


def cmd_nonunique(ns, out):
    from .mild import PicardConfig, Refused, SelfSimilarTriple, nonuniqueness_demo
    problem, space = _problem(ns), _space(ns)
    verdict = classify(problem, space)
    print(verdict.summary())
    try:
        cfg = PicardConfig.for_problem(problem, space, T=ns.T, snapshots=ns.snapshots) \
            if verdict.regime == DOUBLE_CRITICAL else None
        rep = nonuniqueness_demo(None, problem, space, cfg)
    except Refused as exc:
        print(str(exc))
        return REFUSED
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "demo.json", rep.as_dict())
    if isinstance(rep, SelfSimilarTriple):
        print(f"three solutions from zero data: 0 and plus/minus the self-similar one (a* = {rep.profile.a:.10g})")
        return OK
    rep.regular.save(out / "regular")
    rep.singular.save(out / "singular")
    (out / "separation.svg").write_text(_svg.line_plot(
        [("separation", rep.times, rep.separation),
         ("10 x residual tolerance", rep.times, [10 * rep.regular.config.residual_tol] * len(rep.times))],
        title="regular vs singular branch", xlabel="t", ylabel="weak norm of u - v", logx=True))
    print(f"margin {rep.margin:.6g} on [T/4, T], T = {rep.T:g}; residuals ok: {rep.residual_ok}")
    return OK if rep.residual_ok else NUMERICAL


# parser


def _add_problem(p, space=True):
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--alpha", required=True)
    if space:
        p.add_argument("--q", required=True)
        p.add_argument("--r", default="inf")
        p.add_argument("--s", default="0")


def _add_function(p):
    p.add_argument("--input", help="RadialFunction CSV")
    p.add_argument("--function", choices=("gaussian", "power", "indicator"))
    p.add_argument("--param", type=float, help="gaussian time, power exponent or ball radius")
    p.add_argument("--d", type=int)


def _range(text):
    try:
        lo, hi = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected lo,hi") from None
    return lo, hi


def build_parser():
    top = argparse.ArgumentParser(prog="hhlab", description="uniqueness laboratory")
    top.add_argument("--config", help="JSON run config written by --emit-config")
    sub = top.add_subparsers(dest="command")

    def command(name, fn, **kw):
        p = sub.add_parser(name, **kw)
        p.set_defaults(func=fn)
        p.add_argument("--out", help=f"output directory (default ${ENV_OUT} or ./hhlab-out)")
        p.add_argument("--emit-config", action="store_true")
        p.add_argument("--seed", type=int, default=0)
        return p

    p = command("classify", cmd_classify, help="regime and uniqueness verdict")
    _add_problem(p)
    p.add_argument("--exterior", action="store_true")
    p.add_argument("--json", action="store_true", help="also write classify.json")

    p = command("atlas", cmd_atlas, help="verdict map over a parameter plane")
    p.add_argument("--axes", choices=tuple(ATLAS_DEFAULTS), required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--alpha")
    p.add_argument("--q")
    p.add_argument("--r", default="inf")
    p.add_argument("--s", default="0")
    p.add_argument("--x-range", type=_range)
    p.add_argument("--y-range", type=_range)
    p.add_argument("--n", type=int, default=40)

    p = command("norm", cmd_norm, help="weighted Lorentz norm of a radial function")
    _add_function(p)
    p.add_argument("--q", required=True)
    p.add_argument("--r", required=True)
    p.add_argument("--s", default="0")

    p = command("evolve", cmd_evolve, help="apply the heat semigroup")
    _add_function(p)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--compiled", choices=("auto", "yes", "no"), default="auto")

    p = command("estimate-scan", cmd_estimate_scan, help="measured decay slope of the heat semigroup")
    p.add_argument("--pair", required=True, help='"q1,r1,s1->q2,r2,s2"')
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--t-min", type=float, default=0.1)
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--n", type=int, default=5)

    p = command("stationary", cmd_stationary, help="singular stationary profile and its asymptotics")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--tmax", type=float, default=1e3)
    p.add_argument("--u0", type=float)

    p = command("selfsimilar", cmd_selfsimilar, help="self-similar profile by shooting")
    _add_problem(p, space=False)
    p.add_argument("--q", default="2")
    p.add_argument("--r", default="2")
    p.add_argument("--s", default="0")
    p.add_argument("--residual", type=float, nargs="*", help="times for the mild-equation residual")
    p.add_argument("--allow-outside", action="store_true")

    p = command("nonunique", cmd_nonunique, help="regular and singular solutions from one datum")
    _add_problem(p)
    p.add_argument("--T", type=float, default=1e-2)
    p.add_argument("--snapshots", type=int, default=6)
    return top


RUN_KEYS = ("command", "func", "out", "emit_config", "config", "seed")


def _params(ns):
    return {k: v for k, v in sorted(vars(ns).items()) if k not in RUN_KEYS}


def _argv_from_config(cfg: RunConfig):
    argv = [cfg.command]
    for key, val in cfg.params.items():
        flag = "--" + key.replace("_", "-")
        if val is None or val is False:
            continue
        # flag=value keeps negative values from reading as options
        if val is True:
            argv.append(flag)
        elif isinstance(val, (list, tuple)):
            if key.endswith("range"):
                argv.append(f"{flag}={','.join(map(repr, val))}")
            else:
                argv += [flag, *map(str, val)]
        else:
            argv.append(f"{flag}={val}")
    argv += ["--out", cfg.out, "--seed", str(cfg.seed)]
    return argv


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    ns = parser.parse_args(argv)
    if ns.config:
        try:
            cfg = RunConfig.from_json(Path(ns.config).read_text())
        except (OSError, ValueError, TypeError) as exc:
            parser.error(f"cannot read config: {exc}")
        ns = parser.parse_args(_argv_from_config(cfg))
    if ns.command is None:
        parser.print_help()
        return USAGE
    out = Path(ns.out or os.environ.get(ENV_OUT) or "hhlab-out")
    if ns.emit_config:
        print(RunConfig(ns.command, _params(ns), str(out), ns.seed).to_json())
        return OK
    try:
        return ns.func(ns, out)
    except UsageError as exc:
        print(f"hhlab {ns.command}: error: {exc}", file=sys.stderr)
        return USAGE
    except (DomainError, ValueError, TypeError) as exc:
        print(f"hhlab {ns.command}: invalid input: {exc}", file=sys.stderr)
        return USAGE
    except (RuntimeError, ArithmeticError) as exc:
        print(f"hhlab {ns.command}: numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
