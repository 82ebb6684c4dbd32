import json
import math
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from hhlab.lorentz import lorentz_norm
from hhlab.mild import (REGULAR, SINGULAR, DensityError, PicardConfig, Refused, SelfSimilarTriple, SplitError,
                        criterion_exponent, head_exponent, nonlinear_gain, nonuniqueness_demo,
                        refinement_norms, solve_regular, solve_singular, split_radius,
                        uniqueness_criterion_probe)
from hhlab.params import ProblemParams, SpaceParams
from hhlab.radial import RadialFunction
from hhlab.stationary import ExtendedProfile

SUB = ProblemParams(3, 0, 2), SpaceParams(4, 4, 0)


@pytest.fixture(scope="module")
def sub_cfg():
    return PicardConfig.for_problem(*SUB, T=0.1, snapshots=4)


@pytest.fixture(scope="module")
def small_gauss(sub_cfg):
    return RadialFunction.gaussian(3, 1.0, sub_cfg.nodes, mass=0.5)


@pytest.fixture(scope="module")
def sub_run(sub_cfg, small_gauss):
    return solve_regular(small_gauss, sub_cfg)


# configuration


def test_config_for_double_critical(double_critical):
    cfg = PicardConfig.for_problem(*double_critical)
    assert cfg.q_aux == Fraction(9, 2)
    assert cfg.beta == pytest.approx(1 / 6) and cfg.delta == 0
    assert np.allclose(cfg.times(), cfg.T * 2.0 ** (np.arange(1, 7) - 6))
    with pytest.raises(ValueError):
        PicardConfig.for_problem(*double_critical, q_aux=12)


def test_config_for_subcritical(sub_cfg):
    assert sub_cfg.q_aux == Fraction(36, 5)
    assert sub_cfg.delta == pytest.approx(5 / 8)


# regular branch


def test_zero_data_gives_zero(sub_cfg):
    cfg = replace(sub_cfg, snapshots=3)
    z = RadialFunction(cfg.nodes, np.zeros(cfg.nodes.size), 3, head_exponent=None)
    sol = solve_regular(z, cfg)
    assert len(sol.distances) == 1
    assert all(not np.any(u.values) for u in sol.snapshots)
    assert sol.branch == REGULAR


def test_subcritical_contracts_at_once(sub_run):
    assert sub_run.halvings == 0
    assert sub_run.contraction < 1
    assert sub_run.certified and max(sub_run.residual_trace) < 1e-3
    d = sub_run.distances
    assert all(b < a for a, b in zip(d[1:], d[2:]))


def test_kato_trace_is_bounded(sub_run):
    k = np.array(sub_run.kato_trace)
    assert np.all(np.isfinite(k)) and np.all(k > 0)
    assert k.max() < 10 * k.min()


def test_delta_scaling(sub_cfg):
    # data homogeneous of degree -d/q make every quantity a pure power of t
    u0 = RadialFunction.power_law(0.75, 3, nodes=sub_cfg.nodes)
    slope, ratios = nonlinear_gain(u0, sub_cfg, [0.01, 0.1, 1.0])
    assert slope == pytest.approx(sub_cfg.delta, rel=0.10)
    assert all(r > 0 for r in ratios)


def test_kato_norm_vanishes_for_smooth_data(sub_cfg, small_gauss):
    from hhlab.heat import apply_semigroup
    ts = 10.0 ** -np.arange(1, 7)
    trace = [sub_cfg.kato(apply_semigroup(small_gauss, t), t) for t in ts]
    assert all(b < a for a, b in zip(trace, trace[1:]))
    # the norm of the evolved data settles, leaving the pure weight t^beta
    slopes = np.diff(np.log(trace)) / np.diff(np.log(ts))
    assert slopes[-1] == pytest.approx(sub_cfg.beta, rel=1e-3)


def test_homogeneous_data_fail_the_density_check(sub_cfg):
    u0 = RadialFunction.power_law(0.75, 3, nodes=sub_cfg.nodes)
    with pytest.raises(DensityError):
        solve_regular(u0, sub_cfg)


def test_degenerate_singular_is_regular(sub_cfg, small_gauss, sub_run):
    z = small_gauss.with_values(np.zeros(small_gauss.nodes.size))
    sol = solve_singular(small_gauss, ExtendedProfile(z, z, (0.25, 0.5), None), sub_cfg)
    assert sol.branch == SINGULAR
    for a, b in zip(sub_run.snapshots, sol.snapshots):
        assert np.array_equal(a.values, b.values)
    assert sol.residual_trace == sub_run.residual_trace


def test_save_and_manifest(sub_run, tmp_path):
    out = sub_run.save(tmp_path / "run")
    man = json.loads((out / "manifest.json").read_text())
    assert man["branch"] == REGULAR and man["certified"] is True
    assert len(man["files"]) == len(sub_run.snapshots)
    back = RadialFunction.from_csv((out / man["files"][-1]).read_text())
    assert np.array_equal(back.values, sub_run.snapshots[-1].values)
    assert man["times"] == list(map(float, sub_run.times))


# the double critical demonstration


def test_demo_branches(demo):
    rep = demo.value
    assert rep.residual_ok
    for sol in (rep.regular, rep.singular):
        assert max(sol.residual_trace) <= 1e-3
        d = sol.distances
        assert all(b < a for a, b in zip(d[1:], d[2:]))
    assert np.all(np.isfinite(rep.regular.kato_trace))
    assert rep.margin > 0


def test_demo_head_exponents(demo):
    rep = demo.value
    power, log_power = rep.head_singular
    assert power == pytest.approx(1.0, abs=0.02)
    assert log_power == 0.5
    assert abs(rep.head_regular[0]) < 0.05


def test_singular_snapshots_follow_the_profile(demo, extension3):
    # the log-corrected head is carried, not just declared: v / V0 -> 1 at the origin
    rep = demo.value
    V0 = extension3.V0.resampled(rep.singular.snapshots[0].nodes)
    for v in rep.singular.snapshots:
        ratio = v.values[:20] / V0.values[:20]
        assert np.all(np.abs(ratio - 1) < 0.05)


def test_singular_duhamel_term_norms(demo):
    rep = demo.value
    for f in rep.singular.duhamel_terms():
        assert lorentz_norm(f, 3, 2, 0) == math.inf
        assert math.isfinite(lorentz_norm(f, 3, 4, 0))


def test_criterion_probe(demo, double_critical):
    rep = demo.value
    problem, space = double_critical
    probe = uniqueness_criterion_probe(rep.regular, rep.singular, problem, space)
    assert probe.space == (3, 2, 0)
    assert probe.violators == [SINGULAR]
    assert all(math.isfinite(x) for x in probe.norms[REGULAR])
    assert all(x == math.inf for x in probe.norms[SINGULAR])
    same = uniqueness_criterion_probe(rep.regular, rep.regular, problem, space)
    assert same.vacuous and same.violators == []


def test_criterion_exponent():
    assert criterion_exponent(ProblemParams(3, 0, 3), SpaceParams(3, 4, 0)) == 2
    # single critical: r' (alpha - 1) with r' the conjugate of r
    assert criterion_exponent(ProblemParams(3, 0, 2), SpaceParams(3, math.inf, 0)) == 1
    assert criterion_exponent(ProblemParams(3, 0, 2), SpaceParams(3, 2, 0)) == 2


def test_split_radius(extension3, double_critical):
    cfg = PicardConfig.for_problem(*double_critical)
    V0 = extension3.V0.resampled(cfg.nodes)
    rho = split_radius(V0, cfg)
    assert lorentz_norm(V0.truncated(rho), 3, math.inf, 0) < cfg.split_eps
    assert lorentz_norm(V0.truncated(1.05 * rho), 3, math.inf, 0) >= cfg.split_eps * 0.999
    with pytest.raises(SplitError):
        split_radius(V0, cfg, eps=1e-30)


def test_refinement_of_the_extension(extension3):
    norms = refinement_norms(extension3.V0, 3, 2, 0, [20, 40, 80])
    assert norms[0] < norms[1] < norms[2]
    norms4 = refinement_norms(extension3.V0, 3, 4, 0, [20, 40, 80])
    assert norms4[2] == pytest.approx(norms4[1], rel=1e-3)


def test_head_exponent_fit():
    nodes = np.geomspace(1e-8, 0.5, 400)
    f = RadialFunction(nodes, nodes**-1.0 * (-np.log(nodes)) ** -0.5, 3, head_exponent=1.0, head_log=0.5)
    a, b = head_exponent(f)
    # over [1e-8, 1e-7] the local power is 1 - 0.5 / log(1/r) averaged in log r
    lr = -np.log(nodes[nodes <= 1e-7])
    assert a == pytest.approx(1 - 0.5 / lr.mean(), abs=1e-3)
    assert b == 0.5
    pure = RadialFunction(nodes, nodes**-1.5, 3, head_exponent=1.5)
    assert head_exponent(pure) == (pytest.approx(1.5, abs=1e-12), 0.0)


def test_demo_refuses_uniqueness_regimes(double_critical):
    problem, _ = double_critical
    with pytest.raises(Refused) as exc:
        nonuniqueness_demo(None, problem, SpaceParams(3, 2, 0))
    assert "UnconditionalUniqueness" in str(exc.value)


def test_supercritical_zero_data_give_the_selfsimilar_triple():
    problem, space = ProblemParams(3, 0, 3), SpaceParams(2, 2, 0)
    rep = nonuniqueness_demo(None, problem, space)
    assert isinstance(rep, SelfSimilarTriple)
    d = rep.as_dict()
    assert d["solutions"] == ["0", "+selfsimilar", "-selfsimilar"]
    norms = [rep.norms[t] for t in sorted(rep.norms)]
    assert all(n > 0 for n in norms) and norms == sorted(norms)
    bump = RadialFunction.gaussian(3, 1.0)
    with pytest.raises(Refused):
        nonuniqueness_demo(bump, problem, space)
