import json

import numpy as np
import pytest
from numpy.testing import assert_allclose

from redalloc import distributions as dist
from redalloc import presets
from redalloc.conditions import (B_PROPERTIES, Comparison, ConditionReport, GridConfig, TheoremId,
                                 check_b_shape, check_drhr, check_theorem, family_drhr,
                                 condition_u_grid, randomized_comparisons, ratio_q, shape_t_grid,
                                 theta_grid)
from redalloc.errors import DomainError, ValidationError
from redalloc.orders import majorize, weak_supermajorize
from redalloc.structure import Distortion, k_out_of_n, q, series
from redalloc.systems import ComponentLevelSystem, default_grid

CERTIFIED = [(k, p) for k, p in presets.PRESETS.items() if p.theorem is not None]
TWO_SYSTEM = [t for t in TheoremId if not t.single_system]
U = np.linspace(0.05, 0.95, 19)

# -- ratios ------------------------------------------------------------------------------


def test_ratios_for_independent_series():
    # q(u) = u^3: every ratio has an elementary closed form
    d = Distortion.of(series(3), "gumbel", 1.0)
    assert_allclose(ratio_q("R1", d, U), 3 * (1 - U) / U, rtol=1e-12)
    assert_allclose(ratio_q("R2", d, U), 3 * (1 - U) * U**2 / (1 - U**3), rtol=1e-12)
    assert_allclose(ratio_q("R3", d, U), 2 * (1 - U) / U - 1, rtol=1e-12)
    assert_allclose(ratio_q("R4", d, U), 3 * U**3 / (1 - U**3), rtol=1e-12)


def test_ratio_r2_against_finite_difference():
    d = Distortion.of(k_out_of_n(3, 4), "clayton", 8.5)
    h = 1e-6
    dq = (np.asarray(q(d, U + h)) - np.asarray(q(d, U - h))) / (2 * h)
    assert_allclose(ratio_q("R2", d, U), (1 - U) * dq / (1 - np.asarray(q(d, U))), rtol=1e-6)


def test_ratio_errors():
    d = Distortion.of(series(2), "gumbel", 2.0)
    with pytest.raises(ValidationError):
        ratio_q("R5", d, 0.5)
    with pytest.raises(DomainError):
        ratio_q("R1", d, 0.0)
    assert isinstance(ratio_q("R1", d, 0.5), float)


# -- individual conditions ------------------------------------------------------------------


def test_report_invariant():
    with pytest.raises(ValueError):
        ConditionReport("x", "x", {}, True, {}, -1.0, 1e-9)
    r = ConditionReport("x", "x", {}, True, {}, -1e-10, 1e-9)
    assert json.loads(json.dumps(r.to_dict()))["pass"] is True


@pytest.mark.parametrize("family,prop,expected", [
    (dist.LOMAX, "increasing", True),
    (dist.LOMAX, "decreasing", False),
    (dist.LOMAX, "log_concave", True),
    (dist.GENERALIZED_EXPONENTIAL, "decreasing", True),
    (dist.GENERALIZED_EXPONENTIAL, "log_convex", True),
    (dist.GENERALIZED_EXPONENTIAL, "log_concave", False),
    (dist.INVERTED_EXPONENTIAL, "log_concave", True),
    (dist.INVERTED_EXPONENTIAL, "log_convex", True),
])
def test_b_shape(family, prop, expected):
    bg = np.linspace(0.2, 1.2, 20)
    rep = check_b_shape(family, prop, shape_t_grid(family, bg, default_grid(300)), bg)
    assert rep.passed is expected
    if not expected:
        assert set(rep.worst_point) == {"b", "t"}


def test_b_shape_errors():
    bg = np.linspace(0.2, 1.2, 5)
    with pytest.raises(ValidationError):
        check_b_shape(dist.LOMAX, "wiggly", [1.0, 2.0], bg)
    with pytest.raises(ValidationError):
        check_b_shape(dist.LOMAX, "composite_convex", [1.0, 2.0], bg)
    with pytest.raises(DomainError):
        check_b_shape(dist.pareto1(1.5), "increasing", [0.5, 2.0], bg)
    assert len(B_PROPERTIES) == 11


def test_drhr_checks():
    t = np.linspace(0.1, 10, 200)
    assert check_drhr(lambda s: 1 / s, t).passed
    rep = check_drhr(lambda s: s, t)
    assert not rep.passed and rep.worst_point["t"] == pytest.approx(0.1)
    assert family_drhr(dist.INVERTED_EXPONENTIAL, [0.02, 0.05], t).passed
    assert family_drhr(dist.LOMAX, [0.5, 2.0], t).passed


# -- theorem certificates ------------------------------------------------------------------


@pytest.mark.parametrize("name,preset", CERTIFIED, ids=[k for k, _ in CERTIFIED])
def test_examples_certify(name, preset):
    cert = check_theorem(preset.theorem, preset.comparison)
    assert cert.all_pass, [r.condition_id for r in cert.failed]
    assert cert.agrees is True
    d = json.loads(cert.to_json())
    assert set(d) == {"theorem", "variant", "conditions", "all_pass", "implied", "verified", "agrees"}


def test_failing_theta_range_reports_worst_point():
    c = presets.PRESETS["ex3.1"].comparison
    cert = check_theorem("T3_1", Comparison(c.first, c.second, (2, 10)))
    assert not cert.all_pass
    bad = cert.failed[0]
    assert bad.worst_margin < -bad.tolerance
    assert bad.worst_point["theta"] == pytest.approx(2.0)
    # the conclusion is only checked once every hypothesis holds
    assert cert.verified is None and cert.agrees is None


def test_identical_systems_vacuous():
    a = presets.PRESETS["ex3.1"].comparison.first
    cert = check_theorem("T3_1", Comparison(a, a, (15, 50)))
    assert cert.all_pass and cert.agrees
    assert cert.verified.relation == "indistinguishable"


def test_variant_selection():
    c = presets.PRESETS["ex3.7"].comparison
    assert check_theorem("T3_7", c).variant == "primary"
    assert not check_theorem("T3_7", c, variant="dual").all_pass
    with pytest.raises(ValidationError):
        check_theorem("T3_1", c, variant="dual")


def test_shape_errors():
    c31 = presets.PRESETS["ex3.1"].comparison
    with pytest.raises(ValidationError):
        check_theorem("T4_1", c31)
    with pytest.raises(ValidationError):
        check_theorem("T3_1", Comparison(c31.first, None, (15, 50)))


def _cross_cases():
    out = []
    for name, p in presets.PRESETS.items():
        a, b = p.comparison.first, p.comparison.second
        if b is None or type(a) is not type(b):
            continue
        level = "component" if isinstance(a, ComponentLevelSystem) else "system"
        out += [(name, tid) for tid in TWO_SYSTEM if tid.level == level]
    return out


@pytest.mark.parametrize("name,tid", _cross_cases(), ids=lambda x: str(getattr(x, "value", x)))
def test_certificates_are_sound_across_examples(name, tid):
    # whenever every hypothesis of a theorem holds, the conclusion does too
    cert = check_theorem(tid, presets.PRESETS[name].comparison)
    if cert.all_pass:
        assert cert.agrees is True


FAST = GridConfig(t_points=500, u_points=200)


@pytest.mark.parametrize("tid", list(TheoremId), ids=lambda t: t.value)
def test_randomized_scenarios_respect_hypotheses(tid):
    base = next(p.comparison for _, p in CERTIFIED if p.theorem is tid)
    cases = randomized_comparisons(tid, base, count=20, seed=5)
    assert len(cases) == 20
    for c in cases:
        if tid.single_system:
            continue
        b, bs = np.asarray(c.first.b), np.asarray(c.second.b)
        if tid in (TheoremId.T3_1, TheoremId.T3_2):
            assert weak_supermajorize(bs, b)
        else:
            assert majorize(bs, b)
        cert = check_theorem(tid, c, cfg=FAST)
        if cert.all_pass:
            assert cert.agrees is True


def test_r3_nonpositive_whenever_lr_theorem_holds():
    base = presets.PRESETS["ex3.7"].comparison
    for c in randomized_comparisons("T3_7", base, count=30, seed=2):
        cert = check_theorem("T3_7", c, cfg=FAST, verify=False)
        if cert.all_pass:
            d = c.first.distortion
            assert np.all(ratio_q("R3", d, np.linspace(0.01, 0.99, 99)) <= 1e-9)


def test_randomized_needs_theta_range():
    c = presets.PRESETS["ex4.1"].comparison
    with pytest.raises(ValidationError):
        randomized_comparisons("T3_1", Comparison(c.first, c.first, None))


def test_theta_grid_contains_the_systems_thetas():
    # monotonicity in theta can fail strictly inside one cell of a uniform grid
    c = presets.PRESETS["ex3.4"].comparison
    th = theta_grid(Comparison(c.first, c.second, (5, 20)), 12)
    assert {10.0, 7.0} <= set(th.tolist()) and np.all(np.diff(th) > 0)


def test_u_grid_reaches_the_operating_range():
    c = presets.PRESETS["ex3.4"].comparison
    cfg = GridConfig(t_points=300, u_points=100)
    u = condition_u_grid(c, cfg)
    assert u.max() > 0.9999 and np.all(np.diff(u) > 0)
    assert np.array_equal(condition_u_grid(c, GridConfig(t_points=300, u_points=100, cover_u=False)),
                          cfg.u_grid())
