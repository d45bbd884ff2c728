import numpy as np
import pytest
from numpy.testing import assert_allclose

from redalloc import distributions as dist
from redalloc import presets
from redalloc.errors import UnsupportedSamplerError, ValidationError
from redalloc.montecarlo import MIN_SAMPLES, invert_survival, simulate
from redalloc.structure import Distortion, k_out_of_n, q, series
from redalloc.systems import ComponentLevelSystem, SystemLevelSystem, default_grid, time_grid

N = 100_000


def test_independent_two_of_three_at_median():
    # Gbar(1) = 0.5 for Lomax b = 1, and 3 u^2 - 2 u^3 = 0.5 at u = 0.5
    sys = ComponentLevelSystem.build(k_out_of_n(2, 3), "gumbel", 1.0, dist.LOMAX, (1.0,))
    est = simulate(sys, time_grid([1.0, 2.0, 3.0]), N, seed=1)
    assert abs(est.estimates[0] - 0.5) <= 4 * est.stderr[0]
    assert est.within(sys.sf(est.grid.x)).all()


def test_independent_series_factorizes():
    sys = ComponentLevelSystem.build(series(3), "gumbel", 1.0, dist.WEIBULL, (1.5, 2.0))
    t = np.array([0.3, 0.6, 1.0])
    unit = dist.sf(dist.LifetimeModel(dist.WEIBULL, 1.5), t) + dist.sf(dist.LifetimeModel(dist.WEIBULL, 2.0), t) \
        - dist.sf(dist.LifetimeModel(dist.WEIBULL, 1.5), t) * dist.sf(dist.LifetimeModel(dist.WEIBULL, 2.0), t)
    est = simulate(sys, time_grid(t), N, seed=4)
    assert est.within(unit**3).all()


@pytest.mark.parametrize("name", ["ex3.1", "ex3.7"])
def test_component_level_examples(name):
    sys = presets.PRESETS[name].comparison.first
    g = default_grid(20)
    est = simulate(sys, g, N, seed=11)
    assert est.within(sys.sf(g.x)).sum() >= 19


def test_system_level_without_spares():
    # m = 0: one subsystem, sf = q(Fbar)
    sys = SystemLevelSystem(k_out_of_n(3, 4), "clayton", (8.5,), dist.RAYLEIGH, (1.5,))
    d = Distortion.of(k_out_of_n(3, 4), "clayton", 8.5)
    g = default_grid(20)
    est = simulate(sys, g, N, seed=3)
    ref = np.asarray(q(d, dist.sf(dist.LifetimeModel(dist.RAYLEIGH, 1.5), g.x)))
    assert est.within(ref).sum() >= 19


def test_bp_sign_change_confirmed_by_simulation():
    c = presets.PRESETS["ex4.1"].comparison
    g = default_grid()
    diff = c.first.sf(g.x) - c.second.sf(g.x)
    grid = time_grid([g.x[np.argmax(diff)], g.x[np.argmin(diff)]])
    a = simulate(c.first, grid, 200_000, seed=8)
    b = simulate(c.second, grid, 200_000, seed=9)
    z = (a.estimates - b.estimates) / np.hypot(a.stderr, b.stderr)
    expected = np.sign(c.first.sf(grid.x) - c.second.sf(grid.x))
    assert set(expected) == {-1.0, 1.0}
    assert np.all(z * expected > 2)


def test_deterministic_and_thread_invariant():
    sys = presets.PRESETS["ex3.1"].comparison.first
    g = default_grid(10)
    a = simulate(sys, g, 60_000, seed=5, workers=1)
    b = simulate(sys, g, 60_000, seed=5, workers=4)
    assert np.array_equal(a.estimates, b.estimates)
    c = simulate(sys, g, 60_000, seed=6)
    assert not np.array_equal(a.estimates, c.estimates)


def test_invert_survival_round_trip():
    models = [dist.LifetimeModel(dist.LOMAX, b) for b in (1.2, 0.5)]
    u = np.array([1e-12, 1e-4, 0.3, 0.7, 1 - 1e-9])
    t = invert_survival(models, u)
    G = -np.expm1(sum(np.asarray(dist.logcdf(m, t)) for m in models))
    assert_allclose(G, u, rtol=1e-8)


def test_csv_header():
    sys = presets.PRESETS["ex3.1"].comparison.first
    text = simulate(sys, default_grid(5), MIN_SAMPLES, seed=0).to_csv()
    assert text.splitlines()[0] == "y,x,estimate,stderr"
    assert len(text.splitlines()) == 6


def test_errors():
    sys = presets.PRESETS["ex3.1"].comparison.first
    with pytest.raises(ValidationError):
        simulate(sys, default_grid(5), MIN_SAMPLES - 1)
    neg = ComponentLevelSystem.build(k_out_of_n(2, 3), "clayton", -0.3, dist.LOMAX, (1.0,))
    with pytest.raises(UnsupportedSamplerError):
        simulate(neg, default_grid(5), MIN_SAMPLES)
    bare = ComponentLevelSystem(sys.distortion, sys.family, sys.b)
    with pytest.raises(ValidationError):
        simulate(bare, default_grid(5), MIN_SAMPLES)
