import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dampwave.lifespan import (
    DataClass,
    LifespanRecord,
    LogScaled,
    SweepConfig,
    approximation_error_curve,
    auto_t_end,
    extension_exponent,
    fit_power_law,
    lifespan_model,
    log_lifespan_model,
    predicted_exponents,
    sweep,
)
from dampwave.numerics import bump, grid_with_spacing


@pytest.fixture(scope="module")
def profile():
    return grid_with_spacing(3.0, 0.02).sample(bump)


def records(eps, t0, p=2.0, tag="A", censored=None):
    censored = censored or [False] * len(eps)
    return [LifespanRecord(e, p, tag, t, c) for e, t, c in zip(eps, t0, censored)]


def test_model_values():
    assert lifespan_model(2, 0.1) == pytest.approx(100.0)
    assert lifespan_model(1.5, 1.0) == 1.0
    crit = lifespan_model(3, 0.1)
    assert isinstance(crit, LogScaled) and crit.log == pytest.approx(100.0)
    assert crit.value == pytest.approx(math.exp(100.0))
    assert LogScaled(1e4).value == math.inf
    assert log_lifespan_model(2, 0.1) == pytest.approx(math.log(100.0))


@pytest.mark.parametrize("p", [1.0, 3.5, 0.5])
def test_model_rejects_p(p):
    with pytest.raises(ValueError):
        lifespan_model(p, 0.1)
    with pytest.raises(ValueError):
        predicted_exponents(p)


def test_predicted_exponents():
    r = predicted_exponents(2.0)
    assert (r.classA, r.classB, r.R) == (2.0, 4.0, 2.0)
    c = predicted_exponents(3.0)
    assert c.log_scale and c.R == 4.0
    near = predicted_exponents(1.0 + 1e-9)
    assert max(near.classA, near.classB, near.R) < 1e-8


@settings(max_examples=200)
@given(st.floats(min_value=1.0001, max_value=2.999))
def test_extension_exponent_identity(p):
    r = predicted_exponents(p)
    assert r.R == pytest.approx(r.classB - r.classA, rel=1e-12)
    assert r.R == pytest.approx(2 * (p - 1) ** 2 / (3 - p), rel=1e-12)


def test_data_class_validation(profile):
    DataClass.build("A", 0.1, profile)
    DataClass.build("B", 0.1, profile)
    with pytest.raises(ValueError):
        DataClass("A", profile, -profile)
    with pytest.raises(ValueError):
        DataClass("B", profile, profile)
    with pytest.raises(ValueError):
        DataClass("B", 0 * profile, 0 * profile)
    with pytest.raises(ValueError):
        DataClass("C", profile, profile)


def test_record_validation():
    with pytest.raises(ValueError):
        LifespanRecord(0.1, 2.0, "A", 0.0, False)
    with pytest.raises(ValueError):
        LifespanRecord(0.1, 2.0, "Z", 1.0, False)


def test_fit_exact_power_law():
    eps = np.array([0.4, 0.2, 0.1, 0.05])
    fit = fit_power_law(records(eps, eps**-4.0))
    assert fit.slope == pytest.approx(-4.0, abs=1e-12)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)
    assert fit.window == (0.05, 0.4)


def test_fit_noisy_power_law():
    rng = np.random.default_rng(7)
    eps = 0.8 * 2.0 ** (-np.arange(10) / 2)
    t0 = eps**-4.0 * np.exp(rng.normal(0.0, 0.05, eps.size))
    fit = fit_power_law(records(eps, t0))
    assert fit.slope == pytest.approx(-4.0, abs=0.1)


def test_fit_drops_censored_and_largest():
    eps = [0.8, 0.4, 0.2, 0.1, 0.05, 0.025]
    t0 = [e**-2 for e in eps]
    t0[-1] = 3.0
    fit = fit_power_law(records(eps, t0, censored=[False] * 5 + [True]))
    assert fit.n_censored == 1 and fit.n_used == 4
    assert fit.window == (0.05, 0.4)
    assert fit.slope == pytest.approx(-2.0)


def test_fit_rejects_thin_data():
    with pytest.raises(ValueError):
        fit_power_law(records([0.2, 0.1], [25, 100]))
    with pytest.raises(ValueError):
        fit_power_law(records([0.3, 0.2, 0.1], [1, 2, 3]))
    with pytest.raises(ValueError):
        fit_power_law(records([0.4, 0.2, 0.1], [1, 2, 3]) + records([0.05], [9], p=1.5))


def test_fit_log_log_at_critical_p():
    eps = np.array([0.8, 0.5, 0.3, 0.2])
    t0 = np.exp(eps**-2.0)
    fit = fit_power_law(records(eps, t0, p=3.0))
    assert fit.log_log and fit.slope == pytest.approx(-2.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=1e-3, max_value=1e3), st.floats(min_value=-6, max_value=-0.5))
def test_fit_equivariance(scale, slope):
    eps = np.array([0.5, 0.3, 0.2, 0.1, 0.07])
    base = fit_power_law(records(eps, eps**slope * (1 + 0.1 * np.sin(7 * eps))))
    scaled = fit_power_law(records(eps, scale * eps**slope * (1 + 0.1 * np.sin(7 * eps))))
    assert scaled.slope == pytest.approx(base.slope, rel=1e-9, abs=1e-9)
    assert scaled.intercept == pytest.approx(base.intercept + math.log(scale), rel=1e-9, abs=1e-9)


def test_extension_exponent_examples():
    eps = np.array([0.4, 0.2, 0.1])
    a = fit_power_law(records(eps, eps**-2.0))
    b = fit_power_law(records(eps, eps**-4.0, tag="B"))
    assert extension_exponent(a, b) == pytest.approx(2.0)
    assert extension_exponent(a, a) == 0.0
    p = 1.5
    a15 = fit_power_law(records(eps, eps ** (-2 * (p - 1) / (3 - p)), p=p))
    b15 = fit_power_law(records(eps, eps ** (-2 * p * (p - 1) / (3 - p)), p=p, tag="B"))
    assert extension_exponent(a15, b15) == pytest.approx(1 / 3)
    with pytest.raises(ValueError):
        extension_exponent(a, a15)


def test_empty_sweep(profile):
    assert sweep(2.0, "A", [], profile) == []


def test_auto_t_end():
    assert auto_t_end(2.0, "A", 0.1, 3.0) == pytest.approx(300.0)
    assert auto_t_end(2.0, "B", 0.1, 3.0) == pytest.approx(3e4)


def test_class_b_outlives_class_a(profile):
    eps = [0.8, 0.4]
    a = sweep(2.0, "A", eps, profile)
    b = sweep(2.0, "B", eps, profile)
    ratios = [rb.t0 / ra.t0 for ra, rb in zip(a, b)]
    assert all(r > 1 for r in ratios)
    assert ratios[1] > ratios[0]


def test_blowup_monotone_in_eps(profile):
    recs = sweep(2.0, "A", [1.0, 0.7, 0.5, 0.35, 0.25], profile)
    t0 = [r.t0 for r in recs]  # ordered by descending eps
    assert all(not r.censored for r in recs)
    assert all(x <= y for x, y in zip(t0, t0[1:]))


def test_rescaling_cross_check(profile):
    # data scale linearly, so (eps, 2f) and (2 eps, f) are the same problem
    a = sweep(2.0, "B", [0.2], 2.0 * profile)[0]
    b = sweep(2.0, "B", [0.4], profile)[0]
    assert a.t0 == pytest.approx(b.t0, rel=1e-9)


def test_censoring_consistency(profile):
    eps = [0.8, 0.4, 0.2]
    short = sweep(2.0, "A", eps, profile, SweepConfig(t_end=100.0, dt=1.0))
    long = sweep(2.0, "A", eps, profile, SweepConfig(t_end=1000.0, dt=1.0))
    assert [r.censored for r in short] == [False, False, True]
    assert not any(r.censored for r in long)
    for s, l in zip(short, long):
        if not s.censored:
            assert s.t0 == pytest.approx(l.t0, rel=1e-3)


def test_failed_entry_is_censored(profile):
    cfg = SweepConfig(solver="mild", adaptive=False, dx=0.02, dt=0.03, t_end=1.0)
    recs = sweep(2.0, "A", [0.5], profile, cfg)
    assert recs[0].censored and recs[0].note.startswith("failed")


def test_fixed_grid_sweep(profile):
    cfg = SweepConfig(solver="dalembert", adaptive=False, dx=0.02, dt=0.02, t_end=30.0)
    rec = sweep(2.0, "A", [0.8], profile, cfg)[0]
    ref = sweep(2.0, "A", [0.8], profile)[0]
    assert not rec.censored
    assert rec.t0 == pytest.approx(ref.t0, rel=1e-2)


def test_approximation_curve_basics():
    f = grid_with_spacing(2.0, 0.02).sample(bump)
    c = approximation_error_curve(2.0, 0.2, f, n_samples=6)
    assert c.t1 == pytest.approx(5.0)
    assert c.error[0] == 0.0
    assert not c.truncated
    assert c.end_norm > 0


def test_approximation_curve_linear_switch():
    f = grid_with_spacing(2.0, 0.01).sample(bump)
    eps = 0.1
    c = approximation_error_curve(2.0, eps, f, n_samples=6, nonlinear=False)
    assert np.max(c.error) < 1e-3 * eps
