import math

import numpy as np
import pytest

from devbound import bounds
from devbound.errors import ConfigError
from devbound.oracle import (
    TIGHTNESS_CHECKS,
    FuzzConfig,
    applicable_checks,
    draw_sample,
    evaluate_check,
    exact_max_deviation,
    exact_window_deviation,
    fuzz_tightness,
    steffensen_weights,
    verify_dataset,
    witness_record,
)
from devbound.sample import WeightedSample, Window
from devbound.weights import validate_steffensen

SIGNED = WeightedSample((-6.5, 2.0, 3.0, 4.0, 5.0, 6.0), (0.5, -0.5, 0.5, 0.25, -0.25, 0.5))


def test_exact_max_deviation():
    assert exact_max_deviation(WeightedSample.equal([0.0, 0.0, 3.0])) == (2.0, 3)
    assert exact_max_deviation(WeightedSample.equal([4.0, 4.0])) == (0.0, 1)
    assert exact_max_deviation(WeightedSample.equal([1.0, 2.0, 3.0])) == (1.0, 1)


def test_exact_window_deviation_is_exact():
    # mean 0.1 * 3 = 0.3 is inexact in binary; the exact answer is |0.1 - mean| computed rationally
    s = WeightedSample.equal([0.1, 0.1, 0.1])
    assert exact_window_deviation(s, Window(1, 1)) == 0.0
    s = WeightedSample((4.0, 2.0, 2.0, 0.0), (0.25,) * 4)
    assert exact_window_deviation(s, Window(2, 3)) == 0.0
    assert exact_window_deviation(s, Window(1, 1)) == 2.0


def test_signed_example_verifies():
    report = verify_dataset(SIGNED, (1.0,))
    assert report.regime == "steffensen"
    assert report.all_pass
    row = next(c for c in report.checks if c.inequality == "js_prefix")
    assert row.location == "k=3"
    assert row.lhs == 5.5
    assert row.rhs == pytest.approx(6.27495, abs=1e-5)


def test_constant_sample_verifies():
    report = verify_dataset(WeightedSample.equal([2.0] * 5))
    assert report.all_pass
    deviations = [c for c in report.checks if c.inequality in TIGHTNESS_CHECKS]
    assert deviations and all(c.lhs == 0.0 and c.rhs >= 0.0 for c in deviations)
    assert all(c.slack >= 0.0 for c in report.checks)


def test_random_simplex_sample_verifies():
    rng = np.random.default_rng(5)
    w = rng.dirichlet(np.ones(8))
    report = verify_dataset(WeightedSample(tuple(rng.uniform(0, 10, 8)), tuple(w / w.sum())), (1.0, 2.0))
    assert report.all_pass
    assert report.worst_slack > -1e-12
    assert {c.inequality for c in report.checks} >= {"weighted_power", "window", "uniform_convex_moment"}


def test_applicable_checks_follow_regime():
    equal = {c[0] for c in applicable_checks(WeightedSample.equal([3.0, 2.0, 1.0]), (1.0,))}
    assert {"samuelson", "modulus_gap_inverted", "prefix_profile"} <= equal
    signed = {c[0] for c in applicable_checks(SIGNED, (1.0,))}
    assert "js_prefix" in signed and "window" not in signed and "samuelson" not in signed


def test_failed_row_and_witness_record():
    row = evaluate_check(SIGNED, "js_prefix", "k=3", 1.0)
    assert row.passed
    record = witness_record(SIGNED, row)
    assert record["k"] == 3 and record["window"] is None
    assert record["values"] == list(SIGNED.values)


def test_steffensen_generator_self_check():
    rng = np.random.default_rng(0)
    for _ in range(2000):
        n = int(rng.integers(2, 15))
        w = steffensen_weights(rng, n)
        assert validate_steffensen(w).is_steffensen
        assert math.fsum(w) == pytest.approx(1.0, abs=1e-12)


def test_draw_sample_is_seeded():
    cfg = FuzzConfig(master_seed=3, regime="steffensen")
    assert draw_sample(cfg, 4) == draw_sample(cfg, 4)
    assert draw_sample(cfg, 4) != draw_sample(cfg, 5)
    assert list(draw_sample(cfg, 4).values) == sorted(draw_sample(cfg, 4).values)


@pytest.mark.parametrize("bad", [
    dict(trials=0), dict(n_range=(1, 5)), dict(n_range=(2, 65)), dict(r_set=(0.5,)),
    dict(regime="signed"), dict(value_distribution="normal"), dict(workers=0),
])
def test_fuzz_config_validation(bad):
    with pytest.raises(ConfigError):
        fuzz_tightness(FuzzConfig(**bad))


def test_fuzz_reaches_equality_family():
    report = fuzz_tightness(FuzzConfig(master_seed=7, trials=40, n_range=(2, 3), r_set=(1.0,)))
    assert report.violations == ()
    assert report.best_tightness >= 0.999
    assert report.best_tightness <= 1 + 1e-9


@pytest.mark.parametrize("regime", ["simplex", "equal", "steffensen"])
@pytest.mark.parametrize("dist", ["uniform", "heavy_tail", "clustered"])
def test_fuzz_finds_no_violations(regime, dist):
    report = fuzz_tightness(FuzzConfig(master_seed=1, trials=8, regime=regime, value_distribution=dist))
    assert report.violations == ()
    assert 0 <= report.best_tightness <= 1 + 1e-9
    assert report.trials_run == 8


def test_fuzz_is_schedule_independent():
    cfg = FuzzConfig(master_seed=11, trials=12, n_range=(2, 6))
    serial = fuzz_tightness(cfg)
    parallel = fuzz_tightness(FuzzConfig(master_seed=11, trials=12, n_range=(2, 6), workers=2))
    assert serial == parallel


def test_chain_rows_never_undercut_raw_moment():
    s = WeightedSample((0.5, 1.0, 7.0, 2.0), (0.1, 0.2, 0.3, 0.4))
    for r in (1.0, 2.0):
        raw = bounds.window_bound(s, Window(2, 3), r).bound
        gap = bounds.window_bound(s, Window(2, 3), r, bounds.POWER_JENSEN_GAP).bound
        assert raw <= gap * (1 + 1e-12)
