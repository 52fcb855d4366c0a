"""Acceptance criteria, one test per criterion.

Each test carries ``@pytest.mark.acceptance(n, label)``; ``conftest.py`` prints a
PASS/FAIL line per criterion at the end of the run.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from devbound import bounds, cli
from devbound.functions import (
    ModulusSpec,
    Verdict,
    check_superquadratic,
    check_uniform_convexity,
    make_power_function,
    make_square_on_line,
)
from devbound.oracle import exact_max_deviation, exact_window_deviation, steffensen_weights
from devbound.sample import WeightedSample, Window
from devbound.weights import admissible_ks, validate_steffensen

REL = 1e-12


def allowed(rhs):
    return 1e-9 * abs(rhs) + 1e-12


def close(a, b, rel=REL):
    return abs(a - b) <= rel * max(abs(a), abs(b))


def simplex_weights(rng, n):
    raw = rng.dirichlet(np.ones(n))
    return tuple(raw / math.fsum(raw))


def exact_prefix_deviation(values, weights, k):
    ts = [Fraction(t) for t in weights]
    xs = [Fraction(x) for x in values]
    mean = sum(t * x for t, x in zip(ts, xs))
    pk = sum(ts[:k])
    return float(abs(sum(t * (x - mean) for t, x in zip(ts[:k], xs[:k])) / pk))


# -- 1 -----------------------------------------------------------------------

@pytest.mark.acceptance(1, "signed-weight example: validators, k = {3}, lhs 5.5, rhs sqrt(39.375)")
def test_signed_weight_example():
    t = (0.5, -0.5, 0.5, 0.25, -0.25, 0.5)
    y = (-6.5, 2.0, 3.0, 4.0, 5.0, 6.0)
    ft = [Fraction(v) for v in t]
    fy = [Fraction(v) for v in y]
    assert sum(ft) == 1
    assert sum(a * b for a, b in zip(ft, fy)) == 0
    assert validate_steffensen(t).is_steffensen
    assert admissible_ks(t) == [3]

    sample = WeightedSample(y, t)
    rep = bounds.js_prefix_bound(sample, 3, r=1)
    lhs = bounds.js_prefix_deviation(sample, 3)
    # independent rational oracle: N = sum t y^2, D = P_3 + P_3^2 / (1 - P_3)
    n_exact = sum(a * b * b for a, b in zip(ft, fy))
    p3 = sum(ft[:3])
    d_exact = p3 + p3 * p3 / (1 - p3)
    assert n_exact == Fraction(315, 8) and d_exact == 1
    assert close(lhs, 5.5)
    assert close(rep.bound, math.sqrt(39.375))
    assert close(rep.bound, math.sqrt(float(n_exact / d_exact)))
    assert lhs <= rep.bound


# -- 2 -----------------------------------------------------------------------

@pytest.mark.acceptance(2, "equality case (0,0,3): equal-weight bound = exact max deviation = 2")
def test_equal_weight_equality_case():
    sample = WeightedSample.equal([0.0, 0.0, 3.0])
    value, index = exact_max_deviation(sample)
    assert (value, index) == (2.0, 3)
    assert close(bounds.samuelson_bound(sample).bound, 2.0)
    assert close(bounds.samuelson_bound(sample).bound, value)


# -- 3 -----------------------------------------------------------------------

@pytest.mark.acceptance(3, "weighted power bound at p=2 with equal weights collapses to the n-1 bound")
def test_collapse_identity():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 13))
        sample = WeightedSample.equal(list(rng.uniform(0.1, 10.0, n)))
        a = bounds.weighted_power_bound(sample, 2.0).bound
        b = bounds.samuelson_bound(sample).bound
        worst = max(worst, abs(a - b) / max(abs(a), abs(b)))
    assert worst <= REL


# -- 4 -----------------------------------------------------------------------

@pytest.mark.acceptance(4, "fixed-coefficient closed form equals the window bound on (1, j)")
def test_closed_form_matches_window_bound():
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(3, 11))
        values = sorted(rng.uniform(-10.0, 10.0, n), reverse=True)
        sample = WeightedSample.equal(values)
        for r in (1, 2, 3):
            for j in range(1, n):
                via_window = bounds.window_bound(sample, Window(1, j), r).bound
                closed = bounds.fixed_coefficient_window_offset(values, j, r)
                worst = max(worst, abs(via_window - closed) / max(via_window, closed))
    assert worst <= REL


# -- 5 -----------------------------------------------------------------------

@pytest.mark.acceptance(5, "window bound soundness: 10,000 positive-simplex cases, zero violations")
def test_window_soundness_sweep():
    rng = np.random.default_rng(5)
    violations = []
    for case in range(10_000):
        n = int(rng.integers(2, 13))
        kind = case % 3
        if kind == 0:
            values = rng.uniform(-10.0, 10.0, n)
        elif kind == 1:
            values = rng.pareto(1.5, n)
        else:
            values = rng.choice(rng.uniform(0.0, 10.0, 2), n) + rng.normal(0.0, 0.01, n)
        sample = WeightedSample(tuple(values), simplex_weights(rng, n))
        k = int(rng.integers(1, n + 1))
        w = Window(k, int(rng.integers(k, n + 1)))
        r = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
        rhs = bounds.window_bound(sample, w, r).bound
        lhs = exact_window_deviation(sample, w)
        if rhs - lhs < -allowed(rhs):
            violations.append((case, w, r, lhs, rhs))
    assert violations == []


# -- 6 -----------------------------------------------------------------------

@pytest.mark.acceptance(6, "signed-weight prefix bound soundness: 10,000 cases, zero violations")
def test_signed_prefix_soundness_sweep():
    rng = np.random.default_rng(6)
    violations = []
    cases = 0
    while cases < 10_000:
        n = int(rng.integers(2, 13))
        weights = steffensen_weights(rng, n)
        assert validate_steffensen(weights).is_steffensen
        ks = admissible_ks(weights)
        if not ks:
            continue
        values = tuple(sorted(rng.uniform(-10.0, 10.0, n)))
        sample = WeightedSample(values, tuple(weights))
        for k in ks:
            for r in (1.0, 2.0):
                rhs = bounds.js_prefix_bound(sample, k, r).bound
                lhs = exact_prefix_deviation(values, weights, k)
                if rhs - lhs < -allowed(rhs):
                    violations.append((values, weights, k, r, lhs, rhs))
                cases += 1
    assert violations == []


# -- 7 -----------------------------------------------------------------------

@pytest.mark.acceptance(7, "numerator chain ordering raw <= power gap <= function gap on 10,000 cases")
def test_chain_ordering():
    rng = np.random.default_rng(7)
    bad = []
    for case in range(10_000):
        n = int(rng.integers(2, 13))
        values = rng.uniform(0.0, 10.0, n) if case % 2 else rng.pareto(1.5, n)
        sample = WeightedSample(tuple(values), simplex_weights(rng, n))
        k = int(rng.integers(1, n + 1))
        w = Window(k, int(rng.integers(k, n + 1)))
        r = float(rng.choice([1.0, 1.5, 2.0, 3.0]))
        raw = bounds.window_bound(sample, w, r, bounds.RAW_MOMENT).bound
        power = bounds.window_bound(sample, w, r, bounds.POWER_JENSEN_GAP).bound
        func = bounds.window_bound(sample, w, r, bounds.FUNCTION_GAP, make_power_function(2 * r)).bound
        if raw > power + allowed(power) or raw > func + allowed(func):
            bad.append((case, raw, power, func))
    assert bad == []


# -- 8 -----------------------------------------------------------------------

@pytest.mark.acceptance(8, "modulus gap fixture: factor 2, bound 4 = exact max, inverted bound 2")
def test_modulus_fixture():
    sample = WeightedSample.equal([0.0, 0.0, 3.0])
    rep = bounds.modulus_gap_bound(sample, make_power_function(2.0), ModulusSpec.power(1.0, 2.0))
    exact = max(float((Fraction(x) - 1) ** 2) for x in sample.values)
    assert close(rep.extras["factor"], 2.0)
    assert close(rep.bound, 4.0)
    assert close(rep.bound, exact)
    assert close(rep.extras["inverted_bound"], 2.0)


# -- 9 -----------------------------------------------------------------------

@pytest.mark.acceptance(9, "class checkers: powers >= 2 pass, x and x^1.5 fail, d^2 modulus exact, 2d^2 fails")
def test_class_checkers():
    for p in (2.0, 3.0, 4.0):
        assert check_superquadratic(make_power_function(p)).verdict is Verdict.NO_VIOLATION_FOUND
    for p in (1.0, 1.5):
        cert = check_superquadratic(make_power_function(p))
        assert cert.verdict is Verdict.VIOLATED
        assert all(math.isfinite(v) for v in cert.witness.points)
    ok = check_uniform_convexity(make_square_on_line(), ModulusSpec.power(1.0, 2.0))
    assert ok.verdict is Verdict.NO_VIOLATION_FOUND
    assert ok.max_abs_slack <= 1e-12
    bad = check_uniform_convexity(make_square_on_line(), ModulusSpec.power(2.0, 2.0))
    assert bad.verdict is Verdict.VIOLATED


# -- 10 ----------------------------------------------------------------------

@pytest.mark.acceptance(10, "prefix means of nonincreasing equal-weight data are nonincreasing")
def test_monotone_profile():
    rng = np.random.default_rng(10)
    worst = -math.inf
    for _ in range(1000):
        n = int(rng.integers(2, 13))
        values = sorted(rng.uniform(-10.0, 10.0, n), reverse=True)
        rows = bounds.prefix_means_profile(WeightedSample.equal(values))
        for prev, cur in zip(rows, rows[1:]):
            worst = max(worst, cur.prefix_mean - prev.prefix_mean)
    assert worst <= 1e-12


# -- 11 ----------------------------------------------------------------------

@pytest.mark.acceptance(11, "verify and fuzz reports are byte-identical across runs")
def test_determinism(tmp_path):
    data = tmp_path / "data.csv"
    data.write_text("value,weight\n-6.5,0.5\n2,-0.5\n3,0.5\n4,0.25\n5,-0.25\n6,0.5\n")
    outputs = []
    for run in range(2):
        v = tmp_path / f"verify{run}.json"
        f = tmp_path / f"fuzz{run}.json"
        assert cli.main(["verify", "--input", str(data), "--output", str(v)]) == 0
        assert cli.main(["fuzz", "--seed", "7", "--trials", "25", "--output", str(f)]) == 0
        outputs.append((v.read_bytes(), f.read_bytes()))
    assert outputs[0] == outputs[1]
