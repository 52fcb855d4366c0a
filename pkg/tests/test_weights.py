import numpy as np
import pytest

from devbound.weights import (
    NEXT_POSITIVE,
    PREFIX_DOMINATED,
    PREFIX_NONNEG,
    TAIL_IN_RANGE,
    admissible_ks,
    admissible_split_indices,
    prefix_sums,
    regime_label,
    tail_sums,
    validate_positive_simplex,
    validate_steffensen,
)

SIGNED = (0.5, -0.5, 0.5, 0.25, -0.25, 0.5)


def test_signed_example_prefix_sums_and_split():
    assert prefix_sums(SIGNED) == pytest.approx([0.5, 0.0, 0.5, 0.75, 0.5, 1.0])
    assert tail_sums(SIGNED) == pytest.approx([1.0, 0.5, 1.0, 0.5, 0.25, 0.5])
    report = validate_steffensen(SIGNED)
    assert report.is_steffensen and not report.is_positive_simplex
    assert report.violations == ()
    assert admissible_ks(SIGNED) == [3]


def test_split_failures_name_the_condition():
    verdicts = {s.k: s for s in admissible_split_indices(SIGNED)}
    assert verdicts[1].failed_condition == NEXT_POSITIVE
    assert verdicts[2].failed_condition == PREFIX_DOMINATED  # P_1 = 0.5 > P_2 = 0
    assert verdicts[3].holds and verdicts[3].failed_condition is None
    assert verdicts[4].failed_condition == NEXT_POSITIVE
    assert verdicts[5].failed_condition == PREFIX_DOMINATED
    # tail partial sums leave [0, tail total] although the prefix conditions hold
    tail = {s.k: s for s in admissible_split_indices((0.25, 0.25, -0.375, 0.875))}
    assert tail[1].failed_condition == TAIL_IN_RANGE
    out_of_range = admissible_split_indices((1.5, -1.0, 0.5))
    assert all(s.failed_condition == PREFIX_NONNEG for s in out_of_range)


def test_simplex_violations_are_listed():
    report = validate_positive_simplex((0.5, 0.0, 0.5))
    assert not report.is_positive_simplex
    assert [v.index for v in report.violations] == [2]
    assert report.is_steffensen


def test_steffensen_violation():
    report = validate_steffensen((1.5, -1.0, 0.5))
    assert not report.is_steffensen
    assert any(v.condition == "prefix_below_total" for v in report.violations)
    assert validate_steffensen((-0.5, 1.5)).violations[0].condition == "prefix_nonneg"


def test_regime_labels():
    assert regime_label((0.25,) * 4) == "equal"
    assert regime_label((0.2, 0.3, 0.5)) == "simplex"
    assert regime_label(SIGNED) == "steffensen"
    assert regime_label((1.5, -1.0, 0.5)) == "unsupported"


def test_split_requires_unit_sum():
    with pytest.raises(ValueError):
        admissible_split_indices((0.6, 0.6))


def test_simplex_implies_steffensen():
    rng = np.random.default_rng(11)
    for _ in range(10_000):
        n = int(rng.integers(2, 20))
        w = rng.dirichlet(np.ones(n))
        w = w / w.sum()
        report = validate_steffensen(list(w))
        assert report.is_steffensen
        assert validate_positive_simplex(list(w)).is_positive_simplex


def test_prefix_sums_are_compensated():
    w = [0.1] * 10
    assert prefix_sums(w)[-1] == 1.0
    assert tail_sums(w)[0] == 1.0
