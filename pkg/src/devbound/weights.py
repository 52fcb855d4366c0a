"""Weight-regime validation: positive simplex, Jensen-Steffensen prefix conditions,
and the split indices for which the signed-weight prefix bound applies.

Validators never reorder weights; every condition is checked against the given order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

DEFAULT_WEIGHT_TOL = 1e-9

PREFIX_NONNEG = "prefix_nonneg"
PREFIX_DOMINATED = "prefix_dominated_by_Pk"
NEXT_POSITIVE = "t_kplus1_positive"
TAIL_IN_RANGE = "tail_partial_in_range"


@dataclass(frozen=True)
class Violation:
    condition: str
    index: int  # 1-based
    slack: float  # negative when violated


@dataclass(frozen=True)
class RegimeReport:
    prefix_sums: tuple[float, ...]
    tail_sums: tuple[float, ...]
    is_positive_simplex: bool
    is_steffensen: bool
    violations: tuple[Violation, ...] = ()


@dataclass(frozen=True)
class SplitAdmissibility:
    k: int
    holds: bool
    failed_condition: Optional[str] = None
    detail: tuple[Violation, ...] = field(default=(), compare=False)


def _running_sums(weights: Sequence[float]) -> list[float]:
    # Neumaier-compensated running sum, so P_j agrees with fsum(weights[:j]) to ~1 ulp.
    out: list[float] = []
    total = 0.0
    comp = 0.0
    for t in weights:
        s = total + t
        if abs(total) >= abs(t):
            comp += (total - s) + t
        else:
            comp += (t - s) + total
        total = s
        out.append(total + comp)
    return out


def prefix_sums(weights: Sequence[float]) -> list[float]:
    """``P_1..P_n`` with ``P_j = t_1 + ... + t_j``."""
    return _running_sums(weights)


def tail_sums(weights: Sequence[float]) -> list[float]:
    """``Pbar_1..Pbar_n`` with ``Pbar_j = t_j + ... + t_n``."""
    return _running_sums(weights[::-1])[::-1]


def _simplex_violations(weights: Sequence[float], total: float, tol: float) -> list[Violation]:
    found = [Violation("positive", i, t) for i, t in enumerate(weights, start=1) if not t > 0]
    if abs(total - 1.0) > tol:
        found.append(Violation("sum_to_one", len(weights), -abs(total - 1.0)))
    return found


def _steffensen_violations(prefix: Sequence[float], tol: float) -> list[Violation]:
    total = prefix[-1]
    found: list[Violation] = []
    if not total > 0:
        found.append(Violation("total_positive", len(prefix), total))
    for j, p in enumerate(prefix, start=1):
        if p < -tol:
            found.append(Violation("prefix_nonneg", j, p))
        if p > total + tol:
            found.append(Violation("prefix_below_total", j, total - p))
    return found


def _report(weights: Sequence[float], tol: float, keep: str) -> RegimeReport:
    w = [float(t) for t in weights]
    if len(w) < 2:
        raise ValueError("weight vectors need at least two entries")
    prefix = prefix_sums(w)
    tail = tail_sums(w)
    total = math.fsum(w)
    simplex = _simplex_violations(w, total, tol)
    steff = _steffensen_violations(prefix, tol)
    return RegimeReport(
        prefix_sums=tuple(prefix),
        tail_sums=tuple(tail),
        is_positive_simplex=not simplex,
        is_steffensen=not steff,
        violations=tuple(simplex if keep == "simplex" else steff),
    )


def validate_positive_simplex(weights: Sequence[float], tol: float = DEFAULT_WEIGHT_TOL) -> RegimeReport:
    """Every ``t_i > 0`` and ``sum t_i = 1`` within ``tol``; violations list each failing index."""
    return _report(weights, tol, "simplex")


def validate_steffensen(weights: Sequence[float], tol: float = DEFAULT_WEIGHT_TOL) -> RegimeReport:
    """``0 <= P_j <= P_n`` for all ``j`` and ``P_n > 0`` (prefix bounds within ``tol``)."""
    return _report(weights, tol, "steffensen")


def _check_split(weights: Sequence[float], prefix: Sequence[float], k: int, tol: float) -> SplitAdmissibility:
    bad = [Violation(PREFIX_NONNEG, j, min(p, 1.0 - p)) for j, p in enumerate(prefix, start=1)
           if p < -tol or p > 1.0 + tol]
    if bad:
        return SplitAdmissibility(k, False, PREFIX_NONNEG, tuple(bad))

    pk = prefix[k - 1]
    bad = [Violation(PREFIX_DOMINATED, j, pk - prefix[j - 1]) for j in range(1, k + 1)
           if prefix[j - 1] > pk + tol]
    if bad:
        return SplitAdmissibility(k, False, PREFIX_DOMINATED, tuple(bad))

    # strict: a zero weight at k+1 breaks the tail normalization
    if not weights[k] > 0:
        return SplitAdmissibility(k, False, NEXT_POSITIVE, (Violation(NEXT_POSITIVE, k + 1, weights[k]),))

    tail_total = math.fsum(weights[k:])
    partial = _running_sums(weights[k:])
    bad = []
    for offset, s in enumerate(partial):
        if s < -tol or s > tail_total + tol:
            bad.append(Violation(TAIL_IN_RANGE, k + 1 + offset, min(s, tail_total - s)))
    if bad:
        return SplitAdmissibility(k, False, TAIL_IN_RANGE, tuple(bad))
    return SplitAdmissibility(k, True)


def admissible_split_indices(weights: Sequence[float], tol: float = DEFAULT_WEIGHT_TOL) -> list[SplitAdmissibility]:
    """Verdict for every split ``k = 1..n-1`` of the signed-weight prefix bound.

    Conditions are tested in a fixed order and the first failing family is reported:
    all prefix sums in ``[0, 1]``; ``P_j <= P_k`` for ``j <= k``; ``t_{k+1} > 0``;
    every partial tail sum ``t_{k+1} + ... + t_l`` within ``[0, t_{k+1} + ... + t_n]``.
    """
    w = [float(t) for t in weights]
    total = math.fsum(w)
    if abs(total - 1.0) > tol:
        raise ValueError(f"weights sum to {total!r}, expected 1 within {tol:g}")
    prefix = prefix_sums(w)
    return [_check_split(w, prefix, k, tol) for k in range(1, len(w))]


def admissible_ks(weights: Sequence[float], tol: float = DEFAULT_WEIGHT_TOL) -> list[int]:
    return [s.k for s in admissible_split_indices(weights, tol) if s.holds]


def regime_label(weights: Sequence[float], tol: float = DEFAULT_WEIGHT_TOL) -> str:
    """``equal``, ``simplex``, ``steffensen`` or ``unsupported``."""
    n = len(weights)
    if all(abs(t - 1.0 / n) <= tol for t in weights):
        return "equal"
    report = validate_positive_simplex(weights, tol)
    if report.is_positive_simplex:
        return "simplex"
    if report.is_steffensen:
        return "steffensen"
    return "unsupported"
