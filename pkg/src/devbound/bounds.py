"""Certified upper bounds on deviations from a weighted mean.

Point bounds cap ``max_k |x_k - mean|``; window bounds cap ``|x_{k,j} - mean|`` for
the weight-normalized mean of a contiguous block.  Every function returns a
:class:`BoundReport` carrying the numerator and denominator it was built from.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from .errors import BoundViolation, DegenerateWindow, DomainError, OrderError, RegimeError
from .functions import FunctionSpec, ModulusSpec, Flag
from .sample import (
    WeightedSample,
    Window,
    center,
    central_power_moment,
    complement_mass,
    moment_summary,
    scaled_power_sum,
    weighted_mean,
    window_mass,
    window_mean,
)
from .weights import admissible_split_indices, prefix_sums

RAW_MOMENT = "raw_moment"
POWER_JENSEN_GAP = "power_jensen_gap"
FUNCTION_GAP = "function_gap"
CHAINS = (RAW_MOMENT, POWER_JENSEN_GAP, FUNCTION_GAP)


@dataclass(frozen=True)
class BoundReport:
    kind: str
    bound: float
    numerator: float
    denominator: float
    regime: str
    r_or_p: float
    window: Optional[Window] = None
    window_mass: Optional[float] = None
    t_constant: Optional[float] = None
    alpha0: Optional[float] = None
    chain: Optional[str] = None
    # magnitude of the terms whose difference forms the numerator (cancellation scale)
    numerator_scale: Optional[float] = None
    extras: dict = field(default_factory=dict, compare=False)


def _regime_of(sample: WeightedSample) -> str:
    return "equal" if sample.has_equal_weights() else "simplex"


def _require_equal(sample: WeightedSample, what: str) -> None:
    if not sample.has_equal_weights():
        raise RegimeError(f"{what} requires equal weights 1/n")


def _require_positive_simplex(sample: WeightedSample, what: str) -> None:
    for i, t in enumerate(sample.weights, start=1):
        if not t > 0:
            raise RegimeError(f"{what} requires t_i > 0: row {i}")


def _clamp_gap(gap: float, scale: float, sample: WeightedSample, what: str) -> float:
    """Zero out round-off negatives; a clearly negative Jensen gap falsifies the hypotheses."""
    if gap >= 0:
        return gap
    tol = sample.tolerances
    if gap >= -(tol.eps_ineq_rel * scale + tol.eps_ineq_abs):
        return 0.0
    raise DomainError(f"{what} is negative ({gap!r}); the function is not convex enough on these data")


def _require_min_values(sample: WeightedSample, low: float, strict: bool, what: str) -> None:
    for i, x in enumerate(sample.values, start=1):
        if x < low or (strict and x == low):
            cmp = ">" if strict else ">="
            raise DomainError(f"{what} requires x_i {cmp} {low:g}: row {i} has {x!r}")


# -- point bounds ------------------------------------------------------------

def samuelson_bound(sample: WeightedSample) -> BoundReport:
    """``sqrt((n - 1)(b - a**2))`` for equal weights, ``a``, ``b`` the first two raw moments."""
    _require_equal(sample, "the Samuelson bound")
    ms = moment_summary(sample)
    spread = ms.square_moment - ms.mean**2
    spread = _clamp_gap(spread, ms.square_moment, sample, "b - a^2")
    n = sample.n
    return BoundReport(
        kind="samuelson",
        bound=math.sqrt((n - 1) * spread),
        numerator=spread,
        denominator=1.0 / (n - 1),
        regime="equal",
        r_or_p=2.0,
        numerator_scale=ms.square_moment,
    )


def t_constant(alpha0: float, p: float) -> float:
    """Constant ``T(alpha0, p)`` scaling the p-th root of a Jensen-type gap into a
    cap on the largest single deviation; ``alpha0`` is the smallest weight.

    Decreasing in ``alpha0``; equals ``sqrt(n - 1)`` for ``alpha0 = 1/n, p = 2``.
    """
    if not 0 < alpha0 < 1:
        raise DomainError(f"alpha0 must lie in (0, 1), got {alpha0!r}")
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p!r}")
    rest = 1.0 - alpha0
    inner = alpha0 ** (p - 1) + rest ** (p - 1)
    return rest ** (1 - 1 / p) / (alpha0 ** (1 / p) * inner ** (1 / p))


def weighted_power_bound(sample: WeightedSample, p: float = 2.0) -> BoundReport:
    """``T (c - a**p)**(1/p)`` with ``c = sum t_i x_i**p`` for positive data and weights."""
    if not p >= 2:
        raise DomainError(f"p must be >= 2, got {p!r}")
    _require_positive_simplex(sample, "the weighted power bound")
    _require_min_values(sample, 0.0, True, "the weighted power bound")
    ms = moment_summary(sample, p=p)
    gap = _clamp_gap(ms.power_moment - ms.mean**p, ms.power_moment, sample, "c - a^p")
    alpha0 = min(sample.weights)
    tc = t_constant(alpha0, p)
    return BoundReport(
        kind="weighted_power",
        bound=tc * gap ** (1 / p),
        numerator=gap,
        denominator=tc ** (-p),
        regime=_regime_of(sample),
        r_or_p=float(p),
        t_constant=tc,
        alpha0=alpha0,
        numerator_scale=ms.power_moment,
    )


def uniform_convex_gap_bound(
    sample: WeightedSample, f: FunctionSpec, m: float, p: float
) -> tuple[BoundReport, BoundReport]:
    """Two caps on ``max_k |x_k - a|`` for ``f`` uniformly convex with modulus ``m d**p``.

    Returns ``(moment, gap)``: ``T (sum t_i |x_i - a|**p)**(1/p)`` and the weaker
    ``T m**(-1/p) (sum t_i f(x_i) - f(a))**(1/p)``.  Raises if the moment form
    exceeds the gap form, which means ``f`` does not have the declared modulus.
    """
    if not m > 0:
        raise DomainError(f"m must be > 0, got {m!r}")
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p!r}")
    _require_positive_simplex(sample, "the uniform convexity bound")
    f.require_domain(sample.values)
    ts, xs = sample.weights, sample.values
    a = weighted_mean(sample)
    alpha0 = min(ts)
    tc = t_constant(alpha0, p)
    moment = scaled_power_sum(ts, [abs(x - a) for x in xs], p)
    fvals = [float(f(x)) for x in xs]
    c = math.fsum(t * v for t, v in zip(ts, fvals))
    scale = math.fsum(t * abs(v) for t, v in zip(ts, fvals))
    gap = _clamp_gap(c - float(f(a)), scale, sample, "c - f(a)")
    regime = _regime_of(sample)
    moment_report = BoundReport(
        kind="uniform_convex_moment", bound=tc * moment ** (1 / p), numerator=moment,
        denominator=tc ** (-p), regime=regime, r_or_p=float(p), t_constant=tc, alpha0=alpha0,
    )
    gap_report = BoundReport(
        kind="uniform_convex_gap", bound=tc * m ** (-1 / p) * gap ** (1 / p), numerator=gap,
        denominator=m * tc ** (-p), regime=regime, r_or_p=float(p), t_constant=tc, alpha0=alpha0,
        numerator_scale=scale, extras={"m": m, "function": f.label},
    )
    tol = sample.tolerances
    # compared before taking roots: the gap carries cancellation error of order eps * scale
    if m * moment > gap + tol.eps_ineq_rel * scale + tol.eps_ineq_abs:
        raise DomainError(
            f"{f.label} does not have modulus {m:g}*d^{p:g} on these data: "
            f"moment bound {moment_report.bound!r} exceeds gap bound {gap_report.bound!r}"
        )
    return moment_report, gap_report


def modulus_gap_bound(sample: WeightedSample, f: FunctionSpec, phi: ModulusSpec) -> BoundReport:
    """Cap on ``max_k Phi(|x_k - a|)`` for equal weights and a convex, increasing,
    submultiplicative modulus with ``Phi(0) = 0``.

    ``bound = factor * (mean f(x) - f(a))`` with ``factor = Phi(n-1) n / (n - 1 + Phi(n-1))``.
    ``extras`` carries the intermediate cap ``factor * mean Phi(|x - a|)`` and, for an
    increasing modulus, ``inverted_bound = Phi^{-1}(bound)`` which caps ``max |x_k - a|``.
    """
    _require_equal(sample, "the modulus gap bound")
    f.require_domain(sample.values)
    n = sample.n
    xs = sample.values
    a = weighted_mean(sample)
    phi_n1 = float(phi(n - 1.0))
    factor = phi_n1 * n / (n - 1 + phi_n1)
    fvals = [float(f(x)) for x in xs]
    d = math.fsum(fvals) / n
    scale = math.fsum(abs(v) for v in fvals) / n
    gap = _clamp_gap(d - float(f(a)), scale, sample, "d - f(a)")
    deviations = [abs(x - a) for x in xs]
    mean_phi = math.fsum(float(phi(y)) for y in deviations) / n
    bound = factor * gap
    extras = {"factor": factor, "mid_bound": factor * mean_phi, "modulus": phi.label}
    if phi.flags.increasing is Flag.CHECKED_TRUE:
        span = max(xs) - min(xs)
        extras["inverted_bound"] = phi.inverse(bound, hint=span if span > 0 else 1.0)
    return BoundReport(
        kind="modulus_gap",
        bound=bound,
        numerator=gap,
        denominator=1.0 / factor,
        regime="equal",
        r_or_p=phi.p if phi.is_power else math.nan,
        numerator_scale=scale,
        extras=extras,
    )


# -- window bounds -----------------------------------------------------------

def window_denominator(mass: float, rest: float, r: float) -> float:
    """``S + S**(2r) * rest**(1 - 2r)`` where ``rest`` is the weight outside the block."""
    return mass + mass ** (2 * r) * rest ** (1 - 2 * r)


def _window_numerator(
    sample: WeightedSample, r: float, chain: str, f: Optional[FunctionSpec]
) -> tuple[float, float]:
    """Numerator and the magnitude of the terms it was cancelled from."""
    ts, xs = sample.weights, sample.values
    if chain == RAW_MOMENT:
        moment = central_power_moment(sample, 2 * r)
        return moment, moment
    if chain == POWER_JENSEN_GAP:
        _require_min_values(sample, 0.0, False, "the power Jensen gap numerator")
        powers = [x ** (2 * r) for x in xs]
        raw = math.fsum(t * v for t, v in zip(ts, powers))
        gap = raw - weighted_mean(sample) ** (2 * r)
        return _clamp_gap(gap, raw, sample, "sum t x^2r - mean^2r"), raw
    if chain == FUNCTION_GAP:
        if f is None:
            raise DomainError("the function_gap numerator needs a function")
        f.require_domain(xs)
        fvals = [float(f(x)) for x in xs]
        raw = math.fsum(t * v for t, v in zip(ts, fvals))
        gap = raw - float(f(weighted_mean(sample)))
        scale = math.fsum(t * abs(v) for t, v in zip(ts, fvals))
        return _clamp_gap(gap, scale, sample, "Jensen gap"), scale
    raise DomainError(f"unknown chain {chain!r}; expected one of {CHAINS}")


def window_bound(
    sample: WeightedSample,
    w: Window,
    r: float = 1.0,
    chain: str = RAW_MOMENT,
    f: Optional[FunctionSpec] = None,
) -> BoundReport:
    """Cap on ``|x_{k,j} - mean|`` for positive weights: ``(N / D)**(1/(2r))``.

    ``D = S + S**(2r) (1 - S)**(1 - 2r)`` with ``S`` the block mass.  ``N`` is the
    central ``2r``-moment for ``raw_moment``; the larger Jensen gaps of ``x**(2r)``
    (``power_jensen_gap``, nonnegative data) or of ``f`` (``function_gap``) give
    weaker but still valid caps.  The full window returns 0.
    """
    if not r >= 1:
        raise DomainError(f"r must be >= 1, got {r!r}")
    _require_positive_simplex(sample, "the window bound")
    mass = window_mass(sample, w)
    if mass <= sample.tolerances.eps_sum:
        raise DegenerateWindow(f"window {w} has weight mass {mass!r}")
    rest = complement_mass(sample, w)
    numerator, scale = _window_numerator(sample, r, chain, f)
    common = dict(
        kind="window", numerator=numerator, regime=_regime_of(sample), r_or_p=float(r),
        window=w, window_mass=mass, chain=chain, numerator_scale=scale,
    )
    if rest <= sample.tolerances.eps_sum:
        return BoundReport(bound=0.0, denominator=math.inf, **common)
    denom = window_denominator(mass, rest, r)
    return BoundReport(bound=(numerator / denom) ** (1 / (2 * r)), denominator=denom, **common)


def fixed_coefficient_window_offset(values, j: int, r: float) -> float:
    """Closed form ``(n (n-j)**(2r-1) g / (j**(2r) + j (n-j)**(2r-1)))**(1/(2r))``
    for equal weights, ``g`` the mean of ``|x_i - xbar|**(2r)``.

    Algebraically equal to ``window_bound`` on ``(1, j)`` with equal weights.
    """
    n = len(values)
    if not 1 <= j < n:
        raise DomainError(f"j must satisfy 1 <= j < n = {n}, got {j}")
    xbar = math.fsum(values) / n
    g = scaled_power_sum([1.0 / n] * n, [abs(x - xbar) for x in values], 2 * r)
    rest = (n - j) ** (2 * r - 1)
    return (n * rest * g / (j ** (2 * r) + j * rest)) ** (1 / (2 * r))


@dataclass(frozen=True)
class ProfileRow:
    j: int
    prefix_mean: float
    bound: float


def prefix_means_profile(sample: WeightedSample, r: float = 1.0) -> list[ProfileRow]:
    """Prefix means ``x_{1,j}`` and their upper caps ``xbar + window_bound(1, j)``
    for equal weights and nonincreasing data."""
    _require_equal(sample, "the prefix profile")
    tol = sample.tolerances
    xs = sample.values
    for i in range(1, len(xs)):
        if xs[i] > xs[i - 1] + tol.eps_ineq_abs:
            raise OrderError(f"values must be nonincreasing: row {i + 1} exceeds row {i}")
    xbar = weighted_mean(sample)
    rows = []
    for j in range(1, sample.n + 1):
        w = Window(1, j)
        rows.append(ProfileRow(j, window_mean(sample, w), xbar + window_bound(sample, w, r).bound))
    for prev, cur in zip(rows, rows[1:]):
        if cur.prefix_mean > prev.prefix_mean + tol.slack_allowance(prev.prefix_mean):
            raise BoundViolation(f"prefix mean increased at j={cur.j}: {prev.prefix_mean!r} -> {cur.prefix_mean!r}")
    return rows


def js_prefix_bound(sample: WeightedSample, k: int, r: float = 1.0) -> BoundReport:
    """Cap on ``|sum_{i<=k} t_i y_i / P_k|`` for Jensen-Steffensen weights and
    nondecreasing data: ``(N / (P_k + P_k**(2r) (1 - P_k)**(1 - 2r)))**(1/(2r))``.

    ``k`` must be an admissible split of the weights.
    """
    if not r >= 1:
        raise DomainError(f"r must be >= 1, got {r!r}")
    n = sample.n
    if not 1 <= k < n:
        raise DomainError(f"k must satisfy 1 <= k < n = {n}, got {k}")
    tol = sample.tolerances
    split = admissible_split_indices(sample.weights, tol.eps_sum)[k - 1]
    if not split.holds:
        raise RegimeError(f"k={k} is not an admissible split: {split.failed_condition} fails")
    centered = center(sample)
    ys = centered.values
    for i in range(1, n):
        if ys[i] < ys[i - 1] - tol.eps_ineq_abs:
            raise OrderError(f"data must be nondecreasing: row {i + 1} is below row {i}")
    pk = prefix_sums(sample.weights)[k - 1]
    if pk <= tol.eps_sum:
        raise DegenerateWindow(f"prefix mass P_{k} = {pk!r}")
    rest = math.fsum(sample.weights[k:])
    numerator = scaled_power_sum(sample.weights, [abs(y) for y in ys], 2 * r)
    scale = scaled_power_sum([abs(t) for t in sample.weights], [abs(y) for y in ys], 2 * r)
    numerator = _clamp_gap(numerator, scale, sample, "signed-weight central moment")
    denom = window_denominator(pk, rest, r)
    return BoundReport(
        kind="js_prefix",
        bound=(numerator / denom) ** (1 / (2 * r)),
        numerator=numerator,
        denominator=denom,
        regime="steffensen",
        r_or_p=float(r),
        window=Window(1, k),
        window_mass=pk,
        chain=RAW_MOMENT,
        numerator_scale=scale,
    )


def js_prefix_deviation(sample: WeightedSample, k: int) -> float:
    """Left side ``|sum_{i<=k} t_i y_i / P_k|`` paired with :func:`js_prefix_bound`."""
    centered = center(sample)
    ts, ys = sample.weights, centered.values
    pk = prefix_sums(ts)[k - 1]
    return abs(math.fsum(t * y for t, y in zip(ts[:k], ys[:k])) / pk)
