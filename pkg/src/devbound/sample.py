"""Weighted samples, centering and the moment / window statistics every bound uses.

All sums run in index order through :func:`math.fsum`, so a given input always
produces bit-identical results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

from .errors import DegenerateWindow, DomainError


@dataclass(frozen=True)
class Tolerances:
    eps_sum: float = 1e-9
    eps_ineq_rel: float = 1e-9
    eps_ineq_abs: float = 1e-12

    def __post_init__(self) -> None:
        for name in ("eps_sum", "eps_ineq_rel", "eps_ineq_abs"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")

    def slack_allowance(self, rhs: float) -> float:
        """How far ``lhs`` may exceed ``rhs`` before an inequality counts as violated."""
        return self.eps_ineq_rel * abs(rhs) + self.eps_ineq_abs


DEFAULT_TOLERANCES = Tolerances()


@dataclass(frozen=True)
class Window:
    """Contiguous 1-based inclusive index block ``k..j``."""

    k: int
    j: int

    def validate(self, n: int) -> None:
        if not (1 <= self.k <= self.j <= n):
            raise DomainError(f"window ({self.k},{self.j}) is not within 1 <= k <= j <= {n}")

    def indices(self) -> range:
        """Zero-based slice indices covered by the window."""
        return range(self.k - 1, self.j)

    def __str__(self) -> str:
        return f"{self.k}:{self.j}"

    @classmethod
    def parse(cls, text: str) -> "Window":
        try:
            k, j = (int(part) for part in text.split(":"))
        except ValueError:
            raise DomainError(f"window must look like 'k:j', got {text!r}") from None
        return cls(k, j)


@dataclass(frozen=True)
class WeightedSample:
    """Ordered values ``x_1..x_n`` with real weights summing to one.

    Weights may be signed; sign requirements belong to the individual bounds.
    """

    values: tuple[float, ...]
    weights: tuple[float, ...]
    tolerances: Tolerances = field(default=DEFAULT_TOLERANCES, compare=False)

    def __post_init__(self) -> None:
        values = tuple(float(v) for v in self.values)
        weights = tuple(float(t) for t in self.weights)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        if len(values) != len(weights):
            raise DomainError(f"{len(values)} values but {len(weights)} weights")
        if len(values) < 2:
            raise DomainError(f"a sample needs n >= 2 points, got {len(values)}")
        for i, (x, t) in enumerate(zip(values, weights), start=1):
            if not math.isfinite(x):
                raise DomainError(f"value at row {i} is not finite: {x!r}")
            if not math.isfinite(t):
                raise DomainError(f"weight at row {i} is not finite: {t!r}")
        total = math.fsum(weights)
        if abs(total - 1.0) > self.tolerances.eps_sum:
            raise DomainError(f"weights sum to {total!r}, expected 1 within {self.tolerances.eps_sum:g}")

    @classmethod
    def equal(cls, values: Sequence[float], tolerances: Tolerances = DEFAULT_TOLERANCES) -> "WeightedSample":
        n = len(values)
        if n < 2:
            raise DomainError(f"a sample needs n >= 2 points, got {n}")
        return cls(tuple(values), (1.0 / n,) * n, tolerances)

    @property
    def n(self) -> int:
        return len(self.values)

    def with_values(self, values: Sequence[float]) -> "WeightedSample":
        return WeightedSample(tuple(values), self.weights, self.tolerances)

    def has_equal_weights(self) -> bool:
        target = 1.0 / self.n
        return all(abs(t - target) <= self.tolerances.eps_sum for t in self.weights)

    def is_positive(self) -> bool:
        return all(t > 0 for t in self.weights)


@dataclass(frozen=True)
class CenteredSample:
    """A sample shifted so that its weighted mean is zero; ``sample.values`` hold ``y_i``."""

    sample: WeightedSample
    origin_mean: float

    @property
    def values(self) -> tuple[float, ...]:
        return self.sample.values

    @property
    def weights(self) -> tuple[float, ...]:
        return self.sample.weights


@dataclass(frozen=True)
class MomentSummary:
    mean: float
    square_moment: float
    power_moment: float
    p: float
    central_moment: float
    two_r: float
    function_mean: Optional[float] = None
    function_label: Optional[str] = None


def weighted_mean(sample: WeightedSample) -> float:
    return math.fsum(t * x for t, x in zip(sample.weights, sample.values))


def center(sample: WeightedSample) -> CenteredSample:
    mean = weighted_mean(sample)
    shifted = WeightedSample(tuple(x - mean for x in sample.values), sample.weights, sample.tolerances)
    return CenteredSample(shifted, mean)


def _check_two_r(two_r: float) -> None:
    if not two_r >= 2.0:
        raise DomainError(f"the central moment order 2r must satisfy r >= 1, got 2r = {two_r!r}")


def scaled_power_sum(weights: Sequence[float], magnitudes: Sequence[float], exponent: float) -> float:
    """``sum t_i * m_i**exponent`` for nonnegative magnitudes, rescaled by ``max m_i``.

    The rescaling keeps intermediate powers inside double range for large exponents.
    """
    top = max(magnitudes)
    if top == 0.0:
        return 0.0
    inner = math.fsum(t * (m / top) ** exponent for t, m in zip(weights, magnitudes))
    return top**exponent * inner


def central_power_moment(sample: WeightedSample, two_r: float) -> float:
    """``sum t_i |x_i - mean|**two_r``."""
    _check_two_r(two_r)
    centered = center(sample)
    return scaled_power_sum(sample.weights, [abs(y) for y in centered.values], two_r)


def window_mass(sample: WeightedSample, w: Window) -> float:
    w.validate(sample.n)
    return math.fsum(sample.weights[i] for i in w.indices())


def complement_mass(sample: WeightedSample, w: Window) -> float:
    """Weight outside the window, summed directly rather than as ``1 - S``."""
    w.validate(sample.n)
    inside = set(w.indices())
    return math.fsum(t for i, t in enumerate(sample.weights) if i not in inside)


def window_mean(sample: WeightedSample, w: Window) -> float:
    """Weight-normalized mean of the block ``k..j``: ``sum t_i x_i / sum t_i``."""
    mass = window_mass(sample, w)
    if abs(mass) <= sample.tolerances.eps_sum:
        raise DegenerateWindow(f"window {w} has weight mass {mass!r}")
    numer = math.fsum(sample.weights[i] * sample.values[i] for i in w.indices())
    return numer / mass


def moment_summary(
    sample: WeightedSample,
    p: float = 2.0,
    two_r: float = 2.0,
    f: Optional[Callable[[float], float]] = None,
    f_label: Optional[str] = None,
) -> MomentSummary:
    """Collect the scalar statistics the bounds are stated in.

    ``power_moment`` is ``sum t_i x_i**p`` and is only defined for nonnegative data
    when ``p`` is not an integer; it is NaN otherwise.
    """
    ts, xs = sample.weights, sample.values
    function_mean = None
    if f is not None:
        function_mean = math.fsum(t * float(f(x)) for t, x in zip(ts, xs))
    if float(p).is_integer() or min(xs) >= 0:
        power_moment = math.fsum(t * x**p for t, x in zip(ts, xs))
    else:
        power_moment = math.nan
    return MomentSummary(
        mean=weighted_mean(sample),
        square_moment=math.fsum(t * x * x for t, x in zip(ts, xs)),
        power_moment=power_moment,
        p=p,
        central_moment=central_power_moment(sample, two_r),
        two_r=two_r,
        function_mean=function_mean,
        function_label=f_label,
    )
