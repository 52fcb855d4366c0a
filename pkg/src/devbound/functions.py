"""Function descriptors, test-function factories and grid checkers for the
superquadratic and uniformly convex classes.

The checkers are semi-decisions: they can exhibit a violation with a witness,
but ``no_violation_found`` only means none showed up on the grid.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .errors import DomainError

Evaluator = Callable[[np.ndarray], np.ndarray]

GRID_TOL = 1e-8
DEFAULT_GRID = 64
DEFAULT_SPAN = 10.0
FD_STEP = 1e-6


class Flag(str, enum.Enum):
    CHECKED_TRUE = "checked_true"
    CHECKED_FALSE = "checked_false"
    UNCHECKED = "unchecked"

    @classmethod
    def of(cls, ok: bool) -> "Flag":
        return cls.CHECKED_TRUE if ok else cls.CHECKED_FALSE


class Verdict(str, enum.Enum):
    NO_VIOLATION_FOUND = "no_violation_found"
    VIOLATED = "violated"


@dataclass(frozen=True)
class FunctionSpec:
    """A scalar function on ``[domain_low, domain_high)``.

    ``evaluate`` must accept numpy arrays and be free of internal state.
    """

    label: str
    evaluate: Evaluator
    domain_low: float = 0.0
    domain_high: float = math.inf
    derivative: Optional[Evaluator] = None
    declared_modulus: Optional["ModulusSpec"] = field(default=None, compare=False)

    def __call__(self, x):
        out = self.evaluate(np.asarray(x, dtype=float))
        return float(out) if np.ndim(out) == 0 else out

    def contains(self, x: float) -> bool:
        return self.domain_low <= x < self.domain_high or (x == self.domain_low)

    def require_domain(self, xs) -> None:
        for x in xs:
            if not self.contains(x):
                raise DomainError(
                    f"{x!r} lies outside the domain [{self.domain_low}, {self.domain_high}) of {self.label}"
                )

    def grid_span(self, span: Optional[float]) -> float:
        if span is not None:
            return span
        if math.isfinite(self.domain_high):
            return self.domain_high - self.domain_low
        return DEFAULT_SPAN


@dataclass(frozen=True)
class ModulusFlags:
    increasing: Flag = Flag.UNCHECKED
    zero_at_zero: Flag = Flag.UNCHECKED
    convex: Flag = Flag.UNCHECKED
    submultiplicative: Flag = Flag.UNCHECKED

    def as_dict(self) -> dict[str, str]:
        return {k: getattr(self, k).value for k in ("increasing", "zero_at_zero", "convex", "submultiplicative")}


@dataclass(frozen=True)
class ModulusSpec:
    """A modulus ``Phi`` on ``[0, span)``: either ``m * d**p`` or a generic function.

    Flags for the power form are computed analytically at construction.
    """

    m: Optional[float] = None
    p: Optional[float] = None
    function: Optional[FunctionSpec] = None
    flags: ModulusFlags = ModulusFlags()

    def __post_init__(self) -> None:
        power = self.m is not None or self.p is not None
        if power == (self.function is not None):
            raise DomainError("a modulus is either power form (m, p) or a generic function, not both")
        if power:
            if self.m is None or self.p is None or not self.m > 0 or not self.p >= 1:
                raise DomainError(f"power modulus needs m > 0 and p >= 1, got m={self.m}, p={self.p}")
            object.__setattr__(self, "flags", ModulusFlags(
                increasing=Flag.CHECKED_TRUE,
                zero_at_zero=Flag.CHECKED_TRUE,
                convex=Flag.CHECKED_TRUE,
                # m (AB)^p <= m^2 A^p B^p  iff  m >= 1
                submultiplicative=Flag.of(self.m >= 1),
            ))

    @classmethod
    def power(cls, m: float, p: float) -> "ModulusSpec":
        return cls(m=float(m), p=float(p))

    @classmethod
    def generic(cls, function: FunctionSpec, flags: ModulusFlags = ModulusFlags()) -> "ModulusSpec":
        return cls(function=function, flags=flags)

    @property
    def is_power(self) -> bool:
        return self.function is None

    @property
    def label(self) -> str:
        if self.is_power:
            return f"{self.m:g}*d^{self.p:g}"
        return self.function.label

    def evaluate(self, d):
        d = np.asarray(d, dtype=float)
        if self.is_power:
            return self.m * np.power(d, self.p)
        return self.function.evaluate(d)

    def __call__(self, d):
        out = self.evaluate(d)
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self) -> Optional[Evaluator]:
        if self.is_power:
            m, p = self.m, self.p
            return lambda d: m * p * np.power(np.asarray(d, dtype=float), p - 1)
        return self.function.derivative

    def inverse(self, value: float, hint: float = 1.0, iterations: int = 60) -> float:
        """``Phi^{-1}(value)`` by bisection; requires ``Phi`` increasing with ``Phi(0) = 0``."""
        if value <= 0:
            return 0.0
        if self.is_power:
            return (value / self.m) ** (1.0 / self.p)
        lo, hi = 0.0, max(hint, 1e-300)
        for _ in range(2100):
            if self(hi) >= value:
                break
            lo, hi = hi, 2.0 * hi
        else:
            raise DomainError(f"modulus {self.label} never reaches {value!r}")
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            if self(mid) < value:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def with_flags(self, flags: ModulusFlags) -> "ModulusSpec":
        if self.is_power:
            return self
        return replace(self, flags=flags)


@dataclass(frozen=True)
class Witness:
    points: tuple[float, ...]
    lhs: float
    rhs: float
    slack: float


@dataclass(frozen=True)
class SuperquadraticCertificate:
    grid: tuple[float, ...]
    c_intervals: tuple[tuple[float, float], ...]
    verdict: Verdict
    witness: Optional[Witness] = None


@dataclass(frozen=True)
class ConvexityResult:
    verdict: Verdict
    witness: Optional[Witness]
    min_slack: float
    max_abs_slack: float


# -- factories ---------------------------------------------------------------

def make_power_function(exponent: float, scale: float = 1.0) -> FunctionSpec:
    """``scale * x**exponent`` on ``[0, inf)`` with its exact derivative."""
    if not exponent >= 1:
        raise DomainError(f"exponent must be >= 1, got {exponent!r}")
    if not scale > 0:
        raise DomainError(f"scale must be > 0, got {scale!r}")
    e, s = float(exponent), float(scale)
    label = f"power:{e:g}" if s == 1.0 else f"scaled_power:{s:g}:{e:g}"
    return FunctionSpec(
        label=label,
        evaluate=lambda x: s * np.power(x, e),
        derivative=lambda x: s * e * np.power(np.asarray(x, dtype=float), e - 1),
    )


def make_square_on_line() -> FunctionSpec:
    """``x**2`` on the whole real line; strongly convex with modulus ``d**2``."""
    return FunctionSpec(
        label="square",
        evaluate=lambda x: np.square(x),
        domain_low=-math.inf,
        derivative=lambda x: 2.0 * np.asarray(x, dtype=float),
        declared_modulus=ModulusSpec.power(1.0, 2.0),
    )


def derivative_at_zero(phi: FunctionSpec) -> float:
    if phi.derivative is not None:
        return float(phi.derivative(np.asarray(0.0)))
    return (phi(FD_STEP) - phi(0.0)) / FD_STEP


def make_example1(phi_convex: FunctionSpec) -> FunctionSpec:
    """``g(x) = x * phi(x)`` for convex ``phi`` with ``phi'(0) > 0``.

    ``g`` is strongly convex with constant ``phi'(0)``; the result carries that as
    ``declared_modulus = phi'(0) * d**2``.
    """
    slope = derivative_at_zero(phi_convex)
    if not slope > 0:
        raise DomainError(f"phi'(0) must be positive, got {slope!r}")
    ev = phi_convex.evaluate
    deriv = None
    if phi_convex.derivative is not None:
        dphi = phi_convex.derivative
        deriv = lambda x: ev(np.asarray(x, dtype=float)) + np.asarray(x, dtype=float) * dphi(x)  # noqa: E731
    return FunctionSpec(
        label=f"x*({phi_convex.label})",
        evaluate=lambda x: np.asarray(x, dtype=float) * ev(np.asarray(x, dtype=float)),
        domain_low=phi_convex.domain_low,
        domain_high=phi_convex.domain_high,
        derivative=deriv,
        declared_modulus=ModulusSpec.power(slope, 2.0),
    )


def exp_function() -> FunctionSpec:
    return FunctionSpec("exp", np.exp, derivative=np.exp)


def affine_function(intercept: float) -> FunctionSpec:
    """``phi(x) = x + intercept`` (slope one)."""
    c = float(intercept)
    return FunctionSpec(
        f"x+{c:g}",
        lambda x: np.asarray(x, dtype=float) + c,
        derivative=lambda x: np.ones_like(np.asarray(x, dtype=float)),
    )


def resolve_function(name: str) -> FunctionSpec:
    """Look up a registry name: ``power:<p>``, ``scaled_power:<m>:<p>``,
    ``example1_exp`` or ``example1_affine:<c>``."""
    head, *args = name.split(":")
    try:
        nums = [float(a) for a in args]
    except ValueError:
        raise DomainError(f"bad numeric argument in function name {name!r}") from None
    if head == "power" and len(nums) == 1:
        return make_power_function(nums[0])
    if head == "scaled_power" and len(nums) == 2:
        return make_power_function(nums[1], nums[0])
    if head == "example1_exp" and not nums:
        return make_example1(exp_function())
    if head == "example1_affine" and len(nums) == 1:
        return make_example1(affine_function(nums[0]))
    if head == "square" and not nums:
        return make_square_on_line()
    raise DomainError(f"unknown function {name!r}")


def resolve_modulus(name: str) -> ModulusSpec:
    """``power:<p>`` or ``scaled_power:<m>:<p>`` as a power-form modulus."""
    head, *args = name.split(":")
    try:
        nums = [float(a) for a in args]
    except ValueError:
        raise DomainError(f"bad numeric argument in modulus name {name!r}") from None
    if head == "power" and len(nums) == 1:
        return ModulusSpec.power(1.0, nums[0])
    if head == "scaled_power" and len(nums) == 2:
        return ModulusSpec.power(nums[0], nums[1])
    raise DomainError(f"unknown modulus {name!r}")


# -- checkers ----------------------------------------------------------------

def _grid(low: float, span: float, size: int) -> np.ndarray:
    # half-open: the right end of [low, low + span) is excluded
    return low + span * np.arange(size) / size


def check_superquadratic(
    f: FunctionSpec,
    grid_size: int = DEFAULT_GRID,
    span: Optional[float] = None,
    tol: float = GRID_TOL,
) -> SuperquadraticCertificate:
    """Search for ``x`` where no constant ``C_x`` satisfies
    ``f(y) >= f(x) + C_x (y - x) + f(|y - x|)`` for all grid ``y``.

    For each ``x`` the admissible constants form the interval between the largest
    difference quotient from the left and the smallest from the right.
    """
    if f.domain_low != 0:
        raise DomainError(f"superquadraticity is defined on [0, b); {f.label} starts at {f.domain_low}")
    if grid_size < 16:
        raise DomainError(f"grid_size must be >= 16, got {grid_size}")
    xs = _grid(0.0, f.grid_span(span), grid_size)
    fx = np.asarray(f.evaluate(xs), dtype=float)
    dy = xs[None, :] - xs[:, None]  # row x, column y
    with np.errstate(divide="ignore", invalid="ignore"):
        q = (fx[None, :] - fx[:, None] - np.asarray(f.evaluate(np.abs(dy)), dtype=float)) / dy
    right = dy > 0
    c_hi = np.where(right, q, np.inf).min(axis=1)
    c_lo = np.where(dy < 0, q, -np.inf).max(axis=1)
    gap = c_hi - c_lo
    verdict = Verdict.NO_VIOLATION_FOUND
    witness = None
    if np.any(gap < -tol):
        i = int(np.argmin(gap))
        y_hi = float(xs[int(np.argmin(np.where(right, q, np.inf)[i]))])
        y_lo = float(xs[int(np.argmax(np.where(dy < 0, q, -np.inf)[i]))])
        witness = Witness((float(xs[i]), y_lo, y_hi), float(c_lo[i]), float(c_hi[i]), float(gap[i]))
        verdict = Verdict.VIOLATED
    return SuperquadraticCertificate(
        grid=tuple(float(x) for x in xs),
        c_intervals=tuple((float(a), float(b)) for a, b in zip(c_lo, c_hi)),
        verdict=verdict,
        witness=witness,
    )


def check_uniform_convexity(
    f: FunctionSpec,
    phi: ModulusSpec,
    grid_size: int = DEFAULT_GRID,
    span: Optional[float] = None,
    tol: float = GRID_TOL,
) -> ConvexityResult:
    """Grid test of ``t f(x) + (1-t) f(y) - f(tx + (1-t)y) >= t(1-t) Phi(|x-y|)``.

    ``t`` runs over the interior of ``(0, 1)``.  The witness is the worst violation,
    ties going to the smallest ``(t, x, y)`` grid index.
    """
    low = f.domain_low if math.isfinite(f.domain_low) else 0.0
    xs = _grid(low, f.grid_span(span), grid_size)
    ts = np.arange(1, grid_size + 1) / (grid_size + 1)
    fx = np.asarray(f.evaluate(xs), dtype=float)
    X, Y = xs[:, None], xs[None, :]
    phid = np.asarray(phi.evaluate(np.abs(X - Y)), dtype=float)
    T = ts[:, None, None]
    mix = T * X[None] + (1 - T) * Y[None]
    slack = T * fx[None, :, None] + (1 - T) * fx[None, None, :] - f.evaluate(mix) - T * (1 - T) * phid[None]
    flat = int(np.argmin(slack))
    worst = float(slack.flat[flat])
    witness = None
    verdict = Verdict.NO_VIOLATION_FOUND
    if worst < -tol:
        it, ix, iy = np.unravel_index(flat, slack.shape)
        x, y, t = float(xs[ix]), float(xs[iy]), float(ts[it])
        lhs = f(t * x + (1 - t) * y) + t * (1 - t) * phi(abs(x - y))
        rhs = t * f(x) + (1 - t) * f(y)
        witness = Witness((x, y, t), lhs, rhs, worst)
        verdict = Verdict.VIOLATED
    return ConvexityResult(verdict, witness, worst, float(np.max(np.abs(slack))))


def check_modulus_properties(
    phi: ModulusSpec,
    grid_size: int = DEFAULT_GRID,
    span: float = DEFAULT_SPAN,
    tol: float = GRID_TOL,
) -> ModulusFlags:
    """Grid flags: nondecreasing, ``Phi(0) = 0``, midpoint convex, submultiplicative.

    Submultiplicativity ``Phi(AB) <= Phi(A) Phi(B)`` is tested for grid pairs with
    ``AB`` inside ``[0, span]``; comparisons carry a relative slack of ``tol`` too.
    """
    ds = span * np.arange(grid_size + 1) / grid_size
    vals = np.asarray(phi.evaluate(ds), dtype=float)
    increasing = bool(np.all(np.diff(vals) >= -tol * (1 + np.abs(vals[1:]))))
    zero = bool(abs(float(phi(0.0))) <= tol)
    mid = np.asarray(phi.evaluate(0.5 * (ds[:, None] + ds[None, :])), dtype=float)
    chord = 0.5 * (vals[:, None] + vals[None, :])
    convex = bool(np.all(mid <= chord + tol * (1 + np.abs(chord))))
    pos = ds[1:]
    A, B = pos[:, None], pos[None, :]
    prod = A * B
    inside = prod <= span
    lhs = np.asarray(phi.evaluate(np.where(inside, prod, 0.0)), dtype=float)
    rhs = np.asarray(phi.evaluate(A), dtype=float) * np.asarray(phi.evaluate(B), dtype=float)
    submult = bool(np.all(~inside | (lhs <= rhs + tol * (1 + np.abs(rhs)))))
    return ModulusFlags(Flag.of(increasing), Flag.of(zero), Flag.of(convex), Flag.of(submult))


def check_derivative_modulus_condition(
    f: FunctionSpec,
    phi: ModulusSpec,
    grid_size: int = DEFAULT_GRID,
    span: Optional[float] = None,
    tol: float = GRID_TOL,
) -> Flag:
    """Grid flag for ``f'(y) - f'(x) >= Phi'(y - x)`` whenever ``y > x``.

    Written symmetrically as ``sign(y - x) (f'(y) - f'(x)) >= Phi'(|y - x|)``.
    Returns ``UNCHECKED`` when either derivative is unavailable.
    """
    dphi = phi.derivative()
    if f.derivative is None or dphi is None:
        return Flag.UNCHECKED
    low = f.domain_low if math.isfinite(f.domain_low) else 0.0
    xs = _grid(low, f.grid_span(span), grid_size)
    dfx = np.asarray(f.derivative(xs), dtype=float)
    diff = xs[None, :] - xs[:, None]
    upper = diff > 0
    lhs = (dfx[None, :] - dfx[:, None])[upper]
    rhs = np.asarray(dphi(diff[upper]), dtype=float)
    return Flag.of(bool(np.all(lhs >= rhs - tol * (1 + np.abs(rhs)))))
