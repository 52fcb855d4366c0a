"""Exception hierarchy shared across the package."""


class DevboundError(Exception):
    """Base class for every error raised by devbound."""


class DomainError(DevboundError, ValueError):
    """An argument lies outside the domain where a bound or function is defined."""


class RegimeError(DevboundError, ValueError):
    """The weights do not satisfy the hypothesis a bound requires."""


class DegenerateWindow(DevboundError, ValueError):
    """A window carries (numerically) zero weight mass."""


class OrderError(DevboundError, ValueError):
    """Data are not sorted the way a bound requires."""


class ConfigError(DevboundError, ValueError):
    """Invalid fuzzing or CLI configuration."""


class BoundViolation(DevboundError, ArithmeticError):
    """A certified inequality failed beyond tolerance.

    Either the implementation is wrong or a genuine counterexample was found;
    callers should preserve the offending input.
    """
