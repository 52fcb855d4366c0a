"""Certified upper bounds on how far points and window means can sit from a
weighted mean, with validators for the weight regimes and function classes the
bounds need and a brute-force oracle that checks them."""

from .bounds import (
    BoundReport,
    fixed_coefficient_window_offset,
    js_prefix_bound,
    modulus_gap_bound,
    prefix_means_profile,
    samuelson_bound,
    t_constant,
    uniform_convex_gap_bound,
    weighted_power_bound,
    window_bound,
)
from .errors import (
    BoundViolation,
    ConfigError,
    DegenerateWindow,
    DevboundError,
    DomainError,
    OrderError,
    RegimeError,
)
from .functions import (
    FunctionSpec,
    ModulusSpec,
    check_modulus_properties,
    check_superquadratic,
    check_uniform_convexity,
    resolve_function,
    resolve_modulus,
)
from .oracle import FuzzConfig, VerificationReport, exact_max_deviation, fuzz_tightness, verify_dataset
from .sample import Tolerances, WeightedSample, Window
from .weights import admissible_ks, validate_positive_simplex, validate_steffensen

__version__ = "0.1.0"

__all__ = [
    "BoundReport",
    "fixed_coefficient_window_offset",
    "js_prefix_bound",
    "modulus_gap_bound",
    "prefix_means_profile",
    "samuelson_bound",
    "t_constant",
    "uniform_convex_gap_bound",
    "weighted_power_bound",
    "window_bound",
    "BoundViolation",
    "ConfigError",
    "DegenerateWindow",
    "DevboundError",
    "DomainError",
    "OrderError",
    "RegimeError",
    "FunctionSpec",
    "ModulusSpec",
    "check_modulus_properties",
    "check_superquadratic",
    "check_uniform_convexity",
    "resolve_function",
    "resolve_modulus",
    "FuzzConfig",
    "VerificationReport",
    "exact_max_deviation",
    "fuzz_tightness",
    "verify_dataset",
    "Tolerances",
    "WeightedSample",
    "Window",
    "admissible_ks",
    "validate_positive_simplex",
    "validate_steffensen",
]
