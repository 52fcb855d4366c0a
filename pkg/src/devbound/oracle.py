"""Brute-force verification of every bound on concrete data, and a seeded
tightness fuzzer.

Left-hand sides are computed in exact rational arithmetic from the float inputs,
independently of the code paths in :mod:`devbound.bounds`.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from itertools import accumulate
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import bounds
from .errors import BoundViolation, ConfigError, DevboundError
from .functions import ModulusSpec, make_power_function, make_square_on_line
from .sample import DEFAULT_TOLERANCES, Tolerances, WeightedSample, Window
from .weights import admissible_ks, regime_label, validate_steffensen

REGIMES = ("simplex", "equal", "steffensen")
DISTRIBUTIONS = ("uniform", "heavy_tail", "clustered")
DEFAULT_R_SET = (1.0, 2.0)


@dataclass(frozen=True)
class CheckRow:
    inequality: str
    location: str
    r: Optional[float]
    lhs: float
    rhs: float
    slack: float
    passed: bool
    roundoff: float = 0.0


@dataclass(frozen=True)
class VerificationReport:
    regime: str
    checks: tuple[CheckRow, ...]
    all_pass: bool
    worst_slack: Optional[float]

    def failures(self) -> list[CheckRow]:
        return [c for c in self.checks if not c.passed]

    def as_dict(self) -> dict:
        return {
            "regime": self.regime,
            "all_pass": self.all_pass,
            "worst_slack": self.worst_slack,
            "checks": [asdict(c) for c in self.checks],
        }


# -- exact left-hand sides ---------------------------------------------------

def _dyadic(x: float) -> tuple[int, int]:
    """``x == m * 2**e`` exactly."""
    m, d = x.as_integer_ratio()
    return m, 1 - d.bit_length()


def _common(pairs: list[tuple[int, int]]) -> tuple[list[int], int]:
    """Integers ``v_i`` and one exponent ``e`` with ``v_i * 2**e`` equal to each input."""
    e = min(exp for _, exp in pairs)
    return [m << (exp - e) for m, exp in pairs], e


def _scaled(num: int, den: int, exp: int) -> Fraction:
    value = Fraction(num, den)
    return value * (1 << exp) if exp >= 0 else value / (1 << -exp)


class _Exact:
    """Exact sums over a sample via integer mantissas at a shared binary exponent.

    Weights are ``t_int * 2**t_exp / den``.  Equal-weight samples use ``den = n``
    so that every weight is exactly ``1/n``, matching the equal-weight bounds.
    """

    def __init__(self, sample: WeightedSample):
        xs = [_dyadic(x) for x in sample.values]
        if sample.has_equal_weights():
            ts, self.den = [(1, 0)] * sample.n, sample.n
        else:
            ts, self.den = [_dyadic(t) for t in sample.weights], 1
        self.t_int, self.t_exp = _common(ts)
        self.tx_int, self.tx_exp = _common([(mt * mx, et + ex) for (mt, et), (mx, ex) in zip(ts, xs)])
        self.x_pairs = xs
        self.pt = list(accumulate(self.t_int, initial=0))
        self.ptx = list(accumulate(self.tx_int, initial=0))

    @property
    def mean(self) -> Fraction:
        return _scaled(self.ptx[-1], self.den, self.tx_exp)

    def block_mean(self, k: int, j: int) -> Fraction:
        tx = self.ptx[j] - self.ptx[k - 1]
        t = self.pt[j] - self.pt[k - 1]
        return _scaled(tx, t, self.tx_exp - self.t_exp)

    def block_deviation(self, k: int, j: int) -> float:
        """``|block mean - mean|`` correctly rounded."""
        tx = self.ptx[j] - self.ptx[k - 1]
        t = self.pt[j] - self.pt[k - 1]
        total, den = self.ptx[-1], self.den
        # tx/t * 2^(tx_exp - t_exp) - total/den * 2^tx_exp, over the common denominator t * den
        if self.t_exp >= 0:
            num = tx * den - total * t * (1 << self.t_exp)
            return float(abs(_scaled(num, t * den, self.tx_exp - self.t_exp)))
        num = (tx << -self.t_exp) * den - total * t
        return float(abs(_scaled(num, t * den, self.tx_exp)))

    def max_deviation(self) -> tuple[float, int]:
        ints, e = _common(self.x_pairs + [(self.ptx[-1], self.tx_exp)])
        mean = ints[-1]
        devs = [abs(v * self.den - mean) for v in ints[:-1]]
        top = max(devs)
        return float(_scaled(top, self.den, e)), devs.index(top) + 1


def exact_max_deviation(sample: WeightedSample) -> tuple[float, int]:
    """``max_k |x_k - mean|`` and its 1-based argmax (first index wins ties)."""
    return _Exact(sample).max_deviation()


def exact_window_deviation(sample: WeightedSample, w: Window) -> float:
    w.validate(sample.n)
    return _Exact(sample).block_deviation(w.k, w.j)


# -- check catalogue ---------------------------------------------------------

class _Context:
    def __init__(self, sample: WeightedSample):
        self.sample = sample
        self.tol = sample.tolerances
        self._exact: Optional[_Exact] = None

    @property
    def exact(self) -> _Exact:
        if self._exact is None:
            self._exact = _Exact(self.sample)
        return self._exact


def _power_gap_terms(sample: WeightedSample, r: float) -> tuple[float, float, float, float]:
    ts, xs = sample.weights, sample.values
    xbar = math.fsum(t * x for t, x in zip(ts, xs))
    raw = math.fsum(t * abs(x - xbar) ** (2 * r) for t, x in zip(ts, xs))
    powers = math.fsum(t * x ** (2 * r) for t, x in zip(ts, xs))
    scale = math.fsum(abs(t) * abs(x) ** (2 * r) for t, x in zip(ts, xs))
    return xbar, raw, powers, scale


def _cancellation(rep: bounds.BoundReport, root: float, tol: Tolerances) -> float:
    """Rise of ``(N / D)**(1/root)`` when the numerator moves up by its round-off budget.

    Numerators formed as differences of large terms carry absolute error of order
    ``eps * numerator_scale``; the check is granted that much extra room.
    """
    if rep.numerator_scale is None or not math.isfinite(rep.denominator):
        return 0.0
    delta = tol.eps_ineq_rel * rep.numerator_scale + tol.eps_ineq_abs
    return ((rep.numerator + delta) / rep.denominator) ** (1 / root) - rep.bound


def _samuelson(ctx, loc, r):
    rep = bounds.samuelson_bound(ctx.sample)
    return ctx.exact.max_deviation()[0], rep.bound, _cancellation(rep, 2, ctx.tol)


def _weighted_power(ctx, loc, r):
    rep = bounds.weighted_power_bound(ctx.sample, 2 * r)
    return ctx.exact.max_deviation()[0], rep.bound, _cancellation(rep, 2 * r, ctx.tol)


def _uc_function(r: float):
    return make_square_on_line() if r == 1.0 else make_power_function(2 * r)


def _uniform_convex_moment(ctx, loc, r):
    moment, _ = bounds.uniform_convex_gap_bound(ctx.sample, _uc_function(r), 1.0, 2 * r)
    return ctx.exact.max_deviation()[0], moment.bound, 0.0


def _uniform_convex_gap(ctx, loc, r):
    moment, gap = bounds.uniform_convex_gap_bound(ctx.sample, _uc_function(r), 1.0, 2 * r)
    return moment.bound, gap.bound, _cancellation(gap, 2 * r, ctx.tol)


def _modulus(ctx, r):
    rep = bounds.modulus_gap_bound(ctx.sample, _uc_function(r), ModulusSpec.power(1.0, 2 * r))
    top = ctx.exact.max_deviation()[0]
    return top, top ** (2 * r), rep


def _modulus_mid(ctx, loc, r):
    _, phi_top, rep = _modulus(ctx, r)
    return phi_top, rep.extras["mid_bound"], 0.0


def _modulus_gap(ctx, loc, r):
    _, phi_top, rep = _modulus(ctx, r)
    return phi_top, rep.bound, _cancellation(rep, 1, ctx.tol)


def _modulus_inverted(ctx, loc, r):
    top, _, rep = _modulus(ctx, r)
    inverted = rep.extras["inverted_bound"]
    hi = (rep.bound + _cancellation(rep, 1, ctx.tol)) ** (1 / (2 * r))
    return top, inverted, hi - inverted


def _window(ctx, loc, r):
    w = Window.parse(loc)
    return ctx.exact.block_deviation(w.k, w.j), bounds.window_bound(ctx.sample, w, r).bound, 0.0


def _prefix_profile(ctx, loc, r):
    j = int(loc.split("=")[1])
    xbar = float(ctx.exact.mean)
    lhs = float(ctx.exact.block_mean(1, j))
    return lhs, xbar + bounds.window_bound(ctx.sample, Window(1, j), r).bound, 0.0


def _chain_power_gap(ctx, loc, r):
    xbar, raw, powers, scale = _power_gap_terms(ctx.sample, r)
    return raw, powers - xbar ** (2 * r), ctx.tol.eps_ineq_rel * scale


def _js_prefix(ctx, loc, r):
    k = int(loc.split("=")[1])
    ex = ctx.exact
    rep = bounds.js_prefix_bound(ctx.sample, k, r)
    return float(abs(ex.block_mean(1, k) - ex.mean)), rep.bound, _cancellation(rep, 2 * r, ctx.tol)


def _jensen_steffensen(ctx, loc, r):
    xbar, _, _, scale = _power_gap_terms(ctx.sample, r)
    ts, xs = ctx.sample.weights, ctx.sample.values
    rhs = math.fsum(t * abs(x) ** (2 * r) for t, x in zip(ts, xs))
    return abs(xbar) ** (2 * r), rhs, ctx.tol.eps_ineq_rel * scale


def _js_superquadratic(ctx, loc, r):
    xbar, raw, powers, scale = _power_gap_terms(ctx.sample, r)
    return xbar ** (2 * r) + raw, powers, ctx.tol.eps_ineq_rel * scale


CHECKS: dict[str, Callable] = {
    "samuelson": _samuelson,
    "weighted_power": _weighted_power,
    "uniform_convex_moment": _uniform_convex_moment,
    "uniform_convex_gap": _uniform_convex_gap,
    "modulus_gap_mid": _modulus_mid,
    "modulus_gap": _modulus_gap,
    "modulus_gap_inverted": _modulus_inverted,
    "window": _window,
    "prefix_profile": _prefix_profile,
    "chain_power_gap": _chain_power_gap,
    "js_prefix": _js_prefix,
    "jensen_steffensen": _jensen_steffensen,
    "js_superquadratic": _js_superquadratic,
}


def _sorted(xs: Sequence[float], descending: bool) -> bool:
    pairs = zip(xs, xs[1:])
    return all(a >= b for a, b in pairs) if descending else all(a <= b for a, b in pairs)


def applicable_checks(sample: WeightedSample, r_set: Iterable[float]) -> list[tuple[str, str, float]]:
    """Every ``(inequality, location, r)`` whose hypotheses hold for ``sample``."""
    tol = sample.tolerances
    regime = regime_label(sample.weights, tol.eps_sum)
    xs = sample.values
    n = sample.n
    nonneg = min(xs) >= 0
    positive = min(xs) > 0
    out: list[tuple[str, str, float]] = []
    for r in r_set:
        r = float(r)
        if regime == "equal":
            if r == 1.0:
                out.append(("samuelson", "all", r))
            if r == 1.0 or nonneg:
                out += [(name, "all", r) for name in ("modulus_gap_mid", "modulus_gap", "modulus_gap_inverted")]
            if _sorted(xs, descending=True):
                out += [("prefix_profile", f"j={j}", r) for j in range(1, n + 1)]
        if regime in ("equal", "simplex"):
            if positive:
                out.append(("weighted_power", "all", r))
            if r == 1.0 or nonneg:
                out += [("uniform_convex_moment", "all", r), ("uniform_convex_gap", "all", r)]
            out += [("window", f"{k}:{j}", r) for k in range(1, n + 1) for j in range(k, n + 1)]
            if nonneg:
                out.append(("chain_power_gap", "all", r))
        if regime != "unsupported" and _sorted(xs, descending=False):
            out += [("js_prefix", f"k={k}", r) for k in admissible_ks(sample.weights, tol.eps_sum)]
            out.append(("jensen_steffensen", "all", r))
            if nonneg:
                out.append(("js_superquadratic", "all", r))
    return out


def evaluate_check(sample: WeightedSample, inequality: str, location: str, r: float,
                   ctx: Optional[_Context] = None) -> CheckRow:
    ctx = ctx or _Context(sample)
    lhs, rhs, roundoff = CHECKS[inequality](ctx, location, r)
    slack = rhs - lhs
    passed = slack >= -(sample.tolerances.slack_allowance(rhs) + roundoff)
    return CheckRow(inequality, location, r, float(lhs), float(rhs), float(slack), bool(passed), float(roundoff))


def verify_dataset(sample: WeightedSample, r_set: Iterable[float] = DEFAULT_R_SET) -> VerificationReport:
    """Run every applicable bound and compare with exhaustively computed left sides."""
    r_set = tuple(float(r) for r in r_set)
    ctx = _Context(sample)
    rows = tuple(evaluate_check(sample, *spec, ctx=ctx) for spec in applicable_checks(sample, r_set))
    worst = min((row.slack for row in rows), default=None)
    return VerificationReport(
        regime=regime_label(sample.weights, sample.tolerances.eps_sum),
        checks=rows,
        all_pass=all(row.passed for row in rows),
        worst_slack=worst,
    )


def witness_record(sample: WeightedSample, row: CheckRow) -> dict:
    """JSON-ready witness shared with the CLI (``verify --input`` reads it back)."""
    record = {
        "values": list(sample.values),
        "weights": list(sample.weights),
        "inequality": row.inequality,
        "location": row.location,
        "window": None,
        "k": None,
        "r": row.r,
        "lhs": row.lhs,
        "rhs": row.rhs,
    }
    if ":" in row.location:
        record["window"] = row.location
    elif row.location.startswith("k="):
        record["k"] = int(row.location[2:])
    return record


# -- fuzzing -----------------------------------------------------------------

@dataclass(frozen=True)
class FuzzConfig:
    master_seed: int = 0
    trials: int = 100
    n_range: tuple[int, int] = (2, 12)
    r_set: tuple[float, ...] = DEFAULT_R_SET
    regime: str = "simplex"
    value_distribution: str = "uniform"
    hill_steps: int = 20
    workers: int = 1
    tolerances: Tolerances = field(default=DEFAULT_TOLERANCES, compare=False)

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        lo, hi = self.n_range
        if not 2 <= lo <= hi <= 64:
            raise ConfigError(f"n_range must satisfy 2 <= min <= max <= 64, got {self.n_range}")
        if not self.r_set or any(not r >= 1 for r in self.r_set):
            raise ConfigError(f"r_set must be nonempty with every r >= 1, got {self.r_set}")
        if self.regime not in REGIMES:
            raise ConfigError(f"regime must be one of {REGIMES}, got {self.regime!r}")
        if self.value_distribution not in DISTRIBUTIONS:
            raise ConfigError(f"value_distribution must be one of {DISTRIBUTIONS}, got {self.value_distribution!r}")
        if self.hill_steps < 0 or self.workers < 1:
            raise ConfigError("hill_steps must be >= 0 and workers >= 1")


@dataclass(frozen=True)
class FuzzReport:
    best_tightness: float
    violations: tuple[dict, ...]
    tightest_witness: Optional[dict]
    trials_run: int

    def as_dict(self) -> dict:
        return {
            "best_tightness": self.best_tightness,
            "violations": list(self.violations),
            "tightest_witness": self.tightest_witness,
            "trials_run": self.trials_run,
        }


def steffensen_weights(rng: np.random.Generator, n: int, eps: float = 1e-9) -> list[float]:
    """Signed weights with prefix sums in ``[0, 1]`` and ``P_n = 1``.

    Prefix sums are drawn directly and differenced.  Half of the draws plant an
    admissible split ``k``: ``P_j <= P_k`` before it and ``P_l >= P_k`` after it.
    """
    while True:
        if rng.random() < 0.5:
            prefix = list(rng.uniform(0.0, 1.0, n - 1))
        else:
            k = int(rng.integers(1, n))
            pk = float(rng.uniform(0.05, 0.95))
            prefix = [float(rng.uniform(0.0, pk)) for _ in range(k - 1)] + [pk]
            prefix += [float(rng.uniform(pk, 1.0)) for _ in range(n - 1 - k)]
        prefix.append(1.0)
        weights = [prefix[0]] + [b - a for a, b in zip(prefix, prefix[1:])]
        if abs(math.fsum(weights) - 1.0) <= eps:
            return weights


def _draw_values(rng: np.random.Generator, n: int, kind: str) -> list[float]:
    if kind == "uniform":
        return list(rng.uniform(0.0, 10.0, n))
    if kind == "heavy_tail":
        return list(rng.pareto(1.5, n))
    centers = rng.uniform(0.0, 10.0, int(rng.integers(1, 4)))
    return [float(c + rng.normal(0.0, 0.01)) for c in rng.choice(centers, n)]


def draw_sample(config: FuzzConfig, trial: int) -> WeightedSample:
    """Trial ``trial``'s sample; depends only on ``(master_seed, trial)``."""
    rng = np.random.default_rng([config.master_seed, trial])
    lo, hi = config.n_range
    n = int(rng.integers(lo, hi + 1))
    if config.regime == "equal":
        weights = [1.0 / n] * n
    elif config.regime == "simplex":
        raw = rng.dirichlet(np.ones(n))
        weights = list(raw / math.fsum(raw))
    else:
        weights = steffensen_weights(rng, n, config.tolerances.eps_sum)
        if not validate_steffensen(weights, config.tolerances.eps_sum).is_steffensen:
            raise BoundViolation(f"generated weights fail the Steffensen conditions: {weights}")
    values = [float(v) for v in _draw_values(rng, n, config.value_distribution)]
    if config.regime == "steffensen":
        values.sort()
    elif config.regime == "equal" and rng.random() < 0.5:
        values.sort(reverse=True)
    return WeightedSample(tuple(values), tuple(weights), config.tolerances)


# rows whose left side is an actual deviation; numerator-chain rows are identities at r = 1
TIGHTNESS_CHECKS = frozenset(
    {"samuelson", "weighted_power", "uniform_convex_moment", "modulus_gap_inverted", "window", "js_prefix"}
)


def _ratio(row: CheckRow, eps_abs: float) -> Optional[float]:
    """``lhs / rhs`` with the row's certified round-off folded into ``rhs``."""
    if row.inequality not in TIGHTNESS_CHECKS or row.rhs <= eps_abs:
        return None
    return row.lhs / (row.rhs + row.roundoff + eps_abs)


def _shape(sample: WeightedSample) -> tuple[bool, bool, bool, bool]:
    xs = sample.values
    return _sorted(xs, False), _sorted(xs, True), min(xs) >= 0, min(xs) > 0


def _hill_climb(sample: WeightedSample, row: CheckRow, steps: int):
    """Coordinate search on the values to push ``lhs/rhs`` of one check toward 1."""
    eps_abs = sample.tolerances.eps_ineq_abs
    best_ratio = _ratio(row, eps_abs)
    best_sample, best_row = sample, row
    violations = []
    spread = max(sample.values) - min(sample.values)
    step = 0.1 * spread if spread > 0 else 0.1
    spec = (row.inequality, row.location, row.r)
    shape = _shape(sample)
    for _ in range(steps):
        for i in range(sample.n):
            for sign in (1.0, -1.0):
                values = list(best_sample.values)
                values[i] += sign * step
                try:
                    trial = best_sample.with_values(values)
                    # weights are fixed, so keeping the data shape keeps the check applicable
                    if _shape(trial) != shape:
                        continue
                    cand = evaluate_check(trial, *spec)
                except DevboundError:
                    continue
                if not cand.passed:
                    violations.append(witness_record(trial, cand))
                ratio = _ratio(cand, eps_abs)
                if ratio is not None and (best_ratio is None or ratio > best_ratio):
                    best_ratio, best_sample, best_row = ratio, trial, cand
        step *= 0.6
    return best_ratio, best_sample, best_row, violations


def _run_trial(config: FuzzConfig, trial: int):
    sample = draw_sample(config, trial)
    report = verify_dataset(sample, config.r_set)
    violations = [dict(witness_record(sample, row), trial=trial) for row in report.failures()]
    eps_abs = sample.tolerances.eps_ineq_abs
    best = None
    for row in report.checks:
        ratio = _ratio(row, eps_abs)
        if ratio is not None and (best is None or ratio > best[0]):
            best = (ratio, row)
    if best is None:
        return trial, None, None, violations
    ratio, s, row, climbed = _hill_climb(sample, best[1], config.hill_steps)
    violations += [dict(v, trial=trial) for v in climbed]
    return trial, ratio, dict(witness_record(s, row), trial=trial), violations


def fuzz_tightness(config: FuzzConfig) -> FuzzReport:
    """Search for near-equality cases; any violation stops the run.

    Trials are seeded independently from ``(master_seed, trial)`` and reduced in
    trial order, so results do not depend on ``workers``.
    """
    config.validate()
    indices = range(config.trials)
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            outcomes = list(pool.map(_run_trial, [config] * config.trials, indices, chunksize=16))
    else:
        outcomes = (_run_trial(config, i) for i in indices)
    best_ratio = 0.0
    best_witness = None
    violations: list[dict] = []
    run = 0
    for trial, ratio, witness, found in outcomes:
        run += 1
        if ratio is not None and ratio > best_ratio:
            best_ratio, best_witness = ratio, witness
        if found:
            violations.extend(found)
            break
    return FuzzReport(best_ratio, tuple(violations), best_witness, run)
