"""``devbound`` command line: bounds, verification, fuzzing and class checks.

Exit codes: 0 success, 1 an inequality was violated, 2 invalid input or flags.
Reports are JSON with sorted keys; non-finite floats are written as strings.
"""

from __future__ import annotations

import argparse
import csv
import enum
import hashlib
import io
import json
import math
import os
import re
import sys
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any, Optional, Sequence

from . import bounds
from .errors import BoundViolation, ConfigError, DevboundError
from .functions import (
    Verdict,
    check_derivative_modulus_condition,
    check_modulus_properties,
    check_superquadratic,
    check_uniform_convexity,
    make_power_function,
    make_square_on_line,
    resolve_function,
    resolve_modulus,
)
from .oracle import DISTRIBUTIONS, REGIMES, FuzzConfig, fuzz_tightness, verify_dataset
from .sample import DEFAULT_TOLERANCES, Tolerances, WeightedSample, Window
from .weights import admissible_split_indices, regime_label, validate_steffensen

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VIOLATION, EXIT_INVALID = 0, 1, 2
TOLERANCE_ENV = "DEVBOUND_TOLERANCE"

BOUND_KINDS = (
    "samuelson",
    "weighted_power",
    "fixed_coefficient",
    "uniform_convex",
    "modulus_gap",
    "window",
    "prefix_profile",
    "js_prefix",
)
# numeric aliases accepted by --theorem
THEOREM_ALIASES = {
    1: "samuelson",
    2: "weighted_power",
    3: "fixed_coefficient",
    4: "uniform_convex",
    5: "modulus_gap",
    6: "window",
    7: "js_prefix",
}

_NUMBER = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")


class InputError(DevboundError, ValueError):
    """Unreadable or malformed input file."""


@dataclass(frozen=True)
class InputDataset:
    sample: WeightedSample
    digest: str
    source: str
    has_header: bool = False


# -- input -------------------------------------------------------------------

def _parse_number(text: str, row: int, column: str) -> float:
    text = text.strip()
    if not _NUMBER.fullmatch(text):
        raise InputError(f"row {row}: {column} {text!r} is not a decimal number")
    return float(text)


def _is_numeric_row(cells: Sequence[str]) -> bool:
    return all(_NUMBER.fullmatch(c.strip()) for c in cells)


def parse_csv(text: str, tolerances: Tolerances = DEFAULT_TOLERANCES) -> tuple[WeightedSample, bool]:
    """Two columns ``value,weight``; a first row that is not numeric is a header.

    Rows are numbered from 1 as they appear in the file, header included.
    """
    rows = [(i, r) for i, r in enumerate(csv.reader(io.StringIO(text)), start=1) if any(c.strip() for c in r)]
    if not rows:
        raise InputError("input has no rows")
    has_header = not _is_numeric_row(rows[0][1])
    if has_header:
        rows = rows[1:]
    values, weights = [], []
    for i, cells in rows:
        if len(cells) != 2:
            raise InputError(f"row {i}: expected 2 columns (value,weight), got {len(cells)}")
        values.append(_parse_number(cells[0], i, "value"))
        weights.append(_parse_number(cells[1], i, "weight"))
    if len(values) < 2:
        raise InputError(f"need at least 2 data rows, got {len(values)}")
    return WeightedSample(tuple(values), tuple(weights), tolerances), has_header


def parse_witness(text: str, tolerances: Tolerances = DEFAULT_TOLERANCES) -> WeightedSample:
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc}") from None
    if not isinstance(record, dict) or "values" not in record or "weights" not in record:
        raise InputError("a JSON input needs 'values' and 'weights' arrays")
    try:
        values = [float(v) for v in record["values"]]
        weights = [float(t) for t in record["weights"]]
    except (TypeError, ValueError):
        raise InputError("'values' and 'weights' must be arrays of numbers") from None
    return WeightedSample(tuple(values), tuple(weights), tolerances)


def load_input(path: str, tolerances: Tolerances = DEFAULT_TOLERANCES) -> InputDataset:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        text = raw.decode("utf-8-sig")
    except UnicodeDecodeError:
        raise InputError(f"{path} is not UTF-8 text") from None
    digest = hashlib.sha256(raw).hexdigest()
    if text.lstrip().startswith("{"):
        return InputDataset(parse_witness(text, tolerances), digest, path)
    sample, header = parse_csv(text, tolerances)
    return InputDataset(sample, digest, path, header)


# -- output ------------------------------------------------------------------

def _jsonable(obj: Any) -> Any:
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "+inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Window):
        return str(obj)
    if isinstance(obj, enum.Enum):
        return obj.value
    return obj


def render(payload: dict) -> str:
    body = dict(payload, schema_version=SCHEMA_VERSION)
    return json.dumps(_jsonable(body), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(payload: dict, output: Optional[str]) -> None:
    text = render(payload)
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _bound_dict(rep: bounds.BoundReport) -> dict:
    out = asdict(rep)
    out["window"] = str(rep.window) if rep.window is not None else None
    return out


# -- configuration -----------------------------------------------------------

def tolerances_from(args: argparse.Namespace) -> Tolerances:
    rel = DEFAULT_TOLERANCES.eps_ineq_rel
    env = os.environ.get(TOLERANCE_ENV)
    if env is not None and env.strip():
        try:
            rel = float(env)
        except ValueError:
            raise ConfigError(f"{TOLERANCE_ENV}={env!r} is not a number") from None
    if getattr(args, "tolerance", None) is not None:
        rel = args.tolerance
    try:
        return replace(DEFAULT_TOLERANCES, eps_ineq_rel=rel)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _r_list(text: str) -> list[float]:
    try:
        rs = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"--r expects comma-separated numbers, got {text!r}") from None
    if not rs:
        raise argparse.ArgumentTypeError("--r needs at least one value")
    return rs


def _resolve_kind(args: argparse.Namespace) -> str:
    if args.theorem is not None and args.kind is not None:
        raise ConfigError("give either a bound kind or --theorem, not both")
    if args.theorem is not None:
        if args.theorem not in THEOREM_ALIASES:
            raise ConfigError(f"--theorem must be one of {sorted(THEOREM_ALIASES)}, got {args.theorem}")
        return THEOREM_ALIASES[args.theorem]
    if args.kind is None:
        raise ConfigError("a bound kind (or --theorem) is required")
    return args.kind


def _windows(spec: str, n: int) -> list[Window]:
    if spec == "all":
        return [Window(k, j) for k in range(1, n + 1) for j in range(k, n + 1)]
    w = Window.parse(spec)
    w.validate(n)
    return [w]


def _split_ks(spec: str, sample: WeightedSample) -> list[int]:
    splits = admissible_split_indices(sample.weights, sample.tolerances.eps_sum)
    if spec == "auto":
        ks = [s.k for s in splits if s.holds]
        if not ks:
            failed = sorted({s.failed_condition for s in splits})
            raise ConfigError(f"no admissible split index k; failing conditions: {', '.join(failed)}")
        return ks
    try:
        k = int(spec)
    except ValueError:
        raise ConfigError(f"--k expects an integer or 'auto', got {spec!r}") from None
    return [k]


# -- commands ----------------------------------------------------------------

def _bound_reports(kind: str, args: argparse.Namespace, sample: WeightedSample) -> list[dict]:
    if kind == "samuelson":
        return [_bound_dict(bounds.samuelson_bound(sample))]
    if kind == "weighted_power":
        return [_bound_dict(bounds.weighted_power_bound(sample, args.p))]
    if kind == "fixed_coefficient":
        if not sample.has_equal_weights():
            raise ConfigError("the fixed-coefficient window bound requires equal weights 1/n")
        return [
            {"kind": kind, "j": j, "r_or_p": r,
             "bound": bounds.fixed_coefficient_window_offset(sample.values, j, r)}
            for r in args.r for j in range(1, sample.n)
        ]
    if kind == "uniform_convex":
        f = resolve_function(args.function) if args.function else make_square_on_line()
        moment, gap = bounds.uniform_convex_gap_bound(sample, f, args.m, args.p)
        return [_bound_dict(moment), _bound_dict(gap)]
    if kind == "modulus_gap":
        f = resolve_function(args.function) if args.function else make_square_on_line()
        phi = resolve_modulus(args.modulus)
        return [_bound_dict(bounds.modulus_gap_bound(sample, f, phi))]
    if kind == "window":
        out = []
        for r in args.r:
            f = None
            if args.chain == bounds.FUNCTION_GAP:
                f = resolve_function(args.function) if args.function else make_power_function(2 * r)
            for w in _windows(args.window, sample.n):
                out.append(_bound_dict(bounds.window_bound(sample, w, r, args.chain, f)))
        return out
    if kind == "prefix_profile":
        return [
            dict(asdict(row), kind=kind, r_or_p=r)
            for r in args.r for row in bounds.prefix_means_profile(sample, r)
        ]
    if kind == "js_prefix":
        return [
            _bound_dict(bounds.js_prefix_bound(sample, k, r))
            for r in args.r for k in _split_ks(args.k, sample)
        ]
    raise ConfigError(f"unknown bound kind {kind!r}")


def cmd_bound(args: argparse.Namespace) -> int:
    kind = _resolve_kind(args)
    data = load_input(args.input, tolerances_from(args))
    reports = _bound_reports(kind, args, data.sample)
    _emit(
        {
            "command": "bound",
            "input_sha256": data.digest,
            "regime": regime_label(data.sample.weights, data.sample.tolerances.eps_sum),
            "bounds": reports,
        },
        args.output,
    )
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    data = load_input(args.input, tolerances_from(args))
    report = verify_dataset(data.sample, args.r)
    _emit(dict(report.as_dict(), command="verify", input_sha256=data.digest), args.output)
    return EXIT_OK if report.all_pass else EXIT_VIOLATION


def cmd_fuzz(args: argparse.Namespace) -> int:
    config = FuzzConfig(
        master_seed=args.seed,
        trials=args.trials,
        n_range=(args.n_min, args.n_max),
        r_set=tuple(args.r),
        regime=args.regime,
        value_distribution=args.distribution,
        hill_steps=args.hill_steps,
        workers=args.workers,
        tolerances=tolerances_from(args),
    )
    report = fuzz_tightness(config)
    payload = dict(
        report.as_dict(),
        command="fuzz",
        config={
            "master_seed": config.master_seed,
            "trials": config.trials,
            "n_range": list(config.n_range),
            "r_set": list(config.r_set),
            "regime": config.regime,
            "value_distribution": config.value_distribution,
            "hill_steps": config.hill_steps,
        },
    )
    if report.violations:
        Path(args.witness_out).write_text(render(report.violations[0]), encoding="utf-8")
        payload["witness_file"] = args.witness_out
    _emit(payload, args.output)
    return EXIT_VIOLATION if report.violations else EXIT_OK


def cmd_check_weights(args: argparse.Namespace) -> int:
    data = load_input(args.input, tolerances_from(args))
    tol = data.sample.tolerances.eps_sum
    weights = data.sample.weights
    regime = validate_steffensen(weights, tol)
    splits = admissible_split_indices(weights, tol)
    _emit(
        {
            "command": "check-weights",
            "input_sha256": data.digest,
            "steffensen": regime.is_steffensen,
            "positive_simplex": regime.is_positive_simplex,
            "prefix_sums": list(regime.prefix_sums),
            "tail_sums": list(regime.tail_sums),
            "violations": [asdict(v) for v in regime.violations],
            "admissible_k": [s.k for s in splits if s.holds],
            "splits": [
                {"k": s.k, "holds": s.holds, "failed_condition": s.failed_condition,
                 "detail": [asdict(v) for v in s.detail]}
                for s in splits
            ],
        },
        args.output,
    )
    return EXIT_OK


def cmd_check_function(args: argparse.Namespace) -> int:
    payload: dict[str, Any] = {"command": "check-function", "name": args.name, "class": args.cls,
                               "grid_size": args.grid}
    if args.cls == "modulus":
        flags = check_modulus_properties(resolve_modulus(args.name), args.grid, args.span or 10.0)
        payload["flags"] = asdict(flags)
        _emit(payload, args.output)
        return EXIT_OK
    f = resolve_function(args.name)
    if args.cls == "superquadratic":
        cert = check_superquadratic(f, args.grid, args.span)
        verdict, witness = cert.verdict, cert.witness
        payload["min_interval_width"] = min(hi - lo for lo, hi in cert.c_intervals)
    else:
        phi = resolve_modulus(args.modulus)
        res = check_uniform_convexity(f, phi, args.grid, args.span)
        verdict, witness = res.verdict, res.witness
        payload.update(modulus=phi.label, min_slack=res.min_slack, max_abs_slack=res.max_abs_slack,
                       derivative_condition=check_derivative_modulus_condition(f, phi, args.grid, args.span))
    payload["verdict"] = verdict
    payload["witness"] = asdict(witness) if witness is not None else None
    _emit(payload, args.output)
    return EXIT_VIOLATION if verdict is Verdict.VIOLATED else EXIT_OK


# -- parser ------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse's default exit code is already 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="devbound", description="Certified bounds on deviations from a weighted mean.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p: argparse.ArgumentParser, needs_input: bool = True) -> None:
        if needs_input:
            p.add_argument("--input", required=True, help="CSV with value,weight rows, or a witness JSON file")
        p.add_argument("--output", help="write the JSON report here instead of stdout")
        p.add_argument("--tolerance", type=float, help=f"relative inequality slack (overrides {TOLERANCE_ENV})")

    p = sub.add_parser("bound", help="compute one family of bounds")
    common(p)
    p.add_argument("kind", nargs="?", choices=BOUND_KINDS)
    p.add_argument("--theorem", type=int, help="numeric alias for the bound kind")
    p.add_argument("--r", type=_r_list, default=[1.0], help="comma-separated r values (moment order 2r)")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--m", type=float, default=1.0, help="modulus scale for uniform_convex")
    p.add_argument("--window", default="all", help="'k:j' (1-based, inclusive) or 'all'")
    p.add_argument("--k", default="auto", help="split index for js_prefix, or 'auto'")
    p.add_argument("--chain", choices=bounds.CHAINS, default=bounds.RAW_MOMENT)
    p.add_argument("--function", help="registry name, e.g. power:3 or example1_exp")
    p.add_argument("--modulus", default="power:2", help="modulus registry name")
    p.set_defaults(handler=cmd_bound)

    p = sub.add_parser("verify", help="check every applicable bound against exact left sides")
    common(p)
    p.add_argument("--r", type=_r_list, default=[1.0, 2.0])
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("fuzz", help="seeded search for near-equality cases")
    common(p, needs_input=False)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--regime", choices=REGIMES, default="simplex")
    p.add_argument("--distribution", choices=DISTRIBUTIONS, default="uniform")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=12)
    p.add_argument("--r", type=_r_list, default=[1.0, 2.0])
    p.add_argument("--hill-steps", type=int, default=20)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--witness-out", default="devbound-witness.json", help="where a violating case is saved")
    p.set_defaults(handler=cmd_fuzz)

    p = sub.add_parser("check-weights", help="weight regime and admissible split indices")
    common(p)
    p.set_defaults(handler=cmd_check_weights)

    p = sub.add_parser("check-function", help="grid test of a function class")
    common(p, needs_input=False)
    p.add_argument("name", help="registry name, e.g. power:3")
    p.add_argument("--class", dest="cls", required=True, choices=("superquadratic", "uniform_convex", "modulus"))
    p.add_argument("--modulus", default="power:2")
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--span", type=float)
    p.set_defaults(handler=cmd_check_function)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_INVALID
    try:
        return args.handler(args)
    except BoundViolation as exc:
        print(f"devbound: violation: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (DevboundError, ValueError, OSError) as exc:
        print(f"devbound: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
