"""Command-line front end.

Exit codes: 0 success, 1 computational error, 2 usage error, 3 failed verify.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass

import numpy as np

from .analysis import (
    MAX_ENUMERATION_N,
    MAX_STATEVECTOR_N,
    CapacityReport,
    estimate_information,
    sweep,
)
from .protocol import BranchPolicy, ProtocolConfig
from . import verification

SUBCOMMANDS = ("capacity", "simulate", "sweep", "verify")
CSV_FIELDS = (
    "grid_value",
    "n",
    "angles",
    "closed_form_bits",
    "branch_average_bits",
    "monte_carlo_bits",
    "standard_error_bits",
    "success_probability",
)

_PI_TOKEN = re.compile(
    r"^(?P<sign>[+-]?)(?:(?P<k>\d+(?:\.\d*)?)\s*\*?\s*)?pi(?:\s*/\s*(?P<m>\d+(?:\.\d*)?))?$"
)


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunSpec:
    subcommand: str
    n: int
    angles: tuple[float, ...]
    trials: int = 0
    seed: int = 0
    branch_policy: str = BranchPolicy.ALL_PLUS.value
    output_format: str = "json"
    output_path: str | None = None
    vary: str | None = None
    grid: tuple[float, ...] = ()
    rejection: bool = False
    fully_empirical: bool = False


def parse_angle(token: str) -> float:
    """Radians as a decimal or a ``pi`` expression: ``pi``, ``pi/4``, ``3*pi/4``."""
    token = token.strip()
    m = _PI_TOKEN.match(token)
    if m:
        value = math.pi * float(m["k"] or 1) / float(m["m"] or 1)
        return -value if m["sign"] == "-" else value
    try:
        value = float(token)
    except ValueError:
        raise UsageError(f"cannot parse angle {token!r}") from None
    if not math.isfinite(value):
        raise UsageError(f"angle {token!r} is not finite")
    return value


def _parse_angle_list(text: str) -> list[float]:
    return [parse_angle(t) for t in text.split(",") if t.strip()]


def _random_angles(n: int, seed: int) -> tuple[float, ...]:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(2,)))
    return tuple(float(x) for x in rng.uniform(0.05, math.pi / 2 - 0.05, n))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghzdense", description="Dense coding over a GHZ channel."
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--n", type=int, help="number of intermediate parties N")
        p.add_argument("--angles", help="comma-separated radians, pi tokens allowed")
        p.add_argument("--trials", type=int, default=0)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument(
            "--branch-policy",
            choices=[b.value for b in BranchPolicy],
            default=BranchPolicy.ALL_PLUS.value,
        )
        p.add_argument("--format", dest="output_format", choices=("json", "csv"), default="json")
        p.add_argument("--output", dest="output_path")
        p.add_argument("--rejection", action="store_true", help="rejection-sample the cascade")
        p.add_argument(
            "--fully-empirical", action="store_true", help="estimate failure-branch MI from counts"
        )
        if name == "sweep":
            p.add_argument("--vary", choices=("N", "common-angle"), required=True)
            p.add_argument("--grid", required=True, help="comma-separated values or a:b range for N")
    return parser


def _parse_grid(vary: str, text: str) -> tuple[float, ...]:
    if vary == "N":
        if ":" in text:
            lo, hi = text.split(":", 1)
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [int(v) for v in text.split(",") if v.strip()]
        if not values or min(values) < 1:
            raise UsageError("N grid must be non-empty positive integers")
        return tuple(values)
    values = _parse_angle_list(text)
    if not values:
        raise UsageError("angle grid is empty")
    return tuple(values)


def _resolve(ns: argparse.Namespace) -> RunSpec:
    cmd = ns.subcommand
    if ns.trials < 0:
        raise UsageError("--trials must be >= 0")
    if not 0 <= ns.seed < 2**64:
        raise UsageError("--seed must be a 64-bit unsigned integer")
    if cmd in ("capacity", "verify") and (ns.trials or ns.rejection or ns.fully_empirical):
        raise UsageError(f"{cmd} does not simulate; drop --trials/--rejection/--fully-empirical")
    if ns.angles is None:
        raise UsageError("--angles is required")

    vary = getattr(ns, "vary", None)
    grid: tuple[float, ...] = ()
    if cmd == "sweep":
        try:
            grid = _parse_grid(vary, ns.grid)
        except ValueError:
            raise UsageError(f"cannot parse grid {ns.grid!r}") from None
        if vary == "N":
            if ns.n is not None:
                raise UsageError("--n conflicts with --vary N")
            n = 1
        else:
            if ns.n is None:
                raise UsageError("--n is required")
            n = ns.n
    else:
        if ns.n is None:
            raise UsageError("--n is required")
        n = ns.n
    if n < 1:
        raise UsageError("--n must be >= 1")

    if ns.angles.strip() == "random":
        if cmd != "verify":
            raise UsageError("--angles random is only accepted by verify")
        angles = _random_angles(n, ns.seed)
    else:
        angles = tuple(_parse_angle_list(ns.angles))
        if cmd == "sweep" and vary == "N":
            if len(angles) != 1:
                raise UsageError("--vary N takes a single common angle")
        elif cmd == "sweep" and vary == "common-angle":
            angles = (grid[0],) * n
        elif len(angles) == 1:
            angles = angles * n
        elif len(angles) != n:
            raise UsageError(f"--n {n} but {len(angles)} angles given")

    uses_statevector = cmd == "verify" or ns.rejection or ns.branch_policy == "sample"
    largest_n = max(grid) if cmd == "sweep" and vary == "N" else n
    if uses_statevector and largest_n > MAX_STATEVECTOR_N:
        raise UsageError(f"state-vector simulation is capped at N={MAX_STATEVECTOR_N}")
    if cmd == "simulate" and n > MAX_STATEVECTOR_N:
        raise UsageError(f"simulate is capped at N={MAX_STATEVECTOR_N}")
    if ns.branch_policy == "sample" and not ns.rejection and cmd in ("simulate", "sweep"):
        raise UsageError("--branch-policy sample needs --rejection (trials condition on all-plus)")

    return RunSpec(
        subcommand=cmd,
        n=n,
        angles=angles,
        trials=ns.trials,
        seed=ns.seed,
        branch_policy=ns.branch_policy,
        output_format=ns.output_format,
        output_path=ns.output_path,
        vary=vary,
        grid=grid,
        rejection=ns.rejection,
        fully_empirical=ns.fully_empirical,
    )


def parse_args(argv: list[str]) -> RunSpec:
    """Parse ``argv``; exits with status 2 and a one-line diagnostic on failure."""
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        return _resolve(ns)
    except UsageError as exc:
        parser.exit(2, f"ghzdense: error: {exc}\n")


def _config(spec: RunSpec) -> ProtocolConfig:
    return ProtocolConfig(spec.n, spec.angles, spec.branch_policy, spec.trials, spec.seed)


def _csv_row(grid_value, report: CapacityReport) -> dict:
    d = report.to_dict()
    return {
        "grid_value": "" if grid_value is None else repr(grid_value),
        "n": report.config.n_intermediate,
        "angles": " ".join(repr(a) for a in report.config.angles),
        **{k: "" if d[k] is None else repr(d[k]) for k in CSV_FIELDS[3:]},
    }


def _render_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _render_json(obj: dict) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _emit(text: str, spec: RunSpec) -> None:
    if spec.output_path:
        with open(spec.output_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _estimate_kwargs(spec: RunSpec) -> dict:
    return {"rejection": spec.rejection, "fully_empirical": spec.fully_empirical}


def run(spec: RunSpec) -> int:
    """Execute a parsed command and write its report; returns the exit code."""
    if spec.subcommand == "verify":
        checks = verification.run_all(spec.angles)
        passed = all(c.passed for c in checks)
        text = _render_json(
            {
                "config": {"n": spec.n, "angles": list(spec.angles), "seed": spec.seed},
                "passed": passed,
                "checks": [c.to_dict() for c in checks],
            }
        )
        _emit(text, spec)
        return 0 if passed else 3

    if spec.subcommand == "sweep":
        base = ProtocolConfig(
            spec.n, spec.angles, spec.branch_policy, spec.trials, spec.seed
        )
        reports = sweep(base, spec.vary, spec.grid, **_estimate_kwargs(spec))
        if spec.output_format == "csv":
            text = _render_csv([_csv_row(g, r) for g, r in zip(spec.grid, reports)])
        else:
            text = _render_json(
                {
                    "config": base.to_dict(),
                    "vary": spec.vary,
                    "grid": list(spec.grid),
                    "rows": [r.to_dict() for r in reports],
                }
            )
        _emit(text, spec)
        return 0

    config = _config(spec)
    if spec.subcommand == "capacity":
        config = ProtocolConfig(spec.n, spec.angles, spec.branch_policy, 0, spec.seed)
        if spec.n > MAX_ENUMERATION_N and spec.branch_policy == "enumerate-all":
            raise ValueError(f"enumerate-all is limited to N <= {MAX_ENUMERATION_N}")
    report = estimate_information(config, **_estimate_kwargs(spec))
    if spec.output_format == "csv":
        text = _render_csv([_csv_row(None, report)])
    else:
        text = _render_json(report.to_dict())
    _emit(text, spec)
    return 0


def main(argv: list[str] | None = None) -> int:
    spec = parse_args(sys.argv[1:] if argv is None else argv)
    try:
        return run(spec)
    except (ValueError, RuntimeError, OverflowError, MemoryError) as exc:
        print(f"ghzdense: error: {exc}", file=sys.stderr)
        return 1
