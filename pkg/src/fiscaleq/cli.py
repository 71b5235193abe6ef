"""Command-line entry point.

Exit codes:
    0  success
    1  usage, file or config-parse error
    2  inadmissible scenario (validation, target below baseline, bad dose)
    3  internal inconsistency (two algebraic routes disagreed)
    4  verification failure (a theorem claim or Jacobian cross-check failed)
    5  oracle mismatch or oracle solver failure
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .closed_form import check_propositions, solve_equilibrium
from .errors import (
    EmptyGrid,
    InadmissibleDose,
    InadmissibleParameters,
    InternalInconsistency,
    NoConvergence,
    NonInteriorDemand,
    RootNotBracketed,
    TargetBelowBaseline,
)
from .experiments import AXES, OUTPUT_CHOICES, SweepSpec, compare_policies, fmt, run_sweep
from .model import FLAT_KEYS, SCENARIO_B, ScenarioConfig, ValidatedScenario, validate
from .oracle import SolverSettings, oracle_deltas, random_initial_prices, solve_fixed_point, symmetry_gap
from .sampling import sample_scenarios
from .statics import analytic_jacobian, certify_theorems, finite_difference_jacobian, jacobian_discrepancy

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_INCONSISTENT, EXIT_CLAIM, EXIT_ORACLE = range(6)
ORACLE_RTOL = 1e-8

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {key: {"type": "number"} for key in FLAT_KEYS},
    "required": list(FLAT_KEYS),
    "additionalProperties": False,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_IO, f"{self.prog}: error: {message}\n")


def load_config(path: str | Path) -> ScenarioConfig:
    """Read and schema-check a scenario JSON file (no model validation)."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise UsageError(f"config {path} does not match the schema: {exc.message}") from exc
    return ScenarioConfig.from_flat(raw)


def _load_scenario(path) -> ValidatedScenario:
    return validate(load_config(path))


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(_plain(obj), indent=2) + "\n")


def _plain(obj):
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_solve(args) -> int:
    s = _load_scenario(args.config)
    eq = solve_equilibrium(s)
    report = check_propositions(s, eq)
    if args.format == "csv":
        row = {**{k: v for k, v in eq.as_dict().items() if k != "flags"}, **eq.as_dict()["flags"],
               **report.as_dict()}
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(row.keys())
        writer.writerow(fmt(v) for v in row.values())
        sys.stdout.write(buf.getvalue())
    else:
        _emit({"scenario": s.to_flat(), "equilibrium": eq.as_dict(),
               "propositions": report.as_dict()})
    return EXIT_OK


def cmd_partials(args) -> int:
    s = _load_scenario(args.config)
    out = {"scenario": s.to_flat()}
    status = EXIT_OK
    if args.method in ("analytic", "both"):
        out["analytic"] = analytic_jacobian(s).as_dict()
    if args.method in ("fd", "both"):
        fd = finite_difference_jacobian(s, args.h)
        out["finite_difference"] = fd.as_dict()
        out["finite_difference_method"] = fd.method_tag
    if args.method == "both":
        worst, agree = jacobian_discrepancy(analytic_jacobian(s), fd)
        out["max_relative_discrepancy"] = worst
        out["agree"] = agree
        if not agree:
            status = EXIT_CLAIM
    _emit(out)
    return status


def cmd_verify(args) -> int:
    if args.sample is not None:
        if args.sample <= 0:
            raise UsageError("--sample must be a positive integer")
        scenarios = sample_scenarios(args.sample, args.seed)
    elif args.config:
        scenarios = [_load_scenario(args.config)]
    else:
        raise UsageError("verify needs a config path or --sample K")

    failed, tallies, worst, jac_bad = [], {}, 0.0, 0
    reports = []
    for i, s in enumerate(scenarios):
        report = certify_theorems(s, args.h)
        reports.append(report)
        worst = max(worst, report.jacobian_max_discrepancy)
        jac_bad += not report.jacobians_agree
        for c in report.claims:
            t = tallies.setdefault(c.theorem, {"checked": 0, "passed": 0, "not_applicable": 0})
            if not c.applicable:
                t["not_applicable"] += 1
                continue
            t["checked"] += 1
            t["passed"] += c.passed
        if not report.passed or not report.jacobians_agree:
            failed.append({"index": i, "scenario": s.to_flat(),
                           "claims": [c.as_dict() for c in report.failures],
                           "jacobian_max_discrepancy": report.jacobian_max_discrepancy})
    n_fail = sum(len(f["claims"]) for f in failed)
    if args.sample is None:
        out = {"scenario": scenarios[0].to_flat(), **reports[0].as_dict()}
    else:
        out = {"sample": args.sample, "seed": args.seed, "claim_failures": n_fail,
               "jacobian_failures": jac_bad, "max_jacobian_discrepancy": worst,
               "theorems": tallies, "failed": failed}
    _emit(out)
    return EXIT_CLAIM if failed else EXIT_OK


def cmd_oracle(args) -> int:
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    s = _load_scenario(args.config)
    eq = solve_equilibrium(s)
    settings = SolverSettings(tol=args.tol, damping=args.damping, max_iter=args.max_iter,
                              strict_interior=args.strict)
    init = random_initial_prices(args.n, s, np.random.default_rng(args.seed))
    base = {"scenario": s.to_flat(), "n": args.n, "seed": args.seed,
            "closed_form": {k: getattr(eq, k) for k in ("p", "q", "L", "Pi")}}
    try:
        e = solve_fixed_point(init, s, settings)
    except (NoConvergence, NonInteriorDemand, RootNotBracketed) as exc:
        _emit({**base, "status": type(exc).__name__, "message": str(exc)})
        return EXIT_ORACLE
    deltas = oracle_deltas(e, eq)
    gap = symmetry_gap(e)
    ok = max(deltas.values()) <= ORACLE_RTOL and gap < ORACLE_RTOL
    _emit({
        **base,
        "status": "match" if ok else "mismatch",
        "oracle": {"p": float(np.mean(e.prices)), "q": float(np.mean(e.quantities)),
                   "L": e.L, "Pi": float(np.mean(e.profits))},
        "relative_deltas": deltas,
        "symmetry_gap": gap,
        "iterations": e.iterations,
        "rejected_iterates": e.rejected_iterates,
        "employment_residual": e.employment_residual(),
        "budget_residual": e.budget_residual(),
        "second_order_violations": e.soc_violations,
    })
    return EXIT_OK if ok else EXIT_ORACLE


def _parse_grid(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --grid value: {exc}") from exc


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    outputs = tuple(o for o in args.outputs.split(",") if o)
    try:
        spec = SweepSpec(config, args.axis, tuple(_parse_grid(args.grid)), outputs)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    try:
        result = run_sweep(spec, workers=args.workers)
    except EmptyGrid as exc:
        raise UsageError(str(exc)) from exc
    if args.out:
        manifest = result.write(args.out, args.manifest)
        sys.stderr.write(f"wrote {args.out} and {manifest}\n")
    else:
        sys.stdout.write(result.to_csv())
    return EXIT_OK


def cmd_compare(args) -> int:
    config = load_config(args.config)
    result = compare_policies(config, args.target_L)
    out = result.as_dict()
    if args.out:
        Path(args.out).write_text(json.dumps(out, indent=2) + "\n", encoding="utf-8")
    _emit(out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Wiring
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fiscaleq", description="Monopolistic-competition equilibrium with fiscal "
                     "policy levers: closed forms, comparative statics and a discrete-firm oracle.",
                     epilog="exit codes: 0 ok, 1 usage/file/schema, 2 inadmissible, 3 internal "
                     "inconsistency, 4 verification failure, 5 oracle failure")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--quote-defaults", action="store_true",
                        help="print the canonical example scenario as a config file and exit")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("solve", help="closed-form symmetric equilibrium")
    p.add_argument("config")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("partials", help="policy Jacobian")
    p.add_argument("config")
    p.add_argument("--method", choices=("analytic", "fd", "both"), default="both")
    p.add_argument("--h", type=float, default=1e-6, help="relative finite-difference step")
    p.set_defaults(func=cmd_partials)

    p = sub.add_parser("verify", help="certify the policy sign claims")
    p.add_argument("config", nargs="?")
    p.add_argument("--sample", type=int, help="certify K random admissible scenarios instead")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--h", type=float, default=1e-6)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="discrete-firm fixed point vs closed form")
    p.add_argument("config")
    p.add_argument("--n", type=int, default=64, help="number of firms")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--strict", action="store_true",
                   help="fail on any iterate with non-interior demand")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sweep", help="one-axis parameter sweep to CSV")
    p.add_argument("config")
    p.add_argument("--axis", required=True, choices=AXES)
    p.add_argument("--grid", required=True, help="comma-separated values")
    p.add_argument("--outputs", default="p,q,L,Pi",
                   help=f"comma-separated subset of {','.join(OUTPUT_CHOICES)}")
    p.add_argument("--out", help="CSV path (stdout if omitted; manifest written next to it)")
    p.add_argument("--manifest", help="manifest path (default: <out>.manifest.json)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="purchase vs public-employment dose for a target L")
    p.add_argument("config")
    p.add_argument("--target-L", dest="target_L", type=float, required=True)
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.quote_defaults:
        sys.stdout.write(json.dumps(SCENARIO_B.to_flat(), indent=2) + "\n")
        return EXIT_OK
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_IO
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_IO
    except InadmissibleParameters as exc:
        sys.stderr.write("error: inadmissible scenario:\n")
        for v in exc.violations:
            sys.stderr.write(f"  - {v}\n")
        return EXIT_INVALID
    except (TargetBelowBaseline, InadmissibleDose) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID
    except InternalInconsistency as exc:
        sys.stderr.write(f"internal inconsistency: {exc}\n")
        return EXIT_INCONSISTENT


if __name__ == "__main__":
    sys.exit(main())
