"""Command-line interface.

Subcommands cover the full workflow: construct a sequence set for target
rates, check an existing set's invariance properties, simulate one
receiver run, sweep all shift vectors, search for minimal periods, and
emit rate-region/baseline tables for plotting.

Exit codes form the scripting contract:

    0  success, or the command's verdict is true
    1  the verdict is false (a witness is in the output)
    2  usage or configuration errors
    3  work-budget refusal (estimate in the error message)

Reports are JSON (CSV for the two table commands) written to stdout or
--output, deterministic byte-for-byte for a fixed seed and config.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from fractions import Fraction

from .budget import resolve_budget
from .channel import default_horizon, sic_receive, simulate_trace, UserConfig
from .construction import (
    ConstructionLayout,
    enumerate_plans,
    plan_duty_factors,
    parse_rate,
)
from .correlation import (
    check_si_witness_equivalence,
    find_si_violation,
    is_ti_set,
    verify_complement_identity,
    verify_shift_sum_identity,
)
from .errors import (
    AmbiguousIdentificationError,
    BudgetExceededError,
    ToolkitError,
)
from .sequences import load_sequence_file, sequence_set_to_obj
from .verification import (
    baseline_throughput,
    codings_for_rates,
    min_period_search,
    region_boundary,
    sweep_all_shifts,
)

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def _parse_rates(text: str) -> tuple[Fraction, ...]:
    return tuple(parse_rate(part) for part in text.split(","))


def _parse_ints(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError as exc:
        raise ToolkitError(f"expected comma-separated integers, got {text!r}") from exc


def _emit(text: str, output: str | None) -> None:
    if output is None or output == "-":
        sys.stdout.write(text)
    else:
        with open(output, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit_json(obj: object, output: str | None) -> None:
    _emit(json.dumps(obj, indent=2, sort_keys=True) + "\n", output)


def _emit_csv(rows: list[list], output: str | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    _emit(buf.getvalue(), output)


def _plan_path(out: str) -> str:
    if out.endswith(".json"):
        return out[: -len(".json")] + ".plan.json"
    return out + ".plan.json"


def _cmd_construct(args: argparse.Namespace) -> int:
    rates = _parse_rates(args.rates)
    if args.perm:
        plan = plan_duty_factors(rates, _parse_ints(args.perm))
    else:
        plan = enumerate_plans(rates)[0]
    if args.fill == "random":
        layout = ConstructionLayout("seeded-random", seed=args.seed)
    else:
        layout = ConstructionLayout()
    from .construction import build_si_set

    sset = build_si_set(plan.duty_factors, layout, budget=args.budget)
    seq_obj = sequence_set_to_obj(sset)
    plan_obj = plan.to_obj()
    if args.output and args.output != "-":
        _emit_json(seq_obj, args.output)
        _emit_json(plan_obj, _plan_path(args.output))
        _emit_json(
            {
                "period": sset.period,
                "permutation": list(plan.permutation),
                "duty_factors": [str(p) for p in plan.duty_factors],
                "sequence_file": args.output,
                "plan_file": _plan_path(args.output),
            },
            None,
        )
    else:
        _emit_json({**seq_obj, "plan": plan_obj}, None)
    return EXIT_OK


def _cmd_check(args: argparse.Namespace) -> int:
    sset = load_sequence_file(args.sequence_file)
    violation = find_si_violation(
        sset, budget=args.budget, samples=args.samples, seed=args.seed
    )
    si = violation is None
    ti = is_ti_set(sset, budget=args.budget, samples=args.samples, seed=args.seed)
    full = tuple(range(1, sset.size + 1))
    ones = (1,) * sset.size
    report = {
        "period": sset.period,
        "num_users": sset.size,
        "weights": list(sset.weights),
        "duty_factors": [str(p) for p in sset.duty_factors],
        "shift_invariant": si,
        "throughput_invariant": ti,
        "si_violation": None,
        "sampled": args.samples is not None,
        "selftests": {
            "shift_sum_identity": verify_shift_sum_identity(
                sset, full, ones, budget=args.budget
            ),
            "complement_identity": verify_complement_identity(
                sset, full, ones, full[-1], budget=args.budget
            ),
        },
    }
    if violation is not None:
        report["si_violation"] = {
            "subset": list(violation.subset),
            "marks": list(violation.marks),
            "shifts": list(violation.shifts),
            "value": violation.value,
            "expected": violation.expected,
        }
    if not args.skip_witness:
        eq = check_si_witness_equivalence(sset, budget=args.budget)
        report["witness_equivalence"] = {
            "witness_marks": list(eq.witness_marks) if eq.witness_marks else None,
            "fully_invariant": eq.fully_invariant,
            "consistent": eq.consistent,
        }
    _emit_json(report, args.output)
    return EXIT_OK if si else EXIT_FALSE


def _cmd_simulate(args: argparse.Namespace) -> int:
    sset = load_sequence_file(args.sequence_file)
    rates = _parse_rates(args.rates)
    codings = codings_for_rates(sset, rates, packet_size=args.packet_size)
    M = sset.size
    L = sset.period
    if args.shifts is not None:
        shifts = _parse_ints(args.shifts)
        if len(shifts) != M:
            raise ToolkitError(f"need {M} shifts, got {len(shifts)}")
        shifts = tuple(t % L for t in shifts)
    elif args.random_shifts:
        rng = random.Random(args.seed)
        shifts = tuple(rng.randrange(L) for _ in range(M))
    else:
        shifts = (0,) * M
    users = [
        UserConfig(seq, coding, shift)
        for seq, coding, shift in zip(sset, codings, shifts)
    ]
    W, horizon = default_horizon(M, L, args.periods)
    trace = simulate_trace(
        users, horizon, concrete=args.concrete, payload_seed=args.payload_seed
    )
    if args.dump_trace:
        rows = trace.to_jsonl_rows(genie=args.genie_dump)
        with open(args.dump_trace, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
    try:
        report = sic_receive(trace, users, mode=args.mode, measure_periods=W)
    except AmbiguousIdentificationError as exc:
        _emit_json(
            {
                "success": False,
                "mode": args.mode,
                "error": "ambiguous-identification",
                "num_candidates": len(exc.candidates),
                "candidates": [list(c) for c in exc.candidates[:64]],
                "shifts": list(shifts),
            },
            args.output,
        )
        return EXIT_FALSE
    obj = report.to_obj()
    obj["shifts"] = list(shifts)
    obj["horizon_slots"] = horizon
    obj["concrete"] = args.concrete
    _emit_json(obj, args.output)
    return EXIT_OK if report.success else EXIT_FALSE


def _cmd_sweep(args: argparse.Namespace) -> int:
    sset = load_sequence_file(args.sequence_file)
    rates = _parse_rates(args.rates)
    codings = codings_for_rates(sset, rates)
    report = sweep_all_shifts(
        sset,
        codings,
        rates,
        budget=args.budget,
        jobs=args.jobs,
        sample=args.sample,
        seed=args.seed,
    )
    _emit_json(report.to_obj(include_outcomes=True if args.full else None), args.output)
    if report.verdict is False:
        return EXIT_FALSE
    return EXIT_OK


def _cmd_search_min_period(args: argparse.Namespace) -> int:
    rates = _parse_rates(args.rates)
    report = min_period_search(
        rates, args.l_max, prune=not args.no_prune, budget=args.budget
    )
    _emit_json(report.to_obj(), args.output)
    return EXIT_OK if report.found_period is not None else EXIT_FALSE


def _cmd_region(args: argparse.Namespace) -> int:
    data = region_boundary(args.users, args.resolution)
    if args.format == "json":
        _emit_json(data.to_obj(), args.output)
    else:
        _emit_csv(data.csv_rows(), args.output)
    return EXIT_OK


def _cmd_baseline(args: argparse.Namespace) -> int:
    sset = load_sequence_file(args.sequence_file)
    report = baseline_throughput(sset, budget=args.budget)
    if args.format == "json":
        _emit_json(report.to_obj(), args.output)
    else:
        _emit_csv(report.csv_rows(), args.output)
    return EXIT_OK


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("-o", "--output", default=None,
                     help="output path ('-' or omitted: stdout)")
    sub.add_argument("--budget", type=int, default=None,
                     help=f"work-unit budget (default {resolve_budget()} "
                          "or COLLIDE_SIC_BUDGET)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="collide-sic",
        description="Construct, check, simulate, and verify protocol "
                    "sequence sets for the slotted collision channel with "
                    "interference cancellation.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("construct", help="build a sequence set for target rates")
    p.add_argument("--rates", required=True, help="comma-separated rationals, sum 1")
    p.add_argument("--perm", default=None,
                   help="decode order as comma-separated user ids (default: "
                        "shortest-period order)")
    p.add_argument("--fill", choices=["canonical", "random"], default="canonical")
    p.add_argument("--seed", type=int, default=0, help="seed for --fill random")
    _add_common(p)
    p.set_defaults(func=_cmd_construct)

    p = subs.add_parser("check", help="invariance/property report for a set")
    p.add_argument("sequence_file")
    p.add_argument("--samples", type=int, default=None,
                   help="sampled fallback when exhaustive checks exceed the budget")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--skip-witness", action="store_true",
                   help="skip the witness-equivalence scan (cheapest report)")
    _add_common(p)
    p.set_defaults(func=_cmd_check)

    p = subs.add_parser("simulate", help="one receiver run over a simulated trace")
    p.add_argument("sequence_file")
    p.add_argument("--rates", required=True)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--shifts", default=None, help="comma-separated start slots")
    group.add_argument("--random-shifts", action="store_true")
    p.add_argument("--seed", type=int, default=0, help="seed for --random-shifts")
    p.add_argument("--mode", choices=["genie", "blind"], default="genie")
    p.add_argument("--periods", type=int, default=None,
                   help="observation window periods (default max(4, users+2))")
    p.add_argument("--concrete", action="store_true",
                   help="carry real payload bytes end to end")
    p.add_argument("--packet-size", type=int, default=1)
    p.add_argument("--payload-seed", type=int, default=0)
    p.add_argument("--dump-trace", default=None,
                   help="write the slot trace as JSON lines to this path")
    p.add_argument("--genie-dump", action="store_true",
                   help="include ground-truth contributors in the trace dump")
    _add_common(p)
    p.set_defaults(func=_cmd_simulate)

    p = subs.add_parser("sweep", help="steady-state verdict over all shift vectors")
    p.add_argument("sequence_file")
    p.add_argument("--rates", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--sample", type=int, default=None,
                   help="evaluate this many random vectors instead (falsify only)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--full", action="store_true",
                   help="always include per-class outcomes in the report")
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)

    p = subs.add_parser("search-min-period",
                        help="smallest period achieving the rates")
    p.add_argument("--rates", required=True)
    p.add_argument("--l-max", type=int, required=True)
    p.add_argument("--no-prune", action="store_true",
                   help="enumerate every sequence tuple (tiny periods only)")
    _add_common(p)
    p.set_defaults(func=_cmd_search_min_period)

    p = subs.add_parser("region", help="rate-region boundary table")
    p.add_argument("--users", type=int, required=True)
    p.add_argument("--resolution", type=int, default=100)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    _add_common(p)
    p.set_defaults(func=_cmd_region)

    p = subs.add_parser("baseline", help="no-cancellation throughput table")
    p.add_argument("sequence_file")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    _add_common(p)
    p.set_defaults(func=_cmd_baseline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
