"""Command-line front end.

Exit codes: 0 success, 1 validation or assertion failure, 2 I/O or
unparseable input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Callable, Sequence

from costparity.corpus import case_map, run_all
from costparity.cost_model import (
    CostSchedule,
    ScheduleError,
    baseline_from_dict,
    breakeven_crossover,
    canonical_schedule,
    derive_schedule,
    project_schedule,
    schedule_from_dict,
    trends_from_dict,
)
from costparity.placement import (
    PlacementError,
    Source,
    evaluate_assignment,
    iter_nodes,
    node_output_bytes,
    optimize,
    plan_from_dict,
    ship_everything_assignment,
)
from costparity.quantities import Kind, format_quantity
from costparity.workload import (
    CATEGORIES,
    Mobility,
    TaskError,
    classify,
    evaluate,
    task_from_dict,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def load_json(path: str) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON: {exc}", EXIT_IO) from None


def _validated(path: str, parse: Callable[[Any], Any]) -> Any:
    doc = load_json(path)
    try:
        return parse(doc)
    except (ScheduleError, TaskError, PlacementError, ValueError) as exc:
        raise CliError(f"{path}: {exc}", EXIT_INVALID) from None


def _schedule_arg(path: str | None) -> CostSchedule:
    if path is None:
        return canonical_schedule()
    return _validated(path, schedule_from_dict)


def money(value: float) -> str:
    """3 significant figures; micro-dollars get the µ$ suffix, dollars get cents."""
    if value == 0:
        return "$0"
    if abs(value) < 1e-3:
        return format_quantity(value, Kind.MONEY, digits=3)
    if abs(value) < 1:
        return f"${value:#.3g}"
    return f"${value:,.2f}"


def _count(value: float) -> str:
    return format_quantity(value, Kind.INSTRUCTIONS, digits=3, sep=" ")


def _instr_per_byte(value: float) -> str:
    return f"{value:,.0f}" if value >= 1 else f"{value:.3g}"


def _emit_json(doc: Any) -> None:
    json.dump(doc, sys.stdout, indent=2, sort_keys=True, ensure_ascii=False)
    sys.stdout.write("\n")


# label, field, kind of the unit one dollar buys, unit suffix
_SCHEDULE_ROWS = [
    ("WAN", "usd_per_wan_byte", "bytes", ""),
    ("LAN", "usd_per_lan_byte", "bytes", ""),
    ("Instructions", "usd_per_instruction", "count", "instructions"),
    ("CPU time", "usd_per_cpu_hour", "count", "cpu-hours"),
    ("Disk space", "usd_per_disk_byte", "bytes", ""),
    ("DB accesses", "usd_per_db_access", "count", "accesses"),
    ("Disk bandwidth", "usd_per_disk_bw_byte", "bytes", ""),
    ("Energy", "usd_per_watt_hour", "energy", "Wh"),
]


def _per_dollar(price: float, kind: str, unit: str) -> str:
    if price == 0:
        return "unlimited"
    amount = 1.0 / price
    if kind == "bytes":
        return format_quantity(amount, Kind.BYTES, digits=3, sep=" ")
    if kind == "energy" and amount >= 1e3:
        return f"{amount / 1e3:.3g} kWh"
    text = _count(amount)
    return f"{text} {unit}".replace("  ", " ")


def render_schedule(s: CostSchedule, reference: CostSchedule | None = None) -> str:
    lines = []
    for label, name, kind, unit in _SCHEDULE_ROWS:
        price = getattr(s, name)
        row = f"{label}: {_per_dollar(price, kind, unit)} per $1"
        row = f"{row:<42}({price:.3g} $/unit)"
        if reference is not None and getattr(reference, name) > 0:
            row += f"  x{price / getattr(reference, name):.2f} vs canonical"
        lines.append(row)
    lines.append(f"Effective rate: {_count(s.effective_instructions_per_cpu_hour)} instructions per cpu-hour")
    return "\n".join(lines)


def cmd_schedule(args: argparse.Namespace) -> int:
    if args.file and args.derive:
        raise CliError("--file and --derive are mutually exclusive", EXIT_INVALID)
    if args.derive and not args.baseline:
        raise CliError("--derive needs --baseline PATH", EXIT_INVALID)
    if args.baseline and not args.derive:
        raise CliError("--baseline is only valid with --derive", EXIT_INVALID)
    if (args.project is None) != (args.trends is None):
        raise CliError("--project and --trends must be given together", EXIT_INVALID)

    reference = None
    if args.derive:
        schedule = derive_schedule(_validated(args.baseline, baseline_from_dict))
        reference = canonical_schedule()
    else:
        schedule = _schedule_arg(args.file)
    if args.project is not None:
        if args.project < 0:
            raise CliError("--project must be >= 0", EXIT_INVALID)
        trends = _validated(args.trends, trends_from_dict)
        try:
            schedule = project_schedule(schedule, args.project, trends)
        except ScheduleError as exc:
            raise CliError(str(exc), EXIT_INVALID) from None

    if args.json:
        doc: dict[str, Any] = {"schedule": schedule.to_dict()}
        if reference is not None:
            doc["ratio_to_canonical"] = {
                k: v / getattr(reference, k) for k, v in schedule.to_dict().items() if getattr(reference, k)
            }
        _emit_json(doc)
    else:
        print(render_schedule(schedule, reference))
    return EXIT_OK


def cmd_task(args: argparse.Namespace) -> int:
    task = _validated(args.task, task_from_dict)
    schedule = _schedule_arg(args.schedule)
    if args.action == "cost":
        breakdown = evaluate(task, schedule)
        if args.json:
            _emit_json({"name": task.name, **breakdown.to_dict()})
            return EXIT_OK
        print(f"Task: {task.name}")
        for c in CATEGORIES:
            print(f"  {c:<10} {money(breakdown.category(c)):>14}  {breakdown.fractions[c]:6.1%}")
        print(f"  {'total':<10} {money(breakdown.total):>14}")
        return EXIT_OK

    try:
        report = classify(task, schedule)
    except (TaskError, ScheduleError) as exc:
        raise CliError(str(exc), EXIT_INVALID) from None
    if args.json:
        _emit_json({"name": task.name, **report.to_dict()})
        return EXIT_OK
    value = _instr_per_byte(report.intensity)
    low = _instr_per_byte(report.breakeven_threshold)
    high = _instr_per_byte(report.attractive_threshold)
    if report.mobility is Mobility.STAY_HOME:
        verdict = f"StayHome ({value} instr/B < {low})"
    elif report.mobility is Mobility.BREAK_EVEN:
        verdict = f"BreakEven ({low} <= {value} instr/B < {high})"
    else:
        verdict = f"Mobile ({value} instr/B >= {high})"
    print(f"Task: {task.name}")
    print(verdict)
    if report.cluster_advisory:
        print("Advisory: needs a tightly connected cluster; export to a cluster, not the WAN grid")
    return EXIT_OK


def cmd_place(args: argparse.Namespace) -> int:
    schedule = _schedule_arg(args.schedule)
    document = _validated(args.plan, lambda d: plan_from_dict(d, schedule.usd_per_wan_byte))
    try:
        result = optimize(document.plan, document.sites, document.links)
    except PlacementError as exc:
        raise CliError(str(exc), EXIT_INVALID) from None
    if args.json:
        _emit_json(result.to_dict())
        return EXIT_OK

    print("Assignment:")
    for op, site in sorted(result.assignment.items()):
        print(f"  {op} -> {site}")
    print("Per node:")
    width = max(len(n) for n in result.per_node)
    site_width = max(len(c.site) for c in result.per_node.values())
    for node_id, cost in sorted(result.per_node.items()):
        out = format_quantity(cost.output_bytes, Kind.BYTES, digits=3)
        print(
            f"  {node_id:<{width}}  @{cost.site:<{site_width}}  compute {money(cost.compute):>10}"
            f"  inbound {money(cost.inbound_transfer):>10}  output {out}"
        )
    print(f"Delivery to {document.plan.client_site}: {money(result.delivery)}")
    print(f"Total: {money(result.total_cost)}")

    baseline = evaluate_assignment(
        document.plan, document.sites, document.links, ship_everything_assignment(document.plan)
    )
    shipped = math.fsum(
        node_output_bytes(n)
        for _, n in iter_nodes(document.plan)
        if isinstance(n, Source) and n.site_id != document.plan.client_site
    )
    network = math.fsum(c.inbound_transfer for c in baseline.per_node.values()) + baseline.delivery
    print(
        f"Ship-everything alternative: {money(baseline.total_cost)} "
        f"({money(network)} to ship {format_quantity(shipped, Kind.BYTES, digits=3)})"
    )
    return EXIT_OK


def cmd_corpus(args: argparse.Namespace) -> int:
    cases = case_map()
    if args.case is not None and args.case not in cases:
        raise CliError(f"unknown case {args.case!r}; known: {', '.join(sorted(cases))}", EXIT_INVALID)
    if args.action == "export":
        if args.case is None:
            raise CliError("export needs --case NAME", EXIT_INVALID)
        _emit_json(cases[args.case].export(_schedule_arg(args.schedule)))
        return EXIT_OK

    summary = run_all(_schedule_arg(args.schedule), None if args.case is None else [args.case])
    if args.json:
        _emit_json(summary.to_dict())
    else:
        for report in summary.reports:
            print(f"{'PASS' if report.passed else 'FAIL'} {report.name}")
            for r in report.results:
                actual = r.actual if not isinstance(r.actual, float) else f"{r.actual:.6g}"
                line = f"    [{r.status}] {r.assertion.metric} {r.assertion.describe()} (got {actual})"
                print(line)
        print(f"{summary.passed}/{len(summary.reports)} pass")
    return EXIT_OK if summary.ok else EXIT_INVALID


def cmd_crossover(args: argparse.Namespace) -> int:
    schedule = _schedule_arg(args.schedule)
    trends = _validated(args.trends, trends_from_dict)
    if not args.intensity > 0:
        raise CliError("--intensity must be > 0", EXIT_INVALID)
    try:
        months = breakeven_crossover(schedule, trends, args.intensity)
    except ScheduleError as exc:
        raise CliError(str(exc), EXIT_INVALID) from None
    projected = None if math.isinf(months) else project_schedule(schedule, months, trends)
    if args.json:
        _emit_json({
            "months": "never" if projected is None else months,
            "schedule": None if projected is None else projected.to_dict(),
        })
        return EXIT_OK
    if projected is None:
        print("never")
    else:
        print(f"{months:.4g} months")
        print(render_schedule(projected))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="costparity", description="Distributed computing cost model.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schedule", help="show a cost schedule and what one dollar buys")
    p.add_argument("--file", metavar="PATH")
    p.add_argument("--derive", action="store_true", help="derive prices from a hardware baseline")
    p.add_argument("--baseline", metavar="PATH")
    p.add_argument("--project", type=float, metavar="MONTHS")
    p.add_argument("--trends", metavar="PATH")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("task", help="price or classify a task")
    p.add_argument("action", choices=["cost", "classify"])
    p.add_argument("--task", required=True, metavar="PATH")
    p.add_argument("--schedule", metavar="PATH")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_task)

    p = sub.add_parser("place", help="optimize operator placement for a plan")
    p.add_argument("--plan", required=True, metavar="PATH")
    p.add_argument("--schedule", metavar="PATH")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_place)

    p = sub.add_parser("corpus", help="run or export the built-in case studies")
    p.add_argument("action", choices=["run", "export"])
    p.add_argument("--case", metavar="NAME")
    p.add_argument("--schedule", metavar="PATH")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_corpus)

    p = sub.add_parser("crossover", help="months until an intensity reaches break-even")
    p.add_argument("--schedule", metavar="PATH")
    p.add_argument("--trends", required=True, metavar="PATH")
    p.add_argument("--intensity", required=True, type=float, metavar="VALUE")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_crossover)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"costparity: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
