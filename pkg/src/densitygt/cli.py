"""Command-line entry point: ``densitygt {run,verify,bounds,solve,heaps,scan}``.

Every subcommand builds a list of flat records and renders them as an aligned
table, CSV or JSON lines, so all three formats carry the same data in the same
order.  Exit status: 0 when every check passed, 1 when a violation was
verified, 2 for usage errors or infeasible requests.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Optional, Sequence

from .adversaries import (
    LazyAdversary,
    PhasedAdversary,
    check_heaps,
    random_heap_config,
    select_heaps,
)
from .bounds import numeric_envelope, pinned_value, theorem_bounds
from .core import (
    Answer,
    ElementSet,
    InconsistentTranscript,
    Instance,
    InstanceTooLarge,
    Semantics,
    mask_answer,
    parse_alpha,
)
from .solver import CacheError, Conjecture, Grid, optimal_first_moves, scan_conjecture, solve_exact
from .strategies import (
    EXHAUSTIVE,
    STRATEGIES,
    Hidden,
    NotApplicable,
    StrategyError,
    play,
    sample_hidden,
    verify_strategy,
)

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2
SEED_LIMIT = 1 << 64


class UsageError(Exception):
    """Bad flags or an infeasible request; maps to exit status 2."""


# -- argument types -----------------------------------------------------------


def alpha_arg(text: str) -> Fraction:
    try:
        return parse_alpha(text)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def alpha_list_arg(text: str) -> tuple[Fraction, ...]:
    return tuple(alpha_arg(part) for part in text.split(","))


def int_range_arg(text: str) -> tuple[int, ...]:
    """``"A..B"`` (inclusive), ``"A,B,C"`` or a single integer."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            values = tuple(range(int(lo), int(hi) + 1))
        else:
            values = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected A..B or A,B,... got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return values


def seed_arg(text: str) -> int:
    try:
        seed = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= seed < SEED_LIMIT:
        raise argparse.ArgumentTypeError("seeds are 64-bit unsigned integers")
    return seed


def adversary_arg(text: str) -> str:
    if text in ("lazy", "weight"):
        return text
    if text.startswith("hidden:"):
        seed_arg(text.split(":", 1)[1])
        return text
    raise argparse.ArgumentTypeError(f"adversary must be lazy, weight or hidden:<seed>, got {text!r}")


def mode_arg(text: str):
    """``exhaustive`` or ``hidden:<seed>[:<samples>]``."""
    if text == EXHAUSTIVE:
        return EXHAUSTIVE
    parts = text.split(":")
    if parts[0] != "hidden" or len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError(f"mode must be exhaustive or hidden:<seed>[:<samples>], got {text!r}")
    samples = int(parts[2]) if len(parts) == 3 else 200
    return Hidden(seed_arg(parts[1]), samples)


# -- rendering ----------------------------------------------------------------


def _cell(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    return str(value)


def render(records: Sequence[dict], columns: Sequence[str], fmt: str) -> str:
    if fmt == "jsonl":
        return "".join(json.dumps({c: r.get(c) for c in columns}) + "\n" for r in records)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for r in records:
            writer.writerow(["" if r.get(c) is None else _cell(r.get(c)) for c in columns])
        return buf.getvalue()
    cells = [[_cell(r.get(c)) for c in columns] for r in records]
    widths = [max([len(c)] + [len(row[i]) for row in cells]) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() for row in cells]
    return "\n".join(lines) + "\n"


def _alpha_text(alpha: Fraction) -> str:
    return f"{alpha.numerator}/{alpha.denominator}"


def _instance(args) -> Instance:
    semantics = Semantics(getattr(args, "semantics", Semantics.EXACTLY_K.value))
    try:
        return Instance(args.n, args.k, args.alpha, args.m, semantics)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# -- subcommands --------------------------------------------------------------

RUN_COLUMNS = ("kind", "step", "set", "size", "answer")


def cmd_run(args) -> tuple[list[dict], tuple[str, ...], int]:
    inst = _instance(args)
    strategy = STRATEGIES[args.strategy]
    applicable, why = strategy.applicability(inst)
    if not applicable:
        raise UsageError(f"{strategy.name} does not apply to {inst.label()}: {why}")

    records: list[dict] = []
    hidden: Optional[int] = None
    if args.adversary.startswith("hidden:"):
        rng = random.Random(int(args.adversary.split(":", 1)[1]))
        hidden = sample_hidden(inst, rng)
        hidden_set = ElementSet(hidden, inst.n)
        records.append({"kind": "hidden", "step": 0, "set": repr(hidden_set), "size": len(hidden_set)})

        def respond(q: ElementSet) -> Answer:
            return Answer.of(mask_answer(q.mask, hidden, inst.alpha))

        tracker = None
    else:
        if inst.semantics is not Semantics.EXACTLY_K:
            raise UsageError("lazy and weight adversaries need exactly-k semantics")
        try:
            tracker = LazyAdversary(inst) if args.adversary == "lazy" else PhasedAdversary(inst, args.threshold)
        except InstanceTooLarge as exc:
            raise UsageError(str(exc)) from None
        respond = tracker.answer

    try:
        transcript, found = play(strategy, inst, respond, args.max_queries)
    except (StrategyError, InconsistentTranscript) as exc:
        records.append({"kind": "error", "step": None, "set": None, "size": None, "answer": str(exc)})
        return records, RUN_COLUMNS, EXIT_VIOLATION
    for i, (query, answer) in enumerate(transcript.entries, 1):
        records.append({"kind": "query", "step": i, "set": repr(query), "size": len(query), "answer": answer.value})
    if found is None:
        records.append({"kind": "output", "step": len(transcript), "set": None, "size": None,
                        "answer": "query limit reached"})
        return records, RUN_COLUMNS, EXIT_VIOLATION

    if hidden is not None:
        ok = found.issubset(ElementSet(hidden, inst.n))
    else:
        lazy = tracker.lazy if isinstance(tracker, PhasedAdversary) else tracker
        ok = found.issubset(lazy.certified())
    records.append({"kind": "output", "step": len(transcript), "set": repr(found), "size": len(found),
                    "answer": "certified" if ok else "NOT certified"})
    return records, RUN_COLUMNS, EXIT_OK if ok else EXIT_VIOLATION


VERIFY_COLUMNS = ("strategy", "n", "k", "alpha", "m", "status", "worst", "bound", "simulations", "note")


def _verify_point(job) -> Optional[dict]:
    name, n, k, alpha, m, semantics, mode, show_all = job
    row = {"strategy": name, "n": n, "k": k, "alpha": _alpha_text(alpha), "m": m}
    inst = Instance(n, k, alpha, m, semantics)
    strategy = STRATEGIES[name]
    applicable, why = strategy.applicability(inst)
    if not applicable:
        return {**row, "status": "not-applicable", "note": why} if show_all else None
    try:
        report = verify_strategy(strategy, inst, mode)
    except InstanceTooLarge as exc:
        return {**row, "status": "skipped", "note": str(exc)}
    except StrategyError as exc:
        return {**row, "status": "violation", "note": str(exc)}
    note = ""
    if not report.correctness_ok:
        note = f"wrong output for hidden set {report.failing_hidden_set!r}"
    elif not report.bound_ok:
        note = "worst case exceeds the claimed bound"
    return {**row, "status": "ok" if report.ok else "violation", "worst": report.worst_queries,
            "bound": report.claimed_bound, "simulations": report.simulations, "note": note}


def cmd_verify(args):
    names = sorted(STRATEGIES) if args.strategy == "all" else [args.strategy]
    semantics = Semantics(args.semantics)
    jobs = [
        (name, n, k, alpha, m, semantics, args.mode, args.show_inapplicable)
        for name in names for alpha in args.alpha for n in args.n for k in args.k for m in args.m
        if 1 <= m <= k <= n
    ]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_verify_point, jobs))
    else:
        rows = [_verify_point(job) for job in jobs]
    records = [r for r in rows if r is not None]
    bad = any(r["status"] == "violation" for r in records)
    return records, VERIFY_COLUMNS, EXIT_VIOLATION if bad else EXIT_OK


BOUNDS_COLUMNS = ("bound_name", "kind", "applicable", "value", "condition")


def cmd_bounds(args):
    inst = _instance(args)
    reports = theorem_bounds(inst)
    records = [r.row() for r in reports]
    lower, upper = numeric_envelope(reports)
    pinned = pinned_value(reports)
    if pinned is not None:
        condition = f"numeric lower bound meets numeric upper bound: g = {pinned}"
    else:
        condition = f"{lower} <= g <= {'?' if upper is None else upper}"
    records.append({"bound_name": "pinned", "kind": "value", "applicable": pinned is not None,
                    "value": pinned, "condition": condition})
    return records, BOUNDS_COLUMNS, EXIT_OK


SOLVE_COLUMNS = ("n", "k", "alpha", "m", "semantics", "g", "status", "lower", "budget", "solver_version")


def cmd_solve(args):
    inst = _instance(args)
    try:
        record = solve_exact(inst, budget=args.budget, symmetry=not args.no_symmetry,
                             jobs=args.jobs, cache=args.cache)
    except InstanceTooLarge as exc:
        raise UsageError(str(exc)) from None
    row = record.row()
    columns = SOLVE_COLUMNS
    if args.first_moves:
        columns += ("openings",)
        if record.exact:
            moves = optimal_first_moves(inst, symmetry=not args.no_symmetry, g=record.g)
            row["openings"] = " ".join(repr(s) for s in moves)
    if args.timing:
        columns += ("elapsed",)
        row["elapsed"] = round(record.elapsed, 3)
    return [row], columns, EXIT_OK


HEAPS_COLUMNS = ("seed", "k", "l", "beta", "a", "ground", "sets", "iterations", "cleaned",
                 "heap_sizes", "status", "heaps")


def cmd_heaps(args):
    records = []
    bad = False
    for seed in range(args.seed, args.seed + args.configs):
        config = random_heap_config(args.k, args.l, args.beta, args.a, seed)
        result = select_heaps(config)
        problems = check_heaps(config, result)
        if result.iterations > args.k * args.l - 1:
            problems.append(f"{result.iterations} iterations exceed kl-1 = {args.k * args.l - 1}")
        bad |= bool(problems)
        records.append({
            "seed": seed, "k": args.k, "l": args.l, "beta": args.beta, "a": args.a,
            "ground": config.ground_size, "sets": len(config.family), "iterations": result.iterations,
            "cleaned": result.cleaned, "heap_sizes": ",".join(str(len(h)) for h in result.heaps),
            "status": "; ".join(problems) if problems else "ok",
            "heaps": " ".join(repr(ElementSet.of(config.ground_size, h)) for h in result.heaps),
        })
    return records, HEAPS_COLUMNS, EXIT_VIOLATION if bad else EXIT_OK


SCAN_COLUMNS = ("conjecture", "n", "k", "alpha", "m", "status", "lhs", "rhs", "note")


def cmd_scan(args):
    grid = Grid(args.n, args.k, args.alpha, args.m)
    findings = scan_conjecture(args.conjecture, grid, cache=args.cache, jobs=args.jobs)
    for f in findings:
        if f.status == "skipped":
            print(f"skipped n={f.n} k={f.k} alpha={f.alpha} m={f.m}: {f.note}", file=sys.stderr)
    records = [f.row() for f in findings]
    bad = any(f.status == "violated" for f in findings)
    return records, SCAN_COLUMNS, EXIT_VIOLATION if bad else EXIT_OK


COMMANDS = {
    "run": cmd_run, "verify": cmd_verify, "bounds": cmd_bounds,
    "solve": cmd_solve, "heaps": cmd_heaps, "scan": cmd_scan,
}


# -- parser -------------------------------------------------------------------


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # accepted before or after the subcommand; the subcommand copy only overrides when given
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--format", choices=("table", "csv", "jsonl"), default=d("table"))
    parser.add_argument("--jobs", type=int, default=d(1), help="worker processes")
    parser.add_argument("--cache", default=d(None), help="JSON-lines cache of solved instances")
    parser.add_argument("--output", default=d(None), help="write records here instead of stdout")


def _instance_flags(parser: argparse.ArgumentParser, semantics: bool = True) -> None:
    parser.add_argument("--n", type=int, required=True)
    parser.add_argument("--k", type=int, required=True)
    parser.add_argument("--alpha", type=alpha_arg, required=True, help="NUM/DEN")
    parser.add_argument("--m", type=int, default=1)
    if semantics:
        parser.add_argument("--semantics", choices=[s.value for s in Semantics],
                            default=Semantics.EXACTLY_K.value)


def _grid_flags(parser: argparse.ArgumentParser, k_default: str = "1") -> None:
    parser.add_argument("--n", type=int_range_arg, required=True, help="A..B or A,B,...")
    parser.add_argument("--k", type=int_range_arg, default=int_range_arg(k_default))
    parser.add_argument("--alpha", type=alpha_list_arg, required=True, help="NUM/DEN[,NUM/DEN...]")
    parser.add_argument("--m", type=int_range_arg, default=(1,))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="densitygt", description="Group testing with density-threshold queries.")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="play one strategy against one adversary")
    _instance_flags(p)
    p.add_argument("--strategy", choices=sorted(STRATEGIES), required=True)
    p.add_argument("--adversary", type=adversary_arg, default="lazy", help="lazy | weight | hidden:<seed>")
    p.add_argument("--threshold", type=int, default=None, help="weight adversary live-set threshold")
    p.add_argument("--max-queries", type=int, default=None)
    _global_flags(p, suppress=True)

    p = sub.add_parser("verify", help="simulate strategies over an instance grid")
    _grid_flags(p)
    p.add_argument("--strategy", choices=sorted(STRATEGIES) + ["all"], required=True)
    p.add_argument("--semantics", choices=[s.value for s in Semantics], default=Semantics.EXACTLY_K.value)
    p.add_argument("--mode", type=mode_arg, default=EXHAUSTIVE, help="exhaustive | hidden:<seed>[:<samples>]")
    p.add_argument("--show-inapplicable", action="store_true")
    _global_flags(p, suppress=True)

    p = sub.add_parser("bounds", help="closed-form bounds for one instance")
    _instance_flags(p, semantics=False)
    _global_flags(p, suppress=True)

    p = sub.add_parser("solve", help="exact minimax value for one instance")
    _instance_flags(p, semantics=False)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--no-symmetry", action="store_true")
    p.add_argument("--first-moves", action="store_true", help="list optimal opening representatives")
    p.add_argument("--timing", action="store_true", help="add wall-clock seconds (not deterministic)")
    _global_flags(p, suppress=True)

    p = sub.add_parser("heaps", help="heap selection on seeded random families")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--beta", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--seed", type=seed_arg, default=0)
    p.add_argument("--configs", type=int, default=1, help="number of consecutive seeds")
    _global_flags(p, suppress=True)

    p = sub.add_parser("scan", help="test a conjecture over an instance grid")
    p.add_argument("--conjecture", choices=[c.value for c in Conjecture], required=True)
    _grid_flags(p)
    _global_flags(p, suppress=True)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    try:
        records, columns, status = COMMANDS[args.command](args)
    except (UsageError, NotApplicable, InstanceTooLarge, CacheError) as exc:
        print(f"densitygt {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    text = render(records, columns, args.format)
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
