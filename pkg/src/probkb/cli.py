"""Command-line front end.

Subcommands:
  check FILE    consistency verdict for a knowledge base
  query FILE    answer every query statement after saturation
  chain         compare sound vs precise chaining for one premise pair
  verify FILE   run calculus and oracle on one query, report agreement

Exit codes: 0 success/consistent, 1 inconsistent KB (or no feasible
model), 2 parse/validation error, 3 saturation hit max_rounds.

Human output rounds intervals to two decimals for easy comparison
tables; machine output (--format machine) is line-oriented key=value
records at full precision, stable across runs for a fixed configuration.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from .calculus import prc_bounds, rc_bounds
from .core import BidirRule, ConjEvent, KbError, ProbInterval, ValidationError
from .engine import (
    DerivationTrace,
    InconsistencyError,
    KnowledgeBase,
    SaturationConfig,
    SaturationResult,
    saturate,
    query as kb_query,
)
from .kbformat import ParseError, Query, format_number, parse_kb, parse_query_expr
from .oracle import FEASIBILITY_TOL, estimate_range

#: Fixed default seed so oracle runs are reproducible.
DEFAULT_SEED = 1729


def _compact(e: ConjEvent) -> str:
    return str(e).replace(" ", "")


def _human_interval(iv: ProbInterval) -> str:
    return f"[{iv.lo:.2f}, {iv.hi:.2f}]"


def _machine_interval(prefix: str, iv: ProbInterval) -> str:
    return f"{prefix}_lo={format_number(iv.lo)} {prefix}_hi={format_number(iv.hi)}"


def _trace_lines_human(trace: DerivationTrace) -> list[str]:
    out = []
    for line in trace.lines():
        out.append("    " + line)
    return out


def _trace_lines_machine(trace: DerivationTrace) -> list[str]:
    out: list[str] = []

    def walk(node, depth: int) -> None:
        stmt = node.statement
        if hasattr(stmt, "bounds"):
            out.append(
                f"trace depth={depth} rule={node.rule_id} "
                f"antecedent={_compact(stmt.antecedent)} consequent={_compact(stmt.consequent)} "
                f"lo={format_number(stmt.bounds.lo)} hi={format_number(stmt.bounds.hi)}"
            )
        else:
            out.append(
                f"trace depth={depth} rule={node.rule_id} "
                f"indep=I({_compact(stmt.a)},{_compact(stmt.b)},{_compact(stmt.c)})"
            )
        for child in node.premises:
            walk(child, depth + 1)

    if trace.root is not None:
        walk(trace.root, 0)
    return out


def _load_kb(path: str) -> tuple[KnowledgeBase, list[Query]]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = parse_kb(fh.read())
    kb = KnowledgeBase()
    queries: list[Query] = []
    for stmt in doc.statements:
        if isinstance(stmt.item, Query):
            queries.append(stmt.item)
        else:
            kb.insert(stmt.item)
    return kb, queries


def _config(args: argparse.Namespace) -> SaturationConfig:
    return SaturationConfig(
        max_width=args.max_width,
        epsilon=args.epsilon,
        max_rounds=args.max_rounds,
    )


def _report_inconsistency(err: InconsistencyError, machine: bool) -> None:
    report = err.report
    if machine:
        print(
            f"inconsistent antecedent={_compact(report.antecedent)} "
            f"consequent={_compact(report.consequent)} rule={report.rule_id}"
        )
        for line in _trace_lines_machine(report.trace):
            print(line)
    else:
        print(f"INCONSISTENT: {report}")
        for line in _trace_lines_human(report.trace):
            print(line)


def cmd_check(args: argparse.Namespace) -> int:
    machine = args.format == "machine"
    try:
        kb, _queries = _load_kb(args.file)
        result = saturate(kb, _config(args))
    except InconsistencyError as err:
        _report_inconsistency(err, machine)
        return 1
    if machine:
        print(f"check status=consistent rounds={result.rounds} rules={len(result.kb.rules)}")
    else:
        print(f"consistent ({result.rounds} rounds, {len(result.kb.rules)} derived rules)")
    if not result.converged:
        print("saturation stopped at max_rounds before reaching a fixpoint", file=sys.stderr)
        return 3
    return 0


def cmd_query(args: argparse.Namespace) -> int:
    machine = args.format == "machine"
    try:
        kb, queries = _load_kb(args.file)
        result = saturate(kb, _config(args))
    except InconsistencyError as err:
        _report_inconsistency(err, machine)
        return 1
    if machine:
        queries = sorted(queries, key=lambda q: (_compact(q.given), _compact(q.target)))
    for q in queries:
        interval, trace = kb_query(result.kb, q.given, q.target)
        if machine:
            print(
                f"query antecedent={_compact(q.given)} consequent={_compact(q.target)} "
                f"lo={format_number(interval.lo)} hi={format_number(interval.hi)} "
                f"derived={'false' if trace.is_empty else 'true'}"
            )
            if args.trace:
                for line in _trace_lines_machine(trace):
                    print(line)
        else:
            print(f"P({q.target} | {q.given}) = {_human_interval(interval)}")
            if args.trace:
                for line in _trace_lines_human(trace):
                    print(line)
    if not result.converged:
        print("saturation stopped at max_rounds before reaching a fixpoint", file=sys.stderr)
        return 3
    return 0


def _parse_interval_flag(text: str, name: str) -> ProbInterval:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) == 1:
        parts = [parts[0], parts[0]]
    if len(parts) != 2:
        raise ValidationError(f"--{name} expects 'lo,hi' (or a single point value)")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ValidationError(f"--{name}: {exc}") from exc
    if lo > hi:
        raise ValidationError(f"--{name}: lower bound exceeds upper bound")
    return ProbInterval(lo, hi)


def cmd_chain(args: argparse.Namespace) -> int:
    from .core import event

    u = _parse_interval_flag(args.u, "u")
    v = _parse_interval_flag(args.v, "v")
    x = _parse_interval_flag(args.x, "x")
    y = _parse_interval_flag(args.y, "y")
    bi_ab = BidirRule(event("A"), event("B"), u, v)
    bi_bc = BidirRule(event("B"), event("C"), x, y)
    prc = prc_bounds(bi_ab, bi_bc).bounds
    rc = rc_bounds(bi_ab, bi_bc).bounds
    if args.format == "machine":
        print(f"chain {_machine_interval('prc', prc)} {_machine_interval('rc', rc)}")
    else:
        print(f"PRC: {_human_interval(prc)}")
        print(f"RC:  {_human_interval(rc)}")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    machine = args.format == "machine"
    try:
        kb, _queries = _load_kb(args.file)
        target = parse_query_expr(args.query)
        result = saturate(kb, _config(args))
    except InconsistencyError as err:
        _report_inconsistency(err, machine)
        return 1
    interval, _trace = kb_query(result.kb, target.given, target.target)
    report = estimate_range(kb, target.given, target.target, budget=args.budget, seed=args.seed)
    if not report.feasible_found:
        if machine:
            print(
                f"verify antecedent={_compact(target.given)} consequent={_compact(target.target)} "
                f"feasible=false"
            )
        else:
            print("no feasible model found within tolerance (knowledge base is probably inconsistent)")
        return 1
    contained = (
        report.achieved_min >= interval.lo - FEASIBILITY_TOL
        and report.achieved_max <= interval.hi + FEASIBILITY_TOL
    )
    gap = max(report.achieved_min - interval.lo, interval.hi - report.achieved_max)
    if machine:
        print(
            f"verify antecedent={_compact(target.given)} consequent={_compact(target.target)} "
            f"calc_lo={format_number(interval.lo)} calc_hi={format_number(interval.hi)} "
            f"oracle_min={format_number(report.achieved_min)} oracle_max={format_number(report.achieved_max)} "
            f"feasible=true containment={'ok' if contained else 'VIOLATED'} gap={format_number(max(gap, 0.0))}"
        )
    else:
        print(f"calculus: {_human_interval(interval)}")
        print(f"oracle:   [{report.achieved_min:.2f}, {report.achieved_max:.2f}]  ({report.samples_used} samples)")
        print(f"containment: {'ok' if contained else 'VIOLATED'}   max endpoint gap: {max(gap, 0.0):.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="probkb",
        description="Interval-probability knowledge bases: saturation, queries, oracle checks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, with_file: bool = True) -> None:
        if with_file:
            p.add_argument("file", help="knowledge-base file (.duck)")
            p.add_argument("--max-width", type=int, default=4, help="event width cap during saturation")
            p.add_argument("--epsilon", type=float, default=1e-9, help="minimum narrowing that counts as progress")
            p.add_argument("--max-rounds", type=int, default=1000, help="saturation round limit")
        p.add_argument("--format", choices=("human", "machine"), default="human")

    p_check = sub.add_parser("check", help="check a knowledge base for consistency")
    common(p_check)
    p_check.set_defaults(func=cmd_check)

    p_query = sub.add_parser("query", help="answer the file's query statements")
    common(p_query)
    p_query.add_argument("--trace", action="store_true", help="print derivation trees")
    p_query.set_defaults(func=cmd_query)

    p_chain = sub.add_parser("chain", help="compare RC and PRC on one bidirectional premise pair")
    p_chain.add_argument("--u", required=True, help="bounds on P(B|A), as 'lo,hi'")
    p_chain.add_argument("--v", required=True, help="bounds on P(A|B), as 'lo,hi'")
    p_chain.add_argument("--x", required=True, help="bounds on P(C|B), as 'lo,hi'")
    p_chain.add_argument("--y", required=True, help="bounds on P(B|C), as 'lo,hi'")
    common(p_chain, with_file=False)
    p_chain.set_defaults(func=cmd_chain)

    p_verify = sub.add_parser("verify", help="compare the derived interval against the model oracle")
    common(p_verify)
    p_verify.add_argument("--query", required=True, help="conditional to verify, e.g. 'P(B | A)'")
    p_verify.add_argument("--budget", type=int, default=100_000, help="oracle sample budget")
    p_verify.add_argument("--seed", type=int, default=DEFAULT_SEED, help="oracle random seed")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as err:
        for diag in err.diagnostics:
            print(f"{getattr(args, 'file', '<input>')}:{diag}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except KbError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
