"""Parser and serializer for the textual knowledge-base format (".duck").

Grammar (one statement per line, ``#`` starts a comment):

    rule   := "rule" event "->" event ":" interval
    birule := "birule" event "<->" event ":" interval "/" interval
    indep  := "indep" "I(" event "," event "," event ")"
    query  := "query" "P(" event "|" event ")"
    event  := literal { "&" literal } ;  literal := [ "!" ] identifier
    interval := "[" number "," number "]"

Numbers are plain decimals (no exponents, no percentages).  Parsing
collects diagnostics with line/column positions and recovers at end of
line, so one bad statement never hides the next.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from .core import (
    BidirRule,
    ConjEvent,
    ContradictionError,
    Independence,
    KbError,
    Literal,
    ProbInterval,
    UncertainRule,
    ValidationError,
    canonicalize,
)


@dataclass(frozen=True)
class Query:
    """A query statement: ask for the derived bounds on P(target | given)."""

    given: ConjEvent
    target: ConjEvent

    def __str__(self) -> str:
        return f"P({self.target} | {self.given})"


StatementItem = Union[UncertainRule, BidirRule, Independence, Query]


@dataclass(frozen=True)
class Statement:
    kind: str  # rule | birule | indep | query
    item: StatementItem
    line: int


@dataclass(frozen=True)
class KbDocument:
    """Ordered list of parsed statements with their source lines."""

    statements: tuple[Statement, ...]

    @property
    def items(self) -> tuple[tuple[str, StatementItem], ...]:
        return tuple((s.kind, s.item) for s in self.statements)

    def __eq__(self, other: object) -> bool:
        # structural equality: source positions are metadata
        if not isinstance(other, KbDocument):
            return NotImplemented
        return self.items == other.items

    def __hash__(self) -> int:
        return hash(self.items)


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.message}"


class ParseError(KbError):
    """Raised when a document contains any diagnostics."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = list(diagnostics)
        summary = "; ".join(str(d) for d in self.diagnostics[:5])
        extra = "" if len(self.diagnostics) <= 5 else f" (+{len(self.diagnostics) - 5} more)"
        super().__init__(f"{len(self.diagnostics)} parse error(s): {summary}{extra}")


_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)"
    r"|(?P<num>\d+\.\d*|\.\d+|\d+)"
    r"|(?P<id>[A-Za-z_]\w*)"
    r"|(?P<op><->|->|[:\[\],/&!()|])"
    r"|(?P<bad>.)"
)


class _LineError(Exception):
    def __init__(self, col: int, message: str):
        self.col = col
        self.message = message


class _LineParser:
    def __init__(self, text: str, line_no: int):
        self.line_no = line_no
        self.tokens: list[tuple[str, str, int]] = []
        for m in _TOKEN_RE.finditer(text):
            kind = m.lastgroup
            if kind == "ws":
                continue
            if kind == "bad":
                raise _LineError(m.start() + 1, f"unexpected character {m.group()!r}")
            self.tokens.append((kind, m.group(), m.start() + 1))
        self.pos = 0

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def peek(self) -> tuple[str, str, int]:
        if self.at_end():
            last_col = self.tokens[-1][2] + len(self.tokens[-1][1]) if self.tokens else 1
            return ("eof", "", last_col)
        return self.tokens[self.pos]

    def take(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok[0] != "eof":
            self.pos += 1
        return tok

    def expect(self, text: str) -> tuple[str, str, int]:
        tok = self.take()
        if tok[1] != text:
            raise _LineError(tok[2], f"expected {text!r}, got {tok[1]!r}" if tok[0] != "eof" else f"expected {text!r}")
        return tok

    def event(self) -> ConjEvent:
        lits = [self.literal()]
        while not self.at_end() and self.peek()[1] == "&":
            self.take()
            lits.append(self.literal())
        start_col = self.tokens[self.pos - 1][2]
        try:
            return canonicalize(lits)
        except ContradictionError as exc:
            raise _LineError(start_col, f"contradictory event: {exc}") from exc

    def literal(self) -> Literal:
        tok = self.take()
        negated = False
        if tok[1] == "!":
            negated = True
            tok = self.take()
        if tok[0] != "id":
            raise _LineError(tok[2], "expected an event symbol")
        return Literal(tok[1], negated)

    def number(self) -> float:
        tok = self.take()
        if tok[0] != "num":
            raise _LineError(tok[2], "expected a number")
        value = float(tok[1])
        if not 0.0 <= value <= 1.0:
            raise _LineError(tok[2], f"probability out of range: {tok[1]}")
        return value

    def interval(self) -> ProbInterval:
        open_tok = self.expect("[")
        lo = self.number()
        self.expect(",")
        hi = self.number()
        self.expect("]")
        if lo > hi:
            raise _LineError(open_tok[2], f"empty interval: lower bound {lo:g} exceeds upper bound {hi:g}")
        return ProbInterval(lo, hi)

    def statement(self) -> Statement:
        kind_tok = self.take()
        keyword = kind_tok[1]
        try:
            if keyword == "rule":
                ant = self.event()
                self.expect("->")
                cons = self.event()
                self.expect(":")
                bounds = self.interval()
                item: StatementItem = UncertainRule(ant, cons, bounds)
            elif keyword == "birule":
                a = self.event()
                self.expect("<->")
                b = self.event()
                self.expect(":")
                forward = self.interval()
                self.expect("/")
                backward = self.interval()
                item = BidirRule(a, b, forward, backward)
            elif keyword == "indep":
                name = self.take()
                if name[1] != "I":
                    raise _LineError(name[2], "expected 'I(' after 'indep'")
                self.expect("(")
                a = self.event()
                self.expect(",")
                b = self.event()
                self.expect(",")
                c = self.event()
                self.expect(")")
                item = Independence(a, b, c)
            elif keyword == "query":
                name = self.take()
                if name[1] != "P":
                    raise _LineError(name[2], "expected 'P(' after 'query'")
                self.expect("(")
                target = self.event()
                self.expect("|")
                given = self.event()
                self.expect(")")
                item = Query(given, target)
            else:
                raise _LineError(kind_tok[2], f"expected 'rule', 'birule', 'indep' or 'query', got {keyword!r}")
        except ValidationError as exc:
            raise _LineError(kind_tok[2], str(exc)) from exc
        if not self.at_end():
            tok = self.peek()
            raise _LineError(tok[2], f"unexpected trailing input {tok[1]!r}")
        return Statement(keyword, item, self.line_no)


def scan(text: str) -> tuple[list[Statement], list[Diagnostic]]:
    """Parse all lines, collecting statements and diagnostics side by side."""
    statements: list[Statement] = []
    diagnostics: list[Diagnostic] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0]
        if not content.strip():
            continue
        try:
            parser = _LineParser(content, line_no)
            statements.append(parser.statement())
        except _LineError as err:
            diagnostics.append(Diagnostic(line_no, err.col, err.message))
    return statements, diagnostics


def parse_kb(text: str) -> KbDocument:
    """Parse a document; raises ParseError carrying every diagnostic found."""
    statements, diagnostics = scan(text)
    if diagnostics:
        raise ParseError(diagnostics)
    return KbDocument(tuple(statements))


def parse_query_expr(text: str) -> Query:
    """Parse a bare conditional-probability expression like ``P(B | A & C)``."""
    doc = parse_kb("query " + text.strip())
    stmt = doc.statements[0]
    assert isinstance(stmt.item, Query)
    return stmt.item


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def format_number(x: float) -> str:
    """Decimal text that reparses to exactly the same float, no exponent."""
    x = float(x)
    compact = "%.9g" % x
    if "e" not in compact and "E" not in compact and float(compact) == x:
        return compact
    return np.format_float_positional(x, unique=True, trim="-")


def format_interval(iv: ProbInterval) -> str:
    return f"[{format_number(iv.lo)}, {format_number(iv.hi)}]"


def format_statement(kind: str, item: StatementItem) -> str:
    if kind == "rule":
        assert isinstance(item, UncertainRule)
        return f"rule {item.antecedent} -> {item.consequent} : {format_interval(item.bounds)}"
    if kind == "birule":
        assert isinstance(item, BidirRule)
        return (
            f"birule {item.a} <-> {item.b} : "
            f"{format_interval(item.forward)} / {format_interval(item.backward)}"
        )
    if kind == "indep":
        assert isinstance(item, Independence)
        return f"indep I({item.a}, {item.b}, {item.c})"
    if kind == "query":
        assert isinstance(item, Query)
        return f"query P({item.target} | {item.given})"
    raise ValueError(f"unknown statement kind {kind!r}")


def serialize(source) -> str:
    """Canonical text for a KbDocument or a knowledge-base-like object.

    Knowledge bases (anything with ``.rules`` and ``.independences``)
    serialize with rules and independences in sorted order, one per line.
    """
    lines: list[str] = []
    if isinstance(source, KbDocument):
        for stmt in source.statements:
            lines.append(format_statement(stmt.kind, stmt.item))
    elif hasattr(source, "rules") and hasattr(source, "independences"):
        rules = sorted(source.rules.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1])))
        for (ant, cons), bounds in rules:
            lines.append(format_statement("rule", UncertainRule(ant, cons, bounds)))
        for ind in sorted(source.independences, key=str):
            lines.append(format_statement("indep", ind))
    else:
        raise TypeError(f"cannot serialize {type(source).__name__}")
    return "\n".join(lines) + ("\n" if lines else "")
