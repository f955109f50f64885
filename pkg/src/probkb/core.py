"""Shared domain types: literals, conjunctive events, probability intervals, rules.

Everything here is an immutable value; instances can be shared freely
between threads and used as dict keys.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


class KbError(Exception):
    """Base class for all domain errors raised by this package."""


class ContradictionError(KbError):
    """A conjunction mentions some symbol with both polarities."""


class ValidationError(KbError):
    """A statement violates a structural constraint (not a probability law)."""


def check_symbol(name: str) -> str:
    """Validate an event-symbol name (nonempty identifier, case-sensitive)."""
    if not isinstance(name, str) or not name.isidentifier():
        raise ValidationError(f"event symbol must be a nonempty identifier, got {name!r}")
    return name


@dataclass(frozen=True, order=True)
class Literal:
    """A basic event: a named symbol or its complement."""

    symbol: str
    negated: bool = False

    def __post_init__(self) -> None:
        check_symbol(self.symbol)

    def complement(self) -> Literal:
        return Literal(self.symbol, not self.negated)

    def __str__(self) -> str:
        return ("!" if self.negated else "") + self.symbol


@dataclass(frozen=True)
class ConjEvent:
    """Canonical conjunction of literals over pairwise distinct symbols.

    The literal tuple is sorted by symbol name, so structurally equal
    events compare (and hash) equal.  Contradictory conjunctions are not
    representable; build instances through :func:`canonicalize`.
    """

    literals: tuple[Literal, ...]

    def __post_init__(self) -> None:
        if not self.literals:
            raise ValidationError("conjunctive event needs at least one literal")
        names = [lit.symbol for lit in self.literals]
        if names != sorted(names) or len(set(names)) != len(names):
            raise ValidationError("literals must be sorted and symbol-distinct; use canonicalize()")

    @property
    def width(self) -> int:
        return len(self.literals)

    @property
    def symbols(self) -> frozenset[str]:
        return frozenset(lit.symbol for lit in self.literals)

    def disjoint_from(self, other: ConjEvent) -> bool:
        return not (self.symbols & other.symbols)

    def __str__(self) -> str:
        return " & ".join(str(lit) for lit in self.literals)


def canonicalize(literals: Iterable[Literal]) -> ConjEvent:
    """Sort and deduplicate literals into a canonical event.

    Raises ContradictionError if any symbol occurs with both polarities,
    ValidationError if the input is empty.
    """
    by_symbol: dict[str, Literal] = {}
    for lit in literals:
        prev = by_symbol.get(lit.symbol)
        if prev is None:
            by_symbol[lit.symbol] = lit
        elif prev.negated != lit.negated:
            raise ContradictionError(f"symbol {lit.symbol!r} occurs with both polarities")
    if not by_symbol:
        raise ValidationError("conjunctive event needs at least one literal")
    return ConjEvent(tuple(by_symbol[name] for name in sorted(by_symbol)))


def event(spec: str) -> ConjEvent:
    """Convenience constructor: ``event("A & !B")``."""
    lits = []
    for part in spec.split("&"):
        part = part.strip()
        negated = part.startswith("!")
        lits.append(Literal(part[1:].strip() if negated else part, negated))
    return canonicalize(lits)


def conjoin(e1: ConjEvent, e2: ConjEvent) -> ConjEvent:
    """Canonical conjunction of two events; ContradictionError on clash."""
    return canonicalize(e1.literals + e2.literals)


@dataclass(frozen=True)
class ProbInterval:
    """Closed subinterval of [0, 1].

    ``lo > hi`` is the distinguished empty interval, the value-level signal
    of probabilistic inconsistency.  Both endpoints must individually lie
    in [0, 1].
    """

    lo: float
    hi: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not (0.0 <= self.lo <= 1.0 and 0.0 <= self.hi <= 1.0):
            raise ValidationError(f"interval endpoints must lie in [0, 1], got [{self.lo}, {self.hi}]")

    @property
    def is_empty(self) -> bool:
        return self.lo > self.hi

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def is_vacuous(self) -> bool:
        return self.lo <= 0.0 and self.hi >= 1.0

    def meet(self, other: ProbInterval) -> ProbInterval:
        return ProbInterval(max(self.lo, other.lo), min(self.hi, other.hi))

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= value <= self.hi + tol

    def within(self, other: ProbInterval, tol: float = 0.0) -> bool:
        """True if self is a subinterval of other (empty is within anything)."""
        if self.is_empty:
            return True
        return self.lo >= other.lo - tol and self.hi <= other.hi + tol

    def __str__(self) -> str:
        return f"[{self.lo:g}, {self.hi:g}]"


#: The vacuous interval (identity of the meet).
FULL = ProbInterval(0.0, 1.0)
#: Canonical empty interval used for detected inconsistencies.
EMPTY = ProbInterval(1.0, 0.0)


def interval_meet(p: ProbInterval, q: ProbInterval) -> ProbInterval:
    """Componentwise intersection; an empty result signals inconsistency."""
    return p.meet(q)


@dataclass(frozen=True)
class UncertainRule:
    """Interval bounds on a conditional probability P(consequent | antecedent).

    The rule implicitly asserts P(antecedent) > 0.  Antecedent and
    consequent must not share symbols; overlapping events are a
    validation error, not a silent simplification.
    """

    antecedent: ConjEvent
    consequent: ConjEvent
    bounds: ProbInterval

    def __post_init__(self) -> None:
        shared = self.antecedent.symbols & self.consequent.symbols
        if shared:
            raise ValidationError(
                f"antecedent and consequent share symbol(s) {sorted(shared)}: "
                f"{self.antecedent} -> {self.consequent}"
            )

    def __str__(self) -> str:
        return f"{self.antecedent} -> {self.consequent} : {self.bounds}"


@dataclass(frozen=True)
class BidirRule:
    """Paired bounds on P(b|a) (forward) and P(a|b) (backward).

    Admissibility requires forward.hi = 0 exactly when backward.hi = 0,
    mirroring P(b|a) = 0 iff P(a|b) = 0.
    """

    a: ConjEvent
    b: ConjEvent
    forward: ProbInterval
    backward: ProbInterval

    def __post_init__(self) -> None:
        if not self.a.disjoint_from(self.b):
            raise ValidationError(f"bidirectional rule events share symbols: {self.a} <-> {self.b}")
        if (self.forward.hi == 0.0) != (self.backward.hi == 0.0):
            raise ValidationError(
                f"inadmissible coupling: forward {self.forward} vs backward {self.backward} "
                "(upper bounds must be zero together)"
            )

    def as_rules(self) -> tuple[UncertainRule, UncertainRule]:
        """Lossless decomposition into the two directed rules."""
        return (
            UncertainRule(self.a, self.b, self.forward),
            UncertainRule(self.b, self.a, self.backward),
        )

    def __str__(self) -> str:
        return f"{self.a} <-> {self.b} : {self.forward} / {self.backward}"


@dataclass(frozen=True)
class Independence:
    """Conditional independence: P(c | b & a) = P(c | b), hence P(a & b) > 0."""

    a: ConjEvent
    b: ConjEvent
    c: ConjEvent

    def __post_init__(self) -> None:
        for x, y, names in (
            (self.a, self.b, "a/b"),
            (self.a, self.c, "a/c"),
            (self.b, self.c, "b/c"),
        ):
            if not x.disjoint_from(y):
                raise ValidationError(f"independence events {names} share symbols: I({self.a}, {self.b}, {self.c})")

    def __str__(self) -> str:
        return f"I({self.a}, {self.b}, {self.c})"
