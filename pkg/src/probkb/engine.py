"""Knowledge-base store and bottom-up saturation to a bounds fixpoint.

The store keeps at most one interval per (antecedent, consequent) pair;
every insertion and every derived conclusion is merged in by interval
intersection (sharpening), so the fixpoint is a lattice meet and does
not depend on the order statements arrive or rules fire.

Saturation is semi-naive: a round only fires rule instances with at
least one premise that changed in the previous round.  Internally events
are packed into machine integers (one bit per literal) and firing
partners are found by direct index lookups, never by scanning the whole
store.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Union

from .calculus import (
    chain_sum_bounds,
    cl_bounds,
    crn_bounds,
    prc_interval,
    prci_forward_bounds,
    prci_update_bounds,
    rc_interval,
    rci_values,
    wcl_bounds,
    wcrn_hi,
)
from .core import (
    BidirRule,
    ConjEvent,
    FULL,
    Independence,
    KbError,
    Literal,
    ProbInterval,
    UncertainRule,
    ValidationError,
    interval_meet,
)

KbItem = Union[UncertainRule, BidirRule, Independence]

_RULE_GROUPS = {
    "I1": ("I1a", "I1b", "I1c", "I1d"),
    "I6": ("I6a", "I6b"),
    "I11": ("I11a", "I11b"),
    "RCI": ("RCI1", "RCI2"),
    "PRCI": ("PRCI_A", "PRCI_B"),
}

ALL_RULES = frozenset(
    {
        "I1a", "I1b", "I1c", "I1d", "I2", "I3", "I4", "I5", "I6a", "I6b",
        "I7", "I8", "I9", "I10", "I11a", "I11b", "I12",
        "RC", "PRC", "RCI1", "RCI2", "PRCI_A", "PRCI_B",
    }
)

#: Sound rule chaining (RC) and its point-valued independence variant are
#: superseded by the precise macro rules and stay behind an explicit flag.
DEFAULT_RULES = ALL_RULES - {"RC", "RCI1", "RCI2"}


def normalize_rule_tags(tags: Iterable[str]) -> frozenset[str]:
    """Expand group names (I1, I6, I11, RCI, PRCI) and validate tags."""
    out: set[str] = set()
    for tag in tags:
        if tag in _RULE_GROUPS:
            out.update(_RULE_GROUPS[tag])
        elif tag in ALL_RULES:
            out.add(tag)
        else:
            raise ValidationError(f"unknown inference rule tag {tag!r}")
    out.add("I2")  # sharpening is the store merge itself and cannot be disabled
    return frozenset(out)


@dataclass(frozen=True)
class SaturationConfig:
    """Bounds for the saturation loop.

    max_width caps the width of every generated antecedent and
    consequent; epsilon is the minimum narrowing that re-agendas a cell;
    enabled_rules selects which inference rules fire.
    """

    max_width: int = 4
    epsilon: float = 1e-9
    max_rounds: int = 1000
    enabled_rules: frozenset[str] = DEFAULT_RULES
    record_rounds: bool = False

    def __post_init__(self) -> None:
        if self.max_width < 1:
            raise ValidationError("max_width must be at least 1")
        if self.epsilon < 0:
            raise ValidationError("epsilon must be nonnegative")
        if self.max_rounds < 1:
            raise ValidationError("max_rounds must be at least 1")
        object.__setattr__(self, "enabled_rules", normalize_rule_tags(self.enabled_rules))


@dataclass(frozen=True)
class TraceNode:
    """One derivation step: a statement, the rule that produced it, its premises."""

    rule_id: str
    statement: Union[UncertainRule, Independence]
    premises: tuple["TraceNode", ...] = ()

    def lines(self, fmt: Callable[[object], str] = str, depth: int = 0) -> list[str]:
        out = ["  " * depth + f"{self.rule_id}: {fmt(self.statement)}"]
        for child in self.premises:
            out.extend(child.lines(fmt, depth + 1))
        return out


@dataclass(frozen=True)
class DerivationTrace:
    """Derivation tree for a queried bound; leaves are KB axioms."""

    root: Optional[TraceNode] = None

    @property
    def is_empty(self) -> bool:
        return self.root is None

    def lines(self, fmt: Callable[[object], str] = str) -> list[str]:
        return [] if self.root is None else self.root.lines(fmt)

    def __str__(self) -> str:
        return "\n".join(self.lines()) if self.root else "(no derivation)"


@dataclass(frozen=True)
class InconsistencyReport:
    """First empty interval met during insertion or saturation."""

    antecedent: ConjEvent
    consequent: ConjEvent
    existing: Optional[ProbInterval]
    conclusion: ProbInterval
    rule_id: str
    trace: DerivationTrace

    def __str__(self) -> str:
        prior = f" conflicts with stored {self.existing}" if self.existing else ""
        return (
            f"inconsistent: {self.rule_id} derives {self.antecedent} -> "
            f"{self.consequent} : {self.conclusion}{prior}"
        )


class InconsistencyError(KbError):
    def __init__(self, report: InconsistencyReport):
        self.report = report
        super().__init__(str(report))


class UnknownSymbolError(KbError):
    pass


class KnowledgeBase:
    """Mutable store of uncertain rules and independence statements.

    Rules are indexed by their (antecedent, consequent) pair and merged
    by interval intersection on insert.  Bidirectional rules split into
    their two directed halves plus a retained pairing record.
    """

    def __init__(self, items: Optional[Iterable[KbItem]] = None):
        self.rules: dict[tuple[ConjEvent, ConjEvent], ProbInterval] = {}
        self.independences: set[Independence] = set()
        self.symbols: set[str] = set()
        self.items: list[KbItem] = []
        self.bidir_pairs: set[tuple[ConjEvent, ConjEvent]] = set()
        self.cell_sources: dict[tuple[ConjEvent, ConjEvent], list[UncertainRule]] = {}
        self._sat: Optional[_Saturator] = None
        for item in items or ():
            self.insert(item)

    @property
    def saturated(self) -> bool:
        return self._sat is not None

    @property
    def max_event_width(self) -> int:
        widths = [1]
        for (a, b) in self.rules:
            widths.append(max(a.width, b.width))
        for ind in self.independences:
            widths.append(max(ind.a.width, ind.b.width, ind.c.width))
        return max(widths)

    def insert(self, item: KbItem) -> "KnowledgeBase":
        """Add one statement, sharpening against anything already stored.

        Raises InconsistencyError if a merge produces an empty interval,
        ValidationError on structurally bad statements.
        """
        self._sat = None
        if isinstance(item, UncertainRule):
            self.items.append(item)
            self._merge_rule(item)
        elif isinstance(item, BidirRule):
            self.items.append(item)
            fwd, back = item.as_rules()
            self._merge_rule(fwd)
            self._merge_rule(back)
            self.bidir_pairs.add((item.a, item.b))
        elif isinstance(item, Independence):
            self.items.append(item)
            self.independences.add(item)
            for e in (item.a, item.b, item.c):
                self.symbols.update(e.symbols)
        else:
            raise ValidationError(f"cannot insert {type(item).__name__} into a knowledge base")
        return self

    def _merge_rule(self, rule: UncertainRule) -> None:
        if rule.bounds.is_empty:
            raise InconsistencyError(self._insert_report(rule, None))
        key = (rule.antecedent, rule.consequent)
        self.symbols.update(rule.antecedent.symbols | rule.consequent.symbols)
        sources = self.cell_sources.setdefault(key, [])
        current = self.rules.get(key)
        merged = rule.bounds if current is None else interval_meet(current, rule.bounds)
        if merged.is_empty:
            raise InconsistencyError(self._insert_report(rule, current))
        sources.append(rule)
        self.rules[key] = merged

    def _insert_report(self, rule: UncertainRule, existing: Optional[ProbInterval]) -> InconsistencyReport:
        key = (rule.antecedent, rule.consequent)
        leaves = [TraceNode("axiom", prior) for prior in self.cell_sources.get(key, [])]
        leaves.append(TraceNode("axiom", rule))
        conflict = UncertainRule(rule.antecedent, rule.consequent, ProbInterval(1.0, 0.0))
        root = TraceNode("I2", conflict, tuple(leaves)) if len(leaves) > 1 else leaves[0]
        return InconsistencyReport(
            antecedent=rule.antecedent,
            consequent=rule.consequent,
            existing=existing,
            conclusion=rule.bounds,
            rule_id="axiom",
            trace=DerivationTrace(root),
        )

    def copy(self) -> "KnowledgeBase":
        out = KnowledgeBase()
        out.rules = dict(self.rules)
        out.independences = set(self.independences)
        out.symbols = set(self.symbols)
        out.items = list(self.items)
        out.bidir_pairs = set(self.bidir_pairs)
        out.cell_sources = {k: list(v) for k, v in self.cell_sources.items()}
        return out

    def __len__(self) -> int:
        return len(self.rules) + len(self.independences)


@dataclass(frozen=True)
class SaturationResult:
    kb: KnowledgeBase
    rounds: int
    converged: bool
    round_snapshots: Optional[list[dict[tuple[ConjEvent, ConjEvent], ProbInterval]]] = None


@dataclass(frozen=True)
class ConsistencyResult:
    consistent: bool
    report: Optional[InconsistencyReport] = None
    result: Optional[SaturationResult] = None


# ---------------------------------------------------------------------------
# Saturation internals: packed-integer events.
#
# Symbols are indexed in sorted order; bit i of an event is the positive
# literal of symbol i, bit k+i its negation.  Subset/superset, conjunction
# and symbol-disjointness all become single integer operations.
# ---------------------------------------------------------------------------

_POINT_ZERO = (0.0, 0.0)
_POINT_ONE = (1.0, 1.0)

#: Crossings smaller than this are floating-point noise between derivation
#: routes that agree exactly in real arithmetic (point-valued chains reach
#: the same bound along different operation orders).  Only a crossing
#: beyond the slop is reported as an inconsistency.
MEET_SLOP = 1e-9


def _proper_submasks(e: int):
    """Nonempty proper subsets of a packed event's literal set."""
    s = (e - 1) & e
    while s:
        yield s
        s = (s - 1) & e


class _Saturator:
    def __init__(self, kb: KnowledgeBase, config: SaturationConfig):
        self.kb = kb
        self.config = config
        self.symbols: tuple[str, ...] = tuple(sorted(kb.symbols))
        self.k = len(self.symbols)
        self.kmask = (1 << self.k) - 1
        self.full_syms = self.kmask
        self.index = {name: i for i, name in enumerate(self.symbols)}
        self.max_width = config.max_width
        if kb.max_event_width > config.max_width and kb.items:
            raise ValidationError(
                f"max_width {config.max_width} is below the widest event in the KB ({kb.max_event_width})"
            )

        self.store: dict[tuple[int, int], tuple[float, float]] = {}
        self.by_ant: dict[int, list[int]] = {}
        self.by_cons: dict[int, list[int]] = {}
        self.prov: dict[tuple[int, int], tuple[int, int]] = {}
        # event log entries: (rule_id, key, lo, hi, premise event ids, statement index)
        self.events: list[tuple] = []
        self.indeps: set[tuple[int, int, int]] = set()
        self.indep_ev: dict[tuple[int, int, int], int] = {}
        self.ind_by_bc: dict[tuple[int, int], list[int]] = {}
        self.ind_by_c: dict[int, list[tuple[int, int]]] = {}
        self.dirty: set[tuple[int, int]] = set()
        self.dirty_ind: set[tuple[int, int, int]] = set()
        self.snapshots: Optional[list[dict]] = [] if config.record_rounds else None

        en = config.enabled_rules
        for tag in ALL_RULES:
            setattr(self, "en_" + tag.lower(), tag in en)
        self._events_over_cache: dict[tuple[int, int], list[int]] = {}

    # -- packing -----------------------------------------------------------

    def pack(self, e: ConjEvent) -> int:
        out = 0
        for lit in e.literals:
            i = self.index[lit.symbol]
            out |= 1 << (self.k + i) if lit.negated else 1 << i
        return out

    def unpack(self, e: int) -> ConjEvent:
        lits = []
        for i in range(self.k):
            if e >> i & 1:
                lits.append(Literal(self.symbols[i]))
            elif e >> (self.k + i) & 1:
                lits.append(Literal(self.symbols[i], True))
        return ConjEvent(tuple(lits))

    def _syms(self, e: int) -> int:
        return (e | (e >> self.k)) & self.kmask

    def _flip(self, f: int) -> int:
        return f << self.k if f & self.kmask else f >> self.k

    def _literal_bits(self, e: int) -> list[int]:
        return [1 << i for i in range(2 * self.k) if e >> i & 1]

    def _events_over(self, sym_mask: int, max_w: int) -> list[int]:
        """All packed events using only the given symbols, width <= max_w."""
        key = (sym_mask, max_w)
        cached = self._events_over_cache.get(key)
        if cached is not None:
            return cached
        bits = [i for i in range(self.k) if sym_mask >> i & 1]
        out: list[int] = []
        for size in range(1, min(max_w, len(bits)) + 1):
            for combo in itertools.combinations(bits, size):
                for signs in itertools.product((0, 1), repeat=size):
                    e = 0
                    for b, neg in zip(combo, signs):
                        e |= 1 << (self.k + b) if neg else 1 << b
                    out.append(e)
        self._events_over_cache[key] = out
        return out

    # -- store updates -------------------------------------------------------

    def _prem(self, key: tuple[int, int]) -> tuple[int, ...]:
        lo_e, hi_e = self.prov[key]
        return (lo_e,) if lo_e == hi_e else (lo_e, hi_e)

    def _merge(
        self,
        key: tuple[int, int],
        lo: float,
        hi: float,
        tag: str,
        prems: tuple[int, ...],
        stmt: Optional[int] = None,
        keep_vacuous: bool = False,
    ) -> None:
        # Vacuous derived conclusions carry no bound information and are
        # dropped; vacuous axioms are kept because the rule still asserts
        # its antecedent positive, which bidirectional pairing relies on.
        if lo <= 0.0 and hi >= 1.0 and not keep_vacuous:
            return
        if lo > hi:
            if lo - hi > MEET_SLOP:
                raise InconsistencyError(self._report(key, lo, hi, tag, prems, stmt))
            return
        cur = self.store.get(key)
        eps = self.config.epsilon
        if cur is None:
            if lo < 0.0:
                lo = 0.0
            if hi > 1.0:
                hi = 1.0
            eid = len(self.events)
            self.events.append((tag, key, lo, hi, prems, stmt))
            self.store[key] = (lo, hi)
            self.prov[key] = (eid, eid)
            self.by_ant.setdefault(key[0], []).append(key[1])
            self.by_cons.setdefault(key[1], []).append(key[0])
            if lo > eps or hi < 1.0 - eps:
                self.dirty.add(key)
            return
        clo, chi = cur
        nlo = lo if lo > clo else clo
        nhi = hi if hi < chi else chi
        if nlo > nhi:
            if nlo - nhi > MEET_SLOP:
                raise InconsistencyError(self._report(key, lo, hi, tag, prems, stmt))
            return
        if nlo == clo and nhi == chi:
            return
        eid = len(self.events)
        self.events.append((tag, key, lo, hi, prems, stmt))
        self.store[key] = (nlo, nhi)
        lo_e, hi_e = self.prov[key]
        self.prov[key] = (eid if nlo != clo else lo_e, eid if nhi != chi else hi_e)
        if nlo - clo > eps or chi - nhi > eps:
            self.dirty.add(key)

    def _add_indep(
        self, triple: tuple[int, int, int], tag: str, prems: tuple[int, ...], stmt: Optional[int] = None
    ) -> None:
        if triple in self.indeps:
            return
        eid = len(self.events)
        self.events.append((tag, triple, None, None, prems, stmt))
        self.indeps.add(triple)
        self.indep_ev[triple] = eid
        a, b, c = triple
        self.ind_by_bc.setdefault((b, c), []).append(a)
        self.ind_by_c.setdefault(c, []).append((a, b))
        self.dirty_ind.add(triple)

    def _statement(self, event: tuple) -> Union[UncertainRule, Independence]:
        _tag, key, lo, hi, _prems, _stmt = event
        if len(key) == 3:
            return Independence(self.unpack(key[0]), self.unpack(key[1]), self.unpack(key[2]))
        iv = ProbInterval(lo, hi) if lo <= hi else ProbInterval(1.0, 0.0)
        return UncertainRule(self.unpack(key[0]), self.unpack(key[1]), iv)

    def _node(self, eid: int, memo: dict[int, TraceNode]) -> TraceNode:
        hit = memo.get(eid)
        if hit is not None:
            return hit
        event = self.events[eid]
        children = tuple(self._node(p, memo) for p in event[4])
        node = TraceNode(event[0], self._statement(event), children)
        memo[eid] = node
        return node

    def cell_trace(self, key: tuple[int, int]) -> Optional[TraceNode]:
        prov = self.prov.get(key)
        if prov is None:
            return None
        memo: dict[int, TraceNode] = {}
        lo_e, hi_e = prov
        if lo_e == hi_e:
            return self._node(lo_e, memo)
        lo, hi = self.store[key]
        merged = UncertainRule(self.unpack(key[0]), self.unpack(key[1]), ProbInterval(lo, hi))
        return TraceNode("I2", merged, (self._node(lo_e, memo), self._node(hi_e, memo)))

    def _report(
        self, key: tuple[int, int], lo: float, hi: float, tag: str, prems: tuple[int, ...], stmt: Optional[int]
    ) -> InconsistencyReport:
        memo: dict[int, TraceNode] = {}
        conclusion_iv = ProbInterval(min(lo, 1.0), max(hi, 0.0)) if lo <= hi else ProbInterval(1.0, 0.0)
        ant, cons = self.unpack(key[0]), self.unpack(key[1])
        concluded = TraceNode(
            tag,
            UncertainRule(ant, cons, conclusion_iv),
            tuple(self._node(p, memo) for p in prems),
        )
        existing_iv = None
        existing = self.cell_trace(key)
        if existing is not None:
            existing_iv = ProbInterval(*self.store[key])
            root = TraceNode("I2", UncertainRule(ant, cons, ProbInterval(1.0, 0.0)), (existing, concluded))
        else:
            root = concluded
        return InconsistencyReport(
            antecedent=ant,
            consequent=cons,
            existing=existing_iv,
            conclusion=conclusion_iv,
            rule_id=tag,
            trace=DerivationTrace(root),
        )

    # -- pairing helpers -----------------------------------------------------

    def _coupled(self, a: int, b: int) -> Optional[tuple[tuple[float, float], tuple[float, float]]]:
        """Forward/backward intervals of a usable bidirectional pair, or None."""
        fwd = self.store.get((a, b))
        if fwd is None:
            return None
        back = self.store.get((b, a))
        if back is None:
            return None
        if (fwd[1] == 0.0) != (back[1] == 0.0):
            return None  # annulment will surface the inconsistency
        return fwd, back

    # -- rule firing -----------------------------------------------------------

    def run(self) -> tuple[int, bool]:
        for idx, item in enumerate(self.kb.items):
            if isinstance(item, UncertainRule):
                key = (self.pack(item.antecedent), self.pack(item.consequent))
                self._merge(key, item.bounds.lo, item.bounds.hi, "axiom", (), idx, keep_vacuous=True)
            elif isinstance(item, BidirRule):
                fwd, back = item.as_rules()
                for rule in (fwd, back):
                    key = (self.pack(rule.antecedent), self.pack(rule.consequent))
                    self._merge(key, rule.bounds.lo, rule.bounds.hi, "axiom", (), idx, keep_vacuous=True)
            else:
                triple = (self.pack(item.a), self.pack(item.b), self.pack(item.c))
                self._add_indep(triple, "axiom", (), idx)

        rounds = 0
        while (self.dirty or self.dirty_ind) and rounds < self.config.max_rounds:
            rounds += 1
            cells = sorted(self.dirty)
            triples = sorted(self.dirty_ind)
            self.dirty = set()
            self.dirty_ind = set()
            for key in cells:
                self._fire_cell(key)
            for triple in triples:
                self._fire_indep(triple)
            if self.snapshots is not None:
                self.snapshots.append(dict(self.store))
        return rounds, not (self.dirty or self.dirty_ind)

    def _fire_cell(self, key: tuple[int, int]) -> None:
        a, b = key
        iv = self.store.get(key)
        if iv is None:
            return
        lo, hi = iv
        store = self.store
        k = self.k
        syms = self._syms
        max_w = self.max_width
        width_b = b.bit_count()
        prem = self._prem(key)

        if self.en_i7 and width_b == 1:
            self._merge((a, self._flip(b)), 1.0 - hi, 1.0 - lo, "I7", prem)

        if self.en_i10:
            if hi == 0.0:
                conv = store.get((b, a))
                if conv is not None and conv != _POINT_ZERO:
                    self._merge((b, a), 0.0, 0.0, "I10", prem + self._prem((b, a)))
            conv = store.get((b, a))
            if conv is not None and conv[1] == 0.0 and iv != _POINT_ZERO:
                self._merge(key, 0.0, 0.0, "I10", self._prem((b, a)) + prem)

        if self.en_i1a and width_b >= 2:
            for f in self._literal_bits(b):
                partner = (b & ~f) | self._flip(f)
                iv2 = store.get((a, partner))
                if iv2 is not None:
                    z1, z2 = chain_sum_bounds(lo, hi, iv2[0], iv2[1])
                    self._merge((a, b & ~f), z1, z2, "I1a", prem + self._prem((a, partner)))

        if self.en_i1b and lo > 0.0 and width_b >= 2:
            for c in _proper_submasks(b):
                self._merge((a, c), lo, 1.0, "I1b", prem)

        if self.en_i1c:
            if width_b >= 2:
                for c in _proper_submasks(b):
                    rest = b & ~c
                    if store.get((c, rest)) == _POINT_ONE:
                        self._merge((a, c), lo, hi, "I1c", prem + self._prem((c, rest)))
            if iv == _POINT_ONE:
                whole = a | b
                for a2 in self.by_cons.get(whole, ()):
                    iv2 = store.get((a2, whole))
                    if iv2 is not None:
                        self._merge((a2, a), iv2[0], iv2[1], "I1c", self._prem((a2, whole)) + prem)

        if self.en_i1d:
            if width_b >= 2:
                for c in _proper_submasks(b):
                    rest = b & ~c
                    if store.get((a, rest)) == _POINT_ONE:
                        self._merge((a, c), lo, hi, "I1d", prem + self._prem((a, rest)))
            if iv == _POINT_ONE:
                for e2 in list(self.by_ant.get(a, ())):
                    if e2 != b and b & e2 == b:
                        iv2 = store.get((a, e2))
                        if iv2 is not None:
                            self._merge((a, e2 & ~b), iv2[0], iv2[1], "I1d", self._prem((a, e2)) + prem)

        if self.en_i3:
            width_a = a.bit_count()
            for e2 in list(self.by_ant.get(a, ())):
                if e2 == b:
                    continue
                iv2 = store.get((a, e2))
                if iv2 is None:
                    continue
                if b & e2 == b:
                    # this cell bounds P(B|A), partner bounds P(B&C|A)
                    if lo > 0.0 and width_a + width_b <= max_w:
                        z1, z2 = cl_bounds(lo, hi, iv2[0], iv2[1])
                        self._merge((a | b, e2 & ~b), z1, z2, "I3", prem + self._prem((a, e2)))
                elif e2 & b == e2:
                    if iv2[0] > 0.0 and width_a + e2.bit_count() <= max_w:
                        z1, z2 = cl_bounds(iv2[0], iv2[1], lo, hi)
                        self._merge((a | e2, b & ~e2), z1, z2, "I3", self._prem((a, e2)) + prem)

        if self.en_i4:
            ab = a | b
            for c2 in list(self.by_ant.get(ab, ())):
                if (b | c2).bit_count() <= max_w:
                    iv2 = store.get((ab, c2))
                    if iv2 is not None:
                        self._merge((a, b | c2), lo * iv2[0], hi * iv2[1], "I4", prem + self._prem((ab, c2)))
            if a.bit_count() >= 2:
                for a1 in _proper_submasks(a):
                    rest = a & ~a1
                    iv2 = store.get((a1, rest))
                    if iv2 is not None and (rest | b).bit_count() <= max_w:
                        self._merge((a1, rest | b), iv2[0] * lo, iv2[1] * hi, "I4", self._prem((a1, rest)) + prem)

        if self.en_i5:
            self._fire_wcl_rule(a, b, lo, hi, prem)
            self._fire_wcl_pair(a, b)
            self._fire_wcl_pair(b, a)

        if self.en_i6a and hi < 1.0:
            free = self.full_syms & ~(syms(a) | syms(b))
            budget = max_w - width_b
            if free and budget >= 1:
                for c in self._events_over(free, budget):
                    self._merge((a, b | c), 0.0, hi, "I6a", prem)

        if self.en_i6b:
            for c2 in list(self.by_ant.get(b, ())):
                iv2 = store.get((b, c2))
                if iv2 is not None and (iv2 == _POINT_ZERO or iv2 == _POINT_ONE):
                    if not (syms(c2) & syms(a)) and (b | c2).bit_count() <= max_w:
                        prem2 = prem + self._prem((b, c2))
                        if iv2[0] == 0.0:
                            self._merge((a, b | c2), 0.0, 0.0, "I6b", prem2)
                        else:
                            self._merge((a, b | c2), lo, hi, "I6b", prem2)
            if iv == _POINT_ZERO or iv == _POINT_ONE:
                for a2 in self.by_cons.get(a, ()):
                    if not (syms(b) & syms(a2)) and (a | b).bit_count() <= max_w:
                        iv2 = store.get((a2, a))
                        if iv2 is None:
                            continue
                        prem2 = self._prem((a2, a)) + prem
                        if lo == 0.0:
                            self._merge((a2, a | b), 0.0, 0.0, "I6b", prem2)
                        else:
                            self._merge((a2, a | b), iv2[0], iv2[1], "I6b", prem2)

        if self.en_i8:
            free = self.full_syms & ~(syms(a) | syms(b))
            if (width_b + 1) <= max_w:
                for i in range(k):
                    if free >> i & 1:
                        for f in (1 << i, 1 << (k + i)):
                            iv2 = store.get((a, b | f))
                            if iv2 is not None:
                                z1, z2 = crn_bounds(lo, hi, iv2[0], iv2[1])
                                self._merge(
                                    (a, self._flip(f) | b), z1, z2, "I8", prem + self._prem((a, b | f))
                                )
            if width_b >= 2:
                for f in self._literal_bits(b):
                    c = b & ~f
                    iv2 = store.get((a, c))
                    if iv2 is not None:
                        z1, z2 = crn_bounds(iv2[0], iv2[1], lo, hi)
                        self._merge((a, self._flip(f) | c), z1, z2, "I8", self._prem((a, c)) + prem)

        if self.en_i9:
            self._fire_wcrn(a, b)
            self._fire_wcrn(b, a)

        if self.en_i11a:
            for a2 in self.ind_by_bc.get(key, ()):
                if (a2 | a).bit_count() <= max_w:
                    triple = (a2, a, b)
                    self._merge((a2 | a, b), lo, hi, "I11a", prem + (self.indep_ev[triple],))

        if self.en_i11b:
            for (ia, ib) in self.ind_by_c.get(b, ()):
                if ia | ib == a:
                    triple = (ia, ib, b)
                    self._merge((ib, b), lo, hi, "I11b", prem + (self.indep_ev[triple],))

        if self.en_i12:
            self._fire_sym_pair(a, b)
            self._fire_sym_pair(b, a)

        if self.en_prc or self.en_rc:
            self._fire_chain_roles(a, b)

        if self.en_prci_a or self.en_prci_b or self.en_rci1 or self.en_rci2:
            self._fire_under_indep_roles(a, b)

    # -- weak conjunction left ------------------------------------------------

    def _fire_wcl_rule(self, b: int, c: int, lo: float, hi: float, prem: tuple[int, ...]) -> None:
        """Changed cell read as the rule premise B -> C."""
        syms = self._syms
        for a2 in self.by_cons.get(b, ()):
            pair = self._coupled(a2, b)
            if pair is None or pair[1][0] <= 0.0:
                continue
            if syms(c) & syms(a2) or (a2 | b).bit_count() > self.max_width:
                continue
            z1, z2 = wcl_bounds(pair[1][0], lo, hi)
            prems = self._prem((a2, b)) + self._prem((b, a2)) + prem
            self._merge((a2 | b, c), z1, z2, "I5", prems)

    def _fire_wcl_pair(self, a: int, b: int) -> None:
        """Fire the pair a <-> b (if usable) against every rule b -> C."""
        pair = self._coupled(a, b)
        if pair is None or pair[1][0] <= 0.0:
            return
        if (a | b).bit_count() > self.max_width:
            return
        syms = self._syms
        sa = syms(a)
        prems_pair = self._prem((a, b)) + self._prem((b, a))
        v1 = pair[1][0]
        for c in list(self.by_ant.get(b, ())):
            if c == a or syms(c) & sa:
                continue
            ivc = self.store.get((b, c))
            if ivc is None:
                continue
            z1, z2 = wcl_bounds(v1, ivc[0], ivc[1])
            self._merge((a | b, c), z1, z2, "I5", prems_pair + self._prem((b, c)))

    # -- weak conjunction right with negation ----------------------------------

    def _fire_wcrn(self, x: int, y: int) -> None:
        """Treat (x, y) as a half of the A <-> F pair (F = y) or F <-> C pair (F = x)."""
        syms = self._syms
        if y.bit_count() == 1:
            pair_af = self._coupled(x, y)
            if pair_af is not None and pair_af[1][0] > 0.0:
                u2, v1 = pair_af[0][1], pair_af[1][0]
                fy = self._flip(y)
                for c in list(self.by_ant.get(y, ())):
                    if c == x or syms(c) & syms(x):
                        continue
                    pair_fc = self._coupled(y, c)
                    if pair_fc is None or pair_fc[1][0] <= 0.0:
                        continue
                    if (fy | c).bit_count() > self.max_width:
                        continue
                    z2 = wcrn_hi(u2, v1, pair_fc[0][1], pair_fc[1][0])
                    prems = (
                        self._prem((x, y)) + self._prem((y, x))
                        + self._prem((y, c)) + self._prem((c, y))
                    )
                    self._merge((x, fy | c), 0.0, z2, "I9", prems)
        if x.bit_count() == 1:
            pair_fc = self._coupled(x, y)
            if pair_fc is not None and pair_fc[1][0] > 0.0:
                fx = self._flip(x)
                for a2 in self.by_cons.get(x, ()):
                    if a2 == y or syms(a2) & syms(y):
                        continue
                    pair_af = self._coupled(a2, x)
                    if pair_af is None or pair_af[1][0] <= 0.0:
                        continue
                    if (fx | y).bit_count() > self.max_width:
                        continue
                    z2 = wcrn_hi(pair_af[0][1], pair_af[1][0], pair_fc[0][1], pair_fc[1][0])
                    prems = (
                        self._prem((a2, x)) + self._prem((x, a2))
                        + self._prem((x, y)) + self._prem((y, x))
                    )
                    self._merge((a2, fx | y), 0.0, z2, "I9", prems)

    # -- independence symmetry --------------------------------------------------

    def _fire_sym_pair(self, b: int, c: int) -> None:
        ids = self.ind_by_bc.get((b, c))
        if not ids:
            return
        pair = self._coupled(b, c)
        if pair is None:
            return
        if pair[0][0] <= 0.0 and pair[1][0] <= 0.0:
            return
        prems_pair = self._prem((b, c)) + self._prem((c, b))
        for a in list(ids):
            triple = (a, b, c)
            self._add_indep((c, b, a), "I12", (self.indep_ev[triple],) + prems_pair)

    # -- chaining macro rules -----------------------------------------------------

    def _fire_chain_roles(self, x: int, y: int) -> None:
        if self._coupled(x, y) is not None:
            for c in list(self.by_ant.get(y, ())):
                self._chain(x, y, c)
            for a2 in self.by_cons.get(x, ()):
                self._chain(a2, x, y)
        if self._coupled(y, x) is not None:
            for c in list(self.by_ant.get(x, ())):
                self._chain(y, x, c)
            for a2 in self.by_cons.get(y, ()):
                self._chain(a2, y, x)

    def _chain(self, a: int, b: int, c: int) -> None:
        if a == c or self._syms(a) & self._syms(c):
            return
        pair_ab = self._coupled(a, b)
        pair_bc = self._coupled(b, c)
        if pair_ab is None or pair_bc is None:
            return
        (u, v), (xx, yy) = pair_ab, pair_bc
        prems = (
            self._prem((a, b)) + self._prem((b, a)) + self._prem((b, c)) + self._prem((c, b))
        )
        if self.en_prc:
            z1, z2 = prc_interval(u[0], u[1], v[0], v[1], xx[0], xx[1], yy[0], yy[1])
            self._merge((a, c), z1, z2, "PRC", prems)
        if self.en_rc and b.bit_count() == 1:
            z1, z2 = rc_interval(u[0], u[1], v[0], v[1], xx[0], xx[1], yy[0], yy[1])
            self._merge((a, c), z1, z2, "RC", prems)

    def _fire_under_indep_roles(self, x: int, y: int) -> None:
        if y.bit_count() == 1:
            # (x, y) read as the A -> B premise
            for c in list(self.by_ant.get(y, ())):
                self._chain_under_indep(x, y, c)
        if x.bit_count() == 1:
            # (x, y) read as B -> C, or as the complement-side premise !B -> C
            for a2 in list(self.by_cons.get(x, ())):
                self._chain_under_indep(a2, x, y)
            fx = self._flip(x)
            for a2 in list(self.by_cons.get(fx, ())):
                self._chain_under_indep(a2, fx, y)

    def _chain_under_indep(self, a: int, b: int, c: int) -> None:
        if a == c or self._syms(a) & self._syms(c) or self._syms(b) & self._syms(c):
            return
        bb = self._flip(b)
        u = self.store.get((a, b))
        xx = self.store.get((b, c))
        yy = self.store.get((bb, c))
        if u is None or xx is None or yy is None:
            return
        t1, t2 = (a, b, c), (a, bb, c)
        if t1 not in self.indeps or t2 not in self.indeps:
            return
        prems = (
            self._prem((a, b)) + self._prem((b, c)) + self._prem((bb, c))
            + (self.indep_ev[t1], self.indep_ev[t2])
        )
        points = u[0] == u[1] and xx[0] == xx[1] and yy[0] == yy[1]
        if self.en_prci_a:
            z1, z2 = prci_forward_bounds(u[0], u[1], xx[0], xx[1], yy[0], yy[1])
            self._merge((a, c), z1, z2, "PRCI_A", prems)
        elif self.en_rci1 and points:
            w, _ = rci_values(u[0], xx[0], yy[0])
            self._merge((a, c), w, w, "RCI1", prems)
        update_ok = (xx[0] > 0.0 or yy[0] > 0.0) and u[1] > 0.0 and u[0] < 1.0
        if update_ok and (a | c).bit_count() <= self.max_width:
            if self.en_prci_b:
                z1, z2 = prci_update_bounds(u[0], u[1], xx[0], xx[1], yy[0], yy[1])
                self._merge((a | c, b), z1, z2, "PRCI_B", prems)
            elif self.en_rci2 and points:
                w, z = rci_values(u[0], xx[0], yy[0])
                if z is not None:
                    self._merge((a | c, b), z, z, "RCI2", prems)

    def _fire_indep(self, triple: tuple[int, int, int]) -> None:
        a, b, c = triple
        ind_ev = (self.indep_ev[triple],)
        if self.en_i11a:
            iv = self.store.get((b, c))
            if iv is not None and (a | b).bit_count() <= self.max_width:
                self._merge((a | b, c), iv[0], iv[1], "I11a", self._prem((b, c)) + ind_ev)
        if self.en_i11b:
            iv = self.store.get((a | b, c))
            if iv is not None:
                self._merge((b, c), iv[0], iv[1], "I11b", self._prem((a | b, c)) + ind_ev)
        if self.en_i12:
            pair = self._coupled(b, c)
            if pair is not None and (pair[0][0] > 0.0 or pair[1][0] > 0.0):
                prems = ind_ev + self._prem((b, c)) + self._prem((c, b))
                self._add_indep((c, b, a), "I12", prems)
        if self.en_prci_a or self.en_prci_b or self.en_rci1 or self.en_rci2:
            if b.bit_count() == 1:
                self._chain_under_indep(a, b, c)
                self._chain_under_indep(a, self._flip(b), c)


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------

def saturate(kb: KnowledgeBase, config: Optional[SaturationConfig] = None) -> SaturationResult:
    """Close the KB under the enabled inference rules up to the width bound.

    Returns a new, saturated knowledge base; the input is not modified.
    Raises InconsistencyError (with a derivation trace) the moment any
    merge yields an empty interval.
    """
    config = config or SaturationConfig()
    sat = _Saturator(kb, config)
    rounds, converged = sat.run()

    out = kb.copy()
    out.rules = {
        (sat.unpack(key[0]), sat.unpack(key[1])): ProbInterval(lo, hi)
        for key, (lo, hi) in sorted(sat.store.items())
    }
    out.independences = {
        Independence(sat.unpack(a), sat.unpack(b), sat.unpack(c)) for (a, b, c) in sat.indeps
    }
    out._sat = sat

    snapshots = None
    if sat.snapshots is not None:
        snapshots = [
            {
                (sat.unpack(key[0]), sat.unpack(key[1])): ProbInterval(lo, hi)
                for key, (lo, hi) in snap.items()
            }
            for snap in sat.snapshots
        ]
    return SaturationResult(kb=out, rounds=rounds, converged=converged, round_snapshots=snapshots)


def query(kb: KnowledgeBase, a: ConjEvent, b: ConjEvent) -> tuple[ProbInterval, DerivationTrace]:
    """Bounds on P(b | a) in a saturated KB, with the derivation of both bounds.

    Returns the vacuous interval [0, 1] and an empty trace when nothing
    was derived for the pair.
    """
    sat = kb._sat
    if sat is None:
        raise ValidationError("query requires a saturated knowledge base (run saturate first)")
    missing = (a.symbols | b.symbols) - kb.symbols
    if missing:
        raise UnknownSymbolError(f"unknown event symbol(s): {sorted(missing)}")
    if not a.disjoint_from(b):
        raise ValidationError(f"query events share symbols: P({b} | {a})")
    key = (sat.pack(a), sat.pack(b))
    iv = sat.store.get(key)
    if iv is None:
        return FULL, DerivationTrace(None)
    return ProbInterval(*iv), DerivationTrace(sat.cell_trace(key))


def check_consistency(kb: KnowledgeBase, config: Optional[SaturationConfig] = None) -> ConsistencyResult:
    """Saturate and report the first empty interval, if any."""
    try:
        result = saturate(kb, config)
    except InconsistencyError as err:
        return ConsistencyResult(consistent=False, report=err.report)
    return ConsistencyResult(consistent=True, result=result)
