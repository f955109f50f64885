"""Local inference rules over interval-bounded conditional probabilities.

Every operation is a pure function from premise statements to one
:class:`Conclusion`.  Inconsistent conclusions (empty intervals) are
returned as values, never raised: inconsistency of a knowledge base is a
diagnosis, not a programming error.  Structural problems with the
premises themselves (wrong shapes, violated guards) do raise.

Case dispatch in the chaining theorems uses exact comparisons on the
stored floats (``v1 == 0``, ``y1 == 1``, ...): the extreme cases are
genuinely discontinuous, and tolerance-based guards would change which
case fires.  Every fractional term is evaluated only inside the branch
where its denominator is provably positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .core import (
    BidirRule,
    ConjEvent,
    EMPTY,
    Independence,
    KbError,
    Literal,
    ProbInterval,
    UncertainRule,
    ValidationError,
    canonicalize,
    conjoin,
    interval_meet,
)


class CalculusError(KbError):
    """Base class for misapplied inference rules."""


class PremiseShapeError(CalculusError):
    """The premise events do not decompose as the rule requires."""


class PreconditionError(CalculusError):
    """A numeric guard of the rule (e.g. a positive lower bound) fails."""


#: Tags of all implemented inference rules and derived macro rules.
RULE_TAGS = frozenset(
    {
        "I1a", "I1b", "I1c", "I1d", "I2", "I3", "I4", "I5", "I6a", "I6b",
        "I7", "I8", "I9", "I10", "I11a", "I11b", "I12",
        "RC", "PRC", "RCI1", "RCI2", "PRCI_A", "PRCI_B",
    }
)


@dataclass(frozen=True)
class Conclusion:
    """One derived statement, tagged with the rule that produced it.

    ``statement`` is an UncertainRule for every rule except I12, which
    concludes an Independence.  A rule statement with an empty interval
    marks a detected inconsistency among the premises.
    """

    statement: Union[UncertainRule, Independence]
    rule_id: str
    premises: tuple[object, ...]

    @property
    def bounds(self) -> ProbInterval:
        if not isinstance(self.statement, UncertainRule):
            raise TypeError("independence conclusions carry no bounds")
        return self.statement.bounds

    @property
    def is_inconsistent(self) -> bool:
        return isinstance(self.statement, UncertainRule) and self.statement.bounds.is_empty


def _interval(lo: float, hi: float) -> ProbInterval:
    """Clamp a computed bound pair into a ProbInterval, empty if lo > hi."""
    if lo > hi:
        return EMPTY
    return ProbInterval(min(max(lo, 0.0), 1.0), min(max(hi, 0.0), 1.0))


def _rule(ant: ConjEvent, cons: ConjEvent, lo: float, hi: float) -> UncertainRule:
    return UncertainRule(ant, cons, _interval(lo, hi))


def _single_literal(e: ConjEvent) -> Literal:
    if e.width != 1:
        raise PremiseShapeError(f"expected a single basic event, got {e}")
    return e.literals[0]


def _split_consequents(small: ConjEvent, big: ConjEvent) -> ConjEvent:
    """Return big minus small, requiring small to be a proper subset."""
    small_set = set(small.literals)
    big_set = set(big.literals)
    if not (small_set < big_set):
        raise PremiseShapeError(f"{small} is not a proper part of {big}")
    return canonicalize(tuple(big_set - small_set))


# ---------------------------------------------------------------------------
# Bound arithmetic shared with the saturation engine (float level).
# ---------------------------------------------------------------------------

def chain_sum_bounds(x1: float, x2: float, y1: float, y2: float) -> tuple[float, float]:
    return x1 + y1, min(1.0, x2 + y2)


def cl_bounds(x1: float, x2: float, y1: float, y2: float) -> tuple[float, float]:
    # requires x1 > 0
    return y1 / x2, min(1.0, y2 / x1)


def wcl_bounds(v1: float, y1: float, y2: float) -> tuple[float, float]:
    # requires v1 > 0
    return max(0.0, (v1 + y1 - 1.0) / v1), min(1.0, y2 / v1)


def crn_bounds(x1: float, x2: float, y1: float, y2: float) -> tuple[float, float]:
    return max(0.0, x1 - y2), x2 - y1


def wcrn_hi(u2: float, v1: float, x2: float, y1: float) -> float:
    # requires v1 > 0 and y1 > 0
    return min(1.0, (1.0 - y1) * u2 * x2 / (v1 * y1))


def rc_interval(
    u1: float, u2: float, v1: float, v2: float,
    x1: float, x2: float, y1: float, y2: float,
) -> tuple[float, float]:
    """Sound chaining of A<->B and B<->C into bounds on P(C|A)."""
    if v1 > 0.0:
        z1 = (u1 / v1) * max(0.0, v1 + x1 - 1.0)
    elif x1 == 1.0:
        z1 = u1
    else:
        z1 = 0.0

    if v1 > 0.0 and y1 > 0.0:
        tau = u2 * x2 / (v1 * y1)
        z2 = min(1.0, u2 + tau * (1.0 - y1), 1.0 - u1 + tau * y1, tau)
    elif v1 > 0.0:
        z2 = min(1.0, 1.0 - u1 + u2 * x2 / v1)
    elif x2 == 0.0:
        z2 = 1.0 - u1
    else:
        z2 = 1.0
    return z1, z2


def prc_interval(
    u1: float, u2: float, v1: float, v2: float,
    x1: float, x2: float, y1: float, y2: float,
) -> tuple[float, float]:
    """Precise chaining: greatest lower / least upper bound on P(C|A).

    Lower-bound cases: v1 > 0; v1 = 0 with x1 = 1; otherwise 0.
    Upper-bound cases: v1 > 0 with y1 > 0 (four-term minimum plus the
    saddle term x2 / (y1*(v1-x2) + x2)); v1 > 0 with y1 = 0; v1 = 0 with
    x2 = 0; v1 = 0 with y1 = 1; otherwise 1.
    """
    if v1 > 0.0:
        z1 = max(0.0, u1 * (1.0 - (1.0 - x1) / v1))
    elif x1 == 1.0:
        z1 = u1
    else:
        z1 = 0.0

    if v1 > 0.0 and y1 > 0.0:
        t_ratio = u2 * x2 / (v1 * y1)
        t_grow = u2 * (1.0 - (x2 / v1) * (1.0 - 1.0 / y1))
        t_shrink = 1.0 - u1 * (1.0 - x2 / v1)
        # denominator = v1*y1 + x2*(1 - y1) > 0 inside this case
        t_saddle = x2 / (y1 * (v1 - x2) + x2)
        z2 = min(1.0, t_ratio, t_grow, t_shrink, t_saddle)
    elif v1 > 0.0:
        z2 = min(1.0, 1.0 - u1 * (1.0 - x2 / v1))
    elif x2 == 0.0:
        z2 = 1.0 - u1
    elif y1 == 1.0:
        z2 = u2
    else:
        z2 = 1.0
    return z1, z2


def rci_values(u: float, x: float, y: float) -> tuple[float, Optional[float]]:
    """Point chaining under independence: w = P(C|A); z = P(B|AC) if w > 0."""
    w = u * x + (1.0 - u) * y
    z = u * x / w if w > 0.0 else None
    return w, z


def prci_forward_bounds(
    u1: float, u2: float, x1: float, x2: float, y1: float, y2: float
) -> tuple[float, float]:
    """Precise bounds on P(C|A) for the interval mixture u*x + (1-u)*y."""
    z1 = u1 * x1 + (1.0 - u1) * y1 if x1 > y1 else u2 * x1 + (1.0 - u2) * y1
    z2 = u2 * x2 + (1.0 - u2) * y2 if x2 > y2 else u1 * x2 + (1.0 - u1) * y2
    return z1, z2


def prci_update_bounds(
    u1: float, u2: float, x1: float, x2: float, y1: float, y2: float
) -> tuple[float, float]:
    """Precise bounds on P(B|AC); requires x1 > 0 or y1 > 0.

    Consistency of the rule base forces u2 > 0 and u1 < 1 whenever both
    independences hold, which keeps the otherwise-case denominators
    positive; combinations outside that envelope raise.
    """
    if x1 == 0.0 and y1 == 0.0:
        raise PreconditionError("update bounds need x1 > 0 or y1 > 0")
    if u1 == 0.0 and y2 == 0.0:
        z1 = 1.0
    else:
        den = u1 * x1 + (1.0 - u1) * y2
        if den == 0.0:
            raise PreconditionError("lower-bound denominator vanished (inconsistent premise combination)")
        z1 = u1 * x1 / den
    if u2 == 1.0 and x2 == 0.0:
        z2 = 0.0
    else:
        den = u2 * x2 + (1.0 - u2) * y1
        if den == 0.0:
            raise PreconditionError("upper-bound denominator vanished (inconsistent premise combination)")
        z2 = u2 * x2 / den
    return z1, z2


# ---------------------------------------------------------------------------
# Inference rules on whole statements.
# ---------------------------------------------------------------------------

def chain(
    variant: str,
    r1: UncertainRule,
    r2: Optional[UncertainRule] = None,
    keep: Optional[ConjEvent] = None,
) -> Conclusion:
    """Chaining: project a compound consequent down to one of its parts.

    Variants:
      ``a``: premises A -> F&C and A -> !F&C (F a single basic event);
             concludes A -> C with the bound sums, empty if the lower
             bounds already sum past 1.
      ``b``: single premise A -> B&C plus the part ``keep`` = C to retain;
             concludes A -> C with upper bound relaxed to 1.
      ``c``: premises A -> B&C and C -> B with point bounds [1, 1];
             concludes A -> C.
      ``d``: premises A -> B&C and A -> B with point bounds [1, 1];
             concludes A -> C.
    """
    if variant == "a":
        if r2 is None:
            raise PremiseShapeError("chain variant a needs two premises")
        if r1.antecedent != r2.antecedent:
            raise PremiseShapeError("chain premises must share their antecedent")
        lits1, lits2 = set(r1.consequent.literals), set(r2.consequent.literals)
        extra1, extra2 = lits1 - lits2, lits2 - lits1
        if len(extra1) != 1 or len(extra2) != 1:
            raise PremiseShapeError("consequents must differ in exactly one basic event")
        f1, f2 = next(iter(extra1)), next(iter(extra2))
        if f1.complement() != f2:
            raise PremiseShapeError("differing literals must be complementary")
        common = lits1 & lits2
        if not common:
            raise PremiseShapeError("chained consequents share no remaining event")
        lo, hi = chain_sum_bounds(r1.bounds.lo, r1.bounds.hi, r2.bounds.lo, r2.bounds.hi)
        rule = _rule(r1.antecedent, canonicalize(tuple(common)), lo, hi)
        return Conclusion(rule, "I1a", (r1, r2))

    if variant == "b":
        if keep is None:
            raise PremiseShapeError("chain variant b needs the consequent part to keep")
        _split_consequents(keep, r1.consequent)  # validates keep ⊊ consequent
        rule = _rule(r1.antecedent, keep, r1.bounds.lo, 1.0)
        return Conclusion(rule, "I1b", (r1,))

    if variant in ("c", "d"):
        if r2 is None:
            raise PremiseShapeError(f"chain variant {variant} needs two premises")
        if r2.bounds != ProbInterval(1.0, 1.0):
            raise PremiseShapeError("second premise must carry point bounds [1, 1]")
        if variant == "c":
            # r2 = C -> B, r1 = A -> B&C
            expected = conjoin(r2.antecedent, r2.consequent)
            if r1.consequent != expected:
                raise PremiseShapeError(f"consequent {r1.consequent} does not decompose as {expected}")
            rule = _rule(r1.antecedent, r2.antecedent, r1.bounds.lo, r1.bounds.hi)
        else:
            # r2 = A -> B, r1 = A -> B&C
            if r2.antecedent != r1.antecedent:
                raise PremiseShapeError("chain premises must share their antecedent")
            remainder = _split_consequents(r2.consequent, r1.consequent)
            rule = _rule(r1.antecedent, remainder, r1.bounds.lo, r1.bounds.hi)
        return Conclusion(rule, "I1" + variant, (r1, r2))

    raise PremiseShapeError(f"unknown chain variant {variant!r}")


def sharpen(r1: UncertainRule, r2: UncertainRule) -> Conclusion:
    """Intersect two bound assertions on the same conditional."""
    if r1.antecedent != r2.antecedent or r1.consequent != r2.consequent:
        raise PremiseShapeError("sharpening needs identical antecedent and consequent")
    rule = UncertainRule(r1.antecedent, r1.consequent, interval_meet(r1.bounds, r2.bounds))
    return Conclusion(rule, "I2", (r1, r2))


def conjunction_left(r_b: UncertainRule, r_bc: UncertainRule) -> Conclusion:
    """From A -> B (with positive lower bound) and A -> B&C, bound P(C | A&B)."""
    if r_b.antecedent != r_bc.antecedent:
        raise PremiseShapeError("conjunction left needs a shared antecedent")
    if r_b.bounds.lo <= 0.0:
        raise PreconditionError("conjunction left needs a positive lower bound on P(B|A)")
    c = _split_consequents(r_b.consequent, r_bc.consequent)
    lo, hi = cl_bounds(r_b.bounds.lo, r_b.bounds.hi, r_bc.bounds.lo, r_bc.bounds.hi)
    rule = _rule(conjoin(r_b.antecedent, r_b.consequent), c, lo, hi)
    return Conclusion(rule, "I3", (r_b, r_bc))


def conjunction_right(r_b: UncertainRule, r_c: UncertainRule) -> Conclusion:
    """From A -> B and A&B -> C, bound P(B&C | A) by the product."""
    if r_c.antecedent != conjoin(r_b.antecedent, r_b.consequent):
        raise PremiseShapeError("second antecedent must be the conjunction of the first rule's events")
    rule = _rule(
        r_b.antecedent,
        conjoin(r_b.consequent, r_c.consequent),
        r_b.bounds.lo * r_c.bounds.lo,
        r_b.bounds.hi * r_c.bounds.hi,
    )
    return Conclusion(rule, "I4", (r_b, r_c))


def weak_conjunction_left(bi: BidirRule, r_c: UncertainRule) -> Conclusion:
    """From A <-> B (backward lower bound positive) and B -> C, bound P(C | A&B).

    The divisor is the lower bound on P(A|B): both produced bounds are
    provable under that reading of the premise pair.
    """
    if r_c.antecedent != bi.b:
        raise PremiseShapeError("rule premise must be conditioned on the bidirectional rule's second event")
    v1 = bi.backward.lo
    if v1 <= 0.0:
        raise PreconditionError("weak conjunction left needs a positive lower bound on P(A|B)")
    lo, hi = wcl_bounds(v1, r_c.bounds.lo, r_c.bounds.hi)
    rule = _rule(conjoin(bi.a, bi.b), r_c.consequent, lo, hi)
    return Conclusion(rule, "I5", (bi, r_c))


def weak_conjunction_right(
    variant: str,
    r: UncertainRule,
    r2: Optional[UncertainRule] = None,
    extend: Optional[ConjEvent] = None,
) -> Conclusion:
    """Extend a consequent with an extra event C.

    Variant ``a`` takes the extra event directly and concludes
    A -> [0, x2] B&C.  Variant ``b`` takes a second premise B -> C with
    point bounds 0 or 1 and keeps (or zeroes) the original bounds.
    """
    if variant == "a":
        if extend is None:
            raise PremiseShapeError("weak conjunction right (a) needs the extending event")
        if extend == r.antecedent:
            raise PreconditionError("extending event must differ from the antecedent")
        rule = _rule(r.antecedent, conjoin(r.consequent, extend), 0.0, r.bounds.hi)
        return Conclusion(rule, "I6a", (r,))

    if variant == "b":
        if r2 is None:
            raise PremiseShapeError("weak conjunction right (b) needs two premises")
        if r2.antecedent != r.consequent:
            raise PremiseShapeError("second premise must be conditioned on the first consequent")
        if r2.consequent == r.antecedent:
            raise PreconditionError("extending event must differ from the antecedent")
        if not r2.bounds.is_point or r2.bounds.lo not in (0.0, 1.0):
            raise PremiseShapeError("second premise needs point bounds 0 or 1")
        cons = conjoin(r.consequent, r2.consequent)
        if r2.bounds.lo == 0.0:
            rule = _rule(r.antecedent, cons, 0.0, 0.0)
        else:
            rule = _rule(r.antecedent, cons, r.bounds.lo, r.bounds.hi)
        return Conclusion(rule, "I6b", (r, r2))

    raise PremiseShapeError(f"unknown weak conjunction right variant {variant!r}")


def negate(r: UncertainRule) -> Conclusion:
    """Complement a single-literal consequent: bounds become [1-x2, 1-x1]."""
    lit = _single_literal(r.consequent)
    rule = _rule(r.antecedent, canonicalize((lit.complement(),)), 1.0 - r.bounds.hi, 1.0 - r.bounds.lo)
    return Conclusion(rule, "I7", (r,))


def conjunction_right_negation(r_c: UncertainRule, r_fc: UncertainRule) -> Conclusion:
    """From A -> C and A -> F&C, bound P(!F&C | A) by the difference."""
    if r_c.antecedent != r_fc.antecedent:
        raise PremiseShapeError("conjunction right with negation needs a shared antecedent")
    f = _split_consequents(r_c.consequent, r_fc.consequent)
    lit = _single_literal(f)
    lo, hi = crn_bounds(r_c.bounds.lo, r_c.bounds.hi, r_fc.bounds.lo, r_fc.bounds.hi)
    rule = _rule(r_c.antecedent, conjoin(canonicalize((lit.complement(),)), r_c.consequent), lo, hi)
    return Conclusion(rule, "I8", (r_c, r_fc))


def weak_conjunction_right_negation(bi_af: BidirRule, bi_fc: BidirRule) -> Conclusion:
    """From A <-> F and F <-> C, bound P(!F&C | A) from above."""
    if bi_af.b != bi_fc.a:
        raise PremiseShapeError("bidirectional premises must share the middle event")
    lit = _single_literal(bi_af.b)
    if bi_af.a == bi_fc.b:
        raise PreconditionError("outer events must differ")
    v1, y1 = bi_af.backward.lo, bi_fc.backward.lo
    if v1 <= 0.0 or y1 <= 0.0:
        raise PreconditionError("weak conjunction right with negation needs positive backward lower bounds")
    hi = wcrn_hi(bi_af.forward.hi, v1, bi_fc.forward.hi, y1)
    rule = _rule(bi_af.a, conjoin(canonicalize((lit.complement(),)), bi_fc.b), 0.0, hi)
    return Conclusion(rule, "I9", (bi_af, bi_fc))


def annul(zero_back: UncertainRule, r: UncertainRule) -> Conclusion:
    """P(A|B) = 0 forces P(B|A) = 0 for any asserted rule A -> B."""
    if zero_back.bounds != ProbInterval(0.0, 0.0):
        raise PremiseShapeError("annulment needs a point-zero premise")
    if zero_back.antecedent != r.consequent or zero_back.consequent != r.antecedent:
        raise PremiseShapeError("annulment premises must be mutually converse")
    rule = _rule(r.antecedent, r.consequent, 0.0, 0.0)
    return Conclusion(rule, "I10", (zero_back, r))


def invariance(variant: str, r: UncertainRule, ind: Independence) -> Conclusion:
    """Move the independent event in or out of the conditioning side.

    Variant ``a``: B -> C with I(A, B, C) concludes A&B -> C.
    Variant ``b``: A&B -> C with I(A, B, C) concludes B -> C.
    """
    if r.consequent != ind.c:
        raise PremiseShapeError("rule consequent must match the independence's third event")
    if variant == "a":
        if r.antecedent != ind.b:
            raise PremiseShapeError("rule antecedent must match the independence's condition")
        rule = _rule(conjoin(ind.a, ind.b), ind.c, r.bounds.lo, r.bounds.hi)
        return Conclusion(rule, "I11a", (r, ind))
    if variant == "b":
        if r.antecedent != conjoin(ind.a, ind.b):
            raise PremiseShapeError("rule antecedent must be the conjunction of the independence's first two events")
        rule = _rule(ind.b, ind.c, r.bounds.lo, r.bounds.hi)
        return Conclusion(rule, "I11b", (r, ind))
    raise PremiseShapeError(f"unknown invariance variant {variant!r}")


def independence_symmetry(ind: Independence, bi: BidirRule) -> Conclusion:
    """Swap the roles of the outer events when the middle pair is positive."""
    if bi.a != ind.b or bi.b != ind.c:
        raise PremiseShapeError("bidirectional premise must connect the independence's last two events")
    if bi.forward.lo <= 0.0 and bi.backward.lo <= 0.0:
        raise PreconditionError("symmetry needs a positive lower bound in one direction")
    return Conclusion(Independence(ind.c, ind.b, ind.a), "I12", (ind, bi))


def rc_bounds(bi_ab: BidirRule, bi_bc: BidirRule) -> Conclusion:
    """Sound chaining of A <-> B and B <-> C (B a single basic event)."""
    if bi_ab.b != bi_bc.a:
        raise PremiseShapeError("bidirectional premises must share the middle event")
    _single_literal(bi_ab.b)
    z1, z2 = rc_interval(
        bi_ab.forward.lo, bi_ab.forward.hi, bi_ab.backward.lo, bi_ab.backward.hi,
        bi_bc.forward.lo, bi_bc.forward.hi, bi_bc.backward.lo, bi_bc.backward.hi,
    )
    return Conclusion(_rule(bi_ab.a, bi_bc.b, z1, z2), "RC", (bi_ab, bi_bc))


def prc_bounds(bi_ab: BidirRule, bi_bc: BidirRule) -> Conclusion:
    """Precise chaining of A <-> B and B <-> C (conjunctive events allowed)."""
    if bi_ab.b != bi_bc.a:
        raise PremiseShapeError("bidirectional premises must share the middle event")
    z1, z2 = prc_interval(
        bi_ab.forward.lo, bi_ab.forward.hi, bi_ab.backward.lo, bi_ab.backward.hi,
        bi_bc.forward.lo, bi_bc.forward.hi, bi_bc.backward.lo, bi_bc.backward.hi,
    )
    return Conclusion(_rule(bi_ab.a, bi_bc.b, z1, z2), "PRC", (bi_ab, bi_bc))


def rci_point(u: float, x: float, y: float) -> tuple[float, Optional[float]]:
    """Point chaining under independence.

    Given P(B|A) = u, P(C|B) = x, P(C|!B) = y together with the two
    independences of C from A under B and under !B, returns
    (P(C|A), P(B|A&C)); the second component is None when P(C|A) = 0.
    """
    for name, p in (("u", u), ("x", x), ("y", y)):
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"probability {name} out of range: {p}")
    return rci_values(u, x, y)


def prci_forward(u: ProbInterval, x: ProbInterval, y: ProbInterval) -> ProbInterval:
    """Precise interval bounds on P(C|A) under the two independences."""
    z1, z2 = prci_forward_bounds(u.lo, u.hi, x.lo, x.hi, y.lo, y.hi)
    return ProbInterval(z1, z2)


def prci_update(u: ProbInterval, x: ProbInterval, y: ProbInterval) -> ProbInterval:
    """Precise interval bounds on the updated belief P(B|A&C)."""
    z1, z2 = prci_update_bounds(u.lo, u.hi, x.lo, x.hi, y.lo, y.hi)
    return ProbInterval(z1, z2)
