"""Brute-force semantics over explicit joint distributions.

A joint model assigns mass to the 2^n atoms of at most five basic
events.  This module checks knowledge bases against such models and
estimates the true feasible range of a queried conditional probability
by simplex sampling with constraint repair followed by coordinate-wise
mass-shifting hill climbing.  It exists to cross-check every bound the
calculus derives, so it deliberately shares no formulas with it.

Rule constraints are linear in the mass vector and are maintained
exactly during refinement; independence constraints are quadratic and
handled by rejection plus a penalty during the feasibility phase.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, islice
from typing import Iterable, Optional

import numpy as np

from .core import (
    BidirRule,
    ConjEvent,
    Independence,
    Literal,
    ProbInterval,
    UncertainRule,
    ValidationError,
    canonicalize,
)
from .engine import KnowledgeBase

#: Operational meaning of the strict condition "P(A) > 0".
DELTA_POS = 1e-7
#: Default tolerance when checking a model against rule bounds and
#: independence products.
FEASIBILITY_TOL = 1e-6

MAX_EVENTS = 5


@dataclass(frozen=True)
class JointModel:
    """Probability mass over the 2^n atoms of n basic events.

    Atom index bit i is the truth value of ``symbols[i]``.
    """

    symbols: tuple[str, ...]
    mass: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.symbols)
        if n > MAX_EVENTS:
            raise ValidationError(f"joint models support at most {MAX_EVENTS} events, got {n}")
        mass = np.asarray(self.mass, dtype=float)
        object.__setattr__(self, "mass", mass)
        if mass.shape != (1 << n,):
            raise ValidationError(f"mass vector must have length {1 << n}, got {mass.shape}")
        if (mass < -1e-12).any():
            raise ValidationError("mass must be nonnegative")
        if abs(float(mass.sum()) - 1.0) > 1e-9:
            raise ValidationError(f"mass must sum to 1, got {mass.sum()!r}")

    @property
    def n(self) -> int:
        return len(self.symbols)

    def selector(self, e: ConjEvent) -> np.ndarray:
        return event_selector(self.symbols, e)

    def prob(self, e: ConjEvent) -> float:
        return float(self.mass @ self.selector(e))


def event_selector(symbols: tuple[str, ...], e: ConjEvent) -> np.ndarray:
    """0/1 vector over atoms consistent with all literals of the event."""
    index = {name: i for i, name in enumerate(symbols)}
    pos = neg = 0
    for lit in e.literals:
        if lit.symbol not in index:
            raise ValidationError(f"event symbol {lit.symbol!r} not among model symbols {symbols}")
        bit = 1 << index[lit.symbol]
        if lit.negated:
            neg |= bit
        else:
            pos |= bit
    atoms = np.arange(1 << len(symbols))
    return (((atoms & pos) == pos) & ((atoms & neg) == 0)).astype(float)


def eval_conditional(m: JointModel, a: ConjEvent, b: ConjEvent) -> Optional[float]:
    """P(b & a) / P(a), or None when P(a) = 0."""
    pa = m.prob(a)
    if pa <= 0.0:
        return None
    pab = float(m.mass @ (m.selector(a) * m.selector(b)))
    return pab / pa


def satisfies(m: JointModel, kb: KnowledgeBase, tol: float = FEASIBILITY_TOL) -> bool:
    """Check every rule bound (within tol), antecedent positivity, and
    every independence in its product form |P(abc)P(b) - P(ab)P(bc)| <= tol."""
    for (ant, cons), bounds in kb.rules.items():
        pa = m.prob(ant)
        if pa < DELTA_POS:
            return False
        pab = float(m.mass @ (m.selector(ant) * m.selector(cons)))
        r = pab / pa
        if r < bounds.lo - tol or r > bounds.hi + tol:
            return False
    for ind in kb.independences:
        sa, sb, sc = m.selector(ind.a), m.selector(ind.b), m.selector(ind.c)
        pb = float(m.mass @ sb)
        pab = float(m.mass @ (sa * sb))
        pbc = float(m.mass @ (sb * sc))
        pabc = float(m.mass @ (sa * sb * sc))
        if pab < DELTA_POS:
            return False
        if abs(pabc * pb - pab * pbc) > tol:
            return False
    return True


@dataclass(frozen=True)
class OracleReport:
    """Achieved range of a conditional probability over feasible models."""

    achieved_min: float
    achieved_max: float
    witness_min: Optional[JointModel]
    witness_max: Optional[JointModel]
    samples_used: int
    feasible_found: bool


# ---------------------------------------------------------------------------
# Compiled constraint system: rows @ mass + consts <= 0 for the linear part.
# ---------------------------------------------------------------------------

class _Constraints:
    def __init__(self, kb: KnowledgeBase, symbols: tuple[str, ...], query_antecedent: ConjEvent):
        self.symbols = symbols
        n_atoms = 1 << len(symbols)
        rows: list[np.ndarray] = []
        consts: list[float] = []
        self.rules: list[tuple[np.ndarray, np.ndarray, float, float]] = []

        antecedents: dict[ConjEvent, np.ndarray] = {}
        for (ant, cons), bounds in sorted(kb.rules.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1]))):
            sa = event_selector(symbols, ant)
            sab = sa * event_selector(symbols, cons)
            rows.append(sab - bounds.hi * sa)
            consts.append(0.0)
            rows.append(bounds.lo * sa - sab)
            consts.append(0.0)
            antecedents.setdefault(ant, sa)
            self.rules.append((sab, sa - sab, bounds.lo, bounds.hi))
        antecedents.setdefault(query_antecedent, event_selector(symbols, query_antecedent))
        for ant in sorted(antecedents, key=str):
            rows.append(-antecedents[ant])
            consts.append(DELTA_POS)

        self.rows = np.array(rows) if rows else np.zeros((0, n_atoms))
        self.consts = np.array(consts) if consts else np.zeros(0)

        self.indeps: list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = []
        for ind in sorted(kb.independences, key=str):
            sa = event_selector(symbols, ind.a)
            sb = event_selector(symbols, ind.b)
            sc = event_selector(symbols, ind.c)
            self.indeps.append((sa * sb * sc, sb, sa * sb, sb * sc, sa * sb))

    def lin_violation(self, batch: np.ndarray) -> np.ndarray:
        """Max positive slack of the linear constraints, per sample."""
        if not self.rows.size:
            return np.zeros(len(batch))
        vals = batch @ self.rows.T + self.consts
        return np.maximum(vals, 0.0).max(axis=1)

    def indep_violation(self, batch: np.ndarray) -> np.ndarray:
        out = np.zeros(len(batch))
        for s_abc, s_b, s_ab, s_bc, _ in self.indeps:
            g = (batch @ s_abc) * (batch @ s_b) - (batch @ s_ab) * (batch @ s_bc)
            out = np.maximum(out, np.abs(g))
        return out

    def feasible(self, batch: np.ndarray, tol: float) -> np.ndarray:
        ok = self.lin_violation(batch) <= tol
        if self.indeps:
            ok &= self.indep_violation(batch) <= tol
        return ok


#: Violations below this are indistinguishable from exact feasibility.
_VIOL_FLOOR = 1e-12


def _repair(batch: np.ndarray, constraints: _Constraints, sweeps: int = 10) -> np.ndarray:
    """Move each sample toward the rule intervals by redistributing mass
    inside each antecedent (conditional-ratio fitting); totals stay 1."""
    if not constraints.rules:
        return batch
    m = batch.copy()
    for _ in range(sweeps):
        for sab, sanb, lo, hi in constraints.rules:
            pab = m @ sab
            panb = m @ sanb
            pa = pab + panb
            with np.errstate(divide="ignore", invalid="ignore"):
                r = np.where(pa > 0, pab / np.where(pa > 0, pa, 1.0), 0.0)
            t = np.clip(r, lo, hi)
            idx = np.nonzero((pa > 1e-12) & (np.abs(t - r) > 1e-12))[0]
            if not idx.size:
                continue
            ab_cols = np.nonzero(sab)[0]
            anb_cols = np.nonzero(sanb)[0]
            sub = m[idx]
            pab_i, panb_i, pa_i, t_i = pab[idx], panb[idx], pa[idx], t[idx]
            # rescale the two halves of the antecedent so P(b|a) hits t
            with np.errstate(divide="ignore", invalid="ignore"):
                f_ab = np.where(pab_i > 0, t_i * pa_i / np.where(pab_i > 0, pab_i, 1.0), 0.0)
                f_anb = np.where(panb_i > 0, (1.0 - t_i) * pa_i / np.where(panb_i > 0, panb_i, 1.0), 0.0)
            sub[:, ab_cols] *= f_ab[:, None]
            sub[:, anb_cols] *= f_anb[:, None]
            # halves with zero mass but a positive target get spread uniformly
            need_ab = (pab_i <= 0) & (t_i > 0)
            if need_ab.any():
                sub[np.ix_(need_ab, ab_cols)] = (t_i[need_ab] * pa_i[need_ab] / len(ab_cols))[:, None]
            need_anb = (panb_i <= 0) & (t_i < 1)
            if need_anb.any():
                sub[np.ix_(need_anb, anb_cols)] = ((1.0 - t_i[need_anb]) * pa_i[need_anb] / len(anb_cols))[:, None]
            m[idx] = sub
    return m / m.sum(axis=1, keepdims=True)


def _hill_climb(
    mass: np.ndarray,
    constraints: _Constraints,
    sa: np.ndarray,
    sab: np.ndarray,
    maximize: bool,
    slack: float,
    ind_tol: float,
    max_sweeps: int = 60,
) -> np.ndarray:
    """Push P(b|a) to an extreme with pairwise atom mass moves.

    Along any single move the objective is monotone, so each accepted
    move goes to the largest step that keeps every linear constraint
    within ``slack``.  A small positive slack lets the climb walk along
    point-valued (equality) constraints, which have no interior;
    :func:`_strictify` afterwards pulls the witness back to essentially
    exact feasibility.  Moves that break an independence product beyond
    ind_tol are backtracked by halving.
    """
    m = mass.copy()
    rows, consts = constraints.rows, constraints.consts
    n_atoms = m.size
    sign = 1.0 if maximize else -1.0
    vals = rows @ m + consts if rows.size else np.zeros(0)

    for _ in range(max_sweeps):
        improved = False
        pab = float(m @ sab)
        pa = float(m @ sa)
        for j in range(n_atoms):
            if m[j] <= 1e-15:
                continue
            for i in range(n_atoms):
                if i == j:
                    continue
                gain = sign * ((sab[i] - sab[j]) * pa - (sa[i] - sa[j]) * pab)
                if gain <= 1e-15:
                    continue
                t = m[j]
                if rows.size:
                    rate = rows[:, i] - rows[:, j]
                    blocking = rate > 1e-15
                    if blocking.any():
                        t = min(t, float(((slack - vals[blocking]) / rate[blocking]).min()))
                if t <= 1e-14:
                    continue
                for _halve in range(40):
                    cand = m.copy()
                    cand[i] += t
                    cand[j] -= t
                    if constraints.indeps and constraints.indep_violation(cand[None, :])[0] > ind_tol:
                        t *= 0.5
                        if t <= 1e-14:
                            break
                        continue
                    m = cand
                    vals = rows @ m + consts if rows.size else vals
                    pab = float(m @ sab)
                    pa = float(m @ sa)
                    improved = True
                    break
        if not improved:
            break
    total = m.sum()
    if total > 0:
        m = m / total
    return m


def _total_violation(m: np.ndarray, constraints: _Constraints, ind_tol: float) -> float:
    rows, consts = constraints.rows, constraints.consts
    lin = float(np.maximum(rows @ m + consts, 0.0).sum()) if rows.size else 0.0
    ind = float(constraints.indep_violation(m[None, :])[0]) if constraints.indeps else 0.0
    return lin + max(0.0, ind - ind_tol)


def _penalty_climb(
    mass: np.ndarray,
    constraints: _Constraints,
    sa: np.ndarray,
    sab: np.ndarray,
    maximize: bool,
    ind_tol: float,
    lambdas: tuple[float, ...] = (0.3, 3.0, 30.0, 300.0, 3000.0),
    max_sweeps: int = 40,
) -> np.ndarray:
    """Optimize sign*P(b|a) - lambda*violation with pairwise moves.

    Point-valued rule bounds leave the strictly feasible set without
    interior, where slack-limited moves stall; the penalty lets the
    search zigzag along such equality surfaces (an objective-improving
    step off the surface followed by a violation-reducing step back both
    raise the merit).  Increasing lambda pins the iterate back onto the
    surface.
    """
    m = mass.copy()
    sign = 1.0 if maximize else -1.0
    n_atoms = m.size

    def merit(v: np.ndarray, lam: float) -> float:
        pa = float(v @ sa)
        f = float(v @ sab) / pa if pa > 0 else 0.0
        return sign * f - lam * _total_violation(v, constraints, ind_tol)

    for lam in lambdas:
        best = merit(m, lam)
        for _ in range(max_sweeps):
            improved = False
            for j in range(n_atoms):
                if m[j] <= 1e-15:
                    continue
                for i in range(n_atoms):
                    if i == j:
                        continue
                    t = m[j]
                    for _halve in range(25):
                        if t <= 1e-14:
                            break
                        cand = m.copy()
                        cand[i] += t
                        cand[j] -= t
                        v = merit(cand, lam)
                        if v > best + 1e-15:
                            m, best = cand, v
                            improved = True
                            break
                        t *= 0.5
            if not improved:
                break
    return m


def _strictify(
    mass: np.ndarray,
    constraints: _Constraints,
    ind_tol: float,
    step_scale: float = 100.0,
    max_sweeps: int = 200,
) -> tuple[np.ndarray, float]:
    """Drive the summed violation toward the float noise floor.

    Moves are capped at step_scale times the current violation, so a
    nearly feasible point is only nudged, never walked away from.
    Returns the improved mass and its remaining violation.
    """
    m = mass.copy()
    best = _total_violation(m, constraints, ind_tol)
    n_atoms = m.size
    for _ in range(max_sweeps):
        if best <= _VIOL_FLOOR:
            break
        improved = False
        for j in range(n_atoms):
            if m[j] <= 1e-15:
                continue
            for i in range(n_atoms):
                if i == j:
                    continue
                t = min(m[j], step_scale * best)
                for _halve in range(25):
                    if t <= 1e-16:
                        break
                    cand = m.copy()
                    cand[i] += t
                    cand[j] -= t
                    v = _total_violation(cand, constraints, ind_tol)
                    if v < best - 1e-16:
                        m, best = cand, v
                        improved = True
                        break
                    t *= 0.5
                if best <= _VIOL_FLOOR:
                    break
            if best <= _VIOL_FLOOR:
                break
        if not improved:
            break
    return m, best


def _refine_extreme(
    start: np.ndarray,
    constraints: _Constraints,
    sa: np.ndarray,
    sab: np.ndarray,
    maximize: bool,
    feas_tol: float,
) -> np.ndarray:
    """Best feasible witness from two complementary climbs.

    The slack-limited climb polishes inside fat polytopes but stalls on
    point-valued constraints; the penalty climb walks along equality
    surfaces but can wander off a good start.  Run both, strictify each
    result, keep the more extreme feasible one.
    """
    slack = 0.5 * feas_tol
    sign = 1.0 if maximize else -1.0

    candidates = [_strictify(start, constraints, feas_tol)]
    w = _hill_climb(start, constraints, sa, sab, maximize=maximize, slack=slack, ind_tol=feas_tol)
    candidates.append(_strictify(w, constraints, feas_tol))
    w = _penalty_climb(start, constraints, sa, sab, maximize=maximize, ind_tol=feas_tol)
    w, _ = _strictify(w, constraints, feas_tol)
    w = _hill_climb(w, constraints, sa, sab, maximize=maximize, slack=slack, ind_tol=feas_tol)
    candidates.append(_strictify(w, constraints, feas_tol))

    best: Optional[np.ndarray] = None
    best_f = -float("inf")
    for cand, viol in candidates:
        if viol > feas_tol:
            continue
        pa = float(cand @ sa)
        if pa < DELTA_POS:
            continue
        f = sign * float(cand @ sab) / pa
        if f > best_f:
            best, best_f = cand, f
    return best if best is not None else start


def estimate_range(
    kb: KnowledgeBase,
    a: ConjEvent,
    b: ConjEvent,
    budget: int = 100_000,
    seed: int = 0,
    feas_tol: float = FEASIBILITY_TOL,
    chunk_size: int = 20_000,
) -> OracleReport:
    """Inner-approximate the feasible range of P(b | a) under the KB.

    Draws ``budget`` simplex-uniform mass vectors (each chunk on its own
    seed substream, so results do not depend on how chunks would be
    distributed across workers), repairs them toward the rule intervals,
    keeps the feasible ones, and hill-climbs the extremal survivors.
    Returns a no-feasible-model report when nothing satisfies the KB.
    """
    symbols = tuple(sorted(set(kb.symbols) | a.symbols | b.symbols))
    if len(symbols) > MAX_EVENTS:
        raise ValidationError(f"oracle supports at most {MAX_EVENTS} events, got {len(symbols)}")
    constraints = _Constraints(kb, symbols, a)
    n_atoms = 1 << len(symbols)
    sa = event_selector(symbols, a)
    sab = sa * event_selector(symbols, b)

    best_lo: Optional[tuple[float, np.ndarray]] = None
    best_hi: Optional[tuple[float, np.ndarray]] = None
    least_bad: Optional[tuple[float, np.ndarray]] = None

    n_chunks = max(1, -(-budget // chunk_size))
    streams = np.random.SeedSequence(seed).spawn(n_chunks)
    drawn = 0
    for ci in range(n_chunks):
        size = min(chunk_size, budget - drawn)
        if size <= 0:
            break
        drawn += size
        rng = np.random.default_rng(streams[ci])
        batch = rng.dirichlet(np.ones(n_atoms), size=size)
        if ci == 0:
            # deterministic corner seeds widen the spread of climb starts
            corners = np.full((n_atoms + 1, n_atoms), 0.1 / max(n_atoms - 1, 1))
            for i in range(n_atoms):
                corners[i, i] = 0.9
            corners[n_atoms] = 1.0 / n_atoms
            batch = np.vstack([corners, batch])
        batch = _repair(batch, constraints)
        ok = constraints.feasible(batch, feas_tol)
        pa = batch @ sa
        ok &= pa >= DELTA_POS

        viol = constraints.lin_violation(batch) + constraints.indep_violation(batch)
        vi = int(np.argmin(viol))
        if least_bad is None or viol[vi] < least_bad[0]:
            least_bad = (float(viol[vi]), batch[vi].copy())

        if ok.any():
            f = np.where(ok, (batch @ sab) / np.where(pa > 0, pa, 1.0), np.nan)
            lo_i = int(np.nanargmin(f))
            hi_i = int(np.nanargmax(f))
            if best_lo is None or f[lo_i] < best_lo[0]:
                best_lo = (float(f[lo_i]), batch[lo_i].copy())
            if best_hi is None or f[hi_i] > best_hi[0]:
                best_hi = (float(f[hi_i]), batch[hi_i].copy())

    if best_lo is None:
        start = None
        if least_bad is not None:
            restored, viol = _strictify(least_bad[1], constraints, feas_tol)
            if viol <= feas_tol:
                start = restored
        if start is None:
            return OracleReport(float("nan"), float("nan"), None, None, drawn, False)
        f0 = float(start @ sab) / float(start @ sa)
        best_lo = best_hi = (f0, start)

    def conditional(v: np.ndarray) -> float:
        return float(v @ sab) / float(v @ sa)

    witnesses = []
    for start, maximize in ((best_lo[1], False), (best_hi[1], True)):
        witnesses.append(
            _refine_extreme(start, constraints, sa, sab, maximize=maximize, feas_tol=feas_tol)
        )
    w_lo, w_hi = witnesses
    return OracleReport(
        achieved_min=conditional(w_lo),
        achieved_max=conditional(w_hi),
        witness_min=JointModel(symbols, w_lo),
        witness_max=JointModel(symbols, w_hi),
        samples_used=drawn,
        feasible_found=True,
    )


def grid_range(
    kb: KnowledgeBase,
    a: ConjEvent,
    b: ConjEvent,
    denominator: int,
    tol: float = 1e-9,
    chunk_size: int = 100_000,
) -> tuple[float, float, int]:
    """Exhaustive oracle: scan every mass vector on the 1/denominator grid.

    Returns (min, max, feasible_count) of P(b|a) over feasible grid
    points.  Only practical for small denominators; the point count is
    C(denominator + 2^n - 1, 2^n - 1).
    """
    symbols = tuple(sorted(set(kb.symbols) | a.symbols | b.symbols))
    constraints = _Constraints(kb, symbols, a)
    n_atoms = 1 << len(symbols)
    sa = event_selector(symbols, a)
    sab = sa * event_selector(symbols, b)

    lo, hi, count = float("inf"), float("-inf"), 0
    combos = combinations(range(denominator + n_atoms - 1), n_atoms - 1)
    while True:
        block = list(islice(combos, chunk_size))
        if not block:
            break
        bars = np.array(block)
        padded = np.hstack(
            [np.full((len(bars), 1), -1), bars, np.full((len(bars), 1), denominator + n_atoms - 1)]
        )
        counts = np.diff(padded, axis=1) - 1
        batch = counts / denominator
        ok = constraints.feasible(batch, tol)
        pa = batch @ sa
        ok &= pa >= DELTA_POS
        if ok.any():
            f = (batch[ok] @ sab) / pa[ok]
            lo = min(lo, float(f.min()))
            hi = max(hi, float(f.max()))
            count += int(ok.sum())
    return lo, hi, count


# ---------------------------------------------------------------------------
# Model and KB generators for soundness testing.
# ---------------------------------------------------------------------------

def random_joint_model(symbols: Iterable[str], seed: int) -> JointModel:
    """Simplex-uniform random joint distribution."""
    symbols = tuple(sorted(symbols))
    rng = np.random.default_rng(seed)
    return JointModel(symbols, rng.dirichlet(np.ones(1 << len(symbols))))


def random_product_model(
    symbols: Iterable[str],
    seed: int,
    edge_prob: float = 0.6,
    cpt_low: float = 0.1,
    cpt_high: float = 0.9,
) -> JointModel:
    """Random directed-network model: every atom positive, and the local
    factorization makes many conditional independences hold exactly."""
    symbols = tuple(sorted(symbols))
    n = len(symbols)
    rng = np.random.default_rng(seed)
    parents: list[list[int]] = []
    for i in range(n):
        parents.append([j for j in range(i) if rng.random() < edge_prob])
    tables = []
    for i in range(n):
        tables.append(rng.uniform(cpt_low, cpt_high, size=1 << len(parents[i])))
    mass = np.zeros(1 << n)
    for atom in range(1 << n):
        p = 1.0
        for i in range(n):
            pa_idx = 0
            for slot, j in enumerate(parents[i]):
                if atom >> j & 1:
                    pa_idx |= 1 << slot
            p_true = tables[i][pa_idx]
            p *= p_true if atom >> i & 1 else 1.0 - p_true
        mass[atom] = p
    return JointModel(symbols, mass)


def _events_up_to(symbols: tuple[str, ...], max_width: int) -> list[ConjEvent]:
    out = []
    for size in range(1, max_width + 1):
        for combo in combinations(symbols, size):
            for signs in range(1 << size):
                out.append(
                    canonicalize(Literal(s, bool(signs >> i & 1)) for i, s in enumerate(combo))
                )
    return out


def random_kb_from_model(
    m: JointModel,
    slack: float,
    seed: int,
    n_rules: int = 6,
    n_indep: int = 2,
    bidir_prob: float = 0.5,
    max_event_width: int = 2,
) -> KnowledgeBase:
    """Sample a KB that the given model satisfies by construction.

    Rules receive the model's true conditional widened by up to
    ``slack`` on each side; independence statements are emitted only
    when the model satisfies them exactly (product-form models supply
    plenty of such triples).
    """
    if not 0.0 <= slack < 1.0:
        raise ValidationError("slack must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    events = _events_up_to(m.symbols, max_event_width)
    kb = KnowledgeBase()

    def widened(t: float) -> ProbInterval:
        return ProbInterval(
            max(0.0, t - slack * rng.random()),
            min(1.0, t + slack * rng.random()),
        )

    made = 0
    for _ in range(n_rules * 20):
        if made >= n_rules:
            break
        ant = events[rng.integers(len(events))]
        cons = events[rng.integers(len(events))]
        if not ant.disjoint_from(cons):
            continue
        t = eval_conditional(m, ant, cons)
        if t is None or m.prob(ant) < DELTA_POS:
            continue
        if rng.random() < bidir_prob and m.prob(cons) >= DELTA_POS:
            t_back = eval_conditional(m, cons, ant)
            try:
                kb.insert(BidirRule(ant, cons, widened(t), widened(t_back)))
            except ValidationError:
                kb.insert(UncertainRule(ant, cons, widened(t)))
        else:
            kb.insert(UncertainRule(ant, cons, widened(t)))
        made += 1

    if n_indep > 0:
        exact: list[Independence] = []
        singles = [e for e in events if e.width == 1]
        conds = [e for e in events if e.width <= 2]
        for a in singles:
            for b in conds:
                if not a.disjoint_from(b):
                    continue
                for c in singles:
                    if not (c.disjoint_from(a) and c.disjoint_from(b)):
                        continue
                    sa, sb, sc = m.selector(a), m.selector(b), m.selector(c)
                    pab = float(m.mass @ (sa * sb))
                    if pab < 1e-9:
                        continue
                    g = float(m.mass @ (sa * sb * sc)) * float(m.mass @ sb) - pab * float(
                        m.mass @ (sb * sc)
                    )
                    if abs(g) <= 1e-13:
                        exact.append(Independence(a, b, c))
        if exact:
            picks = rng.permutation(len(exact))[:n_indep]
            for i in sorted(picks):
                kb.insert(exact[i])
    return kb
