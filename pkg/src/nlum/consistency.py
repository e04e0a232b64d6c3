"""Consistency notions for lower and upper probabilities on finite algebras.

Every notion is decided on an explicit :class:`Assessment`.  Where a
closed-form characterisation exists it is implemented as a predicate; the
envelope and gain linear programs are always available as independent oracles.
Witnesses are re-verified before being returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping, Optional, Sequence, Union

from . import kernels
from ._pykernels import (
    ADDITIVE,
    MONOTONE,
    QUASI_SUPERADDITIVE,
    SELF_CONJUGATE_LOWER,
    SELF_CONJUGATE_PRECISE,
    SUBADDITIVE,
    SUPERADDITIVE,
    TWO_ALTERNATING,
    TWO_MONOTONE,
    UPPER_SUPERADDITIVE,
)
from .core import Event, Orientation, Partition, RationalLike, as_mask, parse_rational, popcount
from .lp import Constraint, LinearProgram, Relation, Sense, Simplex, Status, solve
from .nlmodel import ModelTag, NLModel, classify

ZERO, ONE = Fraction(0), Fraction(1)


class WitnessError(AssertionError):
    """A checker produced a witness that does not reproduce its own verdict."""


class OracleDisagreement(AssertionError):
    """A closed-form predicate and its oracle returned different verdicts."""


# ---------------------------------------------------------------- assessment


@dataclass(frozen=True)
class Assessment:
    """Values of a lower or upper probability on a set of events (bit-sets)."""

    partition: Partition
    domain: tuple[int, ...]
    values: tuple[Fraction, ...]
    orientation: Orientation = Orientation.LOWER

    def __post_init__(self) -> None:
        if len(self.domain) != len(self.values):
            raise ValueError("domain and values differ in length")
        full = self.partition.full_mask
        for m in self.domain:
            if not 0 <= m <= full:
                raise ValueError(f"mask {m:#x} outside the algebra of {self.partition.n} atoms")
        if list(self.domain) != sorted(set(self.domain)):
            raise ValueError("domain must be strictly increasing bit-sets")
        object.__setattr__(self, "orientation", Orientation(self.orientation))

    @classmethod
    def full(
        cls,
        partition: Partition,
        values: Sequence[RationalLike],
        orientation: Union[str, Orientation] = Orientation.LOWER,
    ) -> "Assessment":
        """Values for every event, indexed by bit-set."""
        masks = partition.masks()
        if len(values) != len(masks):
            raise ValueError(f"expected {len(masks)} values, got {len(values)}")
        return cls(partition, tuple(masks), tuple(parse_rational(v) for v in values), Orientation(orientation))

    @classmethod
    def from_mapping(
        cls,
        partition: Partition,
        mapping: Mapping[Union[Event, int], RationalLike],
        orientation: Union[str, Orientation] = Orientation.LOWER,
    ) -> "Assessment":
        items = {}
        for key, value in mapping.items():
            mask = as_mask(partition, key)
            if mask in items:
                raise ValueError(f"event {partition.format_mask(mask)} assessed twice")
            items[mask] = parse_rational(value)
        domain = tuple(sorted(items))
        return cls(partition, domain, tuple(items[m] for m in domain), Orientation(orientation))

    @property
    def n(self) -> int:
        return self.partition.n

    @property
    def is_full(self) -> bool:
        return len(self.domain) == 1 << self.partition.n

    def as_dict(self) -> dict[int, Fraction]:
        return dict(zip(self.domain, self.values))

    def value(self, event: Union[Event, int]) -> Fraction:
        mask = as_mask(self.partition, event)
        try:
            return self._lookup[mask]
        except KeyError:
            raise KeyError(f"event {self.partition.format_mask(mask)} is not assessed") from None

    def __contains__(self, event: Union[Event, int]) -> bool:
        return as_mask(self.partition, event) in self._lookup

    @property
    def _lookup(self) -> dict[int, Fraction]:
        cache = self.__dict__.get("_cache")
        if cache is None:
            cache = self.as_dict()
            object.__setattr__(self, "_cache", cache)
        return cache

    @property
    def table(self) -> tuple[Fraction, ...]:
        if not self.is_full:
            raise ValueError("assessment is not defined on the whole algebra")
        return self.values

    def conjugate(self) -> "Assessment":
        """``v'(not A) = 1 - v(A)``, with the orientation flipped."""
        full = self.partition.full_mask
        return Assessment.from_mapping(
            self.partition,
            {full ^ m: 1 - v for m, v in zip(self.domain, self.values)},
            self.orientation.flipped,
        )

    def as_lower(self) -> "Assessment":
        return self if self.orientation is Orientation.LOWER else self.conjugate()

    def restrict(self, domain: Iterable[Union[Event, int]]) -> "Assessment":
        masks = sorted({as_mask(self.partition, e) for e in domain})
        return Assessment(self.partition, tuple(masks), tuple(self.value(m) for m in masks), self.orientation)

    def with_orientation(self, orientation: Union[str, Orientation]) -> "Assessment":
        return Assessment(self.partition, self.domain, self.values, Orientation(orientation))

    def is_negation_invariant(self) -> bool:
        full = self.partition.full_mask
        return all((full ^ m) in self._lookup for m in self.domain)


def _domain_view(assessment: Assessment, domain) -> Assessment:
    return assessment if domain is None else assessment.restrict(domain)


# ---------------------------------------------------------------- verdicts


@dataclass(frozen=True)
class Witness:
    """Evidence for a verdict.

    ``kind`` is one of ``"events"`` (a violating event or pair),
    ``"stakes"`` (a combination of bets whose gain is negative on every
    atom), ``"probability"`` (a dominating probability), ``"envelope"``
    (probabilities, possibly shifted, whose lower envelope is the
    assessment) or ``"reachability"``.
    """

    kind: str
    events: tuple[int, ...] = ()
    #: ``(event, stake)`` pairs with non-negative stakes.
    stakes: tuple[tuple[int, Fraction], ...] = ()
    #: The single event bought at a negative stake, and that stake's size.
    negative: Optional[tuple[int, Fraction]] = None
    #: Maximum of the gain over the atoms (strictly negative for a violation).
    max_gain: Optional[Fraction] = None
    probabilities: tuple[tuple[Fraction, ...], ...] = ()
    shifts: tuple[Fraction, ...] = ()
    value: Optional[Fraction] = None
    note: str = ""


@dataclass(frozen=True)
class Verdict:
    holds: bool
    notion: str
    method: str
    witness: Optional[Witness] = None
    details: dict = field(default_factory=dict, compare=False)

    def __bool__(self) -> bool:
        return self.holds


# ---------------------------------------------------------------- helpers


def _int_scale(values: Sequence[Fraction]) -> tuple[list[int], int]:
    d = 1
    for v in values:
        if v.denominator != 1:
            d = lcm(d, v.denominator)
    return [int(v * d) for v in values], d


def _atom_sum(p: Sequence[Fraction], mask: int) -> Fraction:
    return sum((x for i, x in enumerate(p) if mask >> i & 1), ZERO)


def _pair_holds(kind: int, v: dict[int, Fraction], a: int, b: int, full: int) -> Optional[bool]:
    """Truth of the pairwise inequality, or ``None`` when a needed event is missing."""
    need = {a, b}
    if kind in (TWO_MONOTONE, TWO_ALTERNATING, QUASI_SUPERADDITIVE, UPPER_SUPERADDITIVE):
        need.add(a & b)
    if kind in (TWO_MONOTONE, TWO_ALTERNATING, SUBADDITIVE, SUPERADDITIVE, ADDITIVE):
        need.add(a | b)
    if not need <= v.keys():
        return None
    if kind == TWO_MONOTONE:
        return v[a | b] + v[a & b] >= v[a] + v[b]
    if kind == TWO_ALTERNATING:
        return v[a | b] + v[a & b] <= v[a] + v[b]
    if kind == SUBADDITIVE:
        return v[a | b] <= v[a] + v[b]
    if kind == SUPERADDITIVE:
        return bool(a & b) or v[a | b] >= v[a] + v[b]
    if kind == QUASI_SUPERADDITIVE:
        return 1 + v[a & b] >= v[a] + v[b]
    if kind == UPPER_SUPERADDITIVE:
        return (a | b) != full or v[a] + v[b] >= 1 + v[a & b]
    if kind == ADDITIVE:
        return bool(a & b) or v[a | b] == v[a] + v[b]
    raise ValueError(f"unknown pair kind {kind}")


def _scan(assessment: Assessment, kind: int) -> Optional[tuple[int, int]]:
    """First violating pair, scanning ``A`` then ``B >= A`` in bit-set order."""
    part = assessment.partition
    if assessment.is_full:
        ints, scale = _int_scale(assessment.values)
        found = kernels.scan_pairs(ints, part.n, kind, scale)
        if found is not None:
            a, b = found
            v = assessment._lookup
            if kind == MONOTONE:
                ok = v[a] <= v[b]
            elif kind == SELF_CONJUGATE_LOWER:
                ok = v[a] + v[b] <= 1
            elif kind == SELF_CONJUGATE_PRECISE:
                ok = v[a] + v[b] == 1
            else:
                ok = _pair_holds(kind, v, a, b, part.full_mask)
            if ok:
                raise WitnessError("pair scan reported a pair that satisfies the inequality")
        return found
    v = assessment._lookup
    full = part.full_mask
    dom = assessment.domain
    if kind == MONOTONE:
        for a in dom:
            for b in dom:
                if a & ~b == 0 and v[a] > v[b]:
                    return a, b
        return None
    if kind in (SELF_CONJUGATE_LOWER, SELF_CONJUGATE_PRECISE):
        for a in dom:
            if (full ^ a) in v:
                s = v[a] + v[full ^ a]
                if (s > 1) if kind == SELF_CONJUGATE_LOWER else (s != 1):
                    return a, full ^ a
        return None
    for i, a in enumerate(dom):
        for b in dom[i:]:
            if _pair_holds(kind, v, a, b, full) is False:
                return a, b
    return None


def _pair_verdict(assessment: Assessment, kind: int, notion: str) -> Verdict:
    found = _scan(assessment, kind)
    if found is None:
        return Verdict(True, notion, "pairwise")
    return Verdict(False, notion, "pairwise", Witness("events", events=found))


def _gain(values: dict[int, Fraction], stakes, negative, n: int) -> list[Fraction]:
    """Gain of the bets on every atom."""
    gains = []
    for i in range(n):
        bit = 1 << i
        g = ZERO
        for m, s in stakes:
            g += s * ((1 if m & bit else 0) - values[m])
        if negative is not None:
            m, s = negative
            g -= s * ((1 if m & bit else 0) - values[m])
        gains.append(g)
    return gains


def _stake_witness(assessment: Assessment, stakes, negative=None, strict_bound=None) -> Witness:
    """Build and verify a negative-gain witness for a lower assessment."""
    v = assessment._lookup
    stakes = tuple((m, s) for m, s in stakes if s)
    if any(s < 0 for _, s in stakes) or (negative is not None and negative[1] < 0):
        raise WitnessError("stakes must be non-negative")
    gains = _gain(v, stakes, negative, assessment.n)
    worst = max(gains)
    if worst >= 0:
        raise WitnessError("stakes do not produce a uniformly negative gain")
    return Witness("stakes", stakes=stakes, negative=negative, max_gain=worst)


# ---------------------------------------------------------------- capacity


def is_capacity(assessment: Assessment, domain=None) -> Verdict:
    """Normalisation at the empty and sure events plus monotonicity."""
    a = _domain_view(assessment, domain)
    v = a._lookup
    full = a.partition.full_mask
    if 0 in v and v[0] != 0:
        return Verdict(False, "capacity", "pairwise", Witness("events", events=(0,), value=v[0], note="normalization"))
    if full in v and v[full] != 1:
        return Verdict(False, "capacity", "pairwise", Witness("events", events=(full,), value=v[full], note="normalization"))
    return _pair_verdict(a, MONOTONE, "capacity")


# ---------------------------------------------------------------- pairwise notions


def is_2monotone(assessment: Assessment, domain=None) -> Verdict:
    return _pair_verdict(_domain_view(assessment, domain), TWO_MONOTONE, "2-monotone")


def is_2alternating(assessment: Assessment, domain=None) -> Verdict:
    return _pair_verdict(_domain_view(assessment, domain), TWO_ALTERNATING, "2-alternating")


def is_subadditive(assessment: Assessment, domain=None) -> Verdict:
    return _pair_verdict(_domain_view(assessment, domain), SUBADDITIVE, "subadditive")


def is_superadditive(assessment: Assessment, domain=None) -> Verdict:
    return _pair_verdict(_domain_view(assessment, domain), SUPERADDITIVE, "superadditive")


def is_quasi_superadditive(assessment: Assessment, domain=None) -> Verdict:
    """``1 + v(A and B) >= v(A) + v(B)`` for all pairs."""
    return _pair_verdict(_domain_view(assessment, domain), QUASI_SUPERADDITIVE, "quasi-superadditive")


quasi_superadditive = is_quasi_superadditive


def is_upper_superadditive(assessment: Assessment, domain=None) -> Verdict:
    """``v(A) + v(B) >= 1 + v(A and B)`` whenever ``A or B`` is sure (conjugate of superadditivity)."""
    return _pair_verdict(_domain_view(assessment, domain), UPPER_SUPERADDITIVE, "upper-superadditive")


def is_additive(assessment: Assessment, domain=None) -> Verdict:
    return _pair_verdict(_domain_view(assessment, domain), ADDITIVE, "additive")


# ---------------------------------------------------------------- 2-coherence


def is_2coherent(assessment: Assessment, domain=None) -> Verdict:
    """2-coherence; upper assessments are checked through their conjugate.

    Non-negative lower assessments on negation-invariant domains use the
    monotonicity / self-conjugacy / boundary characterisation.  Anything
    else goes to the two-bet gain search.
    """
    a = _domain_view(assessment, domain).as_lower()
    if not (all(x >= 0 for x in a.values) and a.is_negation_invariant()):
        return gain_incoherence_search(a, "2coherence")
    v = a._lookup
    full = a.partition.full_mask
    if 0 in v:
        for m, target in ((0, ZERO), (full, ONE)):
            if v[m] != target:
                return Verdict(False, "2-coherence", "predicate",
                               Witness("events", events=(m,), value=v[m], note="boundary"))
    found = _scan(a, MONOTONE)
    if found is not None:
        return Verdict(False, "2-coherence", "predicate", Witness("events", events=found, note="monotonicity"))
    found = _scan(a, SELF_CONJUGATE_LOWER)
    if found is not None:
        return Verdict(False, "2-coherence", "predicate", Witness("events", events=found, note="conjugacy"))
    return Verdict(True, "2-coherence", "predicate")


is_2coherent_lower = is_2coherent


# ---------------------------------------------------------------- sure loss and coherence


def _dominance_program(a: Assessment) -> tuple[LinearProgram, list[int]]:
    """Probabilities on the atoms dominating ``a``; rows with ``v <= 0`` are implied and dropped."""
    n = a.n
    cons = [Constraint((ONE,) * n, Relation.EQ, ONE)]
    rows = []
    for m, x in zip(a.domain, a.values):
        if x <= 0:
            continue
        cons.append(Constraint(tuple(ONE if m >> i & 1 else ZERO for i in range(n)), Relation.GE, x))
        rows.append(m)
    return LinearProgram((ZERO,) * n, tuple(cons)), rows


def _sure_loss_from_farkas(a: Assessment, rows: list[int], y: Sequence[Fraction]) -> Witness:
    """Turn the Farkas vector of the dominance system into betting stakes."""
    return _stake_witness(a, list(zip(rows, y[1:])))


def _dominating(a: Assessment, p: Sequence[Fraction]) -> bool:
    if any(x < 0 for x in p) or sum(p) != 1:
        return False
    return all(_atom_sum(p, m) >= x for m, x in zip(a.domain, a.values))


def avoids_sure_loss(assessment: Assessment, domain=None) -> Verdict:
    """Some probability dominates the (lower) assessment."""
    a = _domain_view(assessment, domain).as_lower()
    program, rows = _dominance_program(a)
    result = solve(program)
    if result.status is Status.OPTIMAL:
        p = result.solution
        if not _dominating(a, p):
            raise WitnessError("dominating probability fails verification")
        return Verdict(True, "avoids sure loss", "lp", Witness("probability", probabilities=(p,)))
    return Verdict(False, "avoids sure loss", "lp", _sure_loss_from_farkas(a, rows, result.certificate))


avoids_sure_loss_lower = avoids_sure_loss


def _verify_envelope(a: Assessment, probs, shifts=None) -> None:
    shifts = shifts or (ZERO,) * len(probs)
    for p in probs:
        if any(x < 0 for x in p) or sum(p) != 1:
            raise WitnessError("envelope member is not a probability")
    for m, x in zip(a.domain, a.values):
        low = min(_atom_sum(p, m) + t for p, t in zip(probs, shifts))
        if low != x:
            raise WitnessError(f"envelope gives {low} at {a.partition.format_mask(m)}, expected {x}")


def is_coherent(assessment: Assessment, domain=None) -> Verdict:
    """Lower envelope test: for every event, the least dominating probability attains the value.

    Upper assessments are checked through their conjugate.  On success the
    witness lists probabilities whose lower envelope reproduces the
    assessment; on failure it names the event whose minimum exceeds its
    value, or gives sure-loss stakes.
    """
    a = _domain_view(assessment, domain).as_lower()
    program, rows = _dominance_program(a)
    simplex = Simplex(program)
    if simplex.status is Status.INFEASIBLE:
        return Verdict(False, "coherence", "envelope", _sure_loss_from_farkas(a, rows, simplex.farkas))
    n = a.n
    found: list[tuple[Fraction, ...]] = []
    for m, x in zip(a.domain, a.values):
        if any(_atom_sum(p, m) == x for p in found):
            continue
        res = simplex.optimize(tuple(ONE if m >> i & 1 else ZERO for i in range(n)))
        if res.optimum != x:
            p = res.solution
            if not _dominating(a, p) or _atom_sum(p, m) != res.optimum:
                raise WitnessError("minimising probability fails verification")
            return Verdict(False, "coherence", "envelope",
                           Witness("events", events=(m,), value=res.optimum, probabilities=(p,),
                                   note="minimum over dominating probabilities exceeds the value"))
        found.append(res.solution)
    _verify_envelope(a, found)
    return Verdict(True, "coherence", "envelope", Witness("envelope", probabilities=tuple(found)))


is_coherent_lower = is_coherent


def is_coherent_upper(assessment: Assessment, domain=None) -> Verdict:
    return is_coherent(_domain_view(assessment, domain).with_orientation(Orientation.UPPER))


# ---------------------------------------------------------------- convexity


def _convex_program(a: Assessment) -> LinearProgram:
    n = a.n
    cons = [Constraint((ONE,) * n + (ZERO,), Relation.EQ, ONE)]
    for m, x in zip(a.domain, a.values):
        cons.append(Constraint(tuple(ONE if m >> i & 1 else ZERO for i in range(n)) + (ONE,), Relation.GE, x))
    lower = (ZERO,) * n + (None,)
    return LinearProgram((ZERO,) * (n + 1), tuple(cons), Sense.MIN, lower=lower)


def is_convex(assessment: Assessment, domain=None) -> Verdict:
    """Lower envelope of shifted probabilities ``P + alpha``.

    For each event ``E`` the least value of ``P(E) + t`` over shifted
    probabilities dominating the assessment must equal its value.
    """
    a = _domain_view(assessment, domain).as_lower()
    if not a.domain:
        return Verdict(True, "convexity", "envelope", Witness("envelope"))
    n = a.n
    simplex = Simplex(_convex_program(a))
    found: list[tuple[tuple[Fraction, ...], Fraction]] = []
    for m, x in zip(a.domain, a.values):
        if any(_atom_sum(p, m) + t == x for p, t in found):
            continue
        res = simplex.optimize(tuple(ONE if m >> i & 1 else ZERO for i in range(n)) + (ONE,))
        p, t = res.solution[:n], res.solution[n]
        if res.optimum != x:
            return Verdict(False, "convexity", "envelope",
                           Witness("events", events=(m,), value=res.optimum, probabilities=(p,), shifts=(t,),
                                   note="minimum over dominating shifted probabilities exceeds the value"))
        found.append((p, t))
    probs = tuple(p for p, _ in found)
    shifts = tuple(t for _, t in found)
    _verify_envelope(a, probs, shifts)
    return Verdict(True, "convexity", "envelope", Witness("envelope", probabilities=probs, shifts=shifts))


is_convex_lower = is_convex


def is_C_convex(assessment: Assessment, domain=None) -> Verdict:
    """Convex, with the empty event assessed at 0."""
    a = _domain_view(assessment, domain).as_lower()
    if 0 not in a:
        return Verdict(False, "C-convexity", "envelope", Witness("events", events=(0,), note="empty event not assessed"))
    if a.value(0) != 0:
        return Verdict(False, "C-convexity", "envelope", Witness("events", events=(0,), value=a.value(0)))
    inner = is_convex(a)
    return Verdict(inner.holds, "C-convexity", inner.method, inner.witness)


is_C_convex_lower = is_C_convex


# ---------------------------------------------------------------- gain search


def _indicator(m: int, i: int) -> int:
    return 1 if m >> i & 1 else 0


def _gain_rows(a: Assessment, events: Sequence[int], extra: Sequence[Fraction] = ()):
    """Coefficients of sum_j s_j (I_{E_j}(w) - v(E_j)) for each atom ``w``."""
    v = a._lookup
    return [[Fraction(_indicator(m, i)) - v[m] for m in events] for i in range(a.n)]


def _asl_gain(a: Assessment) -> Optional[Witness]:
    events = list(a.domain)
    rows = _gain_rows(a, events)
    prog = LinearProgram((ZERO,) * len(events), tuple(Constraint(tuple(r), Relation.LE, -ONE) for r in rows))
    res = solve(prog)
    if res.status is not Status.OPTIMAL:
        return None
    return _stake_witness(a, list(zip(events, res.solution)))


def _coherence_gain(a: Assessment) -> Optional[Witness]:
    w = _asl_gain(a)
    if w is not None:
        return w
    events = list(a.domain)
    rows = _gain_rows(a, events)
    v = a._lookup
    for m0 in events:
        cons = []
        for i, r in enumerate(rows):
            cons.append(Constraint(tuple(r) + (-(_indicator(m0, i) - v[m0]),), Relation.LE, -ONE))
        res = solve(LinearProgram((ZERO,) * (len(events) + 1), tuple(cons)))
        if res.status is Status.OPTIMAL:
            x = res.solution
            return _stake_witness(a, list(zip(events, x[:-1])), (m0, x[-1]))
    return None


def _convexity_gain(a: Assessment) -> Optional[Witness]:
    events = list(a.domain)
    rows = _gain_rows(a, events)
    v = a._lookup
    k = len(events)
    for m0 in events:
        cons = [Constraint((ONE,) * k + (ZERO,), Relation.EQ, ONE)]
        for i, r in enumerate(rows):
            # sum s_j g_j(w) - z <= g_0(w)
            cons.append(Constraint(tuple(r) + (-ONE,), Relation.LE, _indicator(m0, i) - v[m0]))
        objective = (ZERO,) * k + (ONE,)
        res = solve(LinearProgram(objective, tuple(cons), Sense.MIN, lower=(ZERO,) * k + (None,)))
        if res.status is Status.OPTIMAL and res.optimum < 0:
            x = res.solution
            w = _stake_witness(a, list(zip(events, x[:-1])), (m0, ONE))
            if w.max_gain != res.optimum:
                raise WitnessError("convex gain maximum does not match the program")
            return w
    return None


def _two_stake_solution(g1: Sequence[int], g0: Sequence[int]) -> Optional[tuple[Fraction, Fraction]]:
    """Some ``s1 >= 0`` and free ``s0`` with ``s1 g1(w) - s0 g0(w) <= -1`` on every atom.

    The gains are integers.  Fourier-Motzkin elimination of ``s0`` leaves
    inequalities ``p s1 <= q`` in integers, whose solution set is a closed
    interval of ``s1``; its ends are compared by cross-multiplication.
    """
    lows = [(x1, x0) for x1, x0 in zip(g1, g0) if x0 > 0]
    highs = [(x1, x0) for x1, x0 in zip(g1, g0) if x0 < 0]
    ineqs = [(x1, -1) for x1, x0 in zip(g1, g0) if x0 == 0]
    # s0 x0l >= 1 + s1 x1l and s0 x0h >= 1 + s1 x1h, combined through x0l * |x0h|
    ineqs += [(x1h * x0l - x1l * x0h, x0h - x0l) for x1l, x0l in lows for x1h, x0h in highs]
    lo_n, lo_d = 0, 1
    hi = None
    for p, q in ineqs:
        if p > 0:
            if hi is None or q * hi[1] < hi[0] * p:
                hi = (q, p)
        elif p < 0:
            if -q * lo_d > lo_n * -p:
                lo_n, lo_d = -q, -p
        elif q < 0:
            return None
    if hi is not None and lo_n * hi[1] > hi[0] * lo_d:
        return None
    s1 = Fraction(lo_n, lo_d)
    if lows:
        s0 = max((s1 * x1 + 1) / x0 for x1, x0 in lows)
    elif highs:
        s0 = min((s1 * x1 + 1) / x0 for x1, x0 in highs)
    else:
        s0 = ZERO
    return s1, s0


def _two_coherence_gain(a: Assessment) -> Optional[Witness]:
    v = a._lookup
    events = list(a.domain)
    n = a.n
    # each gain vector scaled by the denominator of its value: feasibility is unchanged
    scale = {m: v[m].denominator for m in events}
    gains = {m: [_indicator(m, i) * scale[m] - v[m].numerator for i in range(n)] for m in events}
    for m0 in events:
        g0 = gains[m0]
        for m1 in events:
            found = _two_stake_solution(gains[m1], g0)
            if found is not None:
                s1, s0 = found[0] * scale[m1], found[1] * scale[m0]
                stakes = [(m1, s1)] if s1 else []
                if s0 >= 0:
                    w = _stake_witness(a, stakes, (m0, s0) if s0 else None)
                else:
                    # a negative s0 is a second ordinary bet on m0
                    w = _stake_witness(a, stakes + [(m0, -s0)] if m0 != m1 else [(m0, s1 - s0)])
                if w.max_gain > -1:
                    raise WitnessError("two-event stakes do not reach the normalised gain bound")
                return w
    return None


_GAIN_SEARCHES = {
    "asl": ("avoids sure loss", _asl_gain),
    "coherence": ("coherence", _coherence_gain),
    "convexity": ("convexity", _convexity_gain),
    "2coherence": ("2-coherence", _two_coherence_gain),
}


def gain_incoherence_search(assessment: Assessment, notion: str, domain=None) -> Verdict:
    """Look for admissible stakes whose gain is negative on every atom.

    ``notion`` selects the admissible stakes: ``"coherence"``, ``"asl"``,
    ``"convexity"`` or ``"2coherence"``.  The verdict holds when no such
    stakes exist.
    """
    try:
        name, search = _GAIN_SEARCHES[notion]
    except KeyError:
        raise ValueError(f"unknown notion {notion!r}; choose from {sorted(_GAIN_SEARCHES)}") from None
    a = _domain_view(assessment, domain).as_lower()
    witness = search(a)
    return Verdict(witness is None, name, "gain", witness)


# ---------------------------------------------------------------- precise probabilities


def is_precise_probability(assessment: Assessment, domain=None) -> Verdict:
    """Avoids sure loss and ``v(A) + v(not A) = 1`` on a negation-invariant domain.

    On the whole algebra the verdict is cross-checked against finite
    additivity with normalisation.
    """
    a = _domain_view(assessment, domain).with_orientation(Orientation.LOWER)
    if not a.is_negation_invariant():
        raise ValueError("precise probability check needs a domain closed under complement")
    found = _scan(a, SELF_CONJUGATE_PRECISE)
    if found is not None:
        verdict = Verdict(False, "precise probability", "asl+conjugacy",
                          Witness("events", events=found, note="v(A) + v(not A) != 1"))
    else:
        asl = avoids_sure_loss(a)
        verdict = Verdict(asl.holds, "precise probability", "asl+conjugacy", asl.witness)
    if a.is_full:
        additive = (
            a.value(a.partition.full_mask) == 1
            and all(a.value(1 << i) >= 0 for i in range(a.n))
            and _scan(a, ADDITIVE) is None
        )
        if additive != verdict.holds:
            raise OracleDisagreement("additivity and sure-loss characterisations of precision disagree")
    return verdict


# ---------------------------------------------------------------- filters and ideals


def _as_masks(partition: Partition, events) -> frozenset[int]:
    return frozenset(as_mask(partition, e) for e in events)


def is_filter(partition: Partition, events) -> Verdict:
    """Contains the sure event, not the empty one; closed under meets and supersets."""
    s = _as_masks(partition, events)
    full = partition.full_mask
    if full not in s:
        return Verdict(False, "filter", "closure", Witness("events", events=(full,), note="sure event missing"))
    if 0 in s:
        return Verdict(False, "filter", "closure", Witness("events", events=(0,), note="empty event present"))
    for a in sorted(s):
        for i in range(partition.n):
            if not a >> i & 1 and (a | 1 << i) not in s:
                return Verdict(False, "filter", "closure", Witness("events", events=(a, a | 1 << i), note="not upward closed"))
    members = sorted(s)
    for i, a in enumerate(members):
        for b in members[i + 1:]:
            if a & b not in s:
                return Verdict(False, "filter", "closure", Witness("events", events=(a, b), note="meet missing"))
    return Verdict(True, "filter", "closure")


def is_ideal(partition: Partition, events) -> Verdict:
    """Contains the empty event, not the sure one; closed under joins and subsets."""
    s = _as_masks(partition, events)
    full = partition.full_mask
    if 0 not in s:
        return Verdict(False, "ideal", "closure", Witness("events", events=(0,), note="empty event missing"))
    if full in s:
        return Verdict(False, "ideal", "closure", Witness("events", events=(full,), note="sure event present"))
    for a in sorted(s):
        for i in range(partition.n):
            if a >> i & 1 and (a & ~(1 << i)) not in s:
                return Verdict(False, "ideal", "closure", Witness("events", events=(a, a & ~(1 << i)), note="not downward closed"))
    members = sorted(s)
    for i, a in enumerate(members):
        for b in members[i + 1:]:
            if a | b not in s:
                return Verdict(False, "ideal", "closure", Witness("events", events=(a, b), note="join missing"))
    return Verdict(True, "ideal", "closure")


def null_events(assessment: Assessment) -> frozenset[int]:
    return frozenset(m for m, x in zip(assessment.domain, assessment.values) if x == 0)


def universal_events(assessment: Assessment) -> frozenset[int]:
    return frozenset(m for m, x in zip(assessment.domain, assessment.values) if x == 1)


def universal_implies_null(assessment: Assessment) -> Verdict:
    """``v(A) = 1`` implies ``v(not A) = 0``."""
    full = assessment.partition.full_mask
    v = assessment._lookup
    for m, x in zip(assessment.domain, assessment.values):
        if x == 1 and (full ^ m) in v and v[full ^ m] != 0:
            return Verdict(False, "universal implies null", "pairwise", Witness("events", events=(m, full ^ m)))
    return Verdict(True, "universal implies null", "pairwise")


# ---------------------------------------------------------------- horizontal barrier models


class NotSubadditive(ValueError):
    """Structure results for horizontal barrier models need a subadditive upper probability."""


def is_hbm_family(model: NLModel) -> bool:
    low = model.params.lower()
    return low.b > 0 and low.a + low.b >= 1 and low.b + 2 * low.a <= 1


def is_strict_hbm(model: NLModel) -> bool:
    """Horizontal barrier proper: the pari-mutuel boundary ``a + b = 1`` excluded."""
    low = model.params.lower()
    return is_hbm_family(model) and low.a + low.b > 1


@dataclass(frozen=True)
class HBMStructure:
    #: essential event -> (omega_plus atom index, omega_star atom index)
    decomposition: dict[int, tuple[int, int]]
    essential_atoms: tuple[int, ...]
    #: ``(m, bound)`` with ``b > bound`` verified, or ``None`` when fewer than two atoms are essential.
    b_bound: Optional[tuple[int, Fraction]]
    distinct_values: int
    #: True when the upper probability is 1 on every event with two or more atoms (forced at ``n + 2`` values).
    vacuous_off_atoms: bool


def hbm_structure(model: NLModel) -> HBMStructure:
    """Decompose the essential events of the upper probability of a subadditive HBM."""
    if not is_strict_hbm(model):
        raise ValueError("structure results apply to horizontal barrier models with a + b > 1 only")
    upper = model.upper()
    ua = upper.to_assessment()
    if not is_subadditive(ua):
        raise NotSubadditive("upper probability is not subadditive")
    part = model.partition
    n, full = part.n, part.full_mask
    v = ua._lookup
    sets = upper.event_sets()
    p0 = model.p0
    b, c = upper.b, upper.a
    essential_atoms = tuple(i for i in range(n) if (1 << i) in sets.essential)
    decomposition = {}
    for m in sorted(sets.essential):
        plus = [i for i in range(n) if m >> i & 1 and (1 << i) in sets.essential]
        if len(plus) != 1:
            raise WitnessError(f"essential event {part.format_mask(m)} has {len(plus)} essential atoms")
        (wp,) = plus
        for i in range(n):
            if m >> i & 1 and i != wp and (p0.weights[i] != 0 or (1 << i) not in sets.null):
                raise WitnessError("non-leading atom of an essential event must be null with zero base mass")
        if v[m] != v[1 << wp]:
            raise WitnessError("essential event and its leading atom differ in value")
        if sum(1 for i in range(n) if m >> i & 1 and v[1 << i] == v[m]) != 1:
            raise WitnessError("leading atom is not unique")
        star = [
            j for j in range(n)
            if j != wp and (1 << j) not in sets.null
            and b * p0.weights[wp] + c + b * p0.weights[j] + c >= 1
        ]
        if not star:
            raise WitnessError("no partner atom satisfies the pair inequality")
        decomposition[m] = (wp, star[0])
    bound = None
    k = len(essential_atoms)
    if k >= 2:
        m_half = k // 2
        pair_bound = max(
            1 / (v[1 << i] + v[1 << j]) for i in essential_atoms for j in essential_atoms if i != j
        )
        bound = (m_half, max(Fraction(m_half), pair_bound))
        if not b > bound[1]:
            raise WitnessError(f"b = {b} does not exceed the bound {bound[1]}")
    distinct = len(set(ua.values))
    if distinct > n + 2:
        raise WitnessError(f"{distinct} distinct values exceed n + 2")
    vacuous_off_atoms = all(v[m] == 1 for m in range(1, full + 1) if popcount(m) >= 2)
    if distinct == n + 2 and not vacuous_off_atoms:
        raise WitnessError("n + 2 distinct values but not vacuous off the atoms")
    return HBMStructure(decomposition, essential_atoms, bound, distinct, vacuous_off_atoms)


def hbm_is_coherent_fast(model: NLModel) -> Verdict:
    """Coherence of an HBM member: subadditivity (upper) or quasi-superadditivity (lower)."""
    if not is_hbm_family(model):
        raise ValueError(f"fast coherence test applies to horizontal barrier models, not {classify(model.params).tag.value}")
    a = model.to_assessment()
    if model.orientation is Orientation.UPPER:
        inner = is_subadditive(a)
    else:
        inner = is_quasi_superadditive(a)
    return Verdict(inner.holds, "coherence", f"hbm-{inner.notion}", inner.witness)


def hbm_precise_check(model: NLModel, assessment: Optional[Assessment] = None) -> Verdict:
    """Whether an HBM collapses to a precise probability, by both closed forms.

    ``details`` records the two-case characterisation (``case_a``,
    ``case_b``, needs coherence) and the inequality pair (``pair``); both
    are compared with :func:`is_precise_probability`.
    """
    if not is_strict_hbm(model):
        raise ValueError("precise-probability characterisation applies to horizontal barrier models with a + b > 1 only")
    lower, upper = model.lower(), model.upper()
    la = assessment.as_lower() if assessment is not None else lower.to_assessment()
    ua = upper.to_assessment()
    n = model.partition.n
    coherent = is_quasi_superadditive(la).holds
    atoms_l = [la.value(1 << i) for i in range(n)]
    atoms_u = [ua.value(1 << i) for i in range(n)]
    case_a = coherent and any(
        atoms_l[k] == atoms_u[k] == 1
        and all(atoms_l[i] == atoms_u[i] == 0 for i in range(n) if i != k)
        for k in range(n)
    )
    essential = lower.event_sets().essential
    low = lower.params
    case_b = coherent and low.a == low.c < 0 and sum(1 for i in range(n) if (1 << i) in essential) == 2
    pair = is_subadditive(la).holds and is_quasi_superadditive(la).holds
    oracle = is_precise_probability(la)
    closed = case_a or case_b
    if closed != oracle.holds or pair != oracle.holds:
        raise OracleDisagreement(
            f"precise-probability closed forms (cases {closed}, pair {pair}) disagree with the oracle ({oracle.holds})"
        )
    return Verdict(oracle.holds, "precise probability", "hbm-closed-form", oracle.witness,
                   {"coherent": coherent, "case_a": case_a, "case_b": case_b, "pair": pair})


# ---------------------------------------------------------------- model helpers


def is_2coherent_model(model: NLModel) -> Verdict:
    return is_2coherent(model.to_assessment())


def is_coherent_model(model: NLModel) -> Verdict:
    return is_coherent(model.to_assessment())


HBM_TAGS = (ModelTag.HBM, ModelTag.PMM, ModelTag.BASE_PROBABILITY)
