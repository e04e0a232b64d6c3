"""Probability intervals on a finite partition: reachability and natural extension.

An interval ``(l, u)`` assigns bounds ``[l_i, u_i]`` to each atom.  Its
natural extension is the least-committal coherent lower/upper pair on the
whole algebra.  :func:`nl_equals_extended_interval` compares a nearly-linear
pair with the natural extension of its own atom restriction; the eventwise
comparison is the reference and the closed forms for the model families are
checked against it on every call.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Optional, Sequence, Union

from .consistency import (
    Assessment,
    OracleDisagreement,
    Verdict,
    Witness,
    is_coherent,
)
from .core import Event, Orientation, Partition, RationalLike, as_mask, parse_rational, popcount
from .nlmodel import ModelTag, NLModel, classify

ZERO, ONE = Fraction(0), Fraction(1)

VBM_TAGS = frozenset({
    ModelTag.VBM, ModelTag.PMM, ModelTag.EPSILON_CONTAMINATION,
    ModelTag.VACUOUS, ModelTag.BASE_PROBABILITY,
})


class UnreachableInterval(ValueError):
    """The interval has no coherent extension; ``witness`` names the failing inequality."""

    def __init__(self, message: str, witness: Witness):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class ProbabilityInterval:
    partition: Partition
    l: tuple[Fraction, ...]
    u: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        l = tuple(parse_rational(x) for x in self.l)
        u = tuple(parse_rational(x) for x in self.u)
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "u", u)
        n = self.partition.n
        if len(l) != n or len(u) != n:
            raise ValueError(f"expected {n} lower and upper bounds, got {len(l)} and {len(u)}")
        for label, lo, hi in zip(self.partition.labels, l, u):
            if not 0 <= lo <= hi <= 1:
                raise ValueError(f"bounds of {label} must satisfy 0 <= l <= u <= 1, got [{lo}, {hi}]")

    @classmethod
    def from_values(
        cls,
        l: Sequence[RationalLike],
        u: Sequence[RationalLike],
        labels: Iterable[str] | None = None,
    ) -> "ProbabilityInterval":
        l = list(l)
        part = Partition(tuple(labels)) if labels is not None else Partition.of_size(len(l))
        return cls(part, tuple(l), tuple(u))

    @classmethod
    def of_model(cls, model: NLModel) -> "ProbabilityInterval":
        """Atom restriction of the lower/upper pair containing ``model``."""
        lower, upper = model.lower(), model.upper()
        n = model.partition.n
        return cls(
            model.partition,
            tuple(lower.evaluate(1 << i) for i in range(n)),
            tuple(upper.evaluate(1 << i) for i in range(n)),
        )

    @property
    def n(self) -> int:
        return self.partition.n

    @cached_property
    def _sums(self) -> tuple[Fraction, Fraction]:
        return sum(self.l, ZERO), sum(self.u, ZERO)

    def reachability_failure(self) -> Optional[Witness]:
        """The first violated inequality, scanning atoms in order."""
        sl, su = self._sums
        for i, (lo, hi) in enumerate(zip(self.l, self.u)):
            label = self.partition.labels[i]
            upper_side = hi + sl - lo
            if upper_side > 1:
                return Witness(
                    "reachability", events=(1 << i,), value=upper_side,
                    note=f"i={i + 1} ({label}): u_i + sum of the other l_j = {upper_side} > 1",
                )
            lower_side = lo + su - hi
            if lower_side < 1:
                return Witness(
                    "reachability", events=(1 << i,), value=lower_side,
                    note=f"i={i + 1} ({label}): l_i + sum of the other u_j = {lower_side} < 1",
                )
        return None

    def check_reachable(self) -> None:
        failure = self.reachability_failure()
        if failure is not None:
            raise UnreachableInterval(f"interval is not reachable: {failure.note}", failure)

    def lower(self, event: Union[Event, int]) -> Fraction:
        """Natural extension lower bound; the interval must be reachable."""
        self.check_reachable()
        return self._lower(as_mask(self.partition, event))

    def upper(self, event: Union[Event, int]) -> Fraction:
        self.check_reachable()
        return self._upper(as_mask(self.partition, event))

    def _lower(self, mask: int) -> Fraction:
        inside = sum((x for i, x in enumerate(self.l) if mask >> i & 1), ZERO)
        outside = sum((x for i, x in enumerate(self.u) if not mask >> i & 1), ZERO)
        return max(inside, 1 - outside)

    def _upper(self, mask: int) -> Fraction:
        inside = sum((x for i, x in enumerate(self.u) if mask >> i & 1), ZERO)
        outside = sum((x for i, x in enumerate(self.l) if not mask >> i & 1), ZERO)
        return min(inside, 1 - outside)


def is_reachable(interval: ProbabilityInterval) -> Verdict:
    failure = interval.reachability_failure()
    return Verdict(failure is None, "reachability", "inequalities", failure)


def as_assessment(interval: ProbabilityInterval) -> Assessment:
    """The interval as a lower assessment on the atoms and their complements.

    ``P(w_i) = l_i`` and ``P(not w_i) = 1 - u_i``.  With two atoms each atom is
    also the complement of the other, and two different values for the same
    event raise ``ValueError``.
    """
    part = interval.partition
    full = part.full_mask
    values: dict[int, Fraction] = {}
    for i, (lo, hi) in enumerate(zip(interval.l, interval.u)):
        for mask, v in ((1 << i, lo), (full ^ (1 << i), 1 - hi)):
            if mask in values and values[mask] != v:
                raise ValueError(
                    f"event {part.format_mask(mask)} receives both {values[mask]} and {v}"
                )
            values[mask] = v
    return Assessment.from_mapping(part, values, Orientation.LOWER)


def is_reachable_by_coherence(interval: ProbabilityInterval) -> Verdict:
    """Reachability decided by the envelope oracle on :func:`as_assessment`."""
    try:
        a = as_assessment(interval)
    except ValueError as exc:
        return Verdict(False, "reachability", "envelope", Witness("events", note=str(exc)))
    inner = is_coherent(a)
    return Verdict(inner.holds, "reachability", "envelope", inner.witness)


def natural_extension(interval: ProbabilityInterval, event: Union[Event, int]) -> tuple[Fraction, Fraction]:
    """``(l(A), u(A))`` of the least-committal extension."""
    interval.check_reachable()
    mask = as_mask(interval.partition, event)
    return interval._lower(mask), interval._upper(mask)


def extension_table(interval: ProbabilityInterval) -> tuple[Assessment, Assessment]:
    """Lower and upper natural extension on every event."""
    interval.check_reachable()
    part = interval.partition
    masks = part.masks()
    lower = Assessment.full(part, [interval._lower(m) for m in masks], Orientation.LOWER)
    upper = Assessment.full(part, [interval._upper(m) for m in masks], Orientation.UPPER)
    return lower, upper


# ---------------------------------------------------------------- nearly-linear models


def _brute_force(model: NLModel) -> tuple[bool, Optional[Witness]]:
    interval = ProbabilityInterval.of_model(model)
    failure = interval.reachability_failure()
    if failure is not None:
        return False, failure
    lower, upper = model.lower(), model.upper()
    low_tab, up_tab = lower.table, upper.table
    for m in model.partition.masks():
        ext_l, ext_u = interval._lower(m), interval._upper(m)
        if ext_l != low_tab[m] or ext_u != up_tab[m]:
            return False, Witness(
                "events", events=(m,), value=ext_l,
                note=f"extension gives [{ext_l}, {ext_u}], model gives [{low_tab[m]}, {up_tab[m]}]",
            )
    return True, None


def vbm_extension_by_events(model: NLModel) -> bool:
    """Eventwise criterion for a vertical barrier pair to be its extended atom interval."""
    low = model.lower()
    a, b = low.a, low.b
    if a == 0 or a + b == 1:
        return True
    part = model.partition
    n, full = part.n, part.full_mask
    tab = low.table
    w = model.p0.weights
    for m in range(1, full):
        if tab[m] == 0:
            continue
        if popcount(full ^ m) == 1:
            continue
        if a < 0:
            atoms = [i for i in range(n) if m >> i & 1]
            if any(
                tab[1 << k] > 0 and all(w[i] == 0 for i in atoms if i != k)
                for k in atoms
            ):
                continue
        return False
    return True


def vbm_extension_closed_form(model: NLModel) -> tuple[bool, str]:
    """Parameter-level criterion, with the name of the clause that decided it."""
    low = model.lower()
    a, b = low.a, low.b
    n = model.partition.n
    if a == 0:
        return True, "epsilon-contamination"
    if a + b == 1:
        return True, "pari-mutuel"
    if n <= 3:
        return True, "at most three atoms"
    if any(x == 1 for x in model.p0.weights):
        return True, "base probability concentrated on one atom"
    if a + b == 0:
        return True, "vacuous"
    full = model.partition.full_mask
    tab = low.table
    if all(tab[m] == 0 or popcount(m) == n - 1 for m in range(1, full)):
        return True, "positive only on events of n-1 atoms"
    return False, "no clause applies"


def nl_equals_extended_interval(model: NLModel) -> Verdict:
    """Whether the pair equals the natural extension of its atom restriction.

    The eventwise comparison decides.  Vertical barrier pairs are also run
    through both closed forms, coherent horizontal barrier pairs must always
    agree and restricted range pairs agree exactly when there are two atoms;
    any mismatch raises :class:`OracleDisagreement`.
    """
    holds, witness = _brute_force(model)
    tag = classify(model.params).tag
    details: dict = {"tag": tag.value}
    if tag in VBM_TAGS:
        by_events = vbm_extension_by_events(model)
        closed, rule = vbm_extension_closed_form(model)
        details.update(by_events=by_events, closed_form=closed, rule=rule)
        if by_events != holds or closed != holds:
            raise OracleDisagreement(
                f"extended-interval test: eventwise {holds}, event criterion {by_events}, closed form {closed}"
            )
    if tag in (ModelTag.HBM, ModelTag.PMM, ModelTag.BASE_PROBABILITY):
        coherent = is_coherent(model.lower().to_assessment()).holds
        details["coherent"] = coherent
        if coherent and not holds:
            raise OracleDisagreement("a coherent horizontal barrier pair differs from its extended interval")
    if tag is ModelTag.RRM:
        expected = model.partition.n == 2
        details["expected"] = expected
        if holds != expected:
            raise OracleDisagreement(
                f"restricted range pair on {model.partition.n} atoms: extended interval {holds}, expected {expected}"
            )
    return Verdict(holds, "extended interval", "eventwise", witness, details)
