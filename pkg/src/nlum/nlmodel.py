"""Nearly-linear measures: evaluation, conjugacy, taxonomy and null/universal events."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Sequence, Union

from .core import (
    BaseProbability,
    Event,
    Orientation,
    Partition,
    RationalLike,
    as_mask,
    parse_rational,
)

if TYPE_CHECKING:
    from .consistency import Assessment

HALF = Fraction(1, 2)


class ModelTag(str, enum.Enum):
    PMM = "PMM"
    EPSILON_CONTAMINATION = "EpsilonContamination"
    VACUOUS = "Vacuous"
    BASE_PROBABILITY = "BaseProbabilityItself"
    VBM = "VBM"
    HBM = "HBM"
    RRM = "RRM"
    DEGENERATE_HURWICZ = "DegenerateHurwicz"
    NOT_NL = "NotNL"


@dataclass(frozen=True)
class NLParams:
    """Parameters ``(a, b)`` of a measure read with the given orientation.

    Any rationals are accepted; :func:`classify` decides whether they describe
    a model of the taxonomy.
    """

    a: Fraction
    b: Fraction
    orientation: Orientation = Orientation.LOWER

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", parse_rational(self.a))
        object.__setattr__(self, "b", parse_rational(self.b))
        object.__setattr__(self, "orientation", Orientation(self.orientation))

    @property
    def c(self) -> Fraction:
        return 1 - (self.a + self.b)

    def conjugate(self) -> "NLParams":
        return NLParams(self.c, self.b, self.orientation.flipped)

    def lower(self) -> "NLParams":
        """Parameters of the lower member of the pair."""
        return self if self.orientation is Orientation.LOWER else self.conjugate()

    def upper(self) -> "NLParams":
        return self if self.orientation is Orientation.UPPER else self.conjugate()

    def normalized(self) -> "NLParams":
        """Relabel a degenerate (``b = 0``) lower measure above 1/2 as the upper one.

        The smaller of the two constants of a degenerate pair is its lower
        probability; any other input is returned unchanged.
        """
        if self.b == 0 and self.orientation is Orientation.LOWER and HALF < self.a <= 1:
            return NLParams(self.a, self.b, Orientation.UPPER)
        if self.b == 0 and self.orientation is Orientation.UPPER and 0 <= self.a < HALF:
            return NLParams(self.a, self.b, Orientation.LOWER)
        return self


@dataclass(frozen=True)
class ModelClass:
    tag: ModelTag
    b_plus_2a_eq_1: bool
    a_plus_b_eq_1: bool

    def in_family(self, family: str) -> bool:
        """Membership in a family read with its relaxed (boundary-inclusive) constraints."""
        return family in self.families

    @property
    def families(self) -> frozenset[str]:
        return _FAMILIES[self.tag]


_FAMILIES = {
    ModelTag.PMM: frozenset({"VBM", "HBM"}),
    ModelTag.EPSILON_CONTAMINATION: frozenset({"VBM"}),
    ModelTag.VACUOUS: frozenset({"VBM"}),
    ModelTag.BASE_PROBABILITY: frozenset({"VBM", "HBM"}),
    ModelTag.VBM: frozenset({"VBM"}),
    ModelTag.HBM: frozenset({"HBM"}),
    ModelTag.RRM: frozenset({"RRM"}),
    ModelTag.DEGENERATE_HURWICZ: frozenset({"Hurwicz"}),
    ModelTag.NOT_NL: frozenset(),
}


def _classify_lower(a: Fraction, b: Fraction) -> ModelTag:
    if b < 0:
        return ModelTag.NOT_NL
    if b == 0:
        return ModelTag.DEGENERATE_HURWICZ if 0 <= a <= HALF else ModelTag.NOT_NL
    s = a + b
    if s == 0:
        return ModelTag.VACUOUS
    if a == 0 and b == 1:
        return ModelTag.BASE_PROBABILITY
    if a == 0 and b < 1:
        return ModelTag.EPSILON_CONTAMINATION
    if s == 1 and a < 0:
        return ModelTag.PMM
    if a <= 0 and 0 < s < 1:
        return ModelTag.VBM
    if s > 1 and b + 2 * a <= 1:
        return ModelTag.HBM
    if a > 0 and b + 2 * a <= 1:
        return ModelTag.RRM
    return ModelTag.NOT_NL


def classify(params: NLParams) -> ModelClass:
    """Place ``params`` in the taxonomy; upper measures are classified through their lower conjugate."""
    low = params.lower()
    return ModelClass(
        _classify_lower(low.a, low.b),
        low.b + 2 * low.a == 1,
        low.a + low.b == 1,
    )


@dataclass(frozen=True)
class EventSets:
    """Null, universal and essential events, as bit-sets."""

    partition: Partition
    null: frozenset[int]
    universal: frozenset[int]
    essential: frozenset[int]

    def kind(self, event: Union[Event, int]) -> str:
        mask = as_mask(self.partition, event)
        if mask in self.null:
            return "null"
        if mask in self.universal:
            return "universal"
        return "essential"


@dataclass(frozen=True)
class Imprecision:
    gap: Fraction
    #: True when the event is essential for both members, so the gap is ``1 - (b + 2a)``.
    constant_gap_applies: bool


@dataclass(frozen=True)
class NLModel:
    p0: BaseProbability
    params: NLParams

    @classmethod
    def of(
        cls,
        p0: Sequence[RationalLike],
        a: RationalLike,
        b: RationalLike,
        orientation: Union[str, Orientation] = Orientation.LOWER,
        labels: Iterable[str] | None = None,
    ) -> "NLModel":
        return cls(BaseProbability.from_values(p0, labels), NLParams(a, b, Orientation(orientation)))

    @classmethod
    def degenerate(
        cls,
        partition_or_p0: Union[Partition, BaseProbability],
        value: RationalLike,
        orientation: Union[str, Orientation] = Orientation.LOWER,
    ) -> "NLModel":
        """The constant (Hurwicz) measure, relabelled so its lower member is the smaller constant."""
        p0 = partition_or_p0
        if isinstance(p0, Partition):
            p0 = BaseProbability.uniform(p0)
        return cls(p0, NLParams(value, 0, Orientation(orientation)).normalized())

    @property
    def partition(self) -> Partition:
        return self.p0.partition

    @property
    def a(self) -> Fraction:
        return self.params.a

    @property
    def b(self) -> Fraction:
        return self.params.b

    @property
    def c(self) -> Fraction:
        return self.params.c

    @property
    def orientation(self) -> Orientation:
        return self.params.orientation

    def raw(self, event: Union[Event, int]) -> Fraction:
        """The unclamped affine value ``b P0(A) + a``."""
        return self.b * self.p0.value(event) + self.a

    def evaluate(self, event: Union[Event, int]) -> Fraction:
        mask = as_mask(self.partition, event)
        if mask == 0:
            return Fraction(0)
        if mask == self.partition.full_mask:
            return Fraction(1)
        return min(max(self.raw(mask), Fraction(0)), Fraction(1))

    __call__ = evaluate

    @cached_property
    def table(self) -> tuple[Fraction, ...]:
        """Values on every event, indexed by bit-set."""
        p0 = self.p0.table
        a, b = self.a, self.b
        zero, one = Fraction(0), Fraction(1)
        values = [min(max(b * x + a, zero), one) for x in p0]
        values[0] = zero
        values[-1] = one
        return tuple(values)

    def conjugate(self) -> "NLModel":
        return NLModel(self.p0, self.params.conjugate())

    def lower(self) -> "NLModel":
        return self if self.orientation is Orientation.LOWER else self.conjugate()

    def upper(self) -> "NLModel":
        return self if self.orientation is Orientation.UPPER else self.conjugate()

    def classify(self) -> ModelClass:
        return classify(self.params)

    def event_sets(self) -> EventSets:
        return event_sets(self)

    def to_assessment(self) -> "Assessment":
        return to_assessment(self)


def evaluate(model: NLModel, event: Union[Event, int]) -> Fraction:
    return model.evaluate(event)


def conjugate(model: NLModel) -> NLModel:
    return model.conjugate()


def event_sets(model: NLModel) -> EventSets:
    """Null/universal/essential events from the ``P0`` thresholds (direct evaluation when ``b = 0``)."""
    part = model.partition
    full = part.full_mask
    masks = part.masks()
    a, b = model.a, model.b
    p0 = model.p0.table
    null, universal = {0}, {full}
    if b > 0:
        low, high = -a / b, (1 - a) / b
        for m in masks:
            if m == 0 or m == full:
                continue
            if p0[m] <= low:
                null.add(m)
            if p0[m] >= high:
                universal.add(m)
        if null & universal:
            # only possible when the clamp interval is empty, which b > 0 rules out
            raise AssertionError("an event cannot be both null and universal")
    else:
        table = model.table
        for m in masks:
            if m == 0 or m == full:
                continue
            if table[m] == 0:
                null.add(m)
            elif table[m] == 1:
                universal.add(m)
    essential = frozenset(m for m in masks if m not in null and m not in universal)
    return EventSets(part, frozenset(null), frozenset(universal), essential)


def imprecision(model: NLModel, event: Union[Event, int]) -> Imprecision:
    """Upper minus lower value of the pair containing ``model`` at ``event``."""
    lower, upper = model.lower(), model.upper()
    mask = as_mask(model.partition, event)
    gap = upper.evaluate(mask) - lower.evaluate(mask)
    applies = 0 < lower.evaluate(mask) < 1 and 0 < upper.evaluate(mask) < 1
    if applies and gap != 1 - (lower.b + 2 * lower.a):
        raise AssertionError("imprecision on doubly essential events must be 1 - (b + 2a)")
    return Imprecision(gap, applies)


def to_assessment(model: NLModel) -> "Assessment":
    from .consistency import Assessment

    return Assessment.full(model.partition, model.table, model.orientation)


def clamped_affine_assessment(
    p0: BaseProbability,
    a: RationalLike,
    b: RationalLike,
    orientation: Orientation = Orientation.LOWER,
) -> "Assessment":
    """``clamp(b P0 + a)`` with forced boundary values, for any sign of ``b``."""
    return to_assessment(NLModel(p0, NLParams(a, b, orientation)))
