"""Finite partitions, events as bit-sets, exact rationals and the base probability."""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Sequence, Union

#: Hard cap on the number of atoms of a partition (events are machine-word bit-sets).
MAX_PARTITION_ATOMS = 62

#: Default cap on atoms for anything that enumerates all 2**n events.
DEFAULT_MAX_ATOMS = 8

RationalLike = Union[Fraction, int, str]


class Orientation(str, enum.Enum):
    """Whether a set function is read as a lower or an upper probability."""

    LOWER = "lower"
    UPPER = "upper"

    @property
    def flipped(self) -> "Orientation":
        return Orientation.UPPER if self is Orientation.LOWER else Orientation.LOWER


class PartitionMismatch(ValueError):
    """Two objects that must share a partition do not."""


class EnumerationTooLarge(ValueError):
    """The partition has too many atoms to enumerate its algebra."""


def parse_rational(value: RationalLike) -> Fraction:
    """Parse ``value`` exactly.

    Accepts ``Fraction``, ``int`` and strings of the form ``"p/q"`` or a finite
    decimal such as ``"0.15"``.  Floats are refused: they are rarely the number
    the user meant.

    >>> parse_rational("0.15")
    Fraction(3, 20)
    >>> parse_rational("-29/60")
    Fraction(-29, 60)
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (Fraction, int)):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not an exact rational: {value!r}") from exc
    raise TypeError(f"cannot read {type(value).__name__} as an exact rational; use a string")


def format_rational(value: Fraction) -> str:
    """Serialize as ``"p/q"`` (or ``"p"`` when integral)."""
    return str(Fraction(value))


def max_atoms() -> int:
    """Enumeration cap, overridable with ``NLUM_MAX_ATOMS``."""
    raw = os.environ.get("NLUM_MAX_ATOMS")
    if raw is None:
        return DEFAULT_MAX_ATOMS
    cap = int(raw)
    if not 1 <= cap <= MAX_PARTITION_ATOMS:
        raise ValueError(f"NLUM_MAX_ATOMS must be in [1, {MAX_PARTITION_ATOMS}], got {cap}")
    return cap


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True)
class Partition:
    """A finite set of ``n`` labelled atoms; its algebra is the powerset."""

    labels: tuple[str, ...]

    def __post_init__(self) -> None:
        labels = tuple(str(label) for label in self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise ValueError("a partition needs at least one atom")
        if len(labels) > MAX_PARTITION_ATOMS:
            raise ValueError(f"at most {MAX_PARTITION_ATOMS} atoms are supported, got {len(labels)}")
        if len(set(labels)) != len(labels):
            raise ValueError(f"atom labels must be unique: {labels}")

    @classmethod
    def of_size(cls, n: int, prefix: str = "w") -> "Partition":
        return cls(tuple(f"{prefix}{i + 1}" for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def empty(self) -> "Event":
        return Event(self, 0)

    @property
    def omega(self) -> "Event":
        return Event(self, self.full_mask)

    def atom(self, i: int) -> "Event":
        if not 0 <= i < self.n:
            raise IndexError(f"atom index {i} out of range for n={self.n}")
        return Event(self, 1 << i)

    def atoms(self) -> list["Event"]:
        return [Event(self, 1 << i) for i in range(self.n)]

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown atom {label!r}; atoms are {list(self.labels)}") from None

    def event(self, *labels: str) -> "Event":
        """The event made of the named atoms."""
        mask = 0
        for label in labels:
            mask |= 1 << self.index(label)
        return Event(self, mask)

    def from_mask(self, mask: int) -> "Event":
        return Event(self, mask)

    def check_enumerable(self) -> None:
        cap = max_atoms()
        if self.n > cap:
            raise EnumerationTooLarge(
                f"partition has {self.n} atoms; enumeration cap is {cap} (set NLUM_MAX_ATOMS)"
            )

    def masks(self) -> range:
        """All event bit-sets, in increasing integer order."""
        self.check_enumerable()
        return range(1 << self.n)

    def events(self) -> Iterator["Event"]:
        for mask in self.masks():
            yield Event(self, mask)

    def mask_labels(self, mask: int) -> list[str]:
        return [self.labels[i] for i in range(self.n) if mask >> i & 1]

    def format_mask(self, mask: int) -> str:
        if mask == 0:
            return "{}"
        return "{" + ",".join(self.mask_labels(mask)) + "}"


@dataclass(frozen=True)
class Event:
    """A subset of the atoms of ``partition``."""

    partition: Partition
    mask: int

    def __post_init__(self) -> None:
        if not 0 <= self.mask <= self.partition.full_mask:
            raise ValueError(f"mask {self.mask:#x} outside the algebra of {self.partition.n} atoms")

    def _same(self, other: "Event") -> None:
        if not isinstance(other, Event):
            raise TypeError(f"expected an Event, got {type(other).__name__}")
        if other.partition != self.partition:
            raise PartitionMismatch("events belong to different partitions")

    def __invert__(self) -> "Event":
        return Event(self.partition, self.partition.full_mask & ~self.mask)

    def __or__(self, other: "Event") -> "Event":
        self._same(other)
        return Event(self.partition, self.mask | other.mask)

    def __and__(self, other: "Event") -> "Event":
        self._same(other)
        return Event(self.partition, self.mask & other.mask)

    def implies(self, other: "Event") -> bool:
        self._same(other)
        return self.mask & ~other.mask == 0

    __le__ = implies

    @property
    def is_empty(self) -> bool:
        return self.mask == 0

    @property
    def is_sure(self) -> bool:
        return self.mask == self.partition.full_mask

    @property
    def size(self) -> int:
        return popcount(self.mask)

    def labels(self) -> list[str]:
        return self.partition.mask_labels(self.mask)

    def __str__(self) -> str:
        return self.partition.format_mask(self.mask)

    def __repr__(self) -> str:
        return f"Event({self})"


def complement(a: Event) -> Event:
    return ~a


def union(a: Event, b: Event) -> Event:
    return a | b


def intersection(a: Event, b: Event) -> Event:
    return a & b


def implies(a: Event, b: Event) -> bool:
    return a.implies(b)


def as_mask(partition: Partition, event: Union[Event, int]) -> int:
    """Accept an ``Event`` of ``partition`` or a raw bit-set."""
    if isinstance(event, Event):
        if event.partition != partition:
            raise PartitionMismatch("event belongs to a different partition")
        return event.mask
    mask = int(event)
    if not 0 <= mask <= partition.full_mask:
        raise ValueError(f"mask {mask:#x} outside the algebra of {partition.n} atoms")
    return mask


@dataclass(frozen=True)
class BaseProbability:
    """A probability on the atoms, extended additively to events."""

    partition: Partition
    weights: tuple[Fraction, ...] = field()

    def __post_init__(self) -> None:
        weights = tuple(parse_rational(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        if len(weights) != self.partition.n:
            raise ValueError(f"expected {self.partition.n} weights, got {len(weights)}")
        for label, w in zip(self.partition.labels, weights):
            if w < 0:
                raise ValueError(f"weight of {label} is negative: {w}")
        total = sum(weights, Fraction(0))
        if total != 1:
            raise ValueError(f"weights sum to {total}, not 1")

    @classmethod
    def from_values(cls, values: Sequence[RationalLike], labels: Iterable[str] | None = None) -> "BaseProbability":
        values = list(values)
        partition = Partition(tuple(labels)) if labels is not None else Partition.of_size(len(values))
        return cls(partition, tuple(values))

    @classmethod
    def uniform(cls, partition: Partition) -> "BaseProbability":
        return cls(partition, (Fraction(1, partition.n),) * partition.n)

    @property
    def n(self) -> int:
        return self.partition.n

    @cached_property
    def table(self) -> tuple[Fraction, ...]:
        """``P0`` on every event, indexed by bit-set."""
        self.partition.check_enumerable()
        table = [Fraction(0)] * (1 << self.n)
        for mask in range(1, 1 << self.n):
            low = mask & -mask
            table[mask] = table[mask ^ low] + self.weights[low.bit_length() - 1]
        return tuple(table)

    def value(self, event: Union[Event, int]) -> Fraction:
        mask = as_mask(self.partition, event)
        if self.n <= max_atoms():
            return self.table[mask]
        return sum((w for i, w in enumerate(self.weights) if mask >> i & 1), Fraction(0))


def p0_value(p0: BaseProbability, event: Union[Event, int]) -> Fraction:
    return p0.value(event)
