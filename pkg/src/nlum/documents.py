"""JSON documents for models and intervals, and serialization of verdicts."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Mapping

from .consistency import Assessment, Verdict, Witness
from .core import BaseProbability, Orientation, Partition, format_rational, parse_rational
from .intervals import ProbabilityInterval
from .nlmodel import NLModel, NLParams


class DocumentError(ValueError):
    """A document field is missing or malformed; ``field`` names it."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def _field(doc: Mapping[str, Any], name: str) -> Any:
    if not isinstance(doc, Mapping):
        raise DocumentError("document", "expected a JSON object")
    if name not in doc:
        raise DocumentError(name, "missing")
    return doc[name]


def _rational(value: Any, name: str) -> Fraction:
    if isinstance(value, float):
        raise DocumentError(name, f"write {value!r} as a string such as \"p/q\" or a decimal")
    try:
        return parse_rational(value)
    except (TypeError, ValueError) as exc:
        raise DocumentError(name, str(exc)) from None


def _rationals(doc: Mapping[str, Any], name: str, n: int) -> tuple[Fraction, ...]:
    raw = _field(doc, name)
    if not isinstance(raw, list):
        raise DocumentError(name, "expected a list")
    if len(raw) != n:
        raise DocumentError(name, f"expected {n} entries (one per atom), got {len(raw)}")
    return tuple(_rational(x, f"{name}[{i}]") for i, x in enumerate(raw))


def _partition(doc: Mapping[str, Any]) -> Partition:
    atoms = _field(doc, "atoms")
    if not isinstance(atoms, list) or not all(isinstance(x, str) for x in atoms):
        raise DocumentError("atoms", "expected a list of strings")
    try:
        return Partition(tuple(atoms))
    except ValueError as exc:
        raise DocumentError("atoms", str(exc)) from None


@dataclass(frozen=True)
class ModelDocument:
    atoms: tuple[str, ...]
    p0: tuple[Fraction, ...]
    a: Fraction
    b: Fraction
    orientation: Orientation = Orientation.LOWER

    @classmethod
    def from_json(cls, doc: Mapping[str, Any]) -> "ModelDocument":
        part = _partition(doc)
        p0 = _rationals(doc, "p0", part.n)
        try:
            BaseProbability(part, p0)
        except ValueError as exc:
            raise DocumentError("p0", str(exc)) from None
        a = _rational(_field(doc, "a"), "a")
        b = _rational(_field(doc, "b"), "b")
        raw = doc.get("orientation", "lower")
        try:
            orientation = Orientation(raw)
        except ValueError:
            raise DocumentError("orientation", f"expected \"lower\" or \"upper\", got {raw!r}") from None
        return cls(part.labels, p0, a, b, orientation)

    @classmethod
    def from_model(cls, model: NLModel) -> "ModelDocument":
        return cls(model.partition.labels, model.p0.weights, model.a, model.b, model.orientation)

    def model(self) -> NLModel:
        """The model, with a degenerate constant measure relabelled so its lower member is the smaller."""
        p0 = BaseProbability(Partition(self.atoms), self.p0)
        return NLModel(p0, NLParams(self.a, self.b, self.orientation).normalized())

    def to_json(self) -> dict[str, Any]:
        return {
            "atoms": list(self.atoms),
            "p0": [format_rational(x) for x in self.p0],
            "a": format_rational(self.a),
            "b": format_rational(self.b),
            "orientation": self.orientation.value,
        }


def interval_from_json(doc: Mapping[str, Any]) -> ProbabilityInterval:
    part = _partition(doc)
    l = _rationals(doc, "l", part.n)
    u = _rationals(doc, "u", part.n)
    try:
        return ProbabilityInterval(part, l, u)
    except ValueError as exc:
        raise DocumentError("l/u", str(exc)) from None


def interval_to_json(interval: ProbabilityInterval) -> dict[str, Any]:
    return {
        "atoms": list(interval.partition.labels),
        "l": [format_rational(x) for x in interval.l],
        "u": [format_rational(x) for x in interval.u],
    }


def event_labels(partition: Partition, mask: int) -> list[str]:
    return partition.mask_labels(mask)


def assessment_to_json(assessment: Assessment) -> dict[str, Any]:
    part = assessment.partition
    return {
        "atoms": list(part.labels),
        "orientation": assessment.orientation.value,
        "values": [
            {"event": event_labels(part, m), "value": format_rational(v)}
            for m, v in zip(assessment.domain, assessment.values)
        ],
    }


def assessment_from_json(doc: Mapping[str, Any]) -> Assessment:
    part = _partition(doc)
    rows = _field(doc, "values")
    if not isinstance(rows, list):
        raise DocumentError("values", "expected a list of {event, value} objects")
    mapping = {}
    for i, row in enumerate(rows):
        labels = _field(row, "event")
        try:
            mask = part.event(*labels).mask
        except (KeyError, TypeError) as exc:
            raise DocumentError(f"values[{i}].event", str(exc)) from None
        if mask in mapping:
            raise DocumentError(f"values[{i}].event", "event assessed twice")
        mapping[mask] = _rational(_field(row, "value"), f"values[{i}].value")
    return Assessment.from_mapping(part, mapping, doc.get("orientation", "lower"))


def _jsonable(value: Any, partition: Partition | None) -> Any:
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, (list, tuple)):
        return [_jsonable(x, partition) for x in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v, partition) for k, v in value.items()}
    return value


def witness_to_json(witness: Witness | None, partition: Partition) -> dict[str, Any] | None:
    if witness is None:
        return None
    out: dict[str, Any] = {"kind": witness.kind}
    if witness.events:
        out["events"] = [event_labels(partition, m) for m in witness.events]
    if witness.stakes:
        out["stakes"] = [{"event": event_labels(partition, m), "stake": format_rational(s)} for m, s in witness.stakes]
    if witness.negative is not None:
        m, s = witness.negative
        out["negative"] = {"event": event_labels(partition, m), "stake": format_rational(s)}
    if witness.max_gain is not None:
        out["max_gain"] = format_rational(witness.max_gain)
    if witness.probabilities:
        out["probabilities"] = [[format_rational(x) for x in p] for p in witness.probabilities]
    if witness.shifts:
        out["shifts"] = [format_rational(x) for x in witness.shifts]
    if witness.value is not None:
        out["value"] = format_rational(witness.value)
    if witness.note:
        out["note"] = witness.note
    return out


def verdict_to_json(verdict: Verdict, partition: Partition) -> dict[str, Any]:
    return {
        "notion": verdict.notion,
        "holds": verdict.holds,
        "method": verdict.method,
        "witness": witness_to_json(verdict.witness, partition),
        "details": _jsonable(verdict.details, partition),
    }


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)
