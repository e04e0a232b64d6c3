"""Command-line interface: ``nlum classify|check|table|fuzz|extend-interval``.

Exit codes: 0 when the verdict holds (or the command succeeded), 1 when it
fails, 2 on usage or input errors.  Rationals are written as ``"p/q"``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

from . import consistency as C
from .core import EnumerationTooLarge, Partition, format_rational, popcount
from .documents import (
    DocumentError,
    ModelDocument,
    assessment_from_json,
    interval_from_json,
    verdict_to_json,
)
from .fuzz import DEFAULT_DENOMINATOR, DEFAULT_ORACLE_ATOMS, FAMILIES, fuzz, parse_atoms, run_case
from .intervals import UnreachableInterval, extension_table, natural_extension
from .nlmodel import NLModel, classify

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2

NOTIONS = (
    "capacity", "2coherence", "asl", "coherence", "2monotone",
    "subadditive", "superadditive", "convex", "c-convex", "precise",
)


class UsageError(Exception):
    pass


def _load_json(path: str) -> Any:
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None


def load_model(path: str) -> NLModel:
    return ModelDocument.from_json(_load_json(path)).model()


def _emit(obj: Any) -> None:
    print(json.dumps(obj, indent=2))


def ordered_masks(partition: Partition) -> list[int]:
    """Events by size, then by atom order: the empty event first and the sure event last."""
    return sorted(partition.masks(), key=lambda m: (popcount(m), [i for i in range(partition.n) if m >> i & 1]))


# ---------------------------------------------------------------- classify


def classification_report(model: NLModel) -> dict[str, Any]:
    cls = classify(model.params)
    low = model.params.lower()
    sets = model.event_sets()
    return {
        "tag": cls.tag.value,
        "orientation": model.orientation.value,
        "a": format_rational(model.a),
        "b": format_rational(model.b),
        "c": format_rational(model.c),
        "b_plus_2a": format_rational(low.b + 2 * low.a),
        "b_plus_2a_eq_1": cls.b_plus_2a_eq_1,
        "a_plus_b_eq_1": cls.a_plus_b_eq_1,
        "families": sorted(cls.families),
        "null": len(sets.null),
        "universal": len(sets.universal),
        "essential": len(sets.essential),
    }


def cmd_classify(args: argparse.Namespace) -> int:
    report = classification_report(load_model(args.file))
    if args.json:
        _emit(report)
    else:
        print(f"{report['tag']}, c={report['c']}, b+2a={report['b_plus_2a']}")
        print(f"orientation={report['orientation']} a={report['a']} b={report['b']}")
        print(f"b+2a=1: {str(report['b_plus_2a_eq_1']).lower()}  a+b=1: {str(report['a_plus_b_eq_1']).lower()}")
        print(f"null={report['null']} universal={report['universal']} essential={report['essential']}")
    return EXIT_OK


# ---------------------------------------------------------------- check


def _check_coherence(assessment: C.Assessment, model: Optional[NLModel]) -> C.Verdict:
    envelope = C.is_coherent(assessment)
    if model is None or not C.is_hbm_family(model):
        return envelope
    # lower and upper members are coherent together; the upper test names an atom pair
    fast = C.hbm_is_coherent_fast(model.upper())
    if fast.holds != envelope.holds:
        raise C.OracleDisagreement("subadditivity and envelope verdicts differ")
    return C.Verdict(fast.holds, "coherence", fast.method, fast.witness if not fast.holds else envelope.witness,
                     {"envelope": envelope.holds})


_CHECKS: dict[str, Callable[[C.Assessment], C.Verdict]] = {
    "capacity": C.is_capacity,
    "2coherence": C.is_2coherent,
    "asl": C.avoids_sure_loss,
    "2monotone": C.is_2monotone,
    "subadditive": C.is_subadditive,
    "superadditive": C.is_superadditive,
    "convex": C.is_convex,
    "c-convex": C.is_C_convex,
    "precise": C.is_precise_probability,
}


def _check_input(args: argparse.Namespace) -> tuple[C.Assessment, Optional[NLModel]]:
    doc = _load_json(args.file)
    if isinstance(doc, dict) and "rows" in doc:
        return table_row_assessment(doc, args.row), None
    if isinstance(doc, dict) and "values" in doc:
        return assessment_from_json(doc), None
    model = ModelDocument.from_json(doc).model()
    return model.to_assessment(), model


def cmd_check(args: argparse.Namespace) -> int:
    assessment, model = _check_input(args)
    if args.notion == "coherence":
        verdict = _check_coherence(assessment, model)
    else:
        verdict = _CHECKS[args.notion](assessment)
    _emit(verdict_to_json(verdict, assessment.partition))
    return EXIT_OK if verdict.holds else EXIT_FAIL


# ---------------------------------------------------------------- table


def table_rows(model: NLModel) -> tuple[list[int], list[tuple[str, list[Fraction]]]]:
    part = model.partition
    masks = ordered_masks(part)
    lower, upper = model.lower(), model.upper()
    p0 = model.p0.table
    rows = [
        ("P0", [p0[m] for m in masks]),
        ("lower", [lower.table[m] for m in masks]),
        ("upper", [upper.table[m] for m in masks]),
    ]
    return masks, rows


def table_json(model: NLModel) -> dict[str, Any]:
    masks, rows = table_rows(model)
    part = model.partition
    return {
        "atoms": list(part.labels),
        "events": [part.mask_labels(m) for m in masks],
        "rows": [{"measure": name, "values": [format_rational(v) for v in vals]} for name, vals in rows],
    }


def table_row_assessment(doc: dict, row: str) -> C.Assessment:
    """One row of a ``table --format json`` document as an explicit assessment."""
    try:
        part = Partition(tuple(doc["atoms"]))
        events = [part.event(*labels).mask for labels in doc["events"]]
        (found,) = [r for r in doc["rows"] if r["measure"] == row]
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError("rows", f"no usable row {row!r} ({exc})") from None
    orientation = "upper" if row == "upper" else "lower"
    return C.Assessment.from_mapping(part, dict(zip(events, found["values"])), orientation)


def _decimal(x: Fraction, places: int = 6) -> str:
    return f"{float(x):.{places}f}"


def table_csv(model: NLModel, decimal: bool) -> str:
    masks, rows = table_rows(model)
    part = model.partition
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    header = ["measure"]
    for m in masks:
        header.append(part.format_mask(m))
        if decimal:
            header.append(f"{part.format_mask(m)} ~approx")
    writer.writerow(header)
    for name, vals in rows:
        line = [name]
        for v in vals:
            line.append(format_rational(v))
            if decimal:
                line.append(_decimal(v))
        writer.writerow(line)
    return out.getvalue()


def plot_data(model: NLModel) -> list[dict[str, Any]]:
    """``(P0(A), lower(A), upper(A))`` per event, for plotting the measure against the base probability."""
    masks, rows = table_rows(model)
    part = model.partition
    (_, p0), (_, low), (_, up) = rows
    return [
        {"event": part.mask_labels(m), "p0": format_rational(x), "lower": format_rational(l), "upper": format_rational(u)}
        for m, x, l, u in zip(masks, p0, low, up)
    ]


def cmd_table(args: argparse.Namespace) -> int:
    model = load_model(args.file)
    if args.plot_data:
        data = plot_data(model)
        if args.format == "json":
            _emit(data)
        else:
            out = io.StringIO()
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(["event", "p0", "lower", "upper"] + (["p0 ~approx", "lower ~approx", "upper ~approx"] if args.decimal else []))
            for row in data:
                extra = [_decimal(Fraction(row[k])) for k in ("p0", "lower", "upper")] if args.decimal else []
                writer.writerow([model.partition.format_mask(model.partition.event(*row["event"]).mask),
                                 row["p0"], row["lower"], row["upper"]] + extra)
            sys.stdout.write(out.getvalue())
        return EXIT_OK
    if args.format == "json":
        _emit(table_json(model))
    else:
        sys.stdout.write(table_csv(model, args.decimal))
    return EXIT_OK


# ---------------------------------------------------------------- fuzz


def cmd_fuzz(args: argparse.Namespace) -> int:
    atoms = parse_atoms(args.atoms)
    settings = {
        "seed": args.seed, "family": args.family, "atoms": list(atoms),
        "denominator": args.denominator, "oracle_atoms": args.oracle_atoms,
    }
    if args.replay is not None:
        case, checks = run_case(args.replay, args.family, atoms, args.denominator, args.oracle_atoms)
        failures = [{"proposition": p, "message": m} for p, ok, m in checks if not ok]
        _emit({
            **settings, "replay": args.replay, "family_drawn": case.family,
            "model": ModelDocument.from_model(case.model).to_json(),
            "checks": len(checks), "failures": failures,
        })
        return EXIT_FAIL if failures else EXIT_OK
    report = fuzz(args.cases, args.family, atoms, args.seed, args.denominator, args.workers, args.oracle_atoms)
    text = json.dumps({**settings, "cases": args.cases, **report.to_json()}, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return EXIT_FAIL if report.failed else EXIT_OK


# ---------------------------------------------------------------- extend-interval


def cmd_extend_interval(args: argparse.Namespace) -> int:
    interval = interval_from_json(_load_json(args.file))
    part = interval.partition
    try:
        if args.event is not None:
            labels = [x for x in args.event.split(",") if x]
            try:
                event = part.event(*labels)
            except KeyError as exc:
                raise UsageError(str(exc.args[0])) from None
            lo, hi = natural_extension(interval, event)
            _emit({"event": labels, "lower": format_rational(lo), "upper": format_rational(hi)})
            return EXIT_OK
        lower, upper = extension_table(interval)
    except UnreachableInterval as exc:
        print(f"error: {exc}", file=sys.stderr)
        _emit({"reachable": False, "violation": exc.witness.note})
        return EXIT_FAIL
    masks = ordered_masks(part)
    _emit({
        "atoms": list(part.labels),
        "events": [part.mask_labels(m) for m in masks],
        "rows": [
            {"measure": "lower", "values": [format_rational(lower.value(m)) for m in masks]},
            {"measure": "upper", "values": [format_rational(upper.value(m)) for m in masks]},
        ],
    })
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nlum", description="Nearly-linear imprecise probability models.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", help="place a model document in the taxonomy")
    p.add_argument("file", help="model JSON ('-' for stdin)")
    p.add_argument("--json", action="store_true", help="print the report as JSON")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("check", help="decide one consistency notion")
    p.add_argument("file", help="model, assessment or table JSON ('-' for stdin)")
    p.add_argument("--notion", required=True, choices=NOTIONS)
    p.add_argument("--row", default="lower", help="row of a table document to check (default: lower)")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("table", help="values of P0 and of the lower and upper members on every event")
    p.add_argument("file", help="model JSON ('-' for stdin)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--decimal", action="store_true", help="add approximate decimal columns (CSV)")
    p.add_argument("--plot-data", action="store_true", help="emit (P0(A), lower(A), upper(A)) per event")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("fuzz", help="check the family properties on random models")
    p.add_argument("--cases", type=int, default=500)
    p.add_argument("--atoms", default="3-6", help="atom count or inclusive range such as 3-6")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--family", choices=FAMILIES + ("all",), default="all")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--denominator", type=int, default=DEFAULT_DENOMINATOR, help="grid denominator for sampling")
    p.add_argument("--oracle-atoms", type=int, default=DEFAULT_ORACLE_ATOMS,
                   help="largest partition on which gain searches run")
    p.add_argument("--replay", type=int, default=None, metavar="CASE_SEED", help="rerun one case from a report")
    p.add_argument("--output", help="write the report to this file")
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("extend-interval", help="natural extension of a probability interval")
    p.add_argument("file", help="interval JSON ('-' for stdin)")
    p.add_argument("--event", help="comma-separated atom labels; omit for the full table")
    p.set_defaults(func=cmd_extend_interval)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DocumentError, EnumerationTooLarge, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
