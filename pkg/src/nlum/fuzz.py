"""Randomised and grid-driven checks of the model-family properties.

Each case draws ``(a, b, P0)`` from a family's parameter region on a rational
grid and runs every property that applies, together with the agreement
contracts between closed-form predicates and the linear-programming oracles.
A case is a pure function of its seed, so any failure can be replayed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Iterator, Optional, Sequence

from . import consistency as C
from .core import BaseProbability, Orientation, Partition
from .intervals import (
    VBM_TAGS,
    ProbabilityInterval,
    is_reachable,
    is_reachable_by_coherence,
    nl_equals_extended_interval,
)
from .nlmodel import ModelTag, NLModel, NLParams, classify, imprecision

FAMILIES = ("vbm", "hbm", "rrm", "hurwicz")
DEFAULT_DENOMINATOR = 60
#: Largest partition on which the (slow) gain searches run in the fuzzer.
DEFAULT_ORACLE_ATOMS = 4

ZERO, ONE = Fraction(0), Fraction(1)


# ---------------------------------------------------------------- sampling


def parse_atoms(text: str | int) -> tuple[int, int]:
    """``"4"`` or ``"3-6"`` to an inclusive range."""
    if isinstance(text, int):
        return text, text
    lo, _, hi = str(text).partition("-")
    lo_n, hi_n = int(lo), int(hi or lo)
    if not 1 <= lo_n <= hi_n:
        raise ValueError(f"bad atom range {text!r}")
    return lo_n, hi_n


def sample_p0(rng: random.Random, n: int, den: int) -> tuple[Fraction, ...]:
    """A probability on ``n`` atoms with weights on the grid ``1/den``; sometimes sparse."""
    support = n if rng.random() < 0.8 else rng.randint(1, n)
    chosen = sorted(rng.sample(range(n), support))
    cuts = sorted(rng.randint(0, den) for _ in range(support - 1))
    parts = [hi - lo for lo, hi in zip([0] + cuts, cuts + [den])]
    weights = [ZERO] * n
    for i, k in zip(chosen, parts):
        weights[i] = Fraction(k, den)
    return tuple(weights)


def _grid(rng: random.Random, lo: int, hi: int, den: int) -> Fraction:
    return Fraction(rng.randint(lo, hi), den)


def sample_params(family: str, rng: random.Random, den: int) -> tuple[Fraction, Fraction]:
    """Lower parameters ``(a, b)`` inside ``family``, by rejection on the grid ``1/den``."""
    if family == "vbm":
        r = rng.random()
        if r < 0.15:
            a = -_grid(rng, 1, den, den)
            return a, 1 - a
        if r < 0.25:
            return ZERO, _grid(rng, 1, den, den)
        if r < 0.3:
            b = _grid(rng, 1, 2 * den, den)
            return -b, b
        while True:
            a, b = -_grid(rng, 0, den, den), _grid(rng, 1, 2 * den, den)
            if 0 <= a + b <= 1:
                return a, b
    if family == "hbm":
        if rng.random() < 0.25:
            a = -_grid(rng, 1, 4 * den, den)
            return a, 1 - 2 * a
        while True:
            a, b = -_grid(rng, 1, 4 * den, den), _grid(rng, den + 1, 10 * den, den)
            if a + b > 1 and b + 2 * a <= 1:
                return a, b
    if family == "rrm":
        if rng.random() < 0.25:
            a = _grid(rng, 1, (den - 1) // 2, den)
            return a, 1 - 2 * a
        while True:
            a, b = _grid(rng, 1, den // 2, den), _grid(rng, 1, den, den)
            if b + 2 * a <= 1:
                return a, b
    if family == "hurwicz":
        return _grid(rng, 0, den // 2, den), ZERO
    raise ValueError(f"unknown family {family!r}; choose from {FAMILIES + ('all',)}")


@dataclass(frozen=True)
class Case:
    seed: int
    family: str
    model: NLModel


def make_case(case_seed: int, family: str, atoms: tuple[int, int], den: int) -> Case:
    rng = random.Random(case_seed)
    fam = rng.choice(FAMILIES) if family == "all" else family
    n = rng.randint(*atoms)
    a, b = sample_params(fam, rng, den)
    p0 = sample_p0(rng, n, den)
    return Case(case_seed, fam, NLModel(BaseProbability(Partition.of_size(n), p0), NLParams(a, b)))


def case_seed(seed: int, index: int) -> int:
    return seed * 1_000_003 + index


# ---------------------------------------------------------------- properties


Check = tuple[str, bool, str]


class _Recorder:
    def __init__(self) -> None:
        self.results: list[Check] = []

    def check(self, prop: str, fn: Callable[[], object]) -> None:
        try:
            out = fn()
        except Exception as exc:  # a failing property, not a crash of the harness
            self.results.append((prop, False, f"{type(exc).__name__}: {exc}"))
            return
        ok, msg = out if isinstance(out, tuple) else (bool(out), "")
        self.results.append((prop, ok, msg))


def _agree(left, right, what: str):
    a, b = bool(left), bool(right)
    return a == b, "" if a == b else f"{what}: {a} vs {b}"


def two_coherent_nonfilter(partition: Partition, a: int, b: int) -> C.Assessment:
    """Lower probability 1 on every event implying ``a`` or ``b`` and 0 elsewhere.

    With ``a`` and ``b`` incomparable and overlapping it is 2-coherent, yet
    its universal events are not closed under meets.
    """
    values = {m: ONE if m & a == a or m & b == b else ZERO for m in partition.masks()}
    values[0] = ZERO
    return C.Assessment.from_mapping(partition, values)


def _nonfilter_pair(model: NLModel) -> tuple[int, int]:
    """Two overlapping incomparable events, drawn from a generator seeded by the model."""
    n = model.partition.n
    rng = random.Random(repr((model.p0.weights, model.a, model.b)))
    i, j = rng.sample(range(n), 2)
    full = model.partition.full_mask
    return full ^ (1 << i), full ^ (1 << j)


def model_checks(model: NLModel, oracle_atoms: int = DEFAULT_ORACLE_ATOMS) -> list[Check]:
    """Every property that applies to the lower/upper pair of ``model``."""
    rec = _Recorder()
    lo, up = model.lower(), model.upper()
    params = lo.params
    a, b = params.a, params.b
    part = model.partition
    n, full = part.n, part.full_mask
    masks = part.masks()
    tag = classify(params).tag
    la, ua = lo.to_assessment(), up.to_assessment()
    lv, uv = la.values, ua.values

    rec.check("nl.monotone", lambda: C.is_capacity(la).holds and C.is_capacity(ua).holds)
    rec.check("nl.conjugacy", lambda: all(uv[m] == 1 - lv[full ^ m] for m in masks))

    def event_sets_agree():
        for m_ in (lo, up):
            sets = m_.event_sets()
            tab = m_.table
            for m in masks:
                if m in (0, full):
                    continue
                if (m in sets.null) != (tab[m] == 0) or (m in sets.universal) != (tab[m] == 1):
                    return False, f"event sets disagree with evaluation at {part.format_mask(m)}"
        return True, ""

    rec.check("nl.event_sets", event_sets_agree)
    rec.check("nl.imprecision_gap", lambda: all(imprecision(lo, m) is not None for m in masks))

    coherent = C.is_coherent(la)
    convex = C.is_C_convex(la)
    asl = C.avoids_sure_loss(la)
    two = C.is_2coherent(la)
    rec.check("chain.coherent_convex_asl", lambda: (not coherent or convex) and (not convex or asl))
    rec.check("chain.coherent_2coherent", lambda: not coherent or two)
    rec.check("oracle.asl", lambda: _agree(asl, C.gain_incoherence_search(la, "asl"), "lp vs gain"))
    if n <= oracle_atoms:
        rec.check("oracle.2coherence", lambda: _agree(two, C.gain_incoherence_search(la, "2coherence"), "predicate vs gain"))
        rec.check("oracle.coherence", lambda: _agree(coherent, C.gain_incoherence_search(la, "coherence"), "envelope vs gain"))
        rec.check("oracle.convexity", lambda: _agree(convex, C.gain_incoherence_search(la, "convexity"), "envelope vs gain"))

    if b + 2 * a <= 1:
        rec.check("nl.2coherent_lower", lambda: two.holds)
        rec.check("nl.2coherent_upper", lambda: C.is_2coherent(ua).holds)
    if b + 2 * a == 1:
        rec.check("nl.self_conjugate_at_boundary", lambda: lv == uv)
    elif lv == uv:
        rec.check("nl.self_conjugate_off_boundary_is_01", lambda: all(x in (ZERO, ONE) for x in lv))

    if coherent:
        rec.check("coherent.2monotone_lower", lambda: C.is_2monotone(la).holds)
        rec.check("coherent.2alternating_upper", lambda: C.is_2alternating(ua).holds)
        rec.check("coherent.universal_filter", lambda: C.is_filter(part, C.universal_events(la)).holds)
        rec.check("coherent.universal_implies_null", lambda: C.universal_implies_null(la).holds)

        def interval_bounds():
            interval = ProbabilityInterval.of_model(model)
            for m in masks:
                if not interval._lower(m) <= lv[m] <= uv[m] <= interval._upper(m):
                    return False, f"natural extension does not bracket the pair at {part.format_mask(m)}"
            return True, ""

        rec.check("interval.bracket", interval_bounds)

    extended = None

    def extended_interval():
        nonlocal extended
        extended = nl_equals_extended_interval(model)
        return True, ""

    rec.check("interval.closed_forms", extended_interval)
    interval = ProbabilityInterval.of_model(model)
    rec.check("oracle.reachability", lambda: _agree(is_reachable(interval), is_reachable_by_coherence(interval), "inequalities vs envelope"))
    if tag is ModelTag.PMM:
        rec.check("interval.pmm_extended", lambda: extended is not None and extended.holds)

    if n >= 3:
        def nonfilter():
            ea, eb = _nonfilter_pair(model)
            ext = two_coherent_nonfilter(part, ea, eb)
            ok = (ext.value(ea) == ext.value(eb) == 1 and ext.value(ea & eb) == 0
                  and C.is_2coherent(ext).holds and not C.is_filter(part, C.universal_events(ext)).holds)
            return ok, "" if ok else f"construction on {part.format_mask(ea)}, {part.format_mask(eb)} failed"

        rec.check("filter.two_coherent_nonfilter", nonfilter)

    if tag in VBM_TAGS:
        rec.check("vbm.coherent_2monotone", lambda: coherent.holds and C.is_2monotone(la).holds)
        rec.check("vbm.coherent_2alternating_upper", lambda: C.is_coherent_upper(ua).holds and C.is_2alternating(ua).holds)
        p0 = model.p0.table
        rec.check("vbm.brackets_base", lambda: all(lv[m] <= p0[m] <= uv[m] for m in masks))

    if C.is_hbm_family(model):
        upper_coherent = C.is_coherent_upper(ua)
        rec.check("hbm.upper_coherent_iff_subadditive", lambda: _agree(upper_coherent, C.hbm_is_coherent_fast(up), "envelope vs subadditivity"))
        rec.check("hbm.lower_coherent_iff_quasi_superadditive", lambda: _agree(coherent, C.hbm_is_coherent_fast(lo), "envelope vs quasi-superadditivity"))
        rec.check("hbm.superadditive_lower", lambda: C.is_superadditive(la).holds)
        rec.check("hbm.upper_superadditive", lambda: C.is_upper_superadditive(ua).holds)
        if upper_coherent:
            rec.check("hbm.coherent_2alternating", lambda: C.is_2alternating(ua).holds)
            if C.is_strict_hbm(model):
                rec.check("hbm.structure", lambda: C.hbm_structure(model) is not None)
            rec.check("hbm.extended_interval", lambda: extended is not None and extended.holds)

        def base_sets():
            p0 = model.p0.table
            sets = lo.event_sets()
            null0 = {m for m in masks if p0[m] == 0}
            univ0 = {m for m in masks if p0[m] == 1}
            return null0 <= sets.null and univ0 <= sets.universal

        rec.check("hbm.base_null_universal", base_sets)
        if C.is_strict_hbm(model):
            rec.check("hbm.precise_closed_forms", lambda: C.hbm_precise_check(model) is not None)

    if tag is ModelTag.RRM:
        rec.check("rrm.coherent_iff_two_atoms", lambda: _agree(coherent, n == 2, "coherent vs n == 2"))
        rec.check("rrm.range", lambda: all(a <= lv[m] <= a + b for m in masks if m not in (0, full)))

    if tag is ModelTag.DEGENERATE_HURWICZ:
        inner = [m for m in masks if m not in (0, full)]
        rec.check("hurwicz.2coherent", lambda: two.holds)
        rec.check("hurwicz.convex_inner", lambda: C.is_convex(la, inner).holds)
        bound = a <= Fraction(1, n)
        rec.check("hurwicz.c_convex_iff_bound", lambda: _agree(convex, bound, "C-convex vs a <= 1/n"))
        rec.check("hurwicz.asl_iff_bound", lambda: _agree(asl, bound, "avoids sure loss vs a <= 1/n"))
    return rec.results


# ---------------------------------------------------------------- grid agreement suite


def p0_grid(n: int, max_den: int) -> list[tuple[Fraction, ...]]:
    """Every probability on ``n`` atoms whose weights have denominators at most ``max_den``."""
    out = set()
    for den in range(1, max_den + 1):
        for parts in product(range(den + 1), repeat=n - 1):
            s = sum(parts)
            if s <= den:
                out.add(tuple(Fraction(k, den) for k in parts + (den - s,)))
    return sorted(out)


def param_grid(max_den: int = 12) -> list[tuple[Fraction, Fraction]]:
    """A parameter grid with denominators at most ``max_den`` covering every family and some outsiders."""
    def fr(k: int, d: int) -> Fraction:
        return Fraction(k, d)

    pts = set()
    for d in (2, 3, 4, 6, max_den):
        for k in range(1, d):
            x = fr(k, d)
            pts.add((-x, 1 + x))          # pari-mutuel
            pts.add((ZERO, x))            # epsilon-contamination
            pts.add((-x, x))              # vacuous
            pts.add((-x / 2, x))          # vertical barrier
            pts.add((-x, 1 + 2 * x))      # horizontal barrier on b + 2a = 1
            pts.add((-x, 1 + 3 * x / 2))  # horizontal barrier inside
            if 2 * x < 1:
                pts.add((x / 2, 1 - 2 * x))  # restricted range
                pts.add((x, ZERO))           # degenerate
    pts.update({(fr(-4, 1), fr(17, 2)), (fr(-4, 1), fr(6, 1)), (fr(-3, 20), fr(5, 4)), (fr(-1, 8), fr(5, 4))})
    pts.update({(fr(1, 10), ONE), (fr(-1, 2), fr(1, 4)), (fr(1, 2), ZERO)})
    return sorted(pts)


def oracle_checks(model: NLModel) -> list[Check]:
    """Closed-form predicates against their LP or gain oracles for one model."""
    rec = _Recorder()
    lo, up = model.lower(), model.upper()
    la, ua = lo.to_assessment(), up.to_assessment()
    n = model.partition.n
    rec.check("2coherence.predicate_vs_gain",
              lambda: _agree(C.is_2coherent(la), C.gain_incoherence_search(la, "2coherence"), "predicate vs gain"))
    if C.is_hbm_family(model):
        rec.check("hbm.subadditive_vs_envelope",
                  lambda: _agree(C.hbm_is_coherent_fast(up), C.is_coherent_upper(ua), "subadditivity vs envelope"))
        rec.check("hbm.quasi_superadditive_vs_envelope",
                  lambda: _agree(C.hbm_is_coherent_fast(lo), C.is_coherent(la), "quasi-superadditivity vs envelope"))
    if lo.b == 0 and 0 <= lo.a <= Fraction(1, 2):
        bound = lo.a <= Fraction(1, n)
        rec.check("hurwicz.bound_vs_asl", lambda: _agree(bound, C.avoids_sure_loss(la), "a <= 1/n vs lp"))
        rec.check("hurwicz.bound_vs_c_convex", lambda: _agree(bound, C.is_C_convex(la), "a <= 1/n vs envelope"))
        rec.check("hurwicz.bound_vs_gain", lambda: _agree(bound, C.gain_incoherence_search(la, "asl"), "a <= 1/n vs gain"))
    try:
        interval = ProbabilityInterval.of_model(model)
    except ValueError:
        # lower above upper on some atom: no interval to test
        return rec.results
    rec.check("reachability.inequalities_vs_envelope",
              lambda: _agree(is_reachable(interval), is_reachable_by_coherence(interval), "inequalities vs envelope"))
    return rec.results


def grid_models(atoms: Sequence[int] = (2, 3, 4), max_param_den: int = 12, max_p0_den: int = 6) -> Iterator[NLModel]:
    params = param_grid(max_param_den)
    for n in atoms:
        part = Partition.of_size(n)
        for p0 in p0_grid(n, max_p0_den):
            base = BaseProbability(part, p0)
            for a, b in params:
                yield NLModel(base, NLParams(a, b))


# ---------------------------------------------------------------- reports


@dataclass
class FuzzReport:
    cases_run: int = 0
    tallies: dict[str, list[int]] = field(default_factory=dict)
    #: ``(case seed, property, model document, message)``, sorted.
    failures: list[tuple[int, str, dict, str]] = field(default_factory=list)

    def add(self, seed: int, model: NLModel, checks: Sequence[Check]) -> None:
        from .documents import ModelDocument

        self.cases_run += 1
        for prop, ok, msg in checks:
            tally = self.tallies.setdefault(prop, [0, 0])
            tally[0 if ok else 1] += 1
            if not ok:
                self.failures.append((seed, prop, ModelDocument.from_model(model).to_json(), msg))

    def merge(self, other: "FuzzReport") -> None:
        self.cases_run += other.cases_run
        for prop, (p, f) in other.tallies.items():
            tally = self.tallies.setdefault(prop, [0, 0])
            tally[0] += p
            tally[1] += f
        self.failures.extend(other.failures)

    @property
    def failed(self) -> int:
        return sum(f for _, f in self.tallies.values())

    def passed(self, prop: str) -> bool:
        return prop in self.tallies and self.tallies[prop][1] == 0

    def to_json(self, settings: Optional[dict] = None) -> dict:
        out = dict(settings or {})
        out["cases_run"] = self.cases_run
        out["tallies"] = {k: {"pass": p, "fail": f} for k, (p, f) in sorted(self.tallies.items())}
        out["failures"] = [
            {"seed": s, "proposition": prop, "model": doc, "message": msg}
            for s, prop, doc, msg in sorted(self.failures, key=lambda x: (x[0], x[1]))
        ]
        return out


def _run_chunk(job: tuple[int, str, tuple[int, int], int, int, list[int]]) -> FuzzReport:
    seed, family, atoms, den, oracle_atoms, indices = job
    report = FuzzReport()
    for i in indices:
        cs = case_seed(seed, i)
        case = make_case(cs, family, atoms, den)
        report.add(cs, case.model, model_checks(case.model, oracle_atoms))
    return report


def run_case(seed: int, family: str, atoms: tuple[int, int], den: int = DEFAULT_DENOMINATOR,
             oracle_atoms: int = DEFAULT_ORACLE_ATOMS) -> tuple[Case, list[Check]]:
    """Rebuild and rerun the case with the given case seed."""
    case = make_case(seed, family, atoms, den)
    return case, model_checks(case.model, oracle_atoms)


def fuzz(cases: int, family: str = "all", atoms: tuple[int, int] = (3, 6), seed: int = 0,
         den: int = DEFAULT_DENOMINATOR, workers: int = 1, oracle_atoms: int = DEFAULT_ORACLE_ATOMS) -> FuzzReport:
    if family != "all" and family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES + ('all',)}")
    chunk = max(1, min(50, cases // max(1, workers * 4) or 1))
    jobs = [
        (seed, family, atoms, den, oracle_atoms, list(range(s, min(s + chunk, cases))))
        for s in range(0, cases, chunk)
    ]
    report = FuzzReport()
    if workers <= 1:
        for job in jobs:
            report.merge(_run_chunk(job))
    else:
        from multiprocessing import Pool

        with Pool(workers) as pool:
            for part in pool.imap_unordered(_run_chunk, jobs):
                report.merge(part)
    return report

