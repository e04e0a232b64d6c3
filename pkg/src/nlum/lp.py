"""Exact linear programming over the rationals.

Two-phase primal simplex with Bland's rule on a fraction-free integer
tableau.  Phase one uses a single shared artificial variable for the
inequality rows that are infeasible at the origin, plus one artificial per
equality row.  Every optimal answer is re-verified by substitution and
certified by a dual-feasible vector; every infeasible answer by a Farkas
vector.  Nothing is returned unverified.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Optional, Sequence

from . import kernels
from .core import RationalLike, parse_rational


class Relation(str, enum.Enum):
    LE = "<="
    EQ = "=="
    GE = ">="


class Sense(str, enum.Enum):
    MIN = "min"
    MAX = "max"


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class MalformedProgram(ValueError):
    pass


class CertificateError(RuntimeError):
    """The solver could not certify its own answer (a bug, never an input problem)."""


@dataclass(frozen=True)
class Constraint:
    coefficients: tuple[Fraction, ...]
    relation: Relation
    rhs: Fraction

    @classmethod
    def of(cls, coefficients: Sequence[RationalLike], relation: str | Relation, rhs: RationalLike) -> "Constraint":
        return cls(tuple(parse_rational(c) for c in coefficients), Relation(relation), parse_rational(rhs))


@dataclass(frozen=True)
class LinearProgram:
    """``objective`` is optimised in direction ``sense`` subject to ``constraints``.

    Variables default to ``x >= 0``; a bound of ``None`` means unbounded on
    that side.
    """

    objective: tuple[Fraction, ...]
    constraints: tuple[Constraint, ...] = ()
    sense: Sense = Sense.MIN
    lower: Optional[tuple[Optional[Fraction], ...]] = None
    upper: Optional[tuple[Optional[Fraction], ...]] = None

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def lower_bound(self, k: int) -> Optional[Fraction]:
        return Fraction(0) if self.lower is None else self.lower[k]

    def upper_bound(self, k: int) -> Optional[Fraction]:
        return None if self.upper is None else self.upper[k]

    def validate(self) -> None:
        k = self.num_vars
        for i, con in enumerate(self.constraints):
            if len(con.coefficients) != k:
                raise MalformedProgram(f"constraint {i} has {len(con.coefficients)} coefficients, expected {k}")
            if not isinstance(con.relation, Relation):
                raise MalformedProgram(f"constraint {i} has relation {con.relation!r}")
        for name, bounds in (("lower", self.lower), ("upper", self.upper)):
            if bounds is not None and len(bounds) != k:
                raise MalformedProgram(f"{name} bounds have length {len(bounds)}, expected {k}")
        for j in range(k):
            lo, up = self.lower_bound(j), self.upper_bound(j)
            if lo is not None and up is not None and lo > up:
                raise MalformedProgram(f"variable {j} has lower bound {lo} above upper bound {up}")

    def is_satisfied_by(self, x: Sequence[Fraction]) -> bool:
        for j, value in enumerate(x):
            lo, up = self.lower_bound(j), self.upper_bound(j)
            if lo is not None and value < lo:
                return False
            if up is not None and value > up:
                return False
        for con in self.constraints:
            lhs = sum((c * v for c, v in zip(con.coefficients, x) if c), Fraction(0))
            if con.relation is Relation.LE and lhs > con.rhs:
                return False
            if con.relation is Relation.GE and lhs < con.rhs:
                return False
            if con.relation is Relation.EQ and lhs != con.rhs:
                return False
        return True

    def value(self, x: Sequence[Fraction]) -> Fraction:
        return sum((c * v for c, v in zip(self.objective, x) if c), Fraction(0))


@dataclass
class LPResult:
    status: Status
    optimum: Optional[Fraction] = None
    solution: Optional[tuple[Fraction, ...]] = None
    #: One multiplier per constraint (then one per finite upper bound), in the
    #: original orientation: ``>=`` rows get ``y >= 0``, ``<=`` rows ``y <= 0``.
    #: When optimal, ``y`` is dual feasible for the minimisation form and
    #: ``y . rhs`` equals its optimum (for default bounds ``x >= 0``).  When
    #: infeasible, ``y . A <= 0`` and ``y . rhs > 0`` (a Farkas vector).
    certificate: Optional[tuple[Fraction, ...]] = field(default=None, repr=False)
    pivots: int = 0


def _row_lcm(values) -> int:
    d = 1
    for v in values:
        if v.denominator != 1:
            d = lcm(d, v.denominator)
    return d


class Simplex:
    """A feasible region that can be optimised repeatedly from a warm basis.

    ``Simplex(program)`` runs phase one once; :meth:`optimize` then accepts
    any objective over the same constraints.
    """

    def __init__(self, program: LinearProgram, backend: str | None = None):
        program.validate()
        self.program = program
        self.backend = backend
        self.pivots = 0
        self._standardize()
        self._phase_one()

    # -- standard form -------------------------------------------------
    def _standardize(self) -> None:
        prog = self.program
        k = prog.num_vars
        # x_j = const_j + sum(sign * y_col)
        self._map: list[tuple[Fraction, list[tuple[int, int]]]] = []
        ncol = 0
        bound_rows: list[tuple[list[tuple[int, Fraction]], Fraction]] = []
        for j in range(k):
            lo, up = prog.lower_bound(j), prog.upper_bound(j)
            if lo is not None:
                self._map.append((lo, [(ncol, 1)]))
                if up is not None:
                    bound_rows.append(([(ncol, Fraction(1))], up - lo))
                ncol += 1
            elif up is not None:
                self._map.append((up, [(ncol, -1)]))
                ncol += 1
            else:
                self._map.append((Fraction(0), [(ncol, 1), (ncol + 1, -1)]))
                ncol += 2
        self.nstruct = ncol

        rows: list[tuple[list[Fraction], Relation, Fraction]] = []
        for con in prog.constraints:
            coefs = [Fraction(0)] * ncol
            rhs = con.rhs
            for j, c in enumerate(con.coefficients):
                if not c:
                    continue
                const, cols = self._map[j]
                rhs -= c * const
                for col, sign in cols:
                    coefs[col] += c * sign
            rows.append((coefs, con.relation, rhs))
        for cols, rhs in bound_rows:
            coefs = [Fraction(0)] * ncol
            for col, c in cols:
                coefs[col] = c
            rows.append((coefs, Relation.LE, rhs))

        # integer rows: sum A[i][j] y_j (<= or ==) b[i]
        self.kinds: list[Relation] = []
        self.A: list[list[int]] = []
        self.b: list[int] = []
        self.row_scale: list[Fraction] = []
        self.trivially_infeasible = False
        self.live: list[int] = []
        for coefs, rel, rhs in rows:
            sign = -1 if rel is Relation.GE else 1
            scale = _row_lcm(coefs + [rhs]) * sign
            A = [int(c * scale) for c in coefs]
            b = int(rhs * scale)
            kind = Relation.EQ if rel is Relation.EQ else Relation.LE
            self.kinds.append(kind)
            self.A.append(A)
            self.b.append(b)
            self.row_scale.append(Fraction(scale))
            if not any(A):
                if (kind is Relation.LE and b < 0) or (kind is Relation.EQ and b != 0):
                    self.trivially_infeasible = True
                continue
            self.live.append(len(self.A) - 1)

    # -- phase one -----------------------------------------------------
    def _phase_one(self) -> None:
        nstruct = self.nstruct
        live = self.live
        m = len(live)
        # columns: structural | one slack-or-artificial per live row | shared artificial | rhs
        self.col_row = list(live)  # auxiliary column nstruct+r belongs to row live[r]
        t_col = nstruct + m
        self.t_col = t_col
        ncols = t_col + 2
        rhs = ncols - 1
        tab: list[list[int]] = []
        basis: list[int] = []
        need_t = []
        for r, i in enumerate(live):
            row = [0] * ncols
            A, b = self.A[i], self.b[i]
            if self.kinds[i] is Relation.EQ and b < 0:
                A, b = [-x for x in A], -b
                self.A[i], self.b[i] = A, b
                self.row_scale[i] = -self.row_scale[i]
            row[:nstruct] = A
            row[nstruct + r] = 1
            row[rhs] = b
            if self.kinds[i] is Relation.LE and b < 0:
                row[t_col] = -1
                need_t.append(r)
            tab.append(row)
            basis.append(nstruct + r)
        self.artificial = {nstruct + r for r, i in enumerate(live) if self.kinds[i] is Relation.EQ}
        if need_t:
            self.artificial.add(t_col)
            p = min(need_t, key=lambda r: (tab[r][rhs], r))
            prow = [-x for x in tab[p]]
            tab[p] = prow
            for r in need_t:
                if r != p:
                    tab[r] = [x + y for x, y in zip(tab[r], prow)]
            basis[p] = t_col
        det = 1
        costs = [0] * (ncols - 1)
        for col in self.artificial:
            costs[col] = 1
        tab.append(self._price(tab, basis, det, costs))
        self.tab, self.basis, self.det = tab, basis, det
        self.status = Status.OPTIMAL
        if self.trivially_infeasible:
            self.status = Status.INFEASIBLE
            self.farkas = self._trivial_farkas()
            return
        if self.artificial:
            self._run(list(range(ncols - 1)))
            if self.tab[-1][rhs] != 0:
                self.status = Status.INFEASIBLE
                self.farkas = self._farkas()
                return
            self._drive_out_artificials()
        self.eligible = [j for j in range(t_col) if j not in self.artificial]

    def _price(self, tab, basis, det, costs) -> list[int]:
        """Reduced-cost row (scaled by ``det``) for integer ``costs``."""
        ncols = len(tab[0]) if tab else self.t_col + 2
        row = [c * det for c in costs] + [0]
        for r, col in enumerate(basis):
            cb = costs[col]
            if cb:
                trow = tab[r]
                row = [x - cb * y for x, y in zip(row, trow)]
        assert len(row) == ncols
        return row

    def _run(self, eligible: list[int]) -> int:
        status, det, pivots = kernels.bland(self.tab, self.basis, self.det, eligible, 50_000, self.backend)
        self.det = det
        self.pivots += pivots
        return status

    def _drive_out_artificials(self) -> None:
        rhs = self.t_col + 1
        r = 0
        while r < len(self.basis):
            col = self.basis[r]
            if col in self.artificial:
                row = self.tab[r]
                q = next((j for j in range(self.t_col) if j not in self.artificial and row[j] != 0), None)
                if q is None:
                    # redundant row
                    del self.tab[r]
                    del self.basis[r]
                    continue
                assert row[rhs] == 0
                self.det = kernels.python_kernels.pivot(self.tab, r, q, self.det)
                self.basis[r] = q
                self.pivots += 1
            r += 1

    # -- certificates --------------------------------------------------
    def _row_multipliers(self, obj_row: list[int]) -> dict[int, int]:
        """Dual multipliers (times ``det``) of standard rows, read off aux columns."""
        y = {}
        for r, i in enumerate(self.col_row):
            y[i] = -obj_row[self.nstruct + r]
        return y

    def _farkas(self):
        obj = self.tab[-1]
        y = self._row_multipliers(obj)
        # phase-one costs of artificial aux columns are 1: reduced cost = det - y
        for r, i in enumerate(self.col_row):
            if self.nstruct + r in self.artificial:
                y[i] = self.det - obj[self.nstruct + r]
        # Verify: y^T A <= 0 on structural columns, y <= 0 on <= rows, y^T b > 0.
        for j in range(self.nstruct):
            if sum(yi * self.A[i][j] for i, yi in y.items()) > 0:
                raise CertificateError("phase-one multipliers are not a Farkas certificate")
        for i, yi in y.items():
            if self.kinds[i] is Relation.LE and yi > 0:
                raise CertificateError("Farkas multiplier of an inequality row has the wrong sign")
        if sum(yi * self.b[i] for i, yi in y.items()) <= 0:
            raise CertificateError("Farkas certificate does not separate")
        return self._export_multipliers(y, self.det)

    def _trivial_farkas(self) -> tuple[Fraction, ...]:
        """Certificate from a single all-zero row whose right-hand side cannot hold."""
        for i, (A, b) in enumerate(zip(self.A, self.b)):
            if any(A):
                continue
            if self.kinds[i] is Relation.LE and b < 0:
                return self._export_multipliers({i: -1}, 1)
            if self.kinds[i] is Relation.EQ and b != 0:
                return self._export_multipliers({i: 1 if b > 0 else -1}, 1)
        raise AssertionError("no contradictory row")

    def _export_multipliers(self, y: dict[int, int], det: int) -> tuple[Fraction, ...]:
        out = []
        for i in range(len(self.A)):
            out.append(Fraction(y.get(i, 0), det) * self.row_scale[i])
        return tuple(out)

    # -- phase two -----------------------------------------------------
    def optimize(self, objective: Sequence[RationalLike], sense: Sense | str = Sense.MIN) -> LPResult:
        if self.status is Status.INFEASIBLE:
            return LPResult(Status.INFEASIBLE, certificate=getattr(self, "farkas", None))
        prog = self.program
        objective = [parse_rational(c) for c in objective]
        if len(objective) != prog.num_vars:
            raise MalformedProgram(f"objective has {len(objective)} entries, expected {prog.num_vars}")
        sense = Sense(sense)
        flip = -1 if sense is Sense.MAX else 1
        const = Fraction(0)
        struct_cost = [Fraction(0)] * self.nstruct
        for j, c in enumerate(objective):
            if not c:
                continue
            c0, cols = self._map[j]
            const += c * c0
            for col, sgn in cols:
                struct_cost[col] += flip * c * sgn
        cscale = _row_lcm(struct_cost)
        costs = [int(c * cscale) for c in struct_cost] + [0] * (self.t_col + 1 - self.nstruct)
        self.tab[-1] = self._price(self.tab[:-1], self.basis, self.det, costs)
        before = self.pivots
        status = self._run(self.eligible)
        pivots = self.pivots - before
        if status == kernels.UNBOUNDED:
            return LPResult(Status.UNBOUNDED, pivots=pivots)
        rhs = self.t_col + 1
        det = self.det
        y_std = [Fraction(0)] * self.nstruct
        for r, col in enumerate(self.basis):
            if col < self.nstruct:
                y_std[col] = Fraction(self.tab[r][rhs], det)
        x = []
        for c0, cols in self._map:
            x.append(c0 + sum((sgn * y_std[col] for col, sgn in cols), Fraction(0)))
        x = tuple(x)
        scaled_opt = -self.tab[-1][rhs]  # = cscale * flip * (value - const) * det
        optimum = Fraction(scaled_opt, det * cscale) * flip + const
        if not prog.is_satisfied_by(x):
            raise CertificateError("simplex solution violates the program")
        if sum((c * v for c, v in zip(objective, x) if c), Fraction(0)) != optimum:
            raise CertificateError("objective value does not match the tableau")
        certificate = self._dual_certificate(costs, scaled_opt, cscale)
        return LPResult(Status.OPTIMAL, optimum, x, certificate, pivots)

    def _dual_certificate(self, costs: list[int], scaled_opt: int, cscale: int) -> tuple[Fraction, ...]:
        det = self.det
        obj = self.tab[-1]
        y = self._row_multipliers(obj)
        for j in range(self.nstruct):
            if det * costs[j] - sum(yi * self.A[i][j] for i, yi in y.items() if yi) < 0:
                raise CertificateError("dual multipliers are not feasible")
        for i, yi in y.items():
            if self.kinds[i] is Relation.LE and yi > 0:
                raise CertificateError("dual multiplier of an inequality row has the wrong sign")
        if sum(yi * self.b[i] for i, yi in y.items()) != scaled_opt:
            raise CertificateError("duality gap is not zero")
        return self._export_multipliers(y, det * cscale)


def solve(program: LinearProgram, backend: str | None = None) -> LPResult:
    """Solve ``program`` exactly."""
    simplex = Simplex(program, backend)
    result = simplex.optimize(program.objective, program.sense)
    result.pivots = simplex.pivots
    return result


def feasible_point(program: LinearProgram, backend: str | None = None) -> LPResult:
    """Any point of the feasible region (objective ignored)."""
    return solve(LinearProgram((Fraction(0),) * program.num_vars, program.constraints,
                               Sense.MIN, program.lower, program.upper), backend)
