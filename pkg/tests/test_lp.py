from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from nlum.lp import (
    Constraint,
    LinearProgram,
    MalformedProgram,
    Relation,
    Sense,
    Simplex,
    Status,
    feasible_point,
    solve,
)
from nlum.nlmodel import NLModel

ONE, ZERO = F(1), F(0)


def simplex_program(n, rows, objective):
    cons = [Constraint((ONE,) * n, Relation.EQ, ONE)]
    for coefs, rhs in rows:
        cons.append(Constraint.of(coefs, ">=", rhs))
    return LinearProgram(tuple(F(c) for c in objective), tuple(cons))


def check_certificate(program, result):
    """Dual feasibility and zero gap (optimal) or a Farkas separation (infeasible), default bounds."""
    y = result.certificate
    cons = program.constraints
    assert len(y) == len(cons)
    for yi, con in zip(y, cons):
        if con.relation is Relation.GE:
            assert yi >= 0
        elif con.relation is Relation.LE:
            assert yi <= 0
    cols = [sum(yi * con.coefficients[j] for yi, con in zip(y, cons)) for j in range(program.num_vars)]
    dot = sum(yi * con.rhs for yi, con in zip(y, cons))
    if result.status is Status.OPTIMAL:
        flip = -1 if program.sense is Sense.MAX else 1
        assert all(cj <= flip * c for cj, c in zip(cols, program.objective))
        assert dot == flip * result.optimum
    else:
        assert all(cj <= 0 for cj in cols)
        assert dot > 0


def test_vacuous_envelope_minimum_is_zero():
    prog = simplex_program(3, [], [1, 0, 0])
    res = solve(prog)
    assert res.status is Status.OPTIMAL and res.optimum == 0
    check_certificate(prog, res)


def test_hurwicz_domination_infeasible():
    n, a = 4, F(3, 10)
    rows = [([1 if m >> i & 1 else 0 for i in range(n)], a) for m in range(1, 15)]
    prog = simplex_program(n, rows, [0] * n)
    res = solve(prog)
    assert res.status is Status.INFEASIBLE
    check_certificate(prog, res)


def test_coherent_hbm_envelope_minimum():
    # coherent 0-1 HBM lower: 1 on {w1,w2} and Omega, 0 elsewhere
    prog = simplex_program(3, [([1, 1, 0], 1)], [1, 0, 0])
    res = solve(prog)
    assert res.optimum == 0
    check_certificate(prog, res)


def test_maximisation_and_bounds():
    prog = LinearProgram(
        (F(3), F(2)),
        (Constraint.of([1, 1], "<=", 4), Constraint.of([1, 3], "<=", 6)),
        Sense.MAX,
    )
    res = solve(prog)
    assert res.optimum == 12 and res.solution == (4, 0)
    check_certificate(prog, res)
    boxed = LinearProgram((F(1), F(1)), (Constraint.of([1, -1], "==", "1/2"),), Sense.MAX,
                          lower=(F(-1), None), upper=(F(2), F(3)))
    res = solve(boxed)
    assert res.optimum == F(7, 2) and boxed.is_satisfied_by(res.solution)


def test_free_variable():
    prog = LinearProgram((ONE,), (Constraint.of([1], ">=", -5),), lower=(None,))
    res = solve(prog)
    assert res.optimum == -5 and res.solution == (-5,)


def test_unbounded():
    prog = LinearProgram((F(-1), ZERO), (Constraint.of([1, -1], "<=", 1),))
    assert solve(prog).status is Status.UNBOUNDED


def test_trivially_infeasible_row_has_certificate():
    prog = LinearProgram((ZERO, ZERO), (Constraint.of([0, 0], "<=", -1), Constraint.of([1, 1], ">=", 1)))
    res = solve(prog)
    assert res.status is Status.INFEASIBLE
    check_certificate(prog, res)
    prog = LinearProgram((ZERO,), (Constraint.of([0], "==", 2),))
    check_certificate(prog, solve(prog))


def test_malformed():
    with pytest.raises(MalformedProgram):
        solve(LinearProgram((ONE, ONE), (Constraint.of([1], "<=", 1),)))
    with pytest.raises(MalformedProgram):
        solve(LinearProgram((ONE,), (), lower=(F(2),), upper=(F(1),)))
    with pytest.raises(MalformedProgram):
        Simplex(LinearProgram((ONE,), ())).optimize([1, 2])


def test_feasible_point_ignores_objective():
    prog = LinearProgram((F(-1),), (Constraint.of([1], "<=", 3),))
    res = feasible_point(prog)
    assert res.status is Status.OPTIMAL and prog.is_satisfied_by(res.solution)


def test_warm_start_reuses_region():
    m = NLModel.of(["1/2", "29/60", "1/60"], "-4", "6")
    rows = [([1 if x >> i & 1 else 0 for i in range(3)], m(x)) for x in range(1, 8) if m(x) > 0]
    simplex = Simplex(simplex_program(3, rows, [0, 0, 0]))
    for x in range(1, 8):
        obj = [1 if x >> i & 1 else 0 for i in range(3)]
        assert simplex.optimize(obj).optimum == m(x)


def test_deterministic():
    prog = simplex_program(4, [([1, 1, 0, 0], "1/2"), ([0, 1, 1, 0], "1/3")], [1, 2, 3, 4])
    assert solve(prog) == solve(prog)


@st.composite
def small_programs(draw):
    k = draw(st.integers(1, 3))
    m = draw(st.integers(1, 4))
    coef = st.integers(-4, 4).map(F)
    cons = []
    for _ in range(m):
        cons.append(Constraint(
            tuple(draw(st.lists(coef, min_size=k, max_size=k))),
            draw(st.sampled_from(list(Relation))),
            F(draw(st.integers(-6, 6)), draw(st.integers(1, 3))),
        ))
    for j in range(k):  # a box keeps every feasible program bounded
        cons.append(Constraint(tuple(ONE if i == j else ZERO for i in range(k)), Relation.LE, F(5)))
    objective = tuple(draw(st.lists(coef, min_size=k, max_size=k)))
    return LinearProgram(objective, tuple(cons), draw(st.sampled_from(list(Sense))))


@given(small_programs())
def test_against_vertex_enumeration(prog):
    res = solve(prog)
    rows = [(c.coefficients, c.relation.value, c.rhs) for c in prog.constraints]
    expected = oracles.lp_optimum(prog.objective, rows, prog.sense.value)
    if expected is None:
        assert res.status is Status.INFEASIBLE
    else:
        assert res.status is Status.OPTIMAL and res.optimum == expected
        assert prog.is_satisfied_by(res.solution)
    check_certificate(prog, res)


@given(small_programs())
def test_backends_agree(prog):
    py = solve(prog, backend="python")
    cy = solve(prog, backend="cython")
    assert (py.status, py.optimum, py.solution, py.certificate) == (cy.status, cy.optimum, cy.solution, cy.certificate)
