"""Bracket tables: validation, Jacobi identity, rank, and degeneracy."""

import random
from fractions import Fraction

import pytest

from plq.corpus import corpus_problem
from plq.expr import ExprError, RatFunc, VarTable
from plq.parsing import parse_ratfunc
from plq.structure import (BracketTable, bind_parameters, generic_rank,
                           jacobi_check, symbolic_determinant,
                           verify_parameter_constraint)


def so3_table():
    table = VarTable.make(["u1", "u2", "u3"], 0, [])
    entries = {
        (0, 1): parse_ratfunc("u3", table),
        (0, 2): parse_ratfunc("-u2", table),
        (1, 2): parse_ratfunc("u1", table),
    }
    return BracketTable(table, entries)


def test_table_validation():
    table = VarTable.make(["u1", "u2"], 1, [])
    with pytest.raises(ExprError):
        BracketTable(table, {(1, 0): parse_ratfunc("u1", table)})
    with pytest.raises(ExprError):
        BracketTable(table, {(0, 0): parse_ratfunc("u1", table)})
    with pytest.raises(ExprError):
        BracketTable(table, {(0, 1): parse_ratfunc("q1", table)})


def test_bracket_is_skew():
    bt = so3_table()
    assert bt.bracket(1, 0) == -bt.bracket(0, 1)
    assert bt.bracket(2, 2).is_zero()
    matrix = bt.structure_matrix()
    for i in range(3):
        for j in range(3):
            assert matrix[i][j] == -matrix[j][i]


def test_central_generators():
    problem = corpus_problem("nappi-witten")
    assert problem.brackets.central_generators() == ["T"]
    assert so3_table().central_generators() == []


def test_jacobi_rotation_algebra():
    report = jacobi_check(so3_table())
    assert report.ok
    assert len(report.triples) == 1
    assert report.triples[0].names == ("u1", "u2", "u3")


def test_jacobi_detects_violation():
    """Replacing one entry by u1 breaks the identity with a nonzero residual."""
    table = VarTable.make(["u1", "u2", "u3"], 0, [])
    entries = {
        (0, 1): parse_ratfunc("u3", table),
        (0, 2): parse_ratfunc("-u2", table),
        (1, 2): parse_ratfunc("u1 + u2", table),
    }
    report = jacobi_check(BracketTable(table, entries))
    assert not report.ok
    bad = report.failures()
    assert len(bad) == 1
    assert not bad[0].residual.is_zero()


def test_jacobi_quadratic_table_flags_unconstrained_parameters():
    """The quadratic table satisfies the identity only on the parameter constraint."""
    problem = corpus_problem("sklyanin")
    report = jacobi_check(problem.brackets)
    assert not report.ok
    condition = parse_ratfunc("a1*b1 - a2*b2 + a3*b3", problem.table)
    for triple in report.failures():
        quot = triple.residual.num.divide_exact(condition.num)
        assert quot is not None


def test_jacobi_holds_after_binding():
    problem = corpus_problem("sklyanin")
    binding = {"a3": parse_ratfunc("(a2*b2 - a1*b1)/b3", problem.table)}
    bound = bind_parameters(problem.brackets, binding)
    assert jacobi_check(bound).ok


def test_generic_rank_odd_dimension():
    problem = corpus_problem("sphere")
    report = generic_rank(problem.brackets)
    assert (report.rank, report.corank) == (2, 1)
    assert report.sampled_rank == 2
    assert report.kind == "determinant"
    assert report.degeneracy.is_zero()
    assert symbolic_determinant(problem.brackets).is_zero()
    assert report.witness is not None


def test_generic_rank_quadratic_pfaffian():
    problem = corpus_problem("sklyanin")
    report = generic_rank(problem.brackets)
    assert (report.rank, report.corank) == (4, 0)
    assert report.kind == "pfaffian"
    expected = parse_ratfunc("(a1*b1 - a2*b2 + a3*b3)*u1*u2*u3*u4",
                             problem.table)
    assert report.degeneracy in (expected, -expected)


def test_pfaffian_squares_to_structure_determinant():
    problem = corpus_problem("sklyanin")
    report = generic_rank(problem.brackets)
    assert report.degeneracy * report.degeneracy == \
        symbolic_determinant(problem.brackets)


def test_witness_attains_generic_rank():
    """The reported witness point evaluates to a matrix of full generic rank."""
    from plq.linalg import rank_of, rows_from_dense
    problem = corpus_problem("hydrogen")
    report = generic_rank(problem.brackets)
    assert (report.rank, report.corank) == (4, 3)
    point = [Fraction(0)] * len(problem.table)
    for name, value in report.witness.items():
        point[problem.table.index(name)] = value
    numeric = [[f.evaluate(point) for f in row]
               for row in problem.brackets.structure_matrix()]
    assert rank_of(rows_from_dense(numeric), problem.brackets.r) == report.rank


def test_rank_seed_determinism():
    problem = corpus_problem("sklyanin")
    a = generic_rank(problem.brackets, seed=5)
    b = generic_rank(problem.brackets, seed=5)
    c = generic_rank(problem.brackets, seed=6)
    assert a.witness == b.witness
    assert a.rank == c.rank


def test_bind_parameters_validates_targets():
    problem = corpus_problem("sphere")
    with pytest.raises(ExprError):
        bind_parameters(problem.brackets,
                        {"H": parse_ratfunc("1", problem.table)})


def test_constraint_collapses_degeneracy():
    """On the constraint surface the degeneracy polynomial vanishes identically."""
    problem = corpus_problem("sklyanin")
    binding = {"a3": parse_ratfunc("(a2*b2 - a1*b1)/b3", problem.table)}
    report = verify_parameter_constraint(problem.brackets, binding)
    assert report.vanishes
    assert (report.rank, report.corank) == (2, 2)
    off = verify_parameter_constraint(
        problem.brackets, {"a3": parse_ratfunc("a1 + b1", problem.table)})
    assert not off.vanishes


def test_rank_summary_mentions_kind():
    problem = corpus_problem("sphere")
    text = generic_rank(problem.brackets).summary()
    assert "rank 2" in text and "corank 1" in text and "determinant" in text
