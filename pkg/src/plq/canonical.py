"""Canonical realizations and the canonical Poisson bracket.

The bracket convention is fixed once for the whole package:

    {f, g} = sum_i (df/dq_i * dg/dp_i - df/dp_i * dg/dq_i)

A realization assigns to every generator a rational expression in canonical
variables; closure holds when every bracket of realized generators equals the
realized table entry.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .expr import (ALGEBRAIC, ExprError, LogExpr, RatFunc, VarTable, diff,
                   generator_monomial, monomial_exponents, substitute)
from .linalg import collect_rows, nullspace
from .structure import DEFAULT_SEED, BracketTable


class NotExpressibleError(ExprError):
    """Raised when no rational expression in the generators matches a target."""

    def __init__(self, max_degree: int, inverse_degree: int):
        super().__init__(f"target is not expressible in the generators within "
                         f"degree {max_degree} and inverse degree {inverse_degree}")
        self.max_degree = max_degree
        self.inverse_degree = inverse_degree


def canonical_bracket(f: RatFunc, g: RatFunc) -> RatFunc:
    """Canonical Poisson bracket of two rational expressions."""
    table = f.table
    if g.table is not table:
        raise ExprError("bracket arguments over different tables")
    total = RatFunc.zero(table)
    for qi, pi in zip(table.q_indices, table.p_indices):
        total = total + (diff(f, qi) * diff(g, pi) - diff(f, pi) * diff(g, qi))
    return total


class CanonicalRealization:
    """Assignment of a canonical-variable expression to every generator."""

    def __init__(self, table: VarTable, expressions: Sequence[RatFunc]):
        gens = table.generator_indices
        if len(expressions) != len(gens):
            raise ExprError("realization must cover every generator exactly once")
        allowed = (set(table.q_indices) | set(table.p_indices)
                   | set(table.parameter_indices))
        if table.alg_index is not None:
            allowed.add(table.alg_index)
        for expr in expressions:
            if expr.table is not table:
                raise ExprError("realization expression over a different table")
            used = expr.num.used_indices() | expr.den.used_indices()
            if not used <= allowed:
                bad = sorted(table.names[k] for k in used - allowed)
                raise ExprError(f"realization uses non-canonical variables: {bad}")
        self.table = table
        self.expressions = tuple(expressions)

    def binding(self) -> dict[str, RatFunc]:
        names = self.table.generator_names
        return {names[k]: self.expressions[k] for k in range(len(names))}

    def realize(self, expr) -> RatFunc:
        """Substitute every generator by its canonical expression."""
        out = substitute(expr, self.binding(), self.table)
        if isinstance(out, LogExpr):
            return out.as_ratfunc()
        return out


def canonical_point(table: VarTable, rng: random.Random) -> list[Fraction]:
    """Random rational point where the algebraic element squares consistently.

    The last position variable is chosen as (t^2 - s)/(2t) for a random t, so
    that s + q_n^2 is the square of the rational (t^2 + s)/(2t).
    """
    vals = [Fraction(0)] * len(table)
    def draw() -> Fraction:
        num = rng.choice([n for n in range(-5, 6) if n])
        return Fraction(num, rng.randint(1, 3))
    for i, kind in enumerate(table.kinds):
        if kind != ALGEBRAIC:
            vals[i] = draw()
    qs = table.q_indices
    ia = table.alg_index
    if ia is not None and qs:
        partial = sum(vals[i] ** 2 for i in qs[:-1])
        t = abs(draw()) + 1
        vals[qs[-1]] = (t * t - partial) / (2 * t)
        vals[ia] = (t * t + partial) / (2 * t)
    return vals


@dataclass
class ClosurePair:
    names: tuple[str, str]
    ok: bool
    residual: RatFunc
    screened: bool


@dataclass
class ClosureReport:
    pairs: list[ClosurePair]
    seed: int

    @property
    def ok(self) -> bool:
        return all(p.ok for p in self.pairs)

    def failures(self) -> list[ClosurePair]:
        return [p for p in self.pairs if not p.ok]


def verify_closure(btable: BracketTable, realization: CanonicalRealization,
                   seed: int = DEFAULT_SEED, screen_points: int = 4) -> ClosureReport:
    """Check {R_i, R_j} = f_ij(R) for every generator pair.

    Random-point screening runs first to reject mismatches cheaply; symbolic
    equality is the authority on pairs that pass the screen.
    """
    table = btable.table
    rng = random.Random(seed)
    binding = realization.binding()
    pairs: list[ClosurePair] = []
    names = btable.generator_names
    for i, j in combinations(range(btable.r), 2):
        lhs = canonical_bracket(realization.expressions[i], realization.expressions[j])
        entry = btable.bracket(i, j)
        rhs_l = substitute(entry, binding, table)
        rhs = rhs_l.as_ratfunc() if isinstance(rhs_l, LogExpr) else rhs_l
        screened = False
        mismatch = False
        got = 0
        attempts = 0
        while got < screen_points and attempts < 10 * screen_points:
            attempts += 1
            point = canonical_point(table, rng)
            try:
                if lhs.evaluate(point) != rhs.evaluate(point):
                    mismatch = True
                    got += 1
                    break
            except ExprError:
                continue
            got += 1
            screened = True
        if mismatch:
            residual = lhs - rhs
            pairs.append(ClosurePair((names[i], names[j]), False, residual, True))
            continue
        residual = lhs - rhs
        pairs.append(ClosurePair((names[i], names[j]), residual.is_zero(), residual, screened))
    return ClosureReport(pairs, seed)


def express_in_generators(target: RatFunc, realization: CanonicalRealization,
                          invertible: Sequence[bool] | None = None,
                          max_degree: int = 3, inverse_degree: int = 0) -> RatFunc:
    """Search for a rational expression in the generators whose realization
    equals the target; raises NotExpressibleError when the bounded search fails."""
    table = realization.table
    r = len(realization.expressions)
    if invertible is None:
        invertible = [False] * r
    n_exps = monomial_exponents(r, max_degree, inverse_degree, invertible, True)
    d_exps = [e for e in monomial_exponents(r, inverse_degree, 0, [False] * r, True)
              if all(x == 0 or invertible[k] for k, x in enumerate(e))]
    n_cols = [realization.realize(generator_monomial(table, e)) for e in n_exps]
    d_cols = [realization.realize(generator_monomial(table, e)) * target * Fraction(-1)
              for e in d_exps]
    rows = collect_rows(n_cols + d_cols)
    basis = nullspace(rows, len(n_cols) + len(d_cols), RatFunc.one(table))
    for vec in basis:
        den_gen = RatFunc.zero(table)
        den_real = RatFunc.zero(table)
        for k, e in enumerate(d_exps):
            c = vec[len(n_exps) + k]
            if c != 0:
                den_gen = den_gen + c * generator_monomial(table, e)
                den_real = den_real + c * realization.realize(generator_monomial(table, e))
        if den_real.is_zero():
            continue
        num_gen = RatFunc.zero(table)
        for k, e in enumerate(n_exps):
            c = vec[k]
            if c != 0:
                num_gen = num_gen + c * generator_monomial(table, e)
        result = num_gen / den_gen
        if realization.realize(result) == target:
            return result
    raise NotExpressibleError(max_degree, inverse_degree)
