"""Casimir invariants by graded ansatz and exact nullspace.

An invariant F of a bracket table satisfies sum_i (dF/du_i) f_ij = 0 for every
generator j.  The solver expands F over a graded monomial basis, optionally
extended by inverses and logarithms of invertible generators, assembles the
resulting linear system with entries in the parameter field, and reads off an
exact nullspace basis.  Vectors are echelonized so the simplest monomials
lead, reduced modulo products of already accepted solutions (powers and
products of known invariants carry no new information), and normalized so the
canonically leading coefficient is one and parameter denominators are cleared.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .expr import (GENERATOR, PARAMETER, ExprError, LogExpr, Poly, RatFunc,
                   VarTable, diff, generator_monomial, monomial_exponents)
from .linalg import collect_rows, nullspace, presolve_forced_zero, rank_of, rref
from .structure import (DEFAULT_SEED, BracketTable, RankReport, generic_rank,
                        sample_point)


@dataclass(frozen=True)
class AnsatzSpec:
    """Search space bounds for the invariant ansatz."""
    max_degree: int = 2
    inverse_degree: int = 0
    allow_log: bool = False

    def __post_init__(self):
        if self.max_degree < 1:
            raise ExprError("ansatz max_degree must be at least 1")
        if self.inverse_degree < 0:
            raise ExprError("ansatz inverse_degree must be nonnegative")


@dataclass(frozen=True)
class Mono:
    """Basis monomial: one exponent per generator, negatives for inverses."""
    exps: tuple[int, ...]


@dataclass(frozen=True)
class LogElem:
    """Basis element log(u) for the generator at this position."""
    position: int


BasisElem = Mono | LogElem


def _pos_grade(e: tuple[int, ...]) -> int:
    return sum(x for x in e if x > 0)


def enumerate_basis(r: int, ansatz: AnsatzSpec,
                    invertible: Sequence[bool]) -> list[BasisElem]:
    """Ansatz basis in canonical order: monomials by descending positive grade
    then descending lexicographic exponents, then log elements."""
    exps = monomial_exponents(r, ansatz.max_degree, ansatz.inverse_degree,
                              invertible, include_constant=False)
    exps.sort(key=lambda e: (-_pos_grade(e), tuple(-x for x in e)))
    basis: list[BasisElem] = [Mono(e) for e in exps]
    if ansatz.allow_log:
        basis.extend(LogElem(k) for k in range(r) if invertible[k])
    return basis


def _delta(r: int, k: int) -> tuple[int, ...]:
    return tuple(1 if i == k else 0 for i in range(r))


def basis_expression(table: VarTable, elem: BasisElem) -> LogExpr:
    """The basis element as an expression over the table."""
    if isinstance(elem, Mono):
        return LogExpr(generator_monomial(table, elem.exps))
    name = table.generator_names[elem.position]
    return LogExpr.log(table, name)


def assemble_system(btable: BracketTable, basis: Sequence[BasisElem]) -> list[dict]:
    """Sparse rows of the invariant system over the ansatz columns.

    For each generator j the equation sum_i (dF/du_i) f_ij = 0 is cleared of
    denominators and split by generator monomials; entries live in the
    parameter field.
    """
    table = btable.table
    r = btable.r
    zero = RatFunc.zero(table)
    rows: list[dict] = []
    for j in range(r):
        columns: list[RatFunc] = []
        for elem in basis:
            if isinstance(elem, Mono):
                g = zero
                for i in range(r):
                    e_i = elem.exps[i]
                    if e_i == 0:
                        continue
                    f = btable.bracket(i, j)
                    if f.is_zero():
                        continue
                    lowered = tuple(x - 1 if k == i else x
                                    for k, x in enumerate(elem.exps))
                    g = g + generator_monomial(table, lowered) * Fraction(e_i) * f
            else:
                f = btable.bracket(elem.position, j)
                gen = generator_monomial(table, _delta(r, elem.position))
                g = f / gen if not f.is_zero() else zero
            columns.append(g)
        rows.extend(collect_rows(columns))
    return rows


def _as_ratfunc(table: VarTable, value) -> RatFunc:
    if isinstance(value, RatFunc):
        return value
    return RatFunc.const(table, value)


def map_to_coords(expr: LogExpr, table: VarTable,
                  index: Mapping[BasisElem, int]) -> dict[int, RatFunc] | None:
    """Coordinates of an expression over the ansatz basis, or None when any
    part of it falls outside the basis."""
    gens = table.generator_indices
    param_set = set(table.parameter_indices)
    positions = {g: k for k, g in enumerate(gens)}
    den = expr.rat.den
    den_shift = (0,) * len(gens)
    den_param = Poly.one(table)
    den_used = den.used_indices()
    if den_used & set(gens):
        if len(den.terms) != 1:
            return None
        (de, _), = den.terms.items()
        shift = [0] * len(gens)
        param_part = [0] * len(table)
        for i, x in enumerate(de):
            if x == 0:
                continue
            if i in positions:
                shift[positions[i]] = x
            elif i in param_set:
                param_part[i] = x
            else:
                return None
        den_shift = tuple(shift)
        den_param = Poly(table, {tuple(param_part): Fraction(1)})
    else:
        if not den_used <= param_set:
            return None
        den_param = den
    grouped: dict[tuple[int, ...], dict[tuple[int, ...], Fraction]] = {}
    for e, c in expr.rat.num.terms.items():
        gen_part = [0] * len(gens)
        param_part = [0] * len(table)
        for i, x in enumerate(e):
            if x == 0:
                continue
            if i in positions:
                gen_part[positions[i]] = x
            elif i in param_set:
                param_part[i] = x
            else:
                return None
        key = tuple(a - b for a, b in zip(gen_part, den_shift))
        cell = grouped.setdefault(key, {})
        pk = tuple(param_part)
        cell[pk] = cell.get(pk, Fraction(0)) + c
    coords: dict[int, RatFunc] = {}
    for key, cell in grouped.items():
        num = Poly.from_terms(table, cell.items())
        if num.is_zero():
            continue
        elem = Mono(key)
        if elem not in index:
            return None
        coords[index[elem]] = RatFunc(num, den_param)
    for g, c in expr.logs:
        if not (c.num.used_indices() | c.den.used_indices()) <= param_set:
            return None
        elem = LogElem(positions[g])
        if elem not in index:
            return None
        coords[index[elem]] = c
    return {k: v for k, v in coords.items() if not v.is_zero()}


def coords_to_expression(table: VarTable, basis: Sequence[BasisElem],
                         coords: Mapping[int, object]) -> LogExpr:
    """Linear combination of basis elements with the given coefficients."""
    total = LogExpr.zero(table)
    for idx in sorted(coords):
        c = _as_ratfunc(table, coords[idx])
        total = total + LogExpr(c) * basis_expression(table, basis[idx])
    return total


@dataclass
class InvariantReport:
    ok: bool
    residuals: list[tuple[str, LogExpr]]

    def failures(self) -> list[tuple[str, LogExpr]]:
        return [(n, r) for n, r in self.residuals if not r.is_zero()]


def verify_invariant(expr: LogExpr, btable: BracketTable) -> InvariantReport:
    """Check sum_i (dF/du_i) f_ij = 0 for every generator j, with residuals."""
    table = btable.table
    r = btable.r
    residuals = []
    ok = True
    for j in range(r):
        total = LogExpr.zero(table)
        for i in range(r):
            f = btable.bracket(i, j)
            if f.is_zero():
                continue
            total = total + diff(expr, table.generator_indices[i]) * LogExpr(f)
        if not total.is_zero():
            ok = False
        residuals.append((table.generator_names[j], total))
    return InvariantReport(ok, residuals)


def independence_rank(exprs: Sequence[LogExpr], btable: BracketTable,
                      seed: int = DEFAULT_SEED,
                      witness: Mapping[str, Fraction] | None = None,
                      extra_points: int = 8) -> int:
    """Maximal exact rank of the Jacobian of the expressions over sampled points."""
    if not exprs:
        return 0
    table = btable.table
    gens = table.generator_indices
    grads = [[diff(e, i) for i in gens] for e in exprs]
    rng = random.Random(seed)
    points: list[list[Fraction]] = []
    if witness is not None:
        vals = [Fraction(0)] * len(table)
        for name, v in witness.items():
            vals[table.index(name)] = v
        points.append(vals)
    attempts = 0
    while len(points) < extra_points + (1 if witness is not None else 0) \
            and attempts < 20 * extra_points:
        attempts += 1
        points.append(sample_point(table, rng))
    best = 0
    for point in points:
        try:
            matrix = [[entry.as_ratfunc().evaluate(point) for entry in row]
                      for row in grads]
        except ExprError:
            continue
        rows = [{c: v for c, v in enumerate(r) if v != 0} for r in matrix]
        best = max(best, rank_of(rows, len(gens)))
    return best


@dataclass
class CasimirBasis:
    """Result of the invariant search over one ansatz."""
    solutions: list[LogExpr]
    vectors: list[dict[int, RatFunc]]
    basis: list[BasisElem]
    free_central: list[str]
    ansatz: AnsatzSpec
    corank: int
    independence: int
    rank_report: RankReport
    verified: bool
    system_rows: int
    escalations: list[str] = field(default_factory=list)

    @property
    def dimension(self) -> int:
        return len(self.solutions) + len(self.free_central)

    def contains(self, expr: LogExpr, btable: BracketTable) -> bool:
        """Whether the expression lies in the linear span of the reported
        solutions and the free central generators."""
        table = btable.table
        index = {elem: k for k, elem in enumerate(self.basis)}
        target = map_to_coords(expr, table, index)
        if target is None:
            return False
        span_rows = [dict(v) for v in self.vectors]
        for name in self.free_central:
            pos = btable.generator_names.index(name)
            elem = Mono(_delta(btable.r, pos))
            if elem in index:
                span_rows.append({index[elem]: RatFunc.one(table)})
        n = len(self.basis)
        base_rank = rank_of(span_rows, n)
        return rank_of(span_rows + [target], n) == base_rank


def _reversed_echelon(vectors: list[list], ncols: int) -> list[dict[int, object]]:
    """Echelonize vectors so pivots sit at the canonically simplest monomials.

    Returns coordinate dictionaries in original orientation, ordered by
    ascending pivot complexity.
    """
    rows = []
    for vec in vectors:
        row = {ncols - 1 - c: v for c, v in enumerate(vec) if v != 0}
        if row:
            rows.append(row)
    placed, _ = rref(rows, ncols)
    return [{ncols - 1 - c: v for c, v in row.items()} for row in placed]


def _reduce_mod_span(row: dict, span: list[dict], ncols: int) -> dict:
    """Reduce a coordinate row modulo reversed-echelon span rows."""
    rev = {ncols - 1 - c: v for c, v in row.items()}
    for srow in span:
        pivot = min(srow)
        if pivot in rev:
            factor = rev[pivot] / srow[pivot]
            for c, v in srow.items():
                cur = rev.get(c)
                nv = -(factor * v) if cur is None else cur - factor * v
                if nv == 0:
                    rev.pop(c, None)
                else:
                    rev[c] = nv
    return {ncols - 1 - c: v for c, v in rev.items()}


def _span_of_products(table: VarTable, items: Sequence[LogExpr],
                      index: Mapping[BasisElem, int], max_factors: int,
                      ncols: int) -> list[dict]:
    """Reversed-echelon span of all expandable products of the given invariants."""
    product_rows: list[dict[int, object]] = []

    def rec(start: int, current: LogExpr | None, depth: int) -> None:
        for k in range(start, len(items)):
            try:
                nxt = items[k] if current is None else current * items[k]
            except ExprError:
                continue
            coords = map_to_coords(nxt, table, index)
            if coords:
                product_rows.append({ncols - 1 - c: v for c, v in coords.items()})
            if depth + 1 < max_factors:
                rec(k, nxt, depth + 1)

    rec(0, None, 0)
    placed, _ = rref(product_rows, ncols)
    return placed


def _normalize_solution(table: VarTable, coords: dict[int, object]) -> dict[int, RatFunc]:
    """Scale so the canonically first coefficient is one, then clear parameter
    denominators and strip common polynomial content from the coefficients."""
    out = {c: _as_ratfunc(table, v) for c, v in coords.items()}
    lead = out[min(out)]
    out = {c: v / lead for c, v in out.items()}
    distinct: dict[str, Poly] = {}
    for v in out.values():
        if not v.is_poly():
            distinct.setdefault(str(v.den), v.den)
    if not distinct:
        return out
    clear = Poly.one(table)
    for d in distinct.values():
        if clear.divide_exact(d) is not None:
            continue
        quot = d.divide_exact(clear)
        clear = d if quot is not None else clear * d
    factor = RatFunc.from_poly(clear)
    out = {c: v * factor for c, v in out.items()}
    changed = True
    while changed:
        changed = False
        for d in distinct.values():
            if d.is_constant():
                continue
            parts = {c: v.num.divide_exact(d) for c, v in out.items()}
            if all(p is not None for p in parts.values()) \
                    and all(v.is_poly() for v in out.values()):
                out = {c: RatFunc.from_poly(p) for c, p in parts.items()}
                changed = True
    return out


def solve_casimirs(btable: BracketTable, ansatz: AnsatzSpec | None = None,
                   invertible: Sequence[bool] | None = None,
                   seed: int = DEFAULT_SEED,
                   rank_report: RankReport | None = None) -> CasimirBasis:
    """Exact basis of ansatz invariants of a bracket table.

    Central generators are reported separately as free solutions; nullspace
    vectors reducible to products of previously accepted invariants and
    central generators are pruned.
    """
    table = btable.table
    r = btable.r
    if ansatz is None:
        ansatz = AnsatzSpec()
    if invertible is None:
        invertible = [False] * r
    basis = enumerate_basis(r, ansatz, invertible)
    if not basis:
        raise ExprError("ansatz basis is empty")
    index = {elem: k for k, elem in enumerate(basis)}
    ncols = len(basis)
    rows = assemble_system(btable, basis)
    reduced, forced = presolve_forced_zero(rows)
    raw = nullspace(reduced, ncols, RatFunc.one(table), forced_zero=forced)
    candidates = _reversed_echelon(raw, ncols)
    if rank_report is None:
        rank_report = generic_rank(btable, seed=seed)
    central = btable.central_generators()
    accepted_exprs: list[LogExpr] = [
        LogExpr(generator_monomial(table, _delta(r, btable.generator_names.index(n))))
        for n in central]
    span = _span_of_products(table, accepted_exprs, index, ansatz.max_degree, ncols)
    solutions: list[LogExpr] = []
    vectors: list[dict[int, RatFunc]] = []
    for cand in candidates:
        rem = _reduce_mod_span(cand, span, ncols)
        if not rem:
            continue
        norm = _normalize_solution(table, rem)
        expr = coords_to_expression(table, basis, norm)
        solutions.append(expr)
        vectors.append(norm)
        accepted_exprs.append(expr)
        span = _span_of_products(table, accepted_exprs, index, ansatz.max_degree, ncols)
    verified = all(verify_invariant(s, btable).ok for s in solutions)
    central_exprs = [LogExpr(RatFunc.var(table, n)) for n in central]
    independence = independence_rank(solutions + central_exprs, btable, seed=seed,
                                     witness=rank_report.witness)
    return CasimirBasis(solutions=solutions, vectors=vectors, basis=basis,
                        free_central=central, ansatz=ansatz,
                        corank=rank_report.corank, independence=independence,
                        rank_report=rank_report, verified=verified,
                        system_rows=len(rows))


def solve_with_escalation(btable: BracketTable, ansatz: AnsatzSpec | None = None,
                          invertible: Sequence[bool] | None = None,
                          seed: int = DEFAULT_SEED, ceiling: int = 4) -> CasimirBasis:
    """Solve, raising max_degree one step at a time until the functional
    independence rank reaches the corank or the ceiling is hit."""
    if ansatz is None:
        ansatz = AnsatzSpec()
    rank_report = generic_rank(btable, seed=seed)
    log: list[str] = []
    current = ansatz
    while True:
        result = solve_casimirs(btable, current, invertible, seed=seed,
                                rank_report=rank_report)
        result.escalations = list(log)
        if result.independence >= result.corank or current.max_degree >= ceiling:
            return result
        nxt = AnsatzSpec(current.max_degree + 1, current.inverse_degree,
                         current.allow_log)
        log.append(f"independence {result.independence} < corank {result.corank}: "
                   f"raising max_degree to {nxt.max_degree}")
        current = nxt
