"""Exact linear algebra over a field of Fraction or RatFunc entries.

Rows are sparse mappings from column index to a nonzero field element.  The
pivot rule is deterministic everywhere: columns are scanned left to right and
the first remaining row with a nonzero entry in the current column pivots.
Entries only ever pass through ring operations and exact division, so results
are exact for any element type supporting +, -, *, / and comparison with 0.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence, TypeVar

from .expr import ExprError, Poly, RatFunc

E = TypeVar("E")

Row = dict


def _combine(row: Row, factor, pivot_row: Row) -> None:
    """In place: row -= factor * pivot_row, dropping entries that cancel."""
    for c, v in pivot_row.items():
        cur = row.get(c)
        nv = -(factor * v) if cur is None else cur - factor * v
        if nv == 0:
            row.pop(c, None)
        else:
            row[c] = nv


def rref(rows: Sequence[Row], ncols: int) -> tuple[list[Row], list[int]]:
    """Reduced row echelon form; returns pivot rows (pivot scaled to one) and pivot columns."""
    work = [dict(r) for r in rows if r]
    placed: list[Row] = []
    pivots: list[int] = []
    for col in range(ncols):
        hit = None
        for k, row in enumerate(work):
            if col in row:
                hit = k
                break
        if hit is None:
            continue
        piv = work.pop(hit)
        pv = piv[col]
        if pv != 1:
            piv = {c: v / pv for c, v in piv.items()}
        for row in work:
            if col in row:
                _combine(row, row[col], piv)
        for row in placed:
            if col in row:
                _combine(row, row[col], piv)
        work = [r for r in work if r]
        placed.append(piv)
        pivots.append(col)
    return placed, pivots


def rank_of(rows: Sequence[Row], ncols: int) -> int:
    """Exact rank of a sparse matrix."""
    return len(rref(rows, ncols)[1])


def nullspace(rows: Sequence[Row], ncols: int, one,
              forced_zero: frozenset[int] | set[int] = frozenset()) -> list[list]:
    """Basis of the right nullspace, one vector per free column.

    Each vector is scaled so that its first nonzero coordinate equals one.
    Columns listed in forced_zero are constrained to zero rather than free,
    which lets presolved systems keep their original column count.
    """
    placed, pivots = rref(rows, ncols)
    pivot_set = set(pivots) | set(forced_zero)
    by_pivot = dict(zip(pivots, placed))
    zero = one - one
    basis: list[list] = []
    for f in range(ncols):
        if f in pivot_set:
            continue
        vec = [zero] * ncols
        vec[f] = one
        for p in pivots:
            entry = by_pivot[p].get(f)
            if entry is not None:
                vec[p] = -entry
        first = next(v for v in vec if v != 0)
        if first != 1:
            vec = [v / first for v in vec]
        basis.append(vec)
    return basis


def presolve_forced_zero(rows: Sequence[Row]) -> tuple[list[Row], set[int]]:
    """Iteratively apply singleton rows, which force their column to zero.

    Returns the reduced rows (duplicates and empties dropped) and the set of
    forced columns.  The nullspace is unchanged up to re-inserting zeros at
    the forced columns.
    """
    work = [dict(r) for r in rows if r]
    forced: set[int] = set()
    changed = True
    while changed:
        changed = False
        keep: list[Row] = []
        for row in work:
            for c in forced:
                row.pop(c, None)
            if not row:
                continue
            if len(row) == 1:
                (c,) = row.keys()
                forced.add(c)
                changed = True
            else:
                keep.append(row)
        seen: set[tuple] = set()
        work = []
        for row in keep:
            for c in forced:
                row.pop(c, None)
            if not row:
                continue
            key = tuple(sorted((c, str(v)) for c, v in row.items()))
            if key in seen:
                continue
            seen.add(key)
            work.append(row)
    return work, forced


def det(matrix: Sequence[Sequence[E]], zero: E, one: E) -> E:
    """Exact determinant of a dense square matrix by elimination."""
    n = len(matrix)
    a = [list(r) for r in matrix]
    sign_flip = False
    acc = one
    for col in range(n):
        hit = None
        for k in range(col, n):
            if a[k][col] != 0:
                hit = k
                break
        if hit is None:
            return zero
        if hit != col:
            a[col], a[hit] = a[hit], a[col]
            sign_flip = not sign_flip
        pv = a[col][col]
        acc = acc * pv
        for k in range(col + 1, n):
            if a[k][col] != 0:
                f = a[k][col] / pv
                a[k] = [x - f * y for x, y in zip(a[k], a[col])]
    return -acc if sign_flip else acc


def pfaffian(matrix: Sequence[Sequence[E]], zero: E, one: E) -> E:
    """Pfaffian of a skew matrix of even size, by first-row expansion with memoization."""
    n = len(matrix)
    if n % 2:
        raise ValueError("pfaffian requires an even-sized matrix")
    memo: dict[tuple[int, ...], E] = {(): one}

    def pf(active: tuple[int, ...]) -> E:
        if active in memo:
            return memo[active]
        i0 = active[0]
        rest = active[1:]
        total = zero
        for pos, j in enumerate(rest):
            a = matrix[i0][j]
            if a != 0:
                sub = tuple(x for x in rest if x != j)
                term = a * pf(sub)
                total = total + term if pos % 2 == 0 else total - term
        memo[active] = total
        return total

    return pf(tuple(range(n)))


def rows_from_dense(matrix: Sequence[Sequence[E]]) -> list[Row]:
    """Sparse rows from a dense matrix, skipping zero entries."""
    out = []
    for r in matrix:
        row = {c: v for c, v in enumerate(r) if v != 0}
        out.append(row)
    return out


def collect_rows(columns: Sequence[RatFunc]) -> list[Row]:
    """Linear system rows asking a combination of expression columns to vanish.

    Denominators are cleared by the product of distinct denominator
    polynomials; the cleared columns are split by their non-parameter
    monomials, one row per monomial, with parameter-polynomial entries
    wrapped as rational functions.  Rows come out in descending graded
    lexicographic order of the keying monomial.
    """
    if not columns:
        return []
    table = columns[0].table
    param_set = set(table.parameter_indices)
    distinct: dict[str, Poly] = {}
    for col in columns:
        if not col.is_poly():
            distinct.setdefault(str(col.den), col.den)
    common = Poly.one(table)
    for d in distinct.values():
        common = common * d
    grouped: dict[tuple[int, ...], dict[int, dict[tuple[int, ...], Fraction]]] = {}
    for cidx, col in enumerate(columns):
        cleared = col * RatFunc.from_poly(common)
        if not cleared.is_poly():
            raise ExprError("failed to clear denominators in linear system")
        for e, c in cleared.num.terms.items():
            key = tuple(0 if i in param_set else x for i, x in enumerate(e))
            pexp = tuple(x if i in param_set else 0 for i, x in enumerate(e))
            cell = grouped.setdefault(key, {}).setdefault(cidx, {})
            cell[pexp] = cell.get(pexp, Fraction(0)) + c
    out: list[Row] = []
    for key in sorted(grouped, key=lambda e: (sum(e), e), reverse=True):
        row = {}
        for cidx, cell in grouped[key].items():
            p = Poly.from_terms(table, cell.items())
            if p.is_zero():
                continue
            row[cidx] = p.constant_value() if p.is_constant() else RatFunc.from_poly(p)
        if row:
            out.append(row)
    return out
