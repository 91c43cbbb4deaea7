"""Bracket tables and degeneracy analysis of the structure matrix.

A bracket table stores the above-diagonal entries f_ij of a skew matrix of
rational functions in the generators and parameters.  The rank of that matrix
determines how many functionally independent invariants can exist: for r
generators and generic rank p, at most r - p.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .expr import (GENERATOR, PARAMETER, ExprError, RatFunc, VarTable, diff,
                   substitute)
from .linalg import det, pfaffian, rank_of, rows_from_dense

DEFAULT_SEED = 20140


class BracketTable:
    """Skew table of generator brackets {u_i, u_j} = f_ij over one variable table."""

    def __init__(self, table: VarTable, entries: Mapping[tuple[int, int], RatFunc]):
        gens = table.generator_indices
        if not gens:
            raise ExprError("bracket table needs at least one generator")
        allowed = set(gens) | set(table.parameter_indices)
        self.table = table
        self.r = len(gens)
        clean: dict[tuple[int, int], RatFunc] = {}
        for (i, j), f in entries.items():
            if not (0 <= i < self.r and 0 <= j < self.r):
                raise ExprError(f"bracket pair ({i}, {j}) out of range")
            if i >= j:
                raise ExprError(f"bracket pair ({i}, {j}) must be above the diagonal")
            if f.table is not table:
                raise ExprError("bracket entry over a different table")
            used = f.num.used_indices() | f.den.used_indices()
            if not used <= allowed:
                bad = sorted(table.names[k] for k in used - allowed)
                raise ExprError(f"bracket entry uses non-generator variables: {bad}")
            if not f.is_zero():
                clean[(i, j)] = f
        self.entries = clean

    @property
    def generator_names(self) -> tuple[str, ...]:
        return self.table.generator_names

    def bracket(self, i: int, j: int) -> RatFunc:
        """Signed entry {u_i, u_j}; skew symmetry fills the lower triangle."""
        if i == j:
            return RatFunc.zero(self.table)
        if i < j:
            return self.entries.get((i, j), RatFunc.zero(self.table))
        f = self.entries.get((j, i))
        return RatFunc.zero(self.table) if f is None else -f

    def structure_matrix(self) -> list[list[RatFunc]]:
        """Dense r x r skew matrix of bracket entries."""
        return [[self.bracket(i, j) for j in range(self.r)] for i in range(self.r)]

    def central_generators(self) -> list[str]:
        """Names of generators whose bracket with every generator vanishes."""
        out = []
        for i in range(self.r):
            if all(self.bracket(i, j).is_zero() for j in range(self.r)):
                out.append(self.table.names[i])
        return out


@dataclass
class JacobiTriple:
    names: tuple[str, str, str]
    ok: bool
    residual: RatFunc


@dataclass
class JacobiReport:
    triples: list[JacobiTriple]

    @property
    def ok(self) -> bool:
        return all(t.ok for t in self.triples)

    def failures(self) -> list[JacobiTriple]:
        return [t for t in self.triples if not t.ok]


def jacobi_check(btable: BracketTable) -> JacobiReport:
    """Verify the Jacobi identity for every generator triple i < j < k."""
    names = btable.generator_names
    r = btable.r
    triples: list[JacobiTriple] = []
    for i in range(r):
        for j in range(i + 1, r):
            for k in range(j + 1, r):
                residual = RatFunc.zero(btable.table)
                for m in range(r):
                    residual = residual + (diff(btable.bracket(j, k), m) * btable.bracket(i, m)
                                           + diff(btable.bracket(k, i), m) * btable.bracket(j, m)
                                           + diff(btable.bracket(i, j), m) * btable.bracket(k, m))
                triples.append(JacobiTriple((names[i], names[j], names[k]),
                                            residual.is_zero(), residual))
    return JacobiReport(triples)


def sample_point(table: VarTable, rng: random.Random) -> list[Fraction]:
    """Random rational values for generators and parameters; other variables zero.

    Components have numerators in {-9..9} without 0 and denominators up to 7.
    """
    vals = [Fraction(0)] * len(table)
    for i, kind in enumerate(table.kinds):
        if kind in (GENERATOR, PARAMETER):
            num = rng.choice([n for n in range(-9, 10) if n])
            den = rng.randint(1, 7)
            vals[i] = Fraction(num, den)
    return vals


@dataclass
class RankReport:
    rank: int
    corank: int
    sampled_rank: int
    witness: dict[str, Fraction] | None
    seed: int
    samples: int
    kind: str
    degeneracy: RatFunc

    def summary(self) -> str:
        deg = "0" if self.degeneracy.is_zero() else str(self.degeneracy)
        return (f"rank {self.rank}, corank {self.corank} "
                f"({self.kind} {deg}; sampled max {self.sampled_rank} "
                f"over {self.samples} points, seed {self.seed})")


def generic_rank(btable: BracketTable, seed: int = DEFAULT_SEED,
                 samples: int = 16) -> RankReport:
    """Generic rank of the structure matrix: random rational sampling bounded
    below, exact symbolic elimination as the authority."""
    table = btable.table
    matrix = btable.structure_matrix()
    symbolic = rank_of(rows_from_dense(matrix), btable.r)
    rng = random.Random(seed)
    sampled_max = 0
    witness: dict[str, Fraction] | None = None
    taken = 0
    attempts = 0
    want = samples
    while taken < want and attempts < 40 * samples:
        attempts += 1
        point = sample_point(table, rng)
        try:
            numeric = [[f.evaluate(point) for f in row] for row in matrix]
        except ExprError:
            continue
        taken += 1
        rk = rank_of(rows_from_dense(numeric), btable.r)
        if rk > sampled_max:
            sampled_max = rk
            witness = None
        if rk == max(sampled_max, symbolic) and witness is None:
            witness = {table.names[i]: point[i] for i in range(len(table))
                       if table.kinds[i] in (GENERATOR, PARAMETER)}
        if taken == want and (sampled_max < symbolic) and want < 12 * samples:
            want += samples
    r = btable.r
    if r % 2 == 0:
        degeneracy = pfaffian(matrix, RatFunc.zero(table), RatFunc.one(table))
        kind = "pfaffian"
    else:
        degeneracy = RatFunc.zero(table)
        kind = "determinant"
    return RankReport(rank=symbolic, corank=r - symbolic, sampled_rank=sampled_max,
                      witness=witness, seed=seed, samples=taken, kind=kind,
                      degeneracy=degeneracy)


def symbolic_determinant(btable: BracketTable) -> RatFunc:
    """Exact determinant of the structure matrix."""
    table = btable.table
    return det(btable.structure_matrix(), RatFunc.zero(table), RatFunc.one(table))


def bind_parameters(btable: BracketTable, bindings: Mapping[str, RatFunc]) -> BracketTable:
    """New table with parameters substituted by rational expressions in the rest."""
    table = btable.table
    for name in bindings:
        idx = table.index(name)
        if table.kind(idx) != PARAMETER:
            raise ExprError(f"binding target {name!r} is not a parameter")
    entries = {}
    for key, f in btable.entries.items():
        entries[key] = substitute(f, bindings, table)
    return BracketTable(table, entries)


@dataclass
class ConstraintReport:
    bindings: dict[str, RatFunc]
    degeneracy: RatFunc
    vanishes: bool
    rank: int = field(default=0)
    corank: int = field(default=0)


def verify_parameter_constraint(btable: BracketTable, bindings: Mapping[str, RatFunc],
                                seed: int = DEFAULT_SEED) -> ConstraintReport:
    """Substitute a parameter constraint and re-examine degeneracy and rank."""
    bound = bind_parameters(btable, bindings)
    report = generic_rank(bound, seed=seed)
    return ConstraintReport(bindings=dict(bindings), degeneracy=report.degeneracy,
                            vanishes=report.degeneracy.is_zero(),
                            rank=report.rank, corank=report.corank)
