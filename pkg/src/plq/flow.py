"""Numeric cross-checks: fixed-step RK4 flows generated by observables.

The flow of an observable G moves the generators by du_k/dt = {u_k, G}; in a
canonical realization the motion is Hamilton's equations for the realized
observable.  Integration runs in binary64 floating point: exactness lives in
the symbolic modules, and flows serve as numerical witnesses that monitors
(Casimirs, constraints, the observable itself) stay constant.  Expressions
are compiled once per run into plain Python functions; every denominator is
guarded so a trajectory that approaches a pole aborts with the step index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

from .canonical import CanonicalRealization
from .expr import (PARAMETER, ExprError, LogExpr, Poly, RatFunc, VarTable,
                   diff)
from .parsing import to_string
from .structure import BracketTable

POLE_TOLERANCE = 1e-12


class FlowPoleError(ExprError):
    """A denominator or logarithm argument degenerated along the trajectory."""

    def __init__(self, step: int, time: float):
        super().__init__(f"flow aborted at step {step} (t = {time:.6g}): "
                         "denominator within 1e-12 of zero")
        self.step = step
        self.time = time


class _PoleSignal(Exception):
    """Internal marker raised by compiled evaluators at a near-pole point."""


@dataclass
class FlowConfig:
    """One flow run: its generator, start point, grid, and monitors.

    The initial state maps variable names to numbers and must also supply a
    value for every parameter the run uses.
    """
    observable: LogExpr
    initial_state: Mapping[str, float]
    step_size: float
    steps: int
    monitors: Sequence[LogExpr] = ()
    monitor_labels: Sequence[str] | None = None

    def __post_init__(self):
        if self.step_size <= 0:
            raise ExprError("step size must be positive")
        if self.steps < 1:
            raise ExprError("step count must be at least 1")
        if self.monitor_labels is not None \
                and len(self.monitor_labels) != len(self.monitors):
            raise ExprError("monitor labels do not match the monitors")

    def labels(self) -> list[str]:
        if self.monitor_labels is not None:
            return list(self.monitor_labels)
        return [to_string(m) for m in self.monitors]


@dataclass
class MonitorDrift:
    """Deviation of one monitored quantity from its initial value."""
    label: str
    initial: float
    max_drift: float
    final_drift: float


@dataclass
class DriftReport:
    monitors: list[MonitorDrift]

    def worst(self) -> float:
        return max((m.max_drift for m in self.monitors), default=0.0)

    def by_label(self) -> dict[str, MonitorDrift]:
        return {m.label: m for m in self.monitors}


@dataclass
class FlowResult:
    """RK4 trajectory with the drift report of its monitors."""
    state_names: list[str]
    times: list[float]
    states: list[tuple[float, ...]]
    drift: DriftReport

    @property
    def final_state(self) -> tuple[float, ...]:
        return self.states[-1]

    def final_map(self) -> dict[str, float]:
        return dict(zip(self.state_names, self.final_state))


def _frac_src(c: Fraction) -> str:
    if c.denominator == 1:
        return f"{c.numerator}.0"
    return f"({c.numerator}/{c.denominator})"


def _poly_src(p: Poly, names: Mapping[int, str]) -> str:
    if p.is_zero():
        return "0.0"
    parts = []
    for e, c in sorted(p.terms.items()):
        factors = [_frac_src(c)]
        for i, x in enumerate(e):
            if x == 0:
                continue
            factors.append(names[i] if x == 1 else f"{names[i]}**{x}")
        parts.append("*".join(factors))
    return "(" + " + ".join(parts) + ")"


def _as_logexpr(expr) -> LogExpr:
    if isinstance(expr, LogExpr):
        return expr
    if isinstance(expr, RatFunc):
        return LogExpr(expr)
    if isinstance(expr, Poly):
        return LogExpr(RatFunc.from_poly(expr))
    raise ExprError(f"cannot integrate a {type(expr).__name__}")


def _used_indices(exprs: Sequence[LogExpr]) -> set[int]:
    used: set[int] = set()
    for e in exprs:
        used |= e.rat.num.used_indices() | e.rat.den.used_indices()
        for g, c in e.logs:
            used.add(g)
            used |= c.num.used_indices() | c.den.used_indices()
    return used


def compile_evaluator(table: VarTable, exprs: Sequence[object],
                      state_indices: Sequence[int],
                      values: Mapping[str, float]) -> Callable[[tuple], tuple]:
    """Compile expressions into one function mapping a state tuple to a tuple
    of values, with parameters baked in and denominators guarded."""
    norm = [_as_logexpr(e) for e in exprs]
    used = _used_indices(norm)
    names = {i: f"x{i}" for i in range(len(table))}
    lines = ["def _compiled(state):"]
    for k, i in enumerate(state_indices):
        lines.append(f"    x{i} = state[{k}]")
    state_set = set(state_indices)
    ia = table.alg_index
    for i in sorted(used):
        if i in state_set or i == ia:
            continue
        if table.kind(i) == PARAMETER:
            name = table.names[i]
            if name not in values:
                raise ExprError(f"no value given for parameter {name!r}")
            lines.append(f"    x{i} = {float(values[name])!r}")
        else:
            raise ExprError(f"variable {table.names[i]!r} is not part of "
                            "the flow state")
    if ia is not None and ia in used:
        if not set(table.q_indices) <= state_set:
            raise ExprError("the radial element needs the position variables "
                            "in the flow state")
        square = " + ".join(f"x{i}*x{i}" for i in table.q_indices)
        lines.append(f"    x{ia} = math.sqrt({square})")
    counter = 0
    logged: set[int] = set()

    def guarded(rf: RatFunc) -> str:
        nonlocal counter
        src = _poly_src(rf.num, names)
        if rf.is_poly():
            return src
        dvar = f"d{counter}"
        counter += 1
        lines.append(f"    {dvar} = {_poly_src(rf.den, names)}")
        lines.append(f"    if abs({dvar}) < {POLE_TOLERANCE!r}: "
                     "raise _PoleSignal()")
        return f"({src} / {dvar})"

    outputs = []
    for le in norm:
        src = guarded(le.rat)
        for g, c in le.logs:
            if g not in logged:
                logged.add(g)
                lines.append(f"    if x{g} <= {POLE_TOLERANCE!r}: "
                             "raise _PoleSignal()")
            src = f"({src} + {guarded(c)}*math.log(x{g}))"
        outputs.append(src)
    lines.append("    return (" + ", ".join(outputs) + ("," if len(outputs) == 1 else "") + ")")
    namespace: dict = {}
    exec("\n".join(lines), {"math": math, "_PoleSignal": _PoleSignal}, namespace)
    return namespace["_compiled"]


def _initial_vector(table: VarTable, state_indices: Sequence[int],
                    values: Mapping[str, float]) -> list[float]:
    out = []
    for i in state_indices:
        name = table.names[i]
        if name not in values:
            raise ExprError(f"no initial value given for {name!r}")
        out.append(float(values[name]))
    return out


def _integrate(rhs: Callable, mon: Callable, y0: Sequence[float], h: float,
               steps: int, labels: Sequence[str],
               state_names: Sequence[str]) -> FlowResult:
    y = tuple(y0)
    try:
        base = mon(y)
    except _PoleSignal:
        raise FlowPoleError(0, 0.0) from None
    times = [0.0]
    states = [y]
    max_drift = [0.0] * len(base)
    current = base
    half = h / 2.0
    sixth = h / 6.0
    for n in range(1, steps + 1):
        try:
            k1 = rhs(y)
            k2 = rhs(tuple(a + half * b for a, b in zip(y, k1)))
            k3 = rhs(tuple(a + half * b for a, b in zip(y, k2)))
            k4 = rhs(tuple(a + h * b for a, b in zip(y, k3)))
            y = tuple(a + sixth * (p + 2.0 * (q + r) + s)
                      for a, p, q, r, s in zip(y, k1, k2, k3, k4))
            current = mon(y)
        except _PoleSignal:
            raise FlowPoleError(n, n * h) from None
        times.append(n * h)
        states.append(y)
        for i in range(len(base)):
            d = abs(current[i] - base[i])
            if d > max_drift[i]:
                max_drift[i] = d
    final = [abs(a - b) for a, b in zip(current, base)]
    report = DriftReport([MonitorDrift(l, b, md, fd) for l, b, md, fd
                          in zip(labels, base, max_drift, final)])
    return FlowResult(list(state_names), times, states, report)


def _check_abstract_domain(table: VarTable, expr: LogExpr, what: str) -> None:
    allowed = set(table.generator_indices) | set(table.parameter_indices)
    if not _used_indices([expr]) <= allowed:
        raise ExprError(f"{what} must use only generators and parameters")


def abstract_flow(btable: BracketTable, cfg: FlowConfig) -> FlowResult:
    """RK4 trajectory of the generator vector under du_k/dt = {u_k, G}."""
    table = btable.table
    r = btable.r
    observable = _as_logexpr(cfg.observable)
    _check_abstract_domain(table, observable, "the flow observable")
    monitors = [_as_logexpr(m) for m in cfg.monitors]
    for m in monitors:
        _check_abstract_domain(table, m, "a flow monitor")
    gens = table.generator_indices
    partials = [diff(observable, gi) for gi in gens]
    rhs_exprs = []
    for k in range(r):
        total = LogExpr.zero(table)
        for i in range(r):
            f = btable.bracket(k, i)
            if f.is_zero():
                continue
            total = total + partials[i] * LogExpr(f)
        rhs_exprs.append(total)
    rhs = compile_evaluator(table, rhs_exprs, gens, cfg.initial_state)
    mon = compile_evaluator(table, monitors, gens, cfg.initial_state)
    y0 = _initial_vector(table, gens, cfg.initial_state)
    return _integrate(rhs, mon, y0, cfg.step_size, cfg.steps, cfg.labels(),
                      table.generator_names)


def canonical_flow(real: CanonicalRealization, hamiltonian,
                   cfg: FlowConfig) -> FlowResult:
    """RK4 on Hamilton's equations for the realized observable.

    Monitors given over the generators are realized first; monitors already
    over the canonical variables are integrated as written.
    """
    table = real.table
    realized = real.realize(_as_logexpr(hamiltonian))
    qs = list(table.q_indices)
    ps = list(table.p_indices)
    state = qs + ps
    rhs_exprs = [diff(realized, p) for p in ps]
    rhs_exprs += [diff(realized, q) * RatFunc.const(table, -1) for q in qs]
    monitors = [real.realize(_as_logexpr(m)) for m in cfg.monitors]
    rhs = compile_evaluator(table, rhs_exprs, state, cfg.initial_state)
    mon = compile_evaluator(table, monitors, state, cfg.initial_state)
    y0 = _initial_vector(table, state, cfg.initial_state)
    names = [table.names[i] for i in state]
    return _integrate(rhs, mon, y0, cfg.step_size, cfg.steps, cfg.labels(),
                      names)


def generator_trajectory(real: CanonicalRealization, result: FlowResult,
                         values: Mapping[str, float]) -> list[tuple[float, ...]]:
    """Generator values along a canonical trajectory, via the realization."""
    table = real.table
    state = list(table.q_indices) + list(table.p_indices)
    fn = compile_evaluator(table, list(real.expressions), state, values)
    out = []
    for point in result.states:
        try:
            out.append(fn(point))
        except _PoleSignal:
            raise FlowPoleError(0, 0.0) from None
    return out
