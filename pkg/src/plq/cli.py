"""Command line interface: verify, rank, solve, check, flow, examples.

Problems come from JSON files or from the built-in corpus (a corpus name may
stand in for a file path).  Human-readable text goes to standard output;
`--json PATH` additionally writes the full machine-readable report.  Exit
codes: 0 success, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from .canonical import verify_closure
from .corpus import corpus_data, corpus_names, corpus_problem
from .expr import ExprError, RatFunc
from .flow import (FlowConfig, FlowPoleError, abstract_flow, canonical_flow)
from .parsing import ParseError, parse_expression, parse_ratfunc, to_string
from .problem import (Problem, ProblemError, build_problem, load_problem,
                      problem_to_data, save_problem)
from .solver import (AnsatzSpec, CasimirBasis, solve_casimirs,
                     solve_with_escalation, verify_invariant)
from .structure import (DEFAULT_SEED, BracketTable, bind_parameters,
                        generic_rank, jacobi_check)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def _load(spec: str) -> Problem:
    path = Path(spec)
    if path.is_file():
        return load_problem(path)
    if spec in corpus_names():
        return corpus_problem(spec)
    raise ProblemError(f"{spec!r} is neither a problem file nor one of the "
                       f"built-in problems ({', '.join(corpus_names())})")


def _parse_bindings(problem: Problem, pairs: list[str]) -> dict[str, RatFunc]:
    bindings: dict[str, RatFunc] = {}
    for raw in pairs:
        name, sep, text = raw.partition("=")
        if not sep or not name or not text:
            raise ProblemError(f"--bind needs NAME=EXPR, got {raw!r}")
        bindings[name.strip()] = parse_ratfunc(text, problem.table)
    return bindings


def _bound_brackets(problem: Problem, bindings: dict[str, RatFunc]) -> BracketTable:
    if not bindings:
        return problem.brackets
    return bind_parameters(problem.brackets, bindings)


def _closure_json(report) -> dict:
    return {"ok": report.ok, "pairs": len(report.pairs),
            "failures": [{"pair": list(p.names),
                          "residual": to_string(p.residual)}
                         for p in report.failures()]}


def _jacobi_json(report) -> dict:
    return {"ok": report.ok, "triples": len(report.triples),
            "failures": [{"triple": list(t.names),
                          "residual": to_string(t.residual)}
                         for t in report.failures()]}


def _degeneracy_note(rank_report) -> str:
    if rank_report.kind == "pfaffian":
        return f"pfaffian {to_string(rank_report.degeneracy)}"
    return ("determinant identically 0 (skew structure matrix of odd "
            "dimension is always singular)")


def _rank_json(rank_report) -> dict:
    witness = None
    if rank_report.witness is not None:
        witness = {k: str(v) for k, v in rank_report.witness.items()}
    return {"rank": rank_report.rank, "corank": rank_report.corank,
            "sampled_rank": rank_report.sampled_rank,
            "samples": rank_report.samples, "seed": rank_report.seed,
            "kind": rank_report.kind,
            "degeneracy": to_string(rank_report.degeneracy),
            "note": _degeneracy_note(rank_report), "witness": witness}


def _solve_json(basis: CasimirBasis) -> dict:
    return {"solutions": [to_string(s) for s in basis.solutions],
            "free_central": list(basis.free_central),
            "dimension": basis.dimension,
            "independence": basis.independence,
            "corank": basis.corank,
            "verified": basis.verified,
            "escalations": list(basis.escalations),
            "ansatz": {"max_degree": basis.ansatz.max_degree,
                       "inverse_degree": basis.ansatz.inverse_degree,
                       "allow_log": basis.ansatz.allow_log}}


def _write_json(path: str | None, report: dict) -> None:
    if path:
        Path(path).write_text(json.dumps(report, indent=2) + "\n")


def _count(n: int, noun: str) -> str:
    return f"{n} {noun}" + ("" if n == 1 else "s")


def _print_closure(report) -> None:
    if report.ok:
        print(f"closure: ok ({_count(len(report.pairs), 'pair')})")
        return
    print(f"closure: FAILED ({len(report.failures())} of "
          f"{_count(len(report.pairs), 'pair')})")
    for p in report.failures():
        print(f"  ({p.names[0]}, {p.names[1]}): residual "
              f"{to_string(p.residual)}")


def _print_jacobi(report) -> None:
    if report.ok:
        print(f"jacobi: ok ({_count(len(report.triples), 'triple')})")
        return
    print(f"jacobi: FAILED ({len(report.failures())} of "
          f"{_count(len(report.triples), 'triple')})")
    for t in report.failures():
        print(f"  ({', '.join(t.names)}): residual {to_string(t.residual)}")


def _cmd_verify(args) -> int:
    problem = _load(args.file)
    bindings = _parse_bindings(problem, args.bind)
    btable = _bound_brackets(problem, bindings)
    print(f"problem: {problem.name} ({btable.r} generators)")
    report: dict = {"problem": problem.name, "command": "verify",
                    "seed": args.seed,
                    "bindings": {k: to_string(v) for k, v in bindings.items()}}
    ok = True
    if problem.realization is not None:
        closure = verify_closure(btable, problem.realization, seed=args.seed)
        _print_closure(closure)
        report["closure"] = _closure_json(closure)
        ok = ok and closure.ok
    jacobi = jacobi_check(btable)
    _print_jacobi(jacobi)
    report["jacobi"] = _jacobi_json(jacobi)
    ok = ok and jacobi.ok
    _write_json(args.json, report)
    return EXIT_OK if ok else EXIT_FAILED


def _cmd_rank(args) -> int:
    problem = _load(args.file)
    bindings = _parse_bindings(problem, args.bind)
    btable = _bound_brackets(problem, bindings)
    rank_report = generic_rank(btable, seed=args.seed)
    print(f"problem: {problem.name} ({btable.r} generators)")
    print(f"rank: {rank_report.rank}, corank: {rank_report.corank}")
    print(_degeneracy_note(rank_report))
    print(f"sampled max {rank_report.sampled_rank} over "
          f"{rank_report.samples} points (seed {rank_report.seed})")
    report = {"problem": problem.name, "command": "rank",
              "seed": args.seed,
              "bindings": {k: to_string(v) for k, v in bindings.items()},
              "rank": _rank_json(rank_report)}
    _write_json(args.json, report)
    return EXIT_OK


def _cmd_solve(args) -> int:
    t0 = time.monotonic()
    problem = _load(args.file)
    bindings = _parse_bindings(problem, args.bind)
    btable = _bound_brackets(problem, bindings)
    print(f"problem: {problem.name} ({btable.r} generators)")
    report: dict = {"problem": problem.name, "command": "solve",
                    "seed": args.seed,
                    "bindings": {k: to_string(v) for k, v in bindings.items()}}
    ok = True
    if problem.realization is not None and not bindings:
        closure = verify_closure(btable, problem.realization, seed=args.seed)
        _print_closure(closure)
        report["closure"] = _closure_json(closure)
        ok = ok and closure.ok
    jacobi = jacobi_check(btable)
    _print_jacobi(jacobi)
    report["jacobi"] = _jacobi_json(jacobi)
    ok = ok and jacobi.ok
    base = problem.ansatz
    inverse = base.inverse_degree if args.inverse_degree is None \
        else args.inverse_degree
    allow_log = base.allow_log or args.allow_log
    if args.max_degree is not None:
        ansatz = AnsatzSpec(args.max_degree, inverse, allow_log)
        basis = solve_casimirs(btable, ansatz, problem.invertible,
                               seed=args.seed)
    else:
        ansatz = AnsatzSpec(base.max_degree, inverse, allow_log)
        basis = solve_with_escalation(btable, ansatz, problem.invertible,
                                      seed=args.seed)
    rank_report = basis.rank_report
    print(f"rank: {rank_report.rank}, corank: {rank_report.corank}")
    print(_degeneracy_note(rank_report))
    for line in basis.escalations:
        print(f"escalation: {line}")
    n_free = len(basis.free_central)
    print(f"casimir basis: dimension {basis.dimension} "
          f"({len(basis.solutions)} solved + {n_free} free central)")
    for k, sol in enumerate(basis.solutions, start=1):
        print(f"  {k}: {to_string(sol)}")
    if basis.free_central:
        print("free central generators: " + ", ".join(basis.free_central))
    print(f"independence rank: {basis.independence} (corank "
          f"{basis.corank})")
    print(f"verified: {'yes' if basis.verified else 'NO'}")
    print(f"seed: {args.seed}")
    ok = ok and basis.verified
    report["rank"] = _rank_json(rank_report)
    report["solve"] = _solve_json(basis)
    report["timings"] = {"total": time.monotonic() - t0}
    _write_json(args.json, report)
    return EXIT_OK if ok else EXIT_FAILED


def _cmd_check(args) -> int:
    problem = _load(args.file)
    bindings = _parse_bindings(problem, args.bind)
    btable = _bound_brackets(problem, bindings)
    expr = parse_expression(args.invariant, problem.table)
    if bindings:
        from .expr import substitute
        expr = substitute(expr, bindings, problem.table)
    result = verify_invariant(expr, btable)
    print(f"problem: {problem.name}")
    print(f"invariant: {to_string(expr)}")
    print(f"verified: {'true' if result.ok else 'false'}")
    residuals = {}
    for gen, residual in result.residuals:
        residuals[gen] = to_string(residual)
        if not residual.is_zero():
            print(f"  residual against {gen}: {to_string(residual)}")
    report = {"problem": problem.name, "command": "check",
              "seed": args.seed,
              "bindings": {k: to_string(v) for k, v in bindings.items()},
              "check": {"invariant": to_string(expr), "verified": result.ok,
                        "residuals": residuals}}
    _write_json(args.json, report)
    return EXIT_OK if result.ok else EXIT_FAILED


def _parse_init(text: str) -> dict[str, float]:
    values: dict[str, float] = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        name, sep, raw = item.partition("=")
        if not sep:
            raise ProblemError(f"--init entries need NAME=VALUE, got {item!r}")
        try:
            values[name.strip()] = float(Fraction(raw.strip()))
        except (ValueError, ZeroDivisionError):
            raise ProblemError(f"--init value for {name.strip()!r} is not "
                               f"a number: {raw.strip()!r}") from None
    return values


def _cmd_flow(args) -> int:
    problem = _load(args.file)
    bindings = _parse_bindings(problem, args.bind)
    btable = _bound_brackets(problem, bindings)
    defaults = problem.flow_defaults or {}
    observable_text = args.observable or defaults.get("observable")
    if not observable_text:
        raise ProblemError("flow needs --observable (no default in the "
                           "problem file)")
    init = dict(defaults.get("init", {}))
    if args.init:
        init.update(_parse_init(args.init))
    if not init:
        raise ProblemError("flow needs --init values")
    dt = args.dt if args.dt is not None else defaults.get("dt")
    steps = args.steps if args.steps is not None else defaults.get("steps")
    if dt is None or steps is None:
        raise ProblemError("flow needs --dt and --steps (no defaults in "
                           "the problem file)")
    monitor_texts = list(args.monitor or defaults.get("monitors", []))
    observable = parse_expression(observable_text, problem.table)
    monitors = [parse_expression(m, problem.table) for m in monitor_texts]
    cfg = FlowConfig(observable, init, float(dt), int(steps), monitors,
                     monitor_texts or None)
    table = problem.table
    canonical_names = {table.names[i]
                       for i in (*table.q_indices, *table.p_indices)}
    wants_canonical = bool(canonical_names & set(init))
    if wants_canonical and problem.realization is None:
        raise ProblemError("initial state uses canonical variables but the "
                           "problem has no realization")
    if wants_canonical:
        result = canonical_flow(problem.realization, observable, cfg)
        mode = "canonical"
    else:
        result = abstract_flow(btable, cfg)
        mode = "abstract"
    print(f"problem: {problem.name}")
    print(f"flow ({mode}): observable {to_string(observable)}, "
          f"{steps} steps of {dt}")
    final = result.final_map()
    print("final state: " + ", ".join(f"{k}={v:.9g}" for k, v in final.items()))
    for m in result.drift.monitors:
        print(f"monitor {m.label}: initial {m.initial:.9g}, "
              f"max drift {m.max_drift:.3g}, final drift {m.final_drift:.3g}")
    report = {"problem": problem.name, "command": "flow", "mode": mode,
              "seed": args.seed,
              "bindings": {k: to_string(v) for k, v in bindings.items()},
              "flow": {"observable": to_string(observable), "dt": float(dt),
                       "steps": int(steps),
                       "final_state": {k: v for k, v in final.items()},
                       "monitors": [{"label": m.label, "initial": m.initial,
                                     "max_drift": m.max_drift,
                                     "final_drift": m.final_drift}
                                    for m in result.drift.monitors]}}
    _write_json(args.json, report)
    return EXIT_OK


def _cmd_examples(args) -> int:
    if args.name is None:
        for name in corpus_names():
            problem = corpus_problem(name)
            realized = ("canonical realization"
                        if problem.realization is not None
                        else "abstract table")
            params = [problem.table.names[i]
                      for i in problem.table.parameter_indices]
            print(f"{name}: {problem.brackets.r} generators, {realized}"
                  + (f", parameters {', '.join(params)}" if params else ""))
        return EXIT_OK
    data = corpus_data(args.name)
    if args.emit:
        problem = build_problem(data)
        save_problem(problem, args.emit)
        print(f"wrote {args.emit}")
        return EXIT_OK
    print(json.dumps(data, indent=2))
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plq",
        description="Exact invariants of finite-dimensional bracket algebras")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_file=True):
        if needs_file:
            p.add_argument("file", metavar="FILE",
                           help="problem file path or built-in problem name")
        p.add_argument("--bind", action="append", default=[],
                       metavar="NAME=EXPR",
                       help="substitute a parameter before computing")
        p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                       help="random seed for sampling (echoed in reports)")
        p.add_argument("--json", metavar="PATH",
                       help="write the full report as JSON")

    p = sub.add_parser("verify", help="check closure and the Jacobi identity")
    common(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("rank", help="rank, corank, and degeneracy of the "
                                    "structure matrix")
    common(p)
    p.set_defaults(func=_cmd_rank)

    p = sub.add_parser("solve", help="solve for the invariants")
    common(p)
    p.add_argument("--max-degree", type=int, default=None,
                   help="pin the ansatz degree (disables auto-escalation)")
    p.add_argument("--inverse-degree", type=int, default=None,
                   help="largest inverse power of invertible generators")
    p.add_argument("--allow-log", action="store_true", default=False,
                   help="allow logarithms of invertible generators")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("check", help="verify one invariant expression")
    common(p)
    p.add_argument("--invariant", required=True, metavar="EXPR",
                   help="expression to test against every generator")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("flow", help="integrate the flow of an observable")
    common(p)
    p.add_argument("--observable", metavar="EXPR", default=None,
                   help="generator of the flow")
    p.add_argument("--init", metavar="ASSIGNMENTS", default=None,
                   help="comma-separated NAME=VALUE initial state "
                        "(generator values, or q/p values for a canonical "
                        "run; include parameter values)")
    p.add_argument("--dt", type=float, default=None, help="step size")
    p.add_argument("--steps", type=int, default=None, help="step count")
    p.add_argument("--monitor", action="append", metavar="EXPR",
                   help="expression whose drift is tracked (repeatable)")
    p.set_defaults(func=_cmd_flow)

    p = sub.add_parser("examples", help="list or export built-in problems")
    p.add_argument("name", nargs="?", default=None,
                   help="built-in problem name")
    p.add_argument("--emit", metavar="PATH",
                   help="write the problem document to a file")
    p.set_defaults(func=_cmd_examples)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FlowPoleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    except (ProblemError, ParseError, ExprError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
