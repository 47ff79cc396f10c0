"""Command-line front-end: check, encode, gen, stats.

Exit codes: 0 verdict true, 1 verdict false, 2 usage or validation error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from typing import Optional

from . import cases
from .constraints import emit_smtlib2
from .enumcheck import Verdict, check
from .errors import HyperMdpError, MixedSchedulerBlock
from .formula import (
    And,
    Arith,
    BoundedUntil,
    Const,
    Formula,
    Less,
    Next,
    NotF,
    ProbOf,
    Prop,
    SchedQuant,
    TrueF,
    Until,
    count_quantifiers,
    parse_formula,
)
from .model import Mdp, load_mdp
from .smt import check_external, encode_main, solve_eager, transform_for_encoding

REPORT_SCHEMA = "hypermdp-report/1"


def _load_formula(args) -> Formula:
    if bool(args.formula) == bool(args.formula_file):
        raise HyperMdpError("exactly one of --formula and --formula-file is required")
    if args.formula:
        return parse_formula(args.formula)
    with open(args.formula_file, "r", encoding="utf-8") as fh:
        return parse_formula(fh.read())


def subformula_census(f: Formula):
    """Distinct subformulas of the encoded body, counting the reduced-bound
    windows that the bounded-until encoding introduces; also reports how
    many probability variables, step indicators and distance families the
    encoding declares per composed state."""
    seen = set()
    bool_nodes = []
    pexpr_nodes = []
    next_operands = set()
    until_targets = set()

    def walk(node):
        if node in seen:
            return
        seen.add(node)
        if isinstance(node, (TrueF, Prop)):
            bool_nodes.append(node)
        elif isinstance(node, And):
            bool_nodes.append(node)
            walk(node.left)
            walk(node.right)
        elif isinstance(node, NotF):
            bool_nodes.append(node)
            walk(node.operand)
        elif isinstance(node, Less):
            bool_nodes.append(node)
            walk(node.left)
            walk(node.right)
        elif isinstance(node, (Arith,)):
            pexpr_nodes.append(node)
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Const):
            pexpr_nodes.append(node)
        elif isinstance(node, ProbOf):
            pexpr_nodes.append(node)
            path = node.path
            if isinstance(path, Next):
                next_operands.add(path.operand)
                walk(path.operand)
            elif isinstance(path, Until):
                until_targets.add(path.right)
                walk(path.left)
                walk(path.right)
            elif isinstance(path, BoundedUntil):
                walk(path.left)
                walk(path.right)
                if path.k2 > 0:
                    if path.k1 == 0:
                        walk(ProbOf(BoundedUntil(path.left, path.right, 0, path.k2 - 1)))
                    else:
                        walk(ProbOf(BoundedUntil(path.left, path.right, path.k1 - 1, path.k2 - 1)))
        else:
            raise AssertionError(node)

    walk(f.body)
    return {
        "subformulas": len(bool_nodes) + len(pexpr_nodes),
        "bool": len(bool_nodes),
        "pexpr": len(pexpr_nodes),
        "next_operands": len(next_operands),
        "until_targets": len(until_targets),
    }


def encoding_variable_count(mdp: Mdp, f: Formula) -> int:
    """Declared-variable count of the encoding, without materializing it."""
    f_enc, _ = transform_for_encoding(f)
    census = subformula_census(f_enc)
    _, n = count_quantifiers(f_enc)
    tuples = len(mdp.states) ** n if n else 1
    m = sum(1 for q in f_enc.prefix if isinstance(q, SchedQuant))
    one_hot = m * sum(len(mdp.enabled[s]) for s in mdp.states)
    per_tuple = census["bool"] + census["pexpr"] + census["next_operands"] + census["until_targets"]
    return one_hot + tuples * per_tuple


def _verdict_json(verdict: Verdict) -> dict:
    return {
        "truth": verdict.truth,
        "mode": verdict.mode,
        "schedulers": {name: a.as_dict() for name, a in verdict.schedulers.items()},
        "states": dict(verdict.states),
    }


def _print_human(verdict: Verdict, out):
    print(f"verdict: {'true' if verdict.truth else 'false'}", file=out)
    if verdict.mode != "none":
        print(f"{verdict.mode}:", file=out)
        for name, assignment in verdict.schedulers.items():
            print(f"  scheduler {name}:", file=out)
            for state, action in assignment.as_dict().items():
                print(f"    {state}: {action}", file=out)
        for name, state in verdict.states.items():
            print(f"  state {name}: {state}", file=out)


def cmd_check(args, out) -> int:
    mdp = load_mdp(args.model)
    f = _load_formula(args)
    engine = args.engine
    solver = args.solver or os.environ.get("HYPERPROB_SOLVER")
    notice = None

    start = time.perf_counter()
    encode_ms = 0.0
    if engine in ("smt-eager", "smt-external"):
        try:
            if engine == "smt-external":
                if not solver:
                    raise HyperMdpError("smt-external needs --solver or HYPERPROB_SOLVER")
                t0 = time.perf_counter()
                cs, _ = encode_main(mdp, f, prune=args.prune)
                smt_text = emit_smtlib2(cs)
                encode_ms = (time.perf_counter() - t0) * 1000
                if args.emit:
                    with open(args.emit, "w", encoding="utf-8") as fh:
                        fh.write(smt_text)
                result = check_external(mdp, f, solver, prune=args.prune)
                verdict = result.decoded
            else:
                if args.emit:
                    t0 = time.perf_counter()
                    cs, _ = encode_main(mdp, f, prune=args.prune)
                    with open(args.emit, "w", encoding="utf-8") as fh:
                        fh.write(emit_smtlib2(cs))
                    encode_ms = (time.perf_counter() - t0) * 1000
                result = solve_eager(
                    mdp, f,
                    max_sched_vars=args.max_sched_vars,
                    max_state_vars=args.max_state_vars,
                    jobs=args.jobs,
                    prune=args.prune,
                )
                verdict = result.decoded
        except MixedSchedulerBlock:
            notice = "notice: mixed scheduler block, falling back to the enum engine"
            engine = "enum"
            verdict = check(mdp, f, max_sched_vars=args.max_sched_vars,
                            max_state_vars=args.max_state_vars)
    else:
        verdict = check(mdp, f, max_sched_vars=args.max_sched_vars,
                        max_state_vars=args.max_state_vars)
    solve_ms = (time.perf_counter() - start) * 1000 - encode_ms

    if notice:
        print(notice, file=sys.stderr)

    m, n = count_quantifiers(f)
    report = {
        "schema": REPORT_SCHEMA,
        "engine": engine,
        "verdict": _verdict_json(verdict),
        "model": {
            "states": len(mdp.states),
            "transitions": mdp.transition_count(),
            "scheduler_space": mdp.scheduler_space_size(),
            "composed_states": len(mdp.states) ** n if n else 1,
        },
        "formula": {
            "scheduler_vars": m,
            "state_vars": n,
            "subformulas": subformula_census(transform_for_encoding(f)[0] if engine != "enum" else f)["subformulas"],
        },
        "encoding": (
            {"variables": encoding_variable_count(mdp, f)}
            if engine in ("smt-eager", "smt-external") else None
        ),
        "timings_ms": {"encode": round(encode_ms, 3), "solve": round(solve_ms, 3)},
    }
    if args.json:
        json.dump(report, out, indent=2)
        out.write("\n")
    else:
        _print_human(verdict, out)
        stats = report["model"]
        print(
            f"engine: {engine}  states={stats['states']} transitions={stats['transitions']} "
            f"scheduler-space={stats['scheduler_space']} composed-states={stats['composed_states']} "
            f"subformulas={report['formula']['subformulas']}",
            file=out,
        )
        print(f"timings: encode {encode_ms:.1f} ms, solve {solve_ms:.1f} ms", file=out)
    return 0 if verdict.truth else 1


def cmd_encode(args, out) -> int:
    mdp = load_mdp(args.model)
    f = _load_formula(args)
    cs, polarity = encode_main(mdp, f, prune=args.prune)
    text = emit_smtlib2(cs)
    with open(args.emit, "w", encoding="utf-8") as fh:
        fh.write(text)
    print(
        f"wrote {args.emit}: polarity={polarity} variables={cs.variable_count()} "
        f"constraints={cs.constraint_count()} subformulas={len(cs.subformula_text)}",
        file=out,
    )
    return 0


def cmd_gen(args, out) -> int:
    if args.family in ("ta", "pw"):
        if args.m is None:
            raise HyperMdpError(f"{args.family} needs --m")
        spec = cases.generate(args.family, m=args.m)
    elif args.family == "ts":
        if args.secrets is None:
            raise HyperMdpError("ts needs --h H1 H2")
        spec = cases.generate("ts", h1=args.secrets[0], h2=args.secrets[1])
    else:
        if args.tier is None:
            raise HyperMdpError("pc needs --tier")
        spec = cases.generate("pc", tier=args.tier)
    model_path, formula_path = cases.write_case(spec, args.out_dir)
    print(f"wrote {model_path} and {formula_path}", file=out)
    states = len(spec.mdp.states)
    transitions = spec.mdp.transition_count()
    if spec.reference:
        ref_s, ref_t = spec.reference
        print(f"states={states} (reference: {ref_s})  transitions={transitions} "
              f"(reference: {ref_t})", file=out)
    else:
        print(f"states={states} (reference: n/a)  transitions={transitions} "
              f"(reference: n/a)", file=out)
    return 0


def cmd_stats(args, out) -> int:
    mdp = load_mdp(args.model)
    print(f"states={len(mdp.states)} transitions={mdp.transition_count()} "
          f"actions={len(mdp.actions)} propositions={len(mdp.ap)} "
          f"scheduler-space={mdp.scheduler_space_size()}", file=out)
    if args.formula or args.formula_file:
        f = _load_formula(args)
        m, n = count_quantifiers(f)
        census = subformula_census(f)
        print(f"scheduler-vars={m} state-vars={n} subformulas={census['subformulas']} "
              f"composed-states={len(mdp.states) ** n if n else 1}", file=out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypermdp",
        description="Check probabilistic hyperproperties on explicit-state MDPs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_formula_args(p):
        p.add_argument("--formula", help="formula text")
        p.add_argument("--formula-file", help="file containing one formula")

    p_check = sub.add_parser("check", help="decide a formula on a model")
    p_check.add_argument("model", help=".mdpx model file")
    add_formula_args(p_check)
    p_check.add_argument("--engine", choices=("enum", "smt-eager", "smt-external"),
                         default="smt-eager")
    p_check.add_argument("--solver", help="external solver binary (or HYPERPROB_SOLVER)")
    p_check.add_argument("--json", action="store_true", help="machine-readable report")
    p_check.add_argument("--emit", help="also write the SMT-LIB2 encoding to this file (smt engines)")
    p_check.add_argument("--prune", action="store_true",
                         help="restrict encoding to composed states reachable from "
                              "all-init tuples (sound only for init-guarded bodies)")
    p_check.add_argument("--max-sched-vars", type=int, default=3)
    p_check.add_argument("--max-state-vars", type=int, default=3)
    p_check.add_argument("--jobs", type=int, default=os.cpu_count(),
                         help="parallel scheduler-branch evaluation")
    p_check.add_argument("--seed", type=int, help="reserved; no randomness on the verdict path")

    p_encode = sub.add_parser("encode", help="emit the SMT-LIB2 encoding")
    p_encode.add_argument("model")
    add_formula_args(p_encode)
    p_encode.add_argument("--emit", required=True, help="output .smt2 path")
    p_encode.add_argument("--prune", action="store_true")

    p_gen = sub.add_parser("gen", help="generate a benchmark model and formula")
    p_gen.add_argument("family", choices=("ta", "pw", "ts", "pc"))
    p_gen.add_argument("--m", type=int, help="loop length for ta/pw")
    p_gen.add_argument("--h", dest="secrets", type=int, nargs=2, metavar=("H1", "H2"),
                       help="secret pair for ts")
    p_gen.add_argument("--tier", choices=("s0", "s01", "s012"), help="pc tier")
    p_gen.add_argument("--out-dir", default=".")

    p_stats = sub.add_parser("stats", help="print model (and formula) statistics")
    p_stats.add_argument("model")
    add_formula_args(p_stats)

    return parser


def main(argv: Optional[list] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    handlers = {
        "check": cmd_check,
        "encode": cmd_encode,
        "gen": cmd_gen,
        "stats": cmd_stats,
    }
    try:
        return handlers[args.command](args, out)
    except (HyperMdpError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
