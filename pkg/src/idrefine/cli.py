"""Command-line interface.

Subcommands: validate, solve, sweep, oracle, gen, profile.
Exit codes: 0 success, 1 validation failure, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .diagram import DiagramError, load_diagram, serialize_diagram, validate
from .engine import Engine, compile_network
from .generate import GeneratorSpec, gen_random_id
from .harness import run_profile
from .multistage import dumps_multistage_policy, sweep_back
from .oracle import oracle_optimal, oracle_optimal_multistage
from .refine import RefinementConfig, StoppingRule, refine
from .tree import dumps_policy, tree_value

VALIDATION_FAILURE = 1
RUNTIME_ERROR = 2


class _InvalidInput(Exception):
    """Input diagram failed to parse or validate (exit code 1)."""


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--leaf", choices=["posthoc", "random"], default="posthoc",
                   help="leaf selection strategy")
    p.add_argument("--ext", choices=["greedy", "random"], default="greedy",
                   help="extension selection strategy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-ext", type=int, default=None,
                   help="stop after this many extensions")
    p.add_argument("--max-passes", type=int, default=None,
                   help="stop once this many propagation passes were spent")
    p.add_argument("--min-evi", type=float, default=None,
                   help="stop when the best improvement falls below this (greedy only)")
    p.add_argument("--complete", action="store_true",
                   help="refine until the tree is complete")
    p.add_argument("--trace", default=None, help="write the anytime trace CSV here")
    p.add_argument("--policy", default=None, help="write the policy JSON here")


def _stopping_rule(args, parser) -> StoppingRule:
    if args.min_evi is not None and args.ext != "greedy":
        parser.error("--min-evi requires --ext greedy")
    complete = args.complete
    if args.max_ext is None and args.max_passes is None and args.min_evi is None:
        complete = True
    return StoppingRule(max_extensions=args.max_ext, max_passes=args.max_passes,
                        min_evi=args.min_evi, run_to_complete=complete)


def _config(args, parser) -> RefinementConfig:
    return RefinementConfig(leaf_strategy=args.leaf, extension_strategy=args.ext,
                            stop=_stopping_rule(args, parser), seed=args.seed)


def _load_valid(path) -> "InfluenceDiagram":
    try:
        diagram = load_diagram(path)
    except DiagramError as e:
        raise _InvalidInput(str(e)) from None
    report = validate(diagram)
    if not report.ok:
        raise _InvalidInput("; ".join(report.violations))
    return diagram


def _budgets(entries, parser) -> dict[str, int]:
    out = {}
    for entry in entries or []:
        name, sep, num = entry.partition("=")
        if not sep or not name:
            parser.error(f"--budget expects NAME=EXTENSIONS, got {entry!r}")
        try:
            out[name] = int(num)
        except ValueError:
            parser.error(f"--budget expects an integer extension count, got {entry!r}")
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="idrefine",
                                     description="Anytime influence-diagram solver")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a diagram file")
    p.add_argument("file")

    p = sub.add_parser("solve", help="refine a policy tree for one decision")
    p.add_argument("file")
    p.add_argument("--decision", default=None)
    _add_solver_flags(p)

    p = sub.add_parser("sweep", help="sweep back over every decision")
    p.add_argument("file")
    _add_solver_flags(p)
    p.add_argument("--budget", action="append", metavar="NAME=EXTENSIONS",
                   help="per-decision extension budget (repeatable)")

    p = sub.add_parser("oracle", help="brute-force optimal policy")
    p.add_argument("file")
    p.add_argument("--decision", default=None)

    p = sub.add_parser("gen", help="generate a random single-decision diagram")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--arity", type=int, default=2)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("profile", help="solve and write a cost/value summary")
    p.add_argument("file")
    p.add_argument("--decision", default=None)
    _add_solver_flags(p)
    p.add_argument("--summary", default=None, help="write the summary JSON here")
    return parser


def _cmd_validate(args) -> int:
    try:
        diagram = load_diagram(args.file)
    except DiagramError as e:
        print(str(e))
        return VALIDATION_FAILURE
    report = validate(diagram)
    if report.ok:
        print("ok")
        return 0
    for v in report.violations:
        print(v)
    return VALIDATION_FAILURE


def _cmd_solve(args, parser) -> int:
    diagram = _load_valid(args.file)
    decision = args.decision
    if decision is None:
        decisions = diagram.decisions
        if len(decisions) != 1:
            raise ValueError("--decision is required for a multi-decision diagram")
        decision = decisions[0]
    engine = Engine(compile_network(diagram))
    tree, trace = refine(engine, decision, _config(args, parser))
    if args.trace:
        trace.write(args.trace)
    if args.policy:
        with open(args.policy, "w", encoding="utf-8") as fh:
            fh.write(dumps_policy(tree))
    value = tree_value(tree)
    last = trace.records[-1]
    print(f"{decision}: value {value!r} (raw {tree.denormalize(value)!r}) after "
          f"{last.iteration} extensions, {last.fine_queries} fine queries, "
          f"{last.passes} passes")
    return 0


def _cmd_sweep(args, parser) -> int:
    diagram = _load_valid(args.file)
    base = _config(args, parser)
    budgets = _budgets(args.budget, parser)
    for name in budgets:
        if name not in diagram.decisions:
            raise ValueError(f"--budget names unknown decision {name!r}")
    configs = {}
    for d in diagram.decision_order:
        if d in budgets:
            stop = StoppingRule(max_extensions=budgets[d], max_passes=base.stop.max_passes,
                                min_evi=base.stop.min_evi,
                                run_to_complete=base.stop.run_to_complete)
        else:
            stop = base.stop
        configs[d] = RefinementConfig(leaf_strategy=base.leaf_strategy,
                                      extension_strategy=base.extension_strategy,
                                      stop=stop, seed=base.seed)
    policy, traces = sweep_back(diagram, configs)
    if args.trace:
        from .harness import trace_path_for
        for d, trace in traces.items():
            trace.write(trace_path_for(args.trace, d))
    if args.policy:
        with open(args.policy, "w", encoding="utf-8") as fh:
            fh.write(dumps_multistage_policy(policy))
    print(f"joint value {policy.value_normalized!r} (raw {policy.value_raw!r})")
    for d in diagram.decision_order:
        last = traces[d].records[-1]
        print(f"  {d}: {last.iteration} extensions, {last.fine_queries} fine queries, "
              f"{last.passes} passes")
    return 0


def _cmd_oracle(args) -> int:
    diagram = _load_valid(args.file)
    decisions = diagram.decisions
    if args.decision is not None or len(decisions) == 1:
        result = oracle_optimal(diagram, args.decision)
        rows = [{"state": dict(zip(result.predecessors, state)), "action": action,
                 "value_normalized": result.per_state[state]}
                for state, action in result.table.items()]
        print(json.dumps({"decision": result.decision,
                          "value_normalized": result.value,
                          "value_raw": result.raw_value,
                          "table": rows}, indent=2))
    else:
        result = oracle_optimal_multistage(diagram)
        tables = {d: [{"state": list(state), "action": action}
                      for state, action in rows.items()]
                  for d, rows in result.tables.items()}
        print(json.dumps({"value_normalized": result.value,
                          "value_raw": result.raw_value,
                          "tables": tables}, indent=2))
    return 0


def _cmd_gen(args) -> int:
    diagram = gen_random_id(GeneratorSpec(n=args.n, seed=args.seed, arity=args.arity))
    with open(args.output, "w", encoding="utf-8") as fh:
        fh.write(serialize_diagram(diagram))
    print(f"wrote {args.output}")
    return 0


def _cmd_profile(args, parser) -> int:
    diagram = _load_valid(args.file)
    summary, _ = run_profile(diagram, args.decision, _config(args, parser),
                             trace_path=args.trace, policy_path=args.policy,
                             summary_path=args.summary)
    print(json.dumps(summary.to_dict(), indent=2))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "solve":
            return _cmd_solve(args, parser)
        if args.command == "sweep":
            return _cmd_sweep(args, parser)
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "gen":
            return _cmd_gen(args)
        if args.command == "profile":
            return _cmd_profile(args, parser)
        raise ValueError(f"unknown command {args.command!r}")
    except _InvalidInput as e:
        print(f"invalid diagram: {e}", file=sys.stderr)
        return VALIDATION_FAILURE
    except Exception as e:  # noqa: BLE001 - CLI boundary
        print(f"error: {e}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
