"""Command-line interface.

Exit codes: 0 success, 2 the instance (or a sweep point) is infeasible,
3 invalid input or a solver failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from typing import List, Optional

from .barrier import SolverParams, Status
from .bnb import IbbaParams
from .harness import (
    DEFAULT_SEED,
    NoCandidate,
    random_small_instance,
    run_scenario1,
    run_scenario2,
    write_rows,
)
from .instance_io import InstanceFormatError, load_instance
from .model import Edge, Local, validate
from .policies import (
    CapExceededError,
    PolicyResult,
    aop_solve,
    brute_force_solve,
    ibba_policy,
    rop_solve,
    wop_solve,
)

EXIT_OK = 0
EXIT_INFEASIBLE = 2
EXIT_FAILURE = 3


def _parse_params(pairs: Optional[List[str]]) -> SolverParams:
    params = SolverParams()
    fields = {f.name: f.type for f in dataclasses.fields(SolverParams)}
    for pair in pairs or []:
        if "=" not in pair:
            raise ValueError(f"--param expects name=value, got {pair!r}")
        name, value = pair.split("=", 1)
        if name not in fields:
            raise ValueError(f"unknown solver parameter {name!r}")
        current = getattr(params, name)
        setattr(params, name, type(current)(float(value)))
    return params


def _option_name(opt) -> str:
    if isinstance(opt, Local):
        return "local"
    if isinstance(opt, Edge):
        return f"edge:{opt.node}"
    return f"cloud-via:{opt.node}"


def _print_result(instance, res: PolicyResult, as_json: bool) -> None:
    if as_json:
        payload = {
            "policy": res.policy,
            "status": res.status.value,
            "energy_j": res.energy_j,
            "offloaded": res.offloaded,
            "nodes": res.nodes,
            "decision": [_option_name(o) for o in res.decision] if res.decision else None,
            "delays_s": res.delays_s,
            "rates_bps": {
                str(i): [r.up_bps, r.down_bps, r.cpu_rate]
                for i, r in sorted(res.allocation.items())
            },
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
        return
    print(f"policy:  {res.policy}")
    print(f"status:  {res.status.value}")
    if res.energy_j is not None:
        print(f"energy:  {res.energy_j:.6f} J total, {res.energy_j / instance.n_tasks:.6f} J per task")
    if res.offloaded is not None:
        print(f"offloaded: {res.offloaded} of {instance.n_tasks}")
    if res.decision is not None and res.delays_s is not None:
        for i, (opt, delay) in enumerate(zip(res.decision, res.delays_s)):
            deadline = instance.tasks[i].deadline_s
            mark = "" if delay <= deadline + 1e-6 else "  LATE"
            print(f"  task {i}: {_option_name(opt):<12} delay {delay:8.3f} s (limit {deadline:g} s){mark}")
    elif res.delays_s is not None:
        for i, delay in enumerate(res.delays_s):
            deadline = instance.tasks[i].deadline_s
            mark = "" if delay <= deadline + 1e-6 else "  LATE"
            print(f"  task {i}: delay {delay:8.3f} s (limit {deadline:g} s){mark}")


def _cmd_solve(args: argparse.Namespace) -> int:
    try:
        instance = load_instance(args.instance)
    except (InstanceFormatError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    problems = validate(instance)
    if problems:
        for p in problems:
            print(f"error: {p}", file=sys.stderr)
        return EXIT_FAILURE
    try:
        params = _parse_params(args.param)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    ibba = IbbaParams(
        gap_tol=args.gap_tol,
        int_tol=args.int_tol,
        disable_pruning=args.no_prune,
        max_nodes=args.max_nodes,
    )
    trace = None
    if args.trace:
        def trace(event: dict) -> None:
            print(f"trace: {event}", file=sys.stderr)
    try:
        if args.policy == "ibba":
            from .bnb import ibba_solve

            raw = ibba_solve(instance, None, params, ibba, trace)
            if raw.decision is None:
                res = PolicyResult(
                    "ibba", raw.status, None, {}, None, None, None,
                    nodes=raw.stats.nodes_explored,
                )
            else:
                res = PolicyResult(
                    "ibba",
                    raw.status,
                    raw.decision,
                    raw.allocation,
                    raw.energy_j,
                    raw.delays_s,
                    sum(1 for o in raw.decision if not isinstance(o, Local)),
                    nodes=raw.stats.nodes_explored,
                )
        elif args.policy == "rop":
            res = rop_solve(instance, params)
        elif args.policy == "wop":
            res = wop_solve(instance)
        elif args.policy == "aop":
            res = aop_solve(instance, params, ibba)
        else:
            res = brute_force_solve(instance, params, cap=args.cap)
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    _print_result(instance, res, args.json)
    if res.status is Status.OPTIMAL:
        return EXIT_OK
    if res.status is Status.INFEASIBLE:
        return EXIT_INFEASIBLE
    return EXIT_FAILURE


def _cmd_scenario(args: argparse.Namespace, which: int) -> int:
    progress = None
    if args.progress:
        def progress(line: str) -> None:
            print(line, file=sys.stderr)
    try:
        if which == 1:
            rows = run_scenario1(seed=args.seed, progress=progress)
        else:
            rows = run_scenario2(seed=args.seed, progress=progress)
    except NoCandidate as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"scenario{which}.csv")
    write_rows(path, rows)
    print(path)
    bad = [r for r in rows if r.policy == "ibba" and r.status != Status.OPTIMAL.value]
    if bad:
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_oracle_check(args: argparse.Namespace) -> int:
    params = SolverParams()
    mismatches = 0
    for seed in range(1, args.seeds + 1):
        instance = random_small_instance(seed, args.n, args.m)
        exact = ibba_policy(instance, params)
        ref = brute_force_solve(instance, params)
        if exact.status != ref.status:
            verdict = f"STATUS MISMATCH ({exact.status.value} vs {ref.status.value})"
            mismatches += 1
        elif exact.energy_j is None and ref.energy_j is None:
            verdict = f"agree ({exact.status.value})"
        elif abs(exact.energy_j - ref.energy_j) <= args.tol:
            verdict = f"agree ({exact.energy_j:.6f} J)"
        else:
            verdict = (
                f"ENERGY MISMATCH ({exact.energy_j:.8f} vs {ref.energy_j:.8f} J)"
            )
            mismatches += 1
        print(f"seed {seed}: {verdict}")
    print(f"{args.seeds - mismatches}/{args.seeds} agree")
    return EXIT_OK if mismatches == 0 else EXIT_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="edgeoffload",
        description="Energy-optimal task offloading for cooperative edge networks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one instance from a JSON file")
    solve.add_argument("instance", help="path to the instance JSON")
    solve.add_argument(
        "--policy",
        choices=("ibba", "rop", "wop", "aop", "oracle"),
        default="ibba",
    )
    solve.add_argument("--json", action="store_true", help="machine-readable output")
    solve.add_argument("--trace", action="store_true", help="log search events to stderr")
    solve.add_argument(
        "--param",
        action="append",
        metavar="NAME=VALUE",
        help="override a solver parameter (repeatable)",
    )
    solve.add_argument("--gap-tol", type=float, default=1e-6)
    solve.add_argument("--int-tol", type=float, default=1e-6)
    solve.add_argument("--max-nodes", type=int, default=None)
    solve.add_argument("--no-prune", action="store_true")
    solve.add_argument("--cap", type=int, default=100_000, help="oracle enumeration cap")

    for which in (1, 2):
        sc = sub.add_parser(f"scenario{which}", help=f"run sweep {which} and write CSV")
        sc.add_argument("--seed", type=int, default=DEFAULT_SEED)
        sc.add_argument("--out", default=".", help="output directory")
        sc.add_argument("--progress", action="store_true", help="log progress to stderr")

    oc = sub.add_parser(
        "oracle-check", help="compare the search against exhaustive enumeration"
    )
    oc.add_argument("--seeds", type=int, default=20)
    oc.add_argument("--n", type=int, default=3, help="tasks per instance")
    oc.add_argument("--m", type=int, default=2, help="edge nodes per instance")
    oc.add_argument("--tol", type=float, default=1e-5)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "solve":
        return _cmd_solve(args)
    if args.command == "scenario1":
        return _cmd_scenario(args, 1)
    if args.command == "scenario2":
        return _cmd_scenario(args, 2)
    return _cmd_oracle_check(args)


if __name__ == "__main__":
    sys.exit(main())
