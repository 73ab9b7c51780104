"""Placement policies and the exhaustive reference solver.

* ``wop_solve``: run everything on the device (no offloading); never
  rejects an instance, it simply reports the delays it gets.
* ``aop_solve``: offload everything; optimal assignment via branch and
  bound with Local banned, with a greedy load-balancing fallback when no
  all-offload placement can meet the deadlines.
* ``rop_solve``: the convex relaxation itself, reported as a policy
  (fractional placements, perspective delays).
* ``brute_force_solve``: enumerate every placement in lexicographic order
  (Local before edge nodes before cloud routes) and keep the first one
  attaining the minimum energy.  The reference answer for everything else.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from .barrier import SolverParams, Status
from .bnb import IbbaParams, ibba_solve
from .model import (
    Allocation,
    CloudVia,
    Decision,
    Edge,
    Instance,
    Local,
    LOCAL,
    Option,
    all_options,
    cloud_relay_delay,
    local_cost,
    offload_energy,
    total_cost,
)
from .rates import (
    NodeItems,
    node_items,
    node_margin,
    node_min_violation,
)
from .relaxation import build_relaxed, solve_relaxed


class CapExceededError(ValueError):
    """The exhaustive search space is larger than the configured cap."""


@dataclass
class PolicyResult:
    policy: str
    status: Status
    decision: Optional[Decision]  # None for fractional (relaxation) results
    allocation: Allocation
    energy_j: Optional[float]
    delays_s: Optional[List[float]]
    offloaded: Optional[int]
    nodes: int = 0  # search nodes expanded / placements enumerated


def _count_offloaded(decision: Decision) -> int:
    return sum(1 for o in decision if not isinstance(o, Local))


def wop_solve(instance: Instance) -> PolicyResult:
    """Everything local.  Deadline violations show up in the delays."""
    decision = tuple(LOCAL for _ in instance.tasks)
    energy = 0.0
    delays = []
    for task in instance.tasks:
        cost = local_cost(task)
        energy += cost.energy_j
        delays.append(cost.delay_s)
    return PolicyResult(
        policy="wop",
        status=Status.OPTIMAL,
        decision=decision,
        allocation={},
        energy_j=energy,
        delays_s=delays,
        offloaded=0,
    )


def _fallback_all_offload(
    instance: Instance, params: SolverParams
) -> Tuple[Decision, Allocation, List[float]]:
    """Greedy all-offload placement when no assignment meets every deadline.

    Tasks are spread over nodes to balance uplink load (largest inputs first);
    each picks edge or cloud service by smaller unloaded delay.  Rates then
    minimize each node's total violation.
    """
    n_nodes = instance.n_nodes
    load = [0.0] * n_nodes
    choice: Dict[int, Option] = {}
    order = sorted(
        range(instance.n_tasks), key=lambda i: (-instance.tasks[i].input_bits, i)
    )
    for i in order:
        task = instance.tasks[i]
        j = min(
            range(n_nodes),
            key=lambda jj: (load[jj] + task.input_bits / instance.nodes[jj].uplink_bps, jj),
        )
        load[j] += task.input_bits / instance.nodes[j].uplink_bps
        edge_solo = task.cycles / instance.nodes[j].cpu_rate
        cloud_solo = task.cycles / instance.cloud.cpu_rate + cloud_relay_delay(
            task, instance.cloud
        )
        choice[i] = Edge(j) if edge_solo <= cloud_solo else CloudVia(j)
    decision = tuple(choice[i] for i in range(instance.n_tasks))
    allocation: Allocation = {}
    for j, items in sorted(node_items(instance, decision).items()):
        _, rates, _ = node_min_violation(instance, j, items, params)
        allocation.update(rates)
    delays = list(total_cost(instance, decision, allocation).delays_s)
    return decision, allocation, delays


def aop_solve(
    instance: Instance,
    params: Optional[SolverParams] = None,
    ibba: Optional[IbbaParams] = None,
) -> PolicyResult:
    """Offload every task; energy is the same for any all-offload placement."""
    params = params or SolverParams()
    banned = {i: {LOCAL} for i in range(instance.n_tasks)}
    result = ibba_solve(instance, banned, params, ibba)
    if result.decision is not None:
        return PolicyResult(
            policy="aop",
            status=result.status,
            decision=result.decision,
            allocation=result.allocation,
            energy_j=result.energy_j,
            delays_s=result.delays_s,
            offloaded=instance.n_tasks,
            nodes=result.stats.nodes_explored,
        )
    decision, allocation, delays = _fallback_all_offload(instance, params)
    energy = sum(offload_energy(t) for t in instance.tasks)
    return PolicyResult(
        policy="aop",
        status=Status.INFEASIBLE,
        decision=decision,
        allocation=allocation,
        energy_j=energy,
        delays_s=delays,
        offloaded=instance.n_tasks,
        nodes=result.stats.nodes_explored,
    )


def rop_solve(
    instance: Instance, params: Optional[SolverParams] = None
) -> PolicyResult:
    """Relaxed placement: fractional x, perspective delays, a lower bound."""
    params = params or SolverParams()
    problem = build_relaxed(instance, params=params)
    solution = solve_relaxed(problem, params)
    if solution.status is not Status.OPTIMAL:
        return PolicyResult(
            policy="rop",
            status=solution.status,
            decision=None,
            allocation={},
            energy_j=None,
            delays_s=None,
            offloaded=None,
            nodes=1,
        )
    local_col = 0  # canonical option order puts Local first
    offloaded = int((solution.x[:, local_col] < 0.5).sum())
    return PolicyResult(
        policy="rop",
        status=Status.OPTIMAL,
        decision=None,
        allocation={},
        # certified bound (objective - gap) so rop <= any binary optimum
        # holds regardless of how tight the relaxation happens to be
        energy_j=solution.lower_bound(),
        delays_s=list(solution.delays),
        offloaded=offloaded,
        nodes=1,
    )


def ibba_policy(
    instance: Instance,
    params: Optional[SolverParams] = None,
    ibba: Optional[IbbaParams] = None,
) -> PolicyResult:
    result = ibba_solve(instance, None, params or SolverParams(), ibba)
    if result.decision is None:
        return PolicyResult(
            policy="ibba",
            status=result.status,
            decision=None,
            allocation={},
            energy_j=None,
            delays_s=None,
            offloaded=None,
            nodes=result.stats.nodes_explored,
        )
    return PolicyResult(
        policy="ibba",
        status=result.status,
        decision=result.decision,
        allocation=result.allocation,
        energy_j=result.energy_j,
        delays_s=result.delays_s,
        offloaded=_count_offloaded(result.decision),
        nodes=result.stats.nodes_explored,
    )


def _feasible_memo(
    instance: Instance,
    decision: Decision,
    memo: Dict[Tuple[int, NodeItems], Tuple[Optional[bool], Dict]],
    params: SolverParams,
) -> Tuple[Optional[bool], Allocation]:
    """Decision feasibility with per-node memoization of the margin solves."""
    for i, opt in enumerate(decision):
        if isinstance(opt, Local):
            task = instance.tasks[i]
            if local_cost(task).delay_s > task.deadline_s:
                return False, {}
    allocation: Allocation = {}
    for j, items in sorted(node_items(instance, decision).items()):
        key = (j, items)
        if key not in memo:
            s_star, rates, status = node_margin(
                instance, j, items, params, sign_only=True
            )
            if status is not Status.OPTIMAL:
                memo[key] = (None, {})
            else:
                memo[key] = (s_star <= 0, rates)
        ok, rates = memo[key]
        if ok is not True:
            return ok, {}
        allocation.update(rates)
    return True, allocation


def brute_force_solve(
    instance: Instance,
    params: Optional[SolverParams] = None,
    cap: int = 100_000,
) -> PolicyResult:
    """Exhaustive reference search over all (2M+1)^N placements.

    Placements are enumerated lexicographically and the first one attaining
    the minimum energy wins ties.  Rate solves are skipped when a placement's
    energy cannot beat the best found (energies do not depend on rates), and
    per-node feasibility is memoized across placements.
    """
    params = params or SolverParams()
    options = all_options(instance.n_nodes)
    space = len(options) ** instance.n_tasks
    if space > cap:
        raise CapExceededError(
            f"{space} placements exceed the cap of {cap}; raise `cap` to force it"
        )
    energies = []
    for task in instance.tasks:
        local = local_cost(task).energy_j
        off = offload_energy(task)
        energies.append([local if isinstance(o, Local) else off for o in options])

    best: Optional[Decision] = None
    best_alloc: Allocation = {}
    best_energy = math.inf
    ambiguous_energy = math.inf
    memo: Dict[Tuple[int, NodeItems], Tuple[Optional[bool], Dict]] = {}
    checked = 0
    for combo in itertools.product(range(len(options)), repeat=instance.n_tasks):
        checked += 1
        energy = sum(energies[i][o] for i, o in enumerate(combo))
        if energy >= best_energy:
            continue
        decision = tuple(options[o] for o in combo)
        ok, alloc = _feasible_memo(instance, decision, memo, params)
        if ok is None:
            ambiguous_energy = min(ambiguous_energy, energy)
            continue
        if ok:
            best = decision
            best_alloc = alloc
            best_energy = energy

    if best is None:
        status = Status.ITER_LIMIT if ambiguous_energy < math.inf else Status.INFEASIBLE
        return PolicyResult(
            policy="oracle",
            status=status,
            decision=None,
            allocation={},
            energy_j=None,
            delays_s=None,
            offloaded=None,
            nodes=checked,
        )
    status = Status.OPTIMAL
    if ambiguous_energy < best_energy:
        status = Status.ITER_LIMIT
    delays = list(total_cost(instance, best, best_alloc).delays_s)
    return PolicyResult(
        policy="oracle",
        status=status,
        decision=best,
        allocation=best_alloc,
        energy_j=best_energy,
        delays_s=delays,
        offloaded=_count_offloaded(best),
        nodes=checked,
    )
