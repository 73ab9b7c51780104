"""Branch and bound over task placements with convex-relaxation bounds.

Depth-first search on an explicit stack.  Each node fixes a prefix of the
placement; its children fix one more task, generated in the canonical option
order (Local first, then each edge node, then the cloud routes) and pushed in
reverse so Local is explored first.  A node is bounded by the certified lower
bound of its relaxation and pruned when that bound cannot improve on the
incumbent by more than ``gap_tol``.  Bounds are checked twice: when the node
is popped (using the parent's bound and a delay-free energy floor, before any
solve) and again after its own relaxation is solved.

An integral relaxation optimum is promoted to a candidate placement; its
feasibility is re-established at the decision level (exact local-deadline
checks plus a max-margin rate allocation) before it can become the incumbent.
Fully fixed nodes skip the relaxation and are evaluated directly the same way.
A relaxation that hits its iteration limit yields no bound, so the node is
branched rather than pruned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Set

import numpy as np

from .barrier import SolverParams, Status
from .model import (
    Allocation,
    Decision,
    Instance,
    Local,
    Option,
    RateTriple,
    all_options,
    local_cost,
    offload_energy,
    option_index,
    total_cost,
)
from .rates import placement_feasible
from .relaxation import build_relaxed, solve_relaxed


@dataclass
class IbbaParams:
    int_tol: float = 1e-6  # distance from {0,1} treated as integral
    gap_tol: float = 1e-6  # absolute suboptimality allowed when pruning, J
    disable_pruning: bool = False
    max_nodes: Optional[int] = None
    # node relaxations only feed bounds, which stay valid at any gap, so they
    # are solved looser than the exported relaxation defaults
    bound_newton_tol: float = 1e-6
    bound_tol_factor: float = 1e-6
    # re-solve factor used when only the bound's own gap blocks pruning or
    # closing a node; keeps that gap below gap_tol for objectives up to ~100 J
    close_tol_factor: float = 5e-9


@dataclass
class BnbNode:
    fixed: Dict[int, Option]
    parent_bound: float  # best certified lower bound inherited from the parent


@dataclass
class IbbaStats:
    nodes_explored: int = 0
    nodes_pruned_bound: int = 0
    nodes_pruned_infeasible: int = 0
    nodes_branched: int = 0
    leaves_evaluated: int = 0
    relaxations_solved: int = 0
    newton_iters: int = 0


@dataclass
class IbbaResult:
    status: Status
    decision: Optional[Decision]
    allocation: Allocation
    energy_j: Optional[float]
    delays_s: Optional[List[float]]
    stats: IbbaStats


TraceFn = Callable[[dict], None]


def _option_energy(task, opt: Option) -> float:
    if isinstance(opt, Local):
        return local_cost(task).energy_j
    return offload_energy(task)


def _decision_energy(instance: Instance, decision: Decision) -> float:
    return sum(
        _option_energy(instance.tasks[i], opt) for i, opt in enumerate(decision)
    )


def _cheapest_energies(
    instance: Instance, banned: Dict[int, Set[Option]]
) -> List[float]:
    """Per-task minimum option energy, ignoring every delay constraint."""
    opts = all_options(instance.n_nodes)
    mins = []
    for i, task in enumerate(instance.tasks):
        blocked = banned.get(i, set())
        vals = [_option_energy(task, o) for o in opts if o not in blocked]
        mins.append(min(vals) if vals else math.inf)
    return mins


def _integral_decision(
    x: np.ndarray, allowed, int_tol: float
) -> Optional[List[Option]]:
    """Map a relaxation point to options when every entry is near-binary."""
    if np.abs(x - np.round(x)).max() > int_tol:
        return None
    decision: List[Option] = []
    m = (x.shape[1] - 1) // 2
    for i, opts in enumerate(allowed):
        chosen = None
        for o in opts:
            if x[i, option_index(o, m)] > 0.5:
                chosen = o
                break
        if chosen is None:
            return None
        decision.append(chosen)
    return decision


def ibba_solve(
    instance: Instance,
    banned: Optional[Dict[int, Set[Option]]] = None,
    params: Optional[SolverParams] = None,
    ibba: Optional[IbbaParams] = None,
    trace: Optional[TraceFn] = None,
) -> IbbaResult:
    """Minimize total device energy over placements meeting every deadline."""
    params = params or SolverParams()
    ibba = ibba or IbbaParams()
    banned = banned or {}
    relax_params = replace(
        params,
        newton_tol=ibba.bound_newton_tol,
        outer_tol_factor=ibba.bound_tol_factor,
    )
    close_params = replace(relax_params, outer_tol_factor=ibba.close_tol_factor)
    n_tasks = instance.n_tasks
    stats = IbbaStats()

    incumbent: Optional[Decision] = None
    incumbent_alloc: Allocation = {}
    incumbent_energy = math.inf
    ambiguous_energy = math.inf  # cheapest leaf whose feasibility stayed open
    hit_node_cap = False

    def evaluate_candidate(
        decision: Decision, fallback_rates: Optional[Allocation] = None
    ) -> Optional[bool]:
        """Check a complete placement, updating the incumbent when it wins."""
        nonlocal incumbent, incumbent_alloc, incumbent_energy, ambiguous_energy
        energy = _decision_energy(instance, decision)
        verdict, alloc, _ = placement_feasible(instance, decision, params)
        if verdict is None and fallback_rates is not None:
            verdict, alloc = True, fallback_rates
        if verdict is None:
            ambiguous_energy = min(ambiguous_energy, energy)
        elif verdict and energy < incumbent_energy:
            incumbent = decision
            incumbent_alloc = alloc
            incumbent_energy = energy
        return verdict

    min_energy = _cheapest_energies(instance, banned)

    stack: List[BnbNode] = [BnbNode(fixed={}, parent_bound=-math.inf)]
    while stack:
        if ibba.max_nodes is not None and stats.nodes_explored >= ibba.max_nodes:
            hit_node_cap = True
            break
        node = stack.pop()
        stats.nodes_explored += 1
        # energies do not depend on which node serves an offload, so summing
        # each task's cheapest option bounds the subtree for free; it prunes
        # the forests of equal-energy node assignments without a solve
        floor = sum(
            _option_energy(instance.tasks[i], node.fixed[i])
            if i in node.fixed
            else min_energy[i]
            for i in range(n_tasks)
        )
        bound = max(node.parent_bound, floor)
        if not ibba.disable_pruning and bound >= incumbent_energy - ibba.gap_tol:
            stats.nodes_pruned_bound += 1
            continue

        if len(node.fixed) == n_tasks:
            stats.leaves_evaluated += 1
            decision = tuple(node.fixed[i] for i in range(n_tasks))
            if trace is not None:
                trace({"event": "leaf", "decision": decision})
            if _decision_energy(instance, decision) < incumbent_energy:
                evaluate_candidate(decision)
            continue

        problem = build_relaxed(instance, node.fixed, banned, relax_params)
        relaxed = solve_relaxed(problem, relax_params)
        stats.relaxations_solved += 1
        stats.newton_iters += relaxed.newton_iters
        if trace is not None:
            trace(
                {
                    "event": "node",
                    "depth": len(node.fixed),
                    "status": relaxed.status.value,
                    "objective": relaxed.objective,
                    "incumbent": None if incumbent_energy == math.inf else incumbent_energy,
                }
            )

        if relaxed.status is Status.INFEASIBLE:
            stats.nodes_pruned_infeasible += 1
            continue

        if relaxed.status is Status.OPTIMAL:
            bound = max(bound, relaxed.lower_bound())
            tightened = False
            threshold = incumbent_energy - ibba.gap_tol
            if not ibba.disable_pruning and bound < threshold <= relaxed.objective:
                # only the bound's own gap prevents pruning; tighten it
                resolved = solve_relaxed(problem, close_params)
                stats.relaxations_solved += 1
                stats.newton_iters += resolved.newton_iters
                tightened = True
                if resolved.status is Status.OPTIMAL:
                    bound = max(bound, resolved.lower_bound())
                    if not resolved.degraded:
                        # a degraded re-solve returns a coarser (less
                        # integral) stage that must not replace the point
                        relaxed = resolved
            if not ibba.disable_pruning and bound >= threshold:
                stats.nodes_pruned_bound += 1
                continue
            decision = None
            if not relaxed.degraded:
                decision = _integral_decision(relaxed.x, problem.allowed, ibba.int_tol)
            if decision is not None:
                candidate = tuple(decision)
                energy = _decision_energy(instance, candidate)
                solves_node = energy <= bound + ibba.gap_tol
                if (
                    not solves_node
                    and not tightened
                    and energy <= relaxed.objective + ibba.gap_tol
                ):
                    # the candidate ties the relaxation value, so only the
                    # bound's gap keeps the node open; tighten it
                    resolved = solve_relaxed(problem, close_params)
                    stats.relaxations_solved += 1
                    stats.newton_iters += resolved.newton_iters
                    if resolved.status is Status.OPTIMAL:
                        bound = max(bound, resolved.lower_bound())
                        solves_node = energy <= bound + ibba.gap_tol
                if energy < incumbent_energy or solves_node:
                    fallback = _relaxation_rates(instance, candidate, relaxed)
                    verdict = evaluate_candidate(candidate, fallback)
                    if verdict is True and solves_node:
                        # nothing below this node beats the candidate by more
                        # than gap_tol
                        continue
                # otherwise keep branching: the candidate was rejected or the
                # relaxation point was not tight enough to close the node

        # branch on the most fractional unfixed task (first unfixed when the
        # relaxation gave no trustworthy point: a degraded solve's x sits on
        # a coarse earlier stage and steers the search badly)
        free = [i for i in range(n_tasks) if i not in node.fixed]
        k = free[0]
        if relaxed.x is not None and not relaxed.degraded:
            frac = [(1.0 - float(relaxed.x[i].max()), i) for i in free]
            frac.sort(key=lambda t: (-t[0], t[1]))
            k = frac[0][1]
        stats.nodes_branched += 1
        children = []
        for o in problem.allowed[k]:
            child_fixed = dict(node.fixed)
            child_fixed[k] = o
            children.append(BnbNode(fixed=child_fixed, parent_bound=bound))
        for child in reversed(children):
            stack.append(child)

    if incumbent is not None:
        status = Status.OPTIMAL
        if hit_node_cap or ambiguous_energy < incumbent_energy - ibba.gap_tol:
            status = Status.ITER_LIMIT
        delays = list(total_cost(instance, incumbent, incumbent_alloc).delays_s)
        return IbbaResult(status, incumbent, incumbent_alloc, incumbent_energy, delays, stats)
    status = Status.INFEASIBLE
    if hit_node_cap or ambiguous_energy < math.inf:
        status = Status.ITER_LIMIT
    return IbbaResult(status, None, {}, None, None, stats)


def _relaxation_rates(
    instance: Instance, decision: List[Option], relaxed
) -> Optional[Allocation]:
    """Rates the relaxation itself assigned to the chosen options."""
    alloc: Allocation = {}
    for i, opt in enumerate(decision):
        if isinstance(opt, Local):
            continue
        triple = relaxed.rates.get((i, opt))
        if triple is None:
            return None
        alloc[i] = RateTriple(*triple)
    return alloc
