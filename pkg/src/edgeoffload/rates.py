"""Rate allocation for a fixed placement.

Once every task is committed to Local, an edge node, or the cloud via an edge
node, the remaining problem separates by node: choose uplink/downlink/CPU
shares for the tasks on each node so that every deadline is met.  Each node is
solved as a max-margin program (minimize the shared slack s with
``delay_i <= deadline_i + s``); the placement is feasible at a node iff the
optimum satisfies s* <= 0.  Energies do not depend on rates, so feasibility is
the only question the allocator answers, plus the rates themselves.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import barrier
from .barrier import DelayRow, LinRow, Program, QolTerm, SolverParams, Status
from .model import (
    Allocation,
    Decision,
    Edge,
    Instance,
    Local,
    RateTriple,
    cloud_relay_delay,
    local_cost,
    total_cost,
)

# an offloaded task is (task index, kind); kind fixes which resources it uses
EDGE_KIND = "edge"
CLOUD_KIND = "cloud"
NodeItems = Tuple[Tuple[int, str], ...]


def node_items(instance: Instance, decision: Decision) -> Dict[int, NodeItems]:
    """Group offloaded tasks by serving node, in task order."""
    per_node: Dict[int, List[Tuple[int, str]]] = {}
    for i, opt in enumerate(decision):
        if isinstance(opt, Local):
            continue
        kind = EDGE_KIND if isinstance(opt, Edge) else CLOUD_KIND
        per_node.setdefault(opt.node, []).append((i, kind))
    return {j: tuple(items) for j, items in per_node.items()}


def _node_program(
    instance: Instance, node: int, items: NodeItems, params: SolverParams
) -> Tuple[Program, Dict[Tuple[int, str], int]]:
    n_obj = instance.nodes[node]
    caps = {"up": n_obj.uplink_bps, "down": n_obj.downlink_bps, "cpu": n_obj.cpu_rate}
    var_of: Dict[Tuple[int, str], int] = {}
    members: Dict[str, List[int]] = {"up": [], "down": [], "cpu": []}
    for i, kind in items:
        resources = ("up", "down", "cpu") if kind == EDGE_KIND else ("up", "down")
        for res in resources:
            v = len(var_of)
            var_of[(i, res)] = v
            members[res].append(v)

    n = len(var_of)
    delay_rows = []
    for i, kind in items:
        task = instance.tasks[i]
        t_req = task.deadline_s
        terms = []
        pairs = [("up", task.input_bits)]
        if task.output_bits > 0:
            pairs.append(("down", task.output_bits))
        if kind == EDGE_KIND:
            pairs.append(("cpu", task.cycles))
        for res, amount in pairs:
            terms.append(
                QolTerm(
                    coef=amount / caps[res] / t_req,
                    rate=var_of[(i, res)],
                    w_const=1.0,
                )
            )
        const = 0.0
        if kind == CLOUD_KIND:
            const = cloud_relay_delay(task, instance.cloud) / t_req
        delay_rows.append(
            DelayRow(
                rhs=1.0,
                lin_idx=(),
                lin_coef=(),
                lin_const=const,
                terms=tuple(terms),
                soft_scale=1.0 / t_req,
                label=i,
            )
        )

    lin_rows = []
    z0 = np.zeros(n)
    for res in ("up", "down", "cpu"):
        vs = members[res]
        if not vs:
            continue
        lin_rows.append(
            LinRow(rhs=1.0, idx=tuple(vs), coef=(1.0,) * len(vs), label=("cap", node, res))
        )
        for v in vs:
            z0[v] = 0.5 / len(vs)

    prog = Program(
        n=n,
        c=np.zeros(n),
        c0=0.0,
        bound_idx=np.arange(n, dtype=np.intp),
        bound_lo=np.full(n, params.rate_floor),
        lin_rows=lin_rows,
        delay_rows=delay_rows,
        z0=z0,
    )
    return prog, var_of


def node_margin(
    instance: Instance,
    node: int,
    items: NodeItems,
    params: Optional[SolverParams] = None,
    sign_only: bool = False,
) -> Tuple[Optional[float], Dict[int, RateTriple], Status]:
    """Max-margin rates for one node's tasks.

    Returns (s*, rates, status): s* is the minimized worst slack in seconds
    (negative means every deadline is met with room to spare).  With
    ``sign_only`` the solve stops once the sign of s* is certified, so the
    value is only exact up to the certification gap.
    """
    params = params or SolverParams()
    if not items:
        return None, {}, Status.OPTIMAL
    prog, var_of = _node_program(instance, node, items, params)
    res = barrier.minimize_margin(prog, params, sign_only=sign_only)
    s_star = float(res.objective) if res.objective is not None else None
    if res.status is not Status.OPTIMAL:
        # the iterate is still a feasibility certificate if it is interior
        # for the unsoftened rows
        slacks = (
            barrier._Kernel(prog).slacks(res.z[: prog.n]) if res.z is not None else None
        )
        if slacks is None:
            return s_star, {}, res.status
        sd = slacks[2]
        s_star = max(
            -float(sd[k]) / row.soft_scale
            for k, row in enumerate(prog.delay_rows)
        )
    z = res.z
    n_obj = instance.nodes[node]
    rates: Dict[int, RateTriple] = {}
    for i, kind in items:
        up = float(z[var_of[(i, "up")]]) * n_obj.uplink_bps
        down = float(z[var_of[(i, "down")]]) * n_obj.downlink_bps
        cpu = (
            float(z[var_of[(i, "cpu")]]) * n_obj.cpu_rate if kind == EDGE_KIND else 0.0
        )
        rates[i] = RateTriple(up, down, cpu)
    return s_star, rates, Status.OPTIMAL


def node_min_violation(
    instance: Instance,
    node: int,
    items: NodeItems,
    params: Optional[SolverParams] = None,
) -> Tuple[float, Dict[int, RateTriple], Status]:
    """Rates minimizing the summed deadline violation on one node (seconds)."""
    params = params or SolverParams()
    if not items:
        return 0.0, {}, Status.OPTIMAL
    prog, var_of = _node_program(instance, node, items, params)
    res = barrier.minimize_total_violation(prog, params)
    if res.z is None:
        return float("inf"), {}, res.status
    z = res.z
    n_obj = instance.nodes[node]
    rates: Dict[int, RateTriple] = {}
    for i, kind in items:
        up = float(z[var_of[(i, "up")]]) * n_obj.uplink_bps
        down = float(z[var_of[(i, "down")]]) * n_obj.downlink_bps
        cpu = (
            float(z[var_of[(i, "cpu")]]) * n_obj.cpu_rate if kind == EDGE_KIND else 0.0
        )
        rates[i] = RateTriple(up, down, cpu)
    return float(res.objective), rates, res.status


@dataclass
class AllocationResult:
    feasible: Optional[bool]  # None: a node solve hit its iteration limit
    allocation: Allocation
    max_violation_s: Optional[float]  # worst s* across nodes; None if nothing offloaded
    status: Status


def allocate_rates(
    instance: Instance, decision: Decision, params: Optional[SolverParams] = None
) -> AllocationResult:
    """Find per-task rates meeting every offloaded deadline, or report failure.

    Local tasks are not examined here; decision-level checks (including local
    deadlines) live in ``check_decision``.
    """
    params = params or SolverParams()
    grouped = node_items(instance, decision)
    allocation: Allocation = {}
    worst: Optional[float] = None
    status = Status.OPTIMAL
    for j in sorted(grouped):
        s_star, rates, node_status = node_margin(
            instance, j, grouped[j], params, sign_only=True
        )
        if node_status is not Status.OPTIMAL:
            return AllocationResult(None, {}, s_star, node_status)
        allocation.update(rates)
        worst = s_star if worst is None else max(worst, s_star)
        if s_star > 0:
            status = Status.INFEASIBLE
    if status is Status.INFEASIBLE:
        return AllocationResult(False, allocation, worst, status)
    return AllocationResult(True, allocation, worst, Status.OPTIMAL)


def placement_feasible(
    instance: Instance, decision: Decision, params: Optional[SolverParams] = None
) -> Tuple[Optional[bool], Allocation, Optional[float]]:
    """Exact decision-level feasibility: local deadlines plus rate allocation.

    Returns (verdict, allocation, worst slack in seconds).  The verdict is
    None when a node solve could not certify either way.
    """
    for i, opt in enumerate(decision):
        if not isinstance(opt, Local):
            continue
        task = instance.tasks[i]
        t_loc = local_cost(task).delay_s
        if t_loc > task.deadline_s:
            return False, {}, t_loc - task.deadline_s
    result = allocate_rates(instance, decision, params)
    return result.feasible, result.allocation, result.max_violation_s


@dataclass
class DecisionReport:
    ok: bool
    violations: List[str]
    energy_j: Optional[float]
    delays_s: Optional[List[float]]


def check_decision(
    instance: Instance,
    decision: Decision,
    allocation: Optional[Allocation] = None,
    params: Optional[SolverParams] = None,
    tol: float = 1e-6,
) -> DecisionReport:
    """Full feasibility audit of a placement (with rates found if not given)."""
    violations: List[str] = []
    for i, opt in enumerate(decision):
        if isinstance(opt, Local):
            t_loc = local_cost(instance.tasks[i]).delay_s
            t_req = instance.tasks[i].deadline_s
            if t_loc > t_req + tol:
                violations.append(
                    f"task {i}: local delay {t_loc:.6g}s exceeds deadline {t_req:.6g}s"
                )
    if allocation is None:
        result = allocate_rates(instance, decision, params)
        if result.feasible is None:
            violations.append("rate allocation hit the iteration limit")
            return DecisionReport(False, violations, None, None)
        if not result.feasible:
            violations.append(
                f"no rate allocation meets every deadline (worst slack "
                f"{result.max_violation_s:.6g}s)"
            )
            return DecisionReport(False, violations, None, None)
        allocation = result.allocation

    cost = total_cost(instance, decision, allocation)
    for i, d in enumerate(cost.delays_s):
        t_req = instance.tasks[i].deadline_s
        if d > t_req + tol:
            violations.append(
                f"task {i}: delay {d:.6g}s exceeds deadline {t_req:.6g}s"
            )
    # capacity audit
    used: Dict[Tuple[int, str], float] = {}
    for i, opt in enumerate(decision):
        if isinstance(opt, Local):
            continue
        r = allocation.get(i)
        if r is None:
            violations.append(f"task {i}: offloaded but no rates allocated")
            continue
        used[(opt.node, "up")] = used.get((opt.node, "up"), 0.0) + r.up_bps
        used[(opt.node, "down")] = used.get((opt.node, "down"), 0.0) + r.down_bps
        if isinstance(opt, Edge):
            used[(opt.node, "cpu")] = used.get((opt.node, "cpu"), 0.0) + r.cpu_rate
    for (j, res), amount in sorted(used.items()):
        node = instance.nodes[j]
        cap = {"up": node.uplink_bps, "down": node.downlink_bps, "cpu": node.cpu_rate}[res]
        if amount > cap * (1.0 + tol):
            violations.append(
                f"node {j}: {res} usage {amount:.6g} exceeds capacity {cap:.6g}"
            )
    return DecisionReport(not violations, violations, cost.energy_j, list(cost.delays_s))
