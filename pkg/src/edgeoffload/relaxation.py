"""Convex relaxation of the placement MINLP.

Binary one-hot placements x are relaxed to [0,1]; every rate-bearing delay
term x*D/r becomes its perspective x^2*D/r (jointly convex, equal at binary
x), while the local term x_l*T^l and the fixed cloud relay term x_c*k stay
linear.  Each offload option owns its rate variables (edge: up/down/cpu,
cloud-via: up/down), and per-node capacity rows couple them.  One option per
free task is eliminated through the simplex equality (x_elim = 1 - sum of the
rest), preferring Local, so the solver sees inequality rows only.

Internally: rates are normalized by their capacity and delay rows by the
task's deadline, keeping the Newton systems well scaled.  Reported objectives,
rates and delays are in canonical units.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Set, Tuple

import numpy as np

from . import barrier
from .barrier import DelayRow, LinRow, Program, QolTerm, SolverParams, Status
from .model import (
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
    option_index,
)


class InconsistentFixingError(ValueError):
    """Branching fixed a task in contradictory ways."""


_EDGE_RESOURCES = ("up", "down", "cpu")
_CLOUD_RESOURCES = ("up", "down")


def _resource_cap(instance: Instance, node: int, resource: str) -> float:
    n = instance.nodes[node]
    if resource == "up":
        return n.uplink_bps
    if resource == "down":
        return n.downlink_bps
    return n.cpu_rate


@dataclass
class RelaxedProblem:
    instance: Instance
    fixed: Dict[int, Option]  # tasks with a single allowed option
    allowed: Tuple[Tuple[Option, ...], ...]
    eliminated: Dict[int, Option]  # substituted option per free task
    decision_vars: List[Tuple[int, Option]]  # y catalog
    rate_vars: List[Tuple[int, Option, str]]
    objective_energy: Dict[Tuple[int, Option], float]  # per-option energies, >= 0
    var_of_decision: Dict[Tuple[int, Option], int]
    var_of_rate: Dict[Tuple[int, Option, str], int]
    program: Program
    n_simplex_rows: int
    n_delay_rows: int
    n_capacity_rows: int
    constant_delay_checks: List[Tuple[int, float, float]]  # (task, T^l, T^r)
    trivially_infeasible: Optional[str]
    infeasibility: float  # max solo violation backing the trivial certificate

    @property
    def n_decision_catalog(self) -> int:
        """Size of the full x catalog (fixed + free options)."""
        return sum(len(a) if len(a) > 1 else 1 for a in self.allowed)


def _allowed_options(
    instance: Instance,
    fixed: Mapping[int, Option],
    banned: Mapping[int, Set[Option]],
) -> List[List[Option]]:
    m = instance.n_nodes
    full = all_options(m)
    out: List[List[Option]] = []
    for i in range(instance.n_tasks):
        banned_i = banned.get(i, set())
        if i in fixed:
            opt = fixed[i]
            if opt not in full:
                raise InconsistentFixingError(f"task {i}: fixed to invalid option {opt!r}")
            if opt in banned_i:
                raise InconsistentFixingError(
                    f"task {i}: option {opt!r} is both fixed and banned"
                )
            out.append([opt])
            continue
        allowed = [o for o in full if o not in banned_i]
        if not allowed:
            raise InconsistentFixingError(f"task {i}: every option is banned")
        out.append(allowed)
    return out


def build_relaxed(
    instance: Instance,
    fixed: Optional[Mapping[int, Option]] = None,
    banned: Optional[Mapping[int, Set[Option]]] = None,
    params: Optional[SolverParams] = None,
) -> RelaxedProblem:
    """Assemble the relaxed program under branching fixings/bans."""
    params = params or SolverParams()
    fixed = dict(fixed or {})
    banned = {k: set(v) for k, v in (banned or {}).items()}
    allowed = _allowed_options(instance, fixed, banned)
    cloud = instance.cloud

    fixed_all: Dict[int, Option] = {}
    free_tasks: List[int] = []
    for i, opts in enumerate(allowed):
        if len(opts) == 1:
            fixed_all[i] = opts[0]
        else:
            free_tasks.append(i)

    decision_vars: List[Tuple[int, Option]] = []
    var_of_decision: Dict[Tuple[int, Option], int] = {}
    eliminated: Dict[int, Option] = {}
    for i in free_tasks:
        opts = allowed[i]
        elim = LOCAL if LOCAL in opts else opts[0]
        eliminated[i] = elim
        for o in opts:
            if o == elim:
                continue
            var_of_decision[(i, o)] = len(decision_vars)
            decision_vars.append((i, o))

    rate_vars: List[Tuple[int, Option, str]] = []
    var_of_rate: Dict[Tuple[int, Option, str], int] = {}
    n_y = len(decision_vars)
    for i in range(instance.n_tasks):
        for o in allowed[i]:
            if isinstance(o, Local):
                continue
            resources = _EDGE_RESOURCES if isinstance(o, Edge) else _CLOUD_RESOURCES
            for res in resources:
                var_of_rate[(i, o, res)] = n_y + len(rate_vars)
                rate_vars.append((i, o, res))

    n = n_y + len(rate_vars)
    c = np.zeros(n)
    c0 = 0.0
    objective_energy: Dict[Tuple[int, Option], float] = {}

    def energy_of(i: int, o: Option) -> float:
        task = instance.tasks[i]
        if isinstance(o, Local):
            return local_cost(task).energy_j
        return offload_energy(task)

    for i in range(instance.n_tasks):
        for o in allowed[i]:
            objective_energy[(i, o)] = energy_of(i, o)

    for i, o in fixed_all.items():
        c0 += objective_energy[(i, o)]
    for i in free_tasks:
        e_elim = objective_energy[(i, eliminated[i])]
        c0 += e_elim
        for o in allowed[i]:
            if o == eliminated[i]:
                continue
            c[var_of_decision[(i, o)]] += objective_energy[(i, o)] - e_elim

    # rows
    lin_rows: List[LinRow] = []
    delay_rows: List[DelayRow] = []
    constant_checks: List[Tuple[int, float, float]] = []
    infeasible_msgs: List[str] = []
    worst_violation = 0.0

    for i in free_tasks:
        idx = tuple(var_of_decision[(i, o)] for o in allowed[i] if o != eliminated[i])
        lin_rows.append(LinRow(rhs=1.0, idx=idx, coef=(1.0,) * len(idx), label=("simplex", i)))
    n_simplex = len(free_tasks)

    def option_qol_and_linear(i: int, o: Option, w_idx, w_coef, w_const):
        """Delay contribution of option o for task i, normalized by T_i^r."""
        task = instance.tasks[i]
        t_req = task.deadline_s
        terms: List[QolTerm] = []
        lin: List[Tuple[int, float]] = []
        const = 0.0
        if isinstance(o, Local):
            t_loc = local_cost(task).delay_s / t_req
            const += w_const * t_loc
            for vi, vc in zip(w_idx, w_coef):
                lin.append((vi, vc * t_loc))
            return terms, lin, const
        node = o.node
        pairs = [("up", task.input_bits)]
        if task.output_bits > 0:
            pairs.append(("down", task.output_bits))
        if isinstance(o, Edge):
            pairs.append(("cpu", task.cycles))
        for res, amount in pairs:
            cap = _resource_cap(instance, node, res)
            coef = amount / cap / t_req
            terms.append(
                QolTerm(
                    coef=coef,
                    rate=var_of_rate[(i, o, res)],
                    w_idx=w_idx,
                    w_coef=w_coef,
                    w_const=w_const,
                )
            )
        if isinstance(o, CloudVia):
            k_norm = cloud_relay_delay(task, cloud) / t_req
            const += w_const * k_norm
            for vi, vc in zip(w_idx, w_coef):
                lin.append((vi, vc * k_norm))
        return terms, lin, const

    for i in range(instance.n_tasks):
        task = instance.tasks[i]
        t_req = task.deadline_s
        if i in fixed_all:
            o = fixed_all[i]
            if isinstance(o, Local):
                t_loc = local_cost(task).delay_s
                constant_checks.append((i, t_loc, t_req))
                if t_loc > t_req:
                    infeasible_msgs.append(
                        f"task {i} fixed Local: local delay {t_loc:.6g}s exceeds deadline {t_req:.6g}s"
                    )
                    worst_violation = max(worst_violation, t_loc - t_req)
                continue
            # solo lower bound at full capacity: a cheap, sound presolve
            node = o.node
            solo = task.input_bits / instance.nodes[node].uplink_bps
            solo += task.output_bits / instance.nodes[node].downlink_bps
            if isinstance(o, Edge):
                solo += task.cycles / instance.nodes[node].cpu_rate
            else:
                solo += cloud_relay_delay(task, cloud)
            if solo > t_req:
                infeasible_msgs.append(
                    f"task {i} fixed {o!r}: minimum delay {solo:.6g}s exceeds deadline {t_req:.6g}s"
                )
                worst_violation = max(worst_violation, solo - t_req)
            terms, lin, const = option_qol_and_linear(i, o, (), (), 1.0)
            lin_idx = tuple(v for v, _ in lin)
            lin_coef = tuple(cv for _, cv in lin)
            delay_rows.append(
                DelayRow(
                    rhs=1.0,
                    lin_idx=lin_idx,
                    lin_coef=lin_coef,
                    lin_const=const,
                    terms=tuple(terms),
                    soft_scale=1.0 / t_req,
                    label=i,
                )
            )
            continue

        # free task: mix over its allowed options
        terms_all: List[QolTerm] = []
        lin_acc: Dict[int, float] = {}
        const_acc = 0.0
        own_y = tuple(var_of_decision[(i, o)] for o in allowed[i] if o != eliminated[i])
        for o in allowed[i]:
            if o == eliminated[i]:
                w_idx, w_coef, w_const = own_y, (-1.0,) * len(own_y), 1.0
            else:
                w_idx, w_coef, w_const = (var_of_decision[(i, o)],), (1.0,), 0.0
            terms, lin, const = option_qol_and_linear(i, o, w_idx, w_coef, w_const)
            terms_all.extend(terms)
            const_acc += const
            for vi, vc in lin:
                lin_acc[vi] = lin_acc.get(vi, 0.0) + vc
        delay_rows.append(
            DelayRow(
                rhs=1.0,
                lin_idx=tuple(lin_acc),
                lin_coef=tuple(lin_acc.values()),
                lin_const=const_acc,
                terms=tuple(terms_all),
                soft_scale=1.0 / t_req,
                label=i,
            )
        )

    # capacity rows
    cap_members: Dict[Tuple[int, str], List[int]] = {}
    for (i, o, res), v in var_of_rate.items():
        cap_members.setdefault((o.node, res), []).append(v)
    n_capacity = 0
    for (node, res) in sorted(cap_members, key=lambda k: (k[0], _EDGE_RESOURCES.index(k[1]))):
        members = sorted(cap_members[(node, res)])
        lin_rows.append(
            LinRow(
                rhs=1.0,
                idx=tuple(members),
                coef=(1.0,) * len(members),
                label=("cap", node, res),
            )
        )
        n_capacity += 1

    # bounds and start point
    bound_idx = []
    bound_lo = []
    z0 = np.zeros(n)
    for (i, o), v in var_of_decision.items():
        bound_idx.append(v)
        bound_lo.append(0.0)
        z0[v] = 1.0 / len(allowed[i])
    row_size = {key: len(v) for key, v in cap_members.items()}
    for (i, o, res), v in var_of_rate.items():
        bound_idx.append(v)
        bound_lo.append(params.rate_floor)
        z0[v] = 0.5 / row_size[(o.node, res)]

    order = np.argsort(bound_idx)
    program = Program(
        n=n,
        c=c,
        c0=c0,
        bound_idx=np.asarray(bound_idx, dtype=np.intp)[order],
        bound_lo=np.asarray(bound_lo, dtype=float)[order],
        lin_rows=lin_rows,
        delay_rows=delay_rows,
        z0=z0,
    )
    return RelaxedProblem(
        instance=instance,
        fixed=fixed_all,
        allowed=tuple(tuple(a) for a in allowed),
        eliminated=eliminated,
        decision_vars=decision_vars,
        rate_vars=rate_vars,
        objective_energy=objective_energy,
        var_of_decision=var_of_decision,
        var_of_rate=var_of_rate,
        program=program,
        n_simplex_rows=n_simplex,
        n_delay_rows=len(delay_rows),
        n_capacity_rows=n_capacity,
        constant_delay_checks=constant_checks,
        trivially_infeasible="; ".join(infeasible_msgs) if infeasible_msgs else None,
        infeasibility=worst_violation,
    )


@dataclass
class RelaxedSolution:
    status: Status
    objective: Optional[float]  # J
    x: Optional[np.ndarray]  # (N, 2M+1), canonical option order
    rates: Dict[Tuple[int, Option], Tuple[float, float, float]]  # denormalized
    delays: Optional[List[float]]  # perspective delays, seconds
    kkt_residual: float
    gap_bound: float  # J
    mu_final: float
    newton_iters: int
    infeasibility: Optional[float] = None  # seconds
    degraded: bool = False  # x is a coarse earlier stage; the gap bound still holds

    def lower_bound(self) -> float:
        """Certified lower bound on the relaxation optimum."""
        return self.objective - self.gap_bound


def _extract(problem: RelaxedProblem, z: np.ndarray) -> Tuple[np.ndarray, Dict, List[float]]:
    instance = problem.instance
    m = instance.n_nodes
    x = np.zeros((instance.n_tasks, 2 * m + 1))
    for i, o in problem.fixed.items():
        x[i, option_index(o, m)] = 1.0
    for i in range(instance.n_tasks):
        if i in problem.fixed:
            continue
        total = 0.0
        for o in problem.allowed[i]:
            if o == problem.eliminated[i]:
                continue
            val = float(z[problem.var_of_decision[(i, o)]])
            x[i, option_index(o, m)] = val
            total += val
        x[i, option_index(problem.eliminated[i], m)] = max(0.0, 1.0 - total)

    rates: Dict[Tuple[int, Option], Tuple[float, float, float]] = {}
    seen = set()
    for (i, o, _res) in problem.rate_vars:
        if (i, o) in seen:
            continue
        seen.add((i, o))
        up = z[problem.var_of_rate[(i, o, "up")]] * _resource_cap(instance, o.node, "up")
        down = z[problem.var_of_rate[(i, o, "down")]] * _resource_cap(
            instance, o.node, "down"
        )
        if isinstance(o, Edge):
            cpu = z[problem.var_of_rate[(i, o, "cpu")]] * _resource_cap(
                instance, o.node, "cpu"
            )
        else:
            cpu = 0.0
        rates[(i, o)] = (float(up), float(down), float(cpu))

    # perspective delays from the normalized rows
    kern = barrier._Kernel(problem.program)
    s = kern.slacks(z)
    delays = [0.0] * instance.n_tasks
    for i, t_loc, _t_req in problem.constant_delay_checks:
        delays[i] = t_loc
    if s is not None:
        sd = s[2]
        for k, row in enumerate(problem.program.delay_rows):
            i = row.label
            delays[i] = instance.tasks[i].deadline_s * (1.0 - float(sd[k]))
    return x, rates, delays


def solve_relaxed(
    problem: RelaxedProblem,
    params: Optional[SolverParams] = None,
    trace: Optional[barrier.TraceFn] = None,
) -> RelaxedSolution:
    """Solve the relaxation: Optimal with certified gap, Infeasible, or IterLimit."""
    params = params or SolverParams()
    if problem.trivially_infeasible is not None:
        return RelaxedSolution(
            status=Status.INFEASIBLE,
            objective=None,
            x=None,
            rates={},
            delays=None,
            kkt_residual=float("inf"),
            gap_bound=0.0,
            mu_final=0.0,
            newton_iters=0,
            infeasibility=problem.infeasibility,
        )
    res = barrier.minimize(problem.program, params, trace)
    if res.status is not Status.OPTIMAL:
        return RelaxedSolution(
            status=res.status,
            objective=None,
            x=None,
            rates={},
            delays=None,
            kkt_residual=res.kkt_residual,
            gap_bound=res.gap_bound,
            mu_final=res.mu_final,
            newton_iters=res.newton_iters,
            infeasibility=res.infeasibility,
        )
    x, rates, delays = _extract(problem, res.z)
    return RelaxedSolution(
        status=Status.OPTIMAL,
        objective=res.objective,
        x=x,
        rates=rates,
        delays=delays,
        kkt_residual=res.kkt_residual,
        gap_bound=res.gap_bound,
        mu_final=res.mu_final,
        newton_iters=res.newton_iters,
        degraded=res.degraded,
    )


@dataclass
class Phase1Result:
    feasible: Optional[bool]  # None when the solver could not certify either way
    z: Optional[np.ndarray]
    s_value: Optional[float]  # minimized max violation, seconds


def phase1_feasible(
    problem: RelaxedProblem,
    params: Optional[SolverParams] = None,
    z_start: Optional[np.ndarray] = None,
) -> Phase1Result:
    """Find a strictly interior point of the relaxation, or certify s* > 0."""
    params = params or SolverParams()
    if problem.trivially_infeasible is not None:
        return Phase1Result(False, None, problem.infeasibility)
    prog = problem.program
    if z_start is not None:
        prog = Program(
            n=prog.n,
            c=prog.c,
            c0=prog.c0,
            bound_idx=prog.bound_idx,
            bound_lo=prog.bound_lo,
            lin_rows=prog.lin_rows,
            delay_rows=prog.delay_rows,
            z0=np.asarray(z_start, dtype=float),
        )
    interior = barrier.find_interior(prog, params)
    if interior.status is Status.OPTIMAL:
        return Phase1Result(True, interior.z, interior.s_value)
    if interior.status is Status.INFEASIBLE:
        return Phase1Result(False, None, interior.s_value)
    return Phase1Result(None, None, interior.s_value)
