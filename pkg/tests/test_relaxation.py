"""Relaxation structure, exactness at binary points, and the bound property.

The cvxpy model in `_cvxpy_value` is written from the mathematical program
(one-hot placement relaxed to a simplex, quadratic-over-linear delay terms,
per-node capacities), not from the implementation, so the two routes are
independent.
"""

import math

import numpy as np
import pytest

from conftest import make_instance
from edgeoffload.barrier import SolverParams, Status
from edgeoffload.harness import random_small_instance, scenario1_instances
from edgeoffload.model import (
    CloudVia,
    Edge,
    LOCAL,
    all_options,
    cloud_relay_delay,
    local_cost,
    offload_energy,
    option_index,
    total_cost,
)
from edgeoffload.policies import brute_force_solve
from edgeoffload.relaxation import (
    InconsistentFixingError,
    build_relaxed,
    solve_relaxed,
)


def test_structure_counts_ten_by_four():
    inst = scenario1_instances(seed=3)[0][1]
    assert inst.n_tasks == 10 and inst.n_nodes == 4
    p = build_relaxed(inst)
    # 2M+1 = 9 options per task; one per task eliminated by the simplex row
    assert p.n_decision_catalog == 90
    assert len(p.decision_vars) == 80
    # per offload option: up+down (+cpu on edge) => (3+2)*M per task
    assert len(p.rate_vars) == 200
    assert p.n_simplex_rows == 10
    assert p.n_delay_rows == 10
    assert p.n_capacity_rows == 12  # 4 nodes x (up, down, cpu)
    assert p.program.n == 280
    assert len(p.program.lin_rows) == p.n_simplex_rows + p.n_capacity_rows
    # every variable has a lower bound row
    assert len(p.program.bound_idx) == p.program.n


def test_every_variable_constrained():
    p = build_relaxed(random_small_instance(5, 3, 2))
    used = set(int(i) for i in p.program.bound_idx)
    for row in p.program.lin_rows:
        used.update(row.idx)
    for row in p.program.delay_rows:
        used.update(row.lin_idx)
        for t in row.terms:
            used.add(t.rate)
            used.update(t.w_idx)
    assert used == set(range(p.program.n))


def test_all_fixed_binary_matches_decision_energy():
    inst = make_instance(
        task_specs=(
            (15.0, 1.5, 900.0, 40.0),
            (10.0, 1.0, 400.0, 40.0),
            (12.0, 1.2, 1100.0, 40.0),
        ),
        n_nodes=2,
    )
    fixed = {0: Edge(0), 1: LOCAL, 2: CloudVia(1)}
    sol = solve_relaxed(build_relaxed(inst, fixed=fixed))
    assert sol.status is Status.OPTIMAL
    expected = (
        offload_energy(inst.tasks[0])
        + local_cost(inst.tasks[1]).energy_j
        + offload_energy(inst.tasks[2])
    )
    assert sol.objective == pytest.approx(expected, abs=1e-5)
    # x is the indicator of the fixed decision
    m = inst.n_nodes
    for i, opt in fixed.items():
        assert sol.x[i, option_index(opt, m)] == pytest.approx(1.0, abs=1e-6)
    # perspective delays at a binary point are the true delays
    assert all(
        d <= inst.tasks[i].deadline_s + 1e-6 for i, d in enumerate(sol.delays)
    )


def test_all_local_objective():
    inst = make_instance(
        task_specs=((15.0, 1.5, 400.0, 40.0), (10.0, 1.0, 300.0, 40.0)),
    )
    fixed = {i: LOCAL for i in range(inst.n_tasks)}
    sol = solve_relaxed(build_relaxed(inst, fixed=fixed))
    expected = sum(local_cost(t).energy_j for t in inst.tasks)
    assert sol.status is Status.OPTIMAL
    assert sol.objective == pytest.approx(expected, abs=1e-6)


def test_fixed_local_deadline_violation_is_infeasible():
    # 900 c/B * 15 MB at 0.5 Gc/s runs 27 s > 20 s
    inst = make_instance(task_specs=((15.0, 1.5, 900.0, 20.0),))
    p = build_relaxed(inst, fixed={0: LOCAL})
    assert p.trivially_infeasible is not None
    sol = solve_relaxed(p)
    assert sol.status is Status.INFEASIBLE
    assert sol.infeasibility > 0


def test_banned_options_dropped():
    inst = make_instance(task_specs=((15.0, 1.5, 900.0, 40.0),), n_nodes=2)
    banned = {0: {LOCAL, Edge(1)}}
    p = build_relaxed(inst, banned=banned)
    assert LOCAL not in p.allowed[0] and Edge(1) not in p.allowed[0]
    sol = solve_relaxed(p)
    assert sol.status is Status.OPTIMAL
    assert sol.x[0, 0] == pytest.approx(0.0, abs=1e-9)


def test_inconsistent_fixing_rejected():
    inst = make_instance(task_specs=((15.0, 1.5, 900.0, 40.0),), n_nodes=2)
    with pytest.raises(InconsistentFixingError):
        build_relaxed(inst, fixed={0: Edge(0)}, banned={0: {Edge(0)}})
    with pytest.raises(InconsistentFixingError):
        build_relaxed(inst, banned={0: set(all_options(2))})
    with pytest.raises(InconsistentFixingError):
        build_relaxed(inst, fixed={0: Edge(7)})


def test_lower_bound_property_vs_oracle():
    params = SolverParams()
    for seed in range(60, 72):
        inst = random_small_instance(seed, 3, 2)
        sol = solve_relaxed(build_relaxed(inst), params)
        ref = brute_force_solve(inst, params)
        if ref.status is Status.OPTIMAL:
            assert sol.status is Status.OPTIMAL
            assert sol.lower_bound() <= ref.energy_j + 1e-8
        if sol.status is Status.INFEASIBLE:
            # relaxed infeasibility certifies binary infeasibility
            assert ref.status is Status.INFEASIBLE


def test_binary_feasible_point_maps_into_relaxation():
    # walk a feasible decision's energy through the relaxation: fixing the
    # whole decision can only tighten, so the relaxed optimum is in between
    inst = random_small_instance(61, 3, 2)
    ref = brute_force_solve(inst)
    assert ref.status is Status.OPTIMAL
    free = solve_relaxed(build_relaxed(inst))
    fixed = solve_relaxed(
        build_relaxed(inst, fixed={i: o for i, o in enumerate(ref.decision)})
    )
    assert free.status is Status.OPTIMAL and fixed.status is Status.OPTIMAL
    assert free.lower_bound() <= fixed.objective + 1e-8
    assert fixed.objective == pytest.approx(ref.energy_j, abs=1e-5)


def _cvxpy_value(instance, rate_floor=1e-9):
    # rates are modelled as capacity fractions to keep the data well scaled
    cp = pytest.importorskip("cvxpy")
    n, m = instance.n_tasks, instance.n_nodes
    opts = all_options(m)
    x = cp.Variable((n, 2 * m + 1), nonneg=True)
    cons = [cp.sum(x, axis=1) == 1]
    cap_use = {}
    for i, task in enumerate(instance.tasks):
        terms = [x[i, 0] * local_cost(task).delay_s]
        for k, o in enumerate(opts):
            if k == 0:
                continue
            node = instance.nodes[o.node]
            ru = cp.Variable(nonneg=True)
            rd = cp.Variable(nonneg=True)
            cons += [ru >= rate_floor, rd >= rate_floor]
            cap_use.setdefault((o.node, "up"), []).append(ru)
            cap_use.setdefault((o.node, "down"), []).append(rd)
            terms.append(
                (task.input_bits / node.uplink_bps) * cp.quad_over_lin(x[i, k], ru)
            )
            terms.append(
                (task.output_bits / node.downlink_bps) * cp.quad_over_lin(x[i, k], rd)
            )
            if isinstance(o, Edge):
                rc = cp.Variable(nonneg=True)
                cons += [rc >= rate_floor]
                cap_use.setdefault((o.node, "cpu"), []).append(rc)
                terms.append(
                    (task.cycles / node.cpu_rate) * cp.quad_over_lin(x[i, k], rc)
                )
            else:
                terms.append(x[i, k] * cloud_relay_delay(task, instance.cloud))
        cons.append(cp.sum(cp.hstack(terms)) <= task.deadline_s)
    for _key, uses in cap_use.items():
        cons.append(cp.sum(cp.hstack(uses)) <= 1.0)
    energy = []
    for i, task in enumerate(instance.tasks):
        energy.append(x[i, 0] * local_cost(task).energy_j)
        energy.append(cp.sum(x[i, 1:]) * offload_energy(task))
    prob = cp.Problem(cp.Minimize(cp.sum(cp.hstack(energy))), cons)
    prob.solve()
    return prob.status, prob.value


def test_cross_check_against_cvxpy():
    for seed in (31, 32, 33, 34):
        inst = random_small_instance(seed, 2, 2)
        sol = solve_relaxed(build_relaxed(inst))
        status, value = _cvxpy_value(inst)
        if sol.status is Status.INFEASIBLE:
            assert status in ("infeasible", "infeasible_inaccurate")
            continue
        assert sol.status is Status.OPTIMAL
        assert status == "optimal"
        assert sol.objective == pytest.approx(value, abs=1e-5)


def test_delays_respect_deadlines_at_optimum():
    for seed in (41, 42):
        inst = random_small_instance(seed, 3, 2)
        sol = solve_relaxed(build_relaxed(inst))
        if sol.status is not Status.OPTIMAL:
            continue
        for i, d in enumerate(sol.delays):
            assert d <= inst.tasks[i].deadline_s + 1e-6
            assert math.isfinite(d)


def test_rates_within_capacity():
    inst = random_small_instance(43, 3, 2)
    sol = solve_relaxed(build_relaxed(inst))
    if sol.status is not Status.OPTIMAL:
        pytest.skip("draw happened to be infeasible")
    per_node = {}
    for (i, o), (up, down, cpu) in sol.rates.items():
        j = o.node
        acc = per_node.setdefault(j, [0.0, 0.0, 0.0])
        acc[0] += up
        acc[1] += down
        acc[2] += cpu
    for j, (up, down, cpu) in per_node.items():
        node = inst.nodes[j]
        assert up <= node.uplink_bps * (1 + 1e-9)
        assert down <= node.downlink_bps * (1 + 1e-9)
        assert cpu <= node.cpu_rate * (1 + 1e-9)


def test_total_cost_consistency_at_fixed_point():
    # rates the relaxation grants to a fully fixed decision reproduce the
    # delays the decision-level evaluator computes from them
    inst = random_small_instance(61, 3, 2)
    ref = brute_force_solve(inst)
    fixed = {i: o for i, o in enumerate(ref.decision)}
    sol = solve_relaxed(build_relaxed(inst, fixed=fixed))
    alloc = {}
    for (i, o), (up, down, cpu) in sol.rates.items():
        if fixed[i] == o and not isinstance(o, type(LOCAL)):
            from edgeoffload.model import RateTriple

            alloc[i] = RateTriple(up, down, cpu)
    cost = total_cost(inst, ref.decision, alloc)
    assert cost.energy_j == pytest.approx(ref.energy_j, rel=1e-12)
    for i, d in enumerate(cost.delays_s):
        assert d == pytest.approx(sol.delays[i], abs=1e-5)
