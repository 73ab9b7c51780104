"""Seeded sweep generation, the enlargement step, and CSV output."""

import csv
import math

import pytest

from edgeoffload.harness import (
    CSV_HEADER,
    DEFAULT_SEED,
    NoCandidate,
    POLICY_ORDER,
    ScenarioConfig,
    SweepRow,
    TaskDraw,
    random_small_instance,
    run_scenario1,
    scenario1_instances,
    scenario2_instances,
    scenario2_modify,
    write_rows,
)
from edgeoffload.model import alpha_star, local_cost, validate
from edgeoffload.units import BITS_PER_MB

SMALL = ScenarioConfig(n_tasks=2, n_nodes=1, s1_points=2)


def _alpha_bytes(task) -> float:
    return task.cycles / task.input_bits * 8.0


def test_scenario1_structure_and_ranges():
    points = scenario1_instances(DEFAULT_SEED)
    assert len(points) == 9
    assert [s for s, _ in points] == [200.0 + 100.0 * k for k in range(9)]
    base = points[0][1]
    assert base.n_tasks == 10 and base.n_nodes == 4
    for task in base.tasks:
        assert 200.0 <= _alpha_bytes(task) <= 500.0
        in_mb = task.input_bits / BITS_PER_MB
        out_mb = task.output_bits / BITS_PER_MB
        assert 10 <= in_mb <= 20 and in_mb == int(in_mb)
        assert 1 <= out_mb <= 2 and out_mb == int(out_mb)
        assert task.deadline_s == 40.0
    for k, (sweep, inst) in enumerate(points):
        assert validate(inst) == []
        for t0, t in zip(base.tasks, inst.tasks):
            # sizes are shared across points, intensities shift by the offset
            assert t.input_bits == t0.input_bits
            assert t.output_bits == t0.output_bits
            assert _alpha_bytes(t) == pytest.approx(
                _alpha_bytes(t0) + 100.0 * k, rel=1e-12
            )


def test_scenario1_deterministic():
    assert scenario1_instances(7) == scenario1_instances(7)
    a = scenario1_instances(7)[0][1]
    b = scenario1_instances(8)[0][1]
    assert a != b


def test_scenario2_enlarged_task_cannot_run_locally():
    idx, points = scenario2_instances(DEFAULT_SEED)
    assert [s for s, _ in points] == [30.0, 40.0, 50.0, 60.0]
    for deadline, inst in points:
        assert validate(inst) == []
        assert all(t.deadline_s == deadline for t in inst.tasks)
        big = inst.tasks[idx]
        assert local_cost(big).delay_s > 60.0
        in_mb = big.input_bits / BITS_PER_MB
        assert in_mb == int(in_mb)  # enlargement keeps whole megabytes
        # intensity still favours local execution; only the deadline forces
        # the enlarged task off the device
        assert big.cycles / big.input_bits < alpha_star(big)
    # the same modified instance is swept over all deadlines
    first = points[0][1]
    for _, inst in points[1:]:
        assert [t.input_bits for t in inst.tasks] == [
            t.input_bits for t in first.tasks
        ]


def test_scenario2_modify_preserves_shape():
    cfg = ScenarioConfig()
    draws = [TaskDraw(15.0, 1.5, 900.0), TaskDraw(10.0, 1.0, 1000.0)]
    out = scenario2_modify(cfg, draws, 0)
    assert out[1] == draws[1]
    mod = out[0]
    assert mod.in_mb == int(mod.in_mb) and mod.in_mb > draws[0].in_mb
    assert mod.out_mb / mod.in_mb == pytest.approx(1.5 / 15.0, rel=1e-12)
    assert mod.alpha_bytes == 900.0
    local_s = (mod.alpha_bytes / 8.0 * mod.in_mb * BITS_PER_MB) / 0.5e9
    assert local_s > 60.0


def test_scenario2_modify_rejects_hopeless_targets():
    cfg = ScenarioConfig(s2_local_delay_target_s=10.0)
    draws = [TaskDraw(15.0, 1.5, 900.0)]
    with pytest.raises(NoCandidate):
        scenario2_modify(cfg, draws, 0)


def test_random_small_instance_deterministic_and_valid():
    a = random_small_instance(42)
    assert a == random_small_instance(42)
    assert a != random_small_instance(43)
    assert validate(a) == []
    assert a.n_tasks == 3 and a.n_nodes == 2
    for t in a.tasks:
        assert 5 <= t.input_bits / BITS_PER_MB <= 20
        assert 1 <= t.output_bits / BITS_PER_MB <= 3
        assert 10.0 <= t.deadline_s <= 45.0


def test_small_sweep_rows_and_determinism():
    rows = run_scenario1(seed=5, config=SMALL)
    again = run_scenario1(seed=5, config=SMALL)
    assert len(rows) == 2 * len(POLICY_ORDER)
    strip = lambda r: (
        r.sweep, r.policy, r.offloaded, r.avg_energy_j,
        r.avg_delay_s, r.feasible, r.nodes, r.status,
    )
    assert [strip(r) for r in rows] == [strip(r) for r in again]
    for r in rows:
        assert r.policy in POLICY_ORDER
        assert r.status in ("optimal", "infeasible", "iteration limit")
        assert r.runtime_ms >= 0.0
        if not math.isnan(r.avg_energy_j):
            assert r.avg_energy_j > 0
            assert 0 <= r.feasible <= SMALL.n_tasks


def test_csv_round_trip(tmp_path):
    rows = [
        SweepRow(200.0, "ibba", 0, 7.913388, 21.42, 10, 123.4, 17, "optimal"),
        SweepRow(200.0, "rop", 0, 7.913377, 21.40, 10, 55.0, 1, "optimal"),
    ]
    path = tmp_path / "sweep.csv"
    write_rows(str(path), rows)
    with open(path, newline="") as fh:
        got = list(csv.reader(fh))
    assert tuple(got[0]) == CSV_HEADER
    assert len(got) == 3
    first = dict(zip(CSV_HEADER, got[1]))
    assert float(first["sweep"]) == 200.0
    assert first["policy"] == "ibba"
    assert int(first["offloaded"]) == 0
    assert float(first["avg_energy_j"]) == pytest.approx(7.913388, abs=1e-5)
    assert int(first["feasible"]) == 10
    assert first["status"] == "optimal"
