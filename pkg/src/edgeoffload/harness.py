"""Seeded experiment sweeps with CSV output.

Two sweeps over randomly drawn ten-task, four-node instances:

* scenario 1 fixes every deadline at 40 s, draws per-task computation
  intensities (cycles per byte) uniformly from [200, 500], and shifts them
  upward by 100 per sweep point for nine points.  Task sizes are drawn once
  and shared by all points, so only the intensities move.
* scenario 2 draws intensities from [800, 1100] and sweeps the common
  deadline over {30, 40, 50, 60} s.  One task that favours local execution
  (its intensity is below its offload-benefit threshold) is enlarged, keeping
  its input/output ratio, until running it locally takes more than 60 s; that
  task can then only meet any of the deadlines by offloading.

Draws come from split streams of a small counter-based generator, so results
are identical across platforms and independent of evaluation order.
"""

from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .barrier import SolverParams
from .bnb import IbbaParams
from .model import CloudConfig, EdgeNode, Instance, Task, alpha_star
from .policies import PolicyResult, aop_solve, ibba_policy, rop_solve, wop_solve
from .rng import SplitMix64
from .units import (
    BITS_PER_MB,
    cycles_per_byte_to_per_bit,
    gcycles_to_cycles,
    j_per_gcycle_to_j_per_cycle,
    j_per_mbit_to_j_per_bit,
    mbps_to_bps,
)


class NoCandidate(RuntimeError):
    """No drawn task favours local execution, so none can be enlarged."""


DEFAULT_SEED = 3

_S1_KEY = 1
_S2_KEY = 2


@dataclass(frozen=True)
class ScenarioConfig:
    n_tasks: int = 10
    n_nodes: int = 4
    local_rate_gcps: float = 0.5
    energy_per_gcycle_j: float = 1000.0 / 730.0
    tx_energy_j_per_mbit: float = 0.142
    rx_energy_j_per_mbit: float = 0.142
    uplink_mbps: float = 72.0
    downlink_mbps: float = 72.0
    node_cpu_gcps: float = 10.0
    fog_cloud_mbps: float = 5.0
    cloud_cpu_gcps: float = 10.0
    input_mb_range: Tuple[int, int] = (10, 20)
    output_mb_range: Tuple[int, int] = (1, 2)
    s1_alpha_range: Tuple[int, int] = (200, 500)
    s1_alpha_step: float = 100.0
    s1_points: int = 9
    s1_deadline_s: float = 40.0
    s2_alpha_range: Tuple[int, int] = (800, 1100)
    s2_deadlines: Tuple[float, ...] = (30.0, 40.0, 50.0, 60.0)
    s2_local_delay_target_s: float = 62.0
    s2_local_delay_min_s: float = 60.0
    s2_max_attempts: int = 16


@dataclass(frozen=True)
class TaskDraw:
    in_mb: float  # whole megabytes (scenario-2 enlargement keeps this whole)
    out_mb: float
    alpha_bytes: float  # computation intensity, cycles per byte


def _draw_tasks(
    stream: SplitMix64, cfg: ScenarioConfig, alpha_range: Tuple[int, int]
) -> List[TaskDraw]:
    draws = []
    for i in range(cfg.n_tasks):
        t = stream.split(i)
        in_mb = t.randint(*cfg.input_mb_range)
        out_mb = t.randint(*cfg.output_mb_range)
        alpha = t.randint(*alpha_range)
        draws.append(TaskDraw(float(in_mb), float(out_mb), float(alpha)))
    return draws


def _task_from_draw(
    cfg: ScenarioConfig, tid: int, draw: TaskDraw, deadline_s: float, alpha_offset: float
) -> Task:
    alpha = draw.alpha_bytes + alpha_offset
    input_bits = draw.in_mb * BITS_PER_MB
    return Task(
        id=tid,
        input_bits=input_bits,
        output_bits=draw.out_mb * BITS_PER_MB,
        cycles=cycles_per_byte_to_per_bit(alpha) * input_bits,
        deadline_s=deadline_s,
        local_rate=gcycles_to_cycles(cfg.local_rate_gcps),
        energy_per_cycle=j_per_gcycle_to_j_per_cycle(cfg.energy_per_gcycle_j),
        tx_energy_per_bit=j_per_mbit_to_j_per_bit(cfg.tx_energy_j_per_mbit),
        rx_energy_per_bit=j_per_mbit_to_j_per_bit(cfg.rx_energy_j_per_mbit),
    )


def _instance_from_draws(
    cfg: ScenarioConfig,
    draws: Sequence[TaskDraw],
    deadline_s: float,
    alpha_offset: float = 0.0,
) -> Instance:
    tasks = tuple(
        _task_from_draw(cfg, i, d, deadline_s, alpha_offset) for i, d in enumerate(draws)
    )
    nodes = tuple(
        EdgeNode(
            id=j,
            uplink_bps=mbps_to_bps(cfg.uplink_mbps),
            downlink_bps=mbps_to_bps(cfg.downlink_mbps),
            cpu_rate=gcycles_to_cycles(cfg.node_cpu_gcps),
        )
        for j in range(cfg.n_nodes)
    )
    cloud = CloudConfig(
        fog_cloud_bps=mbps_to_bps(cfg.fog_cloud_mbps),
        cpu_rate=gcycles_to_cycles(cfg.cloud_cpu_gcps),
    )
    return Instance(tasks=tasks, nodes=nodes, cloud=cloud)


def scenario1_instances(
    seed: int = DEFAULT_SEED, config: Optional[ScenarioConfig] = None
) -> List[Tuple[float, Instance]]:
    """One instance per sweep point; the sweep value is the intensity floor."""
    cfg = config or ScenarioConfig()
    stream = SplitMix64(seed).split(_S1_KEY)
    draws = _draw_tasks(stream, cfg, cfg.s1_alpha_range)
    points = []
    for k in range(cfg.s1_points):
        offset = k * cfg.s1_alpha_step
        sweep = cfg.s1_alpha_range[0] + offset
        points.append(
            (float(sweep), _instance_from_draws(cfg, draws, cfg.s1_deadline_s, offset))
        )
    return points


def _local_delay_s(cfg: ScenarioConfig, draw: TaskDraw) -> float:
    cycles = cycles_per_byte_to_per_bit(draw.alpha_bytes) * draw.in_mb * BITS_PER_MB
    return cycles / gcycles_to_cycles(cfg.local_rate_gcps)


def _first_local_favorable(cfg: ScenarioConfig, draws: Sequence[TaskDraw]) -> Optional[int]:
    probe = _instance_from_draws(cfg, draws, deadline_s=1.0)
    for i, task in enumerate(probe.tasks):
        if task.cycles / task.input_bits < alpha_star(task):
            return i
    return None


def scenario2_modify(cfg: ScenarioConfig, draws: List[TaskDraw], idx: int) -> List[TaskDraw]:
    """Enlarge one task, whole megabytes in, same factor out, until its local
    run exceeds the slowest deadline."""
    d = draws[idx]
    t_local = _local_delay_s(cfg, d)
    factor = cfg.s2_local_delay_target_s / t_local
    new_in = float(math.ceil(d.in_mb * factor))
    actual = new_in / d.in_mb
    modified = TaskDraw(new_in, d.out_mb * actual, d.alpha_bytes)
    if _local_delay_s(cfg, modified) <= cfg.s2_local_delay_min_s:
        raise NoCandidate(
            f"task {idx}: enlargement failed to push the local delay past "
            f"{cfg.s2_local_delay_min_s}s"
        )
    out = list(draws)
    out[idx] = modified
    return out


def scenario2_instances(
    seed: int = DEFAULT_SEED, config: Optional[ScenarioConfig] = None
) -> Tuple[int, List[Tuple[float, Instance]]]:
    """Returns (index of the enlarged task, one instance per deadline)."""
    cfg = config or ScenarioConfig()
    base = SplitMix64(seed).split(_S2_KEY)
    for attempt in range(cfg.s2_max_attempts):
        draws = _draw_tasks(base.split(attempt), cfg, cfg.s2_alpha_range)
        idx = _first_local_favorable(cfg, draws)
        if idx is None:
            continue
        draws = scenario2_modify(cfg, draws, idx)
        points = [
            (float(t), _instance_from_draws(cfg, draws, float(t)))
            for t in cfg.s2_deadlines
        ]
        return idx, points
    raise NoCandidate(
        f"no drawn task favoured local execution in {cfg.s2_max_attempts} attempts"
    )


def random_small_instance(seed: int, n_tasks: int = 3, n_nodes: int = 2) -> Instance:
    """A small randomized instance for cross-checking solvers.

    Sizes and intensities straddle the offload-benefit threshold, deadlines
    range from comfortable to unattainable, and node capacities vary, so the
    optima mix local and offloaded tasks (and some instances are infeasible).
    """
    root = SplitMix64(seed)
    tasks = []
    for i in range(n_tasks):
        t = root.split(i)
        in_mb = t.randint(5, 20)
        out_mb = t.randint(1, 3)
        alpha = t.randint(150, 1400)
        deadline = float(t.randint(10, 45))
        input_bits = in_mb * BITS_PER_MB
        tasks.append(
            Task(
                id=i,
                input_bits=input_bits,
                output_bits=out_mb * BITS_PER_MB,
                cycles=cycles_per_byte_to_per_bit(alpha) * input_bits,
                deadline_s=deadline,
                local_rate=gcycles_to_cycles(0.5),
                energy_per_cycle=j_per_gcycle_to_j_per_cycle(1000.0 / 730.0),
                tx_energy_per_bit=j_per_mbit_to_j_per_bit(0.142),
                rx_energy_per_bit=j_per_mbit_to_j_per_bit(0.142),
            )
        )
    nodes = []
    for j in range(n_nodes):
        s = root.split(1000 + j)
        nodes.append(
            EdgeNode(
                id=j,
                uplink_bps=mbps_to_bps(s.randint(20, 72)),
                downlink_bps=mbps_to_bps(s.randint(20, 72)),
                cpu_rate=gcycles_to_cycles(s.randint(4, 10)),
            )
        )
    c = root.split(2000)
    cloud = CloudConfig(
        fog_cloud_bps=mbps_to_bps(c.randint(3, 8)),
        cpu_rate=gcycles_to_cycles(10.0),
    )
    return Instance(tasks=tuple(tasks), nodes=tuple(nodes), cloud=cloud)


# --- running sweeps -------------------------------------------------------------


POLICY_ORDER = ("ibba", "rop", "wop", "aop")
ProgressFn = Callable[[str], None]


@dataclass
class SweepRow:
    sweep: float
    policy: str
    offloaded: int
    avg_energy_j: float
    avg_delay_s: float
    feasible: int
    runtime_ms: float
    nodes: int
    status: str


PointResults = Tuple[float, Dict[str, PolicyResult], Dict[str, float]]


def sweep_results(
    points: Sequence[Tuple[float, Instance]],
    params: Optional[SolverParams] = None,
    ibba: Optional[IbbaParams] = None,
    policies: Sequence[str] = POLICY_ORDER,
    progress: Optional[ProgressFn] = None,
) -> List[PointResults]:
    """Run the requested policies at each sweep point, recording runtimes."""
    params = params or SolverParams()
    out: List[PointResults] = []
    for sweep, instance in points:
        results: Dict[str, PolicyResult] = {}
        runtimes: Dict[str, float] = {}
        for name in policies:
            t0 = time.perf_counter()
            if name == "ibba":
                res = ibba_policy(instance, params, ibba)
            elif name == "rop":
                res = rop_solve(instance, params)
            elif name == "wop":
                res = wop_solve(instance)
            elif name == "aop":
                res = aop_solve(instance, params, ibba)
            else:
                raise ValueError(f"unknown policy {name!r}")
            runtimes[name] = (time.perf_counter() - t0) * 1e3
            results[name] = res
            if progress is not None:
                progress(
                    f"sweep={sweep:g} policy={name} status={res.status.value} "
                    f"({runtimes[name]:.0f} ms)"
                )
        out.append((sweep, results, runtimes))
    return out


def rows_from_results(
    points: Sequence[Tuple[float, Instance]],
    results: Sequence[PointResults],
    delay_tol: float = 1e-6,
) -> List[SweepRow]:
    rows: List[SweepRow] = []
    instances = {sweep: inst for sweep, inst in points}
    for sweep, by_policy, runtimes in results:
        instance = instances[sweep]
        n = instance.n_tasks
        for name, res in by_policy.items():
            if res.energy_j is None or res.delays_s is None:
                rows.append(
                    SweepRow(
                        sweep=sweep,
                        policy=name,
                        offloaded=res.offloaded if res.offloaded is not None else 0,
                        avg_energy_j=float("nan"),
                        avg_delay_s=float("nan"),
                        feasible=0,
                        runtime_ms=runtimes[name],
                        nodes=res.nodes,
                        status=res.status.value,
                    )
                )
                continue
            feasible = sum(
                1
                for i, d in enumerate(res.delays_s)
                if d <= instance.tasks[i].deadline_s + delay_tol
            )
            rows.append(
                SweepRow(
                    sweep=sweep,
                    policy=name,
                    offloaded=res.offloaded if res.offloaded is not None else 0,
                    avg_energy_j=res.energy_j / n,
                    avg_delay_s=sum(res.delays_s) / n,
                    feasible=feasible,
                    runtime_ms=runtimes[name],
                    nodes=res.nodes,
                    status=res.status.value,
                )
            )
    return rows


def run_scenario1(
    seed: int = DEFAULT_SEED,
    config: Optional[ScenarioConfig] = None,
    params: Optional[SolverParams] = None,
    ibba: Optional[IbbaParams] = None,
    progress: Optional[ProgressFn] = None,
) -> List[SweepRow]:
    points = scenario1_instances(seed, config)
    return rows_from_results(points, sweep_results(points, params, ibba, progress=progress))


def run_scenario2(
    seed: int = DEFAULT_SEED,
    config: Optional[ScenarioConfig] = None,
    params: Optional[SolverParams] = None,
    ibba: Optional[IbbaParams] = None,
    progress: Optional[ProgressFn] = None,
) -> List[SweepRow]:
    _, points = scenario2_instances(seed, config)
    return rows_from_results(points, sweep_results(points, params, ibba, progress=progress))


# --- CSV ------------------------------------------------------------------------


CSV_HEADER = (
    "sweep",
    "policy",
    "offloaded",
    "avg_energy_j",
    "avg_delay_s",
    "feasible",
    "runtime_ms",
    "nodes",
    "status",
)


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


def write_rows(path: str, rows: Sequence[SweepRow]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow(
                [
                    _fmt(r.sweep),
                    r.policy,
                    r.offloaded,
                    _fmt(r.avg_energy_j),
                    _fmt(r.avg_delay_s),
                    r.feasible,
                    _fmt(r.runtime_ms),
                    r.nodes,
                    r.status,
                ]
            )
