"""Domain model: tasks, nodes, placement decisions, energy/delay accounting.

A task either runs on the device ("local"), on one of M edge nodes, or on the
central cloud reached through an edge node ("cloud via j").  Offloading energy
is radio energy only (upload + download); edge/cloud compute energy is not paid
by the device.  All quantities are canonical units (see :mod:`.units`).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Sequence, Tuple, Union


class ZeroRateError(ValueError):
    """A delay evaluation received a non-positive transmission or CPU rate."""


class MissingAllocationError(ValueError):
    """An offloaded task has no rate triple in the allocation."""


@dataclass(frozen=True)
class Task:
    """One mobile task.

    Fields are canonical: bits, cycles, seconds, J/bit, J/cycle, bits/s.
    ``validate`` reports violations; constructors do not raise so that invalid
    instances can be represented and diagnosed.
    """

    id: int
    input_bits: float
    output_bits: float
    cycles: float
    deadline_s: float
    local_rate: float  # device CPU, cycles/s
    energy_per_cycle: float  # v_i, J/cycle
    tx_energy_per_bit: float  # e^u, J/bit
    rx_energy_per_bit: float  # e^d, J/bit


@dataclass(frozen=True)
class EdgeNode:
    id: int
    uplink_bps: float
    downlink_bps: float
    cpu_rate: float  # cycles/s


@dataclass(frozen=True)
class CloudConfig:
    fog_cloud_bps: float  # shared edge-to-cloud link rate per task
    cpu_rate: float  # cloud CPU granted per task, cycles/s


@dataclass(frozen=True)
class Instance:
    tasks: Tuple[Task, ...]
    nodes: Tuple[EdgeNode, ...]
    cloud: CloudConfig

    @property
    def n_tasks(self) -> int:
        return len(self.tasks)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)


# --- placement options ------------------------------------------------------


@dataclass(frozen=True)
class Local:
    """Run on the device."""


@dataclass(frozen=True)
class Edge:
    """Run on edge node ``node``."""

    node: int


@dataclass(frozen=True)
class CloudVia:
    """Run on the cloud, relayed through edge node ``node``."""

    node: int


Option = Union[Local, Edge, CloudVia]
LOCAL = Local()

Decision = Tuple[Option, ...]


def all_options(n_nodes: int) -> List[Option]:
    """Canonical option order: Local, Edge(0..M-1), CloudVia(0..M-1)."""
    opts: List[Option] = [LOCAL]
    opts.extend(Edge(j) for j in range(n_nodes))
    opts.extend(CloudVia(j) for j in range(n_nodes))
    return opts


def option_index(option: Option, n_nodes: int) -> int:
    if isinstance(option, Local):
        return 0
    if isinstance(option, Edge):
        return 1 + option.node
    if isinstance(option, CloudVia):
        return 1 + n_nodes + option.node
    raise TypeError(f"not an option: {option!r}")


def option_from_index(idx: int, n_nodes: int) -> Option:
    if idx == 0:
        return LOCAL
    if 1 <= idx <= n_nodes:
        return Edge(idx - 1)
    if n_nodes < idx <= 2 * n_nodes:
        return CloudVia(idx - 1 - n_nodes)
    raise ValueError(f"option index {idx} out of range for {n_nodes} nodes")


class RateTriple(NamedTuple):
    """Rates granted to one offloaded task by its serving node."""

    up_bps: float
    down_bps: float
    cpu_rate: float  # cycles/s; 0.0 for cloud-forwarded tasks


# task id -> rates at the node chosen by the decision
Allocation = Dict[int, RateTriple]


class Cost(NamedTuple):
    energy_j: float
    delay_s: float


# --- per-option cost/delay --------------------------------------------------


def local_cost(task: Task) -> Cost:
    """Device execution: E = v*C, T = C / f^l."""
    return Cost(task.energy_per_cycle * task.cycles, task.cycles / task.local_rate)


def offload_energy(task: Task) -> float:
    """Radio energy of offloading, e^u*D^i + e^d*D^o (rate-independent)."""
    return (
        task.tx_energy_per_bit * task.input_bits
        + task.rx_energy_per_bit * task.output_bits
    )


def edge_cost(task: Task, up_bps: float, down_bps: float, cpu_rate: float) -> Cost:
    """Edge execution under granted rates: T = D^i/r^u + D^o/r^d + C/f."""
    if up_bps <= 0 or down_bps <= 0 or cpu_rate <= 0:
        raise ZeroRateError(
            f"task {task.id}: non-positive rate in ({up_bps}, {down_bps}, {cpu_rate})"
        )
    delay = task.input_bits / up_bps + task.output_bits / down_bps + task.cycles / cpu_rate
    return Cost(offload_energy(task), delay)


def cloud_relay_delay(task: Task, cloud: CloudConfig) -> float:
    """Rate-independent part of the cloud path: forwarding + cloud compute."""
    return (task.input_bits + task.output_bits) / cloud.fog_cloud_bps + (
        task.cycles / cloud.cpu_rate
    )


def cloud_cost(task: Task, up_bps: float, down_bps: float, cloud: CloudConfig) -> Cost:
    """Cloud execution via an edge node.

    Energy equals the edge case (device radio only); delay adds the fixed
    relay-and-compute term (D^i+D^o)/r^fc + C/f^c.
    """
    if up_bps <= 0 or down_bps <= 0:
        raise ZeroRateError(
            f"task {task.id}: non-positive rate in ({up_bps}, {down_bps})"
        )
    delay = (
        task.input_bits / up_bps
        + task.output_bits / down_bps
        + cloud_relay_delay(task, cloud)
    )
    return Cost(offload_energy(task), delay)


def option_cost(
    instance: Instance, task: Task, option: Option, alloc: Allocation
) -> Cost:
    """Cost of one task under one placement, pulling rates from ``alloc``."""
    if isinstance(option, Local):
        return local_cost(task)
    rates = alloc.get(task.id)
    if rates is None:
        raise MissingAllocationError(
            f"task {task.id} is offloaded ({option!r}) but has no rate allocation"
        )
    if isinstance(option, Edge):
        return edge_cost(task, rates.up_bps, rates.down_bps, rates.cpu_rate)
    return cloud_cost(task, rates.up_bps, rates.down_bps, instance.cloud)


class TotalCost(NamedTuple):
    energy_j: float
    delays_s: Tuple[float, ...]


def total_cost(instance: Instance, decision: Decision, alloc: Allocation) -> TotalCost:
    """Total device energy and per-task delays of a complete decision."""
    if len(decision) != instance.n_tasks:
        raise ValueError(
            f"decision length {len(decision)} != task count {instance.n_tasks}"
        )
    energy = 0.0
    delays = []
    for task, option in zip(instance.tasks, decision):
        cost = option_cost(instance, task, option, alloc)
        energy += cost.energy_j
        delays.append(cost.delay_s)
    return TotalCost(energy, tuple(delays))


# --- offloading threshold ----------------------------------------------------


def alpha_star(task: Task) -> float:
    """Complexity threshold in cycles/bit.

    alpha* = (e^u*D^i + e^d*D^o) / (v*D^i).  A task saves energy by offloading
    iff its complexity C/D^i (cycles/bit) exceeds alpha*.
    """
    return offload_energy(task) / (task.energy_per_cycle * task.input_bits)


def benefits_from_offloading(task: Task) -> bool:
    return task.cycles / task.input_bits > alpha_star(task)


# --- validation ---------------------------------------------------------------


def validate(instance: Instance) -> List[str]:
    """Return every invariant violation (empty list means valid)."""
    problems: List[str] = []
    if instance.n_tasks < 1:
        problems.append("instance has no tasks")
    if instance.n_nodes < 1:
        problems.append("instance has no edge nodes")
    for i, task in enumerate(instance.tasks):
        where = f"task {i}"
        if task.id != i:
            problems.append(f"{where}: id {task.id} is not dense (expected {i})")
        if not task.input_bits > 0:
            problems.append(f"{where}: input_bits must be > 0, got {task.input_bits}")
        if not task.output_bits >= 0:
            problems.append(f"{where}: output_bits must be >= 0, got {task.output_bits}")
        if not task.cycles > 0:
            problems.append(f"{where}: cycles must be > 0, got {task.cycles}")
        if not task.deadline_s > 0:
            problems.append(f"{where}: deadline_s must be > 0, got {task.deadline_s}")
        if not task.local_rate > 0:
            problems.append(f"{where}: local_rate must be > 0, got {task.local_rate}")
        if not task.energy_per_cycle > 0:
            problems.append(
                f"{where}: energy_per_cycle must be > 0, got {task.energy_per_cycle}"
            )
        if not task.tx_energy_per_bit >= 0:
            problems.append(
                f"{where}: tx_energy_per_bit must be >= 0, got {task.tx_energy_per_bit}"
            )
        if not task.rx_energy_per_bit >= 0:
            problems.append(
                f"{where}: rx_energy_per_bit must be >= 0, got {task.rx_energy_per_bit}"
            )
    for j, node in enumerate(instance.nodes):
        where = f"node {j}"
        if node.id != j:
            problems.append(f"{where}: id {node.id} is not dense (expected {j})")
        if not node.uplink_bps > 0:
            problems.append(f"{where}: uplink_bps must be > 0, got {node.uplink_bps}")
        if not node.downlink_bps > 0:
            problems.append(
                f"{where}: downlink_bps must be > 0, got {node.downlink_bps}"
            )
        if not node.cpu_rate > 0:
            problems.append(f"{where}: cpu_rate must be > 0, got {node.cpu_rate}")
    if not instance.cloud.fog_cloud_bps > 0:
        problems.append(
            f"cloud: fog_cloud_bps must be > 0, got {instance.cloud.fog_cloud_bps}"
        )
    if not instance.cloud.cpu_rate > 0:
        problems.append(f"cloud: cpu_rate must be > 0, got {instance.cloud.cpu_rate}")
    return problems


def check_decision_shape(instance: Instance, decision: Sequence[Option]) -> None:
    """Raise ValueError on malformed decisions (bad node index, wrong length)."""
    if len(decision) != instance.n_tasks:
        raise ValueError(
            f"decision length {len(decision)} != task count {instance.n_tasks}"
        )
    m = instance.n_nodes
    for i, option in enumerate(decision):
        if isinstance(option, Local):
            continue
        if isinstance(option, (Edge, CloudVia)):
            if not 0 <= option.node < m:
                raise ValueError(f"task {i}: node index {option.node} out of range")
        else:
            raise TypeError(f"task {i}: not an option: {option!r}")
