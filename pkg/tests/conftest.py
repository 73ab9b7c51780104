"""Shared builders: canonical-parameter tasks, nodes and instances.

Defaults mirror the harness configuration (device CPU 0.5 Gc/s, 1000/730
J/Gcycle, 0.142 J/Mbit radio, 72 Mbps links, 10 Gc/s nodes, 5 Mbps
fog-cloud link); tests override per field.
"""

from edgeoffload.model import CloudConfig, EdgeNode, Instance, Task
from edgeoffload.units import (
    cycles_per_byte_to_per_bit,
    gcycles_to_cycles,
    j_per_gcycle_to_j_per_cycle,
    j_per_mbit_to_j_per_bit,
    mb_to_bits,
    mbps_to_bps,
)

V_J_PER_GCYCLE = 1000.0 / 730.0
E_J_PER_MBIT = 0.142


def make_task(
    tid=0,
    in_mb=15.0,
    out_mb=1.5,
    alpha_bytes=900.0,
    deadline_s=40.0,
    local_gcps=0.5,
    v_j_per_gcycle=V_J_PER_GCYCLE,
    e_j_per_mbit=E_J_PER_MBIT,
):
    input_bits = mb_to_bits(in_mb)
    return Task(
        id=tid,
        input_bits=input_bits,
        output_bits=mb_to_bits(out_mb),
        cycles=cycles_per_byte_to_per_bit(alpha_bytes) * input_bits,
        deadline_s=deadline_s,
        local_rate=gcycles_to_cycles(local_gcps),
        energy_per_cycle=j_per_gcycle_to_j_per_cycle(v_j_per_gcycle),
        tx_energy_per_bit=j_per_mbit_to_j_per_bit(e_j_per_mbit),
        rx_energy_per_bit=j_per_mbit_to_j_per_bit(e_j_per_mbit),
    )


def make_node(nid=0, up_mbps=72.0, down_mbps=72.0, cpu_gcps=10.0):
    return EdgeNode(
        id=nid,
        uplink_bps=mbps_to_bps(up_mbps),
        downlink_bps=mbps_to_bps(down_mbps),
        cpu_rate=gcycles_to_cycles(cpu_gcps),
    )


def make_cloud(fog_mbps=5.0, cpu_gcps=10.0):
    return CloudConfig(
        fog_cloud_bps=mbps_to_bps(fog_mbps), cpu_rate=gcycles_to_cycles(cpu_gcps)
    )


def make_instance(
    task_specs=((15.0, 1.5, 900.0, 40.0),),
    n_nodes=2,
    up_mbps=72.0,
    down_mbps=72.0,
    cpu_gcps=10.0,
    fog_mbps=5.0,
    cloud_gcps=10.0,
):
    """task_specs: (in_mb, out_mb, alpha_bytes, deadline_s) per task."""
    tasks = tuple(make_task(i, *spec) for i, spec in enumerate(task_specs))
    nodes = tuple(
        make_node(j, up_mbps, down_mbps, cpu_gcps) for j in range(n_nodes)
    )
    return Instance(tasks=tasks, nodes=nodes, cloud=make_cloud(fog_mbps, cloud_gcps))
