"""Instance file format: JSON with human units.

Schema (all fields required, unknown fields rejected)::

    {
      "tasks": [
        {
          "input_mb": 15,              # MB (1 MB = 8e6 bits)
          "output_mb": 1.5,
          "cycles_g": 5.25,            # Gcycles
          "deadline_s": 40,
          "local_rate_gcps": 0.5,      # Gcycles/s
          "energy_per_gcycle_j": 1.37, # J/Gcycle
          "tx_energy_j_per_mbit": 0.142,
          "rx_energy_j_per_mbit": 0.142
        }, ...
      ],
      "nodes": [
        {"uplink_mbps": 72, "downlink_mbps": 72, "cpu_gcps": 10}, ...
      ],
      "cloud": {"fog_cloud_mbps": 5, "cloud_cpu_gcps": 10}
    }

Task and node ids are assigned from list order.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, Mapping, Union

from . import units
from .model import CloudConfig, EdgeNode, Instance, Task


class InstanceFormatError(ValueError):
    """The instance document violates the schema."""


_TASK_FIELDS = {
    "input_mb",
    "output_mb",
    "cycles_g",
    "deadline_s",
    "local_rate_gcps",
    "energy_per_gcycle_j",
    "tx_energy_j_per_mbit",
    "rx_energy_j_per_mbit",
}
_NODE_FIELDS = {"uplink_mbps", "downlink_mbps", "cpu_gcps"}
_CLOUD_FIELDS = {"fog_cloud_mbps", "cloud_cpu_gcps"}
_TOP_FIELDS = {"tasks", "nodes", "cloud"}


def _check_fields(obj: Mapping[str, Any], expected: set, where: str) -> None:
    if not isinstance(obj, Mapping):
        raise InstanceFormatError(f"{where}: expected an object, got {type(obj).__name__}")
    got = set(obj)
    unknown = got - expected
    missing = expected - got
    if unknown:
        raise InstanceFormatError(f"{where}: unknown fields {sorted(unknown)}")
    if missing:
        raise InstanceFormatError(f"{where}: missing fields {sorted(missing)}")


def _number(obj: Mapping[str, Any], key: str, where: str) -> float:
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceFormatError(f"{where}.{key}: expected a number, got {value!r}")
    return float(value)


def instance_from_dict(doc: Mapping[str, Any]) -> Instance:
    _check_fields(doc, _TOP_FIELDS, "instance")
    raw_tasks = doc["tasks"]
    raw_nodes = doc["nodes"]
    if not isinstance(raw_tasks, list) or not raw_tasks:
        raise InstanceFormatError("instance.tasks: expected a non-empty list")
    if not isinstance(raw_nodes, list) or not raw_nodes:
        raise InstanceFormatError("instance.nodes: expected a non-empty list")

    tasks = []
    for i, entry in enumerate(raw_tasks):
        where = f"tasks[{i}]"
        _check_fields(entry, _TASK_FIELDS, where)
        tasks.append(
            Task(
                id=i,
                input_bits=units.mb_to_bits(_number(entry, "input_mb", where)),
                output_bits=units.mb_to_bits(_number(entry, "output_mb", where)),
                cycles=units.gcycles_to_cycles(_number(entry, "cycles_g", where)),
                deadline_s=_number(entry, "deadline_s", where),
                local_rate=units.gcycles_to_cycles(
                    _number(entry, "local_rate_gcps", where)
                ),
                energy_per_cycle=units.j_per_gcycle_to_j_per_cycle(
                    _number(entry, "energy_per_gcycle_j", where)
                ),
                tx_energy_per_bit=units.j_per_mbit_to_j_per_bit(
                    _number(entry, "tx_energy_j_per_mbit", where)
                ),
                rx_energy_per_bit=units.j_per_mbit_to_j_per_bit(
                    _number(entry, "rx_energy_j_per_mbit", where)
                ),
            )
        )

    nodes = []
    for j, entry in enumerate(raw_nodes):
        where = f"nodes[{j}]"
        _check_fields(entry, _NODE_FIELDS, where)
        nodes.append(
            EdgeNode(
                id=j,
                uplink_bps=units.mbps_to_bps(_number(entry, "uplink_mbps", where)),
                downlink_bps=units.mbps_to_bps(_number(entry, "downlink_mbps", where)),
                cpu_rate=units.gcycles_to_cycles(_number(entry, "cpu_gcps", where)),
            )
        )

    cloud_doc = doc["cloud"]
    _check_fields(cloud_doc, _CLOUD_FIELDS, "cloud")
    cloud = CloudConfig(
        fog_cloud_bps=units.mbps_to_bps(_number(cloud_doc, "fog_cloud_mbps", "cloud")),
        cpu_rate=units.gcycles_to_cycles(_number(cloud_doc, "cloud_cpu_gcps", "cloud")),
    )
    return Instance(tasks=tuple(tasks), nodes=tuple(nodes), cloud=cloud)


def instance_to_dict(instance: Instance) -> Dict[str, Any]:
    return {
        "tasks": [
            {
                "input_mb": units.bits_to_mb(t.input_bits),
                "output_mb": units.bits_to_mb(t.output_bits),
                "cycles_g": units.cycles_to_gcycles(t.cycles),
                "deadline_s": t.deadline_s,
                "local_rate_gcps": units.cycles_to_gcycles(t.local_rate),
                "energy_per_gcycle_j": units.j_per_cycle_to_j_per_gcycle(
                    t.energy_per_cycle
                ),
                "tx_energy_j_per_mbit": units.j_per_bit_to_j_per_mbit(
                    t.tx_energy_per_bit
                ),
                "rx_energy_j_per_mbit": units.j_per_bit_to_j_per_mbit(
                    t.rx_energy_per_bit
                ),
            }
            for t in instance.tasks
        ],
        "nodes": [
            {
                "uplink_mbps": units.bps_to_mbps(n.uplink_bps),
                "downlink_mbps": units.bps_to_mbps(n.downlink_bps),
                "cpu_gcps": units.cycles_to_gcycles(n.cpu_rate),
            }
            for n in instance.nodes
        ],
        "cloud": {
            "fog_cloud_mbps": units.bps_to_mbps(instance.cloud.fog_cloud_bps),
            "cloud_cpu_gcps": units.cycles_to_gcycles(instance.cloud.cpu_rate),
        },
    }


def load_instance(path: Union[str, Path]) -> Instance:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: not valid JSON: {exc}") from exc
    return instance_from_dict(doc)


def save_instance(instance: Instance, path: Union[str, Path]) -> None:
    Path(path).write_text(
        json.dumps(instance_to_dict(instance), indent=2) + "\n", encoding="utf-8"
    )
