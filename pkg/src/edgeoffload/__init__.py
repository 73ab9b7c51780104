"""Energy-optimal task offloading and rate allocation for cooperative edge networks.

The library models a set of mobile tasks that can run locally, on one of M
cooperating edge nodes, or on a central cloud reached through an edge node.
It minimizes total mobile-device energy subject to per-task deadlines and
per-node uplink/downlink/CPU capacity, via:

* an exact branch-and-bound over one-hot placement decisions (:mod:`.bnb`),
* convex lower bounds from a perspective reformulation solved by a primal
  log-barrier interior-point method (:mod:`.relaxation`, :mod:`.barrier`),
* baseline policies and a brute-force oracle (:mod:`.policies`),
* a seeded experiment harness with CSV output (:mod:`.harness`).
"""

from .model import (
    Allocation,
    CloudConfig,
    CloudVia,
    Cost,
    Decision,
    Edge,
    EdgeNode,
    Instance,
    Local,
    LOCAL,
    Option,
    RateTriple,
    Task,
    all_options,
    alpha_star,
    cloud_cost,
    edge_cost,
    local_cost,
    option_index,
    option_from_index,
    total_cost,
    validate,
)

__all__ = [
    "Allocation",
    "CloudConfig",
    "CloudVia",
    "Cost",
    "Decision",
    "Edge",
    "EdgeNode",
    "Instance",
    "Local",
    "LOCAL",
    "Option",
    "RateTriple",
    "Task",
    "all_options",
    "alpha_star",
    "cloud_cost",
    "edge_cost",
    "local_cost",
    "option_index",
    "option_from_index",
    "total_cost",
    "validate",
]
