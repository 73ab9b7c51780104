"""Reader for the sweep CSV files the edgeoffload harness writes.

The contract is the CSV schema alone: nine named columns, one row per
(sweep point, policy). Column order in the file does not matter, but the
set must match exactly; anything else raises :class:`SchemaMismatch`
naming the offending column. A file with a valid header and no data rows
raises :class:`EmptyCsvError` (there is nothing to plot).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Tuple, Union

COLUMNS = (
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

POLICIES = ("ibba", "rop", "wop", "aop")


class SchemaMismatch(ValueError):
    """The CSV does not follow the sweep schema."""


class EmptyCsvError(ValueError):
    """The CSV holds a header but no sweep rows."""


@dataclass(frozen=True)
class SweepRow:
    sweep: float
    policy: str
    offloaded: float
    avg_energy_j: float  # nan when the policy returned no schedule
    avg_delay_s: float
    feasible: int
    runtime_ms: float
    nodes: int
    status: str


def _number(raw: str, column: str, line: int) -> float:
    try:
        return float(raw)
    except ValueError:
        raise SchemaMismatch(
            f"line {line}: column {column!r} holds {raw!r}, expected a number"
        ) from None


def read_rows(path: Union[str, Path]) -> List[SweepRow]:
    """Parse a sweep CSV, validating the header and every cell."""
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch(f"{path}: no header row") from None
        missing = set(COLUMNS) - set(header)
        unknown = set(header) - set(COLUMNS)
        if missing:
            raise SchemaMismatch(f"{path}: missing column {sorted(missing)[0]!r}")
        if unknown:
            raise SchemaMismatch(f"{path}: unknown column {sorted(unknown)[0]!r}")
        if len(header) != len(COLUMNS):
            raise SchemaMismatch(f"{path}: duplicated column in header")
        at = {name: header.index(name) for name in COLUMNS}

        rows: List[SweepRow] = []
        for line, record in enumerate(reader, start=2):
            if len(record) != len(COLUMNS):
                raise SchemaMismatch(
                    f"{path}: line {line}: {len(record)} cells, expected {len(COLUMNS)}"
                )
            rows.append(
                SweepRow(
                    sweep=_number(record[at["sweep"]], "sweep", line),
                    policy=record[at["policy"]],
                    offloaded=_number(record[at["offloaded"]], "offloaded", line),
                    avg_energy_j=_number(
                        record[at["avg_energy_j"]], "avg_energy_j", line
                    ),
                    avg_delay_s=_number(record[at["avg_delay_s"]], "avg_delay_s", line),
                    feasible=int(_number(record[at["feasible"]], "feasible", line)),
                    runtime_ms=_number(record[at["runtime_ms"]], "runtime_ms", line),
                    nodes=int(_number(record[at["nodes"]], "nodes", line)),
                    status=record[at["status"]],
                )
            )
    if not rows:
        raise EmptyCsvError(f"{path}: header only, no sweep rows to plot")
    return rows


def series(
    rows: Sequence[SweepRow], policy: str, column: str
) -> Tuple[List[float], List[float]]:
    """(sweep values, column values) for one policy, in file order."""
    xs = [r.sweep for r in rows if r.policy == policy]
    ys = [getattr(r, column) for r in rows if r.policy == policy]
    return xs, ys
