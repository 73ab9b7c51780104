"""The five sweep charts.

Each figure id fixes which column is plotted against the sweep value and
how the axes are labelled; the CSV itself does not say which scenario it
came from. fig2, fig3, and fig4 read an intensity sweep (tasks offloaded,
average energy, and average delay against cycles/byte); fig5 and fig6 read
a deadline sweep (tasks offloaded and average energy against seconds).

Rendering is read-only and deterministic: fixed styling, fixed canvas
size, an explicit Agg canvas (no window system, no pyplot state), and a
fixed PNG metadata tag, so re-rendering the same CSV reproduces the output
byte for byte. Rows whose value is nan (a policy that returned no
schedule) appear as gaps in their line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence, Union

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .schema import POLICIES, SweepRow, read_rows, series


@dataclass(frozen=True)
class SeriesStyle:
    label: str
    color: str
    marker: str
    linestyle: str = "-"


STYLES: Mapping[str, SeriesStyle] = {
    "ibba": SeriesStyle("exact search", "tab:blue", "o"),
    "rop": SeriesStyle("relaxation bound", "tab:green", "s", "--"),
    "wop": SeriesStyle("all local", "tab:red", "^"),
    "aop": SeriesStyle("all offloaded", "tab:purple", "v"),
}


@dataclass(frozen=True)
class FigureDef:
    column: str
    x_label: str
    y_label: str
    title: str


_INTENSITY = "computational intensity (cycles/byte)"
_DEADLINE = "delay requirement (s)"

FIGURES: Mapping[str, FigureDef] = {
    "fig2": FigureDef("offloaded", _INTENSITY, "tasks offloaded", "Offloading trend"),
    "fig3": FigureDef(
        "avg_energy_j", _INTENSITY, "average energy (J/task)", "Energy per task"
    ),
    "fig4": FigureDef(
        "avg_delay_s", _INTENSITY, "average delay (s)", "Delay per task"
    ),
    "fig5": FigureDef("offloaded", _DEADLINE, "tasks offloaded", "Offloading trend"),
    "fig6": FigureDef(
        "avg_energy_j", _DEADLINE, "average energy (J/task)", "Energy per task"
    ),
}


@dataclass(frozen=True)
class FigureSpec:
    csv: Union[str, Path]
    fig_id: str
    out: Union[str, Path]
    styles: Mapping[str, SeriesStyle] = field(default_factory=lambda: STYLES)

    def __post_init__(self) -> None:
        if self.fig_id not in FIGURES:
            raise ValueError(
                f"unknown figure id {self.fig_id!r}, expected one of {sorted(FIGURES)}"
            )


def build_figure(
    rows: Sequence[SweepRow],
    fig_id: str,
    styles: Mapping[str, SeriesStyle] = STYLES,
) -> Figure:
    """One line per policy across the sweep points of ``rows``."""
    fdef = FIGURES[fig_id]
    fig = Figure(figsize=(6.4, 4.2), dpi=120)
    FigureCanvasAgg(fig)
    ax = fig.add_subplot()
    for policy in POLICIES:
        xs, ys = series(rows, policy, fdef.column)
        if not xs:
            continue
        style = styles.get(policy, SeriesStyle(policy, "tab:gray", "x"))
        ax.plot(
            xs,
            ys,
            label=style.label,
            color=style.color,
            marker=style.marker,
            linestyle=style.linestyle,
            markersize=5,
        )
    ax.set_xlabel(fdef.x_label)
    ax.set_ylabel(fdef.y_label)
    ax.set_title(fdef.title)
    ax.grid(True, linewidth=0.4, alpha=0.5)
    ax.legend()
    fig.tight_layout()
    return fig


def render(spec: FigureSpec) -> Path:
    """Read the CSV, draw the figure, write the image; returns the path."""
    rows = read_rows(spec.csv)
    fig = build_figure(rows, spec.fig_id, spec.styles)
    out = Path(spec.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    kwargs = {}
    if out.suffix.lower() == ".png":
        # a fixed Software tag keeps repeated renders byte-identical even
        # across matplotlib upgrades
        kwargs["metadata"] = {"Software": "offload-figures"}
    fig.savefig(out, **kwargs)
    return out
