import pytest

from offload_figures.charts import (
    FIGURES,
    STYLES,
    FigureSpec,
    SeriesStyle,
    build_figure,
    render,
)
from offload_figures.schema import read_rows

INTENSITY_FIGS = ("fig2", "fig3", "fig4")
DEADLINE_FIGS = ("fig5", "fig6")


def _golden(fig_id, s1_csv, s2_csv):
    return s1_csv if fig_id in INTENSITY_FIGS else s2_csv


@pytest.mark.parametrize("fig_id", sorted(FIGURES))
def test_every_figure_renders(fig_id, s1_csv, s2_csv, tmp_path):
    out = render(FigureSpec(_golden(fig_id, s1_csv, s2_csv), fig_id, tmp_path / f"{fig_id}.png"))
    assert out.is_file()
    assert out.stat().st_size > 1000
    assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


@pytest.mark.parametrize("fig_id", sorted(FIGURES))
def test_one_series_per_policy(fig_id, s1_csv, s2_csv):
    rows = read_rows(_golden(fig_id, s1_csv, s2_csv))
    fig = build_figure(rows, fig_id)
    lines = fig.axes[0].get_lines()
    assert len(lines) == 4
    labels = [line.get_label() for line in lines]
    assert labels == [s.label for s in STYLES.values()]
    points = 9 if fig_id in INTENSITY_FIGS else 4
    for line in lines:
        assert len(line.get_xdata()) == points


def test_axes_carry_units(s1_csv, s2_csv):
    s1_rows, s2_rows = read_rows(s1_csv), read_rows(s2_csv)
    ax2 = build_figure(s1_rows, "fig2").axes[0]
    assert "cycles/byte" in ax2.get_xlabel()
    assert "offloaded" in ax2.get_ylabel()
    ax3 = build_figure(s1_rows, "fig3").axes[0]
    assert "J/task" in ax3.get_ylabel()
    ax4 = build_figure(s1_rows, "fig4").axes[0]
    assert "(s)" in ax4.get_ylabel()
    ax6 = build_figure(s2_rows, "fig6").axes[0]
    assert "(s)" in ax6.get_xlabel()
    assert "J/task" in ax6.get_ylabel()


def test_intensity_sweep_spans_nine_points(s1_csv):
    fig = build_figure(read_rows(s1_csv), "fig2")
    line = fig.axes[0].get_lines()[0]
    xs = list(line.get_xdata())
    assert xs == sorted(xs)
    assert xs[0] == 200.0 and xs[-1] == 1000.0 and len(xs) == 9


def test_rerender_is_byte_stable(s1_csv, tmp_path):
    first = render(FigureSpec(s1_csv, "fig3", tmp_path / "a.png"))
    second = render(FigureSpec(s1_csv, "fig3", tmp_path / "b.png"))
    assert first.read_bytes() == second.read_bytes()


def test_unknown_figure_id_rejected(s1_csv, tmp_path):
    with pytest.raises(ValueError, match="fig7"):
        FigureSpec(s1_csv, "fig7", tmp_path / "x.png")


def test_style_override_is_used(s1_csv):
    styles = dict(STYLES)
    styles["ibba"] = SeriesStyle("custom", "black", "x", ":")
    fig = build_figure(read_rows(s1_csv), "fig2", styles)
    line = fig.axes[0].get_lines()[0]
    assert line.get_label() == "custom"
    assert line.get_color() == "black"
