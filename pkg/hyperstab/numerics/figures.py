"""Figure specifications: a gnuplot script for the CSV datasets and optional
Plotly HTML renderings."""

from pathlib import Path

import pandas as pd
import plotly.graph_objects as go

GNUPLOT_SCRIPT = """\
# Heat equation with memory: closed-loop figures.
# Usage: gnuplot figures.gp  (run inside the output directory)
set datafile separator ','
set terminal pngcairo size 900,650

set output 'fig1_state_surface.png'
set title 'Distributed state v(t,x)'
set xlabel 't'; set ylabel 'x'; set zlabel 'v'
set dgrid3d 60,65 qnorm 2
splot 'fig1_state_surface.csv' every ::1 using 1:2:3 with pm3d notitle
unset dgrid3d

set output 'fig2_control.png'
set title 'Control U(t,x) = -K psi(t)^n v(t,x)'
set zlabel 'U'
set dgrid3d 60,65 qnorm 2
splot 'fig2_control.csv' every ::1 using 1:2:3 with pm3d notitle
unset dgrid3d

set output 'fig3_log_norm.png'
set title 'log10 ||v(t,.)||_2'
set xlabel 't'; set ylabel 'log10 ||v||'
plot 'fig3_log_norm.csv' every ::1 using 1:2 with lines lw 2 notitle
"""

SWEEP_GNUPLOT_SCRIPT = """\
# log10 ||v(t,.)||_2 for psi^n, one curve per n.
set datafile separator ','
set terminal pngcairo size 900,650
set output 'fig4_sweep.png'
set xlabel 't'; set ylabel 'log10 ||v||'
plot for [n in "{n_values}"] 'fig4_sweep.csv' every ::1 using 1:($2 == n+0 ? $3 : 1/0) with lines lw 2 title sprintf('n = %s', n)
"""


def gnuplot_script() -> str:
    return GNUPLOT_SCRIPT


def sweep_gnuplot_script(n_values: list[int]) -> str:
    return SWEEP_GNUPLOT_SCRIPT.format(n_values=" ".join(str(n) for n in n_values))


def build_surface_traces(frame: pd.DataFrame, column: str) -> tuple[list[dict], dict]:
    """Plotly surface trace (t along x-axis, space along y-axis)."""
    pivot = frame.pivot(index="x", columns="t", values=column)
    traces = [{
        "type": "surface",
        "x": pivot.columns.tolist(),
        "y": pivot.index.tolist(),
        "z": pivot.values.tolist(),
        "colorscale": "Viridis",
        "showscale": True,
    }]
    layout = {"scene": {"xaxis": {"title": "t"}, "yaxis": {"title": "x"}, "zaxis": {"title": column}}}
    return traces, layout


def build_line_traces(frame: pd.DataFrame, x_column: str, y_column: str, group_column: str | None = None) -> tuple[list[dict], dict]:
    traces: list[dict] = []
    groups = frame.groupby(group_column) if group_column else [(None, frame)]
    for key, group in groups:
        traces.append({
            "type": "scatter",
            "mode": "lines",
            "x": group[x_column].tolist(),
            "y": group[y_column].tolist(),
            "name": f"{group_column} = {key}" if group_column else y_column,
        })
    layout = {"xaxis": {"title": x_column}, "yaxis": {"title": y_column}}
    return traces, layout


def _write(traces: list[dict], layout: dict, title: str, path: Path) -> Path:
    fig = go.Figure(data=traces, layout={**layout, "title": title})
    fig.write_html(str(path), include_plotlyjs="cdn")
    return path


def write_html_figures(surface: pd.DataFrame, control: pd.DataFrame, log_norm: pd.DataFrame, target: Path) -> dict[str, Path]:
    return {
        "state_surface_html": _write(*build_surface_traces(surface, "v"), "Distributed state v(t,x)",
                                     target / "fig1_state_surface.html"),
        "control_surface_html": _write(*build_surface_traces(control, "u"), "Control U(t,x)",
                                       target / "fig2_control.html"),
        "log_norm_html": _write(*build_line_traces(log_norm, "t", "log10_norm_v"), "log10 ||v(t,.)||",
                                target / "fig3_log_norm.html"),
    }


def write_sweep_html(sweep: pd.DataFrame, target: Path) -> Path:
    traces, layout = build_line_traces(sweep, "t", "log10_norm_v", group_column="n")
    return _write(traces, layout, "log10 ||v(t,.)|| for psi^n", target / "fig4_sweep.html")
