"""Build the four experiment figures from rlnc-relay result CSVs.

The input is the CSV the rlnc-relay CLI emits (one row per sweep point
and method). Each figure groups rows by one scenario column -- the link
erasure probability, K, p_SD or the field size -- and draws one series
per (group, method): analytic results as lines, simulation results as
markers with error bars taken from the ci_halfwidth column. Rendering
depends only on the CSV contents, so the same file always produces the
same plotted data.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

REQUIRED_COLUMNS = ["experiment_id", "method", "q", "K", "N_S", "N_R",
                    "p_SD", "p_SR", "p_RD", "probability", "ci_halfwidth",
                    "trials", "seed", "topology"]

# grouping column and legend label per figure
GROUPING = {
    "fig1": ("p_SD", "p"),
    "fig2": ("K", "K"),
    "fig3": ("p_SD", "p_SD"),
    "fig4": ("q", "q"),
}

_METHOD_STYLE = {
    "analytic": dict(kind="line", linestyle="-", label="exact"),
    "bound": dict(kind="line", linestyle="--", label="lower bound"),
    "active_only_analytic": dict(kind="line", linestyle=":",
                                 label="active only, exact"),
    "simulation": dict(kind="marker", marker="o", label="simulation"),
    "active_only_simulation": dict(kind="marker", marker="s",
                                   label="active only, simulation"),
}

_METHOD_ORDER = ["analytic", "simulation", "bound",
                 "active_only_analytic", "active_only_simulation"]

_COLORS = plt.rcParams["axes.prop_cycle"].by_key()["color"]


class RenderError(ValueError):
    """Input CSV cannot be rendered (schema or selection problem)."""


@dataclass(frozen=True)
class FigureSpec:
    input_csv: str
    figure_id: str
    output_path: str


@dataclass
class Series:
    group: str
    method: str
    x: list = field(default_factory=list)
    y: list = field(default_factory=list)
    err: list = field(default_factory=list)

    @property
    def has_error_bars(self) -> bool:
        return any(e > 0 for e in self.err)


def load_rows(path: str) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise RenderError(f"CSV is missing columns: {', '.join(missing)}")
        rows = list(reader)
    if not rows:
        raise RenderError("CSV contains no data rows")
    return rows


def collect_series(rows: list[dict], figure_id: str) -> list[Series]:
    if figure_id not in GROUPING:
        raise RenderError(
            f"unknown figure id {figure_id!r} (expected one of "
            f"{', '.join(sorted(GROUPING))})")
    group_col, _ = GROUPING[figure_id]
    table: dict[tuple[str, str], Series] = {}
    for row in rows:
        key = (row[group_col], row["method"])
        series = table.get(key)
        if series is None:
            series = table[key] = Series(group=key[0], method=key[1])
        series.x.append(float(row["N_S"]))
        series.y.append(float(row["probability"]))
        series.err.append(float(row["ci_halfwidth"] or 0.0))
    if not table:
        raise RenderError("no rows matched the figure grouping")
    ordered = sorted(table.values(),
                     key=lambda s: (_group_sort_key(s.group),
                                    _METHOD_ORDER.index(s.method)))
    for s in ordered:
        order = sorted(range(len(s.x)), key=lambda i: s.x[i])
        s.x = [s.x[i] for i in order]
        s.y = [s.y[i] for i in order]
        s.err = [s.err[i] for i in order]
    return ordered


def _group_sort_key(group: str):
    try:
        return (0, float(group))
    except ValueError:
        return (1, group)


def build_figure(rows: list[dict], figure_id: str):
    """Assemble the matplotlib figure; returns (figure, series list)."""
    series = collect_series(rows, figure_id)
    group_col, group_label = GROUPING[figure_id]
    groups = sorted({s.group for s in series}, key=_group_sort_key)
    color_of = {g: _COLORS[i % len(_COLORS)] for i, g in enumerate(groups)}
    fig, ax = plt.subplots(figsize=(7.0, 4.8))
    for s in series:
        style = _METHOD_STYLE[s.method]
        label = f"{group_label}={s.group}, {style['label']}"
        if style["kind"] == "line":
            ax.plot(s.x, s.y, linestyle=style["linestyle"],
                    color=color_of[s.group], label=label)
        else:
            ax.errorbar(s.x, s.y, yerr=s.err, linestyle="none",
                        marker=style["marker"], markersize=4,
                        fillstyle="full" if s.method == "simulation" else "none",
                        color=color_of[s.group], label=label,
                        elinewidth=0.8, capsize=2)
    topology = rows[0]["topology"]
    ax.set_xlabel("coded packets per stage (N)" if topology == "multicast"
                  else "source transmissions (N_S = N_R)")
    ax.set_ylabel("decoding probability")
    ax.set_ylim(-0.02, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=7, loc="lower right")
    fig.tight_layout()
    return fig, series


def render(spec: FigureSpec) -> list[Series]:
    """Render one figure to spec.output_path; returns the plotted series."""
    rows = load_rows(spec.input_csv)
    plt.rcParams["svg.hashsalt"] = "rlnc-relay-plots"
    fig, series = build_figure(rows, spec.figure_id)
    try:
        fig.savefig(spec.output_path, metadata=_metadata(spec.output_path))
    finally:
        plt.close(fig)
    return series


def _metadata(path: str) -> dict | None:
    # strip the volatile creation date so output depends on the CSV alone
    if path.endswith(".svg"):
        return {"Date": None}
    if path.endswith(".png"):
        return {"Software": None}
    return None
