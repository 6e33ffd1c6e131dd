"""Drawing layer for the benchmark CSV files.

Two plot kinds: a cost-ratio figure (one curve per channel efficiency with a
reference line at ratio 1) and a log-log scaling figure with a fitted slope
annotation.  Every number drawn comes from the input table — no simulation or
cost math happens on this side of the CSV contract.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

KINDS = ("fig1_ratio", "scaling_loglog")

#: columns each plot kind consumes from its input table
REQUIRED_COLUMNS = {
    "fig1_ratio": ("eta", "k", "ratio"),
    "scaling_loglog": ("mean_sends", "rms_error_t"),
}

#: rc settings that make output bytes a pure function of input bytes
_DETERMINISM = {
    "figure.figsize": (6.4, 4.2),
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "svg.hashsalt": "figrender",
}

_IMAGE_SUFFIXES = (".png", ".svg")


class RenderError(ValueError):
    """The input table or plot request does not match the contract."""


@dataclass(frozen=True)
class PlotSpec:
    """One rendering job: which table, which picture, which kind of plot.

    ``logx``/``logy`` of ``None`` keep the kind's default axis scales
    (log y for the ratio plot, log-log for the scaling plot); explicit
    booleans override.  ``xlabel``/``ylabel`` of ``None`` keep the kind's
    default labels.
    """

    input_csv: str | Path
    output_image: str | Path
    kind: str
    xlabel: str | None = None
    ylabel: str | None = None
    logx: bool | None = None
    logy: bool | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise RenderError(
                f"unknown plot kind {self.kind!r}; expected one of {KINDS}"
            )
        suffix = Path(self.output_image).suffix.lower()
        if suffix not in _IMAGE_SUFFIXES:
            raise RenderError(
                f"output image must end in {' or '.join(_IMAGE_SUFFIXES)}, "
                f"got {str(self.output_image)!r}"
            )


def read_table(path: str | Path, required: tuple) -> list:
    """Parse a CSV into row dicts, keeping only the required columns as floats.

    Raises :class:`RenderError`, naming the offending column, when the header
    is absent, a required column is missing, a cell fails to parse, or the
    table has no data rows.
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames
            raw_rows = list(reader)
    except OSError as exc:
        raise RenderError(f"cannot read {path}: {exc}") from exc
    if not header:
        raise RenderError(f"{path} is empty: no header row")
    missing = [column for column in required if column not in header]
    if missing:
        raise RenderError(
            f"{path} is missing required column(s): {', '.join(missing)}"
        )
    if not raw_rows:
        raise RenderError(f"{path} has a header but no data rows")
    rows = []
    for lineno, raw in enumerate(raw_rows, start=2):
        parsed = {}
        for column in required:
            try:
                parsed[column] = float(raw[column])
            except (TypeError, ValueError) as exc:
                raise RenderError(
                    f"{path} line {lineno}: column {column!r} is not numeric: "
                    f"{raw[column]!r}"
                ) from exc
        rows.append(parsed)
    return rows


def _draw_fig1_ratio(ax, rows) -> None:
    """One cost-ratio curve per eta value, plus the break-even line at 1.

    Rows whose ratio is not finite are dropped from their curve: the cost
    table deliberately reports an overflowed retry cost as infinity, and an
    infinite ratio has no place on an axis.
    """
    by_eta: dict = {}
    for row in rows:
        if not math.isfinite(row["ratio"]):
            continue
        by_eta.setdefault(row["eta"], []).append((row["k"], row["ratio"]))
    if not by_eta:
        raise RenderError("column 'ratio' has no finite values to plot")
    for eta in sorted(by_eta):
        points = sorted(by_eta[eta])
        ax.plot(
            [p[0] for p in points],
            [p[1] for p in points],
            marker="o",
            markersize=3.5,
            label=f"η = {eta:g}",
        )
    ax.axhline(
        1.0, color="black", linestyle="--", linewidth=1.0, label="break-even"
    )
    ax.set_xlabel("bits of precision k")
    ax.set_ylabel("coherent / repetition cost ratio")
    ax.set_yscale("log")
    # Retry costs blow up doubly exponentially, so the tail of a curve can
    # legitimately reach 1e200+ — numbers a log axis cannot tick.  Cap the
    # view a dozen decades above break-even (curves exit the top) and always
    # keep the break-even line inside it.
    ratios = [ratio for points in by_eta.values() for _, ratio in points]
    top = max(min(max(ratios) * 2.0, 1e12), 2.0)
    bottom = min(min(ratios) * 0.5, 0.5)
    ax.set_ylim(bottom, top)
    ax.legend()


def _draw_scaling_loglog(ax, rows) -> None:
    """RMS error vs transmissions on log-log axes with the fitted slope."""
    xs = np.array([row["mean_sends"] for row in rows], dtype=float)
    ys = np.array([row["rms_error_t"] for row in rows], dtype=float)
    if np.any(xs <= 0.0) or not np.all(np.isfinite(xs)):
        raise RenderError(
            "column 'mean_sends' must be positive and finite for a log-log plot"
        )
    if np.any(ys <= 0.0) or not np.all(np.isfinite(ys)):
        raise RenderError(
            "column 'rms_error_t' must be positive and finite for a log-log plot"
        )
    if xs.size < 2:
        raise RenderError("scaling_loglog needs at least two data rows to fit a slope")
    order = np.argsort(xs)
    xs, ys = xs[order], ys[order]
    slope = float(np.polyfit(np.log(xs), np.log(ys), 1)[0])
    ax.plot(xs, ys, marker="o", markersize=3.5)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("transmissions")
    ax.set_ylabel("RMS error")
    ax.text(0.05, 0.08, f"fitted slope = {slope:.2f}", transform=ax.transAxes)


def build_figure(spec: PlotSpec):
    """Read the table and draw it; returns the open matplotlib figure.

    The caller owns the figure and should close it.  :func:`render` is the
    draw-save-close wrapper the CLI uses.
    """
    rows = read_table(spec.input_csv, REQUIRED_COLUMNS[spec.kind])
    with plt.rc_context(_DETERMINISM):
        fig, ax = plt.subplots()
    try:
        if spec.kind == "fig1_ratio":
            _draw_fig1_ratio(ax, rows)
        else:
            _draw_scaling_loglog(ax, rows)
        if spec.xlabel is not None:
            ax.set_xlabel(spec.xlabel)
        if spec.ylabel is not None:
            ax.set_ylabel(spec.ylabel)
        if spec.logx is not None:
            ax.set_xscale("log" if spec.logx else "linear")
        if spec.logy is not None:
            ax.set_yscale("log" if spec.logy else "linear")
    except Exception:
        plt.close(fig)
        raise
    return fig


def render(spec: PlotSpec) -> Path:
    """Draw the requested figure and write it; returns the output path.

    Output bytes are deterministic for fixed input bytes: fixed figure
    geometry, pinned hash salt for SVG ids, and no timestamps or tool
    versions embedded in either format.
    """
    fig = build_figure(spec)
    out = Path(spec.output_image)
    try:
        with plt.rc_context(_DETERMINISM):
            if out.suffix.lower() == ".png":
                fig.savefig(out, metadata={"Software": "figrender"})
            else:
                fig.savefig(
                    out, metadata={"Date": None, "Creator": "figrender"}
                )
    finally:
        plt.close(fig)
    return out
