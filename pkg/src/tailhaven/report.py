"""Delimited/JSON output and static figures.

Numbers are written with 10 significant digits. Figures are drawn from the
CSV files after they are written, never from in-memory results, so plotting
cannot change a reported number.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

CURVE_COLUMNS = ("tau", "point", "mean_boot", "lower", "upper", "plain", "n", "replications")

_RC = {
    "svg.hashsalt": "tailhaven",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.linewidth": 0.8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.figsize": (4.5, 3.2),
}


def fmt(value) -> str:
    """Format a number with 10 significant digits (ints pass through)."""
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if math.isnan(value):
        return "nan"
    text = f"{value:.10g}"
    return "0" if text == "-0" else text


def rounded(value):
    """The float a reader of :func:`fmt` output gets back."""
    return value if isinstance(value, int) else float(fmt(value))


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)


def write_curve_csv(path, records) -> None:
    lines = [",".join(CURVE_COLUMNS)]
    for rec in records:
        lines.append(",".join(fmt(rec[c]) for c in CURVE_COLUMNS))
    _write_text(Path(path), "\n".join(lines) + "\n")


def write_curve_json(path, records) -> None:
    data = [{c: rounded(rec[c]) for c in CURVE_COLUMNS} for rec in records]
    _write_text(Path(path), json.dumps(data, indent=1) + "\n")


def read_csv_columns(path) -> dict:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        cols = {name: [] for name in reader.fieldnames}
        for row in reader:
            for name, value in row.items():
                cols[name].append(value)
    return cols


def write_table(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    _write_text(Path(path), "\n".join(lines) + "\n")


def write_aligned_csv(path_or_stream, pair) -> None:
    rows = [(d.isoformat(), y, x) for d, y, x in zip(pair.dates, pair.y, pair.x)]
    lines = ["date,ret_y,ret_x"] + [f"{d},{fmt(y)},{fmt(x)}" for d, y, x in rows]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_stream, "write"):
        path_or_stream.write(text)
    else:
        _write_text(Path(path_or_stream), text)


def write_json(path, obj) -> None:
    _write_text(Path(path), json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _save(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)


def _draw_curve(ax, cols, title=None):
    tau = [float(v) for v in cols["tau"]]
    ax.axhline(0.0, color="0.5", linewidth=0.6)
    ax.plot(tau, [float(v) for v in cols["mean_boot"]], color="black", linewidth=2.0)
    ax.plot(tau, [float(v) for v in cols["lower"]], color="black", linewidth=0.9, linestyle="--")
    ax.plot(tau, [float(v) for v in cols["upper"]], color="black", linewidth=0.9, linestyle="--")
    ax.set_xlim(0, 1)
    ax.set_xlabel("quantile")
    ax.set_ylabel("quantile correlation")
    if title:
        ax.set_title(title, fontsize=9)


def plot_curve(csv_path, svg_path, title=None) -> None:
    """Bootstrap mean as a bold line, CI bounds dashed, zero line for reference."""
    cols = read_csv_columns(csv_path)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        _draw_curve(ax, cols, title)
        fig.tight_layout()
        _save(fig, svg_path)


def plot_compare(csv_paths: dict, svg_path) -> None:
    """Panel grid with one curve per label, two panels per row."""
    labels = list(csv_paths)
    ncols = 2 if len(labels) > 1 else 1
    nrows = math.ceil(len(labels) / ncols)
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(nrows, ncols, figsize=(4.5 * ncols, 3.2 * nrows), squeeze=False)
        for ax, label in zip(axes.flat, labels):
            _draw_curve(ax, read_csv_columns(csv_paths[label]), label)
        for ax in list(axes.flat)[len(labels):]:
            ax.set_visible(False)
        fig.tight_layout()
        _save(fig, svg_path)


def plot_extremes(counts_csv, svg_path, standardized_csv=None) -> None:
    """Rolling counts as step lines; standardized returns on the left when given."""
    from datetime import date

    cols = read_csv_columns(counts_csv)
    days = [date.fromisoformat(v) for v in cols["date"]]
    count_cols = [c for c in cols if c.startswith("count_")]
    with plt.rc_context(_RC):
        panels = 2 if standardized_csv else 1
        fig, axes = plt.subplots(1, panels, figsize=(4.5 * panels, 3.2), squeeze=False)
        ax = axes[0, -1]
        for name, style in zip(count_cols, ("-", "--", ":", "-.")):
            ax.step(days, [int(v) for v in cols[name]], where="post", linestyle=style,
                    color="black", linewidth=0.9, label=name.replace("count_k", "k = "))
        ax.set_ylabel("events in trailing window")
        ax.legend(frameon=False)
        if standardized_csv:
            zc = read_csv_columns(standardized_csv)
            ax0 = axes[0, 0]
            ax0.plot([date.fromisoformat(v) for v in zc["date"]], [float(v) for v in zc["z"]],
                     color="black", linewidth=0.3)
            ax0.set_ylabel("standardized return")
        fig.autofmt_xdate()
        fig.tight_layout()
        _save(fig, svg_path)
