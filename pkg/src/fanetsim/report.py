"""Report emission: delimited tables, per-figure plot series, and rendered
figures.

Column order of the main table (CSV):

    metric, protocol, axis_value, n, mean, min, max, ci95_lo, ci95_hi

Series files carry one row per sweep value with mean/lo/hi columns per
protocol, consumable by any plotting tool; a PNG of each headline metric
is rendered next to them for quick inspection.
"""

from __future__ import annotations

import csv
from pathlib import Path

from .metrics import METRIC_NAMES

TABLE_COLUMNS = ("metric", "protocol", "axis_value", "n", "mean", "min", "max", "ci95_lo", "ci95_hi")

FIGURE_METRICS = ("control_total", "control_discovery", "network_lifetime", "search_success_rate")

_LABELS = {
    "control_total": "Control messages (total)",
    "control_discovery": "Control messages (discovery only)",
    "network_lifetime": "Network lifetime (s)",
    "search_success_rate": "Search success rate (msg/s)",
    "node_count": "Number of nodes",
    "source_count": "Number of sources",
    "pause_time": "Pause time (s)",
}

_STYLES = {
    "rlpr": {"color": "tab:blue", "marker": "o"},
    "rarp_lite": {"color": "tab:green", "marker": "s"},
    "aodv": {"color": "tab:red", "marker": "^"},
}


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def write_table(rows: list[dict], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TABLE_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in TABLE_COLUMNS])


def series_for_metric(rows: list[dict], metric: str) -> tuple[list, list[str], dict]:
    sub = [r for r in rows if r["metric"] == metric]
    protocols = sorted({r["protocol"] for r in sub})
    values = sorted({r["axis_value"] for r in sub})
    table: dict = {
        (r["protocol"], r["axis_value"]): r for r in sub
    }
    return values, protocols, table


def write_series(rows: list[dict], metric: str, axis: str, path: Path) -> None:
    values, protocols, table = series_for_metric(rows, metric)
    header = [axis]
    for p in protocols:
        header += [f"{p}_mean", f"{p}_ci_lo", f"{p}_ci_hi"]
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for v in values:
            row = [_fmt(v)]
            for p in protocols:
                r = table.get((p, v), {})
                row += [_fmt(r.get("mean")), _fmt(r.get("ci95_lo")), _fmt(r.get("ci95_hi"))]
            writer.writerow(row)


def render_figure(rows: list[dict], metric: str, axis: str, path: Path, title: str = "") -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    values, protocols, table = series_for_metric(rows, metric)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for p in protocols:
        xs, ys, los, his = [], [], [], []
        for v in values:
            r = table.get((p, v))
            if r is None or r["mean"] is None:
                continue
            xs.append(v)
            ys.append(r["mean"])
            los.append(r["ci95_lo"] if r["ci95_lo"] is not None else r["mean"])
            his.append(r["ci95_hi"] if r["ci95_hi"] is not None else r["mean"])
        style = _STYLES.get(p, {})
        ax.plot(xs, ys, label=p, **style)
        ax.fill_between(xs, los, his, alpha=0.15, color=style.get("color"))
    ax.set_xlabel(_LABELS.get(axis, axis))
    ax.set_ylabel(_LABELS.get(metric, metric))
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)


def emit_reports(rows: list[dict], axis: str, out_dir, recipe_name: str = "sweep") -> list[Path]:
    """Write the full table, one series file per headline metric, and the
    rendered figures. Returns the paths written."""
    out_dir = Path(out_dir)
    written = []
    table_path = out_dir / "reports" / f"{recipe_name}_metrics.csv"
    write_table(rows, table_path)
    written.append(table_path)
    for metric in FIGURE_METRICS:
        series_path = out_dir / "reports" / f"{recipe_name}_{metric}.csv"
        write_series(rows, metric, axis, series_path)
        written.append(series_path)
        fig_path = out_dir / "reports" / f"{recipe_name}_{metric}.png"
        render_figure(rows, metric, axis, fig_path, title=recipe_name)
        written.append(fig_path)
    return written


def summary_lines(rows: list[dict], axis: str) -> list[str]:
    lines = []
    for metric in METRIC_NAMES:
        values, protocols, table = series_for_metric(rows, metric)
        if not values:
            continue
        lines.append(f"{metric}:")
        for v in values:
            cells = []
            for p in protocols:
                r = table.get((p, v))
                mean = r["mean"] if r else None
                cells.append(f"{p}={_fmt(mean) or 'n/a'}")
            lines.append(f"  {axis}={_fmt(v)}  " + "  ".join(cells))
    return lines
