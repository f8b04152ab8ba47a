"""Result persistence: CSV tables, JSON mirror, deterministic SVG plots.

Formatting rules keep reruns byte-identical: floats go through repr
(shortest round-trip form), JSON keys are sorted, SVG coordinates are
fixed-precision and no file carries timestamps or wall-clock data.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

__all__ = ["write_csv", "write_metadata", "write_json", "write_svg", "emit"]

_PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
    "#9467bd", "#8c564b", "#17becf", "#7f7f7f",
)
_WIDTH, _HEIGHT = 720, 480
_MARGIN = {"left": 72, "right": 24, "top": 42, "bottom": 52}


def _fmt_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path, table):
    """One header row, one row per entry, LF newlines, repr floats."""
    names = list(table)
    length = max((len(col) for col in table.values()), default=0)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(names)
        for i in range(length):
            writer.writerow(
                _fmt_cell(table[name][i]) if i < len(table[name]) else ""
                for name in names
            )
    return Path(path)


def write_metadata(path, bundle):
    """Config echo + diagnostics sidecar (no wall time, see runner)."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        json.dump(bundle.metadata, handle, sort_keys=True, indent=2)
        handle.write("\n")
    return Path(path)


def write_json(path, bundle):
    """Whole bundle (metadata + tables) as one JSON document."""
    payload = {"metadata": bundle.metadata, "tables": bundle.tables}
    with open(path, "w", encoding="utf-8", newline="") as handle:
        json.dump(payload, handle, sort_keys=True, indent=2)
        handle.write("\n")
    return Path(path)


def _numeric_series(table):
    """(x_name, x, {name: column}) for plottable columns, or None."""
    names = list(table)
    if len(names) < 2:
        return None
    x_name = names[0]
    x = table[x_name]
    if len(x) < 2 or not all(isinstance(v, (int, float)) for v in x):
        return None
    series = {}
    for name in names[1:]:
        col = table[name]
        if all(isinstance(v, (int, float)) or v is None for v in col):
            if any(v is not None for v in col):
                series[name] = col
    return (x_name, x, series) if series else None


def _ticks(lo, hi, n=5):
    if hi <= lo:
        pad = max(abs(lo), 1.0) * 0.1
        lo, hi = lo - pad, hi + pad
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def write_svg(path, table, title=""):
    """Minimal line plot: first column on x, every numeric column as a line."""
    parsed = _numeric_series(table)
    if parsed is None:
        raise ValueError("table has no plottable numeric series")
    x_name, x, series = parsed
    xs = [float(v) for v in x]
    all_y = [float(v) for col in series.values() for v in col if v is not None]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(all_y), max(all_y)
    if y_hi <= y_lo:
        pad = max(abs(y_lo), 1.0) * 0.1
        y_lo, y_hi = y_lo - pad, y_hi + pad
    plot_w = _WIDTH - _MARGIN["left"] - _MARGIN["right"]
    plot_h = _HEIGHT - _MARGIN["top"] - _MARGIN["bottom"]

    def px(v):
        return _MARGIN["left"] + plot_w * (v - x_lo) / (x_hi - x_lo)

    def py(v):
        return _MARGIN["top"] + plot_h * (1.0 - (v - y_lo) / (y_hi - y_lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{_HEIGHT}" viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<rect x="{_MARGIN["left"]}" y="{_MARGIN["top"]}" width="{plot_w}" '
        f'height="{plot_h}" fill="none" stroke="black" stroke-width="1"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_WIDTH / 2:.1f}" y="24" text-anchor="middle" '
            f'font-family="sans-serif" font-size="15">{title}</text>'
        )
    for tick in _ticks(x_lo, x_hi):
        tx = px(tick)
        parts.append(
            f'<line x1="{tx:.3f}" y1="{_MARGIN["top"] + plot_h}" x2="{tx:.3f}" '
            f'y2="{_MARGIN["top"] + plot_h + 5}" stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{tx:.3f}" y="{_MARGIN["top"] + plot_h + 18}" '
            f'text-anchor="middle" font-family="sans-serif" font-size="11">'
            f"{tick:.4g}</text>"
        )
    for tick in _ticks(y_lo, y_hi):
        ty = py(tick)
        parts.append(
            f'<line x1="{_MARGIN["left"] - 5}" y1="{ty:.3f}" '
            f'x2="{_MARGIN["left"]}" y2="{ty:.3f}" stroke="black" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{_MARGIN["left"] - 8}" y="{ty + 4:.3f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{tick:.4g}</text>'
        )
    parts.append(
        f'<text x="{_MARGIN["left"] + plot_w / 2:.1f}" y="{_HEIGHT - 14}" '
        f'text-anchor="middle" font-family="sans-serif" font-size="13">{x_name}</text>'
    )
    for k, (name, col) in enumerate(series.items()):
        color = _PALETTE[k % len(_PALETTE)]
        segment = []
        chunks = []
        for xv, yv in zip(xs, col):
            if yv is None:
                if len(segment) > 1:
                    chunks.append(segment)
                segment = []
                continue
            segment.append(f"{px(xv):.3f},{py(float(yv)):.3f}")
        if len(segment) > 1:
            chunks.append(segment)
        for chunk in chunks:
            parts.append(
                f'<polyline points="{" ".join(chunk)}" fill="none" '
                f'stroke="{color}" stroke-width="1.5"/>'
            )
        parts.append(
            f'<text x="{_WIDTH - _MARGIN["right"] - 6}" '
            f'y="{_MARGIN["top"] + 16 + 15 * k}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("\n".join(parts))
        handle.write("\n")
    return Path(path)


def emit(bundle, out_dir, formats=("csv",)):
    """Write the bundle under out_dir in each requested format."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    formats = tuple(formats)
    if "csv" in formats:
        for name, table in bundle.tables.items():
            written.append(write_csv(out / f"{name}.csv", table))
    if "svg" in formats:
        for name, table in bundle.tables.items():
            if _numeric_series(table) is not None:
                written.append(write_svg(out / f"{name}.svg", table, title=name))
    if "json" in formats:
        written.append(write_json(out / "results.json", bundle))
    if "csv" in formats or "svg" in formats:
        written.append(write_metadata(out / "metadata.json", bundle))
    return written
