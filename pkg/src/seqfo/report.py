"""Flat-file outputs: trajectory CSV, summary text and SVG power plots."""

import csv
from pathlib import Path

import numpy as np


def trajectory_header(p, m):
    return (["k", "outer"] + [f"u_{i}" for i in range(p)] + [f"y_{i}" for i in range(m)]
            + ["cost", "total_power", "n_lin", "n_fwd", "elapsed_s"])


def _num(v):
    return repr(float(v))


def write_trajectory_csv(log, path, record_time=False):
    """One row per gradient step. ``elapsed_s`` is left empty unless timing was recorded."""
    path = Path(path)
    p = log.inputs.shape[1]
    m = log.outputs.shape[1]
    power = log.total_power
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(trajectory_header(p, m))
        for i in range(len(log)):
            row = [int(log.k[i]), int(log.outer[i])]
            row += [_num(v) for v in log.inputs[i]]
            row += [_num(v) for v in log.outputs[i]]
            row += [_num(log.cost[i]), _num(power[i]), int(log.n_lin[i]), int(log.n_fwd[i])]
            row.append(_num(log.elapsed[i]) if record_time else "")
            writer.writerow(row)
    return path


def steady_value(series, fraction=0.1):
    """Mean over the final ``fraction`` of a series (at least one sample)."""
    series = np.asarray(series, dtype=float)
    count = max(1, int(round(fraction * series.size)))
    return float(series[-count:].mean())


def tail_error(inputs, optimum, fraction=0.1):
    """Largest distance to ``optimum`` over the final ``fraction`` of the inputs."""
    inputs = np.asarray(inputs, dtype=float)
    count = max(1, int(round(fraction * len(inputs))))
    return float(np.max(np.linalg.norm(inputs[-count:] - np.asarray(optimum), axis=1)))


def moving_average(values, window):
    """Centred moving average; the window shrinks near the ends."""
    values = np.asarray(values, dtype=float)
    half = window // 2
    csum = np.concatenate([[0.0], np.cumsum(values)])
    idx = np.arange(values.size)
    lo = np.maximum(0, idx - half)
    hi = np.minimum(values.size, idx + half + 1)
    return (csum[hi] - csum[lo]) / (hi - lo)


_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def write_power_svg(path, series, title="total power", ylabel="power [W]",
                    width=720, height=420):
    """Dependency-free SVG line chart.

    ``series`` maps a label to a 1-D array drawn against its index. Each
    series is drawn raw (thin, translucent) and as a centred moving average
    with window max(5, 1% of its length).
    """
    margin_l, margin_r, margin_t, margin_b = 80, 20, 40, 50
    pw = width - margin_l - margin_r
    ph = height - margin_t - margin_b
    arrays = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    n_max = max(max(a.size for a in arrays.values()), 2)
    lo = min(float(np.min(a)) for a in arrays.values())
    hi = max(float(np.max(a)) for a in arrays.values())
    if hi <= lo:
        hi = lo + 1.0
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    def sx(i):
        return margin_l + pw * i / (n_max - 1)

    def sy(v):
        return margin_t + ph * (1.0 - (v - lo) / (hi - lo))

    def polyline(a, color, opacity, stroke):
        step = max(1, a.size // 2000)
        pts = " ".join(f"{sx(i):.2f},{sy(a[i]):.2f}" for i in range(0, a.size, step))
        return (f'<polyline fill="none" stroke="{color}" stroke-opacity="{opacity}" '
                f'stroke-width="{stroke}" points="{pts}"/>')

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="12">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
           f'<line x1="{margin_l}" y1="{margin_t + ph}" x2="{margin_l + pw}" y2="{margin_t + ph}" stroke="black"/>',
           f'<line x1="{margin_l}" y1="{margin_t}" x2="{margin_l}" y2="{margin_t + ph}" stroke="black"/>']
    for t in np.linspace(lo, hi, 5):
        out.append(f'<text x="{margin_l - 6}" y="{sy(t) + 4:.2f}" text-anchor="end">{t:.4g}</text>')
    for t in np.linspace(0, n_max - 1, 5):
        out.append(f'<text x="{sx(t):.2f}" y="{margin_t + ph + 18}" text-anchor="middle">{int(t)}</text>')
    out.append(f'<text x="{margin_l + pw / 2}" y="{height - 10}" text-anchor="middle">k</text>')
    out.append(f'<text x="16" y="{margin_t + ph / 2}" transform="rotate(-90 16 {margin_t + ph / 2})" '
               f'text-anchor="middle">{ylabel}</text>')
    for idx, (label, a) in enumerate(arrays.items()):
        color = _COLORS[idx % len(_COLORS)]
        window = max(5, a.size // 100)
        out.append(polyline(a, color, 0.3, 1))
        out.append(polyline(moving_average(a, window), color, 1.0, 2))
        ly = margin_t + 10 + 16 * idx
        out.append(f'<line x1="{margin_l + pw - 150}" y1="{ly}" x2="{margin_l + pw - 130}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{margin_l + pw - 125}" y="{ly + 4}">{label}</text>')
    out.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(out) + "\n")
    return path
