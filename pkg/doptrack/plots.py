from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence, Union
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 640, 480
MARGIN = 60
PLOT_W, PLOT_H = WIDTH - 2 * MARGIN, HEIGHT - 2 * MARGIN
TICKS = 5


class Series(NamedTuple):
    label: str
    x: Sequence[float]
    y: Sequence[float]
    color: str


def _bounds(values: np.ndarray):
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _fmt(value: float) -> str:
    return f"{value:.3g}"


def line_plot(
    series: List[Series],
    title: str,
    xlabel: str,
    ylabel: str,
    equal_aspect: bool = False,
    steps: bool = False,
) -> str:
    """
    Polyline chart as an SVG document.

    ``equal_aspect`` keeps meters square on both axes; ``steps`` draws each
    series as a staircase (for empirical CDFs).
    """
    xs = np.concatenate([np.asarray(s.x, dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s.y, dtype=float) for s in series])
    x_lo, x_hi = _bounds(xs[np.isfinite(xs)])
    y_lo, y_hi = _bounds(ys[np.isfinite(ys)])

    if equal_aspect:
        span = max((x_hi - x_lo) / PLOT_W, (y_hi - y_lo) / PLOT_H)
        x_mid, y_mid = (x_lo + x_hi) / 2, (y_lo + y_hi) / 2
        x_lo, x_hi = x_mid - span * PLOT_W / 2, x_mid + span * PLOT_W / 2
        y_lo, y_hi = y_mid - span * PLOT_H / 2, y_mid + span * PLOT_H / 2

    parts, px, py = _axes(title, xlabel, ylabel, (x_lo, x_hi), (y_lo, y_hi))

    for i, s in enumerate(series):
        x, y = np.asarray(s.x, dtype=float), np.asarray(s.y, dtype=float)
        keep = np.isfinite(x) & np.isfinite(y)
        x, y = x[keep], y[keep]
        if steps and len(x) > 1:
            x = np.repeat(x, 2)[1:]
            y = np.repeat(y, 2)[:-1]
        points = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(x), py(y)))
        parts.append(
            f'<polyline points="{points}" fill="none" stroke="{s.color}" stroke-width="1.5"/>'
        )
        legend_y = MARGIN + 15 + 16 * i
        parts.append(
            f'<line x1="{WIDTH - MARGIN - 110}" y1="{legend_y - 4}" '
            f'x2="{WIDTH - MARGIN - 90}" y2="{legend_y - 4}" stroke="{s.color}" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{WIDTH - MARGIN - 85}" y="{legend_y}">{escape(s.label)}</text>'
        )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _axes(title: str, xlabel: str, ylabel: str, x_range, y_range):
    """Background, frame, ticks and labels, with the data-to-pixel maps."""
    x_lo, x_hi = x_range
    y_lo, y_hi = y_range

    def px(x):
        return MARGIN + (np.asarray(x, dtype=float) - x_lo) / (x_hi - x_lo) * PLOT_W

    def py(y):
        return HEIGHT - MARGIN - (np.asarray(y, dtype=float) - y_lo) / (y_hi - y_lo) * PLOT_H

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" text-anchor="middle" font-size="14">'
        f"{escape(title)}</text>",
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{PLOT_W}" height="{PLOT_H}" '
        'fill="none" stroke="black"/>',
    ]

    for value in np.linspace(x_lo, x_hi, TICKS):
        x = px(value)
        parts.append(
            f'<line x1="{x:.2f}" y1="{HEIGHT - MARGIN}" x2="{x:.2f}" y2="{HEIGHT - MARGIN + 5}" '
            'stroke="black"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{HEIGHT - MARGIN + 18}" text-anchor="middle">{_fmt(value)}</text>'
        )
    for value in np.linspace(y_lo, y_hi, TICKS):
        y = py(value)
        parts.append(
            f'<line x1="{MARGIN - 5}" y1="{y:.2f}" x2="{MARGIN}" y2="{y:.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{MARGIN - 8}" y="{y + 4:.2f}" text-anchor="end">{_fmt(value)}</text>'
        )

    parts.append(
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 15}" text-anchor="middle">{escape(xlabel)}</text>'
    )
    parts.append(
        f'<text x="15" y="{HEIGHT / 2}" text-anchor="middle" '
        f'transform="rotate(-90 15 {HEIGHT / 2})">{escape(ylabel)}</text>'
    )

    return parts, px, py


def write_svg(path: Union[str, Path], document: str) -> None:
    Path(path).write_text(document)


def trajectory_overlay(truth: np.ndarray, reconstruction: np.ndarray) -> str:
    return line_plot(
        [
            Series("truth", truth[:, 0], truth[:, 1], "#1f77b4"),
            Series("reconstruction", reconstruction[:, 0], reconstruction[:, 1], "#d62728"),
        ],
        title="Trajectory",
        xlabel="x (m)",
        ylabel="y (m)",
        equal_aspect=True,
    )


def error_cdf(x: np.ndarray, p: np.ndarray) -> str:
    return line_plot(
        [Series("CDF", x, p, "#1f77b4")],
        title="Tracking error CDF",
        xlabel="position error (m)",
        ylabel="probability",
        steps=True,
    )


def doppler_tracks(
    times: np.ndarray,
    raw: np.ndarray,
    smoothed: np.ndarray,
    truth: Optional[np.ndarray] = None,
    receiver: int = 0,
) -> str:
    """Raw CFAR peaks against the Kalman output of one receiver; misses are NaN in ``raw``."""
    series = [
        Series("raw", times, raw, "#7f7f7f"),
        Series("smoothed", times, smoothed, "#d62728"),
    ]
    if truth is not None:
        series.append(Series("truth", times, truth, "#1f77b4"))
    return line_plot(
        series,
        title=f"Doppler track, receiver {receiver}",
        xlabel="time (s)",
        ylabel="Doppler (Hz)",
    )


def caf_heatmap(
    times: np.ndarray,
    frequencies: np.ndarray,
    amplitudes: np.ndarray,
    receiver: int = 0,
    floor_db: float = -30.0,
    max_columns: int = 200,
) -> str:
    """
    Doppler-time intensity map of CAF magnitudes, shape (windows, Doppler cells).

    Every window is scaled to its own peak and shaded in dB down to
    ``floor_db``. Windows are decimated to at most ``max_columns``.
    """
    times = np.asarray(times, dtype=float)
    frequencies = np.asarray(frequencies, dtype=float)
    amplitudes = np.asarray(amplitudes, dtype=float)
    stride = max(1, int(np.ceil(len(times) / max_columns)))
    times, amplitudes = times[::stride], amplitudes[::stride]

    peak = amplitudes.max(axis=1, keepdims=True)
    db = 20 * np.log10(np.maximum(amplitudes, 1e-300) / np.where(peak > 0, peak, 1.0))
    shade = np.round(255 * np.clip(db / floor_db, 0.0, 1.0)).astype(int)

    dt = times[1] - times[0] if len(times) > 1 else 1.0
    df = frequencies[1] - frequencies[0] if len(frequencies) > 1 else 1.0
    parts, px, py = _axes(
        f"CAF, receiver {receiver}",
        "time (s)",
        "Doppler (Hz)",
        (times[0] - dt / 2, times[-1] + dt / 2),
        (frequencies[0] - df / 2, frequencies[-1] + df / 2),
    )

    left, right = px(times - dt / 2), px(times + dt / 2)
    top, bottom = py(frequencies + df / 2), py(frequencies - df / 2)
    for i in range(len(times)):
        for f in range(len(frequencies)):
            v = shade[i, f]
            parts.append(
                f'<rect x="{left[i]:.2f}" y="{top[f]:.2f}" width="{right[i] - left[i]:.2f}" '
                f'height="{bottom[f] - top[f]:.2f}" fill="rgb({v},{v},{v})"/>'
            )

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
