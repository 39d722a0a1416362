import logging
from typing import Dict, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

WIDTH, HEIGHT = 640, 400
MARGIN = 60
PALETTE = ('#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b')


def _scale(values: np.ndarray, low: float, high: float, start: float, stop: float) -> np.ndarray:
    if high == low:
        return np.full(values.shape, 0.5 * (start + stop))
    return start + (values - low) / (high - low) * (stop - start)


def line_plot_svg(series: Dict[str, Tuple[Sequence[float], Sequence[float]]], title: str = '',
                  x_label: str = 'n', y_label: str = '', log_y: bool = False) -> str:
    """
    Render named (x, y) series as an SVG line plot.

    Nonfinite points (and nonpositive ones on a log axis) are skipped.
    """
    cleaned = {}
    for name, (x, y) in series.items():
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        keep = np.isfinite(x) & np.isfinite(y)
        if log_y:
            keep &= y > 0
            y = np.where(keep, np.log10(np.where(y > 0, y, 1.0)), np.nan)
        cleaned[name] = (x[keep], y[keep])
    xs = np.concatenate([x for x, _ in cleaned.values()]) if cleaned else np.array([0.0])
    ys = np.concatenate([y for _, y in cleaned.values()]) if cleaned else np.array([0.0])
    if xs.size == 0:
        xs, ys = np.array([0.0]), np.array([0.0])
    x_low, x_high = float(xs.min()), float(xs.max())
    y_low, y_high = float(ys.min()), float(ys.max())

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:.1f}" y="24" text-anchor="middle" font-size="16">{title}</text>',
        f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
        f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 15}" text-anchor="middle" font-size="13">{x_label}</text>',
        f'<text x="18" y="{HEIGHT / 2:.1f}" text-anchor="middle" font-size="13" '
        f'transform="rotate(-90 18 {HEIGHT / 2:.1f})">{"log10 " if log_y else ""}{y_label}</text>',
        f'<text x="{MARGIN}" y="{HEIGHT - MARGIN + 18}" font-size="11">{x_low:.6g}</text>',
        f'<text x="{WIDTH - MARGIN}" y="{HEIGHT - MARGIN + 18}" text-anchor="end" font-size="11">{x_high:.6g}</text>',
        f'<text x="{MARGIN - 6}" y="{HEIGHT - MARGIN}" text-anchor="end" font-size="11">{y_low:.6g}</text>',
        f'<text x="{MARGIN - 6}" y="{MARGIN + 4}" text-anchor="end" font-size="11">{y_high:.6g}</text>',
    ]
    for index, (name, (x, y)) in enumerate(cleaned.items()):
        color = PALETTE[index % len(PALETTE)]
        px = _scale(x, x_low, x_high, MARGIN, WIDTH - MARGIN)
        py = _scale(y, y_low, y_high, HEIGHT - MARGIN, MARGIN)
        if px.size:
            path = ' '.join(f"{'M' if i == 0 else 'L'}{a:.2f},{b:.2f}" for i, (a, b) in enumerate(zip(px, py)))
            parts.append(f'<path d="{path}" fill="none" stroke="{color}" stroke-width="2"/>')
            for a, b in zip(px, py):
                parts.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="3" fill="{color}"/>')
        parts.append(f'<text x="{WIDTH - MARGIN - 4}" y="{MARGIN + 16 * (index + 1)}" text-anchor="end" '
                     f'font-size="12" fill="{color}">{name}</text>')
    parts.append('</svg>')
    return '\n'.join(parts) + '\n'


def write_line_plot(path: str, series, **kwargs) -> str:
    with open(path, 'w') as file:
        file.write(line_plot_svg(series, **kwargs))
    logger.info(f"Wrote {path}")
    return path
