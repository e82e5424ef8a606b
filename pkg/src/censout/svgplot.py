"""Deterministic normal QQ plot of outlying scores as a standalone SVG.

Sorted scores are plotted against standard-normal quantiles at the midpoint
positions (i - 0.5)/n.  Event observations are drawn as circles, censored ones
as plus marks built from paths, so no font is involved and identical inputs
yield identical bytes.  A solid reference line passes through the first and
third quartiles of the two coordinate sets, and an optional dashed horizontal
line marks the score cut-off.
"""

from __future__ import annotations

import numpy as np

from .data import format_number
from .gaussian import norm_ppf

WIDTH = 600.0
HEIGHT = 600.0
MARGIN = 40.0
GLYPH = 4.0

_EVENT_STROKE = "#000000"
_CENSOR_STROKE = "#000000"
_REFERENCE_STROKE = "red"
_THRESHOLD_STROKE = "#666666"


def _axis_range(lo: float, hi: float) -> tuple[float, float]:
    if hi > lo:
        pad = 0.05 * (hi - lo)
    else:
        pad = 1.0
    return lo - pad, hi + pad


def _scale(value: np.ndarray | float, lo: float, hi: float, flip: bool):
    span = HEIGHT if flip else WIDTH
    frac = (np.asarray(value, dtype=float) - lo) / (hi - lo)
    pixels = MARGIN + frac * (span - 2.0 * MARGIN)
    return span - pixels if flip else pixels


def render_qq_svg(scores, statuses, k_s: float | None = None) -> bytes:
    """The QQ plot as SVG bytes; pure function of its arguments."""
    s = np.asarray(scores, dtype=float)
    st = np.asarray(statuses, dtype=int)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("scores must be a nonempty vector")
    if st.shape != s.shape:
        raise ValueError("statuses must match scores in length")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores must be finite")
    n = s.size
    order = np.argsort(s, kind="stable")
    sample = s[order]
    status_sorted = st[order]
    theo = norm_ppf((np.arange(1, n + 1) - 0.5) / n)

    xlo, xhi = _axis_range(float(theo[0]), float(theo[-1]))
    ylo, yhi = _axis_range(float(sample[0]), float(sample[-1]))

    def fx(v):
        return _scale(v, xlo, xhi, flip=False)

    def fy(v):
        return _scale(v, ylo, yhi, flip=True)

    inner = WIDTH - 2.0 * MARGIN
    parts = [
        '<svg xmlns="http://www.w3.org/2000/svg" '
        f'width="{format_number(WIDTH)}" height="{format_number(HEIGHT)}" '
        f'viewBox="0 0 {format_number(WIDTH)} {format_number(HEIGHT)}">',
        "<defs>",
        f'<clipPath id="plot-area"><rect x="{format_number(MARGIN)}" '
        f'y="{format_number(MARGIN)}" width="{format_number(inner)}" '
        f'height="{format_number(inner)}"/></clipPath>',
        "</defs>",
        f'<rect class="frame" x="{format_number(MARGIN)}" y="{format_number(MARGIN)}" '
        f'width="{format_number(inner)}" height="{format_number(inner)}" '
        'fill="none" stroke="#000000" stroke-width="1"/>',
        '<g clip-path="url(#plot-area)">',
    ]

    xq1, xq3 = np.percentile(theo, [25.0, 75.0])
    yq1, yq3 = np.percentile(sample, [25.0, 75.0])
    if float(xq3) > float(xq1):
        slope = (float(yq3) - float(yq1)) / (float(xq3) - float(xq1))
        intercept = float(yq1) - slope * float(xq1)
        parts.append(
            '<line class="reference" '
            f'x1="{format_number(fx(xlo))}" y1="{format_number(fy(slope * xlo + intercept))}" '
            f'x2="{format_number(fx(xhi))}" y2="{format_number(fy(slope * xhi + intercept))}" '
            f'stroke="{_REFERENCE_STROKE}" stroke-width="1.5" '
            f'data-slope="{format_number(slope)}" '
            f'data-intercept="{format_number(intercept)}"/>'
        )
    if k_s is not None:
        ypix = format_number(fy(float(k_s)))
        parts.append(
            '<line class="threshold" '
            f'x1="{format_number(MARGIN)}" y1="{ypix}" '
            f'x2="{format_number(WIDTH - MARGIN)}" y2="{ypix}" '
            f'stroke="{_THRESHOLD_STROKE}" stroke-width="1" '
            f'stroke-dasharray="6 4" data-k-s="{format_number(float(k_s))}"/>'
        )
    parts.append("</g>")

    parts.append('<g class="points">')
    xs = fx(theo)
    ys = fy(sample)
    for i in range(n):
        cx, cy = format_number(xs[i]), format_number(ys[i])
        if status_sorted[i] == 1:
            parts.append(
                f'<circle class="event" cx="{cx}" cy="{cy}" r="{format_number(GLYPH)}" '
                f'fill="none" stroke="{_EVENT_STROKE}" stroke-width="1" '
                f'data-cx="{cx}" data-cy="{cy}"/>'
            )
        else:
            x0 = format_number(xs[i] - GLYPH)
            x1 = format_number(xs[i] + GLYPH)
            y0 = format_number(ys[i] - GLYPH)
            y1 = format_number(ys[i] + GLYPH)
            parts.append(
                f'<path class="censored" d="M {x0} {cy} L {x1} {cy} '
                f'M {cx} {y0} L {cx} {y1}" '
                f'stroke="{_CENSOR_STROKE}" stroke-width="1" fill="none" '
                f'data-cx="{cx}" data-cy="{cy}"/>'
            )
    parts.append("</g>")
    parts.append("</svg>")
    return ("\n".join(parts) + "\n").encode("ascii")


def qq_plot_svg(scores, statuses, k_s: float | None, out) -> bytes:
    """Render and write the QQ plot; returns the bytes written."""
    raw = render_qq_svg(scores, statuses, k_s)
    with open(out, "wb") as fh:
        fh.write(raw)
    return raw
