"""Small native SVG line charts.

Fixed 800x600 canvas, linear or log-log axes, one polyline with
circle markers per series, a legend, and an optional annotation line
(for fitted slopes and the like).  Kept dependency-free on purpose:
runs emit a plot next to their CSVs without pulling in a plotting
stack, and the output is deterministic text so it can be checksummed
in the run manifest like everything else.
"""

import math
from xml.sax.saxutils import escape

WIDTH = 800
HEIGHT = 600
MARGIN_L = 80
MARGIN_R = 30
MARGIN_T = 50
MARGIN_B = 65

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2"]


def _nice_ticks(lo, hi, target=6):
    """Round tick positions covering [lo, hi] at a 1/2/2.5/5 step."""
    if hi <= lo:
        pad = 1.0 if lo == 0.0 else abs(lo) * 0.5
        lo, hi = lo - pad, hi + pad
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    step = 10.0 * mag
    for m in (1.0, 2.0, 2.5, 5.0, 10.0):
        if raw <= m * mag:
            step = m * mag
            break
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    v = first
    while v <= hi + step * 1e-9:
        ticks.append(0.0 if abs(v) < step * 1e-9 else v)
        v += step
    return ticks or [lo, hi]


def _log_ticks(lo, hi):
    """Decade ticks in log10 units, with 2x/5x fills on short ranges."""
    decades = [float(e) for e in range(math.floor(lo), math.ceil(hi) + 1)]
    inside = [t for t in decades if lo - 1e-9 <= t <= hi + 1e-9]
    if len(inside) >= 3:
        return inside
    fills = []
    for e in range(math.floor(lo) - 1, math.ceil(hi) + 1):
        for m in (2.0, 5.0):
            v = e + math.log10(m)
            if lo - 1e-9 <= v <= hi + 1e-9:
                fills.append(v)
    ticks = sorted(set(inside) | set(fills))
    return ticks or [lo, hi]


def _fmt_tick(v, log):
    x = 10.0 ** v if log else v
    s = f"{x:.4g}"
    return s


def _range(values):
    lo = min(values)
    hi = max(values)
    if hi <= lo:
        pad = 1.0 if lo == 0.0 else abs(lo) * 0.1
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


def emit_svg(series, labels, path, title="", xlabel="", ylabel="",
             loglog=False, annotation=None):
    """Write a line chart of the given series to path.

    series is a list of (xs, ys) pairs; labels names them in the
    legend.  With loglog=True both axes are log10 and nonpositive
    points are dropped.  Returns path.
    """
    if len(series) != len(labels):
        raise ValueError("series and labels must have equal length")
    data = []
    for xs, ys in series:
        pts = [(float(x), float(y)) for x, y in zip(xs, ys)]
        if loglog:
            pts = [(math.log10(x), math.log10(y)) for x, y in pts
                   if x > 0 and y > 0]
        data.append(pts)

    allpts = [pt for pts in data for pt in pts]
    out = []
    out.append('<svg xmlns="http://www.w3.org/2000/svg" '
               f'width="{WIDTH}" height="{HEIGHT}" '
               f'viewBox="0 0 {WIDTH} {HEIGHT}">')
    out.append(f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" '
               'fill="#ffffff"/>')
    px0, px1 = MARGIN_L, WIDTH - MARGIN_R
    py0, py1 = HEIGHT - MARGIN_B, MARGIN_T

    if title:
        out.append(f'<text x="{WIDTH // 2}" y="28" font-family="sans-serif" '
                   f'font-size="18" text-anchor="middle">{escape(title)}</text>')

    if not allpts:
        out.append(f'<text x="{WIDTH // 2}" y="{HEIGHT // 2}" '
                   'font-family="sans-serif" font-size="16" '
                   'text-anchor="middle">no plottable points</text>')
        out.append("</svg>")
        _write(path, out)
        return path

    xlo, xhi = _range([pt[0] for pt in allpts])
    ylo, yhi = _range([pt[1] for pt in allpts])

    def sx(v):
        return px0 + (v - xlo) / (xhi - xlo) * (px1 - px0)

    def sy(v):
        return py0 - (v - ylo) / (yhi - ylo) * (py0 - py1)

    xticks = _log_ticks(xlo, xhi) if loglog else _nice_ticks(xlo, xhi)
    yticks = _log_ticks(ylo, yhi) if loglog else _nice_ticks(ylo, yhi)
    for v in xticks:
        X = sx(v)
        out.append(f'<line x1="{X:.2f}" y1="{py0}" x2="{X:.2f}" y2="{py1}" '
                   'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<line x1="{X:.2f}" y1="{py0}" x2="{X:.2f}" y2="{py0 + 6}" '
                   'stroke="#333333" stroke-width="1"/>')
        out.append(f'<text x="{X:.2f}" y="{py0 + 22}" font-family="sans-serif" '
                   f'font-size="12" text-anchor="middle">'
                   f'{escape(_fmt_tick(v, loglog))}</text>')
    for v in yticks:
        Y = sy(v)
        out.append(f'<line x1="{px0}" y1="{Y:.2f}" x2="{px1}" y2="{Y:.2f}" '
                   'stroke="#dddddd" stroke-width="1"/>')
        out.append(f'<line x1="{px0 - 6}" y1="{Y:.2f}" x2="{px0}" y2="{Y:.2f}" '
                   'stroke="#333333" stroke-width="1"/>')
        out.append(f'<text x="{px0 - 10}" y="{Y + 4:.2f}" '
                   'font-family="sans-serif" font-size="12" '
                   f'text-anchor="end">{escape(_fmt_tick(v, loglog))}</text>')

    out.append(f'<rect x="{px0}" y="{py1}" width="{px1 - px0}" '
               f'height="{py0 - py1}" fill="none" stroke="#333333" '
               'stroke-width="1.5"/>')
    if xlabel:
        out.append(f'<text x="{(px0 + px1) // 2}" y="{HEIGHT - 18}" '
                   'font-family="sans-serif" font-size="14" '
                   f'text-anchor="middle">{escape(xlabel)}</text>')
    if ylabel:
        cx, cy = 22, (py0 + py1) // 2
        out.append(f'<text x="{cx}" y="{cy}" font-family="sans-serif" '
                   f'font-size="14" text-anchor="middle" '
                   f'transform="rotate(-90 {cx} {cy})">{escape(ylabel)}</text>')

    for i, pts in enumerate(data):
        if not pts:
            continue
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        if len(pts) > 1:
            out.append(f'<polyline points="{coords}" fill="none" '
                       f'stroke="{color}" stroke-width="2"/>')
        for x, y in pts:
            out.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="3" '
                       f'fill="{color}"/>')

    lx, ly = px1 - 220, py1 + 14
    for i, label in enumerate(labels):
        color = PALETTE[i % len(PALETTE)]
        Y = ly + 18 * i
        out.append(f'<line x1="{lx}" y1="{Y - 4}" x2="{lx + 24}" y2="{Y - 4}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 30}" y="{Y}" font-family="sans-serif" '
                   f'font-size="13">{escape(str(label))}</text>')

    if annotation:
        out.append(f'<text x="{px0 + 10}" y="{py1 + 18}" '
                   'font-family="sans-serif" font-size="13" '
                   f'fill="#555555">{escape(annotation)}</text>')
    out.append("</svg>")
    _write(path, out)
    return path


def _write(path, lines):
    with open(path, "wb") as fh:
        fh.write(("\n".join(lines) + "\n").encode())
