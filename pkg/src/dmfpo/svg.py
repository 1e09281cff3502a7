"""Deterministic SVG heatmaps of fidelity profiles.

The CSV-equivalent ``gamma,tau,fidelity`` rows are embedded in the
``<metadata>`` element, so a plot can be re-derived from the file alone.
"""

import re
from xml.sax.saxutils import escape

import numpy as np
from matplotlib import colormaps

N_COLORS = 256
CELL = 12
MARGIN_LEFT, MARGIN_TOP, MARGIN_BOTTOM = 70, 40, 50
BAR_WIDTH = 16

_RAMP = [
    "#%02x%02x%02x" % tuple(int(round(255 * c)) for c in rgba[:3])
    for rgba in colormaps["viridis"](np.linspace(0.0, 1.0, N_COLORS))
]


def color(value, vmin=0.999, vmax=1.0):
    """Ramp color for ``value``; values outside ``[vmin, vmax]`` are clipped."""
    x = (min(max(value, vmin), vmax) - vmin) / (vmax - vmin)
    return _RAMP[min(int(x * N_COLORS), N_COLORS - 1)]


def heatmap(profile, vmin=0.999, vmax=1.0, title="fidelity"):
    """SVG text for a :class:`~dmfpo.fpo.FidelityProfile` (tau across, gamma up)."""
    if not vmax > vmin:
        raise ValueError("vmax must exceed vmin")
    ng, nt = profile.values.shape
    width = MARGIN_LEFT + nt * CELL + 3 * BAR_WIDTH + 60
    height = MARGIN_TOP + ng * CELL + MARGIN_BOTTOM
    rows = "\n".join(f"{g!r},{t!r},{f!r}" for g, t, f in profile.rows())
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<metadata id="profile-data" data-vmin="{vmin!r}" data-vmax="{vmax!r}">'
        f"<![CDATA[\ngamma,tau,fidelity\n{rows}\n]]></metadata>",
        f'<text x="{MARGIN_LEFT}" y="20" font-family="sans-serif" font-size="14">'
        f"{escape(title)} (min {profile.min:.6f})</text>",
        '<g shape-rendering="crispEdges">',
    ]
    y0 = MARGIN_TOP + ng * CELL
    for i in range(ng):
        for j in range(nt):
            out.append(f'<rect x="{MARGIN_LEFT + j * CELL}" y="{y0 - (i + 1) * CELL}" '
                       f'width="{CELL}" height="{CELL}" fill="{color(profile.values[i, j], vmin, vmax)}"/>')
    out.append("</g>")
    # axes labels
    g_axis, t_axis = profile.gamma_axis, profile.tau_axis
    out.append(f'<text x="{MARGIN_LEFT}" y="{y0 + 18}" font-family="sans-serif" font-size="11">'
               f"tau {t_axis[0]:g}</text>")
    out.append(f'<text x="{MARGIN_LEFT + nt * CELL}" y="{y0 + 18}" font-family="sans-serif" '
               f'font-size="11" text-anchor="end">{t_axis[-1]:g}</text>')
    out.append(f'<text x="{MARGIN_LEFT - 6}" y="{y0}" font-family="sans-serif" font-size="11" '
               f'text-anchor="end">gamma {g_axis[0]:g}</text>')
    out.append(f'<text x="{MARGIN_LEFT - 6}" y="{MARGIN_TOP + 10}" font-family="sans-serif" '
               f'font-size="11" text-anchor="end">{g_axis[-1]:g}</text>')
    # colour bar, one 1-px band per ramp step
    bx = MARGIN_LEFT + nt * CELL + BAR_WIDTH
    bar_h = ng * CELL
    out.append('<g shape-rendering="crispEdges">')
    for k in range(N_COLORS):
        y = MARGIN_TOP + bar_h * (N_COLORS - 1 - k) / N_COLORS
        out.append(f'<rect x="{bx}" y="{y:.3f}" width="{BAR_WIDTH}" '
                   f'height="{bar_h / N_COLORS + 0.05:.3f}" fill="{_RAMP[k]}"/>')
    out.append("</g>")
    out.append(f'<text x="{bx + BAR_WIDTH + 4}" y="{MARGIN_TOP + 10}" font-family="sans-serif" '
               f'font-size="11">{vmax:g}</text>')
    out.append(f'<text x="{bx + BAR_WIDTH + 4}" y="{y0}" font-family="sans-serif" '
               f'font-size="11">{vmin:g}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


_CDATA = re.compile(r"<!\[CDATA\[\n(.*?)\n\]\]>", re.S)


def embedded_rows(svg_text):
    """``(gamma, tau, fidelity)`` rows recovered from a heatmap's metadata."""
    m = _CDATA.search(svg_text)
    if m is None:
        raise ValueError("no embedded profile data")
    lines = m.group(1).splitlines()
    if lines[0] != "gamma,tau,fidelity":
        raise ValueError("unexpected metadata header")
    return [tuple(float(v) for v in ln.split(",")) for ln in lines[1:] if ln]
