"""Hand-written SVG for the profile curve, its dual and the bifurcation diagram.

Three panes side by side: (f, Lambda), (a, k) with the asymptote lines at the
zeros of f', and (h, k) with the asymptote parabolas.  Output depends only on
the input data, so identical inputs give byte-identical documents.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

PANE = 320
MARGIN = 44
GAP = 24
TYPE_COLORS = {"Elliptic": "#1f77b4", "Hyperbolic": "#d62728", "Parabolic": "#9467bd",
               "EllipticFork": "#2ca02c", None: "#444444"}


def nice_ticks(lo: float, hi: float, target: int = 5):
    """Round tick positions covering [lo, hi]."""
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        step = m * mag
        if step >= raw:
            break
    start = math.ceil(lo / step - 1e-9) * step
    ticks = []
    x = start
    while x <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(x) < 1e-12 * step else x)
        x += step
    return ticks


def _fmt_tick(x: float) -> str:
    return ("%.4g" % x).replace("-", "−")


class Pane:
    def __init__(self, x0: float, title: str, xlabel: str, ylabel: str, xr, yr):
        self.x0 = x0
        self.title = title
        self.xlabel, self.ylabel = xlabel, ylabel
        self.xr = _pad(xr)
        self.yr = _pad(yr)
        self.items = []

    def X(self, x):
        a, b = self.xr
        return self.x0 + MARGIN + (np.asarray(x) - a) / (b - a) * (PANE - MARGIN - 8)

    def Y(self, y):
        a, b = self.yr
        return 8 + (PANE - MARGIN - 8) * (1 - (np.asarray(y) - a) / (b - a))

    def inside(self, x, y):
        return (x >= self.xr[0]) & (x <= self.xr[1]) & (y >= self.yr[0]) & (y <= self.yr[1])

    def polyline(self, x, y, color, dashed=False, cls="arc", label=""):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ok = self.inside(x, y) & np.isfinite(x) & np.isfinite(y)
        runs = []
        cur = []
        for i in range(len(x)):
            if ok[i]:
                cur.append((float(self.X(x[i])), float(self.Y(y[i]))))
            elif cur:
                runs.append(cur)
                cur = []
        if cur:
            runs.append(cur)
        dash = ' stroke-dasharray="5,4"' if dashed else ""
        title = "<title>%s</title>" % label if label else ""
        for run in runs:
            if len(run) < 2:
                continue
            pts = " ".join("%.2f,%.2f" % p for p in run)
            self.items.append('<polyline class="%s" fill="none" stroke="%s" stroke-width="1.6"%s points="%s">%s</polyline>'
                              % (cls, color, dash, pts, title))

    def marker(self, x, y, cls, color, label=""):
        if not bool(self.inside(np.float64(x), np.float64(y))):
            return
        self.items.append('<circle class="%s" cx="%.2f" cy="%.2f" r="3.5" fill="%s" data-x="%.6g" data-y="%.6g"><title>%s</title></circle>'
                          % (cls, float(self.X(x)), float(self.Y(y)), color, x, y, label))

    def render(self):
        out = ['<g class="pane">']
        left, right = self.x0 + MARGIN, self.x0 + PANE - 8
        top, bottom = 8, PANE - MARGIN
        out.append('<rect x="%.2f" y="%.2f" width="%.2f" height="%.2f" fill="white" stroke="#888"/>'
                   % (left, top, right - left, bottom - top))
        for t in nice_ticks(*self.xr):
            px = float(self.X(t))
            out.append('<line class="tick" x1="%.2f" y1="%.2f" x2="%.2f" y2="%.2f" stroke="#888"/>' % (px, bottom, px, bottom + 4))
            out.append('<text x="%.2f" y="%.2f" font-size="9" text-anchor="middle">%s</text>' % (px, bottom + 14, _fmt_tick(t)))
        for t in nice_ticks(*self.yr):
            py = float(self.Y(t))
            out.append('<line class="tick" x1="%.2f" y1="%.2f" x2="%.2f" y2="%.2f" stroke="#888"/>' % (left - 4, py, left, py))
            out.append('<text x="%.2f" y="%.2f" font-size="9" text-anchor="end">%s</text>' % (left - 6, py + 3, _fmt_tick(t)))
        out.append('<text x="%.2f" y="%.2f" font-size="11" text-anchor="middle">%s</text>'
                   % (0.5 * (left + right), PANE - 12, self.xlabel))
        out.append('<text x="%.2f" y="%.2f" font-size="11" text-anchor="middle" transform="rotate(-90 %.2f %.2f)">%s</text>'
                   % (self.x0 + 12, 0.5 * (top + bottom), self.x0 + 12, 0.5 * (top + bottom), self.ylabel))
        out.append('<text x="%.2f" y="%.2f" font-size="11" text-anchor="middle" font-weight="bold">%s</text>'
                   % (0.5 * (left + right), PANE + 4, self.title))
        out.extend(self.items)
        out.append("</g>")
        return out


def _pad(r, frac: float = 0.06):
    a, b = float(r[0]), float(r[1])
    if not (math.isfinite(a) and math.isfinite(b)):
        a, b = -1.0, 1.0
    if b - a < 1e-12:
        a, b = a - 0.5 * max(abs(a), 1.0), b + 0.5 * max(abs(b), 1.0)
    d = (b - a) * frac
    return (a - d, b + d)


def _range(values, lo_q: float = 0.0, hi_q: float = 100.0):
    v = np.concatenate([np.asarray(x, dtype=float).ravel() for x in values]) if values else np.array([])
    v = v[np.isfinite(v)]
    if v.size == 0:
        return (-1.0, 1.0)
    return (float(np.percentile(v, lo_q)), float(np.percentile(v, hi_q)))


def render_svg(pair=None, diagram=None, h_max: Optional[float] = None, samples: int = 400) -> str:
    """Three-pane document; with no input only the empty axes are drawn."""
    panes = []
    if pair is None or diagram is None:
        for i, (t, xl, yl) in enumerate((("profile", "f", "Λ"), ("dual", "a", "k"),
                                        ("bifurcation diagram", "h", "k"))):
            panes.append(Pane(i * (PANE + GAP), t, xl, yl, (0.0, 1.0), (0.0, 1.0)))
        return _document(panes)

    from .bifdiag import gamma_curves
    from .singularity import circle_type_intervals
    L = pair.L
    cs = pair.critical_sets()
    dual, _ = gamma_curves(pair, samples)

    # profile pane
    r = np.linspace(0.0, L, samples)
    f, lam = pair.f(r), pair.lam(r)
    p1 = Pane(0, "profile", "f", "Λ", (float(f.min()), float(f.max())), (float(lam.min()), float(lam.max())))
    for lo, hi, kind in circle_type_intervals(pair):
        rr = np.linspace(lo, hi, samples)
        p1.polyline(pair.f(rr), pair.lam(rr), TYPE_COLORS.get(kind), label=kind)
    for x in cs.rCirc.values:
        p1.marker(float(pair.f(x)), float(pair.lam(x)), "inflection", "#000", "inflection r=%.6g" % x)

    # dual pane: clip to the bulk of the samples
    a_all = [arc.a for arc in dual.arcs]
    k_all = [arc.k for arc in dual.arcs]
    ar, kr = _range(a_all, 3, 97), _range(k_all, 3, 97)
    p2 = Pane(PANE + GAP, "dual", "a", "k", ar, kr)
    types = circle_type_intervals(pair)
    for lo, hi, kind in types:
        rr = np.linspace(lo, hi, samples)
        rr = rr[np.all([np.abs(rr - x) > 1e-4 * L for x in cs.rI.values], axis=0)] if cs.rI.values else rr
        p2.polyline(pair.a(rr), pair.k(rr), TYPE_COLORS.get(kind), label=kind)
    for pm in dual.poles:
        aa = np.linspace(p2.xr[0], p2.xr[1], 50)
        # asymptote f(r_i)*a - Lambda(r_i) + k = 0
        p2.polyline(aa, pm.intercept + pm.slope * aa, "#777", dashed=True, cls="asymptote",
                    label="asymptote r=%.6g" % pm.r)
    for x in cs.rCirc.values:
        p2.marker(float(pair.a(x)), float(pair.k(x)), "cusp", "#000", "cusp r=%.6g" % x)

    # diagram pane
    if h_max is None:
        hc = [c[0] for c in diagram.cusps] + [c.point[0] for c in diagram.self_intersections]
        h_max = 2.0 * max(hc) if hc else 1.0
    ks = [diagram.gamma2[0], diagram.gamma2[1]]
    for arc in diagram.gamma1_arcs:
        m = arc.h <= h_max
        ks.extend(arc.k[m].tolist())
    p3 = Pane(2 * (PANE + GAP), "bifurcation diagram", "h", "k", (0.0, h_max), (min(ks), max(ks)))
    for lo, hi, kind in types:
        rr = np.linspace(lo, hi, 4 * samples)
        if cs.rI.values:
            rr = rr[np.all([np.abs(rr - x) > 1e-4 * L for x in cs.rI.values], axis=0)]
        hh, kk = pair.hk(rr)
        p3.polyline(hh, kk, TYPE_COLORS.get(kind), label=kind)
    p3.polyline([0.0, 0.0], list(diagram.gamma2), "#000", cls="gamma2", label="gamma2")
    hh = np.linspace(0.0, h_max, samples)
    for k0, c, x in diagram.asymptote_parabolas:
        for s in (-1.0, 1.0):
            p3.polyline(hh, k0 + s * c * np.sqrt(2 * hh), "#777", dashed=True, cls="asymptote",
                        label="asymptote r=%.6g" % x)
    for h, k, x in diagram.cusps:
        p3.marker(h, k, "cusp", "#000", "cusp r=%.6g" % x)
    for h, k, x in diagram.tangencies:
        p3.marker(h, k, "tangency", "#2ca02c", "tangency r=%.6g" % x)
    for p in diagram.rank0:
        p3.marker(p.image[0], p.image[1], "rank0", "#ff7f0e", "rank-0 %s" % p.pole)
    return _document([p1, p2, p3])


def _document(panes) -> str:
    width = len(panes) * PANE + (len(panes) - 1) * GAP
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" viewBox="0 0 %d %d" font-family="sans-serif">'
           % (width, PANE + 12, width, PANE + 12)]
    for p in panes:
        out.extend(p.render())
    out.append("</svg>")
    return "\n".join(out) + "\n"
