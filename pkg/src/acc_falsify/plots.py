"""Dependency-free SVG figures: learning curves and trajectories.

Output is fully deterministic (fixed layout, fixed number formatting), so
figures can be diffed and parsed back in tests. The plot rectangle carries
``data-*`` attributes with the data ranges mapped to its edges.
"""
from __future__ import annotations

from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT = 720, 420
MARGIN = dict(left=70, right=170, top=30, bottom=50)
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _n(x: float) -> str:
    return f"{x:.3f}"


def _range(values: Sequence[np.ndarray]) -> tuple[float, float]:
    lo = min(float(np.min(v)) for v in values)
    hi = max(float(np.max(v)) for v in values)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


class _Panel:
    def __init__(self, x0, y0, w, h, xr, yr):
        self.x0, self.y0, self.w, self.h = x0, y0, w, h
        self.xr, self.yr = xr, yr

    def px(self, x):
        return self.x0 + (x - self.xr[0]) / (self.xr[1] - self.xr[0]) * self.w

    def py(self, y):
        return self.y0 + self.h - (y - self.yr[0]) / (self.yr[1] - self.yr[0]) * self.h

    def frame(self, xlabel, ylabel, pid):
        out = [f'<rect id="{pid}" class="plot-area" x="{_n(self.x0)}" y="{_n(self.y0)}" '
               f'width="{_n(self.w)}" height="{_n(self.h)}" fill="none" stroke="#333" '
               f'data-xmin="{self.xr[0]!r}" data-xmax="{self.xr[1]!r}" '
               f'data-ymin="{self.yr[0]!r}" data-ymax="{self.yr[1]!r}"/>']
        for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
            xv = self.xr[0] + frac * (self.xr[1] - self.xr[0])
            yv = self.yr[0] + frac * (self.yr[1] - self.yr[0])
            out.append(f'<text x="{_n(self.px(xv))}" y="{_n(self.y0 + self.h + 16)}" '
                       f'font-size="11" text-anchor="middle">{xv:.4g}</text>')
            out.append(f'<text x="{_n(self.x0 - 6)}" y="{_n(self.py(yv) + 4)}" '
                       f'font-size="11" text-anchor="end">{yv:.4g}</text>')
        out.append(f'<text x="{_n(self.x0 + self.w / 2)}" y="{_n(self.y0 + self.h + 34)}" '
                   f'font-size="12" text-anchor="middle">{escape(xlabel)}</text>')
        out.append(f'<text x="{_n(self.x0 - 52)}" y="{_n(self.y0 + self.h / 2)}" font-size="12" '
                   f'text-anchor="middle" transform="rotate(-90 {_n(self.x0 - 52)} '
                   f'{_n(self.y0 + self.h / 2)})">{escape(ylabel)}</text>')
        return out

    def polyline(self, x, y, color, label, dash=None, cls="series"):
        pts = " ".join(f"{_n(self.px(a))},{_n(self.py(b))}" for a, b in zip(x, y))
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        out = [f'<polyline class="{cls}" data-label="{escape(label)}" fill="none" stroke="{color}" '
               f'stroke-width="1.5"{extra} points="{pts}"/>']
        if len(x) == 1:
            out.append(f'<circle class="{cls}-point" cx="{_n(self.px(x[0]))}" cy="{_n(self.py(y[0]))}" '
                       f'r="3" fill="{color}"/>')
        return out


def _legend(entries, x, y):
    out = []
    for i, (label, color, dash) in enumerate(entries):
        yy = y + 18 * i
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        out.append(f'<line x1="{x}" y1="{yy}" x2="{x + 24}" y2="{yy}" stroke="{color}" '
                   f'stroke-width="2"{extra}/>')
        out.append(f'<text class="legend" x="{x + 30}" y="{yy + 4}" font-size="11">{escape(label)}</text>')
    return out


def _doc(body, width=WIDTH, height=HEIGHT, title=""):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">')
    t = f'<title>{escape(title)}</title>' if title else ""
    return "\n".join([head, t, '<rect width="100%" height="100%" fill="white"/>', *body, "</svg>", ""])


def emit_learning_curve(histories, log_y: bool = True, title: str = "Learning progress") -> str:
    """Reward per episode plus its running maximum, one pair of lines per history.

    ``histories`` is a list of ``(label, episodes, rewards)`` triples. With
    ``log_y`` the y axis shows ``log10(reward)``.
    """
    if not histories:
        raise ValueError("nothing to plot")
    series = []
    for label, ep, r in histories:
        ep = np.asarray(ep, dtype=float)
        r = np.asarray(r, dtype=float)
        if len(r) == 0:
            raise ValueError(f"history {label!r} is empty")
        y = np.log10(r) if log_y else r
        series.append((label, ep, y, np.maximum.accumulate(y)))
    xr = _range([s[1] for s in series])
    yr = _range([s[2] for s in series])
    panel = _Panel(MARGIN["left"], MARGIN["top"], WIDTH - MARGIN["left"] - MARGIN["right"],
                   HEIGHT - MARGIN["top"] - MARGIN["bottom"], xr, yr)
    body = panel.frame("episode", "log10 reward" if log_y else "reward", "plot-area")
    legend = []
    for i, (label, ep, y, run_max) in enumerate(series):
        color = PALETTE[i % len(PALETTE)]
        body += panel.polyline(ep, y, color, label)
        body += panel.polyline(ep, run_max, color, f"{label} (best so far)", dash="5,3", cls="running-max")
        legend += [(label, color, None), (f"{label} best", color, "5,3")]
    body += _legend(legend, WIDTH - MARGIN["right"] + 12, MARGIN["top"] + 10)
    return _doc(body, title=title)


def emit_trajectory(tr, title: str = "Trajectory") -> str:
    """Three stacked panels: speeds, gap, accelerations over time."""
    t = tr.t
    n_panels = 3
    height = 640
    ph = (height - MARGIN["top"] - 40 * n_panels) / n_panels
    w = WIDTH - MARGIN["left"] - MARGIN["right"]
    specs = [
        ("speed (m/s)", [("host v", tr.v_h, PALETTE[0]), ("front v", tr.v_f, PALETTE[1])]),
        ("gap (m)", [("gap", tr.gap, PALETTE[2])]),
        ("accel (m/s^2)", [("host u", tr.u_host, PALETTE[0]), ("front u", tr.u_front, PALETTE[1])]),
    ]
    body = []
    for i, (ylabel, lines) in enumerate(specs):
        y0 = MARGIN["top"] + i * (ph + 40)
        panel = _Panel(MARGIN["left"], y0, w, ph, _range([t]), _range([v for _, v, _ in lines]))
        body += panel.frame("time (s)" if i == n_panels - 1 else "", ylabel, f"panel-{i}")
        for label, v, color in lines:
            body += panel.polyline(t, v, color, label)
        body += _legend([(label, color, None) for label, _, color in lines],
                        WIDTH - MARGIN["right"] + 12, y0 + 10)
    if tr.collided:
        ct = tr.collision_time()
        body.append(f'<text x="{MARGIN["left"]}" y="{height - 6}" font-size="12" fill="#d62728">'
                    f'collision at t = {ct:.1f} s</text>')
    return _doc(body, height=height, title=title)

