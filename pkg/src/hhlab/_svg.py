"""Minimal self-contained SVG plots: line charts and cell maps."""

import math
from html import escape

WIDTH, HEIGHT = 640, 440
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 30, 50
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"]


def _num(x):
    return f"{x:.2f}"


class _Axes:
    def __init__(self, xs, ys, logx=False, logy=False):
        self.logx, self.logy = logx, logy
        fx = [self.tx(x) for x in xs if self._ok(x, logx)]
        fy = [self.ty(y) for y in ys if self._ok(y, logy)]
        self.x0, self.x1 = self._span(fx)
        self.y0, self.y1 = self._span(fy)

    @staticmethod
    def _ok(v, log):
        return math.isfinite(v) and (v > 0 or not log)

    @staticmethod
    def _span(vals):
        if not vals:
            return 0.0, 1.0
        lo, hi = min(vals), max(vals)
        if hi - lo < 1e-12 * max(1.0, abs(hi)):
            lo, hi = lo - 0.5, hi + 0.5
        return lo, hi

    def tx(self, x):
        return math.log10(x) if self.logx else x

    def ty(self, y):
        return math.log10(y) if self.logy else y

    def px(self, x):
        return LEFT + (self.tx(x) - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)

    def py(self, y):
        return HEIGHT - BOTTOM - (self.ty(y) - self.y0) / (self.y1 - self.y0) * (HEIGHT - TOP - BOTTOM)

    def frame(self, title, xlabel, ylabel):
        out = [f'<rect x="{LEFT}" y="{TOP}" width="{WIDTH - LEFT - RIGHT}" '
               f'height="{HEIGHT - TOP - BOTTOM}" fill="none" stroke="black"/>',
               f'<text x="{WIDTH / 2}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
               f'<text x="{WIDTH / 2}" y="{HEIGHT - 10}" text-anchor="middle" font-size="12">'
               f'{escape(xlabel)}</text>',
               f'<text x="15" y="{HEIGHT / 2}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 15 {HEIGHT / 2})">{escape(ylabel)}</text>']
        for k in range(5):
            fx = self.x0 + k * (self.x1 - self.x0) / 4
            fy = self.y0 + k * (self.y1 - self.y0) / 4
            lx = f"1e{fx:.1f}" if self.logx else f"{fx:.3g}"
            ly = f"1e{fy:.1f}" if self.logy else f"{fy:.3g}"
            gx = LEFT + k * (WIDTH - LEFT - RIGHT) / 4
            gy = HEIGHT - BOTTOM - k * (HEIGHT - TOP - BOTTOM) / 4
            out.append(f'<text x="{_num(gx)}" y="{HEIGHT - BOTTOM + 16}" text-anchor="middle" '
                       f'font-size="10">{lx}</text>')
            out.append(f'<text x="{LEFT - 6}" y="{_num(gy + 3)}" text-anchor="end" '
                       f'font-size="10">{ly}</text>')
        return out


def _document(body):
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
            f'viewBox="0 0 {WIDTH} {HEIGHT}">')
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *body, "</svg>"]) + "\n"


def line_plot(series, title="", xlabel="", ylabel="", logx=False, logy=False):
    """series: list of (label, xs, ys). Non-finite or non-positive (on log axes) points are skipped."""
    xs = [x for _, sx, _ in series for x in sx]
    ys = [y for _, _, sy in series for y in sy]
    ax = _Axes(xs, ys, logx, logy)
    body = ax.frame(title, xlabel, ylabel)
    for k, (label, sx, sy) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        pts = [(ax.px(x), ax.py(y)) for x, y in zip(sx, sy)
               if ax._ok(x, logx) and ax._ok(y, logy)]
        if pts:
            path = " ".join(f"{_num(a)},{_num(b)}" for a, b in pts)
            body.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        body.append(f'<text x="{WIDTH - RIGHT - 6}" y="{TOP + 16 + 14 * k}" text-anchor="end" '
                    f'font-size="11" fill="{color}">{escape(label)}</text>')
    return _document(body)


def cell_map(cells, colors, curves=(), title="", xlabel="", ylabel="", xr=None, yr=None):
    """cells: list of (x, y, w, h, category); curves: list of (label, xs, ys) overlaid."""
    xs = [c[0] for c in cells] + [c[0] + c[2] for c in cells]
    ys = [c[1] for c in cells] + [c[1] + c[3] for c in cells]
    ax = _Axes(xr or xs, yr or ys)
    body = ax.frame(title, xlabel, ylabel)
    for x, y, w, h, cat in cells:
        x0, x1 = ax.px(x), ax.px(x + w)
        y0, y1 = ax.py(y + h), ax.py(y)
        body.append(f'<rect x="{_num(x0)}" y="{_num(y0)}" width="{_num(x1 - x0)}" '
                    f'height="{_num(y1 - y0)}" fill="{colors.get(cat, "#dddddd")}"/>')
    for k, (label, sx, sy) in enumerate(curves):
        pts = [(ax.px(x), ax.py(y)) for x, y in zip(sx, sy)
               if math.isfinite(x) and math.isfinite(y) and ax.y0 <= y <= ax.y1]
        if len(pts) > 1:
            path = " ".join(f"{_num(a)},{_num(b)}" for a, b in pts)
            body.append(f'<polyline points="{path}" fill="none" stroke="black" '
                        f'stroke-dasharray="{3 + 2 * k},3" stroke-width="1.2"/>')
            a, b = pts[-1]
            body.append(f'<text x="{_num(a)}" y="{_num(b - 4)}" font-size="10" '
                        f'text-anchor="end">{escape(label)}</text>')
    for k, (cat, color) in enumerate(sorted(colors.items())):
        body.append(f'<rect x="{LEFT + 6}" y="{TOP + 6 + 14 * k}" width="10" height="10" fill="{color}"/>')
        body.append(f'<text x="{LEFT + 20}" y="{TOP + 15 + 14 * k}" font-size="10">{escape(cat)}</text>')
    return _document(body)
