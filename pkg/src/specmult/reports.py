"""Report serialization: CSV tables and self-contained SVG line plots.

CSV output follows RFC 4180 (minimal quoting, CRLF records) and floats
are written with repr, so identical runs produce identical bytes.  SVG
plots are generated directly as SVG 1.1 markup with log-scaled axes;
the plotted numbers are embedded in a comment as a small data table so
the figure can be audited without re-running anything.
"""

import csv
import html
import math
from dataclasses import dataclass, field

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f")


def plain(value):
    """Coerce numpy scalars and bools to stable builtin types."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, (int,)):
        return value
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, float):
        return value
    return value


def format_cell(value):
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def write_csv(path, columns, rows):
    """One dict per row; missing keys become empty fields."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL)
        w.writerow(columns)
        for row in rows:
            w.writerow([format_cell(plain(row.get(c))) for c in columns])


def read_csv(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        head = next(r)
        return head, [dict(zip(head, row)) for row in r]


# -- SVG ------------------------------------------------------------------

WIDTH, HEIGHT = 720, 540
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 70, 160, 40, 55


def _ticks(lo, hi, log):
    if log:
        lo_d = int(math.floor(math.log10(lo)))
        hi_d = int(math.ceil(math.log10(hi)))
        return [(10.0 ** d, "1e%d" % d) for d in range(lo_d, hi_d + 1)]
    span = hi - lo
    step = 10.0 ** math.floor(math.log10(span / 4.0))
    while span / step > 8:
        step *= 2.0
    t0 = math.ceil(lo / step) * step
    out = []
    while t0 <= hi + 1e-12 * span:
        out.append((t0, "%g" % t0))
        t0 += step
    return out


class _Axis:
    def __init__(self, values, log):
        vals = [v for v in values if not log or v > 0]
        if not vals:
            vals = [1.0]
        lo, hi = min(vals), max(vals)
        if log:
            if lo == hi:
                lo, hi = lo / 2.0, hi * 2.0
            self.lo, self.hi = math.log10(lo), math.log10(hi)
        else:
            if lo == hi:
                lo, hi = lo - 0.5, hi + 0.5
            pad = 0.05 * (hi - lo)
            self.lo, self.hi = lo - pad, hi + pad
        self.log = log
        self.tick_list = _ticks(lo, hi, log)

    def unit(self, v):
        if self.log:
            if v <= 0:
                return None
            v = math.log10(v)
        if self.hi == self.lo:
            return 0.5
        return (v - self.lo) / (self.hi - self.lo)


def svg_lineplot(path, series, xlabel, ylabel, title,
                 logx=True, logy=True):
    """Write a line plot; series is a list of (label, xs, ys).

    Points that cannot be placed on a log axis (non-positive values)
    are dropped from the polyline but kept in the embedded data table.
    """
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    ax = _Axis(xs_all, logx)
    ay = _Axis(ys_all, logy)
    px0, px1 = MARGIN_L, WIDTH - MARGIN_R
    py0, py1 = HEIGHT - MARGIN_B, MARGIN_T

    def place(x, y):
        ux, uy = ax.unit(x), ay.unit(y)
        if ux is None or uy is None:
            return None
        return (px0 + ux * (px1 - px0), py0 + uy * (py1 - py0))

    out = []
    out.append('<?xml version="1.0" encoding="UTF-8"?>')
    out.append('<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
               'width="%d" height="%d" viewBox="0 0 %d %d">'
               % (WIDTH, HEIGHT, WIDTH, HEIGHT))
    table = ["series,x,y"]
    for label, xs, ys in series:
        for x, y in zip(xs, ys):
            table.append("%s,%s,%s" % (label, repr(float(x)),
                                       repr(float(y))))
    out.append("<!-- data\n%s\n-->" % "\n".join(
        t.replace("--", "~~") for t in table))
    out.append('<rect width="%d" height="%d" fill="white"/>'
               % (WIDTH, HEIGHT))
    out.append('<text x="%g" y="%g" font-size="15" font-family="sans-serif"'
               ' text-anchor="middle">%s</text>'
               % ((px0 + px1) / 2.0, MARGIN_T - 18, html.escape(title)))
    # frame and ticks
    out.append('<rect x="%g" y="%g" width="%g" height="%g" fill="none" '
               'stroke="black"/>' % (px0, py1, px1 - px0, py0 - py1))
    for v, lab in ax.tick_list:
        u = ax.unit(v)
        if u is None or not 0 <= u <= 1:
            continue
        x = px0 + u * (px1 - px0)
        out.append('<line x1="%g" y1="%g" x2="%g" y2="%g" stroke="black"/>'
                   % (x, py0, x, py0 + 5))
        out.append('<text x="%g" y="%g" font-size="11" '
                   'font-family="sans-serif" text-anchor="middle">%s</text>'
                   % (x, py0 + 18, lab))
    for v, lab in ay.tick_list:
        u = ay.unit(v)
        if u is None or not 0 <= u <= 1:
            continue
        y = py0 + u * (py1 - py0)
        out.append('<line x1="%g" y1="%g" x2="%g" y2="%g" stroke="black"/>'
                   % (px0 - 5, y, px0, y))
        out.append('<text x="%g" y="%g" font-size="11" '
                   'font-family="sans-serif" text-anchor="end">%s</text>'
                   % (px0 - 8, y + 4, lab))
    out.append('<text x="%g" y="%g" font-size="13" font-family="sans-serif"'
               ' text-anchor="middle">%s</text>'
               % ((px0 + px1) / 2.0, HEIGHT - 12, html.escape(xlabel)))
    out.append('<text x="%g" y="%g" font-size="13" font-family="sans-serif"'
               ' text-anchor="middle" transform="rotate(-90 %g %g)">%s'
               '</text>' % (16, (py0 + py1) / 2.0, 16, (py0 + py1) / 2.0,
                            html.escape(ylabel)))
    for k, (label, xs, ys) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        pts = [place(x, y) for x, y in zip(xs, ys)]
        pts = [p for p in pts if p is not None]
        if len(pts) >= 2:
            path_d = " ".join("%g,%g" % p for p in pts)
            out.append('<polyline points="%s" fill="none" stroke="%s" '
                       'stroke-width="1.6"/>' % (path_d, color))
        for p in pts:
            out.append('<circle cx="%g" cy="%g" r="2.6" fill="%s"/>'
                       % (p[0], p[1], color))
        ly = MARGIN_T + 16 * k + 10
        out.append('<line x1="%g" y1="%g" x2="%g" y2="%g" stroke="%s" '
                   'stroke-width="1.6"/>'
                   % (px1 + 10, ly - 4, px1 + 30, ly - 4, color))
        out.append('<text x="%g" y="%g" font-size="11" '
                   'font-family="sans-serif">%s</text>'
                   % (px1 + 35, ly, html.escape(str(label))))
    out.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(out) + "\n")


@dataclass
class ExperimentReport:
    """What a run produced, where it landed, and whether cells failed."""

    config: dict
    csv_paths: list = field(default_factory=list)
    svg_paths: list = field(default_factory=list)
    verdicts: list = field(default_factory=list)
    cell_failures: list = field(default_factory=list)
    wall_clock: float = 0.0
    resolutions: list = field(default_factory=list)
    version: str = ""

    def to_text(self):
        lines = ["experiment report (tool version %s)" % self.version, ""]
        lines.append("config:")
        for k in sorted(self.config):
            lines.append("  %s: %s" % (k, self.config[k]))
        lines.append("")
        lines.append("outputs:")
        for p in self.csv_paths + self.svg_paths:
            lines.append("  %s" % p)
        lines.append("")
        lines.append("verdicts:")
        for v in self.verdicts or ["  (none)"]:
            lines.append("  %s" % v if not v.startswith(" ") else v)
        if self.cell_failures:
            lines.append("")
            lines.append("cell failures (%d):" % len(self.cell_failures))
            for f in self.cell_failures:
                lines.append("  %s" % f)
        lines.append("")
        lines.append("resolutions: %s" % (self.resolutions,))
        lines.append("wall clock: %.2f s" % self.wall_clock)
        return "\n".join(lines) + "\n"
