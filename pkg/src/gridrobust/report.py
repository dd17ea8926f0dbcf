"""
Result views: estimate-by-specification scatter plots as SVG, and a
per-specification summary table.

Coefficients are drawn on the log-odds scale. In ``P_SHADE`` mode the
marker darkness encodes the one-tailed p-value for a positive effect
(p = 0 darkest); in ``SIGNIFICANCE`` mode markers are split at ``p < alpha``
for the configured tail.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

from gridrobust.errors import InvalidArgumentError
from gridrobust.io import write_table
from gridrobust.sweep import SweepResult, SweepRow


class PlotMode(str, enum.Enum):
    P_SHADE = "p_shade"
    SIGNIFICANCE = "significance"


class Tail(str, enum.Enum):
    ONE_TAILED = "one"
    TWO_TAILED = "two"


@dataclass(frozen=True)
class PlotSpec:
    mode: PlotMode = PlotMode.P_SHADE
    alpha: float = 0.05
    tail: Tail = Tail.TWO_TAILED
    width: int = 900
    height: int = 480
    margin_left: int = 70
    margin_right: int = 170
    margin_top: int = 30
    margin_bottom: int = 70
    title: str = "Treatment estimate by grid-cell specification"

    def __post_init__(self):
        object.__setattr__(self, "mode", PlotMode(self.mode))
        object.__setattr__(self, "tail", Tail(self.tail))
        if not 0.0 < self.alpha < 1.0:
            raise InvalidArgumentError(f"alpha must be in (0, 1), got {self.alpha!r}")
        if self.width <= self.margin_left + self.margin_right or self.height <= self.margin_top + self.margin_bottom:
            raise InvalidArgumentError("plot dimensions leave no room for the plotting area")


def p_value(row: SweepRow, tail: Tail) -> float:
    """The row's p-value under ``tail``; the two-tailed value is derived from the one-tailed one."""
    p = row.p_one_tailed
    if Tail(tail) is Tail.ONE_TAILED:
        return p
    return min(1.0, 2.0 * min(p, 1.0 - p))


def is_significant(row: SweepRow, alpha: float, tail: Tail) -> bool:
    return row.ok and p_value(row, tail) < alpha


def shade_rgb(p: float) -> tuple[float, float, float]:
    """Marker colour for one-tailed p as RGB fractions; strictly lighter as p grows."""
    p = min(1.0, max(0.0, p))
    return (0.85 * p, 0.85 * p, 0.35 + 0.5 * p)


def luminance(rgb: Sequence[float]) -> float:
    r, g, b = rgb
    return 0.2126 * r + 0.7152 * g + 0.0722 * b


def _rgb_css(rgb) -> str:
    return "rgb({:.6f}%,{:.6f}%,{:.6f}%)".format(*(100.0 * c for c in rgb))


SIG_COLOR = "#c0392b"
NONSIG_COLOR = "#9aa5b1"
FAILED_COLOR = "#555555"


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    span = hi - lo
    raw = span / max(1, target)
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + step * 1e-9:
        ticks.append(round(t, 12))
        t += step
    return ticks


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _tick_label(x: float) -> str:
    return f"{x:g}" if abs(x) >= 1e-12 else "0"


def render_scatter(result: SweepResult, spec: PlotSpec | None = None) -> str:
    """Render ``result`` as an SVG 1.1 document.

    Specifications are laid out along x in canonical ``(k, s)`` order with a
    wider gap between multipliers; subsamples spread within their group.
    Failed fits appear as hollow circles along the bottom edge. The output
    depends only on ``(result, spec)``.
    """
    spec = spec or PlotSpec()
    W, H = spec.width, spec.height
    x0, x1 = spec.margin_left, W - spec.margin_right
    y0, y1 = spec.margin_top, H - spec.margin_bottom

    groups = result.specs()
    ok_coefs = [r.coefficient for r in result if r.ok]
    lo, hi = (min(ok_coefs + [0.0]), max(ok_coefs + [0.0])) if ok_coefs else (-1.0, 1.0)
    if hi - lo < 1e-9:
        lo, hi = lo - 1.0, hi + 1.0
    pad = 0.06 * (hi - lo)
    lo, hi = lo - pad, hi + pad
    ticks = _nice_ticks(lo, hi)
    lo, hi = min(lo, ticks[0]), max(hi, ticks[-1])

    def ypos(v):
        return y1 - (v - lo) / (hi - lo) * (y1 - y0)

    # x slots: one unit per spec plus one unit of gap between multipliers
    slots, pos = {}, 0.0
    prev_k = None
    for g in groups:
        if prev_k is not None and g[0] != prev_k:
            pos += 0.6
        slots[g] = pos
        pos += 1.0
        prev_k = g[0]
    n_units = max(pos, 1.0)
    unit = (x1 - x0) / n_units

    def xcenter(g):
        return x0 + (slots[g] + 0.5) * unit

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f"<title>{escape(spec.title)}</title>",
        '<style type="text/css">text{font-family:Helvetica,Arial,sans-serif;font-size:11px;fill:#222}'
        ".axis{stroke:#222;stroke-width:1}.grid{stroke:#ddd;stroke-width:0.5}"
        ".zero{stroke:#888;stroke-width:1;stroke-dasharray:4,3}.pt{stroke-width:1.4;fill:none}</style>",
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="#ffffff"/>',
        f'<text x="{_fmt((x0 + x1) / 2)}" y="{_fmt(y0 - 10)}" text-anchor="middle" font-size="13">{escape(spec.title)}</text>',
    ]

    out.append('<g class="yaxis">')
    for t in ticks:
        yy = _fmt(ypos(t))
        out.append(f'<line class="grid" x1="{x0}" y1="{yy}" x2="{x1}" y2="{yy}"/>')
        out.append(f'<text x="{x0 - 6}" y="{yy}" text-anchor="end" dy="4">{_tick_label(t)}</text>')
    out.append(f'<line class="axis" x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>')
    out.append(
        f'<text transform="translate({x0 - 50},{_fmt((y0 + y1) / 2)}) rotate(-90)" text-anchor="middle">'
        "Estimate (log odds)</text>"
    )
    out.append("</g>")
    if lo < 0.0 < hi:
        yz = _fmt(ypos(0.0))
        out.append(f'<line class="zero" x1="{x0}" y1="{yz}" x2="{x1}" y2="{yz}"/>')

    out.append('<g class="xaxis">')
    out.append(f'<line class="axis" x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}"/>')
    k_spans: dict[int, list[float]] = {}
    for g in groups:
        xc = xcenter(g)
        label = "/".join(str(v) for v in g[1:])
        out.append(f'<text x="{_fmt(xc)}" y="{y1 + 14}" text-anchor="middle">{label}</text>')
        k_spans.setdefault(g[0], []).append(xc)
    for k, xs in k_spans.items():
        out.append(f'<text x="{_fmt(sum(xs) / len(xs))}" y="{y1 + 32}" text-anchor="middle" font-weight="bold">{k}</text>')
    out.append(
        f'<text x="{_fmt((x0 + x1) / 2)}" y="{y1 + 52}" text-anchor="middle">'
        "Cell size multiplier (bold) and shift</text>"
    )
    out.append("</g>")

    arm = min(4.0, 0.3 * unit)
    spread = 0.6 * unit
    out.append('<g class="points">')
    for g in groups:
        members = [r for r in result if r.spec_key == g]
        n = len(members)
        for i, r in enumerate(members):
            xc = xcenter(g) + (0.0 if n == 1 else (i / (n - 1) - 0.5) * spread)
            if not r.ok:
                out.append(
                    f'<circle class="pt failed" cx="{_fmt(xc)}" cy="{_fmt(y1 - 5)}" r="2.5" stroke="{FAILED_COLOR}"/>'
                )
                continue
            yc = ypos(r.coefficient)
            if spec.mode is PlotMode.P_SHADE:
                cls, color = "pt shade", _rgb_css(shade_rgb(r.p_one_tailed))
            elif is_significant(r, spec.alpha, spec.tail):
                cls, color = "pt sig", SIG_COLOR
            else:
                cls, color = "pt nonsig", NONSIG_COLOR
            out.append(
                f'<path class="{cls}" stroke="{color}" d="M{_fmt(xc - arm)},{_fmt(yc - arm)}L{_fmt(xc + arm)},{_fmt(yc + arm)}'
                f'M{_fmt(xc - arm)},{_fmt(yc + arm)}L{_fmt(xc + arm)},{_fmt(yc - arm)}"/>'
            )
    out.append("</g>")

    out.extend(_legend(spec, x1 + 16, y0 + 10))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _legend(spec: PlotSpec, lx: float, ly: float) -> list[str]:
    out = ['<g class="legend">']
    if spec.mode is PlotMode.P_SHADE:
        out.append(f'<text x="{_fmt(lx)}" y="{_fmt(ly)}">One-tailed p (effect &gt; 0)</text>')
        steps = 10
        for i in range(steps + 1):
            p = i / steps
            yy = ly + 10 + i * 12
            out.append(
                f'<rect class="legend-shade" x="{_fmt(lx)}" y="{_fmt(yy)}" width="14" height="12" '
                f'fill="{_rgb_css(shade_rgb(p))}"/>'
            )
            if i % 5 == 0:
                out.append(f'<text x="{_fmt(lx + 20)}" y="{_fmt(yy + 10)}">{p:g}</text>')
        ly += 10 + (steps + 1) * 12 + 16
    else:
        tail = "one-tailed" if spec.tail is Tail.ONE_TAILED else "two-tailed"
        entries = [("sig", SIG_COLOR, f"p &lt; {spec.alpha:g} ({tail})"), ("nonsig", NONSIG_COLOR, "not significant")]
        for cls, color, text in entries:
            out.append(
                f'<path class="legend-{cls}" stroke="{color}" stroke-width="1.4" '
                f'd="M{_fmt(lx)},{_fmt(ly - 4)}L{_fmt(lx + 8)},{_fmt(ly + 4)}M{_fmt(lx)},{_fmt(ly + 4)}L{_fmt(lx + 8)},{_fmt(ly - 4)}"/>'
            )
            out.append(f'<text x="{_fmt(lx + 14)}" y="{_fmt(ly + 4)}">{text}</text>')
            ly += 18
    out.append(
        f'<circle class="legend-failed" cx="{_fmt(lx + 4)}" cy="{_fmt(ly)}" r="2.5" fill="none" stroke="{FAILED_COLOR}"/>'
    )
    out.append(f'<text x="{_fmt(lx + 14)}" y="{_fmt(ly + 4)}">failed fit</text>')
    out.append("</g>")
    return out


def write_svg(svg: str, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg)


@dataclass(frozen=True)
class SummaryRow:
    k: int
    s: int
    n_fits: int
    n_failed: int
    mean_coefficient: float
    min_coefficient: float
    max_coefficient: float
    range_coefficient: float
    share_sig_one_tailed: float
    share_sig_two_tailed: float
    col_shift: int | None = None


SUMMARY_COLUMNS = (
    "k", "s", "n_fits", "n_failed", "mean_coefficient", "min_coefficient", "max_coefficient",
    "range_coefficient", "share_sig_one_tailed", "share_sig_two_tailed",
)


def summarize(result: SweepResult, alpha: float = 0.05) -> list[SummaryRow]:
    """One row per specification: coefficient mean and range over successful
    fits, the share of successful fits with ``p < alpha`` under each tail, and
    the failure count. Coefficient statistics are NaN when every fit failed.
    """
    if not 0.0 < alpha < 1.0:
        raise InvalidArgumentError(f"alpha must be in (0, 1), got {alpha!r}")
    table = []
    for key in result.specs():
        rows = [r for r in result if r.spec_key == key]
        ok = [r for r in rows if r.ok]
        coefs = [r.coefficient for r in ok]
        nan = float("nan")
        if coefs:
            mean = math.fsum(coefs) / len(coefs)
            lo, hi = min(coefs), max(coefs)
            one = sum(is_significant(r, alpha, Tail.ONE_TAILED) for r in ok) / len(ok)
            two = sum(is_significant(r, alpha, Tail.TWO_TAILED) for r in ok) / len(ok)
        else:
            mean = lo = hi = one = two = nan
        table.append(SummaryRow(
            k=key[0], s=key[1], n_fits=len(rows), n_failed=len(rows) - len(ok),
            mean_coefficient=mean, min_coefficient=lo, max_coefficient=hi,
            range_coefficient=hi - lo, share_sig_one_tailed=one, share_sig_two_tailed=two,
            col_shift=key[2] if len(key) > 2 else None,
        ))
    return table


def write_summary(summary: Sequence[SummaryRow], path, delimiter: str | None = None) -> None:
    extended = any(r.col_shift is not None for r in summary)
    header = SUMMARY_COLUMNS + (("s_col",) if extended else ())
    lines = []
    for r in summary:
        line = [r.k, r.s, r.n_fits, r.n_failed, r.mean_coefficient, r.min_coefficient, r.max_coefficient,
                r.range_coefficient, r.share_sig_one_tailed, r.share_sig_two_tailed]
        if extended:
            line.append(r.col_shift)
        lines.append(line)
    write_table(path, header, lines, delimiter)
