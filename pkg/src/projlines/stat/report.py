"""Ratios ``K / Kbar`` for the four maximization methods, as CSV rows and an SVG chart."""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import asdict, dataclass
from xml.sax.saxutils import escape

import numpy as np

from ..symmetry import canonical_config
from .potential import MCParams, StatParams, evaluate_statistical_potential, upper_bound_kbar
from .search import local_search, naive_monte_carlo

log = logging.getLogger(__name__)

#: method code -> (KResult.method name, label)
METHOD_LABELS = {
    "i": ("evenly_spaced", "(i) evenly-spaced"),
    "ii": ("naive_mc", "(ii) naive Monte Carlo"),
    "a": ("local", "(a) local, sigma=0.1"),
    "b": ("very_local", "(b) very local, sigma=0.01"),
}
SIGMAS = {"a": 0.1, "b": 0.01}
CSV_COLUMNS = ("d", "r", "alpha", "method", "K", "Kbar", "ratio", "stderr", "seed")


@dataclass
class RatioRow:
    d: int
    r: int
    alpha: float
    method: str
    K: float
    Kbar: float
    ratio: float
    stderr: float
    seed: int


def method_seed(seed: int, d: int, r: int, method: str) -> int:
    """Independent seed for one (d, r, method) cell."""
    code = list(METHOD_LABELS).index(method)
    return int(np.random.SeedSequence(seed, spawn_key=(d, r, code)).generate_state(1, np.uint64)[0] >> 1)


def ratio_report(d_list, r_list, alpha: float, mc: MCParams, rng, methods=("i", "ii", "a", "b"),
                 workers: int | None = None) -> list[RatioRow]:
    """One row per (d, r, method): the estimate ``K``, ``Kbar`` and ``K / Kbar``.

    Methods (i), (a), (b) start from ``canonical_config(d)`` (the refined
    version for ``d = 5``); (i) uses ``mc.I`` samples, the others run
    `find_max` with ``mc``'s sizes.
    """
    from .potential import as_seed

    seed = as_seed(rng)
    rows = []
    for d in d_list:
        L = canonical_config(d, refine=(d == 5)).lines
        for r in r_list:
            params = StatParams(d, r, alpha)
            kbar = upper_bound_kbar(params).K
            for m in methods:
                s = method_seed(seed, d, r, m)
                if m == "i":
                    res = evaluate_statistical_potential(L, params, mc.I, s, workers=workers)
                elif m == "ii":
                    res = naive_monte_carlo(params, mc, s, workers=workers)
                else:
                    res = local_search(L, SIGMAS[m], params, mc, s, method=METHOD_LABELS[m][0], workers=workers)
                rows.append(RatioRow(d, r, alpha, m, res.K, kbar, res.K / kbar, res.stderr_estimate, s))
                log.info("d=%d r=%d %s: K=%.6f ratio=%.5f", d, r, m, res.K, res.K / kbar)
    return rows


def rows_to_csv(rows, fh=None) -> str:
    buf = fh or io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        rec = asdict(row)
        w.writerow([rec["d"], rec["r"], repr(rec["alpha"]), rec["method"], repr(rec["K"]),
                    repr(rec["Kbar"]), repr(rec["ratio"]), repr(rec["stderr"]), rec["seed"]])
    return buf.getvalue() if fh is None else ""


def read_csv(text: str) -> list[RatioRow]:
    rows = []
    for rec in csv.DictReader(io.StringIO(text)):
        rows.append(RatioRow(int(rec["d"]), int(rec["r"]), float(rec["alpha"]), rec["method"],
                             float(rec["K"]), float(rec["Kbar"]), float(rec["ratio"]),
                             float(rec["stderr"]), int(rec["seed"])))
    return rows


COLORS = {"i": "#1f77b4", "ii": "#d62728", "a": "#2ca02c", "b": "#ff7f0e"}


def rows_to_svg(rows, width: int = 760, height: int = 360) -> str:
    """Grouped bar chart, one group per (d, r), one bar per method."""
    groups = sorted({(row.d, row.r) for row in rows})
    methods = [m for m in METHOD_LABELS if any(row.method == m for row in rows)]
    if not groups:
        raise ValueError("no rows to plot")
    ratios = [row.ratio for row in rows]
    lo = min(min(ratios), 0.99)
    lo = np.floor(lo * 200) / 200 - 0.005
    hi = max(max(ratios), 1.0) + 0.002
    left, right, top, bottom = 60, 170, 20, 50
    pw, ph = width - left - right, height - top - bottom

    def ypos(v):
        return top + ph * (hi - v) / (hi - lo)

    gw = pw / len(groups)
    bw = 0.8 * gw / max(len(methods), 1)
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'font-family="sans-serif" font-size="11">',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>']
    for t in np.arange(np.ceil(lo * 200) / 200, hi, 0.005):
        y = ypos(t)
        out.append(f'<line x1="{left}" y1="{y:.1f}" x2="{left + pw}" y2="{y:.1f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 5}" y="{y + 4:.1f}" text-anchor="end">{t:.3f}</text>')
    y1 = ypos(1.0)
    out.append(f'<line x1="{left}" y1="{y1:.1f}" x2="{left + pw}" y2="{y1:.1f}" stroke="#000" '
               f'stroke-dasharray="4,3"/>')
    lookup = {(row.d, row.r, row.method): row for row in rows}
    for gi, (d, r) in enumerate(groups):
        x0 = left + gi * gw + 0.1 * gw
        for mi, m in enumerate(methods):
            row = lookup.get((d, r, m))
            if row is None:
                continue
            y = ypos(row.ratio)
            out.append(f'<rect x="{x0 + mi * bw:.1f}" y="{y:.1f}" width="{bw * 0.9:.1f}" '
                       f'height="{top + ph - y:.1f}" fill="{COLORS[m]}"><title>'
                       f'{escape(METHOD_LABELS[m][1])}: {row.ratio:.5f}</title></rect>')
        out.append(f'<text x="{left + (gi + 0.5) * gw:.1f}" y="{top + ph + 18}" text-anchor="middle">'
                   f'd={d}, r={r}</text>')
    out.append(f'<text x="15" y="{top + ph / 2:.1f}" transform="rotate(-90 15 {top + ph / 2:.1f})" '
               f'text-anchor="middle">K / Kbar</text>')
    for mi, m in enumerate(methods):
        y = top + 10 + 18 * mi
        out.append(f'<rect x="{left + pw + 15}" y="{y}" width="12" height="12" fill="{COLORS[m]}"/>')
        out.append(f'<text x="{left + pw + 32}" y="{y + 10}">{escape(METHOD_LABELS[m][1])}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
