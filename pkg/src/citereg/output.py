"""Results CSV, citation-data CSV and SVG chart serialization."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .linear_model import Dataset
from .montecarlo import DetectionSummary

RESULTS_HEADER = (
    "method",
    "n",
    "mu0",
    "mu1",
    "sigma",
    "iterations",
    "detections",
    "failures",
    "detection_rate",
    "mc_se",
)

# Paul Tol's muted scheme extended to twelve entries
PALETTE = (
    "#332288",
    "#88CCEE",
    "#44AA99",
    "#117733",
    "#999933",
    "#DDCC77",
    "#CC6677",
    "#882255",
    "#AA4499",
    "#DDDDDD",
    "#000000",
    "#E69F00",
)


class DataFormatError(ValueError):
    """An input file does not follow its documented schema."""


def plain_number(x: float | int) -> str:
    """Decimal text without exponent notation."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    text = repr(float(x))
    if "e" in text or "E" in text:
        text = np.format_float_positional(float(x), trim="-")
    return text


def results_csv_text(rows: list[DetectionSummary], manifest: list[str]) -> str:
    """CSV text with ``# `` manifest lines, rows sorted by (n, method name)."""
    buf = io.StringIO()
    for line in manifest:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULTS_HEADER)
    for r in sorted(rows, key=lambda r: (r.n, r.method.value)):
        w.writerow(
            [
                r.method.value,
                r.n,
                plain_number(r.mu0),
                plain_number(r.mu1),
                plain_number(r.sigma),
                r.iterations,
                r.detections,
                r.failures,
                f"{r.detection_rate:.6f}",
                f"{r.mc_se:.6f}",
            ]
        )
    return buf.getvalue()


@dataclass(frozen=True)
class ResultRow:
    method: str
    n: int
    mu0: float
    mu1: float
    sigma: float
    iterations: int
    detections: int
    failures: int
    detection_rate: float
    mc_se: float


def read_results_csv(path: str | Path) -> tuple[list[str], list[ResultRow]]:
    """Parse a results file back into (manifest lines, rows)."""
    manifest = []
    body = []
    with open(path, newline="", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#"):
                manifest.append(line[1:].strip())
            else:
                body.append(line)
    reader = csv.reader(body)
    header = next(reader, None)
    if tuple(header or ()) != RESULTS_HEADER:
        raise DataFormatError(f"{path}: unexpected header {header!r}")
    rows = []
    for rec in reader:
        if not rec:
            continue
        rows.append(
            ResultRow(
                method=rec[0],
                n=int(rec[1]),
                mu0=float(rec[2]),
                mu1=float(rec[3]),
                sigma=float(rec[4]),
                iterations=int(rec[5]),
                detections=int(rec[6]),
                failures=int(rec[7]),
                detection_rate=float(rec[8]),
                mc_se=float(rec[9]),
            )
        )
    return manifest, rows


def read_citation_csv(path: str | Path) -> Dataset:
    """Load a ``citations,factor`` file; errors name the offending line."""
    try:
        with open(path, newline="", encoding="utf-8-sig") as fh:
            lines = list(csv.reader(fh))
    except UnicodeDecodeError as exc:
        raise DataFormatError(f"{path}: not valid UTF-8 ({exc})") from exc
    if not lines or [h.strip() for h in lines[0]] != ["citations", "factor"]:
        raise DataFormatError(f"{path}: line 1: header must be 'citations,factor'")
    cites, factor = [], []
    for lineno, rec in enumerate(lines[1:], start=2):
        if not rec or all(not f.strip() for f in rec):
            continue
        if len(rec) != 2:
            raise DataFormatError(f"{path}: line {lineno}: expected 2 fields, got {len(rec)}")
        c, f = (x.strip() for x in rec)
        if not c.isdigit():
            raise DataFormatError(f"{path}: line {lineno}: citations must be a non-negative integer, got {c!r}")
        if f not in ("0", "1"):
            raise DataFormatError(f"{path}: line {lineno}: factor must be 0 or 1, got {f!r}")
        cites.append(int(c))
        factor.append(int(f))
    return Dataset(np.array(cites, dtype=np.int64), np.array(factor, dtype=np.int8))


def render_svg(rows: list[DetectionSummary], alpha: float, title: str = "") -> str:
    """Line chart of detection rate against sample size (log x axis)."""
    width, height = 800, 500
    left, right, top, bottom = 70, 190, 40, 60
    pw, ph = width - left - right, height - top - bottom

    methods = []
    for r in rows:
        if r.method not in methods:
            methods.append(r.method)
    ns = sorted({r.n for r in rows})
    lo, hi = math.log10(ns[0]), math.log10(ns[-1])
    if hi - lo < 1e-9:
        lo, hi = lo - 0.5, hi + 0.5

    def sx(n: float) -> float:
        return left + (math.log10(n) - lo) / (hi - lo) * pw

    def sy(p: float) -> float:
        return top + (1.0 - p) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{left + pw / 2:.1f}" y="24" text-anchor="middle" font-size="14">{escape(title)}</text>')
    for k in range(6):
        p = k / 5
        y = sy(p)
        out.append(f'<line x1="{left}" y1="{y:.1f}" x2="{left + pw}" y2="{y:.1f}" stroke="#e5e5e5"/>')
        out.append(f'<text x="{left - 8}" y="{y + 4:.1f}" text-anchor="end">{p:.1f}</text>')
    for n in ns:
        x = sx(n)
        out.append(f'<line x1="{x:.1f}" y1="{top + ph}" x2="{x:.1f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.1f}" y="{top + ph + 18}" text-anchor="middle" font-size="10">{n}</text>')
    out.append(f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>')
    ya = sy(alpha)
    out.append(
        f'<line class="alpha" x1="{left}" y1="{ya:.1f}" x2="{left + pw}" y2="{ya:.1f}" '
        f'stroke="#777777" stroke-dasharray="6,4"/>'
    )
    out.append(f'<text x="{left + pw - 4}" y="{ya - 4:.1f}" text-anchor="end" fill="#777777">alpha = {plain_number(alpha)}</text>')
    out.append(f'<text x="{left + pw / 2:.1f}" y="{height - 15}" text-anchor="middle">sample size n (log scale)</text>')
    out.append(
        f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {top + ph / 2:.1f})">detection rate</text>'
    )
    for i, m in enumerate(methods):
        colour = PALETTE[i % len(PALETTE)]
        pts = sorted((r.n, r.detection_rate) for r in rows if r.method == m)
        coords = " ".join(f"{sx(n):.2f},{sy(p):.2f}" for n, p in pts)
        out.append(
            f'<polyline class="series" data-method="{escape(m.value)}" points="{coords}" '
            f'fill="none" stroke="{colour}" stroke-width="2"/>'
        )
        ly = top + 10 + 22 * i
        lx = left + pw + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 25}" y2="{ly}" stroke="{colour}" stroke-width="3"/>')
        out.append(f'<text x="{lx + 32}" y="{ly + 4}">{escape(m.value)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
