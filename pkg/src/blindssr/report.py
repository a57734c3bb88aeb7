"""Result persistence: versioned CSV plus self-contained SVG figures.

The CSV layer is deliberately boring: fixed column order, a
``schema_version`` comment line, "." decimals, "\\n" newlines, and no
timestamps, so identical runs produce byte-identical files.  Percentages
carry four decimal places; other reals use their shortest exact
representation so a read-write cycle is idempotent.

SVG output avoids any plotting dependency.  The heatmap shade ramp is
fixed, white at 5.0% rising to dark red at 6.5%, so facets and files
are directly comparable.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

from .engine import ScenarioResult

__all__ = [
    "SCHEMA_VERSION",
    "CSV_COLUMNS",
    "ResultRecord",
    "write_results_csv",
    "read_results_csv",
    "svg_heatmap",
    "svg_curves",
    "emit_results",
]

SCHEMA_VERSION = 1

CSV_COLUMNS = (
    "n_stage1", "n_min", "n_max", "delta0", "sigma", "replications",
    "pct_case1", "pct_case2", "pct_case3", "pct_case4", "ni_rejection_pct",
    "mean_realized_n", "sd_realized_n", "mean_sigma_t2", "master_seed",
)

RAMP_LOW = 5.0      # white
RAMP_HIGH = 6.5     # darkest red


@dataclass(frozen=True)
class ResultRecord:
    """One CSV row; the persisted view of a ScenarioResult."""

    n_stage1: int
    n_min: int
    n_max: float
    delta0: float
    sigma: float
    replications: int
    pct_case1: float
    pct_case2: float
    pct_case3: float
    pct_case4: float
    ni_rejection_pct: float
    mean_realized_n: float
    sd_realized_n: float
    mean_sigma_t2: float
    master_seed: int

    @classmethod
    def from_scenario_result(cls, result: ScenarioResult) -> "ResultRecord":
        sc = result.scenario
        return cls(
            n_stage1=sc.design.n1_stage1,
            n_min=sc.rule.n_min,
            n_max=sc.rule.n_max,
            delta0=sc.design.delta_up,
            sigma=sc.design.sigma,
            replications=sc.replications,
            pct_case1=result.pct_case1,
            pct_case2=result.pct_case2,
            pct_case3=result.pct_case3,
            pct_case4=result.pct_case4,
            ni_rejection_pct=result.ni_rejection_pct,
            mean_realized_n=result.mean_realized_n,
            sd_realized_n=result.sd_realized_n,
            mean_sigma_t2=result.mean_sigma_t2,
            master_seed=sc.master_seed)

    def to_row(self) -> list[str]:
        return [
            str(self.n_stage1),
            str(self.n_min),
            "inf" if math.isinf(self.n_max) else str(int(self.n_max)),
            repr(self.delta0),
            repr(self.sigma),
            str(self.replications),
            f"{self.pct_case1:.4f}",
            f"{self.pct_case2:.4f}",
            f"{self.pct_case3:.4f}",
            f"{self.pct_case4:.4f}",
            f"{self.ni_rejection_pct:.4f}",
            repr(self.mean_realized_n),
            repr(self.sd_realized_n),
            repr(self.mean_sigma_t2),
            str(self.master_seed),
        ]

    @classmethod
    def from_row(cls, row: Sequence[str]) -> "ResultRecord":
        if len(row) != len(CSV_COLUMNS):
            raise ValueError(
                f"expected {len(CSV_COLUMNS)} columns, got {len(row)}")
        return cls(
            n_stage1=int(row[0]),
            n_min=int(row[1]),
            n_max=math.inf if row[2] == "inf" else float(row[2]),
            delta0=float(row[3]),
            sigma=float(row[4]),
            replications=int(row[5]),
            pct_case1=float(row[6]),
            pct_case2=float(row[7]),
            pct_case3=float(row[8]),
            pct_case4=float(row[9]),
            ni_rejection_pct=float(row[10]),
            mean_realized_n=float(row[11]),
            sd_realized_n=float(row[12]),
            mean_sigma_t2=float(row[13]),
            master_seed=int(row[14]))


def _as_records(results: Iterable) -> list[ResultRecord]:
    records = []
    for item in results:
        if isinstance(item, ScenarioResult):
            item = ResultRecord.from_scenario_result(item)
        records.append(item)
    if not records:
        raise ValueError("no results to emit")
    return records


def write_results_csv(results: Iterable, path: str) -> None:
    records = _as_records(results)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# schema_version={SCHEMA_VERSION}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for record in records:
            writer.writerow(record.to_row())


def read_results_csv(path: str) -> list[ResultRecord]:
    with open(path, encoding="utf-8", newline="") as fh:
        head = fh.readline().strip()
        if head != f"# schema_version={SCHEMA_VERSION}":
            raise ValueError(f"unsupported results file header: {head!r}")
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError("results file columns do not match the schema")
        return [ResultRecord.from_row(row) for row in reader]


def _shade(pct: float) -> str:
    t = (pct - RAMP_LOW) / (RAMP_HIGH - RAMP_LOW)
    t = min(max(t, 0.0), 1.0)
    r = round(255 + (139 - 255) * t)
    g = round(255 * (1.0 - t))
    b = round(255 * (1.0 - t))
    return f"#{r:02x}{g:02x}{b:02x}"


def _svg_header(width: int, height: int) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]


def _text(x, y, s, size=11, anchor="middle", angle=None, bold=False):
    transform = f' transform="rotate({angle} {x} {y})"' if angle else ""
    weight = ' font-weight="bold"' if bold else ""
    return (f'<text x="{x:.1f}" y="{y:.1f}" font-size="{size}" '
            f'font-family="sans-serif" text-anchor="{anchor}"'
            f'{weight}{transform}>{s}</text>')


def _ratio_label(n_small: float, n_stage1: int) -> str:
    if math.isinf(n_small):
        return "inf"
    return f"{n_small / n_stage1:.2f}".rstrip("0").rstrip(".")


def svg_heatmap(results: Iterable, path: str) -> None:
    """Faceted %Case1 heatmap: columns by stage-1 size, rows by the
    upper-bound ratio; within a facet x is the margin and y the
    lower-bound ratio.  Darker cells mean larger type I error."""
    records = _as_records(results)
    ns = sorted({r.n_stage1 for r in records})
    max_keys = sorted({(math.inf if math.isinf(r.n_max)
                        else round(r.n_max / r.n_stage1, 6))
                       for r in records})
    cell_w, cell_h = 9, 16
    deltas = sorted({r.delta0 for r in records})
    mins_per_facet = len({(r.n_min, r.n_stage1) for r in records})

    facet_w = cell_w * len(deltas) + 20
    rows_guess = max(len({round(r.n_min / r.n_stage1, 6) for r in records}), 1)
    facet_h = cell_h * rows_guess + 30
    margin_left, margin_top = 70, 50
    width = margin_left + facet_w * len(ns) + 120
    height = margin_top + facet_h * len(max_keys) + 60

    parts = _svg_header(width, height)
    parts.append(_text(width / 2, 20, "% Case 1 by margin and bound ratios",
                       size=14, bold=True))
    for ci, n1 in enumerate(ns):
        parts.append(_text(margin_left + ci * facet_w + facet_w / 2 - 10, 40,
                           f"stage 1 = {n1}", bold=True))
    for ri, mk in enumerate(max_keys):
        label = "inf" if math.isinf(mk) else f"{mk:g}"
        parts.append(_text(20, margin_top + ri * facet_h + facet_h / 2,
                           f"max/n1 = {label}", angle=-90))
    for ci, n1 in enumerate(ns):
        for ri, mk in enumerate(max_keys):
            ox = margin_left + ci * facet_w
            oy = margin_top + ri * facet_h
            facet = [r for r in records if r.n_stage1 == n1
                     and (math.isinf(r.n_max) if math.isinf(mk)
                          else (not math.isinf(r.n_max)
                                and round(r.n_max / r.n_stage1, 6) == mk))]
            if not facet:
                continue
            min_vals = sorted({r.n_min for r in facet})
            for r in facet:
                xi = deltas.index(r.delta0)
                yi = min_vals.index(r.n_min)
                parts.append(
                    f'<rect x="{ox + xi * cell_w}" '
                    f'y="{oy + (len(min_vals) - 1 - yi) * cell_h}" '
                    f'width="{cell_w}" height="{cell_h}" '
                    f'fill="{_shade(r.pct_case1)}" stroke="none"/>')
            for yi, mv in enumerate(min_vals):
                parts.append(_text(
                    ox - 4, oy + (len(min_vals) - 1 - yi) * cell_h + cell_h - 4,
                    _ratio_label(mv, n1), size=8, anchor="end"))
            w = cell_w * len(deltas)
            h = cell_h * len(min_vals)
            parts.append(f'<rect x="{ox}" y="{oy}" width="{w}" height="{h}" '
                         f'fill="none" stroke="black" stroke-width="0.7"/>')
            parts.append(_text(ox, oy + h + 12, f"{deltas[0]:g}", size=8,
                               anchor="start"))
            parts.append(_text(ox + w, oy + h + 12, f"{deltas[-1]:g}", size=8,
                               anchor="end"))
    # legend ramp
    lx = width - 100
    parts.append(_text(lx + 25, margin_top - 8, "% Case 1", size=10))
    for i in range(60):
        v = RAMP_LOW + (RAMP_HIGH - RAMP_LOW) * i / 59
        parts.append(f'<rect x="{lx}" y="{margin_top + (59 - i) * 2}" '
                     f'width="18" height="2" fill="{_shade(v)}"/>')
    for v in (RAMP_LOW, (RAMP_LOW + RAMP_HIGH) / 2, RAMP_HIGH):
        yy = margin_top + (59 - (v - RAMP_LOW) / (RAMP_HIGH - RAMP_LOW) * 59) * 2
        parts.append(_text(lx + 22, yy + 4, f"{v:g}", size=9, anchor="start"))
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(parts) + "\n")


def _curve_panel(records, key, title, ox, oy, pw, ph, y_lo, y_hi):
    """One polyline panel with the 5% +/- 3 SE reference band."""
    xs = [r.delta0 for r in records]
    ys = [getattr(r, key) for r in records]
    x_lo, x_hi = min(xs), max(xs)
    reps = records[0].replications

    def px(x):
        return ox + (x - x_lo) / (x_hi - x_lo or 1.0) * pw

    def py(y):
        y = min(max(y, y_lo), y_hi)
        return oy + ph - (y - y_lo) / (y_hi - y_lo) * ph

    parts = [_text(ox + pw / 2, oy - 6, title, size=11, bold=True),
             f'<rect x="{ox}" y="{oy}" width="{pw}" height="{ph}" '
             f'fill="none" stroke="black" stroke-width="0.8"/>']
    se = 100.0 * math.sqrt(0.05 * 0.95 / reps)
    for band in (5.0 - 3 * se, 5.0 + 3 * se):
        if y_lo <= band <= y_hi:
            parts.append(
                f'<line x1="{ox}" y1="{py(band):.1f}" x2="{ox + pw}" '
                f'y2="{py(band):.1f}" stroke="red" stroke-width="0.8" '
                f'stroke-dasharray="5,3"/>')
    pts = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in zip(xs, ys))
    parts.append(f'<polyline points="{pts}" fill="none" stroke="black" '
                 f'stroke-width="1.2"/>')
    for frac in (0.0, 0.5, 1.0):
        xv = x_lo + frac * (x_hi - x_lo)
        parts.append(_text(px(xv), oy + ph + 14, f"{xv:g}", size=9))
        yv = y_lo + frac * (y_hi - y_lo)
        parts.append(_text(ox - 4, py(yv) + 3, f"{yv:g}", size=9, anchor="end"))
    parts.append(_text(ox + pw / 2, oy + ph + 28, "margin (effect size)",
                       size=9))
    return parts


def svg_curves(results: Iterable, path: str) -> None:
    """Four case-rate panels against the margin for one rule family.

    Panels: % Case 1, % Case 2, their sum (the one-sided rejection
    rate), and a close-up of the sum around the nominal level.
    """
    records = sorted(_as_records(results), key=lambda r: r.delta0)
    families = {(r.n_stage1, r.n_min, r.n_max) for r in records}
    if len(families) != 1:
        raise ValueError(
            f"curve panels need a single rule family, got {len(families)}")
    if len(records) < 2:
        raise ValueError("curve panels need at least two margins")
    n1, n_min, n_max = next(iter(families))
    max_label = "inf" if math.isinf(n_max) else str(int(n_max))

    pw, ph = 240, 170
    gap_x, gap_y = 60, 60
    width = 2 * pw + 3 * gap_x
    height = 2 * ph + 3 * gap_y + 20
    parts = _svg_header(width, height)
    parts.append(_text(width / 2, 24,
                       f"stage 1 = {n1}, bounds [{n_min}, {max_label}]",
                       size=13, bold=True))
    top = [max(getattr(r, k) for r in records)
           for k in ("pct_case1", "pct_case2", "ni_rejection_pct")]
    y_full = max(6.0, math.ceil(max(top) + 0.5))
    panels = [
        ("pct_case1", "A: % Case 1", 0.0, y_full),
        ("pct_case2", "B: % Case 2", 0.0, y_full),
        ("ni_rejection_pct", "C: % Case 1 + Case 2", 0.0, y_full),
        ("ni_rejection_pct", "D: close-up of C", 4.0, 6.5),
    ]
    for i, (key, title, lo, hi) in enumerate(panels):
        ox = gap_x + (i % 2) * (pw + gap_x)
        oy = gap_y + 20 + (i // 2) * (ph + gap_y)
        parts.extend(_curve_panel(records, key, title, ox, oy, pw, ph, lo, hi))
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(parts) + "\n")


def emit_results(results: Iterable, format: str, path: str) -> None:
    """Dispatch to one of the writers: csv, svg-heatmap, or svg-curve."""
    writers = {"csv": write_results_csv, "svg-heatmap": svg_heatmap,
               "svg-curve": svg_curves}
    if format not in writers:
        raise ValueError(f"unknown output format {format!r}")
    records = _as_records(results)    # validates non-empty before any I/O
    writers[format](records, path)


def ensure_out_dir(out_dir: str) -> str:
    os.makedirs(out_dir, exist_ok=True)
    return out_dir
