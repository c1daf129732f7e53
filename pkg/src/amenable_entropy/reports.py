"""Deterministic CSV/JSON serialization and SVG rendering of 2-d tilings."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
from fractions import Fraction
from pathlib import Path

from .geometry import FiniteSet, Region

CSV_COLUMNS = ("index", "value", "normalizer", "ratio", "meta")


def fmt_value(x) -> str:
    """Rationals as "p/q", reals with 15 significant digits."""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            return str(x)
        return f"{x:.15g}"
    if isinstance(x, tuple):
        return "(" + ",".join(fmt_value(v) for v in x) + ")"
    return str(x)


def to_jsonable(x):
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return float(f"{x:.15g}") if math.isfinite(x) else str(x)
    if isinstance(x, Region):
        return [[[str(a), str(b)] for a, b in zip(bx.lo, bx.hi)] for bx in x.boxes]
    if isinstance(x, FiniteSet):
        return [[str(c) for c in p] for p in x.points]
    if isinstance(x, dict):
        return {fmt_value(k) if not isinstance(k, str) else k: to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, set, frozenset)):
        items = sorted(x, key=repr) if isinstance(x, (set, frozenset)) else x
        return [to_jsonable(v) for v in items]
    if dataclasses.is_dataclass(x):
        return to_jsonable({f.name: getattr(x, f.name) for f in dataclasses.fields(x)})
    return str(x)


def dumps(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2) + "\n"


def csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        r = tuple(r) + ("",) * (5 - len(r))
        w.writerow([fmt_value(v) for v in r[:5]])
    return buf.getvalue()


def write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def tiling_svg(result, size: int = 600) -> str:
    """Target outline, one colour per tile shape, residual in grey."""
    A = result.A
    if A.dim != 2:
        raise ValueError("SVG rendering needs a 2-d tiling")
    bb = A.bbox()
    w, h = float(bb.hi[0] - bb.lo[0]), float(bb.hi[1] - bb.lo[1])
    s = size / max(w, h)

    def rect(lo, hi, style):
        x = (float(lo[0] - bb.lo[0])) * s
        y = (float(bb.hi[1] - hi[1])) * s
        return (f'<rect x="{x:.3f}" y="{y:.3f}" width="{float(hi[0] - lo[0]) * s:.3f}" '
                f'height="{float(hi[1] - lo[1]) * s:.3f}" {style}/>')

    palette = ["#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#edc948", "#b07aa1", "#9c755f"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{w * s:.0f}" height="{h * s:.0f}">']
    for b in A.boxes:
        out.append(rect(b.lo, b.hi, 'fill="white" stroke="black" stroke-width="1"'))
    for i, (shape, cs) in enumerate(zip(result.shapes, result.centers)):
        col = palette[i % len(palette)]
        for c in cs:
            for b in shape.shape.translate(c).boxes:
                out.append(rect(b.lo, b.hi, f'fill="{col}" fill-opacity="0.35" stroke="{col}" stroke-width="0.5"'))
    for b in result.residual.boxes:
        out.append(rect(b.lo, b.hi, 'fill="#888888" fill-opacity="0.8"'))
    out.append("</svg>")
    return "\n".join(out) + "\n"
