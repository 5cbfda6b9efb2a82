"""Deterministic CSV / JSON / SVG artifacts.

Numbers are written as decimal strings with enough significant digits to
round-trip at the run's precision; no timestamps or host data are recorded,
so identical runs produce identical files.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from xml.sax.saxutils import escape

import gmpy2

from .kernel.precision import PrecisionContext, format_complex, format_real, to_mpc, to_mpfr

SCHEMA_VERSION = 1


def dec(x, ctx: PrecisionContext) -> str:
    with ctx.scope():
        return format_real(to_mpfr(x), ctx.digits)


def cdec(z, ctx: PrecisionContext) -> list[str]:
    with ctx.scope():
        return format_complex(to_mpc(z), ctx.digits)


def csv_text(header: list[str], rows: list[list], comments: list[str] = ()) -> str:
    """``#`` comment lines, a ``#``-prefixed column header, then data rows."""
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    buf.write("# " + ",".join(header) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def read_csv(text: str) -> tuple[list[str], list[list[str]]]:
    """Inverse of :func:`csv_text`: (column names, rows of strings)."""
    lines = text.splitlines()
    comments = [ln for ln in lines if ln.startswith("#")]
    header = comments[-1][1:].strip().split(",") if comments else []
    body = [ln for ln in lines if not ln.startswith("#")]
    return header, [row for row in csv.reader(body)]


def json_text(obj: dict) -> str:
    out = {"schema_version": SCHEMA_VERSION}
    out.update(obj)
    return json.dumps(out, indent=2, sort_keys=True) + "\n"


def write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def pole_svg(support: tuple[float, float] | None, poles: list[complex], marks: list[complex] = (),
             title: str = "", size: int = 480) -> str:
    """Scatter of poles (circles) with the support drawn as a segment.

    ``marks`` (e.g. poles of the rational part) are drawn as crosses.  The
    view box covers all items with a 10 % margin, equal scaling on both axes.
    """
    xs = [p.real for p in poles] + [m.real for m in marks]
    ys = [p.imag for p in poles] + [m.imag for m in marks]
    if support is not None:
        xs += list(support)
        ys += [0.0, 0.0]
    if not xs:
        xs, ys = [-1.0, 1.0], [-1.0, 1.0]
    lo_x, hi_x, lo_y, hi_y = min(xs), max(xs), min(ys), max(ys)
    span = max(hi_x - lo_x, hi_y - lo_y, 1e-12)
    cx, cy = (lo_x + hi_x) / 2, (lo_y + hi_y) / 2
    half = 0.55 * span
    scale = size / (2 * half)

    def px(z: complex) -> tuple[str, str]:
        return f"{(z.real - cx + half) * scale:.3f}", f"{(cy + half - z.imag) * scale:.3f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
    ]
    if title:
        parts.append(f'<title>{escape(title)}</title>')
    if support is not None:
        (x1, y1), (x2, y2) = px(complex(support[0], 0)), px(complex(support[1], 0))
        parts.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="black" stroke-width="2"/>')
    for p in poles:
        x, y = px(p)
        parts.append(f'<circle cx="{x}" cy="{y}" r="3" fill="none" stroke="blue"/>')
    for m in marks:
        x, y = px(m)
        fx, fy = float(x), float(y)
        parts.append(
            f'<path d="M{fx - 4:.3f} {fy - 4:.3f}L{fx + 4:.3f} {fy + 4:.3f}M{fx - 4:.3f} {fy + 4:.3f}L{fx + 4:.3f} {fy - 4:.3f}" stroke="red"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def parse_decimal(s: str, ctx: PrecisionContext):
    with ctx.scope():
        return gmpy2.mpfr(s)
