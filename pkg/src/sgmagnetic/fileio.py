"""Field-spec text format, CSV tables, flat config files and SVG scatter plots."""

from __future__ import annotations

import csv
import io
import math
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

from .forms import FieldSpec
from .topology import format_word

SIG_DIGITS = 12
SWEEP_HEADER = ("beta", "index", "lambda_raw", "lambda_renormalized")
DECIMATION_HEADER = ("m0", "s", "branchword", "lambda", "multiplicity", "series", "lambda_level")
LADDER_HEADER = ("beta", "k_or_sigma", "formula_value", "matched_graph_value", "rel_error")

_WORD = re.compile(r"\.|[012]+")
_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


class FieldSpecError(ValueError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


def parse_field_spec(text: str) -> FieldSpec:
    """Parse ``word:beta(,word:beta)*``; words over 0,1,2 with '.' for the empty word.

    Blank text is the zero field.
    """
    if not text.strip():
        return FieldSpec()
    terms, seen = [], set()
    pos = 0
    while True:
        while pos < len(text) and text[pos] == " ":
            pos += 1
        start = pos
        w = _WORD.match(text, pos)
        if not w:
            bad = text[pos] if pos < len(text) else "end of input"
            raise FieldSpecError(f"invalid word character {bad!r}", pos)
        pos = w.end()
        if pos >= len(text) or text[pos] != ":":
            what = repr(text[pos]) if pos < len(text) else "end of input"
            raise FieldSpecError(f"expected ':' after hole word, got {what}", pos)
        pos += 1
        num = _NUMBER.match(text, pos)
        if not num:
            raise FieldSpecError("malformed beta value", pos)
        word = "" if w.group() == "." else w.group()
        if word in seen:
            raise FieldSpecError(f"duplicate hole {format_word(word)}", start)
        seen.add(word)
        terms.append((word, float(num.group())))
        pos = num.end()
        while pos < len(text) and text[pos] == " ":
            pos += 1
        if pos == len(text):
            break
        if text[pos] != ",":
            raise FieldSpecError(f"unexpected {text[pos]!r}", pos)
        pos += 1
    return FieldSpec(tuple(terms))


def format_field_spec(spec: FieldSpec) -> str:
    return str(spec)


def fmt(x) -> str:
    """Fixed 12 significant digits."""
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{float(x):.{SIG_DIGITS}g}"


def _write_rows(header, rows, path=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return text


def sweep_rows(table):
    for row in table.rows:
        for i, (raw, ren) in enumerate(zip(row.raw, row.renormalized)):
            yield (fmt(row.beta), i, fmt(raw), fmt(ren))


def write_sweep_csv(table, path=None) -> str:
    return _write_rows(SWEEP_HEADER, sweep_rows(table), path)


def write_decimation_csv(entries, path=None) -> str:
    rows = (
        (e.record.m0, e.record.s, e.record.word, fmt(e.eigenvalue), e.multiplicity, str(e.series), fmt(e.level_value))
        for e in entries
    )
    return _write_rows(DECIMATION_HEADER, rows, path)


def write_ladder_csv(report, path=None) -> str:
    rows = ((fmt(r.beta), r.label, fmt(r.formula), fmt(r.graph), fmt(r.rel_error)) for r in report.rows)
    return _write_rows(LADDER_HEADER, rows, path)


def read_csv(path_or_text):
    """Rows of a CSV file (or literal text containing a newline) as dicts."""
    text = path_or_text if "\n" in str(path_or_text) else Path(path_or_text).read_text()
    return list(csv.DictReader(io.StringIO(text)))


def read_config(path) -> dict:
    """Flat ``key = value`` lines; '#' starts a comment."""
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


# ---------------------------------------------------------------------------
# SVG


@dataclass
class SvgScatter:
    """Scatter plot of (x, y) points; markers only, no lines between them."""

    points: list
    x_range: tuple
    y_range: tuple
    width: int = 640
    height: int = 480
    x_label: str = "beta"
    y_label: str = "eigenvalue"
    marker_radius: float = 1.6
    margin: dict = field(default_factory=lambda: {"left": 60, "right": 20, "top": 20, "bottom": 45})

    def __post_init__(self):
        (x0, x1), (y0, y1) = self.x_range, self.y_range
        if not (x1 > x0 and y1 > y0):
            raise ValueError("axis ranges must be increasing")
        for x, y in self.points:
            if not (x0 <= x <= x1 and y0 <= y <= y1):
                raise ValueError(f"point ({x}, {y}) outside the axis ranges")

    def _map(self, x, y):
        m = self.margin
        (x0, x1), (y0, y1) = self.x_range, self.y_range
        pw = self.width - m["left"] - m["right"]
        ph = self.height - m["top"] - m["bottom"]
        return m["left"] + (x - x0) / (x1 - x0) * pw, m["top"] + (y1 - y) / (y1 - y0) * ph

    def render(self) -> str:
        svg = ET.Element(
            "svg",
            xmlns="http://www.w3.org/2000/svg",
            version="1.1",
            width=str(self.width),
            height=str(self.height),
            viewBox=f"0 0 {self.width} {self.height}",
        )
        m = self.margin
        left, top = m["left"], m["top"]
        right, bottom = self.width - m["right"], self.height - m["bottom"]
        ET.SubElement(svg, "rect", x="0", y="0", width=str(self.width), height=str(self.height), fill="white")
        axes = ET.SubElement(svg, "g", stroke="black", fill="none")
        ET.SubElement(axes, "path", d=f"M{left},{top} L{left},{bottom} L{right},{bottom}")
        labels = ET.SubElement(svg, "g", {"font-family": "sans-serif", "font-size": "12"})
        for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
            x = self.x_range[0] + frac * (self.x_range[1] - self.x_range[0])
            px, _ = self._map(x, self.y_range[0])
            _text(labels, px, bottom + 16, f"{x:g}", "middle")
            y = self.y_range[0] + frac * (self.y_range[1] - self.y_range[0])
            _, py = self._map(self.x_range[0], y)
            _text(labels, left - 6, py + 4, f"{y:g}", "end")
        _text(labels, (left + right) / 2, self.height - 8, self.x_label, "middle")
        mid = (top + bottom) / 2
        _text(labels, 14, mid, self.y_label, "middle", transform=f"rotate(-90 14 {mid:.2f})")
        marks = ET.SubElement(svg, "g", {"fill": "black", "class": "markers"})
        r = f"{self.marker_radius:g}"
        for x, y in self.points:
            px, py = self._map(x, y)
            ET.SubElement(marks, "circle", cx=f"{px:.2f}", cy=f"{py:.2f}", r=r)
        return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(svg, encoding="unicode") + "\n"

    def write(self, path) -> str:
        text = self.render()
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
        return text


def _text(parent, x, y, content, anchor, **extra):
    attrs = {"x": f"{x:.2f}", "y": f"{y:.2f}", "text-anchor": anchor, **extra}
    ET.SubElement(parent, "text", attrs).text = content


def sweep_scatter(table, cutoff=None, **kw) -> SvgScatter:
    """Scatter of a sweep table: beta across, renormalized eigenvalue up."""
    pts = table.points()
    if cutoff is not None:
        pts = [(b, v) for b, v in pts if v <= cutoff]
    betas = table.betas()
    x0, x1 = min(betas), max(betas)
    if x1 == x0:
        x0, x1 = x0 - 0.5, x1 + 0.5
    ys = [v for _, v in pts] or [0.0, 1.0]
    y0 = min(0.0, min(ys))
    y1 = cutoff if cutoff is not None and math.isfinite(cutoff) else max(ys)
    if y1 <= y0:
        y1 = y0 + 1.0
    return SvgScatter(pts, (x0, x1), (y0, y1), **kw)
