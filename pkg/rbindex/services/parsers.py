"""Readers and writers for the plain-text instance formats.

Segment files hold one ``R x1 y1 x2 y2`` or ``B x1 y1 x2 y2`` line per
segment; ids are assigned per color in file order, starting at 1. Terrain
files hold a ``domain xmin ymin xmax ymax`` header, ``v x y z`` vertex lines
and ``f i j k`` triangle lines with 1-based indices. Planes files hold the
same header and ``p a b c`` lines for z = a*x + b*y + c. Blank lines and
``#`` comments are ignored everywhere.
"""
from __future__ import annotations

import logging
from fractions import Fraction
from pathlib import Path
from typing import Iterator

from rbindex.core.errors import InputFormatError
from rbindex.services.geometry import Color, Segment, SegmentSetPair
from rbindex.services.terrain import ConvexTerrain, Domain, Terrain
from rbindex.utils.common import format_coord, parse_coord

logger = logging.getLogger(__name__)


def _records(text: str) -> Iterator[tuple[int, list[str]]]:
    for line_no, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if line:
            yield line_no, line.split()


def _coords(fields: list[str], expected: int, line_no: int) -> list[Fraction]:
    if len(fields) != expected:
        raise InputFormatError(f"expected {expected} values, got {len(fields)}", line_no)
    try:
        return [parse_coord(f) for f in fields]
    except ValueError as e:
        raise InputFormatError(str(e), line_no) from e


def _read(path: Path) -> str:
    text = Path(path).read_text(encoding="utf-8")
    logger.debug("read %s (%d bytes)", path, len(text))
    return text


# ---------------------------
# Segments
# ---------------------------

def parse_segments(text: str) -> SegmentSetPair:
    reds, blues = [], []
    for line_no, fields in _records(text):
        tag = fields[0].upper()
        if tag not in ("R", "B"):
            raise InputFormatError(f"unknown record {fields[0]!r}", line_no)
        x1, y1, x2, y2 = _coords(fields[1:], 4, line_no)
        group = reds if tag == "R" else blues
        group.append(Segment.of(len(group) + 1, Color(tag), (x1, y1), (x2, y2)))
    return SegmentSetPair(tuple(reds), tuple(blues))


def load_segments(path: Path) -> SegmentSetPair:
    return parse_segments(_read(path))


def format_segments(pair: SegmentSetPair) -> str:
    lines = [
        " ".join([s.color.value] + [format_coord(c) for c in (s.a.x, s.a.y, s.b.x, s.b.y)])
        for s in pair.segments
    ]
    return "".join(line + "\n" for line in lines)


# ---------------------------
# Terrains
# ---------------------------

def _domain(fields: list[str], line_no: int, current: Domain | None) -> Domain:
    if current is not None:
        raise InputFormatError("domain given twice", line_no)
    return Domain(*_coords(fields[1:], 4, line_no))


def parse_terrain(text: str) -> Terrain:
    domain = None
    vertices, triangles = [], []
    for line_no, fields in _records(text):
        tag = fields[0].lower()
        if tag == "domain":
            domain = _domain(fields, line_no, domain)
        elif tag == "v":
            vertices.append(tuple(_coords(fields[1:], 3, line_no)))
        elif tag == "f":
            if len(fields) != 4 or not all(f.isdigit() for f in fields[1:]):
                raise InputFormatError("a face needs three 1-based vertex indices", line_no)
            tri = tuple(int(f) - 1 for f in fields[1:])
            if any(not 0 <= v < len(vertices) for v in tri):
                raise InputFormatError(f"face refers to a vertex not yet defined: {fields[1:]}", line_no)
            triangles.append(tri)
        else:
            raise InputFormatError(f"unknown record {fields[0]!r}", line_no)
    if domain is None:
        raise InputFormatError("missing domain line")
    return Terrain(domain, tuple(vertices), tuple(triangles))


def parse_planes(text: str) -> ConvexTerrain:
    domain = None
    planes = []
    for line_no, fields in _records(text):
        tag = fields[0].lower()
        if tag == "domain":
            domain = _domain(fields, line_no, domain)
        elif tag == "p":
            planes.append(tuple(_coords(fields[1:], 3, line_no)))
        else:
            raise InputFormatError(f"unknown record {fields[0]!r}", line_no)
    if domain is None:
        raise InputFormatError("missing domain line")
    return ConvexTerrain(domain, tuple(planes))


def load_terrain(path: Path) -> Terrain:
    return parse_terrain(_read(path))


def load_planes(path: Path) -> ConvexTerrain:
    return parse_planes(_read(path))


def _domain_line(d: Domain) -> str:
    return "domain " + " ".join(format_coord(c) for c in (d.xmin, d.ymin, d.xmax, d.ymax))


def format_terrain(t: Terrain) -> str:
    lines = [_domain_line(t.domain)]
    lines += ["v " + " ".join(format_coord(c) for c in v) for v in t.vertices]
    lines += ["f " + " ".join(str(i + 1) for i in tri) for tri in t.triangles]
    return "".join(line + "\n" for line in lines)


def format_planes(b: ConvexTerrain) -> str:
    lines = [_domain_line(b.domain)]
    lines += ["p " + " ".join(format_coord(c) for c in plane) for plane in b.planes]
    return "".join(line + "\n" for line in lines)
