"""Exact rational geometry: points, colored segments, predicates and input validation.

Coordinates are ``fractions.Fraction`` throughout; no predicate ever sees a float.
"""
from __future__ import annotations

import enum
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from rbindex.utils.common import format_coord, parse_coord

logger = logging.getLogger(__name__)

Coord = Fraction


class Color(str, enum.Enum):
    RED = "R"
    BLUE = "B"

    @property
    def other(self) -> "Color":
        return Color.BLUE if self is Color.RED else Color.RED


class Orientation(enum.IntEnum):
    RIGHT = -1
    COLLINEAR = 0
    LEFT = 1


class Contact(enum.Enum):
    NONE = "none"
    PROPER = "proper"
    SHARED_ENDPOINT = "shared endpoint"
    TOUCH = "touch"
    OVERLAP = "overlap"


def as_coord(value: Fraction | int | str) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return parse_coord(value)
    if isinstance(value, float):
        raise TypeError("floating point coordinates are not accepted")
    return Fraction(value)


@dataclass(frozen=True, slots=True)
class Point:
    x: Fraction
    y: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x", as_coord(self.x))
        object.__setattr__(self, "y", as_coord(self.y))

    def __str__(self) -> str:
        return f"({format_coord(self.x)}, {format_coord(self.y)})"


@dataclass(frozen=True, slots=True)
class Segment:
    id: int
    color: Color
    a: Point
    b: Point

    @classmethod
    def of(cls, id: int, color: Color | str, a: tuple, b: tuple, *, normalize: bool = True) -> "Segment":
        """Build a segment from coordinate pairs; endpoints are swapped so a.x < b.x."""
        pa, pb = Point(*a), Point(*b)
        if normalize and (pb.x, pb.y) < (pa.x, pa.y):
            pa, pb = pb, pa
        return cls(id, Color(color), pa, pb)

    @property
    def lo_x(self) -> Fraction:
        return self.a.x

    @property
    def hi_x(self) -> Fraction:
        return self.b.x

    def y_at(self, x: Fraction) -> Fraction:
        """Height of the supporting line at x (segment must be non-vertical)."""
        return self.a.y + (self.b.y - self.a.y) * (x - self.a.x) / (self.b.x - self.a.x)

    def __str__(self) -> str:
        return f"{self.color.value}{self.id} {self.a}-{self.b}"


@dataclass(frozen=True)
class SegmentSetPair:
    reds: tuple[Segment, ...] = ()
    blues: tuple[Segment, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "reds", tuple(self.reds))
        object.__setattr__(self, "blues", tuple(self.blues))

    @classmethod
    def from_coords(cls, reds: Iterable[tuple], blues: Iterable[tuple]) -> "SegmentSetPair":
        """Build from ``(x1, y1, x2, y2)`` tuples; ids are 1-based per color."""
        return cls(
            tuple(Segment.of(i, Color.RED, (x1, y1), (x2, y2)) for i, (x1, y1, x2, y2) in enumerate(reds, 1)),
            tuple(Segment.of(i, Color.BLUE, (x1, y1), (x2, y2)) for i, (x1, y1, x2, y2) in enumerate(blues, 1)),
        )

    @property
    def segments(self) -> tuple[Segment, ...]:
        return self.reds + self.blues

    def __len__(self) -> int:
        return len(self.reds) + len(self.blues)


# ---------------------------
# Predicates
# ---------------------------

def cross(p: Point, q: Point, r: Point) -> Fraction:
    return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)


def orientation(p: Point, q: Point, r: Point) -> Orientation:
    """Sign of the cross product of (q - p) and (r - p); LEFT is positive."""
    value = cross(p, q, r)
    if value > 0:
        return Orientation.LEFT
    if value < 0:
        return Orientation.RIGHT
    return Orientation.COLLINEAR


def _on_closed_segment(s: Segment, p: Point) -> bool:
    """p is collinear with s and lies within its bounding box."""
    return (
        min(s.a.x, s.b.x) <= p.x <= max(s.a.x, s.b.x)
        and min(s.a.y, s.b.y) <= p.y <= max(s.a.y, s.b.y)
    )


def segment_contact(s: Segment, t: Segment) -> Contact:
    o1 = orientation(s.a, s.b, t.a)
    o2 = orientation(s.a, s.b, t.b)
    o3 = orientation(t.a, t.b, s.a)
    o4 = orientation(t.a, t.b, s.b)

    if o1 == o2 == o3 == o4 == Orientation.COLLINEAR:
        lo = max(min(s.a.x, s.b.x), min(t.a.x, t.b.x))
        hi = min(max(s.a.x, s.b.x), max(t.a.x, t.b.x))
        if s.a.x == s.b.x or t.a.x == t.b.x:
            lo = max(min(s.a.y, s.b.y), min(t.a.y, t.b.y))
            hi = min(max(s.a.y, s.b.y), max(t.a.y, t.b.y))
        if lo < hi:
            return Contact.OVERLAP
        if lo == hi:
            return Contact.SHARED_ENDPOINT
        return Contact.NONE

    if o1 * o2 < 0 and o3 * o4 < 0:
        return Contact.PROPER

    if {s.a, s.b} & {t.a, t.b}:
        return Contact.SHARED_ENDPOINT

    if (
        (o1 == Orientation.COLLINEAR and _on_closed_segment(s, t.a))
        or (o2 == Orientation.COLLINEAR and _on_closed_segment(s, t.b))
        or (o3 == Orientation.COLLINEAR and _on_closed_segment(t, s.a))
        or (o4 == Orientation.COLLINEAR and _on_closed_segment(t, s.b))
    ):
        return Contact.TOUCH
    return Contact.NONE


def crossing_point(s: Segment, t: Segment) -> Point | None:
    """Interior intersection of two properly crossing segments, else None."""
    if segment_contact(s, t) is not Contact.PROPER:
        return None
    dx_s, dy_s = s.b.x - s.a.x, s.b.y - s.a.y
    dx_t, dy_t = t.b.x - t.a.x, t.b.y - t.a.y
    denom = dx_s * dy_t - dy_s * dx_t
    lam = ((t.a.x - s.a.x) * dy_t - (t.a.y - s.a.y) * dx_t) / denom
    return Point(s.a.x + lam * dx_s, s.a.y + lam * dy_s)


def position_along(s: Segment, p: Point) -> Fraction:
    """Parameter of p along s, 0 at s.a and 1 at s.b."""
    return (p.x - s.a.x) / (s.b.x - s.a.x)


def integer_scale(points: Iterable[Point]) -> int:
    """Least common denominator of all coordinates; scaling by it makes them integers."""
    scale = 1
    for p in points:
        scale = math.lcm(scale, p.x.denominator, p.y.denominator)
    return scale


# ---------------------------
# Validation
# ---------------------------

@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str = ""
    red_ids: tuple[int, ...] = ()
    blue_ids: tuple[int, ...] = ()

    def __str__(self) -> str:
        ids = " ".join(
            [f"R{i}" for i in self.red_ids] + [f"B{i}" for i in self.blue_ids]
        )
        text = self.kind if not self.detail else f"{self.kind}: {self.detail}"
        return f"{text} [{ids}]" if ids else text


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def add(self, kind: str, detail: str, segments: Sequence[Segment]) -> None:
        reds = tuple(sorted({s.id for s in segments if s.color is Color.RED}))
        blues = tuple(sorted({s.id for s in segments if s.color is Color.BLUE}))
        self.violations.append(Violation(kind, detail, reds, blues))

    def lines(self) -> list[str]:
        return [str(v) for v in self.violations]


def structural_violations(pair: SegmentSetPair) -> ValidationReport:
    """The O(n log n) part of validation: monotone segments, unique ids, distinct endpoint x."""
    report = ValidationReport()
    for color, group in ((Color.RED, pair.reds), (Color.BLUE, pair.blues)):
        seen: dict[int, Segment] = {}
        for s in group:
            if s.color is not color:
                report.add("wrong color", f"segment listed as {color.value}", [s])
            if s.id in seen:
                report.add("duplicate id", f"{color.value}{s.id}", [seen[s.id], s])
            seen[s.id] = s
            if s.a.x == s.b.x:
                report.add("vertical segment", f"x={format_coord(s.a.x)}", [s])
            elif s.a.x > s.b.x:
                report.add("endpoint order", "a.x > b.x", [s])

    by_x: dict[Fraction, dict[Point, list[Segment]]] = defaultdict(lambda: defaultdict(list))
    for s in pair.segments:
        by_x[s.a.x][s.a].append(s)
        by_x[s.b.x][s.b].append(s)
    for x in sorted(by_x):
        points = by_x[x]
        if len(points) > 1:
            owners = [s for group in points.values() for s in group]
            report.add(f"duplicate endpoint x={format_coord(x)}", f"{len(points)} distinct points", owners)
    return report


def validate_input(pair: SegmentSetPair) -> ValidationReport:
    """
    Check every general-position assumption of the sweep.

    Pairs are only tested when their x-ranges overlap, so the cost is
    O(n log n) plus the number of x-overlapping pairs.
    """
    report = structural_violations(pair)
    candidates = sorted(
        (s for s in pair.segments if s.a.x < s.b.x), key=lambda s: (s.lo_x, s.color.value, s.id)
    )
    active: list[Segment] = []
    for s in candidates:
        active = [t for t in active if t.hi_x >= s.lo_x]
        s_lo_y, s_hi_y = min(s.a.y, s.b.y), max(s.a.y, s.b.y)
        for t in active:
            if max(t.a.y, t.b.y) < s_lo_y or min(t.a.y, t.b.y) > s_hi_y:
                continue
            contact = segment_contact(s, t)
            if contact in (Contact.NONE, Contact.SHARED_ENDPOINT):
                continue
            if s.color is t.color:
                report.add("same-color crossing", contact.value, [s, t])
            elif contact is Contact.OVERLAP:
                report.add("collinear overlap", "", [s, t])
            elif contact is Contact.TOUCH:
                report.add("endpoint on segment", "", [s, t])
        active.append(s)

    if not report.ok:
        logger.debug("validation found %d violations", len(report.violations))
    return report


@dataclass(frozen=True)
class IntegerFrame:
    """Uniform rescaling that turns every coordinate of an instance into an integer.

    Orientation signs are invariant under positive scaling, so predicates
    evaluated in the frame agree with the rational ones.
    """

    scale: int = 1

    @classmethod
    def of(cls, points: Iterable[Point]) -> "IntegerFrame":
        return cls(integer_scale(points))

    def __call__(self, p: Point) -> tuple[int, int]:
        x, y = p.x * self.scale, p.y * self.scale
        return x.numerator, y.numerator
