"""Quadratic reference implementations used to check the index.

Nothing here touches the sweep, the persistent trees or the upper envelope;
only the exact predicates of the geometry module and the surface heights of
the terrain module are shared.
"""
from __future__ import annotations

import logging
from fractions import Fraction
from itertools import combinations
from typing import Iterable

from rbindex.core.errors import InconsistentOracle, InvalidInput
from rbindex.services.geometry import (
    Orientation,
    Point,
    Segment,
    SegmentSetPair,
    crossing_point,
    orientation,
    validate_input,
)
from rbindex.services.rb_search import CrossingRef, Oracle, OracleAnswer
from rbindex.services.terrain import (
    ConvexTerrain,
    DistanceCase,
    Mode,
    Terrain,
    VDistResult,
    height_at,
    validate_terrain,
)

logger = logging.getLogger(__name__)


def _require_valid(pair: SegmentSetPair) -> None:
    report = validate_input(pair)
    if not report.ok:
        raise InvalidInput("input violates general position", report)


def naive_crossings(pair: SegmentSetPair) -> dict[int, list[CrossingRef]]:
    """All crossings by pairwise tests, per red id, sorted along the red edge."""
    _require_valid(pair)
    result: dict[int, list[CrossingRef]] = {}
    for red in pair.reds:
        refs = []
        for blue in pair.blues:
            point = crossing_point(red, blue)
            if point is not None:
                refs.append(CrossingRef(red.id, blue.id, point))
        refs.sort(key=lambda ref: ref.point.x)
        result[red.id] = refs
    return result


def _same_side_or_on(line: Segment, point: Point, reference: Point) -> bool:
    side = orientation(line.a, line.b, point)
    return side is Orientation.COLLINEAR or side is orientation(line.a, line.b, reference)


def witness(r: Segment, b: Segment, endpoints: Iterable[Point]) -> Point:
    """Leftmost endpoint inside the closed wedge to the right of the crossing of r and b."""
    members = [
        p
        for p in endpoints
        if _same_side_or_on(r, p, b.b) and _same_side_or_on(b, p, r.b)
    ]
    return min(members, key=lambda p: (p.x, p.y))


def naive_batched_search(pair: SegmentSetPair, oracle: Oracle, *, strict: bool = False) -> list[CrossingRef]:
    """Binary search over each edge's explicit crossing list with the same oracle."""
    found = []
    for red_id, refs in sorted(naive_crossings(pair).items()):
        if not refs:
            continue
        lo, hi = 0, len(refs)
        hit = None
        while lo < hi:
            mid = (lo + hi) // 2
            answer = oracle(refs[mid])
            if answer is OracleAnswer.FOUND:
                hit = refs[mid]
                break
            if answer is OracleAnswer.GO_LEFT:
                hi = mid
            else:
                lo = mid + 1
        if hit is not None:
            found.append(hit)
        elif strict:
            raise InconsistentOracle(f"search on red edge {red_id} ended without a Found answer")
    return found


# ---------------------------
# Terrain distance
# ---------------------------

Crease = tuple[Fraction, Fraction, Fraction]


def _creases(b: ConvexTerrain) -> list[tuple[int, int, Crease]]:
    """Line A*x + B*y + C = 0 where planes i and j agree, for every non-parallel pair."""
    creases = []
    for (i, (ai, bi, ci)), (j, (aj, bj, cj)) in combinations(enumerate(b.planes), 2):
        if (ai, bi) != (aj, bj):
            creases.append((i, j, (ai - aj, bi - bj, ci - cj)))
    return creases


def _on_envelope(b: ConvexTerrain, plane: int, p: Point) -> bool:
    a, slope_y, c = b.planes[plane]
    return b.domain.contains(p) and a * p.x + slope_y * p.y + c == height_at(b, p)


def _blue_vertices(b: ConvexTerrain, creases: list[tuple[int, int, Crease]]) -> set[Point]:
    """Points where three planes meet on top, and where a crease on top reaches a side of the domain."""
    domain = b.domain
    found = set()
    for (i, _, (a1, b1, c1)), (_, _, (a2, b2, c2)) in combinations(creases, 2):
        det = a1 * b2 - a2 * b1
        if det != 0:
            p = Point((b1 * c2 - b2 * c1) / det, (a2 * c1 - a1 * c2) / det)
            if _on_envelope(b, i, p):
                found.add(p)
    for i, _, (a, slope_y, c) in creases:
        sides = []
        if slope_y != 0:
            sides += [Point(x, -(a * x + c) / slope_y) for x in (domain.xmin, domain.xmax)]
        if a != 0:
            sides += [Point(-(slope_y * y + c) / a, y) for y in (domain.ymin, domain.ymax)]
        found.update(p for p in sides if _on_envelope(b, i, p))
    return found


def _crease_param(p: Point, q: Point, crease: Crease) -> Fraction | None:
    a, slope_y, c = crease
    denom = a * (q.x - p.x) + slope_y * (q.y - p.y)
    if denom == 0:
        return None
    return -(a * p.x + slope_y * p.y + c) / denom


def _gap(r: Terrain, b: ConvexTerrain, p: Point) -> Fraction:
    return height_at(r, p) - height_at(b, p)


def _zero_between(r: Terrain, b: ConvexTerrain, creases, p: Point, q: Point) -> Point:
    """A point of pq where the gap vanishes, given opposite signs at p and q."""
    vx, vy = q.x - p.x, q.y - p.y
    params = {Fraction(0), Fraction(1)}
    for crease in creases:
        t = _crease_param(p, q, crease[2])
        if t is not None:
            params.add(t)
    for i, j in r.edges():
        u, w = r.point(i), r.point(j)
        ex, ey = w.x - u.x, w.y - u.y
        denom = vx * ey - vy * ex
        if denom != 0:
            params.add(((u.x - p.x) * ey - (u.y - p.y) * ex) / denom)
    for k in range(len(r.vertices)):
        u = r.point(k)
        if vx * (u.y - p.y) - vy * (u.x - p.x) == 0:
            params.add(((u.x - p.x) * vx + (u.y - p.y) * vy) / (vx * vx + vy * vy))

    def at(t: Fraction) -> Point:
        return Point(p.x + t * vx, p.y + t * vy)

    ts = sorted(t for t in params if 0 <= t <= 1)
    values = [_gap(r, b, at(t)) for t in ts]
    for (t0, v0), (t1, v1) in zip(zip(ts, values), zip(ts[1:], values[1:])):
        if v0 == 0:
            return at(t0)
        if (v0 > 0) != (v1 > 0):
            return at(t0 + (t1 - t0) * v0 / (v0 - v1))
    return at(ts[-1])


def naive_terrain_distance(r: Terrain, b: ConvexTerrain, mode: Mode = "max") -> VDistResult:
    """
    Extreme |z_R - z_B| over every vertex of the overlay of both surfaces.

    The envelope is never built: its vertices come from intersecting plane
    pairs and triples, and every candidate is kept only where the planes
    involved are the topmost ones.
    """
    if r.domain != b.domain:
        raise InvalidInput("the terrains do not share a domain")
    report = validate_terrain(r)
    if not report.ok:
        raise InvalidInput("polyhedral terrain is not a triangulation of the domain", report)

    creases = _creases(b)
    candidates: list[tuple[Fraction, Point, DistanceCase]] = []
    for k in range(len(r.vertices)):
        p = r.point(k)
        candidates.append((_gap(r, b, p), p, DistanceCase.VERTEX_FACET))
    for p in sorted(_blue_vertices(b, creases), key=lambda p: (p.x, p.y)):
        candidates.append((_gap(r, b, p), p, DistanceCase.FACET_VERTEX))
    for i, j in r.edges():
        u, w = r.point(i), r.point(j)
        for plane, _, crease in creases:
            t = _crease_param(u, w, crease)
            if t is not None and 0 < t < 1:
                p = Point(u.x + t * (w.x - u.x), u.y + t * (w.y - u.y))
                if _on_envelope(b, plane, p):
                    candidates.append((_gap(r, b, p), p, DistanceCase.EDGE_EDGE))
    logger.debug("exhaustive terrain distance: %d candidates", len(candidates))

    if mode == "max":
        value, point, case = max(candidates, key=lambda c: abs(c[0]))
        return VDistResult(abs(value), point, case)
    high = max(candidates, key=lambda c: c[0])
    low = min(candidates, key=lambda c: c[0])
    if low[0] <= 0 <= high[0]:
        zero = next((c for c in candidates if c[0] == 0), None)
        if zero is not None:
            return VDistResult(Fraction(0), zero[1], zero[2])
        return VDistResult(Fraction(0), _zero_between(r, b, creases, high[1], low[1]), DistanceCase.SURFACE_CROSSING)
    value, point, case = min(candidates, key=lambda c: abs(c[0]))
    return VDistResult(abs(value), point, case)
