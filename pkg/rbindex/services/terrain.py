"""Vertical distance between a polyhedral terrain and a convex terrain.

Along any edge of the polyhedral terrain R the difference D = z_R - z_B is
concave, since z_R is linear there and z_B (an upper envelope of planes) is
convex. Its maximum over the edge is therefore found by a binary search over
the edge's crossings with the envelope's projected edges, which is exactly
what the red-blue index answers with a slope-sign oracle. Every other
extremum of D or -D sits at a vertex of one of the two surfaces.

Both terrains live over a common rectangular domain.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import count
from typing import Iterable, Literal

from rbindex.core.errors import InvalidInput, OutOfDomain
from rbindex.services.geometry import (
    Color,
    Orientation,
    Point,
    Segment,
    SegmentSetPair,
    ValidationReport,
    as_coord,
    orientation,
    position_along,
    validate_input,
)
from rbindex.services.rb_search import CrossingRef, OracleAnswer, batched_search, preprocess

logger = logging.getLogger(__name__)

Plane = tuple[Fraction, Fraction, Fraction]
Vertex = tuple[Fraction, Fraction, Fraction]
Mode = Literal["max", "min"]


class DistanceCase(str, enum.Enum):
    VERTEX_FACET = "VertexFacet"
    FACET_VERTEX = "FacetVertex"
    EDGE_EDGE = "EdgeEdge"
    SURFACE_CROSSING = "SurfaceCrossing"


@dataclass(frozen=True)
class Domain:
    xmin: Fraction
    ymin: Fraction
    xmax: Fraction
    ymax: Fraction

    def __post_init__(self):
        for name in ("xmin", "ymin", "xmax", "ymax"):
            object.__setattr__(self, name, as_coord(getattr(self, name)))
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise InvalidInput(f"empty domain [{self.xmin},{self.xmax}]x[{self.ymin},{self.ymax}]")

    def contains(self, p: Point) -> bool:
        return self.xmin <= p.x <= self.xmax and self.ymin <= p.y <= self.ymax

    def corners(self) -> tuple[Point, Point, Point, Point]:
        return (
            Point(self.xmin, self.ymin),
            Point(self.xmax, self.ymin),
            Point(self.xmax, self.ymax),
            Point(self.xmin, self.ymax),
        )

    @property
    def area(self) -> Fraction:
        return (self.xmax - self.xmin) * (self.ymax - self.ymin)

    def on_common_side(self, p: Point, q: Point) -> bool:
        """Both points lie on the same side of the rectangle."""
        return (
            (p.x == q.x and p.x in (self.xmin, self.xmax))
            or (p.y == q.y and p.y in (self.ymin, self.ymax))
        )


def plane_at(plane: Plane, p: Point) -> Fraction:
    a, b, c = plane
    return a * p.x + b * p.y + c


def _plane_through(p0: Vertex, p1: Vertex, p2: Vertex) -> Plane:
    ux, uy, uz = p1[0] - p0[0], p1[1] - p0[1], p1[2] - p0[2]
    vx, vy, vz = p2[0] - p0[0], p2[1] - p0[1], p2[2] - p0[2]
    nx, ny, nz = uy * vz - uz * vy, uz * vx - ux * vz, ux * vy - uy * vx
    a, b = -nx / nz, -ny / nz
    return a, b, p0[2] - a * p0[0] - b * p0[1]


@dataclass(frozen=True)
class Terrain:
    """Polyhedral terrain: triangles over 0-based vertex indices, stored counter-clockwise."""

    domain: Domain
    vertices: tuple[Vertex, ...]
    triangles: tuple[tuple[int, int, int], ...]
    planes: tuple[Plane, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vertices = tuple(tuple(as_coord(c) for c in v) for v in self.vertices)
        object.__setattr__(self, "vertices", vertices)
        triangles = []
        for tri in self.triangles:
            i, j, k = tri
            turn = orientation(self.point(i), self.point(j), self.point(k))
            if turn is Orientation.COLLINEAR:
                raise InvalidInput(f"triangle {tri} has a degenerate projection")
            triangles.append((i, j, k) if turn is Orientation.LEFT else (i, k, j))
        object.__setattr__(self, "triangles", tuple(triangles))
        object.__setattr__(
            self, "planes", tuple(_plane_through(*(vertices[v] for v in tri)) for tri in triangles)
        )

    def point(self, i: int) -> Point:
        x, y, _ = self.vertices[i]
        return Point(x, y)

    def edges(self) -> list[tuple[int, int]]:
        unique = {tuple(sorted((tri[e], tri[(e + 1) % 3]))) for tri in self.triangles for e in range(3)}
        return sorted(unique)


@dataclass(frozen=True)
class ConvexTerrain:
    """Upper envelope of planes z = a*x + b*y + c."""

    domain: Domain
    planes: tuple[Plane, ...]

    def __post_init__(self):
        if not self.planes:
            raise InvalidInput("a convex terrain needs at least one plane")
        object.__setattr__(self, "planes", tuple(tuple(as_coord(c) for c in p) for p in self.planes))


@dataclass(frozen=True)
class VDistResult:
    value: Fraction
    witness_xy: Point
    case: DistanceCase


def _in_triangle(a: Point, b: Point, c: Point, p: Point) -> bool:
    return (
        orientation(a, b, p) is not Orientation.RIGHT
        and orientation(b, c, p) is not Orientation.RIGHT
        and orientation(c, a, p) is not Orientation.RIGHT
    )


def height_at(t: Terrain | ConvexTerrain, p: Point) -> Fraction:
    if not t.domain.contains(p):
        raise OutOfDomain(f"{p} is outside the domain")
    if isinstance(t, ConvexTerrain):
        return max(plane_at(plane, p) for plane in t.planes)
    for (i, j, k), plane in zip(t.triangles, t.planes):
        if _in_triangle(t.point(i), t.point(j), t.point(k), p):
            return plane_at(plane, p)
    raise OutOfDomain(f"{p} is not covered by any triangle")


def validate_terrain(t: Terrain) -> ValidationReport:
    """Vertices inside the domain, triangles tiling it edge to edge."""
    report = ValidationReport()
    for i in range(len(t.vertices)):
        if not t.domain.contains(t.point(i)):
            report.add("vertex outside domain", f"v{i + 1} {t.point(i)}", [])
    area = Fraction(0)
    uses: dict[tuple[int, int], int] = {}
    for i, j, k in t.triangles:
        a, b, c = t.point(i), t.point(j), t.point(k)
        area += ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)) / 2
        for u, v in ((i, j), (j, k), (k, i)):
            key = (min(u, v), max(u, v))
            uses[key] = uses.get(key, 0) + 1
    if area != t.domain.area:
        report.add("triangulation area", f"{area} != {t.domain.area}", [])
    for (u, v), n in sorted(uses.items()):
        boundary = t.domain.on_common_side(t.point(u), t.point(v))
        if n != (1 if boundary else 2):
            report.add("triangulation edge", f"v{u + 1}-v{v + 1} used {n} times", [])
    return report


# ---------------------------
# Upper envelope
# ---------------------------

@dataclass(frozen=True)
class EnvelopeCell:
    plane: int
    polygon: tuple[Point, ...]


@dataclass(frozen=True)
class EnvelopeEdge:
    a: Point
    b: Point
    planes: tuple[int, int]


@dataclass(frozen=True)
class Envelope:
    cells: tuple[EnvelopeCell, ...]
    edges: tuple[EnvelopeEdge, ...]
    vertices: tuple[Point, ...]

    def all_edges(self) -> list[tuple[Point, Point]]:
        """Every cell side, domain boundary included, each once."""
        seen = {}
        for cell in self.cells:
            poly = cell.polygon
            for k in range(len(poly)):
                u, v = poly[k], poly[(k + 1) % len(poly)]
                seen.setdefault(frozenset((u, v)), (u, v))
        return list(seen.values())


def _simplify(polygon: list[Point]) -> list[Point]:
    points: list[Point] = []
    for p in polygon:
        if not points or points[-1] != p:
            points.append(p)
    while len(points) > 1 and points[0] == points[-1]:
        points.pop()
    changed = True
    while changed and len(points) >= 3:
        changed = False
        for k in range(len(points)):
            prev, cur, nxt = points[k - 1], points[k], points[(k + 1) % len(points)]
            if orientation(prev, cur, nxt) is Orientation.COLLINEAR:
                del points[k]
                changed = True
                break
    return points if len(points) >= 3 else []


def _clip(polygon: list[Point], upper: Plane, lower: Plane) -> list[Point]:
    """Part of a convex polygon where ``upper`` is at least ``lower``."""
    out = []
    n = len(polygon)
    for k in range(n):
        cur, nxt = polygon[k], polygon[(k + 1) % n]
        fc = plane_at(upper, cur) - plane_at(lower, cur)
        fn = plane_at(upper, nxt) - plane_at(lower, nxt)
        if fc >= 0:
            out.append(cur)
        if (fc > 0 > fn) or (fc < 0 < fn):
            t = fc / (fc - fn)
            out.append(Point(cur.x + t * (nxt.x - cur.x), cur.y + t * (nxt.y - cur.y)))
    return _simplify(out)


def upper_envelope(b: ConvexTerrain) -> Envelope:
    """Cells of the envelope's projection by clipping the domain once per plane pair."""
    distinct: dict[Plane, int] = {}
    for i, plane in enumerate(b.planes):
        distinct.setdefault(plane, i)

    cells = []
    for plane, i in distinct.items():
        polygon = list(b.domain.corners())
        for other in distinct:
            if other != plane:
                polygon = _clip(polygon, plane, other)
                if not polygon:
                    break
        if polygon:
            cells.append(EnvelopeCell(i, tuple(polygon)))

    edges: dict[frozenset, EnvelopeEdge] = {}
    for cell in cells:
        poly = cell.polygon
        for k in range(len(poly)):
            u, v = poly[k], poly[(k + 1) % len(poly)]
            key = frozenset((u, v))
            if key in edges or b.domain.on_common_side(u, v):
                continue
            here = b.planes[cell.plane]
            neighbor = next(
                (
                    other.plane
                    for other in cells
                    if other.plane != cell.plane
                    and plane_at(b.planes[other.plane], u) == plane_at(here, u)
                    and plane_at(b.planes[other.plane], v) == plane_at(here, v)
                ),
                None,
            )
            if neighbor is None:
                raise InvalidInput(f"envelope edge {u}-{v} has no neighboring cell")
            edges[key] = EnvelopeEdge(u, v, tuple(sorted((cell.plane, neighbor))))

    vertices = sorted({p for cell in cells for p in cell.polygon}, key=lambda p: (p.x, p.y))
    logger.debug("envelope: %d cells, %d interior edges", len(cells), len(edges))
    return Envelope(tuple(cells), tuple(edges.values()), tuple(vertices))


# ---------------------------
# Joint projection
# ---------------------------

@dataclass(frozen=True)
class JointProjection:
    """Interior edges of both surfaces as a red/blue instance under the shear x' = x + shear*y."""

    pair: SegmentSetPair
    shear: Fraction
    red_edges: dict[int, tuple[int, int]]
    blue_edges: dict[int, EnvelopeEdge]

    def unsheared(self, p: Point) -> Point:
        return Point(p.x - self.shear * p.y, p.y)


def _shear_candidates() -> Iterable[Fraction]:
    yield Fraction(0)
    for k in count(1):
        yield Fraction(1, k)
        yield Fraction(-1, k)


def choose_shear(points: Iterable[Point]) -> Fraction:
    """First shear in a fixed sequence giving every distinct point its own x."""
    points = set(points)
    for shear in _shear_candidates():
        if len({p.x + shear * p.y for p in points}) == len(points):
            return shear
    raise AssertionError("unreachable")


def joint_projection(r: Terrain, envelope: Envelope, *, validate: bool = True) -> JointProjection:
    domain = r.domain
    red_pairs = [(i, j) for i, j in r.edges() if not domain.on_common_side(r.point(i), r.point(j))]
    points = [r.point(v) for edge in red_pairs for v in edge]
    points += [p for e in envelope.edges for p in (e.a, e.b)]
    shear = choose_shear(points)

    def sheared(p: Point) -> tuple[Fraction, Fraction]:
        return p.x + shear * p.y, p.y

    reds, red_edges = [], {}
    for rid, (i, j) in enumerate(red_pairs, 1):
        pi, pj = sheared(r.point(i)), sheared(r.point(j))
        reds.append(Segment.of(rid, Color.RED, pi, pj))
        red_edges[rid] = (i, j) if pi < pj else (j, i)
    blues, blue_edges = [], {}
    for bid, edge in enumerate(envelope.edges, 1):
        blues.append(Segment.of(bid, Color.BLUE, sheared(edge.a), sheared(edge.b)))
        blue_edges[bid] = edge

    pair = SegmentSetPair(tuple(reds), tuple(blues))
    if validate:
        report = validate_input(pair)
        if not report.ok:
            raise InvalidInput("terrain edges are not in general position", report)
    return JointProjection(pair, shear, red_edges, blue_edges)


# ---------------------------
# Distance
# ---------------------------

class UnimodalOracle:
    """Steers the search on a red edge toward the maximum of z_R - z_B along it."""

    def __init__(self, r: Terrain, b: ConvexTerrain, joint: JointProjection):
        self.r = r
        self.b = b
        self.joint = joint

    def slopes(self, ref: CrossingRef) -> tuple[Fraction, Fraction]:
        """One-sided slopes of D just left and just right of the crossing, per unit of the edge."""
        i, j = self.joint.red_edges[ref.red_id]
        (x0, y0, z0), (x1, y1, z1) = self.r.vertices[i], self.r.vertices[j]
        dx, dy = x1 - x0, y1 - y0
        first, second = (self.b.planes[k] for k in self.joint.blue_edges[ref.blue_id].planes)
        d_first = first[0] * dx + first[1] * dy
        d_second = second[0] * dx + second[1] * dy
        return (z1 - z0) - min(d_first, d_second), (z1 - z0) - max(d_first, d_second)

    def __call__(self, ref: CrossingRef) -> OracleAnswer:
        left, right = self.slopes(ref)
        if right > 0:
            return OracleAnswer.GO_RIGHT
        if left < 0:
            return OracleAnswer.GO_LEFT
        return OracleAnswer.FOUND


@dataclass(frozen=True)
class Candidate:
    difference: Fraction
    point: Point
    case: DistanceCase


def red_height_on_edge(r: Terrain, joint: JointProjection, ref: CrossingRef) -> Fraction:
    i, j = joint.red_edges[ref.red_id]
    red = joint.pair.reds[ref.red_id - 1]
    t = position_along(red, ref.point)
    return r.vertices[i][2] + t * (r.vertices[j][2] - r.vertices[i][2])


def vertex_candidates(r: Terrain, b: ConvexTerrain, envelope: Envelope) -> list[Candidate]:
    candidates = []
    for i, (x, y, z) in enumerate(r.vertices):
        p = Point(x, y)
        candidates.append(Candidate(z - height_at(b, p), p, DistanceCase.VERTEX_FACET))
    for p in envelope.vertices:
        candidates.append(Candidate(height_at(r, p) - height_at(b, p), p, DistanceCase.FACET_VERTEX))
    return candidates


def surface_crossing(r: Terrain, b: ConvexTerrain, p: Point, q: Point, envelope: Envelope | None = None) -> Point:
    """A point of segment pq where the surfaces meet, given D(p) >= 0 >= D(q)."""
    envelope = envelope or upper_envelope(b)
    vx, vy = q.x - p.x, q.y - p.y
    params = {Fraction(0), Fraction(1)}
    edges = [(r.point(i), r.point(j)) for i, j in r.edges()] + envelope.all_edges()
    for u, w in edges:
        ex, ey = w.x - u.x, w.y - u.y
        denom = vx * ey - vy * ex
        if denom == 0:
            if vx * (u.y - p.y) - vy * (u.x - p.x) == 0:
                norm = vx * vx + vy * vy
                for e in (u, w):
                    params.add(((e.x - p.x) * vx + (e.y - p.y) * vy) / norm)
            continue
        t = ((u.x - p.x) * ey - (u.y - p.y) * ex) / denom
        s = ((u.x - p.x) * vy - (u.y - p.y) * vx) / denom
        if 0 <= s <= 1:
            params.add(t)

    def at(t: Fraction) -> Point:
        return Point(p.x + t * vx, p.y + t * vy)

    def difference(t: Fraction) -> Fraction:
        point = at(t)
        return height_at(r, point) - height_at(b, point)

    ts = sorted(t for t in params if 0 <= t <= 1)
    values = [difference(t) for t in ts]
    for k in range(len(ts) - 1):
        if values[k] == 0:
            return at(ts[k])
        if (values[k] > 0) != (values[k + 1] > 0):
            t = ts[k] + (ts[k + 1] - ts[k]) * values[k] / (values[k] - values[k + 1])
            return at(t)
    return at(ts[-1])


def pick(candidates: list[Candidate], mode: Mode, r: Terrain, b: ConvexTerrain, envelope: Envelope) -> VDistResult:
    """Extreme |D| among candidates; a sign change means the surfaces meet."""
    if mode == "max":
        best = max(candidates, key=lambda c: abs(c.difference))
        return VDistResult(abs(best.difference), best.point, best.case)

    high = max(candidates, key=lambda c: c.difference)
    low = min(candidates, key=lambda c: c.difference)
    if low.difference <= 0 <= high.difference:
        zero = next((c for c in candidates if c.difference == 0), None)
        if zero is not None:
            return VDistResult(Fraction(0), zero.point, zero.case)
        witness = surface_crossing(r, b, high.point, low.point, envelope)
        return VDistResult(Fraction(0), witness, DistanceCase.SURFACE_CROSSING)
    best = min(candidates, key=lambda c: abs(c.difference))
    return VDistResult(abs(best.difference), best.point, best.case)


def vertical_distance(r: Terrain, b: ConvexTerrain, mode: Mode = "max") -> VDistResult:
    if r.domain != b.domain:
        raise InvalidInput("the terrains do not share a domain")
    report = validate_terrain(r)
    if not report.ok:
        raise InvalidInput("polyhedral terrain is not a triangulation of the domain", report)

    envelope = upper_envelope(b)
    joint = joint_projection(r, envelope)
    candidates = vertex_candidates(r, b, envelope)

    ix = preprocess(joint.pair)
    for ref in batched_search(ix, UnimodalOracle(r, b, joint)):
        point = joint.unsheared(ref.point)
        difference = red_height_on_edge(r, joint, ref) - height_at(b, point)
        candidates.append(Candidate(difference, point, DistanceCase.EDGE_EDGE))

    result = pick(candidates, mode, r, b, envelope)
    logger.info(
        "%s vertical distance %s at %s (%s), %d candidates",
        mode,
        result.value,
        result.witness_xy,
        result.case.value,
        len(candidates),
    )
    return result


def max_vertical_distance(r: Terrain, b: ConvexTerrain) -> VDistResult:
    return vertical_distance(r, b, "max")


def min_vertical_distance(r: Terrain, b: ConvexTerrain) -> VDistResult:
    return vertical_distance(r, b, "min")
