"""Seeded random instances: red/blue segment sets and terrain pairs.

Every draw comes from ``numpy.random.default_rng(seed)``, so a seed fully
determines the output. Segment endpoints get distinct x-coordinates from a
shuffled rational jitter ``slot / (2N)`` added to integer grid positions;
candidates that touch an already accepted segment are redrawn; accepted
segments are kept in a bucket grid so each check only looks at neighbours.
"""
from __future__ import annotations

import logging
from collections import defaultdict
from fractions import Fraction
from math import floor, isqrt
from typing import Callable, Iterator, Literal

import numpy as np

from rbindex.core.config import settings
from rbindex.core.errors import GenerationFailure, InvalidInput
from rbindex.services.geometry import (
    Color,
    Contact,
    Orientation,
    Point,
    Segment,
    SegmentSetPair,
    orientation,
    segment_contact,
    validate_input,
)
from rbindex.services.terrain import (
    ConvexTerrain,
    Domain,
    Terrain,
    joint_projection,
    upper_envelope,
    validate_terrain,
)

logger = logging.getLogger(__name__)

GenMode = Literal["general", "grid-like", "bundle-heavy"]
Proposal = Callable[[Color, int], tuple[int, int, int, int]]


def _int(rng: np.random.Generator, low: int, high: int) -> int:
    """Uniform integer in [low, high]."""
    return int(rng.integers(low, high + 1))


def _general(rng: np.random.Generator, bound: int, n: int) -> Proposal:
    reach = max(4, bound // (isqrt(max(n, 1)) + 1))

    def propose(color: Color, index: int) -> tuple[int, int, int, int]:
        x1 = _int(rng, 0, bound - reach)
        y1 = _int(rng, 0, bound)
        return x1, y1, x1 + _int(rng, 1, reach), y1 + _int(rng, -reach, reach)

    return propose


def _grid_like(rng: np.random.Generator, bound: int, n_red: int, n_blue: int) -> Proposal:
    """Reds in horizontal slabs, blues in slanted slabs of u = y - slope*x."""
    slope = 4
    red_height = max(2, bound // max(n_red, 1))
    blue_width = max(4 * slope, bound // max(n_blue, 1))

    def propose(color: Color, index: int) -> tuple[int, int, int, int]:
        x1 = _int(rng, 0, bound // 2)
        if color is Color.RED:
            base = (index - 1) * red_height
            x2 = x1 + _int(rng, bound // 4, bound // 2)
            return x1, base + _int(rng, 0, red_height - 1), x2, base + _int(rng, 0, red_height - 1)
        base = (index - 1) * blue_width + slope + 1
        x2 = x1 + _int(rng, 1, max(1, bound // (4 * slope)))
        span = blue_width - 2 * (slope + 1)
        return x1, base + _int(rng, 0, span) + slope * x1, x2, base + _int(rng, 0, span) + slope * x2

    return propose


def _bundle_heavy(rng: np.random.Generator, bound: int, n: int) -> Proposal:
    """Groups of nearly parallel segments: flat red groups, steep blue groups.

    Groups shrink like bound / sqrt(n) once n passes a few dozen, so the
    plane does not fill up with long steep blues as n grows.
    """
    reach = bound // max(3, isqrt(n) // 2)
    gap = max(16, reach // 256)
    groups: dict[Color, dict] = {}

    def propose(color: Color, index: int) -> tuple[int, int, int, int]:
        group = groups.get(color)
        if group is None or group["left"] == 0:
            length = _int(rng, 3 * reach // 8, reach)
            if color is Color.RED:
                dx, dy = length, _int(rng, -length // 4, length // 4)
            else:
                dx = length // 2
                dy = _int(rng, length, 2 * length) * (1 if rng.random() < 0.5 else -1)
            x1 = _int(rng, 0, bound - dx)
            y1 = _int(rng, 0, bound)
            group = {"x1": x1, "y1": y1, "dx": dx, "dy": dy, "left": _int(rng, 3, 8), "k": 0}
            groups[color] = group
        group["left"] -= 1
        group["k"] += 1
        x1 = group["x1"] + _int(rng, 0, 2)
        y1 = group["y1"] + group["k"] * gap
        return x1, y1, x1 + group["dx"], y1 + group["dy"]

    return propose


class _SegmentGrid:
    """Accepted segments bucketed by the square cells they pass through.

    Cells are registered conservatively: each segment is cut into pieces no
    longer than a cell and every cell meeting a piece's box, widened by one
    unit for the sub-unit jitter, is recorded. Two segments that touch always
    share a cell.
    """

    def __init__(self, cell: int):
        self.cell = max(4, cell)
        self.cells: dict[tuple[int, int], list[Segment]] = defaultdict(list)

    def _cover(self, s: Segment) -> set[tuple[int, int]]:
        ax, ay, bx, by = float(s.a.x), float(s.a.y), float(s.b.x), float(s.b.y)
        c = self.cell
        steps = int(max(abs(bx - ax), abs(by - ay)) / c) + 1
        covered = set()
        for k in range(steps):
            x0, x1 = ax + (bx - ax) * k / steps, ax + (bx - ax) * (k + 1) / steps
            y0, y1 = ay + (by - ay) * k / steps, ay + (by - ay) * (k + 1) / steps
            for i in range(floor((min(x0, x1) - 1) / c), floor((max(x0, x1) + 1) / c) + 1):
                for j in range(floor((min(y0, y1) - 1) / c), floor((max(y0, y1) + 1) / c) + 1):
                    covered.add((i, j))
        return covered

    def near(self, s: Segment) -> Iterator[Segment]:
        seen: set[int] = set()
        for key in self._cover(s):
            for t in self.cells.get(key, ()):
                if id(t) not in seen:
                    seen.add(id(t))
                    yield t

    def add(self, s: Segment) -> None:
        for key in self._cover(s):
            self.cells[key].append(s)


def _clashes(candidate: Segment, grid: _SegmentGrid) -> bool:
    for s in grid.near(candidate):
        if s.hi_x < candidate.lo_x or candidate.hi_x < s.lo_x:
            continue
        contact = segment_contact(candidate, s)
        if s.color is candidate.color and contact is not Contact.NONE:
            return True
        if s.color is not candidate.color and contact not in (Contact.NONE, Contact.PROPER):
            return True
    return False


def gen_random(seed: int, n_red: int, n_blue: int, mode: GenMode = "general") -> SegmentSetPair:
    """Random valid instance; raises GenerationFailure if a segment cannot be placed."""
    if n_red < 0 or n_blue < 0:
        raise ValueError("sizes must be non-negative")
    rng = np.random.default_rng(seed)
    bound = settings.coordinate_bound
    total = n_red + n_blue
    slots = [int(s) for s in rng.permutation(2 * total)]
    scale = 2 * max(total, 1)

    if mode == "general":
        propose = _general(rng, bound, total)
    elif mode == "grid-like":
        propose = _grid_like(rng, bound, n_red, n_blue)
    elif mode == "bundle-heavy":
        propose = _bundle_heavy(rng, bound, total)
    else:
        raise ValueError(f"unknown generator mode {mode!r}")

    accepted: list[Segment] = []
    grid = _SegmentGrid(bound // max(1, isqrt(total)))
    # interleave colors so neither fills the plane first
    order = [Color.RED] * n_red + [Color.BLUE] * n_blue
    rng.shuffle(order)
    counts = {Color.RED: 0, Color.BLUE: 0}
    for k, color in enumerate(order):
        counts[color] += 1
        jitter_a = Fraction(slots[2 * k], scale)
        jitter_b = Fraction(slots[2 * k + 1], scale)
        for _ in range(settings.generation_retries):
            x1, y1, x2, y2 = propose(color, counts[color])
            candidate = Segment.of(counts[color], color, (x1 + jitter_a, y1), (x2 + jitter_b, y2))
            if not _clashes(candidate, grid):
                accepted.append(candidate)
                grid.add(candidate)
                break
        else:
            raise GenerationFailure(
                f"could not place {color.value}{counts[color]} after {settings.generation_retries} tries"
            )

    reds = sorted((s for s in accepted if s.color is Color.RED), key=lambda s: s.id)
    blues = sorted((s for s in accepted if s.color is Color.BLUE), key=lambda s: s.id)
    pair = SegmentSetPair(tuple(reds), tuple(blues))
    if total <= settings.validate_limit:
        report = validate_input(pair)
        if not report.ok:
            raise GenerationFailure(f"generated instance is invalid: {report.lines()[0]}")
    logger.info("generated %s instance: seed=%d reds=%d blues=%d", mode, seed, n_red, n_blue)
    return pair


# ---------------------------
# Terrains
# ---------------------------

def triangulate(points: list[Point]) -> list[tuple[int, int, int]]:
    """Triangulation of a point set by sweeping its convex hull left to right."""
    order = sorted(range(len(points)), key=lambda i: (points[i].x, points[i].y))
    a, b, c = order[:3]
    turn = orientation(points[a], points[b], points[c])
    if turn is Orientation.COLLINEAR:
        raise InvalidInput("first three points are collinear")
    hull = [a, b, c] if turn is Orientation.LEFT else [a, c, b]
    triangles = [tuple(hull)]
    for i in order[3:]:
        p = points[i]
        n = len(hull)
        visible = [
            orientation(points[hull[k]], points[hull[(k + 1) % n]], p) is Orientation.RIGHT for k in range(n)
        ]
        if not any(visible):
            raise InvalidInput(f"{p} is not outside the hull")
        start = next(k for k in range(n) if visible[k] and not visible[k - 1])
        k = start
        while visible[k % n]:
            triangles.append((hull[k % n], i, hull[(k + 1) % n]))
            k += 1
        end = k % n
        kept = [hull[end]]
        m = end
        while m != start:
            m = (m + 1) % n
            kept.append(hull[m])
        hull = kept + [i]
    return triangles


def gen_terrain(seed: int, n_vertices: int = 12, n_planes: int = 5, size: int = 64) -> tuple[Terrain, ConvexTerrain]:
    """A random polyhedral terrain and convex terrain over [0, size]^2 that pass joint validation."""
    if n_planes < 1:
        raise ValueError("at least one plane is required")
    rng = np.random.default_rng(seed)
    domain = Domain(0, 0, size, size)
    denominator = 4

    for attempt in range(1, settings.generation_retries + 1):
        points = list(domain.corners())
        seen = set(points)
        while len(points) < max(n_vertices, 4):
            p = Point(_int(rng, 1, size - 1), _int(rng, 1, size - 1))
            if p not in seen:
                seen.add(p)
                points.append(p)
        heights = [Fraction(_int(rng, -size, size), denominator) for _ in points]
        planes = tuple(
            (
                Fraction(_int(rng, -denominator, denominator), denominator),
                Fraction(_int(rng, -denominator, denominator), denominator),
                Fraction(_int(rng, -size, size), 1),
            )
            for _ in range(n_planes)
        )
        try:
            triangles = triangulate(points)
            red = Terrain(domain, tuple((p.x, p.y, z) for p, z in zip(points, heights)), tuple(triangles))
            blue = ConvexTerrain(domain, planes)
            if not validate_terrain(red).ok:
                continue
            joint_projection(red, upper_envelope(blue))
        except InvalidInput as e:
            logger.debug("terrain attempt %d rejected: %s", attempt, e)
            continue
        logger.info("generated terrain pair: seed=%d vertices=%d planes=%d", seed, len(points), n_planes)
        return red, blue
    raise GenerationFailure(f"no valid terrain pair after {settings.generation_retries} attempts")
