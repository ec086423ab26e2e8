"""Topological sweep over red/blue bundles.

The sweep status is the sequence of bundles (maximal same-color runs) met by a
y-monotone pseudoline, bottom to top. At each endpoint p the pseudoline is
bent through p: every live segment is classified as passing below p, ending
at p, or passing above p, and the bundles are stably reordered by that class.
A red piece and a blue piece that trade places during the reordering cross,
and p is the witness of every one of their crossings. Each such swap is
recorded as a ``BundleEvent`` against a persistent snapshot of the blue piece.
"""
from __future__ import annotations

import functools
import logging
from dataclasses import dataclass, field
from itertools import groupby
from typing import Callable, Iterator

from rbindex.core.errors import InvalidInput
from rbindex.services.geometry import (
    Color,
    IntegerFrame,
    Point,
    Segment,
    SegmentSetPair,
    crossing_point,
    structural_violations,
)
from rbindex.services.persistence import (
    Node,
    PersistentTree,
    TreeOps,
    VersionId,
    first_node,
    iter_nodes,
    last_node,
    size,
)

logger = logging.getLogger(__name__)

BELOW, THROUGH, ABOVE = 0, 1, 2


@dataclass(frozen=True, slots=True, eq=False)
class SweepEdge:
    """A segment with its endpoints in integer coordinates."""

    segment: Segment
    ax: int
    ay: int
    bx: int
    by: int

    @property
    def color(self) -> Color:
        return self.segment.color


@dataclass(frozen=True, slots=True, eq=False)
class Bundle:
    color: Color
    members: Node
    bottom: SweepEdge
    top: SweepEdge

    @classmethod
    def of(cls, color: Color, members: Node) -> "Bundle":
        return cls(color, members, first_node(members).key, last_node(members).key)

    @property
    def count(self) -> int:
        return size(self.members)


@dataclass(frozen=True)
class BundleEvent:
    event_key: tuple[int, int]
    blue_snapshot: VersionId
    red_rows: tuple[int, int]
    witness: Point

    @property
    def row_count(self) -> int:
        return self.red_rows[1] - self.red_rows[0] + 1


@dataclass
class SweepStats:
    endpoints: int = 0
    segments: int = 0
    events: int = 0
    swaps: int = 0
    crossing_count: int = 0
    bundle_splits: int = 0
    bundle_merges: int = 0
    max_bundles: int = 0

    @property
    def events_per_segment(self) -> float:
        """Events per input segment."""
        return self.events / self.segments if self.segments else 0.0


@dataclass(frozen=True)
class SweepResult:
    pair: SegmentSetPair
    red_order: tuple[int, ...]
    reds: tuple[Segment, ...]
    events: tuple[BundleEvent, ...]
    crossing_count: int
    blue_store: PersistentTree = field(repr=False)
    stats: SweepStats = field(default_factory=SweepStats)

    def blue_members(self, event: BundleEvent) -> list[Segment]:
        """Blue segments of an event's snapshot in pseudoline order."""
        return [edge.segment for edge in self.blue_store.keys(event.blue_snapshot)]

    def red_members(self, event: BundleEvent) -> list[Segment]:
        lo, hi = event.red_rows
        return list(self.reds[lo - 1:hi])

    def pairs(self, event: BundleEvent) -> Iterator[tuple[Segment, Segment]]:
        blues = self.blue_members(event)
        for red in self.red_members(event):
            for blue in blues:
                yield red, blue


# ---------------------------
# Bundle sequence summaries
# ---------------------------

_FIRST_RED, _LAST_RED, _FIRST_BLUE, _LAST_BLUE = range(4)
_NO_SUMMARY = (None, None, None, None)


def _pick(a, b):
    return a if a is not None else b


def _bundle_summary(left: Node | None, bundle: Bundle, _payload, right: Node | None):
    """First and last bundle of each color inside a subtree."""
    ls = left.summary if left is not None else _NO_SUMMARY
    rs = right.summary if right is not None else _NO_SUMMARY
    if bundle.color is Color.RED:
        own = (bundle, bundle, None, None)
    else:
        own = (None, None, bundle, bundle)
    return (
        _pick(ls[_FIRST_RED], _pick(own[_FIRST_RED], rs[_FIRST_RED])),
        _pick(rs[_LAST_RED], _pick(own[_LAST_RED], ls[_LAST_RED])),
        _pick(ls[_FIRST_BLUE], _pick(own[_FIRST_BLUE], rs[_FIRST_BLUE])),
        _pick(rs[_LAST_BLUE], _pick(own[_LAST_BLUE], ls[_LAST_BLUE])),
    )


def _first_slot(color: Color) -> int:
    return _FIRST_RED if color is Color.RED else _FIRST_BLUE


def _last_slot(color: Color) -> int:
    return _LAST_RED if color is Color.RED else _LAST_BLUE


def _first_rank(t: Node | None, color: Color, test: Callable[[Bundle], bool]) -> int | None:
    """Rank of the first bundle of ``color`` passing ``test`` (monotone False..True)."""
    slot = _last_slot(color)
    base = 0
    while t is not None:
        left_last = t.left.summary[slot] if t.left is not None else None
        if left_last is not None and test(left_last):
            t = t.left
            continue
        if t.key.color is color and test(t.key):
            return base + size(t.left)
        base += size(t.left) + 1
        t = t.right
    return None


def _last_rank(t: Node | None, color: Color, test: Callable[[Bundle], bool]) -> int | None:
    """Rank of the last bundle of ``color`` passing ``test`` (monotone True..False)."""
    slot = _first_slot(color)
    base = 0
    while t is not None:
        right_first = t.right.summary[slot] if t.right is not None else None
        if right_first is not None and test(right_first):
            base += size(t.left) + 1
            t = t.right
            continue
        if t.key.color is color and test(t.key):
            return base + size(t.left)
        t = t.left
    return None


class _BundleSweep:
    def __init__(self, pair: SegmentSetPair):
        self.pair = pair
        self.frame = IntegerFrame.of(p for s in pair.segments for p in (s.a, s.b))
        self.member_ops = TreeOps()
        self.sequence_ops = TreeOps(_bundle_summary)
        self.blue_store = PersistentTree()
        self.sequence: Node | None = None
        self.stats = SweepStats(segments=len(pair))
        self.swaps: list[tuple[int, Point, Node, Node]] = []
        # red topological order as a linked list
        self.next: dict[SweepEdge | None, SweepEdge | None] = {None: None}
        self.prev: dict[SweepEdge | None, SweepEdge | None] = {None: None}

    # ---------------------------
    # Red topological order
    # ---------------------------

    def _link_after(self, anchor: SweepEdge | None, edge: SweepEdge) -> None:
        following = self.next[anchor]
        self.next[anchor] = edge
        self.prev[edge] = anchor
        self.next[edge] = following
        self.prev[following] = edge

    def _red_order(self) -> list[SweepEdge]:
        order = []
        edge = self.next[None]
        while edge is not None:
            order.append(edge)
            edge = self.next[edge]
        return order

    # ---------------------------
    # Bundles
    # ---------------------------

    def _merge(self, lower: Bundle, upper: Bundle) -> Bundle:
        self.stats.bundle_merges += 1
        return Bundle(
            lower.color,
            self.member_ops.join2(lower.members, upper.members),
            lower.bottom,
            upper.top,
        )

    def _pieces(self, bundle: Bundle, side: Callable[[SweepEdge], int]) -> Iterator[tuple[Bundle, int]]:
        low, high = side(bundle.bottom), side(bundle.top)
        if low > high:
            raise InvalidInput(f"{bundle.bottom.segment} and {bundle.top.segment} cross")
        if low == high:
            yield bundle, low
            return
        below, rest = self.member_ops.split_by(bundle.members, lambda e: side(e) == BELOW)
        through, above = self.member_ops.split_by(rest, lambda e: side(e) == THROUGH)
        parts = [(m, cls) for m, cls in ((below, BELOW), (through, THROUGH), (above, ABOVE)) if m is not None]
        self.stats.bundle_splits += len(parts) - 1
        for members, cls in parts:
            yield Bundle.of(bundle.color, members), cls

    def _place(self, stack: list[tuple[Bundle, int]], piece: Bundle, cls: int, index: int, point: Point) -> None:
        """Insert ``piece`` into the class-sorted stack, recording every red/blue swap."""
        pos = len(stack)
        while pos and stack[pos - 1][1] > cls:
            passed = stack[pos - 1][0]
            if passed.color is piece.color:
                raise InvalidInput(
                    f"{piece.color.value} segments {passed.top.segment} and "
                    f"{piece.bottom.segment} are out of order at {point}"
                )
            red, blue = (piece, passed) if piece.color is Color.RED else (passed, piece)
            self.swaps.append((index, point, red.members, blue.members))
            logger.debug("swap at %s: %d red x %d blue", point, red.count, blue.count)
            pos -= 1
        if pos and stack[pos - 1][1] == cls and stack[pos - 1][0].color is piece.color:
            stack[pos - 1] = (self._merge(stack[pos - 1][0], piece), cls)
        else:
            stack.insert(pos, (piece, cls))

    def _new_bundles(self, starts: list[SweepEdge], px: int, py: int, point: Point) -> list[Bundle]:
        def compare(e: SweepEdge, f: SweepEdge) -> int:
            value = (e.bx - px) * (f.by - py) - (e.by - py) * (f.bx - px)
            if value == 0:
                raise InvalidInput(f"{e.segment} and {f.segment} overlap from {point}")
            return -1 if value > 0 else 1

        ordered = sorted(starts, key=functools.cmp_to_key(compare))
        return [
            Bundle.of(color, self.member_ops.from_sorted([(e, None) for e in run]))
            for color, run in ((c, list(g)) for c, g in groupby(ordered, key=lambda e: e.color))
        ]

    # ---------------------------
    # Endpoint processing
    # ---------------------------

    def _process(self, index: int, point: Point, starts: list[SweepEdge]) -> None:
        px, py = self.frame(point)
        cache: dict[SweepEdge, int] = {}

        def side(e: SweepEdge) -> int:
            cls = cache.get(e)
            if cls is None:
                value = (e.bx - e.ax) * (py - e.ay) - (e.by - e.ay) * (px - e.ax)
                if value > 0:
                    cls = BELOW
                elif value < 0:
                    cls = ABOVE
                elif e.bx == px and e.by == py:
                    cls = THROUGH
                else:
                    raise InvalidInput(f"endpoint {point} lies on {e.segment}")
                cache[e] = cls
            return cls

        ops = self.sequence_ops
        total = size(self.sequence)
        lo, hi = total, 0
        for color in Color:
            first = _first_rank(self.sequence, color, lambda b: side(b.top) != BELOW)
            if first is not None:
                lo = min(lo, first)
            last = _last_rank(self.sequence, color, lambda b: side(b.bottom) != ABOVE)
            if last is not None:
                hi = max(hi, last + 1)

        left, rest = ops.split_at(self.sequence, lo)
        window, right = ops.split_at(rest, hi - lo)

        stack: list[tuple[Bundle, int]] = []
        for node in iter_nodes(window):
            for piece, cls in self._pieces(node.key, side):
                self._place(stack, piece, cls, index, point)

        below = [b for b, cls in stack if cls == BELOW]
        above = [b for b, cls in stack if cls == ABOVE]
        created = self._new_bundles(starts, px, py, point) if starts else []

        new_reds = [e for b in created if b.color is Color.RED for e in self._edges(b)]
        if new_reds:
            self._link_reds(new_reds, left, right, below, above)

        middle: list[Bundle] = []
        for bundle in below + created + above:
            if middle and middle[-1].color is bundle.color:
                middle[-1] = self._merge(middle[-1], bundle)
            else:
                middle.append(bundle)

        if left is not None and middle and last_node(left).key.color is middle[0].color:
            left, joined, _ = ops.split_last(left)
            middle[0] = self._merge(joined, middle[0])
        if right is not None and middle and first_node(right).key.color is middle[-1].color:
            joined, _, right = ops.split_first(right)
            middle[-1] = self._merge(middle[-1], joined)
        if not middle and left is not None and right is not None:
            if last_node(left).key.color is first_node(right).key.color:
                left, lower, _ = ops.split_last(left)
                upper, _, right = ops.split_first(right)
                middle = [self._merge(lower, upper)]

        self.sequence = ops.join2(ops.join2(left, ops.from_sorted([(b, None) for b in middle])), right)
        self.stats.max_bundles = max(self.stats.max_bundles, size(self.sequence))

    def _edges(self, bundle: Bundle) -> list[SweepEdge]:
        return [n.key for n in iter_nodes(bundle.members)]

    def _link_reds(self, new_reds, left, right, below, above) -> None:
        """Place starting reds right above the nearest live red below them."""
        anchor = next((b.top for b in reversed(below) if b.color is Color.RED), None)
        if anchor is None and left is not None and left.summary[_LAST_RED] is not None:
            anchor = left.summary[_LAST_RED].top
        if anchor is None:
            upper = next((b.bottom for b in above if b.color is Color.RED), None)
            if upper is None and right is not None and right.summary[_FIRST_RED] is not None:
                upper = right.summary[_FIRST_RED].bottom
            anchor = self.prev[upper] if upper is not None else self.prev[None]
        for edge in new_reds:
            self._link_after(anchor, edge)
            anchor = edge

    # ---------------------------
    # Driver
    # ---------------------------

    def run(self) -> SweepResult:
        starts: dict[Point, list[SweepEdge]] = {}
        points: set[Point] = set()
        for s in self.pair.segments:
            (ax, ay), (bx, by) = self.frame(s.a), self.frame(s.b)
            starts.setdefault(s.a, []).append(SweepEdge(s, ax, ay, bx, by))
            points.update((s.a, s.b))

        ordered = sorted(points, key=lambda p: p.x)
        self.stats.endpoints = len(ordered)
        for index, point in enumerate(ordered, 1):
            self._process(index, point, starts.get(point, []))

        if self.sequence is not None:
            raise InvalidInput("segments left on the sweep line after the last endpoint")
        return self._result()

    def _result(self) -> SweepResult:
        red_edges = self._red_order()
        row_of = {edge: i for i, edge in enumerate(red_edges, 1)}
        events: list[BundleEvent] = []
        crossing_count = 0
        last_index, tie = None, 0
        for index, point, red_root, blue_root in self.swaps:
            if index != last_index:
                last_index, tie = index, 0
            blue_v = self.blue_store.adopt(blue_root)
            blue_count = size(blue_root)
            rows = sorted(row_of[n.key] for n in iter_nodes(red_root))
            for lo, hi in _runs(rows):
                tie += 1
                events.append(BundleEvent((index, tie), blue_v, (lo, hi), point))
                crossing_count += blue_count * (hi - lo + 1)

        self.stats.swaps = len(self.swaps)
        self.stats.events = len(events)
        self.stats.crossing_count = crossing_count
        reds = tuple(edge.segment for edge in red_edges)
        return SweepResult(
            pair=self.pair,
            red_order=tuple(s.id for s in reds),
            reds=reds,
            events=tuple(events),
            crossing_count=crossing_count,
            blue_store=self.blue_store,
            stats=self.stats,
        )


def _runs(rows: list[int]) -> Iterator[tuple[int, int]]:
    """Maximal runs of consecutive integers in a sorted list."""
    start = prev = rows[0]
    for row in rows[1:]:
        if row != prev + 1:
            yield start, prev
            start = row
        prev = row
    yield start, prev


def sweep(pair: SegmentSetPair) -> SweepResult:
    """
    Run the bundle sweep over a red/blue instance.

    Structural degeneracies (vertical segments, repeated endpoint x, duplicate
    ids) are rejected up front; contacts the sweep runs into while classifying
    are rejected as they are met. Crossing-free same-color sets are assumed;
    run ``validate_input`` first for the full check.
    """
    report = structural_violations(pair)
    if not report.ok:
        raise InvalidInput("input violates general position", report)

    result = _BundleSweep(pair).run()
    stats = result.stats
    logger.info(
        "sweep finished: %d endpoints, %d events (events per segment %.3f), %d crossings",
        stats.endpoints,
        stats.events,
        stats.events_per_segment,
        stats.crossing_count,
    )
    return result


def count_crossings(pair: SegmentSetPair) -> int:
    return sweep(pair).crossing_count


def report_crossings(source: SegmentSetPair | SweepResult) -> list[tuple[int, int, Point]]:
    """Every red/blue crossing as (red id, blue id, point), sorted by ids.

    Accepts an instance, or the result of a sweep already run over one.
    """
    result = source if isinstance(source, SweepResult) else sweep(source)
    crossings = []
    for event in result.events:
        for red, blue in result.pairs(event):
            point = crossing_point(red, blue)
            if point is None:
                raise InvalidInput(f"{red} and {blue} were bundled but do not cross")
            crossings.append((red.id, blue.id, point))
    crossings.sort(key=lambda c: (c[0], c[1]))
    return crossings
