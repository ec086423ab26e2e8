"""Red-blue preprocessing API and oracle-guided batched search.

The crossings along a red edge form an implicit binary tree, the edge tree,
with two levels: the outer tree of columns in the edge's row version, and
inside each column the balanced tree of its blue snapshot.

Every column contributes a small block of nodes. Its logically first and last
crossings sit on top, taken straight from the column's bottom and top blues;
one of them is the block root and adopts the outer subtree on its side, the
other adopts the outer subtree on the opposite side and the rest of the
column. The rest of the column is the snapshot tree with its two extreme nodes
spliced out. A block therefore costs at most two levels on the way to the
columns below it, and the edge tree is no taller than twice the outer tree
plus the tallest snapshot. A column whose blue order runs against the edge is
read mirrored, so LeftChild always moves toward the edge's left endpoint.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Iterator

from rbindex.core.errors import InconsistentOracle, InvalidInput, UnknownEdge
from rbindex.services.bundle_sweep import sweep
from rbindex.services.geometry import Point, Segment, SegmentSetPair, crossing_point
from rbindex.services.life_table import LifeColumn, RBIndex, build_index, build_life_table
from rbindex.services.persistence import Move, NodeHandle, Step, height

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CrossingRef:
    red_id: int
    blue_id: int
    point: Point

    def __str__(self) -> str:
        return f"R{self.red_id} B{self.blue_id} {self.point}"


class OracleAnswer(enum.Enum):
    GO_LEFT = "left"
    GO_RIGHT = "right"
    FOUND = "found"


Oracle = Callable[[CrossingRef], OracleAnswer]


class Role(enum.Enum):
    HEAD = "head"
    TAIL = "tail"
    MIDDLE = "middle"


@dataclass(frozen=True, eq=False)
class ImplicitNode:
    red: Segment
    column: LifeColumn
    outer: NodeHandle
    forward: bool
    role: Role
    inner: NodeHandle | None = None
    left_spine: bool = True
    right_spine: bool = True
    parent: "ImplicitNode | None" = field(default=None, repr=False)
    depth: int = 0

    @property
    def red_id(self) -> int:
        return self.red.id

    @property
    def blue(self) -> Segment:
        if self.role is Role.MIDDLE:
            return self.inner.key.segment
        first, last = (self.column.bottom, self.column.top) if self.forward else (self.column.top, self.column.bottom)
        return first if self.role is Role.HEAD else last

    @property
    def head_on_top(self) -> bool:
        """Whether the head, not the tail, is the root of the column's block."""
        node = self.outer.node
        return height(node.left) >= height(node.right)

    def _identity(self):
        return self.red.id, self.outer, self.role, self.inner

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ImplicitNode):
            return NotImplemented
        return self._identity() == other._identity()

    def __hash__(self) -> int:
        return hash(self._identity())


def preprocess(pair: SegmentSetPair) -> RBIndex:
    """Sweep, life table and row sweep in one call."""
    return build_index(build_life_table(sweep(pair)))


def _crossing_x(red: Segment, blue: Segment) -> Fraction:
    point = crossing_point(red, blue)
    if point is None:
        raise InvalidInput(f"{red} and {blue} share a column but do not cross")
    return point.x


def _enter(ix: RBIndex, red: Segment, outer: NodeHandle, parent: ImplicitNode | None, depth: int) -> ImplicitNode:
    column: LifeColumn = outer.payload
    forward = column.size == 1 or _crossing_x(red, column.bottom) < _crossing_x(red, column.top)
    node = ImplicitNode(red, column, outer, forward, Role.HEAD, parent=parent, depth=depth)
    if column.size > 1 and not node.head_on_top:
        node = replace(node, role=Role.TAIL)
    return node


def _require(ix: RBIndex, red_id: int) -> Segment:
    if red_id not in ix.row_of:
        raise UnknownEdge(red_id)
    return ix.red(red_id)


def tree_root(ix: RBIndex, red_id: int) -> ImplicitNode | None:
    red = _require(ix, red_id)
    outer = ix.outer.root(ix.row_versions[red_id])
    if outer is None:
        return None
    return _enter(ix, red, outer, None, 0)


def _inner_child(node: ImplicitNode, inner: NodeHandle, logical: Step) -> NodeHandle | None:
    return inner.child(logical if node.forward else logical.flipped)


def _middle(node: ImplicitNode, inner: NodeHandle | None, left_spine: bool, right_spine: bool) -> ImplicitNode | None:
    """Middle node at ``inner``, stepping past the snapshot's first and last blues."""
    while inner is not None:
        if left_spine and _inner_child(node, inner, Step.LEFT) is None:
            inner, left_spine = _inner_child(node, inner, Step.RIGHT), False
        elif right_spine and _inner_child(node, inner, Step.RIGHT) is None:
            inner, right_spine = _inner_child(node, inner, Step.LEFT), False
        else:
            break
    if inner is None:
        return None
    return replace(
        node,
        role=Role.MIDDLE,
        inner=inner,
        left_spine=left_spine,
        right_spine=right_spine,
        parent=node,
        depth=node.depth + 1,
    )


def _outer_child(ix: RBIndex, node: ImplicitNode, logical: Step) -> ImplicitNode | None:
    outer = node.outer.child(logical)
    if outer is None:
        return None
    return _enter(ix, node.red, outer, node, node.depth + 1)


def _child(ix: RBIndex, node: ImplicitNode, logical: Step) -> ImplicitNode | None:
    if node.role is Role.MIDDLE:
        inner = _inner_child(node, node.inner, logical)
        if inner is None:
            return None
        return _middle(
            node,
            inner,
            node.left_spine and logical is Step.LEFT,
            node.right_spine and logical is Step.RIGHT,
        )
    if node.column.size == 1:
        return _outer_child(ix, node, logical)
    # outward from the head or tail leads to the outer subtree on that side
    outward = Step.LEFT if node.role is Role.HEAD else Step.RIGHT
    if logical is outward:
        return _outer_child(ix, node, logical)
    on_top = node.head_on_top == (node.role is Role.HEAD)
    if on_top:
        other = Role.TAIL if node.role is Role.HEAD else Role.HEAD
        return replace(node, role=other, parent=node, depth=node.depth + 1)
    root = ix.blue_store.root(node.column.blue_snapshot)
    return _middle(node, root, True, True)


def navigate_node(ix: RBIndex, node: ImplicitNode, move: Move) -> ImplicitNode | None:
    if move is Move.PARENT:
        return node.parent
    return _child(ix, node, Step.LEFT if move is Move.LEFT_CHILD else Step.RIGHT)


def resolve(ix: RBIndex, node: ImplicitNode) -> CrossingRef:
    point = crossing_point(node.red, node.blue)
    if point is None:
        raise InvalidInput(f"{node.red} and {node.blue} share a column but do not cross")
    return CrossingRef(node.red.id, node.blue.id, point)


def _column_crossings(ix: RBIndex, red: Segment, column: LifeColumn) -> list[Segment]:
    blues = [edge.segment for edge in ix.blue_store.keys(column.blue_snapshot)]
    if len(blues) > 1 and _crossing_x(red, column.bottom) > _crossing_x(red, column.top):
        blues.reverse()
    return blues


def in_order(ix: RBIndex, red_id: int) -> list[CrossingRef]:
    """Crossings of a red edge from its left endpoint to its right endpoint."""
    red = _require(ix, red_id)
    refs = []
    for column in ix.columns_at(red_id):
        for blue in _column_crossings(ix, red, column):
            refs.append(CrossingRef(red_id, blue.id, crossing_point(red, blue)))
    return refs


def iter_nodes(ix: RBIndex, red_id: int) -> Iterator[ImplicitNode]:
    """Every node of the edge tree, in order, reached through navigation only."""
    stack: list[ImplicitNode] = []
    node = tree_root(ix, red_id)
    while stack or node is not None:
        while node is not None:
            stack.append(node)
            node = navigate_node(ix, node, Move.LEFT_CHILD)
        node = stack.pop()
        yield node
        node = navigate_node(ix, node, Move.RIGHT_CHILD)


def edge_height(ix: RBIndex, red_id: int) -> int:
    """Number of levels of the edge tree; 0 for an edge without crossings."""
    return max((node.depth + 1 for node in iter_nodes(ix, red_id)), default=0)


# ---------------------------
# Batched search
# ---------------------------

class CountingOracle:
    """Wraps an oracle and counts its calls, in total and per red edge."""

    def __init__(self, oracle: Oracle):
        self.oracle = oracle
        self.calls = 0
        self.per_edge: dict[int, int] = {}

    def __call__(self, ref: CrossingRef) -> OracleAnswer:
        self.calls += 1
        self.per_edge[ref.red_id] = self.per_edge.get(ref.red_id, 0) + 1
        return self.oracle(ref)


class TargetOracle:
    """
    Scripted oracle pointing at one crossing per edge.

    With ``target_x`` the interesting crossing is the one with the largest x
    not exceeding it; with ``target_blues`` it is the leftmost crossing with
    one of the listed blue ids. Every other crossing is answered by comparing
    its x with the target's.
    """

    def __init__(self, ix: RBIndex, *, target_x: Fraction | None = None, target_blues: Iterable[int] | None = None):
        if (target_x is None) == (target_blues is None):
            raise ValueError("exactly one of target_x and target_blues is required")
        self.ix = ix
        self.target_x = target_x
        self.target_blues = frozenset(target_blues) if target_blues is not None else None
        self._targets: dict[int, CrossingRef | None] = {}

    def target(self, red_id: int) -> CrossingRef | None:
        if red_id not in self._targets:
            refs = in_order(self.ix, red_id)
            if self.target_x is not None:
                chosen = [r for r in refs if r.point.x <= self.target_x]
                self._targets[red_id] = chosen[-1] if chosen else None
            else:
                self._targets[red_id] = next((r for r in refs if r.blue_id in self.target_blues), None)
        return self._targets[red_id]

    def __call__(self, ref: CrossingRef) -> OracleAnswer:
        goal = self.target(ref.red_id)
        if goal is None or ref.point.x > goal.point.x:
            return OracleAnswer.GO_LEFT
        if ref.point.x < goal.point.x:
            return OracleAnswer.GO_RIGHT
        return OracleAnswer.FOUND


def search_edge(ix: RBIndex, red_id: int, oracle: Oracle) -> CrossingRef | None:
    """Descend the edge tree from the root as the oracle directs; None if it never says Found."""
    node = tree_root(ix, red_id)
    while node is not None:
        ref = resolve(ix, node)
        answer = oracle(ref)
        if answer is OracleAnswer.FOUND:
            return ref
        move = Move.LEFT_CHILD if answer is OracleAnswer.GO_LEFT else Move.RIGHT_CHILD
        node = navigate_node(ix, node, move)
    return None


def batched_search(ix: RBIndex, oracle: Oracle, *, strict: bool = False) -> list[CrossingRef]:
    """Run one descent per red edge, in red id order."""
    found = []
    for red_id in sorted(ix.row_of):
        if ix.outer.size(ix.row_versions[red_id]) == 0:
            continue
        ref = search_edge(ix, red_id, oracle)
        if ref is not None:
            found.append(ref)
        elif strict:
            raise InconsistentOracle(f"search on red edge {red_id} ended without a Found answer")
    logger.info("batched search finished: %d of %d edges found", len(found), len(ix.row_of))
    return found
