"""Partially persistent balanced search trees.

Join-based AVL trees over immutable nodes. Every update copies the search
path only (O(log n) fresh nodes) and leaves older roots untouched, so a
version is just a root. ``PersistentTree`` is the version store the rest of
the package talks to; ``TreeOps`` holds the node-level algorithms and is
also used directly by the sweep for its ephemeral structures.

All node arguments are listed in-order: left subtree, key, payload, right.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Any, Callable, Iterator

from rbindex.core.errors import DuplicateKey, JoinOrderViolation, MissingKey

logger = logging.getLogger(__name__)

VersionId = int
Compare = Callable[[Any, Any], int]
Summarize = Callable[["Node | None", Any, Any, "Node | None"], Any]

# Height of an AVL tree of n keys stays below 1.4405 * log2(n + 2)
HEIGHT_CONSTANT = 2


def default_compare(a: Any, b: Any) -> int:
    return (a > b) - (a < b)


class Step(enum.Enum):
    LEFT = "L"
    RIGHT = "R"

    @property
    def flipped(self) -> "Step":
        return Step.RIGHT if self is Step.LEFT else Step.LEFT


class Move(enum.Enum):
    PARENT = "parent"
    LEFT_CHILD = "left"
    RIGHT_CHILD = "right"


class Node:
    __slots__ = ("left", "key", "payload", "right", "size", "height", "summary")

    def __init__(self, left, key, payload, right, summary=None):
        self.left = left
        self.key = key
        self.payload = payload
        self.right = right
        self.size = (left.size if left else 0) + (right.size if right else 0) + 1
        self.height = max(left.height if left else 0, right.height if right else 0) + 1
        self.summary = summary

    def child(self, step: Step) -> "Node | None":
        return self.left if step is Step.LEFT else self.right


def size(t: Node | None) -> int:
    return t.size if t else 0


def height(t: Node | None) -> int:
    return t.height if t else 0


class TreeOps:
    """Node-level join/split algorithms, optionally maintaining a per-node summary."""

    def __init__(self, summarize: Summarize | None = None):
        self.summarize = summarize
        self.allocated = 0

    def node(self, left, key, payload, right) -> Node:
        self.allocated += 1
        summary = self.summarize(left, key, payload, right) if self.summarize else None
        return Node(left, key, payload, right, summary)

    def _rotate_left(self, t: Node) -> Node:
        r = t.right
        return self.node(self.node(t.left, t.key, t.payload, r.left), r.key, r.payload, r.right)

    def _rotate_right(self, t: Node) -> Node:
        l = t.left
        return self.node(l.left, l.key, l.payload, self.node(l.right, t.key, t.payload, t.right))

    def _join_right(self, l: Node, key, payload, r: Node | None) -> Node:
        if height(l.right) <= height(r) + 1:
            t = self.node(l.right, key, payload, r)
            if height(t) <= height(l.left) + 1:
                return self.node(l.left, l.key, l.payload, t)
            return self._rotate_left(self.node(l.left, l.key, l.payload, self._rotate_right(t)))
        t = self._join_right(l.right, key, payload, r)
        joined = self.node(l.left, l.key, l.payload, t)
        if height(t) <= height(l.left) + 1:
            return joined
        return self._rotate_left(joined)

    def _join_left(self, l: Node | None, key, payload, r: Node) -> Node:
        if height(r.left) <= height(l) + 1:
            t = self.node(l, key, payload, r.left)
            if height(t) <= height(r.right) + 1:
                return self.node(t, r.key, r.payload, r.right)
            return self._rotate_right(self.node(self._rotate_left(t), r.key, r.payload, r.right))
        t = self._join_left(l, key, payload, r.left)
        joined = self.node(t, r.key, r.payload, r.right)
        if height(t) <= height(r.right) + 1:
            return joined
        return self._rotate_right(joined)

    def join(self, l: Node | None, key, payload, r: Node | None) -> Node:
        """Tree whose in-order is in-order(l), key, in-order(r)."""
        if height(l) > height(r) + 1:
            return self._join_right(l, key, payload, r)
        if height(r) > height(l) + 1:
            return self._join_left(l, key, payload, r)
        return self.node(l, key, payload, r)

    def split_last(self, t: Node) -> tuple[Node | None, Any, Any]:
        if t.right is None:
            return t.left, t.key, t.payload
        rest, key, payload = self.split_last(t.right)
        return self.join(t.left, t.key, t.payload, rest), key, payload

    def split_first(self, t: Node) -> tuple[Any, Any, Node | None]:
        if t.left is None:
            return t.key, t.payload, t.right
        key, payload, rest = self.split_first(t.left)
        return key, payload, self.join(rest, t.key, t.payload, t.right)

    def join2(self, l: Node | None, r: Node | None) -> Node | None:
        if l is None:
            return r
        if r is None:
            return l
        rest, key, payload = self.split_last(l)
        return self.join(rest, key, payload, r)

    def split_by(self, t: Node | None, pred: Callable[[Any], bool]) -> tuple[Node | None, Node | None]:
        """Split into the maximal prefix whose keys satisfy ``pred`` and the rest.

        ``pred`` must be monotone over the in-order (True...True False...False).
        """
        if t is None:
            return None, None
        if pred(t.key):
            l, r = self.split_by(t.right, pred)
            return self.join(t.left, t.key, t.payload, l), r
        l, r = self.split_by(t.left, pred)
        return l, self.join(r, t.key, t.payload, t.right)

    def split_at(self, t: Node | None, rank: int) -> tuple[Node | None, Node | None]:
        """Split off the first ``rank`` entries."""
        if t is None:
            return None, None
        left_size = size(t.left)
        if rank <= left_size:
            l, r = self.split_at(t.left, rank)
            return l, self.join(r, t.key, t.payload, t.right)
        l, r = self.split_at(t.right, rank - left_size - 1)
        return self.join(t.left, t.key, t.payload, l), r

    def from_sorted(self, items: list[tuple[Any, Any]], lo: int = 0, hi: int | None = None) -> Node | None:
        """Perfectly balanced tree over already ordered (key, payload) pairs."""
        if hi is None:
            hi = len(items)
        if lo >= hi:
            return None
        mid = (lo + hi) // 2
        key, payload = items[mid]
        return self.node(self.from_sorted(items, lo, mid), key, payload, self.from_sorted(items, mid + 1, hi))

    def insert(self, t: Node | None, key, payload, compare: Compare) -> Node:
        if t is None:
            return self.node(None, key, payload, None)
        c = compare(key, t.key)
        if c == 0:
            raise DuplicateKey(key)
        if c < 0:
            return self.join(self.insert(t.left, key, payload, compare), t.key, t.payload, t.right)
        return self.join(t.left, t.key, t.payload, self.insert(t.right, key, payload, compare))

    def delete(self, t: Node | None, key, compare: Compare) -> Node | None:
        if t is None:
            raise MissingKey(key)
        c = compare(key, t.key)
        if c == 0:
            return self.join2(t.left, t.right)
        if c < 0:
            return self.join(self.delete(t.left, key, compare), t.key, t.payload, t.right)
        return self.join(t.left, t.key, t.payload, self.delete(t.right, key, compare))


def iter_nodes(t: Node | None) -> Iterator[Node]:
    """In-order traversal without recursion."""
    stack: list[Node] = []
    while stack or t is not None:
        while t is not None:
            stack.append(t)
            t = t.left
        t = stack.pop()
        yield t
        t = t.right


def first_node(t: Node | None) -> Node | None:
    while t is not None and t.left is not None:
        t = t.left
    return t


def last_node(t: Node | None) -> Node | None:
    while t is not None and t.right is not None:
        t = t.right
    return t


@dataclass(frozen=True, eq=False)
class NodeHandle:
    """A node of one version, carrying the chain back to the root.

    ``parent`` links make Parent moves O(1); ``path`` is materialized on demand.
    """

    version: VersionId
    node: Node
    parent: "NodeHandle | None" = None
    step: Step | None = None
    depth: int = 0

    @property
    def key(self) -> Any:
        return self.node.key

    @property
    def payload(self) -> Any:
        return self.node.payload

    @property
    def path(self) -> tuple[Step, ...]:
        steps = []
        h = self
        while h.parent is not None:
            steps.append(h.step)
            h = h.parent
        return tuple(reversed(steps))

    def child(self, step: Step) -> "NodeHandle | None":
        node = self.node.child(step)
        if node is None:
            return None
        return NodeHandle(self.version, node, self, step, self.depth + 1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, NodeHandle):
            return NotImplemented
        return self.version == other.version and self.path == other.path

    def __hash__(self) -> int:
        return hash((self.version, self.path))


class PersistentTree:
    """Append-only store of tree versions; version 0 is the empty tree."""

    EMPTY: VersionId = 0

    def __init__(self, compare: Compare = default_compare, summarize: Summarize | None = None):
        self.compare = compare
        self.ops = TreeOps(summarize)
        self._roots: list[Node | None] = [None]

    def _commit(self, root: Node | None) -> VersionId:
        self._roots.append(root)
        return len(self._roots) - 1

    def adopt(self, root: Node | None) -> VersionId:
        """Register a root built elsewhere with compatible ops as a new version."""
        return self._commit(root)

    def root_node(self, v: VersionId) -> Node | None:
        return self._roots[v]

    @property
    def nodes_allocated(self) -> int:
        return self.ops.allocated

    # ---------------------------
    # Updates
    # ---------------------------

    def insert(self, v: VersionId, key, payload=None) -> VersionId:
        return self._commit(self.ops.insert(self._roots[v], key, payload, self.compare))

    def delete(self, v: VersionId, key) -> VersionId:
        return self._commit(self.ops.delete(self._roots[v], key, self.compare))

    def split(self, v: VersionId, key) -> tuple[VersionId, VersionId]:
        lo, hi = self.ops.split_by(self._roots[v], lambda k: self.compare(k, key) < 0)
        return self._commit(lo), self._commit(hi)

    def join(self, lo: VersionId, hi: VersionId) -> VersionId:
        left, right = self._roots[lo], self._roots[hi]
        if left is not None and right is not None:
            if self.compare(last_node(left).key, first_node(right).key) >= 0:
                raise JoinOrderViolation(
                    f"last key {last_node(left).key!r} does not precede {first_node(right).key!r}"
                )
        return self._commit(self.ops.join2(left, right))

    # ---------------------------
    # Queries
    # ---------------------------

    def in_order(self, v: VersionId) -> list[tuple[Any, Any]]:
        return [(n.key, n.payload) for n in iter_nodes(self._roots[v])]

    def keys(self, v: VersionId) -> list[Any]:
        return [n.key for n in iter_nodes(self._roots[v])]

    def size(self, v: VersionId) -> int:
        return size(self._roots[v])

    def height(self, v: VersionId) -> int:
        return height(self._roots[v])

    def root(self, v: VersionId) -> NodeHandle | None:
        t = self._roots[v]
        return NodeHandle(v, t) if t is not None else None

def navigate(h: NodeHandle, move: Move) -> NodeHandle | None:
    """One step in a version; None marks the root or leaf boundary."""
    if move is Move.PARENT:
        return h.parent
    return h.child(Step.LEFT if move is Move.LEFT_CHILD else Step.RIGHT)

# Operation names used across the package and its documentation
def ptree_insert(tree: PersistentTree, v: VersionId, key, payload=None) -> VersionId:
    return tree.insert(v, key, payload)

def ptree_delete(tree: PersistentTree, v: VersionId, key) -> VersionId:
    return tree.delete(v, key)

def ptree_split(tree: PersistentTree, v: VersionId, key) -> tuple[VersionId, VersionId]:
    return tree.split(v, key)

def ptree_join(tree: PersistentTree, lo: VersionId, hi: VersionId) -> VersionId:
    return tree.join(lo, hi)

def ptree_root(tree: PersistentTree, v: VersionId) -> NodeHandle | None:
    return tree.root(v)

def ptree_in_order(tree: PersistentTree, v: VersionId) -> list[tuple[Any, Any]]:
    return tree.in_order(v)

def ptree_size(tree: PersistentTree, v: VersionId) -> int:
    return tree.size(v)

def ptree_height(tree: PersistentTree, v: VersionId) -> int:
    return tree.height(v)
