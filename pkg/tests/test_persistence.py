import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rbindex.core.errors import DuplicateKey, JoinOrderViolation, MissingKey
from rbindex.services.persistence import (
    HEIGHT_CONSTANT,
    Move,
    PersistentTree,
    TreeOps,
    iter_nodes,
    navigate,
    ptree_delete,
    ptree_height,
    ptree_in_order,
    ptree_insert,
    ptree_join,
    ptree_root,
    ptree_size,
    ptree_split,
)


def build(keys):
    tree = PersistentTree()
    v = tree.EMPTY
    for k in keys:
        v = tree.insert(v, k)
    return tree, v


def height_ok(tree, v):
    return ptree_height(tree, v) <= HEIGHT_CONSTANT * math.log2(ptree_size(tree, v) + 2)


def test_insert_orders_keys():
    tree, v = build([2, 1, 3])
    assert tree.keys(v) == [1, 2, 3]


def test_old_versions_survive_updates():
    tree = PersistentTree()
    v1 = ptree_insert(tree, tree.EMPTY, 5)
    v2 = ptree_insert(tree, v1, 7)
    assert tree.keys(v1) == [5]
    assert tree.keys(v2) == [5, 7]
    v3 = ptree_delete(tree, v2, 5)
    assert tree.keys(v2) == [5, 7]
    assert tree.keys(v3) == [7]


def test_duplicate_and_missing_keys():
    tree = PersistentTree()
    v1 = tree.insert(tree.EMPTY, 5)
    with pytest.raises(DuplicateKey):
        tree.insert(v1, 5)
    with pytest.raises(MissingKey):
        tree.delete(tree.EMPTY, 1)
    assert tree.keys(tree.delete(v1, 5)) == []


def test_split_and_join():
    tree, v = build([1, 2, 3, 4])
    lo, hi = ptree_split(tree, v, 3)
    assert (tree.keys(lo), tree.keys(hi)) == ([1, 2], [3, 4])
    assert tree.keys(ptree_join(tree, lo, hi)) == [1, 2, 3, 4]
    empty_lo, empty_hi = tree.split(tree.EMPTY, 9)
    assert tree.keys(empty_lo) == tree.keys(empty_hi) == []
    assert tree.keys(tree.join(tree.EMPTY, v)) == [1, 2, 3, 4]


def test_join_rejects_out_of_order_versions():
    tree = PersistentTree()
    three = tree.insert(tree.EMPTY, 3)
    one = tree.insert(tree.EMPTY, 1)
    with pytest.raises(JoinOrderViolation):
        tree.join(three, one)


@pytest.mark.parametrize("keys", [[1, 2, 3], [3, 2, 1], [2, 1, 3], [1, 3, 2]])
def test_three_key_root_is_median(keys):
    tree, v = build(keys)
    assert ptree_root(tree, v).key == 2


def test_navigation_algebra():
    tree, v = build(range(20))
    assert ptree_root(tree, tree.EMPTY) is None
    root = tree.root(v)
    assert navigate(root, Move.PARENT) is None
    assert root.path == ()
    left = navigate(root, Move.LEFT_CHILD)
    assert navigate(left, Move.PARENT) == root
    right_of_left = navigate(left, Move.RIGHT_CHILD)
    assert len(right_of_left.path) == 2
    assert navigate(navigate(right_of_left, Move.PARENT), Move.PARENT) == root


def test_join_with_uneven_heights_stays_balanced():
    ops = TreeOps()
    small = ops.from_sorted([(k, None) for k in range(3)])
    large = ops.from_sorted([(k, None) for k in range(10, 1000)])
    joined = ops.join(small, 5, None, large)
    assert [n.key for n in iter_nodes(joined)] == list(range(3)) + [5] + list(range(10, 1000))
    assert joined.height <= HEIGHT_CONSTANT * math.log2(joined.size + 2)


def test_split_by_predicate():
    ops = TreeOps()
    t = ops.from_sorted([(k, None) for k in range(50)])
    below, rest = ops.split_by(t, lambda k: k < 17)
    assert [n.key for n in iter_nodes(below)] == list(range(17))
    assert [n.key for n in iter_nodes(rest)] == list(range(17, 50))
    first, second = ops.split_at(t, 40)
    assert first.size == 40 and second.size == 10


def test_summaries_are_maintained():
    ops = TreeOps(lambda l, k, p, r: (l.summary if l else 0) + k + (r.summary if r else 0))
    t = ops.from_sorted([(k, None) for k in range(1, 11)])
    lo, hi = ops.split_by(t, lambda k: k <= 4)
    assert (lo.summary, hi.summary) == (10, 45)
    assert ops.join2(hi, lo).summary == 55


updates = st.lists(st.tuples(st.booleans(), st.integers(0, 60)), max_size=120)


@given(updates)
@settings(max_examples=60, deadline=None)
def test_replay_equality_and_height(script):
    tree = PersistentTree()
    versions = [tree.EMPTY]
    expected = [set()]
    for is_insert, key in script:
        current = expected[-1]
        if is_insert and key not in current:
            versions.append(tree.insert(versions[-1], key))
            expected.append(current | {key})
        elif not is_insert and key in current:
            versions.append(tree.delete(versions[-1], key))
            expected.append(current - {key})
    for v, keys in zip(versions, expected):
        assert tree.keys(v) == sorted(keys)
        assert height_ok(tree, v)
    updates_done = len(versions) - 1
    if updates_done:
        # path copying: O(log U) fresh nodes per update
        assert tree.nodes_allocated <= 8 * updates_done * (math.log2(updates_done) + 1) + 8 * updates_done


@given(st.lists(st.integers(-100, 100), unique=True, max_size=80), st.integers(-100, 100))
@settings(max_examples=80)
def test_split_join_round_trip(keys, pivot):
    tree, v = build(keys)
    lo, hi = tree.split(v, pivot)
    assert all(k < pivot for k in tree.keys(lo))
    assert all(k >= pivot for k in tree.keys(hi))
    assert height_ok(tree, lo) and height_ok(tree, hi)
    assert ptree_in_order(tree, tree.join(lo, hi)) == ptree_in_order(tree, v)


def replay(script):
    tree = PersistentTree()
    v = tree.EMPTY
    for is_insert, key in script:
        v = tree.insert(v, key) if is_insert else tree.delete(v, key)
    return tree.keys(v)


@pytest.mark.slow
def test_replay_equality_on_long_scripts():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        tree = PersistentTree()
        versions, script, live, expected = [tree.EMPTY], [], set(), [[]]
        while len(script) < 1000:
            key = int(rng.integers(0, 256))
            is_insert = key not in live
            versions.append(tree.insert(versions[-1], key) if is_insert else tree.delete(versions[-1], key))
            script.append((is_insert, key))
            live ^= {key}
            expected.append(sorted(live))
        assert ptree_size(tree, versions[-1]) == len(live)
        for step in range(0, 1001, 100):
            assert tree.keys(versions[step]) == replay(script[:step])
        assert all(tree.keys(v) == keys and height_ok(tree, v) for v, keys in zip(versions, expected))
        assert tree.nodes_allocated <= 8 * 1000 * (math.log2(1000) + 1)
