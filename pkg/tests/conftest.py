import numpy as np
import pytest

from rbindex.services.generator import gen_random
from rbindex.services.geometry import SegmentSetPair


def pair_of(reds=(), blues=()) -> SegmentSetPair:
    """Instance from (x1, y1, x2, y2) tuples; ids are 1-based per color."""
    return SegmentSetPair.from_coords(reds, blues)


@pytest.fixture
def one_by_one() -> SegmentSetPair:
    return pair_of([(0, 0, 4, 0)], [(1, 2, 3, -2)])


@pytest.fixture
def grid_2x2() -> SegmentSetPair:
    return pair_of(
        [(0, 0, 9, 1), (1, 10, 10, 11)],
        [(2, -5, 3, 15), (4, -5, 5, 15)],
    )


@pytest.fixture
def disjoint() -> SegmentSetPair:
    return pair_of([(0, 0, 4, 1), (1, 2, 5, 3)], [(2, 10, 6, 12), (3, 14, 7, 13)])


@pytest.fixture
def three_crossings() -> SegmentSetPair:
    """One red edge crossed by three blues near x = 2.5, 4.5 and 6.5."""
    return pair_of(
        [(0, 0, 9, 1)],
        [(2, -3, 3, 4), (4, -3, 5, 4), (6, -3, 7, 4)],
    )


@pytest.fixture
def reversed_bundle() -> SegmentSetPair:
    """Parallel rising blues outliving the red: one column, met top blue first."""
    return pair_of(
        [(0, 0, 20, 0)],
        [(1, -10, 21, 10), (3, -10, 23, 10), (5, -10, 25, 10)],
    )


@pytest.fixture
def random_pairs():
    """Factory for seeded random instances."""

    def make(seeds, n_red, n_blue, mode="general"):
        return [gen_random(seed, n_red, n_blue, mode) for seed in seeds]

    return make


@pytest.fixture
def mixed_suite():
    """Factory for `count` seeded instances with 1..cap segments per color, cycling through the modes."""

    def make(count, seed, cap=64):
        rng = np.random.default_rng(seed)
        modes = ("general", "grid-like", "bundle-heavy")
        for k in range(count):
            n_red, n_blue = (int(n) for n in rng.integers(1, cap + 1, size=2))
            yield gen_random(seed * 100_003 + k, n_red, n_blue, modes[k % 3])

    return make


@pytest.fixture
def write_file(tmp_path):
    def write(name: str, text: str):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    return write
