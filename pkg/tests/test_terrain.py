from fractions import Fraction

import numpy as np
import pytest

from rbindex.core.errors import InvalidInput, OutOfDomain
from rbindex.services.bruteforce import naive_terrain_distance
from rbindex.services.generator import gen_terrain
from rbindex.services.geometry import Point
from rbindex.services.rb_search import OracleAnswer, in_order, preprocess
from rbindex.services.terrain import (
    ConvexTerrain,
    DistanceCase,
    Domain,
    Terrain,
    UnimodalOracle,
    choose_shear,
    height_at,
    joint_projection,
    max_vertical_distance,
    min_vertical_distance,
    upper_envelope,
    validate_terrain,
)

SQUARE = Domain(0, 0, 4, 4)


def flat(z=0):
    return Terrain(SQUARE, ((0, 0, z), (4, 0, z), (4, 4, z), (0, 4, z)), ((0, 1, 2), (0, 2, 3)))


def tent(apex=3):
    vertices = ((0, 0, 0), (4, 0, 0), (4, 4, 0), (0, 4, 0), (2, 2, apex))
    return Terrain(SQUARE, vertices, ((0, 1, 4), (1, 2, 4), (2, 3, 4), (3, 0, 4)))


def planes(*abc):
    return ConvexTerrain(SQUARE, tuple(abc))


def gap(r, b, p):
    return height_at(r, p) - height_at(b, p)


def test_height_of_single_plane():
    b = planes((0, 0, 5))
    assert height_at(b, Point(1, 3)) == 5
    assert height_at(b, Point(4, 4)) == 5


def test_height_of_envelope():
    b = ConvexTerrain(Domain(-4, -4, 4, 4), ((1, 0, 0), (-1, 0, 0)))
    assert height_at(b, Point(2, 0)) == 2
    assert height_at(b, Point(-3, 1)) == 3


def test_height_inside_triangle():
    r = Terrain(SQUARE, ((0, 0, 0), (4, 0, 0), (0, 4, 4), (4, 4, 4)), ((0, 1, 2), (1, 3, 2)))
    assert height_at(r, Point(1, 1)) == 1
    assert height_at(r, Point(Fraction(1, 2), 3)) == 3


def test_height_outside_domain():
    with pytest.raises(OutOfDomain):
        height_at(flat(), Point(5, 1))
    with pytest.raises(OutOfDomain):
        height_at(planes((0, 0, 1)), Point(0, -1))


def test_triangles_are_stored_counter_clockwise():
    r = Terrain(SQUARE, ((0, 0, 0), (4, 0, 0), (4, 4, 0), (0, 4, 0)), ((0, 2, 1), (0, 3, 2)))
    assert r.triangles == ((0, 1, 2), (0, 2, 3))
    assert validate_terrain(r).ok


def test_degenerate_triangle_is_rejected():
    with pytest.raises(InvalidInput):
        Terrain(SQUARE, ((0, 0, 0), (2, 2, 0), (4, 4, 0)), ((0, 1, 2),))


def test_partial_cover_fails_validation():
    r = Terrain(SQUARE, ((0, 0, 0), (4, 0, 0), (4, 4, 0), (0, 4, 0)), ((0, 1, 2),))
    assert "triangulation area" in validate_terrain(r).kinds()


def test_flat_against_higher_plane():
    result = max_vertical_distance(flat(), planes((0, 0, 5)))
    assert result.value == 5
    assert result.case is DistanceCase.VERTEX_FACET
    assert min_vertical_distance(flat(), planes((0, 0, 5))).value == 5


def test_tent_against_ground():
    result = max_vertical_distance(tent(), planes((0, 0, 0)))
    assert result.value == 3
    assert result.witness_xy == Point(2, 2)


def test_intersecting_surfaces_have_zero_minimum():
    r, b = tent(), planes((0, 0, 1))
    result = min_vertical_distance(r, b)
    assert result.value == 0
    assert result.case in (DistanceCase.SURFACE_CROSSING, DistanceCase.EDGE_EDGE, DistanceCase.FACET_VERTEX)
    assert gap(r, b, result.witness_xy) == 0
    assert max_vertical_distance(r, b).value == 2


def test_crease_crossings_match_exhaustive_candidates():
    # the envelope crease x = 1 crosses two ridges of the tent
    r = tent(4)
    b = planes((1, 0, -1), (-1, 0, 1))
    result = max_vertical_distance(r, b)
    assert result.value == naive_terrain_distance(r, b, "max").value
    assert abs(gap(r, b, result.witness_xy)) == result.value


def test_mismatched_domains_are_rejected():
    b = ConvexTerrain(Domain(0, 0, 5, 5), ((0, 0, 1),))
    with pytest.raises(InvalidInput):
        max_vertical_distance(flat(), b)


def test_envelope_of_two_planes():
    envelope = upper_envelope(planes((1, 0, -2), (-1, 0, 2)))
    assert len(envelope.cells) == 2
    assert len(envelope.edges) == 1
    edge = envelope.edges[0]
    assert {edge.a, edge.b} == {Point(2, 0), Point(2, 4)}


def test_hidden_plane_has_no_cell():
    envelope = upper_envelope(planes((0, 0, 5), (0, 0, 1)))
    assert [cell.plane for cell in envelope.cells] == [0]
    assert envelope.edges == ()


def test_shear_separates_points():
    assert choose_shear([Point(0, 0), Point(1, 0)]) == 0
    shear = choose_shear([Point(0, 0), Point(0, 4), Point(4, 0), Point(4, 4), Point(2, 2)])
    assert shear == Fraction(1, 2)


def difference_profile(r, b, joint, ix, red_id):
    """Signed gap at the left endpoint, each crossing, and the right endpoint of an edge."""
    i, j = joint.red_edges[red_id]
    values = [r.vertices[i][2] - height_at(b, r.point(i))]
    for ref in in_order(ix, red_id):
        values.append(gap(r, b, joint.unsheared(ref.point)))
    values.append(r.vertices[j][2] - height_at(b, r.point(j)))
    return values


@pytest.mark.parametrize("seed", range(6))
def test_oracle_follows_concave_profile(seed):
    r, b = gen_terrain(seed, n_vertices=10, n_planes=4, size=32)
    joint = joint_projection(r, upper_envelope(b))
    ix = preprocess(joint.pair)
    oracle = UnimodalOracle(r, b, joint)
    for red in joint.pair.reds:
        values = difference_profile(r, b, joint, ix, red.id)
        steps = [after - before for before, after in zip(values, values[1:])]
        # breakpoints are unevenly spaced; concavity shows in the sign pattern
        signs = [(s > 0) - (s < 0) for s in steps]
        assert signs == sorted(signs, reverse=True)
        for k, ref in enumerate(in_order(ix, red.id), 1):
            answer = oracle(ref)
            if values[k + 1] > values[k]:
                assert answer is OracleAnswer.GO_RIGHT
            elif values[k - 1] > values[k]:
                assert answer is OracleAnswer.GO_LEFT
            else:
                assert answer is OracleAnswer.FOUND


@pytest.mark.parametrize("seed", range(8))
def test_distance_matches_exhaustive_candidates(seed):
    r, b = gen_terrain(seed, n_vertices=12, n_planes=5, size=32)
    for mode in ("max", "min"):
        fast = max_vertical_distance(r, b) if mode == "max" else min_vertical_distance(r, b)
        slow = naive_terrain_distance(r, b, mode)
        assert fast.value == slow.value
        assert abs(gap(r, b, fast.witness_xy)) == fast.value
        assert slow.case in set(DistanceCase)


def sample_points(domain, count, seed):
    rng = np.random.default_rng(seed)
    width, height = domain.xmax - domain.xmin, domain.ymax - domain.ymin
    for u, v in rng.integers(0, 1 << 16, size=(count, 2)):
        yield Point(domain.xmin + width * Fraction(int(u), 1 << 16), domain.ymin + height * Fraction(int(v), 1 << 16))


@pytest.mark.parametrize("seed", range(3))
def test_reported_extremes_dominate_samples(seed):
    r, b = gen_terrain(seed, n_vertices=12, n_planes=5, size=32)
    high = max_vertical_distance(r, b).value
    low = min_vertical_distance(r, b).value
    for p in sample_points(r.domain, 300, seed):
        assert low <= abs(gap(r, b, p)) <= high


def float_gaps(r, b, count, seed):
    """|R - B| at uniformly drawn points, evaluated in floating point over all triangles at once."""
    rng = np.random.default_rng(seed)
    d = r.domain
    xs = float(d.xmin) + float(d.xmax - d.xmin) * rng.random(count)
    ys = float(d.ymin) + float(d.ymax - d.ymin) * rng.random(count)
    corners = np.array([[float(v[0]), float(v[1])] for v in r.vertices])
    red = np.full(count, np.nan)
    for tri, (a, bb, c) in zip(r.triangles, r.planes):
        inside = np.ones(count, dtype=bool)
        for e in range(3):
            (px, py), (qx, qy) = corners[tri[e]], corners[tri[(e + 1) % 3]]
            inside &= (qx - px) * (ys - py) - (qy - py) * (xs - px) >= -1e-9
        red = np.where(inside & np.isnan(red), float(a) * xs + float(bb) * ys + float(c), red)
    blue = np.max([float(a) * xs + float(bb) * ys + float(c) for a, bb, c in b.planes], axis=0)
    assert not np.isnan(red).any()
    return np.abs(red - blue)


@pytest.mark.slow
def test_terrain_suite_against_exhaustive_and_samples():
    rng = np.random.default_rng(7)
    checked = 0
    for seed in range(200):
        n_vertices = int(rng.integers(4, 22))
        n_planes = int(rng.integers(1, 11))
        r, b = gen_terrain(seed, n_vertices=n_vertices, n_planes=n_planes, size=64)
        assert len(r.triangles) <= 40
        high = max_vertical_distance(r, b)
        low = min_vertical_distance(r, b)
        assert high.value == naive_terrain_distance(r, b, "max").value
        assert low.value == naive_terrain_distance(r, b, "min").value
        assert abs(gap(r, b, high.witness_xy)) == high.value
        assert abs(gap(r, b, low.witness_xy)) == low.value
        gaps = float_gaps(r, b, 10_000, seed)
        assert gaps.max() <= float(high.value) + 1e-6
        assert gaps.min() >= float(low.value) - 1e-6
        checked += 1
    assert checked == 200
