from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from rbindex.services.geometry import (
    Color,
    Contact,
    IntegerFrame,
    Orientation,
    Point,
    Segment,
    crossing_point,
    orientation,
    position_along,
    segment_contact,
    validate_input,
)
from rbindex.utils.common import format_coord, parse_coord
from tests.conftest import pair_of

coords = st.fractions(min_value=-50, max_value=50, max_denominator=12)
points = st.builds(Point, coords, coords)


def seg(id, color, x1, y1, x2, y2):
    return Segment.of(id, color, (x1, y1), (x2, y2))


@pytest.mark.parametrize(
    "r, expected",
    [((0, 1), Orientation.LEFT), ((2, 0), Orientation.COLLINEAR), ((0, -1), Orientation.RIGHT)],
)
def test_orientation_examples(r, expected):
    assert orientation(Point(0, 0), Point(1, 0), Point(*r)) is expected


@given(points, points, points)
@settings(max_examples=200)
def test_orientation_antisymmetric(p, q, r):
    assert orientation(p, q, r) == -orientation(p, r, q)


def test_crossing_point_examples():
    assert crossing_point(seg(1, "R", 0, 0, 4, 0), seg(1, "B", 1, 2, 3, -2)) == Point(2, 0)
    assert crossing_point(seg(1, "R", 0, 0, 4, 4), seg(1, "B", 1, 3, 3, 1)) == Point(2, 2)
    assert crossing_point(seg(1, "R", 0, 0, 4, 0), seg(1, "B", 1, 2, 3, 1)) is None


def test_crossing_point_is_exact_for_rational_input():
    s = seg(1, "R", 0, 0, 3, 1)
    t = seg(1, "B", 1, 2, 2, -1)
    p = crossing_point(s, t)
    assert p == Point(Fraction(3, 2), Fraction(1, 2))
    assert position_along(s, p) == Fraction(1, 2)


@given(points, points, points, points)
@settings(max_examples=200)
def test_crossing_point_symmetric_and_on_both_lines(a, b, c, d):
    if a.x == b.x or c.x == d.x:
        return
    s, t = Segment.of(1, "R", (a.x, a.y), (b.x, b.y)), Segment.of(1, "B", (c.x, c.y), (d.x, d.y))
    p = crossing_point(s, t)
    assert p == crossing_point(t, s)
    if p is not None:
        assert orientation(s.a, s.b, p) is Orientation.COLLINEAR
        assert orientation(t.a, t.b, p) is Orientation.COLLINEAR
        assert s.a.x < p.x < s.b.x


def test_shared_endpoint_is_not_a_crossing():
    s, t = seg(1, "R", 0, 0, 2, 2), seg(1, "B", 2, 2, 4, 0)
    assert segment_contact(s, t) is Contact.SHARED_ENDPOINT
    assert crossing_point(s, t) is None


def test_contact_kinds():
    base = seg(1, "R", 0, 0, 4, 0)
    assert segment_contact(base, seg(1, "B", 2, 0, 5, 3)) is Contact.TOUCH
    assert segment_contact(base, seg(1, "B", 2, 0, 6, 0)) is Contact.OVERLAP
    assert segment_contact(base, seg(1, "B", 5, 1, 6, 2)) is Contact.NONE


def test_segment_of_normalizes_endpoints():
    s = seg(3, "B", 5, 1, 1, 7)
    assert (s.a, s.b) == (Point(1, 7), Point(5, 1))
    assert s.color is Color.BLUE


def test_floats_are_rejected():
    with pytest.raises(TypeError):
        Point(0.5, 1)


def test_validate_accepts_valid_instance(one_by_one):
    assert validate_input(one_by_one).ok


def test_validate_reports_duplicate_x():
    report = validate_input(pair_of([(0, 0, 4, 0), (0, 1, 5, 1)]))
    assert "duplicate endpoint x=0" in report.kinds()
    assert report.violations[0].red_ids == (1, 2)


def test_validate_reports_same_color_crossing():
    report = validate_input(pair_of([(0, 0, 4, 0), (1, -1, 3, 1)]))
    assert report.kinds() == {"same-color crossing"}


def test_validate_reports_red_blue_degeneracies():
    touching = validate_input(pair_of([(0, 0, 4, 0)], [(2, 0, 5, 3)]))
    assert "endpoint on segment" in touching.kinds()
    overlapping = validate_input(pair_of([(0, 0, 4, 0)], [(2, 0, 6, 0)]))
    assert "collinear overlap" in overlapping.kinds()


def test_validate_reports_vertical_segment():
    report = validate_input(pair_of([(1, 0, 1, 5)]))
    assert "vertical segment" in report.kinds()


def test_same_color_shared_endpoint_is_allowed():
    assert validate_input(pair_of([(0, 0, 2, 2), (2, 2, 4, 0)])).ok


def test_integer_frame_scales_to_integers():
    frame = IntegerFrame.of([Point(Fraction(1, 2), Fraction(2, 3)), Point(3, Fraction(1, 4))])
    assert frame.scale == 12
    assert frame(Point(Fraction(1, 2), Fraction(2, 3))) == (6, 8)


@pytest.mark.parametrize("text, value", [("1.25", Fraction(5, 4)), ("5/4", Fraction(5, 4)), ("-3", Fraction(-3))])
def test_coordinate_literals(text, value):
    assert parse_coord(text) == value


def test_coordinate_format_round_trip():
    assert format_coord(Fraction(-7, 3)) == "-7/3"
    assert format_coord(Fraction(8, 2)) == "4"
    with pytest.raises(ValueError):
        parse_coord("1e3")
