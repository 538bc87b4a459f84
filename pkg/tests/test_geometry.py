import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fanetsim.geometry import DegenerateGeometryError, distance, forwarding_angle

coord = st.floats(min_value=-1000, max_value=1000, allow_nan=False)
point = st.tuples(coord, coord)


def test_distance_identity():
    assert distance((0, 0), (0, 0)) == 0


def test_distance_pythagorean():
    assert distance((0, 0), (3, 4)) == 5


def test_distance_axis_aligned():
    assert distance((120, 80), (370, 80)) == 250


@given(point, point)
def test_distance_symmetric_nonnegative(a, b):
    assert distance(a, b) == distance(b, a) >= 0


@given(point, point, point)
def test_distance_triangle_inequality(a, b, c):
    assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9


def test_angle_toward_destination_is_zero():
    assert forwarding_angle((0, 0), (50, 0), (100, 0)) == pytest.approx(0.0)


def test_angle_perpendicular():
    assert forwarding_angle((0, 0), (0, 50), (100, 0)) == pytest.approx(90.0)


def test_angle_away_from_destination():
    assert forwarding_angle((0, 0), (-50, 0), (100, 0)) == pytest.approx(180.0)


def test_angle_coincident_candidate_rejected():
    with pytest.raises(DegenerateGeometryError):
        forwarding_angle((0, 0), (0, 0), (100, 0))
    with pytest.raises(DegenerateGeometryError):
        forwarding_angle((0, 0), (50, 50), (0, 0))


@given(point, point, point)
def test_angle_range(prev, cand, dest):
    try:
        angle = forwarding_angle(prev, cand, dest)
    except DegenerateGeometryError:
        return
    assert 0.0 <= angle <= 180.0


def test_angle_oblique_matches_law_of_cosines():
    prev, cand, dest = (10.0, 20.0), (80.0, 90.0), (200.0, 40.0)
    a = distance(prev, cand)
    b = distance(prev, dest)
    c = distance(cand, dest)
    expected = math.degrees(math.acos((a * a + b * b - c * c) / (2 * a * b)))
    assert forwarding_angle(prev, cand, dest) == pytest.approx(expected, abs=1e-9)
