import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from disclab.geometry import (RotRect, Vec2, clip_to_box, clipped_area, contains, contains_periodic,
                              contains_periodic_many, rect_vertices, rotate_vec, shoelace_area,
                              torus_wrap)

coord = st.floats(-3, 3, allow_nan=False)
angle = st.floats(-math.pi, math.pi, allow_nan=False)


def close(v, w, tol=1e-12):
    return abs(v[0] - w[0]) <= tol and abs(v[1] - w[1]) <= tol


@pytest.mark.parametrize("v, a, expected", [
    ((1, 0), math.pi / 2, (0, 1)),
    ((1, 1), 0.0, (1, 1)),
    ((1, 0), math.pi / 6, (math.sqrt(3) / 2, 0.5)),
])
def test_rotate_vec_examples(v, a, expected):
    assert close(rotate_vec(v, a), expected)


@given(coord, coord, angle)
def test_rotation_preserves_norm_and_inverts(x, y, a):
    w = rotate_vec((x, y), a)
    assert math.hypot(*w) == pytest.approx(math.hypot(x, y), abs=1e-12)
    assert close(rotate_vec(w, -a), (x, y), 1e-12)


@pytest.mark.parametrize("v, expected", [((1.25, -0.1), (0.25, 0.9)), ((0.5, 0.5), (0.5, 0.5)),
                                         ((-2.0, 3.0), (0.0, 0.0))])
def test_torus_wrap_examples(v, expected):
    assert close(torus_wrap(v), expected)


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_torus_wrap_range(x, y):
    w = torus_wrap((x, y))
    assert 0 <= w.x < 1 and 0 <= w.y < 1


def test_torus_wrap_tiny_negative_stays_below_one():
    assert torus_wrap((-1e-18, 0.0)).x < 1.0


def test_contains_periodic_examples():
    sq = RotRect.square(Vec2(0, 0), 0.25)
    assert contains_periodic(sq, (0.9, 0.9))
    assert not contains_periodic(sq, (0.5, 0.5))
    rot = RotRect.square(Vec2(0.5, 0.5), 0.25, math.pi / 4)
    assert contains_periodic(rot, (0.5, 0.76))


def test_contains_is_closed():
    sq = RotRect.square(Vec2(0.5, 0.5), 0.25)
    assert contains(sq, (0.75, 0.75))
    assert not contains(sq, (0.7500001, 0.5))


@settings(max_examples=50)
@given(st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True),
       st.floats(0.01, 0.3), st.floats(0.01, 0.3), angle)
def test_contains_periodic_many_matches_scalar(cx, cy, hu, hv, a):
    rect = RotRect(Vec2(cx, cy), hu, hv, a)
    pts = np.random.default_rng(0).random((40, 2))
    many = contains_periodic_many(rect, pts)
    assert many.tolist() == [contains_periodic(rect, p) for p in pts]


def test_rect_vertices_examples():
    v = rect_vertices(RotRect.square(Vec2(0, 0), 1.0))
    assert all(close(a, b) for a, b in zip(v, [(1, 1), (-1, 1), (-1, -1), (1, -1)]))
    v = rect_vertices(RotRect(Vec2(0.5, 0.5), 0.2, 0.1))
    assert all(close(a, b) for a, b in zip(v, [(0.7, 0.6), (0.3, 0.6), (0.3, 0.4), (0.7, 0.4)]))
    s2 = math.sqrt(2)
    v = rect_vertices(RotRect.square(Vec2(0, 0), 1.0, math.pi / 4))
    assert all(close(a, b) for a, b in zip(v, [(0, s2), (-s2, 0), (0, -s2), (s2, 0)]))


@pytest.mark.parametrize("rect, expected", [
    (RotRect.square(Vec2(0, 0), 0.25), 0.0625),
    (RotRect.square(Vec2(0.5, 0.5), 0.25), 0.25),
    (RotRect.square(Vec2(0, 0.5), 0.2, math.pi / 4), 0.08),
    # frozen from an independent polygon-library intersection
    (RotRect(Vec2(0.1, 0.2), 0.3, 0.15, 0.4), 0.12253994966146473),
    (RotRect(Vec2(0.5, 0.5), 0.8, 0.1, 0.7), 0.2582951033957325),
    (RotRect(Vec2(0.95, 0.05), 0.2, 0.2, -0.3), 0.06343503203076174),
])
def test_clipped_area(rect, expected):
    assert clipped_area(rect) == pytest.approx(expected, rel=1e-12, abs=1e-15)


@settings(max_examples=60)
@given(st.floats(-0.5, 1.5), st.floats(-0.5, 1.5), st.floats(0.01, 1), st.floats(0.01, 1), angle)
def test_clipped_area_bounds(cx, cy, hu, hv, a):
    rect = RotRect(Vec2(cx, cy), hu, hv, a)
    area = clipped_area(rect)
    assert -1e-15 <= area <= min(rect.area, 1.0) + 1e-12


def test_clip_to_box_and_shoelace():
    tri = [(0.5, -0.5), (1.5, 0.5), (0.5, 0.5)]
    assert shoelace_area(clip_to_box(tri)) == pytest.approx(0.25)
    assert shoelace_area([(0, 0), (1, 0), (1, 1), (0, 1)]) == 1.0


def test_rotrect_validation():
    with pytest.raises(ValueError):
        RotRect(Vec2(0, 0), -1.0, 1.0)
