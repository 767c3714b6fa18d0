from __future__ import annotations

import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mwfapf.world import (
    Bounds,
    ConfigError,
    GeometryError,
    Segment2,
    World,
    point_in_obstacle,
    ray_cast,
    segments_intersect,
    segments_intersect_many,
)
from oracles import exact_segments_intersect, march_ray

BOX = ((4.0, 4.0), (6.0, 4.0), (6.0, 6.0), (4.0, 6.0))


def make_world(obstacles=(BOX,), start=(1.0, 1.0), goal=(9.0, 9.0)):
    return World(obstacles=obstacles, goal=goal, start=start, bounds=Bounds(0, 0, 10, 10))


def test_segments_cross():
    assert segments_intersect(Segment2((0, 0), (2, 2)), Segment2((0, 2), (2, 0)))


def test_segments_disjoint_parallel():
    assert not segments_intersect(Segment2((0, 0), (2, 0)), Segment2((0, 1), (2, 1)))


def test_touching_endpoint_counts():
    assert segments_intersect(Segment2((0, 0), (1, 0)), Segment2((1, 0), (1, 5)))


def test_collinear_overlap_and_gap():
    assert segments_intersect(Segment2((0, 0), (2, 0)), Segment2((1, 0), (3, 0)))
    assert not segments_intersect(Segment2((0, 0), (1, 0)), Segment2((2, 0), (3, 0)))


def test_degenerate_segment_rejected():
    with pytest.raises(GeometryError):
        Segment2((1, 1), (1, 1))


def test_intersection_matches_exact_oracle():
    rng = random.Random(7)
    for _ in range(1000):
        pts = [(rng.randint(-5, 5), rng.randint(-5, 5)) for _ in range(4)]
        if pts[0] == pts[1] or pts[2] == pts[3]:
            continue
        got = segments_intersect(Segment2(pts[0], pts[1]), Segment2(pts[2], pts[3]))
        assert got == exact_segments_intersect(*pts), pts


def test_vectorised_predicate_agrees_with_scalar():
    rng = random.Random(11)
    a = np.array([[rng.randint(-4, 4), rng.randint(-4, 4)] for _ in range(300)], dtype=float)
    b = a + np.array([[rng.choice([-3, -1, 1, 2]), rng.randint(-3, 3)] for _ in range(300)], dtype=float)
    p, q = (-2.0, -1.0), (3.0, 2.0)
    many = segments_intersect_many(a, b, p, q)
    for k in range(len(a)):
        assert many[k] == segments_intersect(Segment2(tuple(a[k]), tuple(b[k])), Segment2(p, q))


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), min_size=4, max_size=4))
def test_intersection_is_symmetric(pts):
    if pts[0] == pts[1] or pts[2] == pts[3]:
        return
    s1, s2 = Segment2(pts[0], pts[1]), Segment2(pts[2], pts[3])
    assert segments_intersect(s1, s2) == segments_intersect(s2, s1)
    assert segments_intersect(s1, s2) == segments_intersect(Segment2(pts[1], pts[0]), s2)


def test_ray_hits_box_face():
    w = make_world()
    assert ray_cast(w, (2.0, 5.0), (1.0, 0.0), 10.0) == pytest.approx(2.0)


def test_ray_saturates():
    w = make_world()
    assert ray_cast(w, (2.0, 5.0), (1.0, 0.0), 1.5) == 1.5


def test_bounds_are_walls():
    w = make_world(obstacles=())
    assert ray_cast(w, (2.0, 5.0), (-1.0, 0.0), 10.0) == pytest.approx(2.0)


def test_ray_rejects_non_unit_direction():
    with pytest.raises(GeometryError):
        ray_cast(make_world(), (1.0, 1.0), (2.0, 0.0), 4.0)


def test_ray_matches_marching_oracle():
    w = make_world()
    a, b = w.edges
    edges = list(zip(map(tuple, a), map(tuple, b)))
    rng = random.Random(3)
    for _ in range(25):
        while True:
            o = (rng.uniform(0.5, 9.5), rng.uniform(0.5, 9.5))
            if not point_in_obstacle(w, o):
                break
        ang = rng.uniform(-math.pi, math.pi)
        got = ray_cast(w, o, (math.cos(ang), math.sin(ang)), 4.0)
        assert got == pytest.approx(march_ray(edges, o, ang, 4.0), abs=3e-3)


@pytest.mark.parametrize(
    "kwargs, invariant",
    [
        ({"start": (5.0, 5.0)}, "start_outside_obstacles"),
        ({"goal": (4.5, 4.5)}, "goal_outside_obstacles"),
        ({"goal": (12.0, 1.0)}, "within_bounds"),
        ({"obstacles": (((1, 1), (2, 2)),)}, "polygon_min_vertices"),
        ({"obstacles": (((3, 3), (5, 5), (5, 3), (3, 5)),)}, "polygon_simple"),
        ({"obstacles": (((8, 8), (11, 8), (11, 9)),)}, "within_bounds"),
    ],
)
def test_world_invariants(kwargs, invariant):
    with pytest.raises(ConfigError) as err:
        make_world(**kwargs)
    assert err.value.invariant == invariant


def test_nearest_edge_distance():
    w = make_world()
    assert w.nearest_edge_distance((3.0, 5.0)) == pytest.approx(1.0)
    assert w.nearest_edge_distance((0.5, 8.0)) == pytest.approx(0.5)


def test_point_in_obstacle_boundary_counts():
    w = make_world()
    assert point_in_obstacle(w, (4.0, 5.0))
    assert point_in_obstacle(w, (5.0, 5.0))
    assert not point_in_obstacle(w, (3.9, 5.0))
