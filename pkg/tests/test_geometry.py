"""Static geometry: layout validation, clearance and nearest-wall queries."""

import math
import random

import pytest

from kitchensynth.geometry import (
    Counter,
    CounterKind,
    CounterUnreachableError,
    InvalidQueryError,
    Layout,
    Point2,
    Quarter,
    Room,
    clearance_left_right,
    clearance_left_right_batch,
    nearest_wall,
    nearest_wall_distance,
    point_clear,
    segment_clear,
    service_configuration,
    validate_layout,
)

from conftest import make_counter, square_room


# ---------------------------------------------------------------------------
# validate_layout

class TestValidateLayout:
    def test_counter_inside_empty_room_is_valid(self):
        layout = Layout(square_room(), [make_counter("c", 5.0, 5.0)])
        assert validate_layout(layout) == []

    def test_coincident_counters_overlap(self):
        a = make_counter("a", 5.0, 5.0)
        b = make_counter("b", 5.0, 5.0)
        violations = validate_layout(Layout(square_room(), [a, b]))
        assert any(v.rule == "overlap" and set(v.counters) == {"a", "b"}
                   for v in violations)

    def test_counter_on_boundary_edge_is_containment_violation(self):
        c = make_counter("c", 0.0, 5.0)  # centered on the left wall
        violations = validate_layout(Layout(square_room(), [c]))
        assert any(v.rule == "containment" and v.counters == ("c",)
                   for v in violations)

    def test_counter_crossing_interior_wall(self):
        room = Room(square_room().boundary,
                    ((Point2(2.0, 5.0), Point2(8.0, 5.0)),))
        c = make_counter("c", 5.0, 5.0)
        violations = validate_layout(Layout(room, [c]))
        assert any(v.rule == "interior-wall" for v in violations)

    def test_deterministic(self):
        a = make_counter("a", 5.0, 5.0)
        b = make_counter("b", 5.2, 5.2)
        layout = Layout(square_room(), [a, b])
        assert validate_layout(layout) == validate_layout(
            Layout(square_room(), [make_counter("a", 5.0, 5.0),
                                   make_counter("b", 5.2, 5.2)]))


# ---------------------------------------------------------------------------
# point_clear / segment_clear

class TestPointClear:
    def test_empty_room_center(self, empty_square):
        assert point_clear(empty_square, Point2(5.0, 5.0), 0.3)

    def test_counter_center_blocked(self):
        layout = Layout(square_room(), [make_counter("c", 5.0, 5.0)])
        assert not point_clear(layout, Point2(5.0, 5.0), 0.3)

    def test_just_inside_radius_blocked_just_outside_clear(self):
        # DEG_0 counter at (5, 5): footprint x in [4.7, 5.3], y in [4.5, 5.5]
        layout = Layout(square_room(), [make_counter("c", 5.0, 5.0)])
        assert not point_clear(layout, Point2(5.3 + 0.29, 5.0), 0.3)
        assert point_clear(layout, Point2(5.3 + 0.31, 5.0), 0.3)

    def test_outside_room_blocked(self, empty_square):
        assert not point_clear(empty_square, Point2(-1.0, 5.0), 0.3)

    def test_too_close_to_wall_blocked(self, empty_square):
        assert not point_clear(empty_square, Point2(0.2, 5.0), 0.3)
        assert point_clear(empty_square, Point2(0.4, 5.0), 0.3)


def fine_sampled_clear(layout, a, b, radius, divisions=20):
    """Independent oracle: point checks at radius/divisions spacing."""
    length = math.hypot(b[0] - a[0], b[1] - a[1])
    n = max(1, math.ceil(length / (radius / divisions)))
    for i in range(n + 1):
        t = i / n
        p = Point2(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
        if not point_clear(layout, p, radius):
            return False
    return True


class TestSegmentClear:
    def test_degenerate_segment_equals_point_clear(self, empty_square):
        p = Point2(5.0, 5.0)
        assert segment_clear(empty_square, p, p, 0.3) == \
            point_clear(empty_square, p, 0.3)

    def test_segment_through_counter_blocked(self):
        layout = Layout(square_room(), [make_counter("c", 5.0, 5.0)])
        assert not segment_clear(layout, Point2(3.0, 5.0), Point2(7.0, 5.0), 0.3)

    def test_grazing_segment_clear_and_agrees_with_fine_oracle(self):
        # footprint top edge at y = 5.5; segment at 5.5 + 0.3 + 0.01
        layout = Layout(square_room(), [make_counter("c", 5.0, 5.0)])
        a, b = Point2(3.0, 5.81), Point2(7.0, 5.81)
        assert segment_clear(layout, a, b, 0.3)
        assert fine_sampled_clear(layout, a, b, 0.3)

    def test_grazing_pass_inside_radius_blocked(self):
        # corner-shaving segment whose interior dips below the radius even
        # though coarse samples might miss it
        layout = Layout(square_room(), [make_counter("c", 5.0, 5.0)])
        a, b = Point2(3.0, 5.799), Point2(7.0, 5.799)
        assert not segment_clear(layout, a, b, 0.3)

    def test_no_false_clear_against_finer_oracle(self, corridor_layout):
        # 1,000 random segments: segment_clear never reports clear where a
        # 10x-finer point sampling disagrees
        rng = random.Random(0)
        radius = 0.3
        for _ in range(1000):
            a = Point2(rng.uniform(0, 10), rng.uniform(0, 10))
            b = Point2(rng.uniform(0, 10), rng.uniform(0, 10))
            if segment_clear(corridor_layout, a, b, radius):
                assert fine_sampled_clear(corridor_layout, a, b, radius)


# ---------------------------------------------------------------------------
# nearest_wall

class TestNearestWall:
    def test_near_left_wall(self, empty_square):
        w, orient = nearest_wall(empty_square, Point2(1.0, 5.0))
        assert w == Point2(0.0, 5.0)
        assert orient == Quarter.DEG_0  # interior is +x

    def test_tie_breaks_to_first_edge(self, empty_square):
        # room center is equidistant from all four walls; the bottom edge
        # comes first in construction order, whose interior normal is +y
        w, orient = nearest_wall(empty_square, Point2(5.0, 5.0))
        assert w == Point2(5.0, 0.0)
        assert orient == Quarter.DEG_90

    def test_outside_point_rejected(self, empty_square):
        with pytest.raises(InvalidQueryError):
            nearest_wall(empty_square, Point2(11.0, 5.0))

    def test_interior_wall_participates(self):
        room = Room(square_room().boundary,
                    ((Point2(2.0, 5.0), Point2(8.0, 5.0)),))
        layout = Layout(room, [])
        w, orient = nearest_wall(layout, Point2(5.0, 4.5))
        assert w == Point2(5.0, 5.0)
        assert orient == Quarter.DEG_270  # normal toward the query point

    def test_distance_matches_dense_wall_sampling(self, corridor_layout):
        rng = random.Random(1)
        room = corridor_layout.room
        walls = corridor_layout.walls
        for _ in range(50):
            p = Point2(rng.uniform(0.1, 9.9), rng.uniform(0.1, 9.9))
            if not room.contains(p):
                continue
            d = nearest_wall_distance(corridor_layout, p)
            dense = math.inf
            for (a, b) in walls:
                length = math.hypot(b[0] - a[0], b[1] - a[1])
                n = max(1, int(length / 0.01))
                for i in range(n + 1):
                    t = i / n
                    qx = a[0] + t * (b[0] - a[0])
                    qy = a[1] + t * (b[1] - a[1])
                    dense = min(dense, math.hypot(p.x - qx, p.y - qy))
            assert abs(d - dense) <= 0.01


# ---------------------------------------------------------------------------
# service_configuration

class TestServiceConfiguration:
    def test_south_wall_counter_offset(self):
        # counter against the south wall facing north: service pose sits
        # depth/2 + radius + standoff = 0.8 m north of the center
        c = make_counter("c", 5.0, 0.3, Quarter.DEG_90)
        layout = Layout(square_room(), [c])
        p, facing = service_configuration(layout, c, 0.3, standoff=0.2)
        assert p == Point2(5.0, 1.1)
        assert facing == Quarter.DEG_270  # facing back at the counter

    def test_blocked_front_face_unreachable(self):
        c = make_counter("c", 5.0, 5.0, Quarter.DEG_0)
        blocker = make_counter("b", 6.1, 5.0, Quarter.DEG_0)
        layout = Layout(square_room(), [c, blocker])
        with pytest.raises(CounterUnreachableError):
            service_configuration(layout, c, 0.3)

    def test_distant_counters_get_distinct_poses(self):
        a = make_counter("a", 2.0, 2.0, Quarter.DEG_0)
        b = make_counter("b", 8.0, 8.0, Quarter.DEG_180)
        layout = Layout(square_room(), [a, b])
        pa, _ = service_configuration(layout, a, 0.3)
        pb, _ = service_configuration(layout, b, 0.3)
        assert pa != pb
        assert point_clear(layout, pa, 0.3) and point_clear(layout, pb, 0.3)


# ---------------------------------------------------------------------------
# clearance_left_right

class TestClearanceLeftRight:
    def test_corridor_midline(self, corridor_layout):
        left, right = clearance_left_right(corridor_layout, Point2(5.0, 5.0),
                                           Point2(1.0, 0.0))
        assert left == pytest.approx(0.5, abs=1e-12)
        assert right == pytest.approx(0.5, abs=1e-12)

    def test_empty_room_far_from_walls_capped(self, empty_square):
        left, right = clearance_left_right(empty_square, Point2(5.0, 5.0),
                                           Point2(1.0, 0.0), cap=2.0)
        assert left == 2.0 and right == 2.0

    def test_single_wall_on_the_right(self, empty_square):
        left, right = clearance_left_right(empty_square, Point2(5.0, 0.3),
                                           Point2(1.0, 0.0))
        assert right == pytest.approx(0.3, abs=1e-12)
        assert left == pytest.approx(5.0, abs=1e-9)  # clipped side walls

    def test_zero_heading_rejected(self, empty_square):
        with pytest.raises(ValueError):
            clearance_left_right(empty_square, Point2(5.0, 5.0),
                                 Point2(0.0, 0.0))

    def test_outside_point_rejected(self, empty_square):
        with pytest.raises(InvalidQueryError):
            clearance_left_right(empty_square, Point2(-1.0, 5.0),
                                 Point2(1.0, 0.0))

    def test_batch_matches_scalar(self, corridor_layout):
        rng = random.Random(2)
        pts, heads = [], []
        while len(pts) < 200:
            p = Point2(rng.uniform(0, 10), rng.uniform(0, 10))
            h = Point2(rng.uniform(-1, 1), rng.uniform(-1, 1))
            if not corridor_layout.room.contains(p) or (h.x == 0 and h.y == 0):
                continue
            pts.append(p)
            heads.append(h)
        left, right = clearance_left_right_batch(
            corridor_layout,
            [p.x for p in pts], [p.y for p in pts],
            [h.x for h in heads], [h.y for h in heads])
        for i, (p, h) in enumerate(zip(pts, heads)):
            sl, sr = clearance_left_right(corridor_layout, p, h)
            assert left[i] == pytest.approx(sl, abs=1e-12)
            assert right[i] == pytest.approx(sr, abs=1e-12)


# ---------------------------------------------------------------------------
# Room / Counter basics

class TestTypes:
    def test_room_needs_three_vertices(self):
        with pytest.raises(ValueError):
            Room((Point2(0, 0), Point2(1, 0)))

    def test_counter_footprint_follows_orientation(self):
        c = make_counter("c", 0.0, 0.0, Quarter.DEG_0)   # depth along x
        assert c.footprint == (-0.3, -0.5, 0.3, 0.5)
        c = make_counter("c", 0.0, 0.0, Quarter.DEG_90)  # depth along y
        assert c.footprint == (-0.5, -0.3, 0.5, 0.3)

    def test_counter_positive_footprint_required(self):
        with pytest.raises(ValueError):
            Counter("c", CounterKind.PLAIN, Point2(0, 0), Quarter.DEG_0,
                    width=0.0)

    def test_room_perimeter_and_diameter(self, empty_square):
        room = empty_square.room
        assert room.perimeter == pytest.approx(40.0)
        assert room.diameter == pytest.approx(math.hypot(10.0, 10.0))
