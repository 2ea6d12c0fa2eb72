"""2D rooms, counters and clearance queries.

All coordinates are in meters. Counters are axis-aligned rectangles whose
quarter-turn orientation selects the service ("front") face. All values are
immutable after construction and every query is a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Optional, Sequence

import numpy as np


class Point2(NamedTuple):
    x: float
    y: float


class Quarter(Enum):
    """Facing direction snapped to quarter turns (degrees CCW from +x)."""

    DEG_0 = 0
    DEG_90 = 90
    DEG_180 = 180
    DEG_270 = 270

    @property
    def direction(self) -> Point2:
        return _QUARTER_DIRS[self]

    @property
    def radians(self) -> float:
        return math.radians(self.value)


_QUARTER_DIRS = {
    Quarter.DEG_0: Point2(1.0, 0.0),
    Quarter.DEG_90: Point2(0.0, 1.0),
    Quarter.DEG_180: Point2(-1.0, 0.0),
    Quarter.DEG_270: Point2(0.0, -1.0),
}


class CounterKind(Enum):
    BUN = "Bun"
    MEAT = "Meat"
    TOMATO = "Tomato"
    LETTUCE = "Lettuce"
    CHEESE = "Cheese"
    STOVE = "Stove"
    CUTTING_BOARD = "CuttingBoard"
    PLATE = "Plate"
    PLAIN = "Plain"


Segment = tuple[Point2, Point2]


class InvalidQueryError(ValueError):
    """A geometric query was made outside its domain (e.g. point not in room)."""


class CounterUnreachableError(RuntimeError):
    """No clear service configuration exists for a counter in this layout."""


@dataclass(frozen=True)
class Room:
    """Simple polygon boundary (CCW) plus optional interior wall segments.

    Interior walls anchor nearest-wall and narrowness queries; whether they
    also block motion is controlled by ``interior_walls_block``.
    """

    boundary: tuple[Point2, ...]
    interior_walls: tuple[Segment, ...] = ()
    interior_walls_block: bool = False

    def __post_init__(self):
        if len(self.boundary) < 3:
            raise ValueError("room boundary needs at least 3 vertices")

    @property
    def edges(self) -> list[Segment]:
        n = len(self.boundary)
        return [(self.boundary[i], self.boundary[(i + 1) % n]) for i in range(n)]

    @property
    def perimeter(self) -> float:
        return sum(_dist(a, b) for a, b in self.edges)

    @property
    def diameter(self) -> float:
        xs = [p.x for p in self.boundary]
        ys = [p.y for p in self.boundary]
        return math.hypot(max(xs) - min(xs), max(ys) - min(ys))

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        xs = [p.x for p in self.boundary]
        ys = [p.y for p in self.boundary]
        return min(xs), min(ys), max(xs), max(ys)

    def contains(self, p: Point2) -> bool:
        return _point_in_polygon(p, self.boundary)


@dataclass(frozen=True)
class Counter:
    id: str
    kind: CounterKind
    position: Point2
    orientation: Quarter
    width: float = 1.0
    depth: float = 0.6
    target_wall_distance: float = 0.0

    def __post_init__(self):
        if self.width <= 0 or self.depth <= 0:
            raise ValueError(f"counter {self.id}: footprint dimensions must be > 0")

    @property
    def facing(self) -> Point2:
        return self.orientation.direction

    @property
    def footprint(self) -> tuple[float, float, float, float]:
        """Axis-aligned (xmin, ymin, xmax, ymax); depth runs along the facing axis."""
        fx, fy = self.orientation.direction
        if fx != 0.0:  # facing +-x: depth along x, width along y
            hx, hy = self.depth / 2.0, self.width / 2.0
        else:
            hx, hy = self.width / 2.0, self.depth / 2.0
        return (self.position.x - hx, self.position.y - hy,
                self.position.x + hx, self.position.y + hy)

    @property
    def front_face_center(self) -> Point2:
        fx, fy = self.orientation.direction
        return Point2(self.position.x + fx * self.depth / 2.0,
                      self.position.y + fy * self.depth / 2.0)

    @property
    def back_face_center(self) -> Point2:
        fx, fy = self.orientation.direction
        return Point2(self.position.x - fx * self.depth / 2.0,
                      self.position.y - fy * self.depth / 2.0)


@dataclass(frozen=True)
class AgentDisc:
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("agent radius must be > 0")


@dataclass(frozen=True)
class Violation:
    rule: str  # "containment" | "overlap" | "interior-wall"
    counters: tuple[str, ...]
    detail: str = ""


@dataclass(eq=False)
class Layout:
    room: Room
    counters: list[Counter]
    _walls: Optional[list[Segment]] = field(default=None, repr=False, compare=False)

    def counters_of_kind(self, kind: CounterKind) -> list[Counter]:
        return [c for c in self.counters if c.kind == kind]

    def counter_by_id(self, cid: str) -> Counter:
        for c in self.counters:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def with_counters(self, counters: Sequence[Counter]) -> "Layout":
        return Layout(self.room, list(counters))

    @property
    def walls(self) -> list[Segment]:
        """Boundary edges first (construction order), then interior walls."""
        if self._walls is None:
            self._walls = self.room.edges + list(self.room.interior_walls)
        return self._walls


# ---------------------------------------------------------------------------
# low-level helpers

def _dist(a: Point2, b: Point2) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def _point_in_polygon(p: Point2, poly: Sequence[Point2]) -> bool:
    """Ray-casting test; boundary points count as inside."""
    x, y = p
    n = len(poly)
    inside = False
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        if _point_segment_distance(p, (poly[i], poly[(i + 1) % n])) < 1e-12:
            return True
        if (y1 > y) != (y2 > y):
            xin = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < xin:
                inside = not inside
    return inside


def _closest_point_on_segment(p: Point2, seg: Segment) -> Point2:
    (x1, y1), (x2, y2) = seg
    dx, dy = x2 - x1, y2 - y1
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return Point2(x1, y1)
    t = ((p[0] - x1) * dx + (p[1] - y1) * dy) / L2
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    return Point2(x1 + t * dx, y1 + t * dy)


def _point_segment_distance(p: Point2, seg: Segment) -> float:
    c = _closest_point_on_segment(p, seg)
    return math.hypot(p[0] - c[0], p[1] - c[1])


def _point_box_distance(p: Point2, box: tuple[float, float, float, float]) -> float:
    """Distance from point to a solid axis-aligned box (0 inside)."""
    x, y = p
    xmin, ymin, xmax, ymax = box
    dx = max(xmin - x, 0.0, x - xmax)
    dy = max(ymin - y, 0.0, y - ymax)
    return math.hypot(dx, dy)


def _box_edges(box: tuple[float, float, float, float]) -> list[Segment]:
    xmin, ymin, xmax, ymax = box
    a = Point2(xmin, ymin)
    b = Point2(xmax, ymin)
    c = Point2(xmax, ymax)
    d = Point2(xmin, ymax)
    return [(a, b), (b, c), (c, d), (d, a)]


def _boxes_overlap(a, b) -> bool:
    return not (a[2] < b[0] or b[2] < a[0] or a[3] < b[1] or b[3] < a[1])


def _segment_intersects_box(seg: Segment, box) -> bool:
    (x1, y1), (x2, y2) = seg
    xmin, ymin, xmax, ymax = box
    if xmin <= x1 <= xmax and ymin <= y1 <= ymax:
        return True
    if xmin <= x2 <= xmax and ymin <= y2 <= ymax:
        return True
    for edge in _box_edges(box):
        if _segments_intersect(seg, edge):
            return True
    return False


def _segments_intersect(s1: Segment, s2: Segment) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(v) < 1e-12:
            return 0
        return 1 if v > 0 else -1

    a, b = s1
    c, d = s2
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 != o2 and o3 != o4:
        return True

    def on(a, b, c):
        return (orient(a, b, c) == 0
                and min(a[0], b[0]) - 1e-12 <= c[0] <= max(a[0], b[0]) + 1e-12
                and min(a[1], b[1]) - 1e-12 <= c[1] <= max(a[1], b[1]) + 1e-12)

    return on(a, b, c) or on(a, b, d) or on(c, d, a) or on(c, d, b)


def _snap_quarter(direction: Point2) -> Quarter:
    """Snap a (not necessarily unit) direction to the nearest quarter turn."""
    best, best_dot = Quarter.DEG_0, -math.inf
    for q, (dx, dy) in _QUARTER_DIRS.items():
        dot = direction[0] * dx + direction[1] * dy
        if dot > best_dot + 1e-12:
            best, best_dot = q, dot
    return best


def _wall_interior_orientation(layout: Layout, wall_index: int, toward: Point2) -> Quarter:
    """Quarter-turn facing the room interior from the given wall.

    Boundary edges use the CCW-left normal; interior walls use the normal
    pointing toward the query point.
    """
    a, b = layout.walls[wall_index]
    dx, dy = b[0] - a[0], b[1] - a[1]
    if wall_index < len(layout.room.edges):
        normal = Point2(-dy, dx)  # interior is left of a CCW edge
    else:
        c = _closest_point_on_segment(toward, (a, b))
        normal = Point2(toward[0] - c[0], toward[1] - c[1])
        if abs(normal[0]) < 1e-12 and abs(normal[1]) < 1e-12:
            normal = Point2(-dy, dx)
    return _snap_quarter(normal)


# ---------------------------------------------------------------------------
# queries

def validate_layout(layout: Layout) -> list[Violation]:
    """Check containment, pairwise overlap and interior-wall intersection.

    Violations are returned as data; an empty list means the layout is valid.
    """
    violations: list[Violation] = []
    boxes = [(c, c.footprint) for c in layout.counters]
    for c, box in boxes:
        corners = _box_edges(box)
        contained = all(layout.room.contains(seg[0]) for seg in corners)
        if contained:
            # corners inside is not enough for non-convex rooms: edges must
            # not cross the boundary either
            for edge in corners:
                if any(_segments_proper_cross(edge, w) for w in layout.room.edges):
                    contained = False
                    break
        if not contained:
            violations.append(Violation("containment", (c.id,),
                                        "footprint not fully inside room boundary"))
        for wall in layout.room.interior_walls:
            if _segment_intersects_box(wall, box):
                violations.append(Violation("interior-wall", (c.id,),
                                            "footprint intersects an interior wall"))
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            ci, bi = boxes[i]
            cj, bj = boxes[j]
            if _boxes_overlap(bi, bj):
                violations.append(Violation("overlap", (ci.id, cj.id),
                                            "counter footprints overlap"))
    return violations


def _segments_proper_cross(s1: Segment, s2: Segment) -> bool:
    """True only for a transversal crossing (touching endpoints allowed)."""
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        if abs(v) < 1e-12:
            return 0
        return 1 if v > 0 else -1

    a, b = s1
    c, d = s2
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    return o1 != o2 and o3 != o4 and 0 not in (o1, o2, o3, o4)


def clearance_checker(layout: Layout, radius: float):
    """Build (and cache on the layout) a fast disc-clearance predicate.

    The returned callable takes (x, y) and answers the same question as
    :func:`point_clear`; it is the planner's inner-loop primitive.
    """
    if radius <= 0:
        raise ValueError("radius must be > 0")
    cache = layout.__dict__.setdefault("_clear_cache", {})
    fn = cache.get(radius)
    if fn is not None:
        return fn

    poly = layout.room.boundary
    n = len(poly)
    seg_data = []  # (x1, y1, dx, dy, L2) for every obstacle segment
    for a, b in layout.room.edges:
        dx, dy = b[0] - a[0], b[1] - a[1]
        seg_data.append((a[0], a[1], dx, dy, dx * dx + dy * dy))
    if layout.room.interior_walls_block:
        for a, b in layout.room.interior_walls:
            dx, dy = b[0] - a[0], b[1] - a[1]
            seg_data.append((a[0], a[1], dx, dy, dx * dx + dy * dy))
    boxes = [c.footprint for c in layout.counters]
    r2 = radius * radius

    def clear(px: float, py: float) -> bool:
        inside = False
        j = n - 1
        for i in range(n):
            yi = poly[i][1]
            yj = poly[j][1]
            if (yi > py) != (yj > py):
                xi = poly[i][0]
                xj = poly[j][0]
                if px < xi + (py - yi) * (xj - xi) / (yj - yi):
                    inside = not inside
            j = i
        if not inside:
            return False
        for x1, y1, dx, dy, L2 in seg_data:
            if L2 == 0.0:
                cx, cy = x1, y1
            else:
                t = ((px - x1) * dx + (py - y1) * dy) / L2
                t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
                cx, cy = x1 + t * dx, y1 + t * dy
            ex, ey = px - cx, py - cy
            if ex * ex + ey * ey < r2:
                return False
        for xmin, ymin, xmax, ymax in boxes:
            ex = xmin - px
            if px - xmax > ex:
                ex = px - xmax
            if ex < 0.0:
                ex = 0.0
            ey = ymin - py
            if py - ymax > ey:
                ey = py - ymax
            if ey < 0.0:
                ey = 0.0
            if ex * ex + ey * ey < r2:
                return False
        return True

    cache[radius] = clear
    return clear


def point_clear(layout: Layout, p: Point2, radius: float) -> bool:
    """True iff a disc of the given radius at p fits in free space.

    Interior walls count as obstacles only when the room flags them as
    motion-blocking.
    """
    return clearance_checker(layout, radius)(p[0], p[1])


def _blocking_segments(layout: Layout):
    """Per-segment data for every motion-blocking obstacle segment.

    Room boundary and counter box edges always block; interior walls only
    when the room flags them as motion-blocking. Each entry carries the
    endpoints plus an axis-aligned bounding box for fast rejection:
    (ax, ay, bx, by, xmin, ymin, xmax, ymax).
    """
    segs = layout.__dict__.get("_block_segs")
    if segs is None:
        raw: list[Segment] = list(layout.room.edges)
        if layout.room.interior_walls_block:
            raw.extend(layout.room.interior_walls)
        for c in layout.counters:
            raw.extend(_box_edges(c.footprint))
        segs = [(a[0], a[1], b[0], b[1],
                 min(a[0], b[0]), min(a[1], b[1]),
                 max(a[0], b[0]), max(a[1], b[1]))
                for a, b in raw]
        layout.__dict__["_block_segs"] = segs
    return segs


def _pt_seg_dist2(px: float, py: float, ax: float, ay: float,
                  vx: float, vy: float) -> float:
    """Squared distance from a point to the segment a + t*v, t in [0, 1]."""
    L2 = vx * vx + vy * vy
    if L2 > 0.0:
        t = ((px - ax) * vx + (py - ay) * vy) / L2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        ax += t * vx
        ay += t * vy
    ex, ey = px - ax, py - ay
    return ex * ex + ey * ey


def _seg_seg_dist2(px: float, py: float, qx: float, qy: float,
                   ax: float, ay: float, bx: float, by: float) -> float:
    """Exact squared distance between segments p-q and a-b (0 if they cross)."""
    ux, uy = qx - px, qy - py
    vx, vy = bx - ax, by - ay
    d1 = ux * (ay - py) - uy * (ax - px)
    d2 = ux * (by - py) - uy * (bx - px)
    d3 = vx * (py - ay) - vy * (px - ax)
    d4 = vx * (qy - ay) - vy * (qx - ax)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return 0.0
    best = _pt_seg_dist2(px, py, ax, ay, vx, vy)
    d = _pt_seg_dist2(qx, qy, ax, ay, vx, vy)
    if d < best:
        best = d
    d = _pt_seg_dist2(ax, ay, px, py, ux, uy)
    if d < best:
        best = d
    d = _pt_seg_dist2(bx, by, px, py, ux, uy)
    if d < best:
        best = d
    return best


def hop_checker(layout: Layout, radius: float):
    """Build (and cache) an exact swept-disc clearance predicate for segments.

    The returned callable takes (x1, y1, x2, y2) with both endpoints already
    known clear (per :func:`point_clear`) and answers whether the straight
    motion between them keeps the disc collision-free everywhere, not just at
    samples. With clear endpoints the swept disc is free iff the segment
    stays at least one radius from every blocking obstacle segment.
    """
    if radius <= 0:
        raise ValueError("radius must be > 0")
    cache = layout.__dict__.setdefault("_hop_cache", {})
    fn = cache.get(radius)
    if fn is not None:
        return fn
    segs = _blocking_segments(layout)
    r2 = radius * radius

    def hop(x1: float, y1: float, x2: float, y2: float) -> bool:
        lox, hix = (x1, x2) if x1 <= x2 else (x2, x1)
        loy, hiy = (y1, y2) if y1 <= y2 else (y2, y1)
        lox -= radius
        hix += radius
        loy -= radius
        hiy += radius
        for ax, ay, bx, by, sx0, sy0, sx1, sy1 in segs:
            if sx0 > hix or sx1 < lox or sy0 > hiy or sy1 < loy:
                continue
            if _seg_seg_dist2(x1, y1, x2, y2, ax, ay, bx, by) < r2:
                return False
        return True

    cache[radius] = hop
    return hop


def segment_clear(layout: Layout, a: Point2, b: Point2, radius: float) -> bool:
    """Exact clearance of the swept disc along [a, b].

    Unlike a sampled check this can never report clear when a finer sampling
    would disagree: a grazing pass closer than the radius is always caught.
    """
    if not point_clear(layout, a, radius):
        return False
    if a[0] == b[0] and a[1] == b[1]:
        return True
    if not point_clear(layout, b, radius):
        return False
    return hop_checker(layout, radius)(a[0], a[1], b[0], b[1])


def nearest_wall(layout: Layout, p: Point2) -> tuple[Point2, Quarter]:
    """Closest point on any wall and the interior-facing quarter-turn there.

    Ties break toward the lowest wall index in construction order.
    """
    if not layout.room.contains(p):
        raise InvalidQueryError(f"point {p} outside room boundary")
    best_i, best_pt, best_d = 0, None, math.inf
    for i, wall in enumerate(layout.walls):
        c = _closest_point_on_segment(p, wall)
        d = math.hypot(p[0] - c[0], p[1] - c[1])
        if d < best_d - 1e-12:
            best_i, best_pt, best_d = i, c, d
    return best_pt, _wall_interior_orientation(layout, best_i, p)


def nearest_wall_distance(layout: Layout, p: Point2) -> float:
    return min(_point_segment_distance(p, w) for w in layout.walls)


def service_configuration(layout: Layout, counter: Counter, radius: float,
                          standoff: float = 0.2) -> tuple[Point2, Quarter]:
    """Pose in front of the counter's service face, facing the counter."""
    fx, fy = counter.facing
    off = counter.depth / 2.0 + radius + standoff
    p = Point2(counter.position.x + fx * off, counter.position.y + fy * off)
    if not point_clear(layout, p, radius):
        raise CounterUnreachableError(
            f"counter {counter.id}: service configuration at {p} is not clear")
    facing_back = {Quarter.DEG_0: Quarter.DEG_180, Quarter.DEG_90: Quarter.DEG_270,
                   Quarter.DEG_180: Quarter.DEG_0, Quarter.DEG_270: Quarter.DEG_90}
    return p, facing_back[counter.orientation]


def _clipped_segment_distance(p: Point2, seg: Segment, nx: float, ny: float) -> float:
    """Distance from p to the part of seg strictly in half-plane n.(q-p) > 0."""
    (x1, y1), (x2, y2) = seg
    s1 = nx * (x1 - p[0]) + ny * (y1 - p[1])
    s2 = nx * (x2 - p[0]) + ny * (y2 - p[1])
    eps = 1e-12
    if s1 <= eps and s2 <= eps:
        return math.inf
    a, b = Point2(x1, y1), Point2(x2, y2)
    if s1 < eps or s2 < eps:
        # clip at the dividing line
        t = s1 / (s1 - s2)
        cx = x1 + t * (x2 - x1)
        cy = y1 + t * (y2 - y1)
        if s1 < eps:
            a = Point2(cx, cy)
        else:
            b = Point2(cx, cy)
    return _point_segment_distance(p, (a, b))


def _segment_arrays(layout: Layout):
    """Endpoint arrays (x1, y1, x2, y2) for every narrowness obstacle segment."""
    arrs = layout.__dict__.get("_seg_arrays")
    if arrs is None:
        segs: list[Segment] = list(layout.room.edges)
        segs.extend(layout.room.interior_walls)
        for c in layout.counters:
            segs.extend(_box_edges(c.footprint))
        arrs = (np.array([s[0][0] for s in segs]),
                np.array([s[0][1] for s in segs]),
                np.array([s[1][0] for s in segs]),
                np.array([s[1][1] for s in segs]))
        layout.__dict__["_seg_arrays"] = arrs
    return arrs


def _half_plane_min_distance(px: float, py: float, arrs, nx: float, ny: float,
                             cap: float) -> float:
    """Min distance from p to segment parts in the half-plane n.(q-p) > 0."""
    X1, Y1, X2, Y2 = arrs
    eps = 1e-12
    s1 = nx * (X1 - px) + ny * (Y1 - py)
    s2 = nx * (X2 - px) + ny * (Y2 - py)
    keep = ~((s1 <= eps) & (s2 <= eps))
    if not keep.any():
        return cap
    x1, y1 = X1[keep], Y1[keep]
    x2, y2 = X2[keep], Y2[keep]
    s1, s2 = s1[keep], s2[keep]
    straddle = (s1 < eps) | (s2 < eps)
    if straddle.any():
        with np.errstate(divide="ignore", invalid="ignore"):
            t = s1 / (s1 - s2)
            cx = x1 + t * (x2 - x1)
            cy = y1 + t * (y2 - y1)
        a_out = s1 < eps
        b_out = s2 < eps
        x1 = np.where(a_out, cx, x1)
        y1 = np.where(a_out, cy, y1)
        x2 = np.where(b_out, cx, x2)
        y2 = np.where(b_out, cy, y2)
    dx, dy = x2 - x1, y2 - y1
    L2 = dx * dx + dy * dy
    with np.errstate(divide="ignore", invalid="ignore"):
        t = ((px - x1) * dx + (py - y1) * dy) / L2
    t = np.where(L2 == 0.0, 0.0, np.clip(t, 0.0, 1.0))
    d = np.hypot(px - (x1 + t * dx), py - (y1 + t * dy))
    return min(cap, float(d.min()))


def clearance_left_right_batch(layout: Layout, px, py, hx, hy,
                               cap: Optional[float] = None):
    """Vectorized :func:`clearance_left_right` over arrays of query poses.

    Headings must be non-zero; points are assumed to lie inside the room
    (planned path nodes always do). Returns (left, right) arrays.
    """
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    hx = np.asarray(hx, dtype=float)
    hy = np.asarray(hy, dtype=float)
    norm = np.hypot(hx, hy)
    if np.any(norm == 0.0):
        raise ValueError("heading must be non-zero")
    hx, hy = hx / norm, hy / norm
    if cap is None:
        cap = layout.room.diameter
    arrs = _segment_arrays(layout)
    left = _half_plane_min_batch(px, py, arrs, -hy, hx, cap)
    right = _half_plane_min_batch(px, py, arrs, hy, -hx, cap)
    return left, right


def _half_plane_min_batch(px, py, arrs, nx, ny, cap: float):
    """(K,) min distances from each point to segment parts with n.(q-p) > 0."""
    X1, Y1, X2, Y2 = arrs
    if X1.size == 0:
        return np.full(px.shape, cap)
    eps = 1e-12
    pxc, pyc = px[:, None], py[:, None]
    nxc, nyc = nx[:, None], ny[:, None]
    s1 = nxc * (X1 - pxc) + nyc * (Y1 - pyc)
    s2 = nxc * (X2 - pxc) + nyc * (Y2 - pyc)
    keep = ~((s1 <= eps) & (s2 <= eps))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = s1 / (s1 - s2)
        cx = X1 + t * (X2 - X1)
        cy = Y1 + t * (Y2 - Y1)
    a_out = keep & (s1 < eps)
    b_out = keep & (s2 < eps)
    x1 = np.where(a_out, cx, X1)
    y1 = np.where(a_out, cy, Y1)
    x2 = np.where(b_out, cx, X2)
    y2 = np.where(b_out, cy, Y2)
    dx, dy = x2 - x1, y2 - y1
    L2 = dx * dx + dy * dy
    with np.errstate(divide="ignore", invalid="ignore"):
        t = ((pxc - x1) * dx + (pyc - y1) * dy) / L2
    t = np.where(L2 == 0.0, 0.0, np.clip(t, 0.0, 1.0))
    d = np.hypot(pxc - (x1 + t * dx), pyc - (y1 + t * dy))
    d = np.where(keep, d, np.inf)
    return np.minimum(cap, d.min(axis=1))


def clearance_left_right(layout: Layout, p: Point2, heading: Point2,
                         cap: Optional[float] = None) -> tuple[float, float]:
    """Distances to the nearest obstacle strictly left / right of the heading.

    Obstacles are counter footprint edges, interior walls and the room
    boundary; a half-plane with no obstacle reports the cap (room diameter
    by default).
    """
    if not layout.room.contains(p):
        raise InvalidQueryError(f"point {p} outside room boundary")
    hx, hy = heading
    norm = math.hypot(hx, hy)
    if norm == 0.0:
        raise ValueError("heading must be non-zero")
    hx, hy = hx / norm, hy / norm
    lx, ly = -hy, hx  # left normal
    if cap is None:
        cap = layout.room.diameter
    arrs = _segment_arrays(layout)
    left = _half_plane_min_distance(p[0], p[1], arrs, lx, ly, cap)
    right = _half_plane_min_distance(p[0], p[1], arrs, -lx, -ly, cap)
    return left, right
