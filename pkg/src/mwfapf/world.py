"""Static 2D environment: polygonal obstacles, bounds, ray casting and segment predicates."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

EPS_GEOM = 1e-9


class GeometryError(ValueError):
    """Degenerate geometric input (zero-length segment, non-finite point, bad direction)."""


class ConfigError(ValueError):
    """A world or scenario invariant is violated.

    ``invariant`` names the broken rule so command-line tools can report it.
    """

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class Point2(NamedTuple):
    x: float
    y: float


def as_point(p: Sequence[float]) -> Point2:
    x, y = float(p[0]), float(p[1])
    if not (math.isfinite(x) and math.isfinite(y)):
        raise GeometryError(f"non-finite point ({x}, {y})")
    return Point2(x, y)


@dataclass(frozen=True)
class Segment2:
    a: Point2
    b: Point2

    def __post_init__(self):
        object.__setattr__(self, "a", as_point(self.a))
        object.__setattr__(self, "b", as_point(self.b))
        if self.a == self.b:
            raise GeometryError(f"degenerate segment at {self.a}")


@dataclass(frozen=True)
class Bounds:
    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ConfigError("bounds_nonempty", f"empty bounds {self}")

    def corners(self) -> list[Point2]:
        return [
            Point2(self.xmin, self.ymin),
            Point2(self.xmax, self.ymin),
            Point2(self.xmax, self.ymax),
            Point2(self.xmin, self.ymax),
        ]

    def contains(self, p: Point2) -> bool:
        return self.xmin <= p.x <= self.xmax and self.ymin <= p.y <= self.ymax

    @property
    def perimeter(self) -> float:
        return 2.0 * ((self.xmax - self.xmin) + (self.ymax - self.ymin))


def _orient(ax, ay, bx, by, cx, cy) -> int:
    v = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    if v > EPS_GEOM:
        return 1
    if v < -EPS_GEOM:
        return -1
    return 0


def _on_segment(ax, ay, bx, by, px, py) -> bool:
    # assumes collinearity of p with a-b
    return (
        min(ax, bx) - EPS_GEOM <= px <= max(ax, bx) + EPS_GEOM
        and min(ay, by) - EPS_GEOM <= py <= max(ay, by) + EPS_GEOM
    )


def segments_intersect(s1: Segment2, s2: Segment2) -> bool:
    """True iff the closed segments share a point; touching and collinear overlap count."""
    (ax, ay), (bx, by) = s1.a, s1.b
    (cx, cy), (dx, dy) = s2.a, s2.b
    o1 = _orient(ax, ay, bx, by, cx, cy)
    o2 = _orient(ax, ay, bx, by, dx, dy)
    o3 = _orient(cx, cy, dx, dy, ax, ay)
    o4 = _orient(cx, cy, dx, dy, bx, by)
    if o1 != o2 and o3 != o4:
        return True
    if o1 == 0 and _on_segment(ax, ay, bx, by, cx, cy):
        return True
    if o2 == 0 and _on_segment(ax, ay, bx, by, dx, dy):
        return True
    if o3 == 0 and _on_segment(cx, cy, dx, dy, ax, ay):
        return True
    if o4 == 0 and _on_segment(cx, cy, dx, dy, bx, by):
        return True
    return False


def segments_intersect_many(a: np.ndarray, b: np.ndarray, p: Point2, q: Point2) -> np.ndarray:
    """Vectorised ``segments_intersect`` of one segment p-q against segments a[k]-b[k].

    Same tolerance and closed-segment semantics as the scalar predicate.
    """
    if len(a) == 0:
        return np.zeros(0, dtype=bool)
    ax, ay = a[:, 0], a[:, 1]
    bx, by = b[:, 0], b[:, 1]
    px, py = p
    qx, qy = q

    def orient(x1, y1, x2, y2, x3, y3):
        v = (x2 - x1) * (y3 - y1) - (y2 - y1) * (x3 - x1)
        return np.where(v > EPS_GEOM, 1, np.where(v < -EPS_GEOM, -1, 0))

    def on_seg(x1, y1, x2, y2, x3, y3):
        return (
            (np.minimum(x1, x2) - EPS_GEOM <= x3)
            & (x3 <= np.maximum(x1, x2) + EPS_GEOM)
            & (np.minimum(y1, y2) - EPS_GEOM <= y3)
            & (y3 <= np.maximum(y1, y2) + EPS_GEOM)
        )

    o1 = orient(ax, ay, bx, by, px, py)
    o2 = orient(ax, ay, bx, by, qx, qy)
    o3 = orient(px, py, qx, qy, ax, ay)
    o4 = orient(px, py, qx, qy, bx, by)
    proper = (o1 != o2) & (o3 != o4)
    touch = (
        ((o1 == 0) & on_seg(ax, ay, bx, by, px, py))
        | ((o2 == 0) & on_seg(ax, ay, bx, by, qx, qy))
        | ((o3 == 0) & on_seg(px, py, qx, qy, ax, ay))
        | ((o4 == 0) & on_seg(px, py, qx, qy, bx, by))
    )
    return proper | touch


def point_segment_distance(p: Point2, s: Segment2) -> float:
    ax, ay = s.a
    bx, by = s.b
    ex, ey = bx - ax, by - ay
    t = ((p[0] - ax) * ex + (p[1] - ay) * ey) / (ex * ex + ey * ey)
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - (ax + t * ex), p[1] - (ay + t * ey))


def _polygon_is_simple(poly: Sequence[Point2]) -> bool:
    n = len(poly)
    edges = [Segment2(poly[i], poly[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if segments_intersect(edges[i], edges[j]):
                return False
    return True


def _point_in_polygon(p: Point2, poly: Sequence[Point2]) -> bool:
    """Inside or on the boundary (boundary within EPS_GEOM)."""
    n = len(poly)
    inside = False
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if point_segment_distance(p, Segment2(a, b)) <= EPS_GEOM:
            return True
        if (a.y > p.y) != (b.y > p.y):
            x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y)
            if p.x < x_cross:
                inside = not inside
    return inside


@dataclass(frozen=True)
class World:
    """Immutable arena. Bounds edges act as walls for ray casting and clearance."""

    obstacles: tuple[tuple[Point2, ...], ...]
    goal: Point2
    start: Point2
    bounds: Bounds
    _edges_a: np.ndarray = field(init=False, repr=False, compare=False)
    _edges_b: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        polys = []
        for k, poly in enumerate(self.obstacles):
            pts = tuple(as_point(v) for v in poly)
            if len(pts) < 3:
                raise ConfigError("polygon_min_vertices", f"obstacle {k} has {len(pts)} vertices (need >= 3)")
            try:
                simple = _polygon_is_simple(pts)
            except GeometryError:
                simple = False
            if not simple:
                raise ConfigError("polygon_simple", f"obstacle {k} is self-intersecting or has repeated vertices")
            polys.append(pts)
        object.__setattr__(self, "obstacles", tuple(polys))
        object.__setattr__(self, "goal", as_point(self.goal))
        object.__setattr__(self, "start", as_point(self.start))

        for name, p in (("start", self.start), ("goal", self.goal)):
            if not self.bounds.contains(p):
                raise ConfigError("within_bounds", f"{name} {tuple(p)} lies outside bounds")
            for k, poly in enumerate(polys):
                if _point_in_polygon(p, poly):
                    raise ConfigError(f"{name}_outside_obstacles", f"{name} {tuple(p)} lies inside obstacle {k}")
        for k, poly in enumerate(polys):
            if not all(self.bounds.contains(v) for v in poly):
                raise ConfigError("within_bounds", f"obstacle {k} extends outside bounds")

        a, b = [], []
        for loop in [*polys, tuple(self.bounds.corners())]:
            for i in range(len(loop)):
                a.append(loop[i])
                b.append(loop[(i + 1) % len(loop)])
        object.__setattr__(self, "_edges_a", np.array(a, dtype=float))
        object.__setattr__(self, "_edges_b", np.array(b, dtype=float))

    @property
    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Start and end points of every obstacle and bounds edge, shape (E, 2) each."""
        return self._edges_a, self._edges_b

    def nearest_edge_distance(self, p: Sequence[float]) -> float:
        a, b = self._edges_a, self._edges_b
        e = b - a
        w = np.asarray(p, dtype=float) - a
        t = np.clip(np.einsum("ij,ij->i", w, e) / np.einsum("ij,ij->i", e, e), 0.0, 1.0)
        d = w - t[:, None] * e
        return float(np.sqrt(np.min(np.einsum("ij,ij->i", d, d))))


def point_in_obstacle(world: World, p: Sequence[float]) -> bool:
    """True iff ``p`` is inside or on the boundary of any obstacle polygon."""
    q = as_point(p)
    return any(_point_in_polygon(q, poly) for poly in world.obstacles)


def _check_direction(direction: Sequence[float]) -> tuple[float, float]:
    dx, dy = float(direction[0]), float(direction[1])
    n = math.hypot(dx, dy)
    if not math.isfinite(n) or abs(n - 1.0) > 1e-6:
        raise GeometryError(f"ray direction must be a unit vector, got ({dx}, {dy})")
    return dx, dy


def ray_cast_many(world: World, origin: Sequence[float], directions: np.ndarray, max_range: float) -> np.ndarray:
    """Distances along each row of ``directions`` (unit vectors) to the first edge hit, capped at max_range."""
    a, b = world.edges
    o = np.asarray(origin, dtype=float)
    u = np.asarray(directions, dtype=float)
    e = b - a  # (E, 2)
    w = a - o  # (E, 2)
    denom = u[:, 0:1] * e[None, :, 1] - u[:, 1:2] * e[None, :, 0]  # (R, E)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (w[None, :, 0] * e[None, :, 1] - w[None, :, 1] * e[None, :, 0]) / denom
        r = (w[None, :, 0] * u[:, 1:2] - w[None, :, 1] * u[:, 0:1]) / denom
    hit = (np.abs(denom) > EPS_GEOM) & (s >= 0.0) & (r >= -EPS_GEOM) & (r <= 1.0 + EPS_GEOM)
    s = np.where(hit, s, np.inf)
    return np.minimum(s.min(axis=1), max_range)


def ray_cast(world: World, origin: Sequence[float], direction: Sequence[float], max_range: float) -> float:
    """Distance from ``origin`` along ``direction`` to the nearest obstacle or bounds edge.

    Saturates at ``max_range`` when nothing is hit closer.
    """
    if not max_range > 0:
        raise GeometryError("max_range must be positive")
    d = _check_direction(direction)
    return float(ray_cast_many(world, origin, np.array([d]), max_range)[0])
