"""2D workspace geometry: poses, obstacles, exact collision tests.

Collision checks are analytic (segment vs. disc / convex polygon), so any
denser re-check of a returned path agrees with the planner's own verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


def normalize_angle(theta: float) -> float:
    """Wrap into (-pi, pi]."""
    wrapped = math.fmod(theta + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def angle_diff(a: float, b: float) -> float:
    return abs(normalize_angle(a - b))


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    @property
    def xy(self) -> tuple[float, float]:
        return (self.x, self.y)


ANGULAR_WEIGHT = 0.3  # meters of cost per radian of base rotation


def se2_distance(a: Pose2D, b: Pose2D, angular_weight: float = ANGULAR_WEIGHT) -> float:
    return math.hypot(a.x - b.x, a.y - b.y) + angular_weight * angle_diff(a.theta, b.theta)


def path_cost(waypoints: list[Pose2D], angular_weight: float = ANGULAR_WEIGHT) -> float:
    return sum(
        se2_distance(waypoints[i], waypoints[i + 1], angular_weight)
        for i in range(len(waypoints) - 1)
    )


def _seg_point_dist(px, py, qx, qy, cx, cy) -> float:
    vx, vy = qx - px, qy - py
    wx, wy = cx - px, cy - py
    vv = vx * vx + vy * vy
    if vv <= 0.0:
        return math.hypot(wx, wy)
    t = max(0.0, min(1.0, (wx * vx + wy * vy) / vv))
    return math.hypot(px + t * vx - cx, py + t * vy - cy)


def _orient(ax, ay, bx, by, cx, cy) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _segments_intersect(p1, p2, p3, p4) -> bool:
    d1 = _orient(*p3, *p4, *p1)
    d2 = _orient(*p3, *p4, *p2)
    d3 = _orient(*p1, *p2, *p3)
    d4 = _orient(*p1, *p2, *p4)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)):
        return True

    def on_seg(ax, ay, bx, by, cx, cy):
        return min(ax, bx) <= cx <= max(ax, bx) and min(ay, by) <= cy <= max(ay, by)

    if d1 == 0 and on_seg(*p3, *p4, *p1):
        return True
    if d2 == 0 and on_seg(*p3, *p4, *p2):
        return True
    if d3 == 0 and on_seg(*p1, *p2, *p3):
        return True
    if d4 == 0 and on_seg(*p1, *p2, *p4):
        return True
    return False


@dataclass(frozen=True)
class Disc:
    center: tuple[float, float]
    radius: float

    def contains(self, x: float, y: float) -> bool:
        return math.hypot(x - self.center[0], y - self.center[1]) <= self.radius

    def segment_hits(self, p: tuple[float, float], q: tuple[float, float]) -> bool:
        return _seg_point_dist(p[0], p[1], q[0], q[1], *self.center) <= self.radius

    def bbox(self) -> tuple[float, float, float, float]:
        cx, cy = self.center
        return (cx - self.radius, cy - self.radius, cx + self.radius, cy + self.radius)


@dataclass(frozen=True)
class ConvexPolygon:
    points: tuple[tuple[float, float], ...]

    def contains(self, x: float, y: float) -> bool:
        sign = 0.0
        n = len(self.points)
        for i in range(n):
            ax, ay = self.points[i]
            bx, by = self.points[(i + 1) % n]
            cross = _orient(ax, ay, bx, by, x, y)
            if cross != 0.0:
                if sign == 0.0:
                    sign = cross
                elif (cross > 0) != (sign > 0):
                    return False
        return True

    def segment_hits(self, p: tuple[float, float], q: tuple[float, float]) -> bool:
        if self.contains(*p) or self.contains(*q):
            return True
        n = len(self.points)
        for i in range(n):
            a = self.points[i]
            b = self.points[(i + 1) % n]
            if _segments_intersect(p, q, a, b):
                return True
        return False

    def bbox(self) -> tuple[float, float, float, float]:
        xs = [p[0] for p in self.points]
        ys = [p[1] for p in self.points]
        return (min(xs), min(ys), max(xs), max(ys))


Obstacle = Disc | ConvexPolygon


@dataclass(frozen=True)
class Workspace:
    bounds: tuple[float, float, float, float]  # x0, y0, x1, y1
    obstacles: tuple[Obstacle, ...] = ()

    def __post_init__(self):
        x0, y0, x1, y1 = self.bounds
        for obs in self.obstacles:
            bx0, by0, bx1, by1 = obs.bbox()
            if bx0 < x0 or by0 < y0 or bx1 > x1 or by1 > y1:
                raise ValueError("obstacle extends outside workspace bounds")

    def in_bounds(self, x: float, y: float) -> bool:
        x0, y0, x1, y1 = self.bounds
        return x0 <= x <= x1 and y0 <= y <= y1

    def point_free(self, x: float, y: float) -> bool:
        if not self.in_bounds(x, y):
            return False
        return not any(o.contains(x, y) for o in self.obstacles)

    def pose_free(self, pose: Pose2D) -> bool:
        return self.point_free(pose.x, pose.y)

    def segment_free(self, a: Pose2D, b: Pose2D) -> bool:
        if not (self.in_bounds(a.x, a.y) and self.in_bounds(b.x, b.y)):
            return False
        p, q = (a.x, a.y), (b.x, b.y)
        return not any(o.segment_hits(p, q) for o in self.obstacles)

    def sample_free_pose(self, rng) -> Pose2D:
        x0, y0, x1, y1 = self.bounds
        for _ in range(10_000):
            x = rng.uniform(x0, x1)
            y = rng.uniform(y0, y1)
            if self.point_free(x, y):
                return Pose2D(x, y, rng.uniform(-math.pi, math.pi))
        raise RuntimeError("could not sample a collision-free pose")


def workspace_from_config(cfg: dict) -> Workspace:
    obstacles: list[Obstacle] = []
    for obs in cfg.get("obstacles", []):
        if obs["kind"] == "disc":
            obstacles.append(Disc(center=tuple(obs["center"]), radius=float(obs["radius"])))
        elif obs["kind"] == "polygon":
            obstacles.append(ConvexPolygon(points=tuple(tuple(p) for p in obs["points"])))
        else:
            raise ValueError(f"unknown obstacle kind '{obs['kind']}'")
    return Workspace(bounds=tuple(cfg["bounds"]), obstacles=tuple(obstacles))
