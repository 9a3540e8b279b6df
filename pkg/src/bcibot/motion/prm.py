"""Probabilistic roadmap over end-effector task poses, queried with A*.

Nodes are 3D positions with a unit approach direction; edge weights combine
Euclidean distance and a weighted direction angle, which is a metric, so the
straight-to-goal heuristic stays admissible and A* costs match Dijkstra's
exactly.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .rrt import MotionError

DIRECTION_WEIGHT = 0.1  # meters of cost per radian between approach directions


class NotConnectable(MotionError):
    """Query pose could not be linked to the roadmap by a valid local segment."""


class NoRoadmapPath(MotionError):
    """Start and goal connect to different roadmap components."""


@dataclass(frozen=True)
class EffectorPose:
    position: tuple[float, float, float]
    direction: tuple[float, float, float] = (0.0, 0.0, -1.0)

    def __post_init__(self):
        d = np.asarray(self.direction, dtype=float)
        norm = float(np.linalg.norm(d))
        if norm == 0.0:
            raise ValueError("direction must be non-zero")
        object.__setattr__(self, "direction", tuple(d / norm))
        object.__setattr__(self, "position", tuple(float(v) for v in self.position))


def pose_distance(a: EffectorPose, b: EffectorPose, w: float = DIRECTION_WEIGHT) -> float:
    pa, pb = np.asarray(a.position), np.asarray(b.position)
    cos = float(np.clip(np.dot(a.direction, b.direction), -1.0, 1.0))
    return float(np.linalg.norm(pa - pb)) + w * math.acos(cos)


@dataclass(frozen=True)
class Sphere:
    center: tuple[float, float, float]
    radius: float


@dataclass(frozen=True)
class Workspace3D:
    bounds: tuple[float, float, float, float, float, float]  # x0 y0 z0 x1 y1 z1
    obstacles: tuple[Sphere, ...] = ()

    def in_bounds(self, p) -> bool:
        x0, y0, z0, x1, y1, z1 = self.bounds
        return x0 <= p[0] <= x1 and y0 <= p[1] <= y1 and z0 <= p[2] <= z1

    def point_free(self, p) -> bool:
        if not self.in_bounds(p):
            return False
        q = np.asarray(p, dtype=float)
        for s in self.obstacles:
            if np.linalg.norm(q - np.asarray(s.center)) <= s.radius:
                return False
        return True

    def segment_free(self, p, q) -> bool:
        if not (self.in_bounds(p) and self.in_bounds(q)):
            return False
        a = np.asarray(p, dtype=float)
        b = np.asarray(q, dtype=float)
        ab = b - a
        denom = float(np.dot(ab, ab))
        for s in self.obstacles:
            c = np.asarray(s.center)
            t = 0.0 if denom == 0.0 else float(np.clip(np.dot(c - a, ab) / denom, 0.0, 1.0))
            if np.linalg.norm(a + t * ab - c) <= s.radius:
                return False
        return True

    @staticmethod
    def from_config(cfg: dict) -> "Workspace3D":
        return Workspace3D(
            bounds=tuple(cfg["bounds"]),
            obstacles=tuple(
                Sphere(center=tuple(o["center"]), radius=float(o["radius"]))
                for o in cfg.get("obstacles", [])
            ),
        )


@dataclass
class Roadmap:
    poses: list[EffectorPose]
    adjacency: dict[int, dict[int, float]] = field(default_factory=dict)
    workspace: Workspace3D | None = None

    def __len__(self) -> int:
        return len(self.poses)

    def add_edge(self, i: int, j: int, weight: float) -> None:
        self.adjacency.setdefault(i, {})[j] = weight
        self.adjacency.setdefault(j, {})[i] = weight


def build_roadmap(
    ws: Workspace3D,
    n_nodes: int = 300,
    k_neighbors: int = 8,
    rng: np.random.Generator | None = None,
    direction_weight: float = DIRECTION_WEIGHT,
) -> Roadmap:
    """Sample free poses and k-nearest-connect them with valid local segments."""
    if rng is None:
        rng = np.random.default_rng()
    x0, y0, z0, x1, y1, z1 = ws.bounds
    poses: list[EffectorPose] = []
    attempts = 0
    while len(poses) < n_nodes and attempts < 50 * n_nodes:
        attempts += 1
        p = (rng.uniform(x0, x1), rng.uniform(y0, y1), rng.uniform(z0, z1))
        if not ws.point_free(p):
            continue
        d = rng.normal(size=3)
        while np.linalg.norm(d) < 1e-12:
            d = rng.normal(size=3)
        poses.append(EffectorPose(position=p, direction=tuple(d)))
    if not poses:
        raise MotionError("could not sample any free roadmap pose")

    roadmap = Roadmap(poses=poses, workspace=ws)
    pts = np.asarray([p.position for p in poses])
    dirs = np.asarray([p.direction for p in poses])
    for i in range(len(poses)):
        dp = np.linalg.norm(pts - pts[i], axis=1)
        cos = np.clip(dirs @ dirs[i], -1.0, 1.0)
        dist = dp + direction_weight * np.arccos(cos)
        order = np.argsort(dist)
        linked = 0
        for j in order:
            j = int(j)
            if j == i:
                continue
            if linked >= k_neighbors:
                break
            if j in roadmap.adjacency.get(i, {}):
                linked += 1
                continue
            if ws.segment_free(poses[i].position, poses[j].position):
                roadmap.add_edge(i, j, float(dist[j]))
                linked += 1
    return roadmap


@dataclass(frozen=True)
class PrmPath:
    poses: tuple[EffectorPose, ...]
    cost: float


def _connect(roadmap: Roadmap, pose: EffectorPose, k: int, w: float) -> dict[int, float]:
    ws = roadmap.workspace
    dists = [(pose_distance(pose, p, w), i) for i, p in enumerate(roadmap.poses)]
    dists.sort()
    links = {}
    for d, i in dists[: max(k, 1)]:
        if ws is None or ws.segment_free(pose.position, roadmap.poses[i].position):
            links[i] = d
    if not links:
        raise NotConnectable("pose cannot be linked to the roadmap")
    return links


def prm_query(
    roadmap: Roadmap,
    start: EffectorPose,
    goal: EffectorPose,
    connect_k: int = 10,
    direction_weight: float = DIRECTION_WEIGHT,
) -> PrmPath:
    """A*-optimal pose path from start to goal through the roadmap."""
    if start == goal:
        return PrmPath(poses=(start,), cost=0.0)

    start_links = _connect(roadmap, start, connect_k, direction_weight)
    goal_links = _connect(roadmap, goal, connect_k, direction_weight)

    # virtual node ids: -1 start, -2 goal
    def neighbors(node: int):
        if node == -1:
            return start_links.items()
        items = list(roadmap.adjacency.get(node, {}).items())
        if node in goal_links:
            items.append((-2, goal_links[node]))
        return items

    def h(node: int) -> float:
        if node == -2:
            return 0.0
        pose = start if node == -1 else roadmap.poses[node]
        return pose_distance(pose, goal, direction_weight)

    open_heap: list[tuple[float, float, int]] = [(h(-1), 0.0, -1)]
    g: dict[int, float] = {-1: 0.0}
    parent: dict[int, int] = {}
    closed: set[int] = set()
    while open_heap:
        f, gc, node = heapq.heappop(open_heap)
        if node in closed:
            continue
        closed.add(node)
        if node == -2:
            ids = [node]
            while ids[-1] in parent:
                ids.append(parent[ids[-1]])
            ids.reverse()
            poses = tuple(
                start if i == -1 else goal if i == -2 else roadmap.poses[i] for i in ids
            )
            return PrmPath(poses=poses, cost=gc)
        for nxt, weight in neighbors(node):
            ng = gc + weight
            if ng < g.get(nxt, math.inf):
                g[nxt] = ng
                parent[nxt] = node
                heapq.heappush(open_heap, (ng + h(nxt), ng, nxt))
    raise NoRoadmapPath("start and goal are not connected in the roadmap")
