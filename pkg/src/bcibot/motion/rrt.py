"""Bidirectional RRT* with informed sampling for the mobile base.

Two trees grow from start and goal with uniform sampling until they connect;
the remaining budget refines the solution, drawing samples only from the
prolate ellipsoid implied by the current best cost and rewiring both trees.
Costs combine Euclidean distance with a weighted angular term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ANGULAR_WEIGHT, Pose2D, Workspace, angle_diff, normalize_angle


class MotionError(Exception):
    pass


class StartInCollision(MotionError):
    pass


class GoalInCollision(MotionError):
    pass


class NoSolutionFound(MotionError):
    """Budget exhausted without connecting the trees."""


@dataclass(frozen=True)
class PathResult:
    waypoints: tuple[Pose2D, ...]
    cost: float                      # cost when the first solution appeared
    final_cost: float                # after informed refinement
    iterations_to_first: int
    iterations: int
    informed_samples: tuple = ()     # (pose, best_cost_at_draw) when instrumented
    cost_trace: tuple = ()           # (iteration, incumbent cost) snapshots


class _Tree:
    """Growable array-backed tree so nearest/near queries stay vectorized."""

    def __init__(self, pose: Pose2D, capacity: int = 512):
        self._xyth = np.empty((capacity, 3))
        self.cost = np.empty(capacity)
        self.parent = np.empty(capacity, dtype=np.int64)
        self.n = 1
        self._xyth[0] = (pose.x, pose.y, pose.theta)
        self.cost[0] = 0.0
        self.parent[0] = -1
        self.children: dict[int, list[int]] = {}

    @staticmethod
    def rooted(pose: Pose2D) -> "_Tree":
        return _Tree(pose)

    def pose(self, i: int) -> Pose2D:
        x, y, th = self._xyth[i]
        return Pose2D(float(x), float(y), float(th))

    def __len__(self) -> int:
        return self.n

    def distances_to(self, pose: Pose2D, w: float) -> np.ndarray:
        pts = self._xyth[: self.n]
        dx = pts[:, 0] - pose.x
        dy = pts[:, 1] - pose.y
        dth = np.abs(np.mod(pts[:, 2] - pose.theta + math.pi, 2 * math.pi) - math.pi)
        return np.hypot(dx, dy) + w * dth

    def add(self, pose: Pose2D, parent: int, cost: float) -> int:
        if self.n == len(self.cost):
            grow = len(self.cost) * 2
            self._xyth = np.resize(self._xyth, (grow, 3))
            self.cost = np.resize(self.cost, grow)
            self.parent = np.resize(self.parent, grow)
        idx = self.n
        self._xyth[idx] = (pose.x, pose.y, pose.theta)
        self.cost[idx] = cost
        self.parent[idx] = parent
        self.n += 1
        self.children.setdefault(parent, []).append(idx)
        return idx

    def rewire_parent(self, node: int, new_parent: int, new_cost: float) -> None:
        old = int(self.parent[node])
        if old >= 0 and node in self.children.get(old, ()):
            self.children[old].remove(node)
        self.parent[node] = new_parent
        self.children.setdefault(new_parent, []).append(node)
        delta = new_cost - self.cost[node]
        stack = [node]
        while stack:
            cur = stack.pop()
            self.cost[cur] += delta
            stack.extend(self.children.get(cur, ()))

    def path_to_root(self, node: int) -> list[Pose2D]:
        out = []
        while node >= 0:
            out.append(self.pose(node))
            node = int(self.parent[node])
        return out


def _steer(a: Pose2D, b: Pose2D, step: float, w: float) -> Pose2D:
    d = math.hypot(b.x - a.x, b.y - a.y) + w * angle_diff(a.theta, b.theta)
    if d <= step or d == 0.0:
        return b
    t = step / d
    dth = normalize_angle(b.theta - a.theta)
    return Pose2D(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.theta + t * dth)


def _sample_informed(
    start: Pose2D, goal: Pose2D, best_cost: float, ws: Workspace, rng, w: float
) -> Pose2D:
    """Draw from the set {q : d(start,q) + d(q,goal) <= best_cost}.

    The planar part comes from the bounding Euclidean ellipse; the heading is
    then drawn directly from its feasible arc (the segment between the terminal
    headings, widened by the remaining cost slack), so no rejection loop over
    theta is needed.
    """
    cx = (start.x + goal.x) / 2.0
    cy = (start.y + goal.y) / 2.0
    c_min = math.hypot(goal.x - start.x, goal.y - start.y)
    if best_cost < c_min:
        best_cost = c_min
    a = best_cost / 2.0
    b = math.sqrt(max(best_cost * best_cost - c_min * c_min, 0.0)) / 2.0
    ang = math.atan2(goal.y - start.y, goal.x - start.x)
    cos_a, sin_a = math.cos(ang), math.sin(ang)

    base = normalize_angle(goal.theta - start.theta)
    delta = abs(base)
    direction = 1.0 if base >= 0 else -1.0

    for _ in range(32):
        r = math.sqrt(rng.uniform(0.0, 1.0))
        phi = rng.uniform(0.0, 2.0 * math.pi)
        ex = a * r * math.cos(phi)
        ey = b * r * math.sin(phi)
        x = cx + cos_a * ex - sin_a * ey
        y = cy + sin_a * ex + cos_a * ey
        if not ws.in_bounds(x, y):
            continue
        slack = best_cost - (
            math.hypot(x - start.x, y - start.y) + math.hypot(goal.x - x, goal.y - y)
        )
        arc = slack / w if w > 0 else math.inf  # max allowed |th-ths| + |th-thg|
        if arc < delta:
            continue
        if arc >= 2.0 * math.pi:
            theta = rng.uniform(-math.pi, math.pi)
        else:
            ext = (arc - delta) / 2.0
            u = rng.uniform(-ext, delta + ext)
            theta = start.theta + direction * u
        return Pose2D(x, y, theta)

    # midpoint of the straight-line motion is always a member
    mid_th = normalize_angle(start.theta + 0.5 * base)
    return Pose2D(cx, cy, mid_th)


def bi2rrt_star(
    start: Pose2D,
    goal: Pose2D,
    ws: Workspace,
    budget: int = 1500,
    rng: np.random.Generator | None = None,
    step_size: float = 0.5,
    rewire_gamma: float = 4.0,
    max_rewire_radius: float = 1.5,
    angular_weight: float = ANGULAR_WEIGHT,
    record_samples: bool = False,
    trace_every: int = 0,
) -> PathResult:
    """Plan a base path from start to goal; see module docstring."""
    if rng is None:
        rng = np.random.default_rng()
    if not ws.pose_free(start):
        raise StartInCollision(f"start pose {start} is in collision")
    if not ws.pose_free(goal):
        raise GoalInCollision(f"goal pose {goal} is in collision")

    w = angular_weight
    trees = [_Tree.rooted(start), _Tree.rooted(goal)]
    active = 0  # index of the tree extended this iteration
    first_cost = math.inf
    iterations_to_first = 0
    best_join: tuple[int, int, float] | None = None  # node ids + join edge length
    informed_log = []
    cost_trace: list[tuple[int, float]] = []

    x0, y0, x1, y1 = ws.bounds

    def live_best() -> float:
        """Cost of the incumbent path under current (possibly rewired) trees."""
        if best_join is None:
            return math.inf
        n0, n1, edge = best_join
        return trees[0].cost[n0] + edge + trees[1].cost[n1]

    def try_join(tree_idx: int, node: int) -> None:
        """Connect a fresh node to the nearest node of the other tree."""
        nonlocal best_join, first_cost, iterations_to_first
        other = trees[1 - tree_idx]
        pose = trees[tree_idx].pose(node)
        dists = other.distances_to(pose, w)
        j = int(np.argmin(dists))
        if not ws.segment_free(pose, other.pose(j)):
            return
        total = trees[tree_idx].cost[node] + float(dists[j]) + other.cost[j]
        if total < live_best():
            best_join = (
                (node, j, float(dists[j])) if tree_idx == 0 else (j, node, float(dists[j]))
            )
            if math.isinf(first_cost):
                first_cost = total
                iterations_to_first = iteration

    for iteration in range(1, budget + 1):
        incumbent = live_best()
        if trace_every and iteration % trace_every == 0:
            cost_trace.append((iteration, incumbent))
        if math.isinf(incumbent):
            q = Pose2D(rng.uniform(x0, x1), rng.uniform(y0, y1), rng.uniform(-math.pi, math.pi))
        else:
            q = _sample_informed(start, goal, incumbent, ws, rng, w)
            if record_samples:
                informed_log.append((q, incumbent))
        if not ws.point_free(q.x, q.y):
            continue

        tree = trees[active]
        dists = tree.distances_to(q, w)
        nearest = int(np.argmin(dists))
        new_pose = _steer(tree.pose(nearest), q, step_size, w)
        if not ws.point_free(new_pose.x, new_pose.y):
            active = 1 - active
            continue
        if not ws.segment_free(tree.pose(nearest), new_pose):
            active = 1 - active
            continue

        n = len(tree)
        radius = min(max_rewire_radius, rewire_gamma * math.sqrt(math.log(n + 1) / (n + 1)))
        radius = max(radius, step_size)
        near_d = tree.distances_to(new_pose, w)
        near = np.flatnonzero(near_d <= radius)

        # choose the cheapest collision-free parent among the neighborhood
        parent = nearest
        parent_cost = tree.cost[nearest] + float(near_d[nearest])
        order = near[np.argsort(np.asarray(tree.cost)[near] + near_d[near])]
        for cand in order:
            cand = int(cand)
            cand_cost = tree.cost[cand] + float(near_d[cand])
            if cand_cost >= parent_cost:
                break
            if ws.segment_free(tree.pose(cand), new_pose):
                parent = cand
                parent_cost = cand_cost
                break
        new_idx = tree.add(new_pose, parent, parent_cost)

        # rewire neighbors through the new node where that is cheaper
        for cand in near:
            cand = int(cand)
            if cand == parent:
                continue
            through = parent_cost + float(near_d[cand])
            if through < tree.cost[cand] and ws.segment_free(new_pose, tree.pose(cand)):
                tree.rewire_parent(cand, new_idx, through)

        try_join(active, new_idx)
        active = 1 - active

    if best_join is None:
        raise NoSolutionFound(f"no path after {budget} iterations")

    fwd = trees[0].path_to_root(best_join[0])[::-1]
    bwd = trees[1].path_to_root(best_join[1])
    waypoints = tuple(fwd + bwd)
    return PathResult(
        waypoints=waypoints,
        cost=first_cost,
        final_cost=live_best(),
        iterations_to_first=iterations_to_first,
        iterations=budget,
        informed_samples=tuple(informed_log),
        cost_trace=tuple(cost_trace),
    )
