"""Grasp and drop pose sampling.

Grasp candidates live on a standoff shell around the object, oriented toward
it.  Drop candidates come from horizontal planes extracted from a point cloud
by consensus search: candidate height slabs are scored by inlier count and
accepted only if the inlier set's principal normal is within tolerance of
vertical (which rejects walls).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .prm import EffectorPose, Workspace3D
from .rrt import MotionError


class NoValidSamples(MotionError):
    pass


class NoHorizontalPlane(MotionError):
    pass


def sample_grasp_poses(
    object_position,
    standoff_radius: float,
    n: int,
    rng: np.random.Generator,
    workspace: Workspace3D | None = None,
    reach_center=None,
    reach_radius: float | None = None,
) -> list[EffectorPose]:
    """Up to ``n`` poses on the standoff shell, pointing at the object.

    Candidates colliding with the workspace or outside the reach sphere are
    dropped; raises ``NoValidSamples`` if none survive.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    center = np.asarray(object_position, dtype=float)
    out: list[EffectorPose] = []
    for _ in range(n):
        d = rng.normal(size=3)
        norm = np.linalg.norm(d)
        if norm < 1e-12:
            continue
        d = d / norm
        pos = center + standoff_radius * d
        if workspace is not None and not workspace.point_free(pos):
            continue
        if reach_center is not None and reach_radius is not None:
            if np.linalg.norm(pos - np.asarray(reach_center)) > reach_radius:
                continue
        out.append(EffectorPose(position=tuple(pos), direction=tuple(-d)))
    if not out:
        raise NoValidSamples(f"no collision-free grasp pose after {n} attempts")
    return out


@dataclass(frozen=True)
class PlaneFit:
    height: float
    inlier_indices: tuple[int, ...]
    poses: tuple[EffectorPose, ...] = ()

    @property
    def inlier_count(self) -> int:
        return len(self.inlier_indices)


@dataclass(frozen=True)
class DropSamples:
    planes: tuple[PlaneFit, ...]

    @property
    def poses(self) -> tuple[EffectorPose, ...]:
        return tuple(p for plane in self.planes for p in plane.poses)


VERTICAL_ANGLE_TOL = math.radians(10.0)
INLIER_DIST_TOL = 0.005  # 5 mm slab half-width


def _principal_normal(points: np.ndarray) -> np.ndarray:
    """Unit normal of the best-fit plane through ``points`` (smallest PCA axis)."""
    centered = points - points.mean(axis=0)
    cov = centered.T @ centered / max(len(points), 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    return eigvecs[:, 0]


def sample_drop_poses(
    points,
    clearance: float,
    rng: np.random.Generator,
    poses_per_plane: int = 5,
    min_inliers: int | None = None,
    angle_tol: float = VERTICAL_ANGLE_TOL,
    dist_tol: float = INLIER_DIST_TOL,
    consensus_tries: int = 40,
) -> DropSamples:
    """Extract horizontal planes and sample downward poses above their inliers."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3 or len(pts) == 0:
        raise ValueError("points must be a non-empty (m, 3) array")
    if min_inliers is None:
        min_inliers = max(10, len(pts) // 20)

    remaining = np.arange(len(pts))
    planes: list[PlaneFit] = []
    while len(remaining) >= min_inliers:
        rpts = pts[remaining]
        best_mask = None
        best_count = 0
        for _ in range(consensus_tries):
            z = rpts[rng.integers(len(rpts)), 2]
            mask = np.abs(rpts[:, 2] - z) <= dist_tol
            count = int(mask.sum())
            if count > best_count:
                best_count = count
                best_mask = mask
        if best_mask is None or best_count < min_inliers:
            break
        inlier_pts = rpts[best_mask]
        normal = _principal_normal(inlier_pts)
        vertical_angle = math.acos(min(1.0, abs(float(normal[2]))))
        if vertical_angle > angle_tol:
            break  # dominant structure is not horizontal (e.g. a wall)
        height = float(inlier_pts[:, 2].mean())
        indices = tuple(int(i) for i in remaining[best_mask])

        k = min(poses_per_plane, len(inlier_pts))
        chosen = rng.choice(len(inlier_pts), size=k, replace=False)
        poses = tuple(
            EffectorPose(
                position=(float(inlier_pts[i, 0]), float(inlier_pts[i, 1]), height + clearance),
                direction=(0.0, 0.0, -1.0),
            )
            for i in chosen
        )
        planes.append(PlaneFit(height=height, inlier_indices=indices, poses=poses))
        remaining = remaining[~best_mask]

    if not planes:
        raise NoHorizontalPlane("no horizontal plane found in point set")
    planes.sort(key=lambda p: p.height)
    return DropSamples(planes=tuple(planes))
