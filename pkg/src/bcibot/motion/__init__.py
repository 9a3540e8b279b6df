"""Sampling-based motion generation: base paths, effector roadmaps, pose sampling."""

from .geometry import (
    ANGULAR_WEIGHT,
    ConvexPolygon,
    Disc,
    Pose2D,
    Workspace,
    angle_diff,
    normalize_angle,
    path_cost,
    se2_distance,
    workspace_from_config,
)
from .prm import (
    EffectorPose,
    NoRoadmapPath,
    NotConnectable,
    PrmPath,
    Roadmap,
    Sphere,
    Workspace3D,
    build_roadmap,
    pose_distance,
    prm_query,
)
from .rrt import (
    GoalInCollision,
    MotionError,
    NoSolutionFound,
    PathResult,
    StartInCollision,
    bi2rrt_star,
)
from .sampling import (
    DropSamples,
    NoHorizontalPlane,
    NoValidSamples,
    PlaneFit,
    sample_drop_poses,
    sample_grasp_poses,
)

__all__ = [
    "ANGULAR_WEIGHT",
    "ConvexPolygon",
    "Disc",
    "DropSamples",
    "EffectorPose",
    "GoalInCollision",
    "MotionError",
    "NoHorizontalPlane",
    "NoRoadmapPath",
    "NoSolutionFound",
    "NoValidSamples",
    "NotConnectable",
    "PathResult",
    "PlaneFit",
    "Pose2D",
    "PrmPath",
    "Roadmap",
    "Sphere",
    "StartInCollision",
    "Workspace",
    "Workspace3D",
    "angle_diff",
    "bi2rrt_star",
    "build_roadmap",
    "normalize_angle",
    "path_cost",
    "pose_distance",
    "prm_query",
    "sample_drop_poses",
    "sample_grasp_poses",
    "se2_distance",
    "workspace_from_config",
]
