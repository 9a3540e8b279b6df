"""Scenario files: the JSON description of a simulated environment.

A scenario bundles the initial objects, the 2D/3D workspaces, channel and
outcome-model configuration and the pouring/mouth parameters.  The referenced
domain file provides the type hierarchy, action schemas and goal templates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .motion.geometry import Pose2D, Workspace, workspace_from_config
from .planner.model import Domain
from .planner.parser import parse_domain
from .worldmodel import Placement, WorldModel, WorldObject


@dataclass(frozen=True)
class ChannelConfig:
    error_rate: float = 0.0
    step_interval_s: float = 9.0
    jitter_s: float = 0.0


@dataclass(frozen=True)
class PourConfig:
    flow_rate: float = 0.015          # level rise, m/s
    sensor_noise_std: float = 0.004   # m
    view_angle: float = 0.35          # rad from surface normal
    timestep: float = 0.05            # s
    stop_latency: float = 0.2         # s between stop signal and motion halt
    fill_target: float = 0.06         # m
    interior_height: float = 0.10     # m


@dataclass(frozen=True)
class MouthConfig:
    position: tuple[float, float, float] = (5.0, 0.9, 1.1)
    noise_std: float = 0.005
    tolerance: float = 0.05


@dataclass
class Scenario:
    name: str
    domain: Domain
    objects: list[WorldObject]
    workspace: Workspace
    workspace3d: dict
    channel: ChannelConfig
    outcome_model: dict[str, dict]
    liquids: dict[str, float] = field(default_factory=dict)
    pour: PourConfig = field(default_factory=PourConfig)
    mouth: MouthConfig = field(default_factory=MouthConfig)

    def build_world(self) -> WorldModel:
        world = WorldModel(self.domain.types)
        for obj in self.objects:
            world.upsert_object(obj)
        return world

    def location_pose(self, location_id: str) -> Pose2D | None:
        for obj in self.objects:
            if obj.id == location_id and obj.placement is not None:
                return obj.placement.pose
        return None


def _build_objects(cfg: dict) -> list[WorldObject]:
    statics = cfg.get("statics", {})
    homes = statics.get("homes", {})
    worksurfaces = set(statics.get("worksurfaces", []))

    poses: dict[str, Pose2D] = {}
    for entry in cfg["objects"]:
        if "pose" in entry:
            p = entry["pose"]
            poses[entry["id"]] = Pose2D(p["x"], p["y"], p.get("theta", 0.0))

    objects = []
    for entry in cfg["objects"]:
        attrs = dict(entry.get("attributes", {}))
        oid = entry["id"]
        if oid in homes:
            attrs["home"] = homes[oid]
        if oid in worksurfaces:
            attrs["worksurface"] = "yes"
        placement = None
        if "location" in entry:
            placement = Placement(location=entry["location"], pose=poses.get(entry["location"]))
        elif "pose" in entry:
            placement = Placement(location=oid, pose=poses[oid])
        objects.append(
            WorldObject.make(
                id=oid, type_name=entry["type"], attributes=attrs, placement=placement
            )
        )
    return objects


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    cfg = json.loads(path.read_text())

    domain_ref = cfg.get("domain", "domain.pddl")
    domain_path = path.parent / domain_ref
    if domain_path.exists():
        domain = parse_domain(domain_path.read_text())
    else:
        domain = parse_domain(_asset_text(domain_ref))

    pour_cfg = PourConfig(**cfg.get("pour", {}))
    mouth_raw = cfg.get("mouth", {})
    mouth_cfg = MouthConfig(
        position=tuple(mouth_raw.get("position", MouthConfig.position)),
        noise_std=mouth_raw.get("noise_std", MouthConfig.noise_std),
        tolerance=mouth_raw.get("tolerance", MouthConfig.tolerance),
    )

    return Scenario(
        name=cfg.get("name", path.stem),
        domain=domain,
        objects=_build_objects(cfg),
        workspace=workspace_from_config(cfg["workspace"]),
        workspace3d=cfg.get("workspace3d", {"bounds": [-0.2, -0.8, 0.0, 1.0, 0.8, 1.4], "obstacles": []}),
        channel=ChannelConfig(**cfg.get("channel", {})),
        outcome_model=cfg.get("outcome_model", {}),
        liquids=cfg.get("liquids", {}),
        pour=pour_cfg,
        mouth=mouth_cfg,
    )


def _asset_text(name: str) -> str:
    return resources.files("bcibot.assets").joinpath(name).read_text()


def default_scenario_path() -> Path:
    return Path(str(resources.files("bcibot.assets").joinpath("scenario.json")))


def load_default_scenario() -> Scenario:
    return load_scenario(default_scenario_path())
