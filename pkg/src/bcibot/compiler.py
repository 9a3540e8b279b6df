"""Bridge between the knowledge base and the planner.

Compiles a world snapshot into a planning problem and maps executed action
effects back onto world objects.  The robot is implicit in the domain encoding:
its location becomes ``(at ...)`` and its gripper contents ``(holding ...)`` /
``(handempty)``.
"""

from __future__ import annotations

from .planner.model import Atom, Domain, ExistentialGoal, GroundAction, Problem
from .worldmodel import WorldModel, WorldObject, WorldState

GRIPPER = "gripper"


def robot_of(state: WorldState, domain: Domain) -> WorldObject:
    for obj in state.objects:
        if domain.types.is_subtype(obj.type_name, "robot"):
            return obj
    raise ValueError("world contains no robot object")


def compile_problem(domain: Domain, state: WorldState, goal: ExistentialGoal) -> Problem:
    types = domain.types
    objects: dict[str, str] = {}
    init: set[Atom] = set()

    robot = robot_of(state, domain)
    if robot.placement is not None:
        init.add(("at", robot.placement.location))
    gripper = robot.attr(GRIPPER, "empty")
    if gripper == "empty":
        init.add(("handempty",))
    else:
        init.add(("holding", str(gripper)))

    for obj in state.objects:
        if obj.id == robot.id:
            continue
        objects[obj.id] = obj.type_name
        if types.is_subtype(obj.type_name, "item"):
            if obj.placement is not None and obj.placement.location != GRIPPER:
                init.add(("on", obj.id, obj.placement.location))
            home = obj.attr("home")
            if home is not None:
                init.add(("home", obj.id, str(home)))
        if types.is_subtype(obj.type_name, "vessel"):
            content = obj.attr("content")
            if content == "empty":
                init.add(("empty", obj.id))
            elif content is not None:
                init.add(("content", obj.id, str(content)))
            if obj.attr("clean") == "yes":
                init.add(("clean", obj.id))
            poured = obj.attr("poured")
            if poured is not None:
                init.add(("poured", obj.id, str(poured)))
        if types.is_subtype(obj.type_name, "person"):
            if obj.placement is not None:
                init.add(("seat-of", obj.id, obj.placement.location))
            served = obj.attr("served")
            if served is not None:
                init.add(("served", obj.id, str(served)))
        if types.is_subtype(obj.type_name, "location"):
            if obj.attr("worksurface") == "yes":
                init.add(("worksurface", obj.id))

    known = set(domain.predicates)
    init = {a for a in init if a[0] in known}
    # drop atoms that mention undeclared objects (e.g. content symbols that are
    # not modeled as liquid objects)
    init = {a for a in init if all(arg in objects for arg in a[1:])}

    return Problem(domain=domain, name="from-world", objects=objects, init=frozenset(init), goal=goal)


def apply_effects(world: WorldModel, action: GroundAction, domain: Domain) -> list[str]:
    """Write an executed action's declared effects into the knowledge base.

    Changes are pre-declared as expected so subscribers can tell them apart
    from external interference.  Returns the ids of the touched objects.
    """
    state = world.snapshot()
    robot = robot_of(state, domain)
    updated: dict[str, WorldObject] = {}

    def obj(object_id: str) -> WorldObject:
        if object_id in updated:
            return updated[object_id]
        found = state.get(object_id)
        if found is None:
            raise KeyError(f"effect mentions unknown object '{object_id}'")
        return found

    def location_pose(location_id: str):
        loc = state.get(location_id)
        return loc.placement.pose if loc is not None and loc.placement else None

    for atom in sorted(action.add_effects):
        name = atom[0]
        if name == "at":
            updated[robot.id] = obj(robot.id).with_location(atom[1], location_pose(atom[1]))
        elif name == "on":
            updated[atom[1]] = obj(atom[1]).with_location(atom[2], location_pose(atom[2]))
        elif name == "holding":
            updated[atom[1]] = obj(atom[1]).with_location(GRIPPER)
            updated[robot.id] = obj(robot.id).with_attr(GRIPPER, atom[1])
        elif name == "handempty":
            updated[robot.id] = obj(robot.id).with_attr(GRIPPER, "empty")
        elif name == "content":
            updated[atom[1]] = obj(atom[1]).with_attr("content", atom[2])
        elif name == "empty":
            updated[atom[1]] = obj(atom[1]).with_attr("content", "empty")
        elif name == "poured":
            updated[atom[1]] = obj(atom[1]).with_attr("poured", atom[2])
        elif name == "served":
            updated[atom[1]] = obj(atom[1]).with_attr("served", atom[2])
        elif name == "clean":
            updated[atom[1]] = obj(atom[1]).with_attr("clean", "yes")

    for atom in sorted(action.del_effects):
        if atom[0] == "clean":
            updated[atom[1]] = obj(atom[1]).with_attr("clean", "no")

    ids = sorted(updated)
    world.declare_expected(ids, kind="modified")
    for oid in ids:
        world.upsert_object(updated[oid])
    return ids
