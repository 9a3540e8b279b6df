"""Central knowledge base: attributed objects, revisioned snapshots, change events.

Writes are serialized through a single lock; snapshots are immutable values, so
readers never observe partially applied changes.  Subscribers get their own
queue and drain it at their own pace; delivery order equals commit order.
"""

from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, replace

from .motion.geometry import Pose2D
from .planner.model import TypeHierarchy

AttrValue = str | int | float


class UnknownTypeError(ValueError):
    """Object type is not part of the loaded domain's type hierarchy."""


@dataclass(frozen=True)
class Placement:
    """Where an object currently is: a symbolic location plus an optional pose."""

    location: str
    pose: Pose2D | None = None


@dataclass(frozen=True)
class WorldObject:
    id: str
    type_name: str
    attributes: tuple[tuple[str, AttrValue], ...] = ()
    placement: Placement | None = None

    @staticmethod
    def make(
        id: str,
        type_name: str,
        attributes: dict[str, AttrValue] | None = None,
        placement: Placement | None = None,
    ) -> "WorldObject":
        attrs = tuple(sorted((attributes or {}).items()))
        return WorldObject(id=id, type_name=type_name, attributes=attrs, placement=placement)

    def attr(self, key: str, default: AttrValue | None = None) -> AttrValue | None:
        for k, v in self.attributes:
            if k == key:
                return v
        return default

    def with_attr(self, key: str, value: AttrValue) -> "WorldObject":
        attrs = dict(self.attributes)
        attrs[key] = value
        return replace(self, attributes=tuple(sorted(attrs.items())))

    def with_location(self, location: str, pose: Pose2D | None = None) -> "WorldObject":
        return replace(self, placement=Placement(location=location, pose=pose))


@dataclass(frozen=True)
class WorldState:
    revision: int
    objects: tuple[WorldObject, ...]

    def get(self, object_id: str) -> WorldObject | None:
        for o in self.objects:
            if o.id == object_id:
                return o
        return None

    def ids(self) -> list[str]:
        return [o.id for o in self.objects]


EVENT_KINDS = ("added", "removed", "modified")


@dataclass(frozen=True)
class ChangeEvent:
    revision: int
    kind: str  # added | removed | modified
    object_id: str
    expected: bool = False


class Subscription:
    """Order-preserving event queue for one subscriber."""

    def __init__(self, kinds: frozenset[str]):
        self.kinds = kinds
        self._queue: deque[ChangeEvent] = deque()
        self._cond = threading.Condition()

    def _offer(self, event: ChangeEvent) -> None:
        if event.kind not in self.kinds:
            return
        with self._cond:
            self._queue.append(event)
            self._cond.notify_all()

    def poll(self) -> ChangeEvent | None:
        with self._cond:
            return self._queue.popleft() if self._queue else None

    def drain(self) -> list[ChangeEvent]:
        with self._cond:
            out = list(self._queue)
            self._queue.clear()
            return out

    def wait(self, timeout: float | None = None) -> ChangeEvent | None:
        with self._cond:
            if not self._queue:
                self._cond.wait(timeout)
            return self._queue.popleft() if self._queue else None


class WorldModel:
    """Mutable store behind the immutable snapshots."""

    def __init__(self, types: TypeHierarchy):
        self.types = types
        self._lock = threading.RLock()
        self._objects: dict[str, WorldObject] = {}
        self._revision = 0
        self._subs: list[Subscription] = []
        self._expected: set[tuple[str, str]] = set()  # (object_id, kind) predictions

    # -- reads ---------------------------------------------------------------

    @property
    def revision(self) -> int:
        with self._lock:
            return self._revision

    def snapshot(self) -> WorldState:
        with self._lock:
            return WorldState(
                revision=self._revision,
                objects=tuple(self._objects[k] for k in sorted(self._objects)),
            )

    def get(self, object_id: str) -> WorldObject | None:
        with self._lock:
            return self._objects.get(object_id)

    # -- writes --------------------------------------------------------------

    def upsert_object(self, obj: WorldObject) -> int:
        """Insert or replace ``obj``; returns the new revision."""
        if obj.type_name not in self.types:
            raise UnknownTypeError(f"unknown object type '{obj.type_name}'")
        with self._lock:
            kind = "modified" if obj.id in self._objects else "added"
            self._objects[obj.id] = obj
            return self._commit(kind, obj.id)

    def remove_object(self, object_id: str) -> int:
        with self._lock:
            if object_id not in self._objects:
                raise KeyError(object_id)
            del self._objects[object_id]
            return self._commit("removed", object_id)

    def _commit(self, kind: str, object_id: str) -> int:
        self._revision += 1
        expected = (object_id, kind) in self._expected
        if expected:
            self._expected.discard((object_id, kind))
        event = ChangeEvent(
            revision=self._revision, kind=kind, object_id=object_id, expected=expected
        )
        for sub in self._subs:
            sub._offer(event)
        return self._revision

    # -- expectations (declared action effects) -------------------------------

    def declare_expected(self, object_ids: list[str] | set[str], kind: str = "modified") -> None:
        """Mark upcoming changes as predicted effects of the executing action."""
        with self._lock:
            for oid in object_ids:
                self._expected.add((oid, kind))

    def clear_expected(self) -> None:
        with self._lock:
            self._expected.clear()

    # -- subscriptions ---------------------------------------------------------

    def subscribe(self, kinds: set[str] | None = None) -> Subscription:
        wanted = frozenset(kinds) if kinds is not None else frozenset(EVENT_KINDS)
        unknown = wanted - set(EVENT_KINDS)
        if unknown:
            raise ValueError(f"unknown event kinds: {sorted(unknown)}")
        sub = Subscription(wanted)
        with self._lock:
            self._subs.append(sub)
        return sub

    def unsubscribe(self, sub: Subscription) -> None:
        with self._lock:
            if sub in self._subs:
                self._subs.remove(sub)
