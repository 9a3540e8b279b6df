"""HTTP gateway: world snapshots, menus, command injection, event streaming.

Wire format is JSON; the event stream is newline-delimited JSON with gapless
per-connection sequence numbers (reconnect with ``?after=<seq>``).  Commands
posted to a noisy session pass through the confusion matrix server-side, so a
UI client experiences the same error model the decoder would produce.
"""

from __future__ import annotations

import itertools
import json
import queue
import threading
import time
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, StreamingResponse
from pydantic import BaseModel

from .. import mission
from ..channel import ConfusionMatrix, GuiCommand, emit
from ..menu import MenuState, breadcrumb, derive, transition
from ..mission import OutcomeModel, Session, StatisticalMotion
from ..references import finalize_goal
from ..runner import ScenarioRuntime
from ..scenario import Scenario, load_scenario
from ..worldmodel import WorldModel, WorldObject


class EventHub:
    """Fan-out of gateway events to streaming clients, with a replay buffer."""

    def __init__(self):
        self._lock = threading.Lock()
        self._seq = 0
        self._history: list[dict] = []
        self._clients: list[queue.SimpleQueue] = []

    def publish(self, kind: str, payload: dict) -> int:
        with self._lock:
            self._seq += 1
            event = {"seq": self._seq, "kind": kind, **payload}
            self._history.append(event)
            for q in self._clients:
                q.put(event)
            return self._seq

    def attach(self, after: int = 0) -> tuple[queue.SimpleQueue, list[dict]]:
        with self._lock:
            q: queue.SimpleQueue = queue.SimpleQueue()
            backlog = [e for e in self._history if e["seq"] > after]
            self._clients.append(q)
            return q, backlog

    def detach(self, q: queue.SimpleQueue) -> None:
        with self._lock:
            if q in self._clients:
                self._clients.remove(q)


@dataclass
class GatewaySession:
    id: str
    world: WorldModel
    runtime: ScenarioRuntime
    menu_state: MenuState
    matrix: ConfusionMatrix
    rng: np.random.Generator
    error_rate: float
    outcome: OutcomeModel
    time_scale: float
    mission_session: Session | None = None
    goal: object = None
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_error: str | None = None

    @property
    def phase(self) -> str:
        if self.mission_session is None:
            return "goal_selection"
        if self.mission_session.status == mission.EXECUTING:
            return "executing"
        if self.mission_session.finished:
            return self.mission_session.status
        return "confirmation"


def _object_json(obj: WorldObject) -> dict:
    placement = None
    if obj.placement is not None:
        pose = obj.placement.pose
        placement = {
            "location": obj.placement.location,
            "pose": {"x": pose.x, "y": pose.y, "theta": pose.theta} if pose else None,
        }
    return {
        "id": obj.id,
        "type": obj.type_name,
        "attributes": dict(obj.attributes),
        "placement": placement,
    }


def _menu_json(sess: GatewaySession) -> dict:
    ctx = sess.runtime.menu_context(sess.world.snapshot())
    if sess.mission_session is not None:
        ms = sess.mission_session
        if ms.finished:
            items = [f"session {ms.status}"]
        elif ms.status == mission.EXECUTING:
            items = [f"running: {ms.current_action().signature}"]
        elif ms.status == mission.RECOVERING:
            items = [f"retry: {ms.current_action().signature}"]
        else:
            items = [f"execute: {ms.current_action().signature}"]
        return {
            "items": items,
            "cursor": 0,
            "breadcrumb": list(breadcrumb(sess.menu_state)),
            "phase": sess.phase,
            "plan": ms.plan.as_lines(),
            "plan_cursor": ms.cursor,
            "status": ms.status,
        }
    view = derive(ctx, sess.menu_state)
    if view.level == "done":
        items = ["start task"]
    else:
        items = list(view.items)
    return {
        "items": items,
        "cursor": sess.menu_state.cursor,
        "breadcrumb": list(breadcrumb(sess.menu_state)),
        "phase": "goal_selection",
        "level": view.level,
        "error": sess.last_error,
    }


class CommandBody(BaseModel):
    command: str


class SessionBody(BaseModel):
    error_rate: float | None = None
    seed: int | None = None
    goal: str | None = None  # e.g. "put cup1 table": formulate it immediately


def create_app(
    scenario: Scenario | str,
    error_rate: float = 0.0,
    seed: int = 0,
    time_scale: float = 0.0,
) -> FastAPI:
    if isinstance(scenario, str):
        scenario = load_scenario(scenario)

    app = FastAPI(title="bcibot gateway")
    hub = EventHub()
    world = scenario.build_world()
    runtime = ScenarioRuntime(scenario)
    sessions: dict[str, GatewaySession] = {}
    ids = itertools.count(1)

    world_sub = world.subscribe()

    def pump_world_events() -> None:
        for ev in world_sub.drain():
            obj = world.get(ev.object_id)
            hub.publish(
                "change",
                {
                    "revision": ev.revision,
                    "change_kind": ev.kind,
                    "object_id": ev.object_id,
                    "expected": ev.expected,
                    "object": _object_json(obj) if obj is not None else None,
                },
            )
            # snapshot the registry: handlers may add sessions concurrently
            for sess in list(sessions.values()):
                if sess.mission_session is not None and not sess.mission_session.finished:
                    before = sess.mission_session.status
                    mission.on_world_change(sess.mission_session, ev)
                    if sess.mission_session.status != before:
                        hub.publish(
                            "transition",
                            {"session": sess.id, "status": sess.mission_session.status},
                        )

    @app.get("/world")
    def get_world():
        snap = world.snapshot()
        return {
            "revision": snap.revision,
            "objects": [_object_json(o) for o in snap.objects],
        }

    @app.post("/world/objects")
    def post_world_object(body: dict):
        """External world edit (e.g. perception noticed a moved object)."""
        from ..motion.geometry import Pose2D
        from ..worldmodel import Placement

        try:
            placement = None
            if "location" in body:
                pose_cfg = body.get("pose")
                pose = Pose2D(**pose_cfg) if pose_cfg else scenario.location_pose(body["location"])
                placement = Placement(location=body["location"], pose=pose)
            obj = WorldObject.make(
                id=body["id"],
                type_name=body["type"],
                attributes=body.get("attributes", {}),
                placement=placement,
            )
            revision = world.upsert_object(obj)
        except (KeyError, ValueError) as exc:
            return JSONResponse(status_code=422, content={"code": "bad_object", "detail": str(exc)})
        pump_world_events()
        return {"revision": revision}

    @app.post("/session")
    def post_session(body: SessionBody):
        sid = f"s{next(ids)}"
        rate = body.error_rate if body.error_rate is not None else error_rate
        sess = GatewaySession(
            id=sid,
            world=world,
            runtime=runtime,
            menu_state=MenuState(),
            matrix=ConfusionMatrix.symmetric(rate),
            rng=np.random.default_rng(body.seed if body.seed is not None else seed),
            error_rate=rate,
            outcome=OutcomeModel.from_config(scenario.outcome_model),
            time_scale=time_scale,
        )
        if body.goal is not None:
            from ..menu import GoalSpecError, parse_goal_spec, transition as menu_transition

            state = world.snapshot()
            ctx = runtime.menu_context(state)
            try:
                target = parse_goal_spec(body.goal, ctx)
                policy = runtime.policy(ctx, target)
            except GoalSpecError as exc:
                return JSONResponse(
                    status_code=422, content={"code": "bad_goal", "detail": str(exc)}
                )
            for cmd in policy.instructed_path():
                sess.menu_state = menu_transition(ctx, sess.menu_state, cmd)
            _apply_to_menu(sess, GuiCommand.SELECT)  # commit the finalized goal
        sessions[sid] = sess
        hub.publish("transition", {"session": sid, "status": "created"})
        return {"session": sid, "error_rate": rate, "phase": sess.phase}

    def _get_session(sid: str) -> GatewaySession:
        if sid not in sessions:
            raise HTTPException(status_code=404, detail={"code": "unknown_session"})
        return sessions[sid]

    @app.get("/menu/{sid}")
    def get_menu(sid: str):
        return _menu_json(_get_session(sid))

    @app.get("/session/{sid}")
    def get_session(sid: str):
        sess = _get_session(sid)
        ms = sess.mission_session
        payload = {
            "session": sid,
            "phase": sess.phase,
            "error_rate": sess.error_rate,
        }
        if ms is not None:
            payload.update(
                {
                    "status": ms.status,
                    "plan": ms.plan.as_lines(),
                    "cursor": ms.cursor,
                    "executed": ms.executed,
                    "scheduled": ms.scheduled,
                    "retries": ms.retries,
                }
            )
        return payload

    def _complete_running_action(sess: GatewaySession) -> None:
        ms = sess.mission_session
        mission.complete_action(
            ms, sess.world, StatisticalMotion(), sess.outcome, sess.rng, domain=scenario.domain
        )
        pump_world_events()
        hub.publish(
            "transition", {"session": sess.id, "status": ms.status, "menu": _menu_json(sess)}
        )

    def _launch_action(sess: GatewaySession) -> None:
        ms = sess.mission_session
        runtime_s = mission.begin_action(ms, sess.outcome, sess.rng)
        hub.publish(
            "transition",
            {
                "session": sess.id,
                "status": ms.status,
                "action": ms.current_action().signature,
                "menu": _menu_json(sess),
            },
        )
        if sess.time_scale > 0:
            delay = (runtime_s) * sess.time_scale

            def finish():
                with sess.lock:
                    if ms.status == mission.EXECUTING:
                        _complete_running_action(sess)

            threading.Timer(delay, finish).start()
        else:
            _complete_running_action(sess)

    def _apply_to_menu(sess: GatewaySession, cmd: GuiCommand) -> None:
        ctx = sess.runtime.menu_context(sess.world.snapshot())
        view = derive(ctx, sess.menu_state)
        sess.last_error = None
        if view.level == "done":
            if cmd == GuiCommand.SELECT:
                state = sess.world.snapshot()
                goal = finalize_goal(view.template, state, scenario.domain)
                plan = sess.runtime.plan_for(state, goal)
                if plan is None:
                    sess.last_error = "no plan found for this goal"
                    return
                sess.goal = goal
                sess.mission_session = Session(plan=plan)
                hub.publish(
                    "transition",
                    {"session": sess.id, "status": sess.mission_session.status},
                )
                return
            sess.menu_state = transition(ctx, sess.menu_state, cmd)
            return
        sess.menu_state = transition(ctx, sess.menu_state, cmd)

    @app.post("/command/{sid}")
    def post_command(sid: str, body: CommandBody):
        sess = _get_session(sid)
        try:
            intended = GuiCommand(body.command)
        except ValueError:
            return JSONResponse(
                status_code=422,
                content={"code": "bad_command", "detail": f"unknown command '{body.command}'"},
            )
        with sess.lock:
            ms = sess.mission_session
            if ms is not None and ms.finished:
                return JSONResponse(
                    status_code=409,
                    content={"code": "session_finished", "status": ms.status},
                )
            emitted = emit(intended, sess.matrix, sess.rng) if sess.error_rate > 0 else intended
            if ms is None:
                _apply_to_menu(sess, emitted)
            else:
                fresh = (
                    ms.status == mission.AWAITING_CONFIRMATION
                    and ms.cursor == 0
                    and ms.executed_total == 0
                )
                if emitted == GuiCommand.GO_BACK and fresh:
                    sess.mission_session = None
                    sess.goal = None
                    ctx = sess.runtime.menu_context(sess.world.snapshot())
                    sess.menu_state = transition(ctx, sess.menu_state, GuiCommand.GO_BACK)
                    hub.publish("transition", {"session": sid, "status": "goal_selection"})
                else:
                    before = ms.status
                    mission.step(ms, emitted)
                    if before != mission.EXECUTING and ms.status == mission.EXECUTING:
                        _launch_action(sess)
                    elif ms.status != before:
                        hub.publish("transition", {"session": sid, "status": ms.status})
            # published after application so the carried menu reflects the command
            hub.publish(
                "decoded",
                {
                    "session": sid,
                    "intended": intended.value,
                    "emitted": emitted.value,
                    "timestamp": time.time(),
                    "menu": _menu_json(sess),
                },
            )
            return {
                "session": sid,
                "intended": intended.value,
                "emitted": emitted.value,
                "phase": sess.phase,
            }

    @app.get("/events")
    def get_events(request: Request, after: int = 0, max_events: int | None = None, idle_timeout: float = 2.0):
        q, backlog = hub.attach(after)

        def stream():
            sent = 0
            try:
                for event in backlog:
                    yield json.dumps(event, sort_keys=True) + "\n"
                    sent += 1
                    if max_events is not None and sent >= max_events:
                        return
                while True:
                    try:
                        event = q.get(timeout=idle_timeout)
                    except queue.Empty:
                        return
                    yield json.dumps(event, sort_keys=True) + "\n"
                    sent += 1
                    if max_events is not None and sent >= max_events:
                        return
            finally:
                hub.detach(q)

        return StreamingResponse(stream(), media_type="application/x-ndjson")

    app.state.world = world
    app.state.hub = hub
    app.state.sessions = sessions
    app.state.scenario = scenario
    return app
