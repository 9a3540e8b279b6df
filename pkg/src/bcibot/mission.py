"""Plan execution: per-action confirmation, failure recovery, interruption.

A session walks a plan one confirmed action at a time.  Failures (sampled from
the outcome model or raised by the motion layer) put the session into recovery,
where the user may command exactly one retry before the task aborts.  Commands
can interrupt a running motion; unexpected world changes interrupt it too and
additionally invalidate the rest of the plan.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .channel import GuiCommand
from .planner.model import GroundAction, Plan
from .worldmodel import ChangeEvent

AWAITING_CONFIRMATION = "awaiting_confirmation"
EXECUTING = "executing"
INTERRUPTED = "interrupted"
RECOVERING = "recovering"
DONE = "done"
ABORTED = "aborted"

MIN_RUNTIME = 0.1


class SessionFinished(RuntimeError):
    pass


@dataclass(frozen=True)
class OutcomeSpec:
    success: float
    runtime_mean: float
    runtime_std: float

    def __post_init__(self):
        if not 0.0 <= self.success <= 1.0:
            raise ValueError("success probability must be in [0, 1]")
        if self.runtime_mean <= 0 or self.runtime_std < 0:
            raise ValueError("runtimes must be positive")


#: Table-style defaults: grasp/drop/approach from the fetch-and-carry runs,
#: pour/drink from the drinking-task runs.
DEFAULT_OUTCOMES = {
    "grasp": OutcomeSpec(0.90, 37.56, 4.62),
    "drop": OutcomeSpec(0.89, 34.13, 5.75),
    "approach": OutcomeSpec(1.00, 33.05, 18.48),
    "pour": OutcomeSpec(1.00, 62.90, 7.19),
    "drink": OutcomeSpec(0.77, 57.10, 8.20),
}


@dataclass(frozen=True)
class OutcomeModel:
    specs: dict[str, OutcomeSpec] = field(default_factory=lambda: dict(DEFAULT_OUTCOMES))

    @staticmethod
    def from_config(cfg: dict) -> "OutcomeModel":
        specs = dict(DEFAULT_OUTCOMES)
        for name, entry in cfg.items():
            specs[name] = OutcomeSpec(
                success=float(entry["success"]),
                runtime_mean=float(entry["runtime_mean"]),
                runtime_std=float(entry["runtime_std"]),
            )
        return OutcomeModel(specs=specs)

    @staticmethod
    def always_successful() -> "OutcomeModel":
        return OutcomeModel(
            specs={k: OutcomeSpec(1.0, v.runtime_mean, v.runtime_std) for k, v in DEFAULT_OUTCOMES.items()}
        )

    def spec(self, action_name: str) -> OutcomeSpec:
        if action_name not in self.specs:
            raise KeyError(f"no outcome spec for action '{action_name}'")
        return self.specs[action_name]

    def sample_success(self, action_name: str, rng: np.random.Generator) -> bool:
        return bool(rng.random() < self.spec(action_name).success)

    def sample_runtime(self, action_name: str, rng: np.random.Generator) -> float:
        s = self.spec(action_name)
        return max(MIN_RUNTIME, float(rng.normal(s.runtime_mean, s.runtime_std)))


class MotionSuite(Protocol):
    """Motion backend invoked when an action starts executing."""

    def plan_action(self, action: GroundAction) -> tuple[bool, str]:
        """(ok, detail); not-ok counts as an action failure."""
        ...


class StatisticalMotion:
    """No-geometry backend: success is governed by the outcome model alone."""

    def plan_action(self, action: GroundAction) -> tuple[bool, str]:
        return True, "statistical"


@dataclass(frozen=True)
class Transition:
    timestamp: float
    status: str
    detail: str = ""


@dataclass
class Session:
    plan: Plan
    status: str = AWAITING_CONFIRMATION
    cursor: int = 0
    plan_valid: bool = True
    retried_current: bool = False
    scheduled: dict[str, int] = field(default_factory=dict)
    executed: dict[str, int] = field(default_factory=dict)
    retries: int = 0
    interruptions: int = 0
    transitions: list[Transition] = field(default_factory=list)
    completion_time: float | None = None  # sim time when the running motion ends
    started_at: float | None = None       # launch time of the running motion
    action_log: list[tuple[str, bool, float]] = field(default_factory=list)  # (name, ok, runtime)

    def __post_init__(self):
        self.scheduled = dict(self.plan.action_counts())
        if not self.plan.steps:
            self.status = DONE

    @property
    def finished(self) -> bool:
        return self.status in (DONE, ABORTED)

    @property
    def executed_total(self) -> int:
        return sum(self.executed.values())

    @property
    def scheduled_total(self) -> int:
        return sum(self.scheduled.values())

    def current_action(self) -> GroundAction:
        return self.plan.steps[self.cursor]

    def add_scheduled(self, plan: Plan) -> None:
        for name, count in plan.action_counts().items():
            self.scheduled[name] = self.scheduled.get(name, 0) + count

    def _note(self, timestamp: float, detail: str) -> None:
        self.transitions.append(Transition(timestamp=timestamp, status=self.status, detail=detail))


def step(session: Session, command: GuiCommand, now: float = 0.0) -> Session:
    """Advance the state machine on one decoded command.

    Launch/retry decisions are recorded by moving to EXECUTING; the caller runs
    the motion via ``begin_action``/``complete_action`` (or ``execute_action``).
    All commands are legal everywhere; irrelevant ones are no-ops.
    """
    if session.finished:
        raise SessionFinished(f"session is {session.status}")

    s, c = session.status, command
    if s == AWAITING_CONFIRMATION:
        if c == GuiCommand.SELECT:
            session.status = EXECUTING
            session._note(now, f"launch {session.current_action().signature}")
        elif c == GuiCommand.GO_BACK:
            session.status = INTERRUPTED
            session.interruptions += 1
            session._note(now, "declined pending action")
    elif s == EXECUTING:
        if c == GuiCommand.GO_BACK:
            session.status = INTERRUPTED
            session.interruptions += 1
            session.completion_time = None
            session._note(now, "motion interrupted by command")
    elif s == INTERRUPTED:
        if c == GuiCommand.SELECT:
            if session.plan_valid:
                session.status = EXECUTING
                session._note(now, f"resume {session.current_action().signature}")
            else:
                session._note(now, "replan required")  # caller must replan
        elif c == GuiCommand.GO_BACK:
            session.status = ABORTED
            session._note(now, "task abandoned while interrupted")
    elif s == RECOVERING:
        if c == GuiCommand.SELECT:
            session.status = EXECUTING
            session.retried_current = True
            session.retries += 1
            session._note(now, f"retry {session.current_action().signature}")
        elif c == GuiCommand.GO_BACK:
            session.status = ABORTED
            session._note(now, "recovery declined; task aborted")
    return session


def begin_action(
    session: Session, outcome: OutcomeModel, rng: np.random.Generator, now: float = 0.0
) -> float:
    """Sample the running action's duration; returns its completion time."""
    if session.status != EXECUTING:
        raise ValueError("begin_action requires an executing session")
    runtime = outcome.sample_runtime(session.current_action().name, rng)
    session.started_at = now
    session.completion_time = now + runtime
    return session.completion_time


def complete_action(
    session: Session,
    world,
    motion: MotionSuite,
    outcome: OutcomeModel,
    rng: np.random.Generator,
    domain=None,
    now: float = 0.0,
) -> Session:
    """Resolve the running action: roll success, apply effects or enter recovery."""
    from .compiler import apply_effects

    if session.status != EXECUTING:
        raise ValueError("complete_action requires an executing session")
    action = session.current_action()
    session.executed[action.name] = session.executed.get(action.name, 0) + 1
    runtime = (
        session.completion_time - session.started_at
        if session.completion_time is not None and session.started_at is not None
        else 0.0
    )
    session.completion_time = None
    session.started_at = None

    motion_ok, motion_detail = motion.plan_action(action)
    success = motion_ok and outcome.sample_success(action.name, rng)
    session.action_log.append((action.name, success, runtime))

    if success:
        if world is not None and domain is not None:
            apply_effects(world, action, domain)
        session.retried_current = False
        session.cursor += 1
        if session.cursor >= len(session.plan.steps):
            session.status = DONE
            session._note(now, "plan completed")
        else:
            session.status = AWAITING_CONFIRMATION
            session._note(now, f"await confirmation of {session.current_action().signature}")
    else:
        detail = motion_detail if not motion_ok else "outcome sampled as failure"
        if session.retried_current:
            session.status = ABORTED
            session._note(now, f"{action.signature} failed again ({detail}); aborting")
        else:
            session.status = RECOVERING
            session._note(now, f"{action.signature} failed ({detail}); awaiting retry command")
    return session


def execute_action(
    session: Session,
    world,
    motion: MotionSuite,
    outcome: OutcomeModel,
    rng: np.random.Generator,
    domain=None,
    now: float = 0.0,
) -> Session:
    """begin + complete in one call (timing handled elsewhere)."""
    begin_action(session, outcome, rng, now=now)
    return complete_action(session, world, motion, outcome, rng, domain=domain, now=now)


def on_world_change(session: Session, event: ChangeEvent, now: float = 0.0) -> Session:
    """Expected changes pass; unexpected ones interrupt and invalidate the plan."""
    if event.expected or session.finished:
        return session
    session.plan_valid = False
    if session.status == EXECUTING:
        session.status = INTERRUPTED
        session.interruptions += 1
        session.completion_time = None
        session._note(now, f"unexpected change to {event.object_id}; motion interrupted")
    else:
        session._note(now, f"unexpected change to {event.object_id}; plan invalidated")
    return session


TABLE_ACTION_ORDER = ("grasp", "drop", "approach", "pour", "drink")


def action_table(sessions: list[Session]) -> list[dict]:
    """Per-action aggregate rows: executed(scheduled), success %, runtime mean/std."""
    import numpy as np

    executed: dict[str, int] = {}
    scheduled: dict[str, int] = {}
    succeeded: dict[str, int] = {}
    runtimes: dict[str, list[float]] = {}
    for s in sessions:
        for name, count in s.scheduled.items():
            scheduled[name] = scheduled.get(name, 0) + count
        for name, ok, runtime in s.action_log:
            executed[name] = executed.get(name, 0) + 1
            succeeded[name] = succeeded.get(name, 0) + (1 if ok else 0)
            runtimes.setdefault(name, []).append(runtime)

    names = [n for n in TABLE_ACTION_ORDER if n in scheduled or n in executed]
    names += sorted((set(scheduled) | set(executed)) - set(names))
    rows = []
    for name in names:
        times = runtimes.get(name, [])
        n_exec = executed.get(name, 0)
        rows.append(
            {
                "action": name,
                "executed": n_exec,
                "scheduled": scheduled.get(name, 0),
                "success_pct": 100.0 * succeeded.get(name, 0) / n_exec if n_exec else float("nan"),
                "runtime_mean": float(np.mean(times)) if times else float("nan"),
                "runtime_std": float(np.std(times)) if times else float("nan"),
            }
        )
    all_times = [t for ts in runtimes.values() for t in ts]
    total_exec = sum(executed.values())
    rows.append(
        {
            "action": "total",
            "executed": total_exec,
            "scheduled": sum(scheduled.values()),
            "success_pct": 100.0 * sum(succeeded.values()) / total_exec if total_exec else float("nan"),
            "runtime_mean": float(np.mean(all_times)) if all_times else float("nan"),
            "runtime_std": float(np.std(all_times)) if all_times else float("nan"),
        }
    )
    return rows


def replan(session: Session, new_plan: Plan, now: float = 0.0) -> Session:
    """Install a fresh plan after invalidation (scheduled counts accumulate)."""
    session.plan = new_plan
    session.cursor = 0
    session.plan_valid = True
    session.retried_current = False
    session.add_scheduled(new_plan)
    if new_plan.steps:
        session.status = AWAITING_CONFIRMATION
        session._note(now, "replanned")
    else:
        session.status = DONE
        session._note(now, "replanned; goal already satisfied")
    return session
