"""Headless closed-loop sessions: scripted user, noisy channel, simulated clock.

One session runs goal formulation in the menu, plans, then executes with
per-action confirmation.  All timing is simulated (the clock is just a float),
so batches run far faster than real time.  Every random draw flows from the
session seed, making runs replayable.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import mission
from .channel import ConfusionMatrix, GuiCommand, emit
from .compiler import compile_problem, robot_of
from .evaluation import (
    PHASE_CONFIRMATION,
    PHASE_EXECUTING,
    PHASE_INTERRUPTED,
    PHASE_MENU,
    PHASE_RECOVERING,
    RatedEvent,
    RunLog,
    rate_run,
)
from .menu import (
    InstructedGoal,
    MenuContext,
    MenuError,
    MenuPolicy,
    MenuState,
    derive,
    goal_matches,
    parse_goal_spec,
    transition,
)
from .mission import OutcomeModel, Session, StatisticalMotion
from .motion.geometry import Pose2D
from .motion.prm import EffectorPose, Workspace3D, build_roadmap, prm_query
from .motion.rrt import MotionError, bi2rrt_star
from .motion.sampling import sample_drop_poses, sample_grasp_poses
from .planner.model import Plan, PlanningError
from .planner.search import plan as find_plan
from .references import feasible_goal_types, finalize_goal
from .scenario import Scenario

MAX_SIM_TIME = 36_000.0  # one simulated session never exceeds this many seconds


class RunnerError(RuntimeError):
    pass


@dataclass
class SessionResult:
    log: RunLog
    session: Session | None
    goal_achieved: bool
    sim_time: float


class SimulatedMotion:
    """Full-fidelity backend: every action runs its motion planner."""

    def __init__(self, scenario: Scenario, world, rng: np.random.Generator, rrt_budget: int = 350):
        self.scenario = scenario
        self.world = world
        self.rng = rng
        self.rrt_budget = rrt_budget
        self.ws3d = Workspace3D.from_config(scenario.workspace3d)
        self.roadmap = build_roadmap(self.ws3d, n_nodes=200, k_neighbors=8, rng=rng)
        self.effector_rest = EffectorPose(position=(0.0, 0.0, 1.0))

    def _base_pose(self) -> Pose2D:
        state = self.world.snapshot()
        robot = robot_of(state, self.scenario.domain)
        pose = robot.placement.pose if robot.placement else None
        return pose if pose is not None else Pose2D(0.0, 0.0, 0.0)

    def _manip_point(self) -> tuple[float, float, float]:
        # canonical in-reach point in the local task space
        return (0.6, 0.0, 0.8)

    def plan_action(self, action) -> tuple[bool, str]:
        try:
            if action.name == "approach":
                target = self.scenario.location_pose(action.args[1])
                if target is None:
                    return False, f"no pose for location {action.args[1]}"
                bi2rrt_star(
                    self._base_pose(), target, self.scenario.workspace,
                    budget=self.rrt_budget, rng=self.rng,
                )
                return True, "base path found"
            if action.name in ("grasp", "drop"):
                if action.name == "grasp":
                    poses = sample_grasp_poses(
                        self._manip_point(), 0.15, 30, self.rng, workspace=self.ws3d
                    )
                else:
                    pts = self._tabletop_cloud()
                    poses = list(sample_drop_poses(pts, clearance=0.10, rng=self.rng).poses)
                prm_query(self.roadmap, self.effector_rest, poses[0])
                return True, "manipulation path found"
            if action.name == "pour":
                from .liquid import CupModel, pour_session

                cfg = self.scenario.pour
                cup = CupModel(interior_height=cfg.interior_height, fill_target=cfg.fill_target)
                result = pour_session(
                    cup,
                    flow_rate=cfg.flow_rate,
                    sensor_noise=cfg.sensor_noise_std,
                    seed=int(self.rng.integers(2**31)),
                    timestep=cfg.timestep,
                    view_angle=cfg.view_angle,
                    stop_latency=cfg.stop_latency,
                )
                return True, f"poured, level error {result.error_mm:.1f} mm"
            if action.name == "drink":
                cfg = self.scenario.mouth
                true_mouth = np.asarray(cfg.position)
                observed = true_mouth + self.rng.normal(0.0, cfg.noise_std, size=3)
                # approach the observed mouth pose in task space
                offset = observed - true_mouth
                reached = true_mouth + offset  # kinematic execution reaches the observed pose
                ok = bool(np.linalg.norm(reached - true_mouth) <= cfg.tolerance)
                return ok, "drink motion at mouth" if ok else "mouth pose estimate out of tolerance"
            return True, "no motion needed"
        except MotionError as exc:
            return False, f"motion failure: {exc}"

    def _tabletop_cloud(self) -> np.ndarray:
        rng = self.rng
        n = 300
        pts = np.column_stack(
            [
                rng.uniform(0.3, 0.9, size=n),
                rng.uniform(-0.3, 0.3, size=n),
                rng.normal(0.75, 0.002, size=n),
            ]
        )
        return pts


@dataclass
class RunConfig:
    goal_spec: str
    error_rate: float = 0.0
    seed: int = 0
    step_interval: float = 9.0
    jitter: float = 0.0
    simulated_motion: bool = False
    rrt_budget: int = 350
    matrix_path: str | None = None  # overrides the symmetric error-rate matrix


class ScenarioRuntime:
    """Caches per-scenario artifacts shared across sessions (feasible goal set,
    menu policies, plans), keyed by world revision and goal."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self._feasible: dict[int, tuple[str, ...]] = {}
        self._policies: dict[tuple, MenuPolicy] = {}
        self._plans: dict[tuple, Plan] = {}

    def feasible_templates(self, state) -> tuple[str, ...]:
        key = state.revision
        if key not in self._feasible:
            builder = lambda st, goal: compile_problem(self.scenario.domain, st, goal)
            self._feasible[key] = tuple(
                feasible_goal_types(state, self.scenario.domain, builder)
            )
        return self._feasible[key]

    def menu_context(self, state) -> MenuContext:
        return MenuContext(
            domain=self.scenario.domain,
            state=state,
            template_names=self.feasible_templates(state),
        )

    def policy(self, ctx: MenuContext, target: InstructedGoal) -> MenuPolicy:
        key = (ctx.state.revision, target)
        if key not in self._policies:
            self._policies[key] = MenuPolicy(ctx, target)
        return self._policies[key]

    def plan_for(self, state, goal) -> Plan | None:
        """Optimal plan for the goal, or None when planning fails (cached)."""
        key = (state.revision, goal)
        if key not in self._plans:
            problem = compile_problem(self.scenario.domain, state, goal)
            try:
                self._plans[key] = find_plan(problem)
            except PlanningError:
                self._plans[key] = None
        return self._plans[key]


def run_session(
    runtime: ScenarioRuntime, config: RunConfig, world=None
) -> SessionResult:
    """One scripted closed-loop session; returns the rated run log."""
    scenario = runtime.scenario
    rng = np.random.default_rng(config.seed)
    if config.matrix_path is not None:
        matrix = ConfusionMatrix.from_json(config.matrix_path)
    else:
        matrix = ConfusionMatrix.symmetric(config.error_rate)
    if world is None:
        world = scenario.build_world()
    sub = world.subscribe()

    state = world.snapshot()
    ctx = runtime.menu_context(state)
    target = parse_goal_spec(config.goal_spec, ctx)
    policy = runtime.policy(ctx, target)
    # the instructed path and its length are pinned to the session's initial
    # world, even if mid-run interference forces a menu refresh later
    initial_policy = policy

    motion = (
        SimulatedMotion(scenario, world, rng, rrt_budget=config.rrt_budget)
        if config.simulated_motion
        else StatisticalMotion()
    )
    outcome = OutcomeModel.from_config(scenario.outcome_model)

    events: list[RatedEvent] = []
    t = 0.0

    def tick() -> float:
        nonlocal t
        dt = config.step_interval
        if config.jitter > 0:
            dt += rng.uniform(-config.jitter, config.jitter)
        t += max(dt, 0.1)
        return t

    def execute_plan(session: Session, goal, on_target: bool) -> str:
        """Run one committed plan to completion/abort.

        For a wrongly committed goal the user steers out: decline at the very
        first confirmation returns to the menu ("reopen"); anything after that
        runs the interrupt-then-abandon route.
        """
        nonlocal t

        def pump() -> None:
            for ev in sub.drain():
                mission.on_world_change(session, ev, now=t)

        while not session.finished and t < MAX_SIM_TIME:
            if session.status == mission.EXECUTING and session.completion_time is not None:
                if session.completion_time <= t + config.step_interval:
                    t = max(session.completion_time, t)
                    mission.complete_action(
                        session, world, motion, outcome, rng, domain=scenario.domain, now=t
                    )
                    pump()
                    continue

            tick()
            status = session.status
            if status == mission.AWAITING_CONFIRMATION:
                phase, on_path = PHASE_CONFIRMATION, GuiCommand.SELECT
            elif status == mission.EXECUTING:
                phase, on_path = PHASE_EXECUTING, GuiCommand.DO_NOTHING
            elif status == mission.INTERRUPTED:
                phase, on_path = PHASE_INTERRUPTED, GuiCommand.SELECT
            else:
                phase, on_path = PHASE_RECOVERING, GuiCommand.SELECT
            if not on_target:
                on_path = GuiCommand.GO_BACK  # the instructed path exits a wrong plan

            intended = on_path
            emitted = emit(intended, matrix, rng)
            events.append(
                RatedEvent(
                    timestamp=t, intended=intended, emitted=emitted, phase=phase, on_path=on_path
                )
            )

            fresh_confirmation = (
                session.status == mission.AWAITING_CONFIRMATION
                and session.cursor == 0
                and session.executed_total == 0
            )
            if emitted == GuiCommand.GO_BACK and fresh_confirmation:
                return "reopen"  # declined before anything ran: goal formulation reopens

            was_status = session.status
            mission.step(session, emitted, now=t)
            if was_status != mission.EXECUTING and session.status == mission.EXECUTING:
                mission.begin_action(session, outcome, rng, now=t)
            if (
                session.status == mission.INTERRUPTED
                and not session.plan_valid
                and emitted == GuiCommand.SELECT
            ):
                new_plan = runtime.plan_for(world.snapshot(), goal)
                if new_plan is None:
                    session.status = mission.ABORTED
                else:
                    mission.replan(session, new_plan, now=t)
            pump()
        return session.status

    # -- the closed loop: formulate until the instructed goal commits --------
    ms = MenuState()
    session: Session | None = None
    goal = None

    while t < MAX_SIM_TIME:
        view = derive(ctx, ms)
        if view.level == "done":
            tpl = view.template
            candidate_goal = finalize_goal(tpl, state, scenario.domain)
            candidate_plan = runtime.plan_for(state, candidate_goal)
            on_target = goal_matches(ctx, tpl, target)
            if on_target and candidate_plan is None:
                raise RunnerError(f"instructed goal '{config.goal_spec}' has no plan")
            if on_target:
                goal = candidate_goal
                session = Session(plan=candidate_plan)
                result = execute_plan(session, goal, on_target=True)
                if result == "reopen":
                    # an erroneous go_back declined the plan before it started
                    ms = MenuState(history=ms.history[:-1], cursor=0)
                    session = None
                    goal = None
                    continue
                break
            if candidate_plan is None:
                # planner rejects the formulated goal; only backing out helps
                tick()
                intended = GuiCommand.GO_BACK
                emitted = emit(intended, matrix, rng)
                events.append(
                    RatedEvent(
                        timestamp=t, intended=intended, emitted=emitted,
                        phase=PHASE_CONFIRMATION, on_path=GuiCommand.GO_BACK,
                    )
                )
                if emitted == GuiCommand.GO_BACK:
                    ms = transition(ctx, ms, GuiCommand.GO_BACK)
                continue
            wrong_session = Session(plan=candidate_plan)
            execute_plan(wrong_session, candidate_goal, on_target=False)
            # back to goal formulation, undoing the wrongly selected goal
            ms = MenuState(history=ms.history[:-1], cursor=0)
            new_state = world.snapshot()
            if new_state.revision != state.revision:
                state = new_state
                ctx = runtime.menu_context(state)
                policy = runtime.policy(ctx, target)
            continue

        tick()
        try:
            intended = policy.intended(ms)
            before = policy.distance(ms)
        except MenuError:
            ms = MenuState()  # menu refreshed after a world change; start over
            continue
        if intended is None:
            raise RunnerError("policy has no next command")  # unreachable
        emitted = emit(intended, matrix, rng)
        ms2 = transition(ctx, ms, emitted)
        events.append(
            RatedEvent(
                timestamp=t, intended=intended, emitted=emitted, phase=PHASE_MENU,
                dist_before=before, dist_after=policy.distance(ms2),
            )
        )
        ms = ms2

    world.unsubscribe(sub)
    if session is None:
        raise RunnerError("session did not reach execution before the time limit")

    goal_achieved = False
    if session.status == mission.DONE and goal is not None:
        final_state = world.snapshot()
        problem = compile_problem(scenario.domain, final_state, goal)
        from .planner.grounding import goal_satisfied

        goal_achieved = goal_satisfied(goal, problem.init, problem)

    log = RunLog(
        events=tuple(events),
        instructed_path=initial_policy.instructed_path(),
        minimal_steps=initial_policy.minimal_steps(),
        meta={
            "seed": config.seed,
            "error_rate": config.error_rate,
            "goal": config.goal_spec,
            "status": session.status,
            "executed": dict(session.executed),
            "scheduled": dict(session.scheduled),
            "retries": session.retries,
            "sim_time": t,
        },
    )
    return SessionResult(log=rate_run(log), session=session, goal_achieved=goal_achieved, sim_time=t)


def run_batch(scenario: Scenario, config: RunConfig, runs: int) -> list[SessionResult]:
    """Independent sessions with per-run seeds derived from the base seed."""
    runtime = ScenarioRuntime(scenario)
    results = []
    for i in range(runs):
        run_cfg = replace(config, seed=config.seed + i)
        results.append(run_session(runtime, run_cfg))
    return results
