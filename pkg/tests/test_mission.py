from __future__ import annotations

import numpy as np
import pytest

from bcibot import mission
from bcibot.channel import GuiCommand
from bcibot.compiler import compile_problem
from bcibot.mission import (
    ABORTED,
    AWAITING_CONFIRMATION,
    DONE,
    EXECUTING,
    INTERRUPTED,
    RECOVERING,
    OutcomeModel,
    OutcomeSpec,
    Session,
    SessionFinished,
    StatisticalMotion,
    begin_action,
    execute_action,
    on_world_change,
    step,
)
from bcibot.planner.grounding import goal_satisfied
from bcibot.planner.model import ExistentialGoal
from bcibot.worldmodel import ChangeEvent

SEL, BACK, REST, UP = (
    GuiCommand.SELECT,
    GuiCommand.GO_BACK,
    GuiCommand.DO_NOTHING,
    GuiCommand.GO_UP,
)

FETCH_GOAL = ExistentialGoal(ground=(("on", "cup1", "table"),))


@pytest.fixture()
def fetch_plan(runtime, state):
    return runtime.plan_for(state, FETCH_GOAL)


@pytest.fixture()
def all_success():
    return OutcomeModel.always_successful()


def c_fail(name):
    """Outcome model where one action always fails."""
    specs = {k: OutcomeSpec(1.0, v.runtime_mean, v.runtime_std) for k, v in mission.DEFAULT_OUTCOMES.items()}
    specs[name] = OutcomeSpec(0.0, specs[name].runtime_mean, specs[name].runtime_std)
    return OutcomeModel(specs=specs)


# -- step state machine -----------------------------------------------------------


def test_select_launches_action(fetch_plan):
    s = Session(plan=fetch_plan)
    assert s.status == AWAITING_CONFIRMATION
    step(s, SEL)
    assert s.status == EXECUTING


def test_go_back_interrupts_running_motion(fetch_plan):
    s = Session(plan=fetch_plan)
    step(s, SEL)
    step(s, BACK)
    assert s.status == INTERRUPTED
    assert s.plan_valid  # command interrupts keep the plan


def test_do_nothing_keeps_status(fetch_plan):
    s = Session(plan=fetch_plan)
    step(s, REST)
    assert s.status == AWAITING_CONFIRMATION
    step(s, UP)
    assert s.status == AWAITING_CONFIRMATION


def test_state_machine_total_over_all_commands(fetch_plan):
    for status in (AWAITING_CONFIRMATION, EXECUTING, INTERRUPTED, RECOVERING):
        for cmd in GuiCommand:
            s = Session(plan=fetch_plan)
            s.status = status
            step(s, cmd)  # must never raise


def test_resume_after_interrupt(fetch_plan):
    s = Session(plan=fetch_plan)
    step(s, SEL)
    step(s, BACK)
    step(s, SEL)
    assert s.status == EXECUTING


def test_abandon_after_interrupt(fetch_plan):
    s = Session(plan=fetch_plan)
    step(s, SEL)
    step(s, BACK)
    step(s, BACK)
    assert s.status == ABORTED


def test_finished_session_rejects_commands(fetch_plan):
    s = Session(plan=fetch_plan)
    s.status = DONE
    with pytest.raises(SessionFinished):
        step(s, SEL)


# -- execute_action -----------------------------------------------------------------


def run_full_plan(session, world, domain, outcome, rng):
    guard = 0
    while not session.finished and guard < 50:
        guard += 1
        if session.status in (AWAITING_CONFIRMATION, RECOVERING, INTERRUPTED):
            step(session, SEL)
        if session.status == EXECUTING:
            execute_action(
                session, world, StatisticalMotion(), outcome, rng, domain=domain
            )
    return session


def test_all_success_run_satisfies_goal(world, scenario, fetch_plan, all_success):
    s = Session(plan=fetch_plan)
    run_full_plan(s, world, scenario.domain, all_success, np.random.default_rng(0))
    assert s.status == DONE
    assert s.executed == s.scheduled == {"approach": 2, "grasp": 1, "drop": 1}
    problem = compile_problem(scenario.domain, world.snapshot(), FETCH_GOAL)
    assert goal_satisfied(FETCH_GOAL, problem.init, problem)


def test_failure_then_retry_counts_extra_execution(world, scenario, fetch_plan):
    rng = np.random.default_rng(1)
    s = Session(plan=fetch_plan)
    outcome = OutcomeModel.always_successful()
    step(s, SEL)
    execute_action(s, world, StatisticalMotion(), outcome, rng, domain=scenario.domain)
    step(s, SEL)  # confirm grasp
    execute_action(s, world, StatisticalMotion(), c_fail("grasp"), rng, domain=scenario.domain)
    assert s.status == RECOVERING
    step(s, SEL)  # user commands the retry
    assert s.retries == 1
    execute_action(s, world, StatisticalMotion(), outcome, rng, domain=scenario.domain)
    run_full_plan(s, world, scenario.domain, outcome, rng)
    assert s.status == DONE
    assert s.executed_total == s.scheduled_total + 1


def test_second_failure_aborts(world, scenario, fetch_plan):
    rng = np.random.default_rng(2)
    s = Session(plan=fetch_plan)
    failing = c_fail("approach")
    step(s, SEL)
    execute_action(s, world, StatisticalMotion(), failing, rng, domain=scenario.domain)
    assert s.status == RECOVERING
    step(s, SEL)
    execute_action(s, world, StatisticalMotion(), failing, rng, domain=scenario.domain)
    assert s.status == ABORTED
    assert s.executed_total < s.scheduled_total


def test_motion_failure_counts_as_action_failure(world, scenario, fetch_plan, all_success):
    class NoPath:
        def plan_action(self, action):
            return False, "no path"

    s = Session(plan=fetch_plan)
    step(s, SEL)
    execute_action(s, world, NoPath(), all_success, np.random.default_rng(3), domain=scenario.domain)
    assert s.status == RECOVERING


def test_effects_marked_expected(world, scenario, fetch_plan, all_success):
    sub = world.subscribe()
    s = Session(plan=fetch_plan)
    step(s, SEL)
    execute_action(s, world, StatisticalMotion(), all_success, np.random.default_rng(0), domain=scenario.domain)
    events = sub.drain()
    assert events and all(e.expected for e in events)


# -- on_world_change ------------------------------------------------------------------


def test_expected_event_does_not_interrupt(fetch_plan):
    s = Session(plan=fetch_plan)
    step(s, SEL)
    on_world_change(s, ChangeEvent(revision=1, kind="modified", object_id="cup1", expected=True))
    assert s.status == EXECUTING
    assert s.plan_valid


def test_unexpected_event_interrupts_and_invalidates(fetch_plan):
    s = Session(plan=fetch_plan)
    step(s, SEL)
    on_world_change(s, ChangeEvent(revision=1, kind="modified", object_id="cup1", expected=False))
    assert s.status == INTERRUPTED
    assert not s.plan_valid


def test_unexpected_event_while_awaiting_invalidates_without_interrupt(fetch_plan):
    s = Session(plan=fetch_plan)
    on_world_change(s, ChangeEvent(revision=1, kind="removed", object_id="cup1", expected=False))
    assert s.status == AWAITING_CONFIRMATION
    assert not s.plan_valid


def test_replan_restores_validity(runtime, state, fetch_plan):
    s = Session(plan=fetch_plan)
    on_world_change(s, ChangeEvent(revision=1, kind="modified", object_id="cup1", expected=False))
    new_plan = runtime.plan_for(state, FETCH_GOAL)
    mission.replan(s, new_plan)
    assert s.plan_valid
    assert s.status == AWAITING_CONFIRMATION
    assert s.scheduled_total == 2 * new_plan.cost  # original + replanned


# -- timing -------------------------------------------------------------------------


def test_begin_action_samples_runtime(fetch_plan, all_success):
    s = Session(plan=fetch_plan)
    step(s, SEL)
    done_at = begin_action(s, all_success, np.random.default_rng(0), now=100.0)
    assert done_at > 100.0
    assert s.completion_time == done_at


def test_runtime_sampling_positive_and_spread(all_success):
    rng = np.random.default_rng(0)
    samples = [all_success.sample_runtime("approach", rng) for _ in range(200)]
    assert all(x > 0 for x in samples)
    assert np.std(samples) > 5.0  # approach std is 18.48 in the outcome table
