from __future__ import annotations

import pytest

from bcibot.channel import GuiCommand
from bcibot.menu import (
    GoalSpecError,
    MenuState,
    derive,
    goal_matches,
    parse_goal_spec,
    scripted_user,
    transition,
)

from .oracles import menu_bfs_distance

UP, DOWN, SEL, BACK, REST = (
    GuiCommand.GO_UP,
    GuiCommand.GO_DOWN,
    GuiCommand.SELECT,
    GuiCommand.GO_BACK,
    GuiCommand.DO_NOTHING,
)


@pytest.fixture()
def ctx(runtime, state):
    return runtime.menu_context(state)


@pytest.fixture()
def put_target(ctx):
    return parse_goal_spec("put cup1 table", ctx)


@pytest.fixture()
def put_policy(runtime, ctx, put_target):
    return runtime.policy(ctx, put_target)


def test_action_level_lists_feasible_templates(ctx):
    view = derive(ctx, MenuState())
    assert view.level == "action"
    assert view.items == ("drink", "pour", "put")


def test_cursor_clamps_at_edges(ctx):
    ms = MenuState()
    assert transition(ctx, ms, UP).cursor == 0
    n = len(derive(ctx, ms).items)
    for _ in range(n + 3):
        ms = transition(ctx, ms, DOWN)
    assert ms.cursor == n - 1


def test_select_descends_and_go_back_undoes(ctx):
    ms = MenuState()
    ms = transition(ctx, ms, DOWN)
    ms = transition(ctx, ms, DOWN)
    ms = transition(ctx, ms, SEL)
    assert ms.history == (("action", "put"),)
    assert derive(ctx, ms).level == "param"
    back = transition(ctx, ms, BACK)
    assert back.history == ()
    assert back.cursor == 0


def test_do_nothing_is_identity(ctx):
    ms = transition(ctx, MenuState(), DOWN)
    assert transition(ctx, ms, REST) == ms


def test_person_parameter_auto_resolves(ctx):
    # drink has parameters (person, liquid); the single person never shows a menu
    ms = MenuState()
    ms = transition(ctx, ms, SEL)  # select "drink"
    view = derive(ctx, ms)
    assert view.level == "param"
    assert view.template.params[0].resolved == "unique"
    assert view.param_idx == 1  # straight to the liquid parameter


def test_goal_spec_parsing(ctx):
    target = parse_goal_spec("put cup(content=empty) table", ctx)
    assert dict(target.unique) == {"?i": "cup1", "?l": "table"}
    target2 = parse_goal_spec("put cup1 any", ctx)
    assert dict(target2.any_params) == {"?l": frozenset()}


def test_goal_spec_ambiguous_rejected(ctx):
    with pytest.raises(GoalSpecError, match="matches 2"):
        parse_goal_spec("put cup table", ctx)


def test_goal_spec_unknown_action_rejected(ctx):
    with pytest.raises(GoalSpecError):
        parse_goal_spec("teleport cup1 table", ctx)


def test_scripted_user_walks_shortest_path(ctx, put_policy):
    ms = MenuState()
    steps = 0
    while (cmd := scripted_user(put_policy, ms)) is not None:
        ms = transition(ctx, ms, cmd)
        steps += 1
        assert steps < 50
    view = derive(ctx, ms)
    assert view.level == "done"
    assert goal_matches(ctx, view.template, put_policy.target)
    assert steps == put_policy.minimal_steps()


def test_cursor_above_target_means_go_down(ctx, put_policy):
    # "put" sits at index 2; from the top the shortest path starts with go_down
    assert put_policy.intended(MenuState()) == DOWN


def test_cursor_on_target_means_select(ctx, put_policy):
    ms = MenuState(cursor=2)
    assert put_policy.intended(ms) == SEL


def test_error_recovery_recomputes_shortest_path(ctx, put_policy):
    ms = MenuState(cursor=2)  # on "put"
    perturbed = transition(ctx, ms, UP)  # erroneous go_up
    assert put_policy.distance(perturbed) == put_policy.distance(ms) + 1
    assert put_policy.intended(perturbed) == DOWN  # moves back toward target


def test_distance_matches_bfs_oracle(ctx, put_policy):
    def is_goal(ms):
        view = derive(ctx, ms)
        return view.level == "done" and goal_matches(ctx, view.template, put_policy.target)

    oracle = menu_bfs_distance(
        ctx, MenuState(), is_goal, transition, (UP, DOWN, SEL, BACK)
    )
    assert put_policy.minimal_steps() == oracle

    # also from a few perturbed states
    for cmds in ((DOWN,), (DOWN, DOWN), (SEL,), (DOWN, SEL), (DOWN, DOWN, SEL, DOWN)):
        ms = MenuState()
        for c in cmds:
            ms = transition(ctx, ms, c)
        assert put_policy.distance(ms) == menu_bfs_distance(
            ctx, ms, is_goal, transition, (UP, DOWN, SEL, BACK)
        )


def test_instructed_path_reaches_goal(ctx, put_policy):
    ms = MenuState()
    for cmd in put_policy.instructed_path():
        ms = transition(ctx, ms, cmd)
    view = derive(ctx, ms)
    assert view.level == "done"
    assert len(put_policy.instructed_path()) == put_policy.minimal_steps()


def test_identical_inputs_give_identical_menus(ctx):
    a = derive(ctx, MenuState())
    b = derive(ctx, MenuState())
    assert a == b
    ms = transition(ctx, MenuState(), SEL)
    assert derive(ctx, ms).items == derive(ctx, ms).items


def test_drink_target_distance(ctx, runtime):
    target = parse_goal_spec("drink user1 water", ctx)
    policy = runtime.policy(ctx, target)
    # select drink (cursor already on it), then water is the second liquid item
    assert policy.minimal_steps() == 3
