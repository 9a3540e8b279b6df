from __future__ import annotations

import pytest

from bcibot.compiler import compile_problem
from bcibot.planner.search import validate_plan
from bcibot.references import (
    RESOLVED_ANY,
    RESOLVED_UNIQUE,
    GoalTemplate,
    Individual,
    OpenParameterError,
    Reference,
    ReferenceError_,
    Relational,
    Typename,
    available_refinements,
    feasible_goal_types,
    finalize_goal,
    query,
    refine,
)
from bcibot.worldmodel import WorldModel, WorldObject


@pytest.fixture()
def two_cup_state(domain):
    world = WorldModel(domain.types)
    world.upsert_object(
        WorldObject.make(id="cup1", type_name="cup", attributes={"content": "water"})
    )
    world.upsert_object(
        WorldObject.make(id="cup2", type_name="cup", attributes={"content": "apple-juice"})
    )
    return world.snapshot()


def test_refinements_include_content_options(domain, two_cup_state):
    ref = Reference(conjuncts=(Typename("cup"),))
    options = available_refinements(ref, two_cup_state, domain.types)
    by_label = {o.constraint.label(): o.resulting_count for o in options}
    assert by_label["content = water"] == 1
    assert by_label["content = apple-juice"] == 1


def test_single_candidate_has_no_refinements(domain):
    world = WorldModel(domain.types)
    world.upsert_object(WorldObject.make(id="cup1", type_name="cup"))
    state = world.snapshot()
    assert available_refinements(Reference(conjuncts=(Typename("cup"),)), state, domain.types) == []


def test_options_always_strictly_shrink(domain, state):
    # exhaustive over the standard scenario: every offered option shrinks
    for base in (Reference(), Reference(conjuncts=(Typename("item"),))):
        current = len(query(base, state, domain.types))
        for opt in available_refinements(base, state, domain.types):
            assert 1 <= opt.resulting_count < current


def test_option_ordering_deterministic(domain, state):
    ref = Reference(conjuncts=(Typename("vessel"),))
    a = available_refinements(ref, state, domain.types)
    b = available_refinements(ref, state, domain.types)
    assert a == b
    kinds = [o.constraint.kind for o in a]
    assert kinds == sorted(kinds, key=["individual", "typename", "relational"].index)


def test_refine_shrinks_candidates(domain, two_cup_state):
    ref = Reference(conjuncts=(Typename("cup"),))
    refined = refine(ref, Relational("content", "water"), two_cup_state, domain.types)
    assert query(refined, two_cup_state, domain.types) == {"cup1"}


def test_refine_duplicate_rejected(domain, two_cup_state):
    ref = Reference(conjuncts=(Typename("cup"),))
    with pytest.raises(ReferenceError_):
        refine(ref, Typename("cup"), two_cup_state, domain.types)


def test_refine_individual_pins_object(domain, two_cup_state):
    ref = Reference(conjuncts=(Typename("cup"),))
    refined = refine(ref, Individual("cup1"), two_cup_state, domain.types)
    assert query(refined, two_cup_state, domain.types) == {"cup1"}


def test_refine_non_offered_constraint_rejected(domain, two_cup_state):
    ref = Reference(conjuncts=(Typename("cup"),))
    with pytest.raises(ReferenceError_):
        refine(ref, Relational("content", "oil"), two_cup_state, domain.types)


def test_refinement_chain_monotone(domain, state):
    ref = Reference()
    counts = [len(query(ref, state, domain.types))]
    while True:
        options = available_refinements(ref, state, domain.types)
        if not options:
            break
        ref = refine(ref, options[0].constraint, state, domain.types)
        counts.append(len(query(ref, state, domain.types)))
    assert all(a > b for a, b in zip(counts, counts[1:]))
    assert counts[-1] >= 1


def test_options_shrink_over_random_states(domain):
    # exhaustive property over generated worlds of up to 20 objects
    import numpy as np

    rng = np.random.default_rng(99)
    types = ["cup", "bottle", "shelf", "table", "person"]
    contents = ["water", "apple-juice", "empty"]
    for _ in range(60):
        world = WorldModel(domain.types)
        n = int(rng.integers(1, 21))
        for i in range(n):
            attrs = {}
            if rng.random() < 0.7:
                attrs["content"] = contents[int(rng.integers(0, 3))]
            if rng.random() < 0.3:
                attrs["color"] = ["red", "blue"][int(rng.integers(0, 2))]
            world.upsert_object(
                WorldObject.make(
                    id=f"o{i}", type_name=types[int(rng.integers(0, 5))], attributes=attrs
                )
            )
        state = world.snapshot()
        for base in (Reference(), Reference(conjuncts=(Typename("vessel"),))):
            try:
                current = len(query(base, state, domain.types))
            except Exception:
                continue
            if current == 0:
                continue
            for opt in available_refinements(base, state, domain.types):
                assert 1 <= opt.resulting_count < current
                narrowed = base.with_conjunct(opt.constraint)
                assert len(query(narrowed, state, domain.types)) == opt.resulting_count


# -- finalize_goal ----------------------------------------------------------------


def build_put_template(domain, state, item_spec, loc_spec):
    tpl = GoalTemplate.fresh(domain, "put")
    for idx, (conjuncts, resolved) in enumerate((item_spec, loc_spec)):
        param = tpl.params[idx]
        ref = param.reference
        for c in conjuncts:
            ref = ref.with_conjunct(c)
        from dataclasses import replace

        tpl = tpl.with_param(idx, replace(param, reference=ref, resolved=resolved))
    return tpl


def test_finalize_unique_and_any(domain, state):
    tpl = build_put_template(
        domain,
        state,
        ((Individual("cup1"),), RESOLVED_UNIQUE),
        ((Typename("shelf"),), RESOLVED_ANY),
    )
    goal = finalize_goal(tpl, state, domain)
    assert goal.ground == ()
    assert goal.open_conjuncts == (("on", "cup1", "?l"),)
    assert [v.name for v in goal.variables] == ["?l"]
    assert goal.variables[0].type_name == "shelf"
    assert goal.allowed("?l") == ("shelf1", "shelf2")


def test_finalize_fully_ground(domain, state):
    tpl = build_put_template(
        domain,
        state,
        ((Individual("cup1"),), RESOLVED_UNIQUE),
        ((Individual("table"),), RESOLVED_UNIQUE),
    )
    goal = finalize_goal(tpl, state, domain)
    assert goal.is_ground()
    assert goal.ground == (("on", "cup1", "table"),)


def test_finalize_open_parameter_rejected(domain, state):
    tpl = build_put_template(
        domain, state, ((Individual("cup1"),), RESOLVED_UNIQUE), ((), "open")
    )
    with pytest.raises(OpenParameterError):
        finalize_goal(tpl, state, domain)


# -- feasible_goal_types ------------------------------------------------------------


def problem_builder(domain):
    return lambda state, goal: compile_problem(domain, state, goal)


def test_drink_feasible_with_bottle_and_cup(domain, state, runtime):
    names = feasible_goal_types(state, domain, problem_builder(domain))
    assert "drink" in names
    plan = runtime.plan_for(state, _drink_goal(domain, state))
    assert plan is not None and plan.cost > 1


def _drink_goal(domain, state):
    from dataclasses import replace

    tpl = GoalTemplate.fresh(domain, "drink")
    tpl = GoalTemplate(
        tpl.action_name, tuple(replace(p, resolved=RESOLVED_ANY) for p in tpl.params)
    )
    return finalize_goal(tpl, state, domain)


def test_pour_without_bottle_excluded(domain):
    world = WorldModel(domain.types)
    world.upsert_object(WorldObject.make(id="omnirob", type_name="robot", attributes={"gripper": "empty"}))
    world.upsert_object(
        WorldObject.make(id="cup1", type_name="cup", attributes={"content": "empty", "clean": "yes"})
    )
    state = world.snapshot()
    names = feasible_goal_types(state, domain, problem_builder(domain))
    assert "pour" not in names


def test_put_feasible_with_four_step_plan(domain, state, runtime):
    names = feasible_goal_types(state, domain, problem_builder(domain))
    assert "put" in names
    from bcibot.planner.model import ExistentialGoal

    plan = runtime.plan_for(state, ExistentialGoal(ground=(("on", "cup1", "table"),)))
    assert [s.name for s in plan.steps] == ["approach", "grasp", "approach", "drop"]


def test_feasible_goals_all_validate(domain, state):
    builder = problem_builder(domain)
    from bcibot.planner.search import plan as find_plan
    from bcibot.references import GoalTemplate as GT

    for name in feasible_goal_types(state, domain, builder):
        from dataclasses import replace

        tpl = GT.fresh(domain, name)
        tpl = GT(tpl.action_name, tuple(replace(p, resolved=RESOLVED_ANY) for p in tpl.params))
        goal = finalize_goal(tpl, state, domain)
        problem = builder(state, goal)
        result = find_plan(problem)
        assert validate_plan(problem, result).valid
