"""Grounded A* search with a goal-count heuristic, plus plan validation.

The heuristic counts unsatisfied goal conjuncts (minimum over witnesses) and is
divided by the largest number of goal conjuncts any single ground action can
add, which keeps it admissible and consistent; when that divisor is 1 the
heuristic is plain goal-count, and when the count is 0 everywhere the search
degenerates to uniform cost.  Ties break on the lexical order of ground action
signatures, so plans are reproducible.
"""

from __future__ import annotations

import heapq
from math import ceil

from .grounding import compile_goal, goal_satisfied, ground_actions, prune_static
from .model import (
    BudgetExhausted,
    CompiledGoal,
    GroundAction,
    NoPlanFound,
    Plan,
    Problem,
    State,
    ValidationResult,
)

DEFAULT_BUDGET = 200_000


def _max_goal_adds(actions: list[GroundAction], goal: CompiledGoal) -> int:
    goal_atoms = frozenset().union(*goal.witnesses) if goal.witnesses else frozenset()
    best = 1
    for a in actions:
        best = max(best, len(a.add_effects & goal_atoms))
    return best


def plan(problem: Problem, budget: int = DEFAULT_BUDGET, max_length: int | None = None) -> Plan:
    """Optimal (unit-cost) plan for ``problem``.

    Raises ``NoPlanFound`` when the reachable space is exhausted and
    ``BudgetExhausted`` when ``budget`` expansions were spent first.
    """
    goal = compile_goal(problem)
    init: State = problem.init
    if goal.satisfied(init):
        return Plan(steps=())

    actions = prune_static(ground_actions(problem), problem)
    divisor = _max_goal_adds(actions, goal)

    def h(state: State) -> int:
        return ceil(goal.unsat_count(state) / divisor)

    # entries: (f, g, tie, state, parent_key, action)
    open_heap: list[tuple[int, int, int, State]] = [(h(init), 0, 0, init)]
    parents: dict[State, tuple[State | None, GroundAction | None]] = {init: (None, None)}
    g_best: dict[State, int] = {init: 0}
    closed: set[State] = set()
    expansions = 0
    tie = 0

    while open_heap:
        f, g, _, state = heapq.heappop(open_heap)
        if state in closed:
            continue
        closed.add(state)
        if goal.satisfied(state):
            steps = []
            cur: State | None = state
            while cur is not None:
                parent, act = parents[cur]
                if act is not None:
                    steps.append(act)
                cur = parent
            steps.reverse()
            return Plan(steps=tuple(steps))
        expansions += 1
        if expansions > budget:
            raise BudgetExhausted(f"exhausted {budget} expansions")
        if max_length is not None and g >= max_length:
            continue
        for act in actions:
            if not act.applicable(state):
                continue
            nxt = act.apply(state)
            ng = g + 1
            if nxt in closed or g_best.get(nxt, ng + 1) <= ng:
                continue
            g_best[nxt] = ng
            parents[nxt] = (state, act)
            tie += 1
            heapq.heappush(open_heap, (ng + h(nxt), ng, tie, nxt))

    raise NoPlanFound("reachable state space exhausted")


def has_plan(problem: Problem, budget: int = DEFAULT_BUDGET, max_length: int | None = None) -> bool:
    try:
        plan(problem, budget=budget, max_length=max_length)
        return True
    except NoPlanFound:
        return False
    except BudgetExhausted:
        return False


def validate_plan(problem: Problem, the_plan: Plan) -> ValidationResult:
    """Simulate step application; independent of how the plan was found."""
    state: State = problem.init
    for i, step in enumerate(the_plan.steps):
        if not step.applicable(state):
            missing = sorted(step.precondition - state)
            return ValidationResult(
                valid=False,
                failing_step=i,
                reason=f"precondition of '{step.signature}' not met: {missing[0]}",
            )
        state = step.apply(state)
    if not goal_satisfied(problem.goal, state, problem):
        return ValidationResult(
            valid=False, failing_step=len(the_plan.steps), reason="goal not satisfied in final state"
        )
    return ValidationResult(valid=True)


def final_state(problem: Problem, the_plan: Plan) -> State:
    state: State = problem.init
    for step in the_plan.steps:
        state = step.apply(state)
    return state
