"""Domain-independent task planning: PDDL-subset parsing, grounding, A* search."""

from .grounding import compile_goal, goal_satisfied, ground_actions, prune_static
from .model import (
    ActionSchema,
    BudgetExhausted,
    CompiledGoal,
    Domain,
    ExistentialGoal,
    GoalTemplateSpec,
    GroundAction,
    NoPlanFound,
    Parameter,
    Plan,
    PlanningError,
    Problem,
    TypeHierarchy,
    ValidationResult,
)
from .parser import ParseError, parse, parse_domain, parse_problem
from .search import final_state, has_plan, plan, validate_plan

__all__ = [
    "ActionSchema",
    "BudgetExhausted",
    "CompiledGoal",
    "Domain",
    "ExistentialGoal",
    "GoalTemplateSpec",
    "GroundAction",
    "NoPlanFound",
    "Parameter",
    "ParseError",
    "Plan",
    "PlanningError",
    "Problem",
    "TypeHierarchy",
    "ValidationResult",
    "compile_goal",
    "final_state",
    "goal_satisfied",
    "ground_actions",
    "has_plan",
    "parse",
    "parse_domain",
    "parse_problem",
    "plan",
    "prune_static",
    "validate_plan",
]
