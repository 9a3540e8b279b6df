"""Simulated BCI-steered robotic service assistant.

A noisy five-command channel drives a goal-formulation menu; a task planner
turns the chosen goal into an action sequence; a simulated mobile manipulator
executes it with motion planning and failure recovery; an evaluation harness
produces Table-style statistics.
"""

from .channel import (
    COMMANDS,
    MENTAL_TASKS,
    ConfusionMatrix,
    DecodedEvent,
    GuiCommand,
    ParadigmSchedule,
    emit,
    symmetric_matrix,
)
from .evaluation import RunLog, RunMetrics, metrics, permutation_test, rate_run, snr
from .menu import InstructedGoal, MenuContext, MenuPolicy, MenuState, parse_goal_spec
from .references import (
    GoalTemplate,
    Individual,
    Reference,
    RefinementOption,
    Relational,
    Typename,
    available_refinements,
    feasible_goal_types,
    finalize_goal,
    query,
    refine,
)
from .runner import RunConfig, ScenarioRuntime, run_batch, run_session
from .scenario import Scenario, load_default_scenario, load_scenario
from .worldmodel import ChangeEvent, WorldModel, WorldObject, WorldState

__version__ = "0.1.0"

__all__ = [
    "COMMANDS",
    "ChangeEvent",
    "ConfusionMatrix",
    "DecodedEvent",
    "GoalTemplate",
    "GuiCommand",
    "Individual",
    "InstructedGoal",
    "MENTAL_TASKS",
    "MenuContext",
    "MenuPolicy",
    "MenuState",
    "ParadigmSchedule",
    "Reference",
    "RefinementOption",
    "Relational",
    "RunConfig",
    "RunLog",
    "RunMetrics",
    "Scenario",
    "ScenarioRuntime",
    "Typename",
    "WorldModel",
    "WorldObject",
    "WorldState",
    "available_refinements",
    "emit",
    "feasible_goal_types",
    "finalize_goal",
    "load_default_scenario",
    "load_scenario",
    "metrics",
    "parse_goal_spec",
    "permutation_test",
    "query",
    "rate_run",
    "refine",
    "run_batch",
    "run_session",
    "snr",
    "symmetric_matrix",
]
