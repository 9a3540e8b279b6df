"""Data model for the typed STRIPS planning core.

Atoms are plain tuples ``(predicate, arg0, arg1, ...)`` of strings; states are
frozensets of atoms.  Everything here is immutable so states can be hashed and
shared freely between searches.
"""

from __future__ import annotations

from dataclasses import dataclass, field

Atom = tuple[str, ...]
State = frozenset


class PlanningError(Exception):
    """Base class for planner failures."""


class NoPlanFound(PlanningError):
    """The reachable state space was exhausted without satisfying the goal."""


class BudgetExhausted(PlanningError):
    """Search hit the expansion budget before proving (un)solvability."""


@dataclass(frozen=True)
class TypeHierarchy:
    """Type lattice rooted at ``object``; maps each type to its parent."""

    parents: dict[str, str | None] = field(default_factory=dict)

    def __contains__(self, name: str) -> bool:
        return name == "object" or name in self.parents

    def is_subtype(self, name: str, ancestor: str) -> bool:
        if ancestor == "object":
            return name in self
        cur: str | None = name
        while cur is not None:
            if cur == ancestor:
                return True
            cur = self.parents.get(cur)
        return False

    def ancestors(self, name: str) -> list[str]:
        out = []
        cur: str | None = name
        while cur is not None and cur != "object":
            out.append(cur)
            cur = self.parents.get(cur)
        out.append("object")
        return out


@dataclass(frozen=True)
class Parameter:
    name: str
    type_name: str


@dataclass(frozen=True)
class ActionSchema:
    name: str
    parameters: tuple[Parameter, ...]
    precondition: tuple[Atom, ...]
    # (a, b) pairs that must ground to distinct / identical objects
    neq_constraints: tuple[tuple[str, str], ...]
    eq_constraints: tuple[tuple[str, str], ...]
    add_effects: tuple[Atom, ...]
    del_effects: tuple[Atom, ...]

    def variables(self) -> set[str]:
        return {p.name for p in self.parameters}


@dataclass(frozen=True)
class GoalTemplateSpec:
    """Action-anchored goal offered in the GUI: parameters plus a condition.

    ``condition`` atoms may mention template parameters and extra existential
    variables from ``exists``; both are resolved when the goal is compiled.
    """

    name: str
    parameters: tuple[Parameter, ...]
    exists: tuple[Parameter, ...]
    condition: tuple[Atom, ...]


@dataclass(frozen=True)
class Domain:
    name: str
    types: TypeHierarchy
    predicates: dict[str, tuple[str, ...]]  # name -> parameter types
    actions: tuple[ActionSchema, ...]
    goal_templates: tuple[GoalTemplateSpec, ...] = ()

    def action(self, name: str) -> ActionSchema:
        for a in self.actions:
            if a.name == name:
                return a
        raise KeyError(name)

    def goal_template(self, name: str) -> GoalTemplateSpec:
        for t in self.goal_templates:
            if t.name == name:
                return t
        raise KeyError(name)


@dataclass(frozen=True)
class ExistentialGoal:
    """Conjunctive goal with optional existential variables.

    ``ground`` holds fully ground conjuncts; ``variables`` existential
    parameters appearing in ``open_conjuncts``.  ``restrictions`` optionally
    narrows a variable to an explicit candidate set (used when a GUI reference
    carries constraints that are not planner predicates).
    """

    ground: tuple[Atom, ...] = ()
    variables: tuple[Parameter, ...] = ()
    open_conjuncts: tuple[Atom, ...] = ()
    restrictions: tuple[tuple[str, tuple[str, ...]], ...] = ()

    def is_ground(self) -> bool:
        return not self.variables

    def allowed(self, var: str) -> tuple[str, ...] | None:
        for name, objs in self.restrictions:
            if name == var:
                return objs
        return None


@dataclass(frozen=True)
class Problem:
    domain: Domain
    name: str
    objects: dict[str, str]  # object -> type
    init: State
    goal: ExistentialGoal

    def objects_of_type(self, type_name: str) -> list[str]:
        return sorted(
            o for o, t in self.objects.items() if self.domain.types.is_subtype(t, type_name)
        )


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    precondition: frozenset
    add_effects: frozenset
    del_effects: frozenset

    @property
    def signature(self) -> str:
        return " ".join((self.name,) + self.args)

    def applicable(self, state: State) -> bool:
        return self.precondition <= state

    def apply(self, state: State) -> State:
        return (state - self.del_effects) | self.add_effects


@dataclass(frozen=True)
class CompiledGoal:
    """Existential goal compiled to enumerated witness conjunctions."""

    witnesses: tuple[frozenset, ...]

    def satisfied(self, state: State) -> bool:
        return any(w <= state for w in self.witnesses)

    def unsat_count(self, state: State) -> int:
        return min(len(w - state) for w in self.witnesses)


@dataclass(frozen=True)
class Plan:
    steps: tuple[GroundAction, ...]

    @property
    def cost(self) -> int:
        return len(self.steps)

    def action_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for s in self.steps:
            counts[s.name] = counts.get(s.name, 0) + 1
        return counts

    def as_lines(self) -> list[str]:
        return [s.signature for s in self.steps]


@dataclass(frozen=True)
class ValidationResult:
    valid: bool
    failing_step: int | None = None  # index of the first violated step, len(steps) if goal fails
    reason: str = ""
