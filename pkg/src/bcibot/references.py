"""Referring expressions and incremental goal formulation.

A reference is a conjunction of flat facts about a single free variable; it is
narrowed step by step by adding constraints, each of which must strictly shrink
the candidate set while keeping it non-empty.  Goal templates pair an action
with one reference per parameter; once every parameter is pinned (uniquely or
declared "any is acceptable") the template compiles to a planner goal.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .planner.model import Domain, ExistentialGoal, Parameter, TypeHierarchy
from .worldmodel import WorldObject, WorldState


class ReferenceError_(ValueError):
    """Malformed reference or invalid refinement."""


class UnknownTermError(ReferenceError_):
    """Reference mentions a type or attribute key unknown to the world."""


KIND_ORDER = {"individual": 0, "typename": 1, "relational": 2}

#: bookkeeping attributes never offered as menu refinements (still queryable)
INTERNAL_ATTR_KEYS = frozenset({"home", "worksurface", "gripper"})


@dataclass(frozen=True)
class Individual:
    name: str

    kind = "individual"

    def label(self) -> str:
        return self.name

    def matches(self, obj: WorldObject, types: TypeHierarchy) -> bool:
        return obj.id == self.name


@dataclass(frozen=True)
class Typename:
    type_name: str

    kind = "typename"

    def label(self) -> str:
        return f"a {self.type_name}"

    def matches(self, obj: WorldObject, types: TypeHierarchy) -> bool:
        return types.is_subtype(obj.type_name, self.type_name)


@dataclass(frozen=True)
class Relational:
    key: str
    value: str

    kind = "relational"

    def label(self) -> str:
        return f"{self.key} = {self.value}"

    def matches(self, obj: WorldObject, types: TypeHierarchy) -> bool:
        return obj.attr(self.key) == self.value


Conjunct = Individual | Typename | Relational


@dataclass(frozen=True)
class Reference:
    """Conjunction of constraints on one free variable."""

    free_var: str = "?x"
    conjuncts: tuple[Conjunct, ...] = ()

    def with_conjunct(self, c: Conjunct) -> "Reference":
        if c in self.conjuncts:
            raise ReferenceError_(f"duplicate conjunct {c.label()!r}")
        return replace(self, conjuncts=self.conjuncts + (c,))


def _known_attr_keys(state: WorldState) -> set[str]:
    keys: set[str] = set()
    for obj in state.objects:
        keys.update(k for k, _ in obj.attributes)
    return keys


def query(ref: Reference, state: WorldState, types: TypeHierarchy) -> set[str]:
    """Ids of all objects every conjunct holds of; empty conjunction matches all."""
    for c in ref.conjuncts:
        if isinstance(c, Typename) and c.type_name not in types:
            raise UnknownTermError(f"unknown type '{c.type_name}'")
        if isinstance(c, Relational) and c.key not in _known_attr_keys(state):
            raise UnknownTermError(f"unknown attribute '{c.key}'")
    return {
        obj.id for obj in state.objects if all(c.matches(obj, types) for c in ref.conjuncts)
    }


@dataclass(frozen=True)
class RefinementOption:
    constraint: Conjunct
    resulting_count: int


def _sort_key(opt: RefinementOption) -> tuple[int, str]:
    return (KIND_ORDER[opt.constraint.kind], opt.constraint.label())


def available_refinements(
    ref: Reference, state: WorldState, types: TypeHierarchy, base_type: str | None = None
) -> list[RefinementOption]:
    """Every constraint that strictly shrinks the candidate set, kept non-empty.

    ``base_type`` restricts the initial candidate pool the way a typed goal
    parameter does.
    """
    base = Reference(ref.free_var, ref.conjuncts)
    if base_type is not None:
        pool = {
            o.id
            for o in state.objects
            if types.is_subtype(o.type_name, base_type)
            and all(c.matches(o, types) for c in ref.conjuncts)
        }
    else:
        pool = query(ref, state, types)
    if not pool:
        raise ReferenceError_("reference has no candidates; cannot refine")
    current = len(pool)
    if current == 1:
        return []

    objs = [o for o in state.objects if o.id in pool]
    candidates: set[Conjunct] = set()
    for o in objs:
        candidates.add(Individual(o.id))
        for t in types.ancestors(o.type_name):
            if t != "object":
                candidates.add(Typename(t))
        for k, v in o.attributes:
            if k not in INTERNAL_ATTR_KEYS:
                candidates.add(Relational(k, str(v)))

    options = []
    for c in candidates:
        if c in base.conjuncts:
            continue
        count = sum(1 for o in objs if c.matches(o, types))
        if 1 <= count < current:
            options.append(RefinementOption(constraint=c, resulting_count=count))
    options.sort(key=_sort_key)
    return options


def refine(
    ref: Reference,
    constraint: Conjunct,
    state: WorldState,
    types: TypeHierarchy,
    base_type: str | None = None,
) -> Reference:
    opts = available_refinements(ref, state, types, base_type=base_type)
    if constraint not in {o.constraint for o in opts}:
        raise ReferenceError_(f"{constraint.label()!r} is not an available refinement")
    return ref.with_conjunct(constraint)


RESOLVED_OPEN = "open"
RESOLVED_UNIQUE = "unique"
RESOLVED_ANY = "any-acceptable"


@dataclass(frozen=True)
class ParamRef:
    """One goal parameter: its reference plus how it has been pinned down."""

    var: str
    base_type: str
    reference: Reference
    resolved: str = RESOLVED_OPEN

    def candidates(self, state: WorldState, types: TypeHierarchy) -> set[str]:
        return {
            o.id
            for o in state.objects
            if types.is_subtype(o.type_name, self.base_type)
            and all(c.matches(o, types) for c in self.reference.conjuncts)
        }


@dataclass(frozen=True)
class GoalTemplate:
    action_name: str
    params: tuple[ParamRef, ...]

    @staticmethod
    def fresh(domain: Domain, action_name: str) -> "GoalTemplate":
        spec = domain.goal_template(action_name)
        params = tuple(
            ParamRef(var=p.name, base_type=p.type_name, reference=Reference(free_var=p.name))
            for p in spec.parameters
        )
        return GoalTemplate(action_name=action_name, params=params)

    def with_param(self, idx: int, param: ParamRef) -> "GoalTemplate":
        params = list(self.params)
        params[idx] = param
        return GoalTemplate(self.action_name, tuple(params))


class OpenParameterError(ValueError):
    """finalize_goal called while a parameter is still open."""


def _most_specific_type(param: ParamRef, types: TypeHierarchy) -> str:
    """Tightest Typename conjunct (fewest supertypes wins), else the base type."""
    best = param.base_type
    best_depth = len(types.ancestors(best))
    for c in param.reference.conjuncts:
        if isinstance(c, Typename):
            depth = len(types.ancestors(c.type_name))
            if depth > best_depth and types.is_subtype(c.type_name, best):
                best, best_depth = c.type_name, depth
    return best


def finalize_goal(tpl: GoalTemplate, state: WorldState, domain: Domain) -> ExistentialGoal:
    """Compile the template into an existentially quantified conjunctive goal."""
    spec = domain.goal_template(tpl.action_name)
    types = domain.types

    substitution: dict[str, str] = {}
    variables: list[Parameter] = []
    restrictions: dict[str, tuple[str, ...]] = {}

    for param in tpl.params:
        if param.resolved == RESOLVED_OPEN:
            raise OpenParameterError(f"parameter {param.var} is still open")
        cands = sorted(param.candidates(state, types))
        if param.resolved == RESOLVED_UNIQUE:
            if len(cands) != 1:
                raise OpenParameterError(
                    f"parameter {param.var} marked unique but has {len(cands)} candidates"
                )
            substitution[param.var] = cands[0]
        else:  # any-acceptable: stays existential, restricted to current candidates
            variables.append(Parameter(param.var, _most_specific_type(param, types)))
            restrictions[param.var] = tuple(cands)

    variables.extend(spec.exists)

    ground = []
    open_conjuncts = []
    var_names = {v.name for v in variables}
    for atom in spec.condition:
        resolved = (atom[0],) + tuple(substitution.get(a, a) for a in atom[1:])
        if any(a in var_names for a in resolved[1:]):
            open_conjuncts.append(resolved)
        else:
            ground.append(resolved)

    return ExistentialGoal(
        ground=tuple(ground),
        variables=tuple(variables),
        open_conjuncts=tuple(open_conjuncts),
        restrictions=tuple(sorted(restrictions.items())),
    )


def feasible_goal_types(
    state: WorldState,
    domain: Domain,
    problem_builder,
    horizon_budget: int = 30,
    search_budget: int = 100_000,
) -> list[str]:
    """Names of goal templates for which some instantiation has a plan.

    ``problem_builder(state, goal)`` must return a planner Problem; the check
    leaves every parameter existential, so a template is feasible as soon as
    one binding is reachable within the horizon.
    """
    from .planner.search import has_plan

    names = []
    for spec in domain.goal_templates:
        tpl = GoalTemplate.fresh(domain, spec.name)
        tpl = GoalTemplate(
            tpl.action_name, tuple(replace(p, resolved=RESOLVED_ANY) for p in tpl.params)
        )
        try:
            goal = finalize_goal(tpl, state, domain)
        except OpenParameterError:
            continue
        if any(not restriction for _, restriction in goal.restrictions):
            continue  # a parameter has no candidate objects at all
        problem = problem_builder(state, goal)
        if has_plan(problem, budget=search_budget, max_length=horizon_budget):
            names.append(spec.name)
    return sorted(names)
