"""Grounding: instantiate action schemas and compile existential goals."""

from __future__ import annotations

from itertools import product

from .model import (
    ActionSchema,
    Atom,
    CompiledGoal,
    Domain,
    ExistentialGoal,
    GroundAction,
    Problem,
    State,
)


def _substitute(atom: Atom, binding: dict[str, str]) -> Atom:
    return (atom[0],) + tuple(binding.get(a, a) for a in atom[1:])


def ground_schema(schema: ActionSchema, problem: Problem) -> list[GroundAction]:
    """All typed instantiations of one schema (equality constraints applied)."""
    pools = [problem.objects_of_type(p.type_name) for p in schema.parameters]
    names = [p.name for p in schema.parameters]
    out = []
    for combo in product(*pools):
        binding = dict(zip(names, combo))
        if any(binding.get(a, a) == binding.get(b, b) for a, b in schema.neq_constraints):
            continue
        if any(binding.get(a, a) != binding.get(b, b) for a, b in schema.eq_constraints):
            continue
        out.append(
            GroundAction(
                name=schema.name,
                args=tuple(combo),
                precondition=frozenset(_substitute(a, binding) for a in schema.precondition),
                add_effects=frozenset(_substitute(a, binding) for a in schema.add_effects),
                del_effects=frozenset(_substitute(a, binding) for a in schema.del_effects),
            )
        )
    return out


def ground_actions(problem: Problem) -> list[GroundAction]:
    """Every ground action, sorted by signature for reproducible tie-breaking."""
    out: list[GroundAction] = []
    for schema in problem.domain.actions:
        out.extend(ground_schema(schema, problem))
    out.sort(key=lambda a: a.signature)
    return out


def static_predicates(domain: Domain) -> set[str]:
    """Predicates never touched by any effect."""
    touched = set()
    for a in domain.actions:
        touched.update(atom[0] for atom in a.add_effects)
        touched.update(atom[0] for atom in a.del_effects)
    return set(domain.predicates) - touched


def prune_static(actions: list[GroundAction], problem: Problem) -> list[GroundAction]:
    """Drop actions whose static preconditions are false in init (a search-side
    reachability filter; `ground_actions` itself stays the full instantiation)."""
    statics = static_predicates(problem.domain)
    kept = []
    for act in actions:
        ok = all(atom in problem.init for atom in act.precondition if atom[0] in statics)
        if ok:
            kept.append(act)
    return kept


def compile_goal(problem: Problem) -> CompiledGoal:
    """Enumerate existential witnesses into ground conjunctions.

    Witness tuples that falsify a static conjunct are dropped immediately, so
    the surviving set stays small for the scenario sizes at hand.
    """
    goal = problem.goal
    statics = static_predicates(problem.domain)
    if goal.is_ground():
        return CompiledGoal(witnesses=(frozenset(goal.ground),))

    pools = []
    for v in goal.variables:
        pool = problem.objects_of_type(v.type_name)
        allowed = goal.allowed(v.name)
        if allowed is not None:
            pool = [o for o in pool if o in allowed]
        pools.append(pool)
    names = [v.name for v in goal.variables]
    witnesses = []
    for combo in product(*pools):
        binding = dict(zip(names, combo))
        conjuncts = [_substitute(a, binding) for a in goal.open_conjuncts]
        if any(a[0] in statics and a not in problem.init for a in conjuncts):
            continue
        witnesses.append(frozenset(goal.ground) | frozenset(conjuncts))
    if not witnesses:
        # no witness can ever hold; keep one unsatisfiable stand-in
        witnesses.append(frozenset({("=", "goal", "unreachable")}))
    return CompiledGoal(witnesses=tuple(witnesses))


def goal_satisfied(goal: ExistentialGoal, state: State, problem: Problem) -> bool:
    """Direct (non-compiled) goal check, used by plan validation."""
    if not frozenset(goal.ground) <= state:
        return False
    if goal.is_ground():
        return True
    pools = []
    for v in goal.variables:
        pool = problem.objects_of_type(v.type_name)
        allowed = goal.allowed(v.name)
        if allowed is not None:
            pool = [o for o in pool if o in allowed]
        pools.append(pool)
    names = [v.name for v in goal.variables]
    for combo in product(*pools):
        binding = dict(zip(names, combo))
        if all(_substitute(a, binding) in state for a in goal.open_conjuncts):
            return True
    return False
