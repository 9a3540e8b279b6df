"""GUI menu model: goal formulation as a navigable, undoable decision tree.

The machine is purely functional: a ``MenuState`` is just the decision history
plus a cursor, and every view is derived from it against a world snapshot.
That makes states hashable, so shortest command paths (used both by the
scripted user and by the path-optimality metric) come from plain BFS over the
real transition graph.

Levels: pick a goal action; then, per parameter, pick refinements until the
candidate set is a singleton (auto-resolves) or declare "any is acceptable".
``go_back`` undoes the most recent decision.  Once every parameter is
resolved the state is final: the goal is handed to the planner and the next
``select`` already confirms the first robot action.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .channel import GuiCommand
from .planner.model import Domain
from .references import (
    RESOLVED_ANY,
    RESOLVED_UNIQUE,
    Conjunct,
    GoalTemplate,
    Individual,
    Relational,
    Typename,
    available_refinements,
)
from .worldmodel import WorldState

Decision = tuple  # ("action", name) | ("refine", param_idx, Conjunct) | ("any", param_idx)


class MenuError(ValueError):
    pass


@dataclass(frozen=True)
class MenuState:
    history: tuple[Decision, ...] = ()
    cursor: int = 0


@dataclass(frozen=True)
class MenuContext:
    domain: Domain
    state: WorldState
    template_names: tuple[str, ...]  # feasible goal actions, sorted


@dataclass(frozen=True)
class DerivedMenu:
    level: str  # "action" | "param" | "done"
    items: tuple[str, ...] = ()
    options: tuple[Decision, ...] = ()
    template: GoalTemplate | None = None
    param_idx: int | None = None


def _replay(ctx: MenuContext, history: tuple[Decision, ...]) -> GoalTemplate:
    tpl = GoalTemplate.fresh(ctx.domain, history[0][1])
    for decision in history[1:]:
        tag = decision[0]
        idx = decision[1]
        param = tpl.params[idx]
        if tag == "refine":
            param = replace(param, reference=param.reference.with_conjunct(decision[2]))
        elif tag == "any":
            param = replace(param, resolved=RESOLVED_ANY)
        else:
            raise MenuError(f"unexpected decision {decision!r}")
        tpl = tpl.with_param(idx, param)
    return tpl


def _auto_resolve(ctx: MenuContext, tpl: GoalTemplate) -> tuple[GoalTemplate, int | None]:
    """Mark singleton parameters unique; return the first still-ambiguous one."""
    types = ctx.domain.types
    for idx, param in enumerate(tpl.params):
        if param.resolved != "open":
            continue
        count = len(param.candidates(ctx.state, types))
        if count == 1:
            tpl = tpl.with_param(idx, replace(param, resolved=RESOLVED_UNIQUE))
            continue
        if count == 0:
            raise MenuError(f"parameter {param.var} has no candidates")
        return tpl, idx
    return tpl, None


def derive(ctx: MenuContext, ms: MenuState) -> DerivedMenu:
    if not ms.history:
        options = tuple(("action", name) for name in ctx.template_names)
        return DerivedMenu(level="action", items=ctx.template_names, options=options)

    tpl = _replay(ctx, ms.history)
    tpl, open_idx = _auto_resolve(ctx, tpl)
    if open_idx is None:
        return DerivedMenu(level="done", template=tpl)

    param = tpl.params[open_idx]
    refinements = available_refinements(
        param.reference, ctx.state, ctx.domain.types, base_type=param.base_type
    )
    n = len(param.candidates(ctx.state, ctx.domain.types))
    items = [opt.constraint.label() for opt in refinements]
    options: list[Decision] = [("refine", open_idx, opt.constraint) for opt in refinements]
    items.append(f"any of the {n}")
    options.append(("any", open_idx))
    return DerivedMenu(
        level="param",
        items=tuple(items),
        options=tuple(options),
        template=tpl,
        param_idx=open_idx,
    )


def transition(ctx: MenuContext, ms: MenuState, command: GuiCommand) -> MenuState:
    view = derive(ctx, ms)
    if view.level == "done":
        # final states consume only go_back (reopen the last decision); the
        # session layer owns select/interrupt semantics from here on
        if command == GuiCommand.GO_BACK and ms.history:
            return MenuState(history=ms.history[:-1], cursor=0)
        return ms
    if command == GuiCommand.GO_UP:
        return replace(ms, cursor=max(0, ms.cursor - 1))
    if command == GuiCommand.GO_DOWN:
        return replace(ms, cursor=min(len(view.items) - 1, ms.cursor + 1))
    if command == GuiCommand.SELECT:
        decision = view.options[ms.cursor]
        return MenuState(history=ms.history + (decision,), cursor=0)
    if command == GuiCommand.GO_BACK:
        if ms.history:
            return MenuState(history=ms.history[:-1], cursor=0)
        return ms
    return ms  # do_nothing


def breadcrumb(ms: MenuState) -> tuple[str, ...]:
    out = []
    for d in ms.history:
        if d[0] == "action":
            out.append(d[1])
        elif d[0] == "refine":
            out.append(d[2].label())
        else:
            out.append("any")
    return tuple(out)


# -- instructed goals ---------------------------------------------------------


class GoalSpecError(ValueError):
    """Unsatisfiable or malformed instructed-goal specification."""


@dataclass(frozen=True)
class InstructedGoal:
    """Ground truth for a scripted session: what each parameter must become."""

    action: str
    unique: tuple[tuple[str, str], ...] = ()  # (param var, object id)
    any_params: tuple[tuple[str, frozenset], ...] = ()  # (param var, conjunct set)

    def unique_map(self) -> dict[str, str]:
        return dict(self.unique)

    def any_map(self) -> dict[str, frozenset]:
        return dict(self.any_params)


def parse_goal_spec(spec: str, ctx: MenuContext) -> InstructedGoal:
    """Parse e.g. ``put cup1 table``, ``put cup(content=water) any``.

    Each parameter token is an object id, a type name optionally followed by
    ``(attr=value, ...)`` constraints that must resolve to exactly one object,
    or ``any``.
    """
    tokens = spec.split()
    if not tokens:
        raise GoalSpecError("empty goal spec")
    action = tokens[0]
    if action not in {t.name for t in ctx.domain.goal_templates}:
        raise GoalSpecError(f"unknown goal action '{action}'")
    template = ctx.domain.goal_template(action)
    params = template.parameters
    if len(tokens) - 1 != len(params):
        raise GoalSpecError(
            f"goal '{action}' takes {len(params)} parameters, got {len(tokens) - 1}"
        )

    types = ctx.domain.types
    unique: list[tuple[str, str]] = []
    any_params: list[tuple[str, frozenset]] = []
    for token, param in zip(tokens[1:], params):
        if token == "any":
            any_params.append((param.name, frozenset()))
            continue
        conjuncts = _token_conjuncts(token, ctx)
        pool = [
            o
            for o in ctx.state.objects
            if types.is_subtype(o.type_name, param.type_name)
            and all(c.matches(o, types) for c in conjuncts)
        ]
        if len(pool) != 1:
            raise GoalSpecError(
                f"parameter spec '{token}' matches {len(pool)} objects, need exactly 1"
            )
        unique.append((param.name, pool[0].id))
    return InstructedGoal(action=action, unique=tuple(unique), any_params=tuple(any_params))


def _token_conjuncts(token: str, ctx: MenuContext) -> list[Conjunct]:
    name, _, rest = token.partition("(")
    conjuncts: list[Conjunct] = []
    if any(o.id == name for o in ctx.state.objects):
        conjuncts.append(Individual(name))
    elif name in ctx.domain.types:
        conjuncts.append(Typename(name))
    else:
        raise GoalSpecError(f"'{name}' is neither an object nor a type")
    if rest:
        if not rest.endswith(")"):
            raise GoalSpecError(f"malformed constraint list in '{token}'")
        for pair in rest[:-1].split(","):
            key, _, value = pair.partition("=")
            if not key or not value:
                raise GoalSpecError(f"malformed constraint '{pair}'")
            conjuncts.append(Relational(key.strip(), value.strip()))
    return conjuncts


def goal_matches(ctx: MenuContext, tpl: GoalTemplate, target: InstructedGoal) -> bool:
    if tpl.action_name != target.action:
        return False
    types = ctx.domain.types
    unique = target.unique_map()
    anys = target.any_map()
    for param in tpl.params:
        if param.var in unique:
            if param.resolved != RESOLVED_UNIQUE:
                return False
            if param.candidates(ctx.state, types) != {unique[param.var]}:
                return False
        elif param.var in anys:
            if param.resolved != RESOLVED_ANY:
                return False
            if frozenset(param.reference.conjuncts) != anys[param.var]:
                return False
        else:
            return False
    return True


# -- shortest command paths ----------------------------------------------------

_NAV_COMMANDS = (GuiCommand.SELECT, GuiCommand.GO_DOWN, GuiCommand.GO_UP, GuiCommand.GO_BACK)

MAX_MENU_STATES = 200_000


@dataclass
class MenuGraph:
    ctx: MenuContext
    edges: dict[MenuState, dict[GuiCommand, MenuState]] = field(default_factory=dict)
    done_states: dict[MenuState, GoalTemplate] = field(default_factory=dict)

    @staticmethod
    def explore(ctx: MenuContext, initial: MenuState = MenuState()) -> "MenuGraph":
        graph = MenuGraph(ctx=ctx)
        frontier = [initial]
        seen = {initial}
        while frontier:
            ms = frontier.pop()
            view = derive(ctx, ms)
            if view.level == "done":
                graph.done_states[ms] = view.template
                nxt = transition(ctx, ms, GuiCommand.GO_BACK)
                graph.edges[ms] = {GuiCommand.GO_BACK: nxt} if nxt != ms else {}
                targets = [nxt] if nxt != ms else []
            else:
                outgoing = {}
                for cmd in _NAV_COMMANDS:
                    nxt = transition(ctx, ms, cmd)
                    if nxt != ms:
                        outgoing[cmd] = nxt
                graph.edges[ms] = outgoing
                targets = list(outgoing.values())
            for nxt in targets:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
            if len(seen) > MAX_MENU_STATES:
                raise MenuError("menu graph too large to explore")
        return graph


class MenuPolicy:
    """Scripted user: always takes a first step of some shortest command path
    from the current (possibly error-perturbed) state to the instructed goal."""

    def __init__(self, ctx: MenuContext, target: InstructedGoal):
        self.ctx = ctx
        self.target = target
        self.graph = MenuGraph.explore(ctx)
        self.dist = self._distance_map()
        initial = MenuState()
        if initial not in self.dist:
            raise GoalSpecError(f"goal '{target.action}' is unreachable in the menu")

    def _distance_map(self) -> dict[MenuState, int]:
        goals = {
            s
            for s, tpl in self.graph.done_states.items()
            if goal_matches(self.ctx, tpl, self.target)
        }
        if not goals:
            raise GoalSpecError("no menu path finalizes the instructed goal")
        reverse: dict[MenuState, list[MenuState]] = {}
        for src, outgoing in self.graph.edges.items():
            for dst in outgoing.values():
                reverse.setdefault(dst, []).append(src)
        dist = {s: 0 for s in goals}
        frontier = list(goals)
        while frontier:
            nxt_frontier = []
            for node in frontier:
                for prev in reverse.get(node, []):
                    if prev not in dist:
                        dist[prev] = dist[node] + 1
                        nxt_frontier.append(prev)
            frontier = nxt_frontier
        return dist

    def distance(self, ms: MenuState) -> int:
        if ms not in self.dist:
            raise MenuError("state cannot reach the instructed goal")
        return self.dist[ms]

    def intended(self, ms: MenuState) -> GuiCommand | None:
        """Next command on a shortest path; None when the goal is finalized."""
        here = self.distance(ms)
        if here == 0:
            return None
        for cmd in _NAV_COMMANDS:
            nxt = self.graph.edges[ms].get(cmd)
            if nxt is not None and self.dist.get(nxt, here + 1) == here - 1:
                return cmd
        raise MenuError("no distance-reducing command found")  # unreachable

    def minimal_steps(self) -> int:
        return self.distance(MenuState())

    def instructed_path(self) -> tuple[GuiCommand, ...]:
        path = []
        ms = MenuState()
        while (cmd := self.intended(ms)) is not None:
            path.append(cmd)
            ms = transition(self.ctx, ms, cmd)
        return tuple(path)


def scripted_user(policy: MenuPolicy, menu_state: MenuState) -> GuiCommand | None:
    """Spec-level alias: the instructed subject's next intended command."""
    return policy.intended(menu_state)
