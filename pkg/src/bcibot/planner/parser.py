"""Parser for the documented PDDL subset.

Supported: ``:strips``, ``:typing``, ``:equality``.  Preconditions are
conjunctions of positive atoms plus (possibly negated) equality literals;
effects are add/delete lists; problem goals are conjunctions that may wrap a
single ``exists`` block.  Conditional effects and numeric fluents are out.

Domains may carry ``(:goal-template ...)`` blocks declaring the action-anchored
goals offered in the GUI; the syntax mirrors action declarations with a
``:condition`` formula instead of effects.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    ActionSchema,
    Atom,
    Domain,
    ExistentialGoal,
    GoalTemplateSpec,
    Parameter,
    Problem,
    TypeHierarchy,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Token:
    value: str
    line: int
    column: int


class SExpr(list):
    """List node that remembers where it started."""

    line: int = 0
    column: int = 0


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
        elif c in " \t\r":
            col += 1
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            tokens.append(Token(c, line, col))
            col += 1
            i += 1
        else:
            start = i
            start_col = col
            while i < n and text[i] not in " \t\r\n();":
                i += 1
                col += 1
            tokens.append(Token(text[start:i].lower(), line, start_col))
    return tokens


def _read(tokens: list[Token], pos: int) -> tuple[object, int]:
    if pos >= len(tokens):
        raise ParseError("unexpected end of input")
    tok = tokens[pos]
    if tok.value == "(":
        node = SExpr()
        node.line, node.column = tok.line, tok.column
        pos += 1
        while True:
            if pos >= len(tokens):
                raise ParseError("unbalanced parenthesis", tok.line, tok.column)
            if tokens[pos].value == ")":
                return node, pos + 1
            child, pos = _read(tokens, pos)
            node.append(child)
    if tok.value == ")":
        raise ParseError("unexpected ')'", tok.line, tok.column)
    return tok, pos + 1


def _parse_sexpr(text: str) -> SExpr:
    tokens = _tokenize(text)
    node, pos = _read(tokens, 0)
    if pos != len(tokens):
        t = tokens[pos]
        raise ParseError("trailing input after top-level form", t.line, t.column)
    if not isinstance(node, SExpr):
        raise ParseError("expected a parenthesized form", node.line, node.column)
    return node

def _sym(node: object) -> str:
    if not isinstance(node, Token):
        where = node if isinstance(node, SExpr) else None
        raise ParseError(
            "expected a symbol", where.line if where else None, where.column if where else None
        )
    return node.value


def _typed_list(nodes: list[object], default_type: str = "object") -> list[tuple[str, str, Token]]:
    """Parse ``a b - t c d - u`` into [(name, type, token), ...]."""
    out: list[tuple[str, str, Token]] = []
    pending: list[Token] = []
    i = 0
    while i < len(nodes):
        tok = nodes[i]
        if not isinstance(tok, Token):
            raise ParseError("expected a symbol in typed list")
        if tok.value == "-":
            if i + 1 >= len(nodes):
                raise ParseError("missing type after '-'", tok.line, tok.column)
            type_tok = nodes[i + 1]
            if not isinstance(type_tok, Token):
                raise ParseError("expected a type name after '-'", tok.line, tok.column)
            for p in pending:
                out.append((p.value, type_tok.value, p))
            pending = []
            i += 2
        else:
            pending.append(tok)
            i += 1
    for p in pending:
        out.append((p.value, default_type, p))
    return out


def _atom(node: object) -> tuple[Atom, Token | SExpr]:
    if not isinstance(node, SExpr) or not node:
        raise ParseError("expected an atom")
    parts = [_sym(x) for x in node]
    return tuple(parts), node


def _conjuncts(node: object) -> list[SExpr]:
    """Flatten a formula that is either an atom or (and atom...)."""
    if not isinstance(node, SExpr):
        raise ParseError("expected a formula")
    if node and isinstance(node[0], Token) and node[0].value == "and":
        out = []
        for child in node[1:]:
            if not isinstance(child, SExpr):
                raise ParseError("expected an atom inside 'and'", node.line, node.column)
            out.append(child)
        return out
    return [node] if node else []


class _DomainChecker:
    def __init__(self, types: TypeHierarchy, predicates: dict[str, tuple[str, ...]]):
        self.types = types
        self.predicates = predicates

    def check_atom(self, atom: Atom, node: SExpr, scope: dict[str, str]) -> None:
        name = atom[0]
        if name == "=":
            if len(atom) != 3:
                raise ParseError("'=' takes exactly two arguments", node.line, node.column)
            return
        if name not in self.predicates:
            raise ParseError(f"undeclared predicate '{name}'", node.line, node.column)
        arity = len(self.predicates[name])
        if len(atom) - 1 != arity:
            raise ParseError(
                f"predicate '{name}' expects {arity} arguments, got {len(atom) - 1}",
                node.line,
                node.column,
            )
        for arg in atom[1:]:
            if arg.startswith("?") and arg not in scope:
                raise ParseError(f"unbound variable '{arg}'", node.line, node.column)


def parse_domain(text: str) -> Domain:
    root = _parse_sexpr(text)
    if not root or _sym(root[0]) != "define":
        raise ParseError("expected (define (domain ...) ...)", root.line, root.column)
    header = root[1]
    if not isinstance(header, SExpr) or _sym(header[0]) != "domain":
        raise ParseError("expected (domain <name>)", root.line, root.column)
    name = _sym(header[1])

    parents: dict[str, str | None] = {}
    predicates: dict[str, tuple[str, ...]] = {}
    actions: list[ActionSchema] = []
    templates: list[GoalTemplateSpec] = []

    sections = [s for s in root[2:] if isinstance(s, SExpr) and s]
    for section in sections:
        tag = _sym(section[0])
        if tag == ":requirements":
            continue
        if tag == ":types":
            for tname, parent, _tok in _typed_list(list(section[1:])):
                parents[tname] = None if parent == "object" else parent
                if parent != "object":
                    parents.setdefault(parent, None)
        elif tag == ":predicates":
            for pred in section[1:]:
                if not isinstance(pred, SExpr) or not pred:
                    raise ParseError("malformed predicate", section.line, section.column)
                pname = _sym(pred[0])
                params = _typed_list(list(pred[1:]))
                predicates[pname] = tuple(t for _, t, _ in params)

    types = TypeHierarchy(parents)
    for tname, parent in parents.items():
        if parent is not None and parent not in types:
            raise ParseError(f"undeclared parent type '{parent}'")
    checker = _DomainChecker(types, predicates)

    for section in sections:
        tag = _sym(section[0])
        if tag == ":action":
            actions.append(_parse_action(section, checker))
        elif tag == ":goal-template":
            templates.append(_parse_goal_template(section, checker))

    actions.sort(key=lambda a: a.name)
    return Domain(
        name=name,
        types=types,
        predicates=predicates,
        actions=tuple(actions),
        goal_templates=tuple(templates),
    )


def _parse_params(node: object, types: TypeHierarchy, where: SExpr) -> tuple[Parameter, ...]:
    if not isinstance(node, SExpr):
        raise ParseError("expected a parameter list", where.line, where.column)
    params = []
    for pname, ptype, tok in _typed_list(list(node)):
        if not pname.startswith("?"):
            raise ParseError(f"parameter '{pname}' must start with '?'", tok.line, tok.column)
        if ptype not in types:
            raise ParseError(f"undeclared type '{ptype}'", tok.line, tok.column)
        params.append(Parameter(pname, ptype))
    return tuple(params)


def _split_keyword_sections(section: SExpr) -> dict[str, object]:
    out: dict[str, object] = {}
    i = 2  # skip tag and name
    while i < len(section):
        key = _sym(section[i])
        if not key.startswith(":"):
            raise ParseError(f"expected a keyword, got '{key}'", section.line, section.column)
        if i + 1 >= len(section):
            raise ParseError(f"missing value after '{key}'", section.line, section.column)
        out[key] = section[i + 1]
        i += 2
    return out


def _parse_action(section: SExpr, checker: _DomainChecker) -> ActionSchema:
    name = _sym(section[1])
    parts = _split_keyword_sections(section)
    params = _parse_params(parts.get(":parameters", SExpr()), checker.types, section)
    scope = {p.name: p.type_name for p in params}

    precondition: list[Atom] = []
    neq: list[tuple[str, str]] = []
    eq: list[tuple[str, str]] = []
    for node in _conjuncts(parts.get(":precondition", SExpr())):
        head = _sym(node[0])
        if head == "not":
            inner, inner_node = _atom(node[1])
            if inner[0] != "=":
                raise ParseError(
                    "negation is only supported on equality", inner_node.line, inner_node.column
                )
            checker.check_atom(inner, inner_node, scope)
            neq.append((inner[1], inner[2]))
        else:
            atom, anode = _atom(node)
            checker.check_atom(atom, anode, scope)
            if atom[0] == "=":
                eq.append((atom[1], atom[2]))
            else:
                precondition.append(atom)

    adds: list[Atom] = []
    dels: list[Atom] = []
    for node in _conjuncts(parts.get(":effect", SExpr())):
        head = _sym(node[0])
        if head == "not":
            atom, anode = _atom(node[1])
            checker.check_atom(atom, anode, scope)
            dels.append(atom)
        else:
            atom, anode = _atom(node)
            checker.check_atom(atom, anode, scope)
            adds.append(atom)

    for atom in precondition + adds + dels:
        for arg in atom[1:]:
            if arg.startswith("?") and arg not in scope:
                raise ParseError(f"variable '{arg}' not in parameters of action '{name}'")

    return ActionSchema(
        name=name,
        parameters=params,
        precondition=tuple(precondition),
        neq_constraints=tuple(neq),
        eq_constraints=tuple(eq),
        add_effects=tuple(adds),
        del_effects=tuple(dels),
    )


def _parse_goal_template(section: SExpr, checker: _DomainChecker) -> GoalTemplateSpec:
    name = _sym(section[1])
    parts = _split_keyword_sections(section)
    params = _parse_params(parts.get(":parameters", SExpr()), checker.types, section)
    condition_node = parts.get(":condition")
    if condition_node is None:
        raise ParseError(f"goal template '{name}' lacks :condition", section.line, section.column)
    exists, conjuncts = _parse_goal_formula(condition_node, checker, dict_scope={p.name: p.type_name for p in params})
    return GoalTemplateSpec(name=name, parameters=params, exists=exists, condition=conjuncts)


def _parse_goal_formula(
    node: object, checker: _DomainChecker, dict_scope: dict[str, str]
) -> tuple[tuple[Parameter, ...], tuple[Atom, ...]]:
    """Parse a goal formula: conjunction, optionally wrapped in one exists."""
    if not isinstance(node, SExpr):
        raise ParseError("expected a goal formula")
    exists: tuple[Parameter, ...] = ()
    if node and isinstance(node[0], Token) and node[0].value == "exists":
        exists = _parse_params(node[1], checker.types, node)
        node = node[2]
    scope = dict(dict_scope)
    scope.update({p.name: p.type_name for p in exists})
    conjuncts = []
    for child in _conjuncts(node):
        atom, anode = _atom(child)
        checker.check_atom(atom, anode, scope)
        conjuncts.append(atom)
    return exists, tuple(conjuncts)


def parse_problem(text: str, domain: Domain) -> Problem:
    root = _parse_sexpr(text)
    if not root or _sym(root[0]) != "define":
        raise ParseError("expected (define (problem ...) ...)", root.line, root.column)
    header = root[1]
    if not isinstance(header, SExpr) or _sym(header[0]) != "problem":
        raise ParseError("expected (problem <name>)", root.line, root.column)
    name = _sym(header[1])

    objects: dict[str, str] = {}
    init: set[Atom] = set()
    goal = ExistentialGoal()
    checker = _DomainChecker(domain.types, domain.predicates)

    for section in root[2:]:
        if not isinstance(section, SExpr) or not section:
            continue
        tag = _sym(section[0])
        if tag == ":domain":
            dname = _sym(section[1])
            if dname != domain.name:
                raise ParseError(
                    f"problem references domain '{dname}', loaded domain is '{domain.name}'",
                    section.line,
                    section.column,
                )
        elif tag == ":objects":
            for oname, otype, tok in _typed_list(list(section[1:])):
                if otype not in domain.types:
                    raise ParseError(f"undeclared type '{otype}'", tok.line, tok.column)
                if oname in objects:
                    raise ParseError(f"duplicate object '{oname}'", tok.line, tok.column)
                objects[oname] = otype
        elif tag == ":init":
            for node in section[1:]:
                atom, anode = _atom(node)
                checker.check_atom(atom, anode, {})
                for arg in atom[1:]:
                    if arg not in objects:
                        raise ParseError(f"undeclared object '{arg}'", anode.line, anode.column)
                init.add(atom)
        elif tag == ":goal":
            exists, conjuncts = _parse_goal_formula(section[1], checker, {})
            ground = []
            open_conjuncts = []
            var_names = {p.name for p in exists}
            for atom in conjuncts:
                for arg in atom[1:]:
                    if not arg.startswith("?") and arg not in objects:
                        raise ParseError(f"undeclared object '{arg}' in goal")
                if any(a in var_names for a in atom[1:]):
                    open_conjuncts.append(atom)
                else:
                    ground.append(atom)
            goal = ExistentialGoal(
                ground=tuple(ground), variables=exists, open_conjuncts=tuple(open_conjuncts)
            )

    return Problem(domain=domain, name=name, objects=objects, init=frozenset(init), goal=goal)


def parse(domain_text: str, problem_text: str) -> tuple[Domain, Problem]:
    """Parse a domain/problem pair, resolving the problem against the domain."""
    domain = parse_domain(domain_text)
    problem = parse_problem(problem_text, domain)
    return domain, problem
