"""Name resolution and evaluation of PAL programs.

Names are bound by kind: function, entity, category or privilege. Kind
is fixed by first use, except that one name may carry an entity and a
privilege binding at once (an object may be restricted over with ``/``
and also be defined as a privilege). Bare names in expressions become
function symbols on first use; ``let`` introduces entities and
categories; ``:=`` binds privileges, and rebinding wins with a warning.
Evaluated privileges are snapshots: later rebindings or category growth
never change them.

Guards need an arrangement to project onto, so expressions containing
``[p <: q]`` or ``[u ~ v]`` require ``Environment.arrangement`` to be
set before evaluation. Inside a product, a guard hands its condition to
the other operand's atoms; a bare guard becomes an atom over the
reserved function ``guard``. Names bound to conditions (loaded from a
facts file) work the same way: ``read * logged`` attaches the condition
to the atoms of ``read``.

Also here: the role-model importer (``load_rbac`` / ``import_rbac``)
and the scenario runner the command line is built on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

from . import pal
from .algebra import Category, Employment, Entity, EntitySet, FunctionSymbol, UNIVERSAL
from .errors import PrivCalcError, SourceError
from .facts import Condition, FactFamily, close_family
from .privilege import (
    Arrangement,
    ArrangementError,
    ConditionMergeMode,
    Privilege,
    compliance_condition,
    compliant,
    compose,
    congruence_condition,
    merge,
    normal_form,
    pulse,
    structural_eq,
    trace,
)

__all__ = [
    "ComplianceQuery",
    "Environment",
    "EquivalenceQuery",
    "EvalQuery",
    "GUARD_FUNCTION",
    "NormalFormQuery",
    "PulseQuery",
    "Query",
    "QueryResult",
    "RbacImportError",
    "RbacModel",
    "ResolutionError",
    "ScenarioReport",
    "TraceQuery",
    "arrangement_from_text",
    "eval_expr",
    "eval_text",
    "import_rbac",
    "load_arrangement",
    "load_program",
    "load_rbac",
    "run_scenario",
]


class ResolutionError(SourceError):
    """A name is missing or used against its binding kind."""


class RbacImportError(SourceError):
    """The role model is malformed or cannot be translated."""


GUARD_FUNCTION = FunctionSymbol("guard")


class Environment:
    """Per-namespace binding scope plus fact and arrangement context.

    Built statement by statement by ``load_program``; treat it as
    read-only afterwards. The default fact family is the trivial one
    (a single empty fact), enough for unconditioned privileges.
    """

    def __init__(
        self,
        namespace: str = "",
        family: FactFamily | None = None,
        conditions: dict[str, Condition] | None = None,
        arrangement: Arrangement | None = None,
        merge_mode: ConditionMergeMode = ConditionMergeMode.INTERSECTION,
    ):
        self.namespace = namespace
        self.functions: dict[str, FunctionSymbol] = {}
        self.entities: dict[str, Entity] = {}
        self.categories: dict[str, Category] = {}
        self.privileges: dict[str, Privilege] = {}
        self.family = family if family is not None else close_family((), ())
        self.conditions: dict[str, Condition] = dict(conditions or {})
        self.arrangements: dict[str, Arrangement] = {}
        self.arrangement = arrangement
        self.merge_mode = merge_mode
        self.warnings: list[str] = []

    def kinds_of(self, name: str) -> list[str]:
        kinds = []
        if name in self.functions:
            kinds.append("function")
        if name in self.entities:
            kinds.append("entity")
        if name in self.categories:
            kinds.append("category")
        if name in self.privileges:
            kinds.append("privilege")
        return kinds


def _pick_namespace(
    program: pal.Program, namespace: str | None, filename: str | None
) -> pal.Namespace:
    if not program.namespaces:
        raise ResolutionError("program has no namespaces", filename=filename)
    if namespace is None:
        if len(program.namespaces) > 1:
            names = ", ".join(f'"{ns.name}"' for ns in program.namespaces)
            raise ResolutionError(
                f"program defines several namespaces ({names}); pick one",
                filename=filename,
            )
        return program.namespaces[0]
    for ns in program.namespaces:
        if ns.name == namespace:
            return ns
    raise ResolutionError(f'no namespace "{namespace}" in program', filename=filename)


def load_program(
    program: pal.Program,
    env: Environment | None = None,
    namespace: str | None = None,
    filename: str | None = None,
) -> Environment:
    """Process one namespace's statements, in order, into an environment.

    ``namespace`` selects among several; a single-namespace program
    needs no selector. Namespaces are isolated scopes: nothing defined
    in one is visible from another.
    """
    block = _pick_namespace(program, namespace, filename)
    if env is None:
        env = Environment(namespace=block.name)
    elif not env.namespace:
        env.namespace = block.name
    for stmt in block.statements:
        if isinstance(stmt, pal.LetIs):
            _load_let(stmt, env, filename)
        else:
            _load_define(stmt, env, filename)
    return env


def _clash(
    name: str, kinds: set[str], wanted: str, stmt, filename: str | None
) -> ResolutionError:
    kind = sorted(kinds)[0]
    return ResolutionError(
        f"'{name}' is already a {kind}, cannot use it as {wanted}",
        line=getattr(stmt, "line", None),
        column=getattr(stmt, "column", None),
        filename=filename,
    )


def _load_let(stmt: pal.LetIs, env: Environment, filename: str | None) -> None:
    bad = {"function", "category"} & set(env.kinds_of(stmt.entity))
    if bad:
        raise _clash(stmt.entity, bad, "an entity", stmt, filename)
    bad = {"function", "entity", "privilege"} & set(env.kinds_of(stmt.category))
    if bad:
        raise _clash(stmt.category, bad, "a category", stmt, filename)
    entity = env.entities.setdefault(stmt.entity, Entity(stmt.entity))
    category = env.categories.setdefault(stmt.category, Category(stmt.category))
    category.add(entity)


def _load_define(stmt: pal.Define, env: Environment, filename: str | None) -> None:
    value = eval_expr(stmt.body, env, filename)
    bad = {"function", "category"} & set(env.kinds_of(stmt.name))
    if bad:
        raise _clash(stmt.name, bad, "a privilege", stmt, filename)
    if stmt.name in env.privileges:
        env.warnings.append(
            f"line {stmt.line}: redefinition of '{stmt.name}' (latest wins)"
        )
    env.privileges[stmt.name] = value


def eval_expr(
    node: pal.ExprNode, env: Environment, filename: str | None = None
) -> Privilege:
    """Evaluate an expression to a privilege value (a snapshot)."""
    if isinstance(node, pal.Name):
        return _eval_name(node, env, filename)
    if isinstance(node, pal.Sum):
        return compose(
            eval_expr(node.left, env, filename), eval_expr(node.right, env, filename)
        )
    if isinstance(node, pal.Product):
        return _eval_product(node, env, filename)
    if isinstance(node, pal.Slash):
        base = eval_expr(node.left, env, filename)
        return base.restricted(_resolve_scope(node, env, filename))
    if isinstance(node, pal.Guard):
        condition = _guard_condition(node, env, filename)
        return Privilege.single(Employment(GUARD_FUNCTION, UNIVERSAL), [condition])
    raise TypeError(f"not an expression node: {node!r}")


def eval_text(source: str, env: Environment, filename: str | None = None) -> Privilege:
    """Parse and evaluate one expression against an environment."""
    return eval_expr(pal.parse_expression(source, filename), env, filename)


def _eval_name(node: pal.Name, env: Environment, filename: str | None) -> Privilege:
    if node.id in env.privileges:
        return env.privileges[node.id]
    kinds = env.kinds_of(node.id)
    if "entity" in kinds or "category" in kinds:
        article = "an entity" if "entity" in kinds else "a category"
        raise ResolutionError(
            f"'{node.id}' is {article} and has no privilege value",
            line=node.line,
            column=node.column,
            filename=filename,
        )
    if node.id in env.conditions:
        raise ResolutionError(
            f"'{node.id}' is a condition; attach it with '*'",
            line=node.line,
            column=node.column,
            filename=filename,
        )
    fn = env.functions.setdefault(node.id, FunctionSymbol(node.id))
    return Privilege.single(Employment(fn, UNIVERSAL))


def _named_condition(node: pal.ExprNode, env: Environment) -> Condition | None:
    # A privilege binding shadows a same-named condition.
    if isinstance(node, pal.Name) and node.id not in env.privileges:
        return env.conditions.get(node.id)
    return None


def _eval_product(
    node: pal.Product, env: Environment, filename: str | None
) -> Privilege:
    # A guard or condition operand hands its condition to the other
    # side's atoms instead of merging as a separate atom.
    for side, other in ((node.right, node.left), (node.left, node.right)):
        if isinstance(side, pal.Guard):
            base = eval_expr(other, env, filename)
            return base.with_condition(_guard_condition(side, env, filename))
        named = _named_condition(side, env)
        if named is not None:
            return eval_expr(other, env, filename).with_condition(named)
    return merge(
        eval_expr(node.left, env, filename),
        eval_expr(node.right, env, filename),
        env.merge_mode,
    )


def _resolve_scope(
    node: pal.Slash, env: Environment, filename: str | None
) -> EntitySet:
    name = node.scope
    if name in env.categories:
        return env.categories[name].entity_set()
    if name in env.entities:
        return EntitySet.finite([env.entities[name]])
    kinds = env.kinds_of(name)
    if kinds:
        raise ResolutionError(
            f"'{name}' is a {kinds[0]}; '/' needs a category or an entity",
            line=node.line,
            column=node.column,
            filename=filename,
        )
    # Unknown scope: start an empty category, to be populated by later
    # let declarations (or left empty, restricting everything away).
    category = Category(name)
    env.categories[name] = category
    return category.entity_set()


def _guard_condition(
    node: pal.Guard, env: Environment, filename: str | None
) -> Condition:
    if env.arrangement is None:
        raise ResolutionError(
            "guard expressions need an arrangement in scope "
            "(set one before loading, or pass --arrangement)",
            filename=filename,
        )
    left = eval_expr(node.left, env, filename)
    right = eval_expr(node.right, env, filename)
    if node.op is pal.GuardOp.COMPLIANCE:
        return compliance_condition(left, right, env.arrangement, env.merge_mode)
    return congruence_condition(left, right, env.arrangement)


def load_arrangement(
    exprs: Sequence[pal.ExprNode], env: Environment, filename: str | None = None
) -> Arrangement:
    """Evaluate basis expressions and flatten their atoms, in order.

    Atoms must be unconditioned and the collected basis pairwise
    merge-disjoint; within one expression the atoms are taken in
    canonical order.
    """
    basis: list[Employment] = []
    for node in exprs:
        value = eval_expr(node, env, filename)
        for atom in value.sorted_atoms():
            if atom.conditions:
                raise ArrangementError(
                    f"arrangement element {atom.employment.render()} carries conditions"
                )
            basis.append(atom.employment)
    return Arrangement(tuple(basis))


def _sum_terms(node: pal.ExprNode) -> list[pal.ExprNode]:
    if isinstance(node, pal.Sum):
        return _sum_terms(node.left) + _sum_terms(node.right)
    return [node]


def arrangement_from_text(
    text: str, env: Environment, filename: str | None = None
) -> Arrangement:
    """Parse "m1 + m2 + ..." and load it as an arrangement."""
    expr = pal.parse_expression(text, filename)
    return load_arrangement(_sum_terms(expr), env, filename)


# --- role-model import -------------------------------------------------


@dataclass
class RbacModel:
    """Operations, categories, roles with permissions, a role hierarchy
    (senior inherits junior), and user-role assignments."""

    operations: frozenset[str] = frozenset()
    categories: frozenset[str] = frozenset()
    roles: dict[str, frozenset[tuple[str, str]]] = field(default_factory=dict)
    hierarchy: frozenset[tuple[str, str]] = frozenset()
    users: dict[str, frozenset[str]] = field(default_factory=dict)

    def juniors_of(self, role: str) -> frozenset[str]:
        return frozenset(j for s, j in self.hierarchy if s == role)

    def validate(self) -> None:
        for role, perms in self.roles.items():
            for op, cat in perms:
                if op not in self.operations:
                    raise RbacImportError(
                        f"role '{role}' uses undeclared operation '{op}'"
                    )
                if cat not in self.categories:
                    raise RbacImportError(
                        f"role '{role}' uses undeclared category '{cat}'"
                    )
        for senior, junior in self.hierarchy:
            for role in (senior, junior):
                if role not in self.roles:
                    raise RbacImportError(f"hierarchy references unknown role '{role}'")
        for user, roles in self.users.items():
            if user in self.roles:
                raise RbacImportError(f"'{user}' is declared both as role and user")
            for role in roles:
                if role not in self.roles:
                    raise RbacImportError(
                        f"user '{user}' references unknown role '{role}'"
                    )
        cycle = self._find_cycle()
        if cycle:
            raise RbacImportError(
                "role hierarchy contains a cycle: " + " -> ".join(cycle)
            )

    def _find_cycle(self) -> list[str] | None:
        juniors = {role: sorted(self.juniors_of(role)) for role in self.roles}
        state: dict[str, int] = {}  # 1 = on stack, 2 = done
        stack: list[str] = []

        def visit(role: str) -> list[str] | None:
            state[role] = 1
            stack.append(role)
            for nxt in juniors[role]:
                if state.get(nxt) == 1:
                    return stack[stack.index(nxt) :] + [nxt]
                if state.get(nxt) is None:
                    found = visit(nxt)
                    if found:
                        return found
            stack.pop()
            state[role] = 2
            return None

        for role in sorted(self.roles):
            if state.get(role) is None:
                found = visit(role)
                if found:
                    return found
        return None


def load_rbac(text: str, filename: str | None = None) -> RbacModel:
    """Parse a role-model file.

    One declaration per line, ``#`` comments:

        op <id>
        cat <id>
        role <id> = <op>/<cat>[, <op>/<cat> ...]
        inherits <senior> <junior>
        user <id> = <role>[, <role> ...]
    """
    operations: set[str] = set()
    categories: set[str] = set()
    roles: dict[str, frozenset[tuple[str, str]]] = {}
    hierarchy: set[tuple[str, str]] = set()
    users: dict[str, frozenset[str]] = {}

    def err(line_no: int, message: str) -> RbacImportError:
        return RbacImportError(message, line=line_no, filename=filename)

    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "op":
            if not rest or " " in rest:
                raise err(line_no, "expected: op <id>")
            operations.add(rest)
        elif head == "cat":
            if not rest or " " in rest:
                raise err(line_no, "expected: cat <id>")
            categories.add(rest)
        elif head == "role":
            name, eq, perms = rest.partition("=")
            name = name.strip()
            if not eq or not name:
                raise err(line_no, "expected: role <id> = <op>/<cat>, ...")
            if name in roles:
                raise err(line_no, f"duplicate role '{name}'")
            pairs = set()
            for chunk in perms.split(","):
                chunk = chunk.strip()
                if not chunk:
                    raise err(line_no, f"role '{name}' has an empty permission")
                op, slash, cat = chunk.partition("/")
                if not slash or not op.strip() or not cat.strip():
                    raise err(line_no, f"bad permission '{chunk}' (want op/cat)")
                pairs.add((op.strip(), cat.strip()))
            roles[name] = frozenset(pairs)
        elif head == "inherits":
            parts = rest.split()
            if len(parts) != 2:
                raise err(line_no, "expected: inherits <senior> <junior>")
            hierarchy.add((parts[0], parts[1]))
        elif head == "user":
            name, eq, role_list = rest.partition("=")
            name = name.strip()
            if not eq or not name:
                raise err(line_no, "expected: user <id> = <role>, ...")
            if name in users:
                raise err(line_no, f"duplicate user '{name}'")
            names = [r.strip() for r in role_list.split(",")]
            if not all(names):
                raise err(line_no, f"user '{name}' has an empty role reference")
            users[name] = frozenset(names)
        else:
            raise err(line_no, f"unknown declaration '{head}'")

    model = RbacModel(
        frozenset(operations), frozenset(categories), roles, frozenset(hierarchy), users
    )
    model.validate()
    return model


def _sum_of(terms: list[pal.ExprNode]) -> pal.ExprNode:
    node = terms[0]
    for term in terms[1:]:
        node = pal.Sum(node, term)
    return node


def _topological_roles(model: RbacModel) -> list[str]:
    # Juniors first so every referenced role name is already bound when
    # the emitted program loads front to back. Alphabetical tie-break.
    order: list[str] = []
    done: set[str] = set()

    def visit(role: str) -> None:
        if role in done:
            return
        done.add(role)
        for junior in sorted(model.juniors_of(role)):
            visit(junior)
        order.append(role)

    for role in sorted(model.roles):
        visit(role)
    return order


def import_rbac(model: RbacModel) -> pal.Program:
    """Emit a PAL program defining each role and each user as a privilege.

    Role bodies list inherited role names first, then own permissions as
    op/cat terms, all sorted; users compose their roles' names. Roles or
    users that would denote the empty privilege cannot be expressed in
    PAL and are rejected.
    """
    model.validate()
    statements: list[pal.StatementNode] = []
    for role in _topological_roles(model):
        terms: list[pal.ExprNode] = [
            pal.Name(junior) for junior in sorted(model.juniors_of(role))
        ]
        terms.extend(
            pal.Slash(pal.Name(op), cat) for op, cat in sorted(model.roles[role])
        )
        if not terms:
            raise RbacImportError(
                f"role '{role}' has no permissions or juniors; "
                "the empty privilege has no PAL form"
            )
        statements.append(pal.Define(role, _sum_of(terms)))
    for user in sorted(model.users):
        roles = sorted(model.users[user])
        if not roles:
            raise RbacImportError(
                f"user '{user}' has no roles; the empty privilege has no PAL form"
            )
        statements.append(pal.Define(user, _sum_of([pal.Name(r) for r in roles])))
    return pal.Program((pal.Namespace("rbac", tuple(statements)),))


# --- scenario runner ----------------------------------------------------


@dataclass(frozen=True)
class EvalQuery:
    expr: str


@dataclass(frozen=True)
class NormalFormQuery:
    expr: str


@dataclass(frozen=True)
class EquivalenceQuery:
    left: str
    right: str


@dataclass(frozen=True)
class PulseQuery:
    expr: str
    fact: str


@dataclass(frozen=True)
class TraceQuery:
    expr: str
    facts: tuple[str, ...]


@dataclass(frozen=True)
class ComplianceQuery:
    holder: str
    target: str
    fact: str


Query = Union[
    EvalQuery, NormalFormQuery, EquivalenceQuery, PulseQuery, TraceQuery, ComplianceQuery
]


@dataclass
class QueryResult:
    query: Query
    text: str
    value: object


@dataclass
class ScenarioReport:
    results: list[QueryResult] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def run_scenario(
    source: str | pal.Program,
    family: FactFamily | None = None,
    conditions: dict[str, Condition] | None = None,
    arrangement: str | None = None,
    queries: Sequence[Query] = (),
    merge_mode: ConditionMergeMode = ConditionMergeMode.INTERSECTION,
    namespace: str | None = None,
    filename: str | None = None,
) -> ScenarioReport:
    """Parse, load and answer queries; query failures are collected.

    The arrangement text is evaluated before the program loads (its
    bare names become function symbols), so guards inside the program
    can capture it.
    """
    report = ScenarioReport()
    try:
        program = (
            pal.parse_text(source, filename) if isinstance(source, str) else source
        )
        env = Environment(family=family, conditions=conditions, merge_mode=merge_mode)
        if arrangement is not None:
            env.arrangement = arrangement_from_text(arrangement, env, filename)
        load_program(program, env, namespace=namespace, filename=filename)
    except PrivCalcError as exc:
        report.errors.append(str(exc))
        return report
    for query in queries:
        try:
            report.results.append(_answer(query, env, filename))
        except PrivCalcError as exc:
            report.errors.append(f"{type(query).__name__}: {exc}")
    return report


def _need_arrangement(env: Environment) -> Arrangement:
    if env.arrangement is None:
        raise ResolutionError("this query needs an arrangement")
    return env.arrangement


def _answer(query: Query, env: Environment, filename: str | None) -> QueryResult:
    if isinstance(query, EvalQuery):
        value = eval_text(query.expr, env, filename)
        return QueryResult(query, value.text(), value)
    if isinstance(query, NormalFormQuery):
        nf = normal_form(eval_text(query.expr, env, filename), _need_arrangement(env))
        return QueryResult(query, nf.render(), nf)
    if isinstance(query, EquivalenceQuery):
        eq = structural_eq(
            eval_text(query.left, env, filename),
            eval_text(query.right, env, filename),
            _need_arrangement(env),
            env.family,
        )
        return QueryResult(query, "equal" if eq else "different", eq)
    if isinstance(query, PulseQuery):
        form = pulse(
            eval_text(query.expr, env, filename),
            _need_arrangement(env),
            env.family.fact(query.fact),
        )
        return QueryResult(query, form.render(), form)
    if isinstance(query, TraceQuery):
        matrix = trace(
            eval_text(query.expr, env, filename),
            _need_arrangement(env),
            [env.family.fact(fid) for fid in query.facts],
        )
        return QueryResult(query, matrix.to_csv(), matrix)
    if isinstance(query, ComplianceQuery):
        verdict = compliant(
            eval_text(query.holder, env, filename),
            eval_text(query.target, env, filename),
            _need_arrangement(env),
            env.family.fact(query.fact),
            env.merge_mode,
        )
        return QueryResult(query, "compliant" if verdict else "non-compliant", verdict)
    raise TypeError(f"unknown query type: {query!r}")
