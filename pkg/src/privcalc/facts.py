"""Fact families and conditions on facts.

A fact is a subset of a statement universe. A family of facts contains
the empty fact and the whole universe and is closed under union and
intersection; for a finite family, pairwise closure is equivalent to
closure under arbitrary sub-collections. Conditions are boolean
functions on facts constrained by the disjoint-union axiom

    r(x1 | x2) = r(x1) or r(x2)    whenever x1 and x2 are disjoint.

Witness conditions (true on any fact containing at least one witness
statement) satisfy the axiom by construction. Table conditions carry an
explicit truth assignment and should be checked with
``verify_condition_axiom`` when loaded. High-order conditions wrap
compliance or congruence predicates built in the privilege layer; they
capture their operands at construction time and are exempt from the
axiom check.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping

from .errors import PrivCalcError, SourceError

__all__ = [
    "ALWAYS",
    "Condition",
    "ConditionReport",
    "DeclarationError",
    "EvaluationError",
    "Fact",
    "FactFamily",
    "FalseCondition",
    "FamilyReport",
    "HighOrderCondition",
    "NEVER",
    "Statement",
    "TableCondition",
    "TrueCondition",
    "UnsupportedConditionError",
    "WitnessCondition",
    "close_family",
    "eval_condition",
    "evidences",
    "load_facts",
    "minimum_evidences",
    "synthesized_id",
    "table_condition",
    "verify_condition_axiom",
    "verify_family",
]


class DeclarationError(SourceError):
    """A facts-file declaration is malformed or references something unknown."""


class EvaluationError(PrivCalcError):
    """A condition or lookup was asked about a fact outside its domain."""


class UnsupportedConditionError(PrivCalcError):
    """The operation does not apply to this condition kind."""


@dataclass(frozen=True)
class Statement:
    """An opaque token a fact can contain."""

    id: str

    def __repr__(self) -> str:
        return f"stmt:{self.id}"


@dataclass(frozen=True)
class Fact:
    """A named subset of the statement universe."""

    id: str
    statements: frozenset[Statement]

    def __repr__(self) -> str:
        inner = ",".join(sorted(s.id for s in self.statements))
        return f"fact:{self.id}{{{inner}}}"


def synthesized_id(statements: frozenset[Statement]) -> str:
    """Deterministic id for a closure-synthesized fact."""
    if not statements:
        return "empty"
    return "+".join(sorted(s.id for s in statements))


class FactFamily:
    """A finite collection of facts over a statement universe.

    Facts are identified by their statement set; a second fact declared
    over the same set becomes an id alias of the first. The constructor
    does not check closure, ``verify_family`` does.
    """

    def __init__(self, universe: Iterable[Statement], facts: Iterable[Fact]):
        self.universe: frozenset[Statement] = frozenset(universe)
        self._by_set: dict[frozenset[Statement], Fact] = {}
        self._by_id: dict[str, Fact] = {}
        for fact in facts:
            canonical = self._by_set.setdefault(fact.statements, fact)
            self._by_id.setdefault(fact.id, canonical)

    @property
    def facts(self) -> tuple[Fact, ...]:
        return tuple(
            sorted(
                self._by_set.values(),
                key=lambda f: (len(f.statements), synthesized_id(f.statements)),
            )
        )

    @property
    def sets(self) -> frozenset[frozenset[Statement]]:
        return frozenset(self._by_set)

    def fact(self, fact_id: str) -> Fact:
        try:
            return self._by_id[fact_id]
        except KeyError:
            known = ", ".join(sorted(self._by_id))
            raise EvaluationError(f"unknown fact '{fact_id}' (known: {known})") from None

    def __contains__(self, fact: Fact) -> bool:
        return fact.statements in self._by_set

    def __iter__(self) -> Iterator[Fact]:
        return iter(self.facts)

    def __len__(self) -> int:
        return len(self._by_set)

    def __repr__(self) -> str:
        return f"FactFamily({len(self._by_set)} facts over {len(self.universe)} statements)"


def close_family(
    universe: Iterable[Statement], generators: Iterable[Fact] = ()
) -> FactFamily:
    """Smallest family over ``universe`` containing the generators.

    Adds the empty fact and the full universe, then closes under
    pairwise union and intersection to a fixed point; for finite
    families this coincides with closure under arbitrary sub-collection
    unions. Synthesized facts get ids derived from their sorted
    statements ("a+b", the empty fact is "empty"); declared ids win for
    statement sets already present (the derived id then aliases the
    declared fact), and a synthesized id that collides with a declared
    one is suffixed with underscores until free.
    """
    universe_set = frozenset(universe)
    gens = list(generators)
    for fact in gens:
        unknown = fact.statements - universe_set
        if unknown:
            name = sorted(s.id for s in unknown)[0]
            raise DeclarationError(
                f"fact '{fact.id}' references unknown statement '{name}'"
            )
    sets: set[frozenset[Statement]] = {frozenset(), universe_set}
    sets.update(f.statements for f in gens)
    changed = True
    while changed:
        changed = False
        current = list(sets)
        for i, a in enumerate(current):
            for b in current[i:]:
                for c in (a | b, a & b):
                    if c not in sets:
                        sets.add(c)
                        changed = True
    declared = {f.statements for f in gens}
    taken = {f.id for f in gens}
    facts = list(gens)
    for members in sorted(sets, key=synthesized_id):
        fid = synthesized_id(members)
        if members in declared:
            if fid not in taken:
                # register the derived id as an alias of the declared fact
                taken.add(fid)
                facts.append(Fact(fid, members))
            continue
        while fid in taken:
            fid += "_"
        taken.add(fid)
        facts.append(Fact(fid, members))
    return FactFamily(universe_set, facts)


@dataclass
class FamilyReport:
    """Closure violations found in a family; empty means valid."""

    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_family(family: FactFamily) -> FamilyReport:
    """Report every missing closure element: the empty fact, the
    universe, and each pairwise union or intersection not in the family."""
    report = FamilyReport()
    sets = family.sets
    if frozenset() not in sets:
        report.violations.append("empty fact missing")
    if family.universe not in sets:
        report.violations.append("universe fact missing")
    items = sorted(sets, key=lambda s: (len(s), synthesized_id(s)))
    for i, a in enumerate(items):
        for b in items[i + 1 :]:
            if (a | b) not in sets:
                report.violations.append(
                    f"union of '{synthesized_id(a)}' and '{synthesized_id(b)}' missing"
                )
            if (a & b) not in sets:
                report.violations.append(
                    f"intersection of '{synthesized_id(a)}' and '{synthesized_id(b)}' missing"
                )
    return report


class Condition:
    """Boolean function on facts. Subclasses implement ``evaluate``."""

    id: str

    def evaluate(self, fact: Fact) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class TrueCondition(Condition):
    id: str = "true"

    def evaluate(self, fact: Fact) -> bool:
        return True


@dataclass(frozen=True)
class FalseCondition(Condition):
    id: str = "false"

    def evaluate(self, fact: Fact) -> bool:
        return False


@dataclass(frozen=True)
class WitnessCondition(Condition):
    """True on any fact containing at least one witness statement."""

    id: str
    witnesses: frozenset[Statement]

    def evaluate(self, fact: Fact) -> bool:
        return bool(self.witnesses & fact.statements)


@dataclass(frozen=True)
class TableCondition(Condition):
    """Explicit truth assignment over a fixed domain of statement sets."""

    id: str
    true_sets: frozenset[frozenset[Statement]]
    domain: frozenset[frozenset[Statement]]

    def evaluate(self, fact: Fact) -> bool:
        if fact.statements not in self.domain:
            raise EvaluationError(
                f"condition '{self.id}' has no entry for fact '{fact.id}'"
            )
        return fact.statements in self.true_sets


@dataclass(frozen=True)
class HighOrderCondition(Condition):
    """Wraps a compliance or congruence predicate over captured operands."""

    id: str
    predicate: Callable[[Fact], bool]

    def evaluate(self, fact: Fact) -> bool:
        return self.predicate(fact)


ALWAYS = TrueCondition()
NEVER = FalseCondition()


def table_condition(
    cond_id: str, assignment: Mapping[frozenset[Statement], bool]
) -> TableCondition:
    """Build a table condition from an explicit fact-set assignment."""
    true_sets = frozenset(s for s, v in assignment.items() if v)
    return TableCondition(cond_id, true_sets, frozenset(assignment))


def eval_condition(condition: Condition, fact: Fact) -> bool:
    return condition.evaluate(fact)


@dataclass
class ConditionReport:
    """Axiom violations for one condition; empty means the axiom holds."""

    condition: str
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_condition_axiom(condition: Condition, family: FactFamily) -> ConditionReport:
    """Check r(x1 | x2) = r(x1) or r(x2) over every disjoint pair.

    High-order conditions are outside the axiom's scope and are
    rejected. Note the axiom does not force monotonicity on families
    that lack relative complements; witness conditions are monotone
    regardless, arbitrary tables need not be.
    """
    if isinstance(condition, HighOrderCondition):
        raise UnsupportedConditionError(
            "high-order conditions are exempt from the disjoint-union axiom"
        )
    report = ConditionReport(condition.id)
    facts = family.facts
    index = {f.statements: f for f in facts}
    for i, x1 in enumerate(facts):
        for x2 in facts[i:]:
            if x1.statements & x2.statements:
                continue
            union = index.get(x1.statements | x2.statements)
            if union is None:
                report.violations.append(
                    f"family misses the union of '{x1.id}' and '{x2.id}'"
                )
                continue
            left = condition.evaluate(union)
            right = condition.evaluate(x1) or condition.evaluate(x2)
            if left != right:
                report.violations.append(
                    f"r({union.id}) = {int(left)} but r({x1.id}) or r({x2.id}) = {int(right)}"
                )
    return report


def evidences(condition: Condition, family: FactFamily) -> frozenset[Fact]:
    """Facts of the family on which the condition holds."""
    return frozenset(f for f in family if condition.evaluate(f))


def minimum_evidences(condition: Condition, family: FactFamily) -> frozenset[Fact]:
    """Evidences with no strictly smaller evidence; empty when none exist."""
    found = evidences(condition, family)
    return frozenset(
        x for x in found if not any(y.statements < x.statements for y in found)
    )


_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


def load_facts(
    text: str, filename: str | None = None
) -> tuple[FactFamily, dict[str, Condition]]:
    """Parse a facts file into a closed family and a condition registry.

    One declaration per line, ``#`` starts a comment:

        statement <id>
        fact <id> = [<stmt-id> ...]
        condition <id> = any <stmt-id> [<stmt-id> ...]
        condition <id> = true
        condition <id> = false

    Statements must be declared before facts or conditions mention
    them. The loader closes the declared facts into a family, so
    synthesized facts (unions, intersections, "empty") are addressable
    by their derived ids afterwards.
    """
    statements: dict[str, Statement] = {}
    generators: list[Fact] = []
    conditions: dict[str, Condition] = {}

    def err(line_no: int, message: str) -> DeclarationError:
        return DeclarationError(message, line=line_no, filename=filename)

    def ident(line_no: int, token: str, role: str) -> str:
        if not _IDENT.match(token):
            raise err(line_no, f"invalid {role} name '{token}'")
        return token

    def resolve(line_no: int, owner: str, tokens: list[str]) -> frozenset[Statement]:
        out = set()
        for token in tokens:
            if token not in statements:
                raise err(line_no, f"'{owner}' references unknown statement '{token}'")
            out.add(statements[token])
        return frozenset(out)

    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0]
        if head == "statement":
            if len(tokens) != 2:
                raise err(line_no, "expected: statement <id>")
            name = ident(line_no, tokens[1], "statement")
            if name in statements:
                raise err(line_no, f"duplicate statement '{name}'")
            statements[name] = Statement(name)
        elif head == "fact":
            if len(tokens) < 3 or tokens[2] != "=":
                raise err(line_no, "expected: fact <id> = [<stmt-id> ...]")
            name = ident(line_no, tokens[1], "fact")
            if any(f.id == name for f in generators):
                raise err(line_no, f"duplicate fact '{name}'")
            generators.append(Fact(name, resolve(line_no, name, tokens[3:])))
        elif head == "condition":
            if len(tokens) < 4 or tokens[2] != "=":
                raise err(line_no, "expected: condition <id> = any|true|false ...")
            name = ident(line_no, tokens[1], "condition")
            if name in conditions:
                raise err(line_no, f"duplicate condition '{name}'")
            kind = tokens[3]
            if kind == "any":
                if len(tokens) < 5:
                    raise err(line_no, f"condition '{name}' lists no witness statements")
                conditions[name] = WitnessCondition(
                    name, resolve(line_no, name, tokens[4:])
                )
            elif kind == "true" and len(tokens) == 4:
                conditions[name] = TrueCondition(name)
            elif kind == "false" and len(tokens) == 4:
                conditions[name] = FalseCondition(name)
            else:
                raise err(line_no, f"unknown condition form '{' '.join(tokens[3:])}'")
        else:
            raise err(line_no, f"unknown declaration '{head}'")

    family = close_family(statements.values(), generators)
    return family, conditions
