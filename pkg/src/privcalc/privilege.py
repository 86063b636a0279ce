"""Privileges over employments, and their forms over arrangements.

A privilege is a finite set of atoms, each an employment together with
a set of conditions read conjunctively (no conditions means always
granted). Mergence combines atoms pairwise: the employments merge, and
the condition sets combine according to the active mode. The
INTERSECTION mode follows the definition of mergence literally, which
can weaken mixed condition sets so far that a privilege fails to comply
with itself; the UNION mode keeps the requirements of both sides.
Composition is atom-set union.

Projecting a privilege onto an arrangement (an ordered, pairwise
merge-disjoint employment basis) yields its normal form: per basis
element, the disjunction of the condition conjunctions of the atoms
whose employment overlaps it. Evaluating the coefficients at a fact
yields the pulsed form, a bit vector; pulsing along a fact sequence
yields a trace matrix. Congruence at a fact is pulsed-form equality,
and p complies with q at a fact when p*q is congruent to q there. Both
predicates can be packaged as high-order conditions, which is how guard
privileges are built.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .algebra import (
    Employment,
    Entity,
    EntitySet,
    FunctionSymbol,
    merge_employment,
)
from .errors import PrivCalcError
from .facts import (
    Condition,
    Fact,
    FactFamily,
    FalseCondition,
    HighOrderCondition,
    TrueCondition,
)

__all__ = [
    "Arrangement",
    "ArrangementError",
    "Coefficient",
    "ConditionMergeMode",
    "NormalForm",
    "Privilege",
    "PrivilegeAtom",
    "PulsedForm",
    "TraceMatrix",
    "atomic_arrangement",
    "compliance_condition",
    "compliant",
    "compose",
    "congruence_condition",
    "congruent",
    "merge",
    "normal_form",
    "pulse",
    "structural_eq",
    "trace",
]


class ArrangementError(PrivCalcError):
    """The employment basis is not pairwise merge-disjoint."""


class ConditionMergeMode(Enum):
    """How mergence combines the condition sets of two atoms."""

    INTERSECTION = "intersection"
    UNION = "union"


@dataclass(frozen=True)
class PrivilegeAtom:
    """An employment guarded by a conjunction of conditions."""

    employment: Employment
    conditions: frozenset[Condition] = frozenset()

    def __post_init__(self):
        if self.employment.is_empty:
            raise ValueError("privilege atoms require a non-empty employment")

    def granted(self, fact: Fact) -> bool:
        """All conditions hold at the fact; vacuously true when unconditioned."""
        return all(c.evaluate(fact) for c in self.conditions)

    def sort_key(self) -> tuple:
        return (
            *self.employment.sort_key(),
            tuple(sorted(c.id for c in self.conditions)),
        )


@dataclass(frozen=True)
class Privilege:
    atoms: frozenset[PrivilegeAtom] = frozenset()

    @staticmethod
    def empty() -> Privilege:
        return Privilege()

    @staticmethod
    def single(
        employment: Employment, conditions: Iterable[Condition] = ()
    ) -> Privilege:
        return Privilege(frozenset({PrivilegeAtom(employment, frozenset(conditions))}))

    @staticmethod
    def of(*atoms: PrivilegeAtom) -> Privilege:
        return Privilege(frozenset(atoms))

    @property
    def is_empty(self) -> bool:
        return not self.atoms

    def sorted_atoms(self) -> list[PrivilegeAtom]:
        return sorted(self.atoms, key=PrivilegeAtom.sort_key)

    def restricted(self, scope: EntitySet) -> Privilege:
        """Intersect every atom's entity set with ``scope``."""
        out = []
        for atom in self.atoms:
            assert atom.employment.function is not None
            assert atom.employment.entities is not None
            emp = Employment.atom(
                atom.employment.function, atom.employment.entities.intersect(scope)
            )
            if not emp.is_empty:
                out.append(PrivilegeAtom(emp, atom.conditions))
        return Privilege(frozenset(out))

    def with_condition(self, condition: Condition) -> Privilege:
        """Attach one more condition to every atom (guard application)."""
        return Privilege(
            frozenset(
                PrivilegeAtom(a.employment, a.conditions | {condition})
                for a in self.atoms
            )
        )

    def text(self) -> str:
        """Canonical expression text, atoms in sorted order.

        Condition-free and guard-conditioned privileges re-read as PAL
        expressions. Other condition kinds have no PAL syntax and render
        with a display-only "?" suffix; the empty privilege renders as
        "0".
        """
        if not self.atoms:
            return "0"
        terms: list[str] = []
        for atom in self.sorted_atoms():
            terms.extend(_atom_terms(atom))
        return " + ".join(terms)

    def __add__(self, other: Privilege) -> Privilege:
        return compose(self, other)

    def __mul__(self, other: Privilege) -> Privilege:
        return merge(self, other)

    def __repr__(self) -> str:
        return f"priv:{self.text()}"


def _atom_terms(atom: PrivilegeAtom) -> list[str]:
    emp = atom.employment
    assert emp.function is not None and emp.entities is not None
    name = emp.function.name
    es = emp.entities
    if es.is_universal:
        cores = [name]
    elif es.label is not None:
        cores = [f"{name}/{es.label}"]
    else:
        assert es.members is not None
        cores = [f"{name}/{e.name}" for e in sorted(es.members, key=lambda e: e.name)]
    guards = sorted(c.id for c in atom.conditions if isinstance(c, HighOrderCondition))
    plain = sorted(
        c.id
        for c in atom.conditions
        if not isinstance(c, (HighOrderCondition, TrueCondition))
    )
    suffix = "".join(f" * {g}" for g in guards)
    if plain:
        suffix += " ? " + " & ".join(plain)
    if not suffix:
        return cores
    if len(cores) == 1:
        return [cores[0] + suffix]
    return ["(" + " + ".join(cores) + ")" + suffix]


def merge(
    u: Privilege,
    v: Privilege,
    mode: ConditionMergeMode = ConditionMergeMode.INTERSECTION,
) -> Privilege:
    """Pairwise atom mergence; condition sets combine per ``mode``."""
    out = set()
    for a in u.atoms:
        for b in v.atoms:
            emp = merge_employment(a.employment, b.employment)
            if emp.is_empty:
                continue
            if mode is ConditionMergeMode.INTERSECTION:
                conditions = a.conditions & b.conditions
            else:
                conditions = a.conditions | b.conditions
            out.add(PrivilegeAtom(emp, conditions))
    return Privilege(frozenset(out))


def compose(u: Privilege, v: Privilege) -> Privilege:
    """Atom-set union."""
    return Privilege(u.atoms | v.atoms)


@dataclass(frozen=True)
class Arrangement:
    """Ordered, pairwise merge-disjoint, non-empty employment basis.

    Order is significant only for display: it fixes the row order of
    normal and pulsed forms and trace matrices.
    """

    basis: tuple[Employment, ...]

    def __post_init__(self):
        for i, m in enumerate(self.basis):
            if m.is_empty:
                raise ArrangementError("arrangement elements must be non-empty")
            for n in self.basis[i + 1 :]:
                if m == n:
                    raise ArrangementError(
                        f"duplicate arrangement element {m.render()}"
                    )
                if not merge_employment(m, n).is_empty:
                    raise ArrangementError(
                        f"arrangement elements overlap: {m.render()} and {n.render()}"
                    )

    def labels(self) -> list[str]:
        return [m.render() for m in self.basis]

    def __len__(self) -> int:
        return len(self.basis)


@dataclass(frozen=True)
class Coefficient:
    """Disjunction of condition conjunctions; no disjuncts means false."""

    disjuncts: tuple[frozenset[Condition], ...] = ()

    @staticmethod
    def false() -> Coefficient:
        return Coefficient(())

    @staticmethod
    def true() -> Coefficient:
        return Coefficient((frozenset(),))

    @property
    def is_false(self) -> bool:
        return not self.disjuncts

    @property
    def is_true(self) -> bool:
        return any(not d for d in self.disjuncts)

    def evaluate(self, fact: Fact) -> bool:
        return any(all(c.evaluate(fact) for c in d) for d in self.disjuncts)

    def render(self) -> str:
        if not self.disjuncts:
            return "false"
        parts = [
            "true" if not d else " & ".join(sorted(c.id for c in d))
            for d in self.disjuncts
        ]
        return " | ".join(parts)

    @staticmethod
    def from_conjunctions(conjunctions: Iterable[frozenset[Condition]]) -> Coefficient:
        """Constant folding only: drop always-true members, prune
        conjunctions containing an always-false member, collapse to true
        when a conjunction empties."""
        folded = set()
        for conj in conjunctions:
            if any(isinstance(c, FalseCondition) for c in conj):
                continue
            kept = frozenset(c for c in conj if not isinstance(c, TrueCondition))
            if not kept:
                return Coefficient.true()
            folded.add(kept)
        ordered = sorted(
            folded, key=lambda d: (len(d), tuple(sorted(c.id for c in d)))
        )
        return Coefficient(tuple(ordered))


@dataclass(frozen=True)
class NormalForm:
    arrangement: Arrangement
    coefficients: tuple[Coefficient, ...]

    def to_privilege(self) -> Privilege:
        """One atom per basis element and disjunct; structurally equal to
        any privilege this form was projected from, over the same
        arrangement."""
        atoms = []
        for emp, coeff in zip(self.arrangement.basis, self.coefficients):
            for conj in coeff.disjuncts:
                atoms.append(PrivilegeAtom(emp, conj))
        return Privilege(frozenset(atoms))

    def render(self) -> str:
        return "\n".join(
            f"{emp.render()}: {coeff.render()}"
            for emp, coeff in zip(self.arrangement.basis, self.coefficients)
        )


def normal_form(p: Privilege, arrangement: Arrangement) -> NormalForm:
    """Project ``p`` onto the basis: per element, the disjunction of the
    condition conjunctions of the atoms whose employment overlaps it;
    constant false where no atom does."""
    coefficients = []
    for m in arrangement.basis:
        conjs = [
            a.conditions
            for a in p.atoms
            if not merge_employment(a.employment, m).is_empty
        ]
        coefficients.append(Coefficient.from_conjunctions(conjs))
    return NormalForm(arrangement, tuple(coefficients))


@dataclass(frozen=True)
class PulsedForm:
    arrangement: Arrangement
    bits: tuple[bool, ...]

    def render(self) -> str:
        return " ".join("1" if b else "0" for b in self.bits)


def pulse(p: Privilege, arrangement: Arrangement, fact: Fact) -> PulsedForm:
    """Normal-form coefficients evaluated at one fact."""
    nf = normal_form(p, arrangement)
    return PulsedForm(arrangement, tuple(c.evaluate(fact) for c in nf.coefficients))


@dataclass(frozen=True)
class TraceMatrix:
    """Pulses along a fact sequence; rows follow the basis, columns the
    sequence."""

    arrangement: Arrangement
    sequence: tuple[Fact, ...]
    cells: tuple[tuple[bool, ...], ...]

    def column(self, j: int) -> tuple[bool, ...]:
        return tuple(row[j] for row in self.cells)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["employment", *(f.id for f in self.sequence)])
        for emp, row in zip(self.arrangement.basis, self.cells):
            writer.writerow([emp.render(), *("1" if b else "0" for b in row)])
        return out.getvalue()


def trace(
    p: Privilege, arrangement: Arrangement, sequence: Sequence[Fact]
) -> TraceMatrix:
    nf = normal_form(p, arrangement)
    cells = tuple(
        tuple(c.evaluate(t) for t in sequence) for c in nf.coefficients
    )
    return TraceMatrix(arrangement, tuple(sequence), cells)


def structural_eq(
    u: Privilege, v: Privilege, arrangement: Arrangement, family: FactFamily
) -> bool:
    """Extensional normal-form equality: the coefficients agree on every
    basis element at every fact of the family."""
    nu = normal_form(u, arrangement)
    nv = normal_form(v, arrangement)
    for cu, cv in zip(nu.coefficients, nv.coefficients):
        for t in family:
            if cu.evaluate(t) != cv.evaluate(t):
                return False
    return True


def congruent(
    u: Privilege, v: Privilege, arrangement: Arrangement, fact: Fact
) -> bool:
    """Same pulsed form at the fact."""
    return pulse(u, arrangement, fact).bits == pulse(v, arrangement, fact).bits


def compliant(
    p: Privilege,
    q: Privilege,
    arrangement: Arrangement,
    fact: Fact,
    mode: ConditionMergeMode = ConditionMergeMode.INTERSECTION,
) -> bool:
    """p*q is congruent to q at the fact."""
    return congruent(merge(p, q, mode), q, arrangement, fact)


def compliance_condition(
    p: Privilege,
    q: Privilege,
    arrangement: Arrangement,
    mode: ConditionMergeMode = ConditionMergeMode.INTERSECTION,
) -> Condition:
    """High-order condition testing compliance of ``p`` to ``q``.

    The operands, the arrangement and the merge mode are captured at
    construction; evaluation needs only the fact. Later rebindings of
    whatever names produced ``p`` and ``q`` do not change the condition.
    """
    merged = merge(p, q, mode)
    label = f"[{p.text()} <: {q.text()}]"

    def check(fact: Fact) -> bool:
        return congruent(merged, q, arrangement, fact)

    return HighOrderCondition(label, check)


def congruence_condition(
    u: Privilege, v: Privilege, arrangement: Arrangement
) -> Condition:
    """High-order condition testing congruence of the captured operands."""
    label = f"[{u.text()} ~ {v.text()}]"

    def check(fact: Fact) -> bool:
        return congruent(u, v, arrangement, fact)

    return HighOrderCondition(label, check)


def atomic_arrangement(
    functions: Iterable[FunctionSymbol], entities: Iterable[Entity]
) -> Arrangement:
    """One basis element per (function, entity) pair; the finest basis
    over the given universe."""
    basis = [
        Employment(f, EntitySet.finite([e]))
        for f in sorted(set(functions), key=lambda f: f.name)
        for e in sorted(set(entities), key=lambda e: e.name)
    ]
    return Arrangement(tuple(basis))
