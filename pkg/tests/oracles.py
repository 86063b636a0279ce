"""Independent reference computations the test suite checks against.

Everything here recomputes expected results from first principles by
enumeration over small finite universes, without touching the library's
normal-form machinery.
"""

from __future__ import annotations

from typing import Iterable

from privcalc import (
    Condition,
    Employment,
    Entity,
    Fact,
    FactFamily,
    Privilege,
    RbacModel,
    Statement,
)

Grant = tuple[str, str]


def employment_grants(
    emp: Employment, entity_universe: Iterable[Entity]
) -> frozenset[Grant]:
    """(function, entity) pairs an employment denotes over a universe."""
    if emp.is_empty:
        return frozenset()
    assert emp.function is not None and emp.entities is not None
    if emp.entities.is_universal:
        entities = list(entity_universe)
    else:
        entities = list(emp.entities.members or ())
    return frozenset((emp.function.name, e.name) for e in entities)


def set_grants(atoms, entity_universe) -> frozenset[Grant]:
    out: set[Grant] = set()
    for emp in atoms:
        out |= employment_grants(emp, entity_universe)
    return frozenset(out)


def privilege_grants(
    p: Privilege, entity_universe: Iterable[Entity], fact: Fact
) -> frozenset[Grant]:
    """Grants at a fact: atoms whose conditions all hold contribute."""
    universe = list(entity_universe)
    out: set[Grant] = set()
    for atom in p.atoms:
        if all(c.evaluate(fact) for c in atom.conditions):
            out |= employment_grants(atom.employment, universe)
    return frozenset(out)


def closure_masks(generators: Iterable[int], n: int) -> frozenset[int]:
    """Close bitmask subsets of an n-statement universe under union and
    intersection, always including the empty set and the full universe."""
    full = (1 << n) - 1
    sets = {0, full} | set(generators)
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
    return frozenset(sets)


def is_closed_mask_family(family: frozenset[int], n: int) -> bool:
    full = (1 << n) - 1
    if 0 not in family or full not in family:
        return False
    items = list(family)
    for i, a in enumerate(items):
        for b in items[i:]:
            if (a | b) not in family or (a & b) not in family:
                return False
    return True


def all_closed_mask_families(n: int) -> list[frozenset[int]]:
    """Every family over an n-statement universe that a generator set can
    close to; equivalently every union- and intersection-closed
    collection of subsets containing the empty set and the universe."""
    full = (1 << n) - 1
    out = []
    for encoded in range(1 << (1 << n)):
        if not (encoded & 1) or not (encoded >> full) & 1:
            continue  # must contain the empty set and the universe
        family = frozenset(m for m in range(full + 1) if (encoded >> m) & 1)
        if is_closed_mask_family(family, n):
            out.append(family)
    return out


def evidence_sets(condition: Condition, family: FactFamily) -> frozenset[frozenset[Statement]]:
    return frozenset(f.statements for f in family if condition.evaluate(f))


def minimal_evidence_sets(
    condition: Condition, family: FactFamily
) -> frozenset[frozenset[Statement]]:
    """Brute-force search for inclusion-minimal evidences."""
    found = evidence_sets(condition, family)
    return frozenset(x for x in found if not any(y < x for y in found))


def rbac_role_grants(model: RbacModel) -> dict[str, frozenset[tuple[str, str]]]:
    """Per role, every (op, cat) grant through the hierarchy's
    transitive closure."""

    def grants(role: str, seen: frozenset[str]) -> frozenset[tuple[str, str]]:
        out = set(model.roles[role])
        for junior in model.juniors_of(role):
            if junior not in seen:
                out |= grants(junior, seen | {junior})
        return frozenset(out)

    return {role: grants(role, frozenset({role})) for role in model.roles}
