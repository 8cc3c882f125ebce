"""Conformance checking: divergences and absences of a database against DCL."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Iterable

from .dcl import Constraint, ConstraintSet, ModuleResolver
from .facts import (
    DependencyKind,
    FactsDatabase,
    SourceLocation,
    kind_subsumes,
    resolve_super,
)

DERIVE_FAMILY = (DependencyKind.DERIVE, DependencyKind.EXTEND, DependencyKind.IMPLEMENT)


@dataclass(frozen=True)
class Violation:
    constraint_id: str
    flavor: str  # divergence | absence
    offender: str
    counterpart: str
    kind: DependencyKind
    location: SourceLocation | None
    site: str | None = None

    @property
    def key(self) -> tuple:
        return (self.constraint_id, self.flavor, self.offender, self.counterpart, self.kind.value, self.location, self.site)

    def to_dict(self) -> dict[str, Any]:
        loc = self.location
        return {
            "constraint_id": self.constraint_id,
            "flavor": self.flavor,
            "offender": self.offender,
            "counterpart": self.counterpart,
            "kind": self.kind.value,
            "location": None if loc is None else {"file": loc.file, "line": loc.line, "column": loc.column},
            "site": self.site,
        }

    def __str__(self) -> str:
        where = str(self.location) if self.location else "?"
        return f"{self.constraint_id} {self.flavor} {self.offender} --{self.kind.value}--> {self.counterpart} @ {where}"


def _sort_key(v: Violation) -> tuple:
    loc = v.location or SourceLocation("", 0, 0)
    return (v.offender, loc, v.counterpart, v.kind.value)


def _divergences(db: FactsDatabase, c: Constraint, resolve: ModuleResolver) -> list[Violation]:
    origin = resolve(c.origin)
    targets = resolve.union(c.targets)
    out = []
    for d in db.dependencies:
        if not kind_subsumes(c.kind, d.kind):
            continue
        if c.modality == "cannot":
            hit = d.from_ in origin and d.to in targets
        elif c.modality == "only_can":
            hit = d.from_ not in origin and d.to in targets
        else:  # can_only: intra-module and self dependencies are exempt
            hit = d.from_ in origin and d.to not in targets and d.to not in origin and d.to != d.from_
        if hit:
            out.append(Violation(c.id, "divergence", d.from_, d.to, d.kind, d.location, d.site))
    return out


def satisfies_must(db: FactsDatabase, type_id: str, kind: DependencyKind, targets: frozenset[str]) -> bool:
    if kind is DependencyKind.USEANNOTATION:
        entity = db.get(type_id)
        # only directly applied annotations count
        return entity is not None and any(a in targets for a in entity.annotations)
    if kind in DERIVE_FAMILY:
        return any(s in targets for s in resolve_super(db, type_id))
    return any(
        d.to in targets and kind_subsumes(kind, d.kind) for d in db.outgoing.get(type_id, ())
    )


def _absences(db: FactsDatabase, c: Constraint, resolve: ModuleResolver) -> list[Violation]:
    targets = resolve.union(c.targets)
    out = []
    for t in sorted(resolve(c.origin)):
        if not satisfies_must(db, t, c.kind, targets):
            entity = db.get(t)
            loc = entity.location if entity else None
            out.append(Violation(c.id, "absence", t, c.targets[0], c.kind, loc))
    return out


def check_constraint(db: FactsDatabase, c: Constraint, resolve: ModuleResolver) -> list[Violation]:
    found = _absences(db, c, resolve) if c.modality == "must" else _divergences(db, c, resolve)
    return sorted(found, key=_sort_key)


def check(db: FactsDatabase, cs: ConstraintSet) -> list[Violation]:
    """All violations, ordered by constraint, then offender, then location."""
    resolve = ModuleResolver(cs, db)
    out: list[Violation] = []
    for c in cs.constraints:
        out.extend(check_constraint(db, c, resolve))
    return out


def edge_violates(
    c: Constraint, resolve: ModuleResolver, from_: str, kind: DependencyKind, to: str
) -> bool:
    """Would a concrete dependency (from_, kind, to) diverge from ``c``?"""
    if c.modality == "must" or not kind_subsumes(c.kind, kind):
        return False
    origin = resolve(c.origin)
    targets = resolve.union(c.targets)
    if c.modality == "cannot":
        return from_ in origin and to in targets
    if c.modality == "only_can":
        return from_ not in origin and to in targets
    return from_ in origin and to not in targets and to not in origin and to != from_


def can(
    db: FactsDatabase,
    cs: ConstraintSet,
    from_: str,
    kind: DependencyKind,
    to: str,
    resolve: ModuleResolver | None = None,
) -> bool:
    """Point query: may ``from_`` establish a ``kind`` dependency on ``to``?

    Abstract kinds are allowed only if every concrete kind they cover is.
    """
    kind = DependencyKind(kind)
    resolve = resolve or ModuleResolver(cs, db)
    kinds = [k for k in DependencyKind if not k.is_abstract and kind_subsumes(kind, k)]
    return not any(
        edge_violates(c, resolve, from_, k, to) for c in cs.constraints for k in kinds
    )


def format_text(violations: Iterable[Violation]) -> str:
    return "".join(f"{v}\n" for v in violations)


def format_json(violations: Iterable[Violation]) -> str:
    return json.dumps([v.to_dict() for v in violations], indent=2) + "\n"
