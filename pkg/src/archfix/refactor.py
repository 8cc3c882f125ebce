"""Facts-level application of recommendations, plus location-anchored patch plans.

Source text is never rewritten; each applied recommendation yields a new
:class:`FactsDatabase` (and, for moves, a new :class:`ConstraintSet`) and a
:class:`PatchPlan` describing the matching source edit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Any, Iterable, NamedTuple

from .dcl import ConstraintSet
from .facts import (
    DeclarationSite,
    Dependency,
    DependencyKind,
    FactsDatabase,
    SourceLocation,
    simple_name,
)
from .recommender import DEFAULT_GAP, Recommendation, precondition_failure

ACTIONS = (
    "replace_declared_type",
    "replace_new_with_factory_call",
    "remove_instantiation",
    "replace_new_with_null",
    "add_supertype",
    "add_annotation",
    "move_type",
)
NOWHERE = SourceLocation("<unknown>", 0, 0)


class StaleRecommendationError(RuntimeError):
    pass


class ConflictError(RuntimeError):
    pass


@dataclass(frozen=True)
class Edit:
    location: SourceLocation
    action: str
    before_text_hint: str
    after_text_hint: str

    def to_dict(self) -> dict[str, Any]:
        loc = self.location
        return {
            "location": {"file": loc.file, "line": loc.line, "column": loc.column},
            "action": self.action,
            "before_text_hint": self.before_text_hint,
            "after_text_hint": self.after_text_hint,
        }


def _edit_order(e: Edit) -> tuple:
    # per file, bottom-up, so earlier edits never shift later ones
    return (e.location.file, -e.location.line, -e.location.column, e.action)


@dataclass(frozen=True)
class PatchPlan:
    edits: tuple[Edit, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "edits", tuple(sorted(self.edits, key=_edit_order)))

    def merge(self, other: "PatchPlan") -> "PatchPlan":
        taken = {(e.location, e.action) for e in self.edits}
        clash = [e for e in other.edits if (e.location, e.action) in taken]
        if clash:
            raise ConflictError(f"two edits touch {clash[0].location}")
        return PatchPlan(self.edits + other.edits)

    def to_json(self) -> str:
        return json.dumps({"edits": [e.to_dict() for e in self.edits]}, indent=2) + "\n"

    def to_text(self) -> str:
        chunks = []
        for e in self.edits:
            chunks.append(f"--- {e.location} ({e.action})\n- {e.before_text_hint}\n+ {e.after_text_hint}\n")
        return "".join(chunks)


class Applied(NamedTuple):
    db: FactsDatabase
    cs: ConstraintSet
    plan: PatchPlan


class BatchResult(NamedTuple):
    db: FactsDatabase
    cs: ConstraintSet
    plan: PatchPlan
    skipped: list[tuple[Recommendation, str]]


def _type_loc(db: FactsDatabase, type_id: str) -> SourceLocation:
    t = db.get(type_id)
    return t.location if t is not None and t.location is not None else NOWHERE


def _header(db: FactsDatabase, type_id: str) -> str:
    t = db.get(type_id)
    word = {"interface": "interface", "annotation": "@interface"}.get(t.kind if t else "", "class")
    return f"{word} {simple_name(type_id)}"


def transform(db: FactsDatabase, cs: ConstraintSet, rec: Recommendation) -> Applied:
    """Apply ``rec`` without re-validating its preconditions."""
    b = rec.bindings
    rule = rec.rule
    if rule == "D1":
        site = db.site(b["site_id"])
        new_type = b["chosen_supertype"]
        retyped = DeclarationSite(
            site.site_id, site.enclosing_type, new_type, site.variable_name, site.used_members, site.location
        )
        db2 = db.evolve(
            declaration_sites=tuple(retyped if s.site_id == site.site_id else s for s in db.declaration_sites),
            dependencies=tuple(
                Dependency(d.from_, new_type, d.kind, d.location, d.site) if d.site == site.site_id else d
                for d in db.dependencies
            ),
        )
        edit = Edit(
            site.location,
            "replace_declared_type",
            f"{simple_name(site.declared_type)} {site.variable_name}",
            f"{simple_name(new_type)} {site.variable_name}",
        )
        return Applied(db2, cs, PatchPlan((edit,)))

    if rule in ("D11", "D12"):
        site = db.site(b["site_id"])
        deps = tuple(d for d in db.dependencies if d.site != site.site_id)
        args = ".." if site.arg_types else ""
        before = f"new {simple_name(site.created_type)}({args})"
        if rule == "D11":
            fb = b["factory"]
            deps += (Dependency(site.enclosing_type, fb, DependencyKind.ACCESS, site.location),)
            edit = Edit(site.location, "replace_new_with_factory_call", before, f"{simple_name(fb)}.{b['method']}({args})")
        elif b["replacement"] == "remove":
            edit = Edit(site.location, "remove_instantiation", before + ";", "")
        else:
            edit = Edit(site.location, "replace_new_with_null", before, "null")
        db2 = db.evolve(
            dependencies=deps,
            creation_sites=tuple(s for s in db.creation_sites if s.site_id != site.site_id),
        )
        return Applied(db2, cs, PatchPlan((edit,)))

    if rule in ("A3", "A6"):
        a = db.get(b["type"])
        loc = _type_loc(db, a.id)
        if rule == "A3":
            target, kind = b["supertype"], DependencyKind(b["edge_kind"])
            changed = replace(a, supertypes=a.supertypes + (target,))
            hint = f"{_header(db, a.id)} {'implements' if kind is DependencyKind.IMPLEMENT else 'extends'} {simple_name(target)}"
            edit = Edit(loc, "add_supertype", _header(db, a.id), hint)
        else:
            target, kind = b["annotation"], DependencyKind.USEANNOTATION
            changed = replace(a, annotations=a.annotations + (target,))
            edit = Edit(loc, "add_annotation", _header(db, a.id), f"@{simple_name(target)} {_header(db, a.id)}")
        db2 = db.evolve(
            types=tuple(changed if t.id == a.id else t for t in db.types),
            dependencies=db.dependencies + (Dependency(a.id, target, kind, loc),),
        )
        return Applied(db2, cs, PatchPlan((edit,)))

    if rule == "A4":
        type_id, target = b["type"], b["target_module"]
        edit = Edit(_type_loc(db, type_id), "move_type", f"{type_id} in {b['from_module']}", f"{type_id} in {target}")
        return Applied(db, cs.with_override(type_id, target), PatchPlan((edit,)))

    raise ValueError(f"unknown rule {rule!r}")


def apply(
    db: FactsDatabase, cs: ConstraintSet, rec: Recommendation, gap: float = DEFAULT_GAP
) -> Applied:
    """Re-check ``rec``'s preconditions against (db, cs), then apply it."""
    problem = precondition_failure(db, cs, rec, gap)
    if problem:
        raise StaleRecommendationError(problem)
    return transform(db, cs, rec)


def apply_all(
    db: FactsDatabase,
    cs: ConstraintSet,
    recs: Iterable[Recommendation],
    gap: float = DEFAULT_GAP,
) -> BatchResult:
    """Apply in order; recommendations invalidated along the way are skipped."""
    plan = PatchPlan()
    skipped: list[tuple[Recommendation, str]] = []
    for rec in recs:
        try:
            db2, cs2, step = apply(db, cs, rec, gap)
            plan = plan.merge(step)
        except StaleRecommendationError as exc:
            skipped.append((rec, f"stale: {exc}"))
            continue
        except ConflictError as exc:
            skipped.append((rec, f"conflict: {exc}"))
            continue
        db, cs = db2, cs2
    return BatchResult(db, cs, plan, skipped)
