"""Language-neutral dependency facts: types, members, dependencies and sites.

A :class:`FactsDatabase` is an immutable snapshot. Refactorings never mutate
it; they build a new one with :func:`dataclasses.replace`.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Mapping

log = logging.getLogger(__name__)

FACTS_VERSION = 1
VOID = "void"
PRIMITIVES = frozenset(
    {"boolean", "byte", "char", "short", "int", "long", "float", "double"}
)


class FactsError(ValueError):
    """Malformed facts document or broken database invariant."""


class CycleError(FactsError):
    """The supertype graph contains a cycle."""


class DependencyKind(str, Enum):
    ACCESS = "access"
    DECLARE = "declare"
    CREATE = "create"
    EXTEND = "extend"
    IMPLEMENT = "implement"
    DERIVE = "derive"
    USEANNOTATION = "useannotation"
    DEPEND = "depend"
    HANDLE = "handle"

    @property
    def is_abstract(self) -> bool:
        return self in (DependencyKind.DEPEND, DependencyKind.DERIVE)

    def __str__(self) -> str:
        return self.value


CONCRETE_KINDS = tuple(k for k in DependencyKind if not k.is_abstract)


def kind_subsumes(general: DependencyKind, concrete: DependencyKind) -> bool:
    """True iff a constraint on ``general`` also covers ``concrete``."""
    general, concrete = DependencyKind(general), DependencyKind(concrete)
    if general is concrete or general is DependencyKind.DEPEND:
        return True
    return general is DependencyKind.DERIVE and concrete in (
        DependencyKind.EXTEND,
        DependencyKind.IMPLEMENT,
    )


@dataclass(frozen=True, order=True)
class SourceLocation:
    file: str
    line: int
    column: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


@dataclass(frozen=True)
class MemberSignature:
    name: str
    arity: int
    param_types: tuple[str, ...] = ()
    return_type: str = VOID
    is_static: bool = False
    member_kind: str = "method"

    def __post_init__(self) -> None:
        if self.member_kind not in ("method", "field"):
            raise FactsError(f"bad member_kind {self.member_kind!r}")
        if self.arity != len(self.param_types):
            raise FactsError(f"member {self.name}: arity {self.arity} != {len(self.param_types)} params")
        if self.member_kind == "field" and self.arity:
            raise FactsError(f"field {self.name} must have arity 0")

    @property
    def key(self) -> tuple:
        # identity used by typecheck; return type and staticness are ignored
        return (self.name, self.arity, self.param_types, self.member_kind)

    def __str__(self) -> str:
        if self.member_kind == "field":
            return self.name
        return f"{self.name}({', '.join(simple_name(p) for p in self.param_types)})"


@dataclass(frozen=True)
class TypeEntity:
    id: str
    kind: str = "class"
    supertypes: tuple[str, ...] = ()
    annotations: tuple[str, ...] = ()
    annotation_target: str | None = None
    members: tuple[MemberSignature, ...] = ()
    location: SourceLocation | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("class", "interface", "annotation"):
            raise FactsError(f"type {self.id}: bad kind {self.kind!r}")
        if len(set(self.supertypes)) != len(self.supertypes):
            raise FactsError(f"type {self.id}: duplicate supertypes")
        if self.id in self.supertypes:
            raise FactsError(f"type {self.id}: self-inheritance")
        if (self.kind == "annotation") != (self.annotation_target is not None):
            raise FactsError(f"type {self.id}: annotation_target present iff kind = annotation")
        if self.annotation_target not in (None, "type", "method", "field"):
            raise FactsError(f"type {self.id}: bad annotation_target {self.annotation_target!r}")


@dataclass(frozen=True)
class Dependency:
    from_: str
    to: str
    kind: DependencyKind
    location: SourceLocation
    site: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DependencyKind(self.kind))
        if self.kind.is_abstract:
            raise FactsError(f"stored dependency {self.from_}->{self.to} has abstract kind {self.kind}")


@dataclass(frozen=True)
class DeclarationSite:
    site_id: str
    enclosing_type: str
    declared_type: str
    variable_name: str
    used_members: tuple[MemberSignature, ...]
    location: SourceLocation


@dataclass(frozen=True)
class CreationSite:
    site_id: str
    enclosing_type: str
    created_type: str
    arg_types: tuple[str, ...]
    result_discarded: bool
    location: SourceLocation


def simple_name(type_id: str) -> str:
    return type_id.rsplit(".", 1)[-1]


def matches_prefix(type_id: str, prefix: str) -> bool:
    prefix = prefix.rstrip(".")
    return type_id == prefix or type_id.startswith(prefix + ".")


@dataclass(frozen=True)
class FactsDatabase:
    types: tuple[TypeEntity, ...] = ()
    dependencies: tuple[Dependency, ...] = ()
    declaration_sites: tuple[DeclarationSite, ...] = ()
    creation_sites: tuple[CreationSite, ...] = ()
    externals: tuple[str, ...] = ()

    # derived indices; cached_property writes straight into __dict__, so this
    # is safe on a frozen dataclass and excluded from equality
    @cached_property
    def type_map(self) -> dict[str, TypeEntity]:
        return {t.id: t for t in self.types}

    @cached_property
    def universe(self) -> tuple[str, ...]:
        """Every type id known to the database, including bare external targets."""
        ids = set(self.type_map)
        ids.update(d.to for d in self.dependencies)
        return tuple(sorted(ids))

    @cached_property
    def internal_ids(self) -> tuple[str, ...]:
        return tuple(t for t in self.universe if not self.is_external(t))

    @cached_property
    def outgoing(self) -> dict[str, tuple[Dependency, ...]]:
        out: dict[str, list[Dependency]] = {}
        for d in self.dependencies:
            out.setdefault(d.from_, []).append(d)
        return {k: tuple(v) for k, v in out.items()}

    @cached_property
    def site_map(self) -> dict[str, DeclarationSite | CreationSite]:
        sites: dict[str, DeclarationSite | CreationSite] = {}
        for s in (*self.declaration_sites, *self.creation_sites):
            sites[s.site_id] = s
        return sites

    def get(self, type_id: str) -> TypeEntity | None:
        return self.type_map.get(type_id)

    def __contains__(self, type_id: object) -> bool:
        return type_id in self.type_map or (
            isinstance(type_id, str) and type_id in self.universe
        )

    def is_external(self, type_id: str) -> bool:
        return any(matches_prefix(type_id, p) for p in self.externals)

    def site(self, site_id: str | None) -> DeclarationSite | CreationSite | None:
        return None if site_id is None else self.site_map.get(site_id)

    def evolve(self, **changes: Any) -> "FactsDatabase":
        return replace(self, **changes)


def _check_type_ref(db: FactsDatabase, ref: str, where: str, problems: list[str]) -> None:
    if ref == VOID or ref in PRIMITIVES:
        return
    if ref not in db.type_map and not db.is_external(ref):
        problems.append(f"{where}: unresolved type {ref!r}")


def validate(db: FactsDatabase) -> None:
    """Raise :class:`FactsError` listing every broken invariant."""
    problems: list[str] = []
    seen: set[str] = set()
    for t in db.types:
        if t.id in seen:
            problems.append(f"duplicate type id {t.id!r}")
        seen.add(t.id)
        for ref in (*t.supertypes, *t.annotations):
            _check_type_ref(db, ref, f"type {t.id}", problems)
        for m in t.members:
            for ref in (*m.param_types, m.return_type):
                _check_type_ref(db, ref, f"member {t.id}.{m.name}", problems)
    for d in db.dependencies:
        if d.from_ not in db.type_map:
            problems.append(f"dependency source {d.from_!r} is not a known type")
        _check_type_ref(db, d.to, f"dependency {d.from_}->{d.to}", problems)
        if d.site is not None and d.site not in db.site_map:
            problems.append(f"dependency {d.from_}->{d.to} links unknown site {d.site!r}")

    site_ids = [s.site_id for s in (*db.declaration_sites, *db.creation_sites)]
    if len(site_ids) != len(set(site_ids)):
        problems.append("duplicate site ids")

    paired = {
        (d.site, d.kind)
        for d in db.dependencies
        if d.kind in (DependencyKind.DECLARE, DependencyKind.CREATE)
    }
    for s in db.declaration_sites:
        if (s.site_id, DependencyKind.DECLARE) not in paired:
            problems.append(f"declaration site {s.site_id} has no declare dependency")
        _check_type_ref(db, s.enclosing_type, f"site {s.site_id}", problems)
        _check_type_ref(db, s.declared_type, f"site {s.site_id}", problems)
        decl = db.get(s.declared_type)
        if decl is not None and not db.is_external(s.declared_type):
            try:
                provided = {m.key for m in provided_members(db, s.declared_type)}
            except CycleError as exc:
                problems.append(str(exc))
                provided = set()
            for m in s.used_members:
                if m.key not in provided:
                    problems.append(f"site {s.site_id} uses {m} not provided by {s.declared_type}")
    for s in db.creation_sites:
        if (s.site_id, DependencyKind.CREATE) not in paired:
            problems.append(f"creation site {s.site_id} has no create dependency")
        _check_type_ref(db, s.enclosing_type, f"site {s.site_id}", problems)
        _check_type_ref(db, s.created_type, f"site {s.site_id}", problems)
        created = db.get(s.created_type)
        if created is not None and not db.is_external(s.created_type):
            arities = {m.arity for m in created.members if m.name == "<init>"}
            if arities and len(s.arg_types) not in arities:
                problems.append(f"creation site {s.site_id}: no constructor of arity {len(s.arg_types)}")
    for d in db.dependencies:
        if d.kind is DependencyKind.DECLARE and not isinstance(db.site(d.site), DeclarationSite):
            problems.append(f"declare dependency {d.from_}->{d.to} at {d.location} lacks a declaration site")
        if d.kind is DependencyKind.CREATE and not isinstance(db.site(d.site), CreationSite):
            problems.append(f"create dependency {d.from_}->{d.to} at {d.location} lacks a creation site")
    if problems:
        raise FactsError("; ".join(problems))


def resolve_super(db: FactsDatabase, type_id: str) -> list[str]:
    """Transitive supertypes, breadth-first, most specific first.

    Supertypes at the same depth are ordered lexicographically.
    """
    _assert_acyclic(db, type_id)
    result: list[str] = []
    seen = {type_id}
    frontier = [type_id]
    while frontier:
        level: set[str] = set()
        for t in frontier:
            entity = db.get(t)
            if entity is not None:
                level.update(s for s in entity.supertypes if s not in seen)
        ordered = sorted(level)
        seen.update(ordered)
        result.extend(ordered)
        frontier = ordered
    return result


def _assert_acyclic(db: FactsDatabase, start: str) -> None:
    # iterative DFS with colouring; only the part reachable from start matters
    state: dict[str, int] = {}
    stack: list[tuple[str, Iterable[str]]] = []

    def supers(t: str) -> Iterable[str]:
        entity = db.get(t)
        return iter(entity.supertypes) if entity else iter(())

    state[start] = 1
    stack.append((start, supers(start)))
    while stack:
        node, it = stack[-1]
        nxt = next(it, None)
        if nxt is None:
            state[node] = 2
            stack.pop()
            continue
        if state.get(nxt) == 1:
            raise CycleError(f"supertype cycle through {nxt}")
        if nxt not in state:
            state[nxt] = 1
            stack.append((nxt, supers(nxt)))


def provided_members(db: FactsDatabase, type_id: str) -> set[MemberSignature]:
    members: set[MemberSignature] = set()
    keys: set[tuple] = set()
    for t in (type_id, *resolve_super(db, type_id)):
        entity = db.get(t)
        if entity is None:
            continue
        for m in entity.members:
            # diamond inheritance of one signature collapses to the first seen
            if m.key not in keys:
                keys.add(m.key)
                members.add(m)
    return members


# --- JSON serialisation ----------------------------------------------------

_TOP_FIELDS = {"facts_version", "types", "dependencies", "declaration_sites", "creation_sites", "externals"}
_TYPE_FIELDS = {"id", "kind", "supertypes", "annotations", "annotation_target", "members", "location"}
_MEMBER_FIELDS = {"name", "arity", "param_types", "return_type", "is_static", "member_kind"}
_DEP_FIELDS = {"from", "to", "kind", "location", "site"}
_DECL_FIELDS = {"site_id", "enclosing_type", "declared_type", "variable_name", "used_members", "location"}
_NEW_FIELDS = {"site_id", "enclosing_type", "created_type", "arg_types", "result_discarded", "location"}
_LOC_FIELDS = {"file", "line", "column"}


def _fields(obj: Any, allowed: set[str], required: set[str], where: str) -> Mapping[str, Any]:
    if not isinstance(obj, dict):
        raise FactsError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = set(obj) - allowed
    if unknown:
        raise FactsError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise FactsError(f"{where}: missing field(s) {sorted(missing)}")
    return obj


def _loc_from(obj: Any, where: str) -> SourceLocation:
    o = _fields(obj, _LOC_FIELDS, _LOC_FIELDS, where)
    return SourceLocation(str(o["file"]), int(o["line"]), int(o["column"]))


def _member_from(obj: Any, where: str) -> MemberSignature:
    o = _fields(obj, _MEMBER_FIELDS, {"name", "arity"}, where)
    return MemberSignature(
        name=o["name"],
        arity=int(o["arity"]),
        param_types=tuple(o.get("param_types", ())),
        return_type=o.get("return_type") or VOID,
        is_static=bool(o.get("is_static", False)),
        member_kind=o.get("member_kind", "method"),
    )


def facts_from_dict(doc: Mapping[str, Any]) -> FactsDatabase:
    """Build a database from a parsed facts document (strict schema)."""
    try:
        return _facts_from_dict(doc)
    except FactsError:
        raise
    except (TypeError, ValueError, KeyError, AttributeError) as exc:
        raise FactsError(f"malformed facts document: {exc}") from None


def _facts_from_dict(doc: Mapping[str, Any]) -> FactsDatabase:
    o = _fields(doc, _TOP_FIELDS, {"facts_version"}, "facts")
    if o["facts_version"] != FACTS_VERSION:
        raise FactsError(f"unsupported facts_version {o['facts_version']!r}")
    types = []
    for i, t in enumerate(o.get("types", [])):
        w = f"types[{i}]"
        t = _fields(t, _TYPE_FIELDS, {"id"}, w)
        types.append(
            TypeEntity(
                id=t["id"],
                kind=t.get("kind", "class"),
                supertypes=tuple(t.get("supertypes", ())),
                annotations=tuple(t.get("annotations", ())),
                annotation_target=t.get("annotation_target"),
                members=tuple(_member_from(m, f"{w}.members[{j}]") for j, m in enumerate(t.get("members", ()))),
                location=_loc_from(t["location"], w) if t.get("location") else None,
            )
        )
    deps = []
    for i, d in enumerate(o.get("dependencies", [])):
        w = f"dependencies[{i}]"
        d = _fields(d, _DEP_FIELDS, {"from", "to", "kind", "location"}, w)
        try:
            kind = DependencyKind(d["kind"])
        except ValueError:
            raise FactsError(f"{w}: unknown dependency kind {d['kind']!r}") from None
        deps.append(Dependency(d["from"], d["to"], kind, _loc_from(d["location"], w), d.get("site")))
    decls = []
    for i, s in enumerate(o.get("declaration_sites", [])):
        w = f"declaration_sites[{i}]"
        s = _fields(s, _DECL_FIELDS, _DECL_FIELDS - {"used_members"}, w)
        decls.append(
            DeclarationSite(
                s["site_id"],
                s["enclosing_type"],
                s["declared_type"],
                s["variable_name"],
                tuple(_member_from(m, f"{w}.used_members[{j}]") for j, m in enumerate(s.get("used_members", ()))),
                _loc_from(s["location"], w),
            )
        )
    news = []
    for i, s in enumerate(o.get("creation_sites", [])):
        w = f"creation_sites[{i}]"
        s = _fields(s, _NEW_FIELDS, _NEW_FIELDS - {"arg_types", "result_discarded"}, w)
        news.append(
            CreationSite(
                s["site_id"],
                s["enclosing_type"],
                s["created_type"],
                tuple(s.get("arg_types", ())),
                bool(s.get("result_discarded", False)),
                _loc_from(s["location"], w),
            )
        )
    db = FactsDatabase(tuple(types), tuple(deps), tuple(decls), tuple(news), tuple(o.get("externals", ())))

    # partial extraction: dependencies pointing nowhere are dropped, not fatal
    dropped = [d for d in db.dependencies if not (d.to in db.type_map or db.is_external(d.to))]
    if dropped:
        for d in dropped:
            log.warning("dropping dependency %s -> %s at %s: unresolvable target", d.from_, d.to, d.location)
        # a site whose own dependency was dropped goes too, with everything linked to it
        gone = {d.site for d in dropped if d.site and d.kind in (DependencyKind.DECLARE, DependencyKind.CREATE)}
        db = db.evolve(
            dependencies=tuple(d for d in db.dependencies if d not in dropped and d.site not in gone),
            declaration_sites=tuple(s for s in db.declaration_sites if s.site_id not in gone),
            creation_sites=tuple(s for s in db.creation_sites if s.site_id not in gone),
        )
    validate(db)
    return db


def _loc_dict(loc: SourceLocation) -> dict[str, Any]:
    return {"file": loc.file, "line": loc.line, "column": loc.column}


def _member_dict(m: MemberSignature) -> dict[str, Any]:
    return {
        "name": m.name,
        "arity": m.arity,
        "param_types": list(m.param_types),
        "return_type": m.return_type,
        "is_static": m.is_static,
        "member_kind": m.member_kind,
    }


def facts_to_dict(db: FactsDatabase) -> dict[str, Any]:
    return {
        "facts_version": FACTS_VERSION,
        "types": [
            {
                "id": t.id,
                "kind": t.kind,
                "supertypes": list(t.supertypes),
                "annotations": list(t.annotations),
                "annotation_target": t.annotation_target,
                "members": [_member_dict(m) for m in t.members],
                "location": _loc_dict(t.location) if t.location else None,
            }
            for t in db.types
        ],
        "dependencies": [
            {"from": d.from_, "to": d.to, "kind": d.kind.value, "location": _loc_dict(d.location), "site": d.site}
            for d in db.dependencies
        ],
        "declaration_sites": [
            {
                "site_id": s.site_id,
                "enclosing_type": s.enclosing_type,
                "declared_type": s.declared_type,
                "variable_name": s.variable_name,
                "used_members": [_member_dict(m) for m in s.used_members],
                "location": _loc_dict(s.location),
            }
            for s in db.declaration_sites
        ],
        "creation_sites": [
            {
                "site_id": s.site_id,
                "enclosing_type": s.enclosing_type,
                "created_type": s.created_type,
                "arg_types": list(s.arg_types),
                "result_discarded": s.result_discarded,
                "location": _loc_dict(s.location),
            }
            for s in db.creation_sites
        ],
        "externals": list(db.externals),
    }


def load_facts(path: str | Path) -> FactsDatabase:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FactsError(f"{path}: invalid JSON: {exc}") from None
    return facts_from_dict(doc)


def emit_facts(db: FactsDatabase, path: str | Path) -> None:
    Path(path).write_text(json.dumps(facts_to_dict(db), indent=2) + "\n", encoding="utf-8")
