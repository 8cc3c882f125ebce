"""Resolve parsed compilation units into a :class:`FactsDatabase`."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from ..facts import (
    VOID,
    CreationSite,
    DeclarationSite,
    Dependency,
    DependencyKind,
    FactsDatabase,
    MemberSignature,
    SourceLocation,
    TypeEntity,
    validate,
)
from . import syntax as ast
from .syntax import PRIMITIVE_TYPES, SubsetParseError, parse_unit

OBJECT = "java.lang.Object"
STRING = "java.lang.String"
JAVA_LANG = {
    "Object", "String", "Integer", "Long", "Double", "Float", "Boolean", "Character",
    "Byte", "Short", "Number", "Math", "System", "Exception", "RuntimeException",
    "Throwable", "Error", "Deprecated", "Override", "Iterable", "Runnable", "Thread",
    "StringBuilder", "Class", "Enum", "Comparable", "CharSequence", "Void",
    "IllegalArgumentException", "IllegalStateException", "NullPointerException",
}


class DuplicateTypeError(ValueError):
    pass


@dataclass
class _External:
    votes: set[str] = field(default_factory=set)  # class | interface | annotation
    targets: set[str] = field(default_factory=set)  # annotation targets seen
    members: dict[tuple, MemberSignature] = field(default_factory=dict)
    stub: TypeEntity | None = None

    def entity(self, type_id: str) -> TypeEntity:
        if self.stub is not None:
            extra = tuple(m for k, m in sorted(self.members.items(), key=lambda kv: repr(kv[0]))
                          if k not in {s.key for s in self.stub.members})
            return TypeEntity(
                type_id, self.stub.kind, self.stub.supertypes, self.stub.annotations,
                self.stub.annotation_target, self.stub.members + extra, self.stub.location,
            )
        if "annotation" in self.votes:
            kind = "annotation"
            target = next((t for t in ("type", "method", "field") if t in self.targets), "type")
        else:
            kind, target = ("interface" if "interface" in self.votes else "class"), None
        members = tuple(m for _, m in sorted(self.members.items(), key=lambda kv: repr(kv[0])))
        return TypeEntity(type_id, kind, (), (), target, members)


@dataclass
class _Var:
    type: str
    site: str | None


class _Builder:
    def __init__(self, units: list[ast.CompilationUnit], stubs: FactsDatabase | None):
        self.units: dict[str, ast.CompilationUnit] = {}
        for u in units:
            fqn = f"{u.package}.{u.type.name}" if u.package else u.type.name
            if fqn in self.units:
                other = self.units[fqn].file
                raise DuplicateTypeError(f"type {fqn} declared in both {other} and {u.file}")
            self.units[fqn] = u
        self.fqns = sorted(self.units)
        self.by_package: dict[str, set[str]] = {}
        for fqn, u in self.units.items():
            self.by_package.setdefault(u.package, set()).add(fqn)
        self.ext: dict[str, _External] = {}
        if stubs is not None:
            for t in stubs.types:
                if t.id not in self.units:
                    self.ext[t.id] = _External(stub=t)
        self.supers: dict[str, tuple[str, ...]] = {}
        self.members: dict[str, list[MemberSignature]] = {}
        self.deps: list[Dependency] = []
        self.decl_sites: list[DeclarationSite] = []
        self.new_sites: list[CreationSite] = []
        self.used: dict[str, dict[tuple, MemberSignature]] = {}
        self.counters: dict[str, int] = {}

    # --- naming ------------------------------------------------------------

    def loc(self, unit: ast.CompilationUnit, pos: ast.Pos) -> SourceLocation:
        return SourceLocation(unit.file, pos[0], pos[1])

    def err(self, unit: ast.CompilationUnit, pos: ast.Pos, message: str) -> SubsetParseError:
        return SubsetParseError(message, unit.file, pos[0], pos[1])

    def external(self, fqn: str, vote: str = "class", target: str | None = None) -> str:
        e = self.ext.setdefault(fqn, _External())
        e.votes.add(vote)
        if target:
            e.targets.add(target)
        return fqn

    def resolve(self, unit: ast.CompilationUnit, name: str, vote: str = "class", target: str | None = None) -> str:
        if name in PRIMITIVE_TYPES or name == VOID:
            return name
        own = f"{unit.package}.{unit.type.name}" if unit.package else unit.type.name
        if "." in name:
            return name if name in self.units else self.external(name, vote, target)
        if name == unit.type.name:
            return own
        for imp in unit.imports:
            if not imp.wildcard and imp.name.rsplit(".", 1)[-1] == name:
                return imp.name if imp.name in self.units else self.external(imp.name, vote, target)
        same = f"{unit.package}.{name}" if unit.package else name
        if same in self.units:
            return same
        outside = []
        for imp in unit.imports:
            if imp.wildcard:
                cand = f"{imp.name}.{name}"
                if cand in self.units:
                    return cand
                if imp.name not in self.by_package:
                    outside.append(imp.name)
        if name in JAVA_LANG or not outside:
            return self.external(f"java.lang.{name}", vote, target)
        return self.external(f"{sorted(outside)[0]}.{name}", vote, target)

    def value_type(self, t: str | None) -> str:
        """Type used where a facts reference is mandatory (unknown -> Object)."""
        if t is None or t == "null":
            return self.external(OBJECT)
        return t

    # --- headers and members -------------------------------------------------

    def headers(self) -> None:
        for fqn in self.fqns:
            u = self.units[fqn]
            d = u.type
            supers: list[str] = []
            for ref in d.extends:
                vote = "interface" if d.kind == "interface" else "class"
                supers.append(self.resolve(u, ref.name, vote))
            for ref in d.implements:
                supers.append(self.resolve(u, ref.name, "interface"))
            seen: list[str] = []
            for s in supers:
                if s == fqn:
                    raise self.err(u, d.pos, f"{fqn} cannot inherit from itself")
                if s not in seen:
                    seen.append(s)
            self.supers[fqn] = tuple(seen)

            members: list[MemberSignature] = []
            for f in d.fields:
                t = self.resolve(u, f.type.name)
                members.append(MemberSignature(f.name, 0, (), t, f.static or d.kind == "interface", "field"))
            has_ctor = False
            for m in d.methods:
                params = tuple(self.resolve(u, p.type.name) for p in m.params)
                if m.return_type is None:
                    has_ctor = True
                    members.append(MemberSignature("<init>", len(params), params, VOID, False, "method"))
                else:
                    ret = self.resolve(u, m.return_type.name)
                    members.append(MemberSignature(m.name, len(params), params, ret, m.static, "method"))
            if d.kind == "class" and not has_ctor:
                members.append(MemberSignature("<init>", 0, (), VOID, False, "method"))
            self.members[fqn] = members
        for fqn in self.fqns:
            if fqn in self.hierarchy_without(fqn):
                u = self.units[fqn]
                raise self.err(u, u.type.pos, f"inheritance cycle through {fqn}")

    def hierarchy_without(self, type_id: str) -> set[str]:
        """Internal types reachable upwards from type_id, excluding the start."""
        seen: set[str] = set()
        stack = list(self.supers.get(type_id, ()))
        while stack:
            t = stack.pop()
            if t not in seen:
                seen.add(t)
                stack.extend(self.supers.get(t, ()))
        return seen

    def hierarchy(self, type_id: str) -> list[str]:
        """type_id followed by its supertypes, breadth-first."""
        order, frontier, seen = [type_id], [type_id], {type_id}
        while frontier:
            nxt = []
            for t in frontier:
                if t in self.supers:
                    ss = self.supers[t]
                elif t in self.ext and self.ext[t].stub is not None:
                    ss = self.ext[t].stub.supertypes
                else:
                    ss = ()
                for s in sorted(ss):
                    if s not in seen:
                        seen.add(s)
                        nxt.append(s)
            order += nxt
            frontier = nxt
        return order

    def find_member(
        self, unit: ast.CompilationUnit, pos: ast.Pos, type_id: str, name: str, arity: int, kind: str,
        args: tuple[str, ...] = (),
    ) -> MemberSignature:
        if type_id in PRIMITIVE_TYPES:
            raise self.err(unit, pos, f"cannot use member {name} of primitive {type_id}")
        chain = self.hierarchy(type_id)
        for t in chain:
            pool = self.members.get(t)
            if pool is None and t in self.ext:
                pool = list(self.ext[t].members.values())
                if self.ext[t].stub is not None:
                    pool = list(self.ext[t].stub.members) + pool
            hits = sorted(
                (m for m in pool or () if m.name == name and m.arity == arity and m.member_kind == kind),
                key=lambda m: m.param_types,
            )
            if hits:
                return hits[0]
        # unknown member: it must come from code we cannot see
        owner = next((t for t in chain if t not in self.units), None)
        if owner is None:
            raise self.err(unit, pos, f"{type_id} has no {kind} {name}/{arity}")
        e = self.ext.setdefault(owner, _External())
        if not e.votes and e.stub is None:
            e.votes.add("class")
        params = tuple(self.value_type(a) for a in args)
        sig = MemberSignature(name, arity, params, self.external(OBJECT), False, kind)
        e.members[sig.key] = sig
        return sig

    # --- bodies --------------------------------------------------------------

    def next_site(self, owner: str, tag: str) -> str:
        n = self.counters.get(f"{owner}#{tag}", 0) + 1
        self.counters[f"{owner}#{tag}"] = n
        return f"{owner}#{tag}{n}"

    def dep(self, owner: str, to: str, kind: DependencyKind, loc: SourceLocation, site: str | None = None) -> None:
        if to in PRIMITIVE_TYPES or to == VOID:
            return
        self.deps.append(Dependency(owner, to, kind, loc, site))

    def declare(self, unit, owner: str, type_id: str, var: str, pos: ast.Pos) -> str | None:
        if type_id in PRIMITIVE_TYPES or type_id == VOID:
            return None
        site_id = self.next_site(owner, "decl")
        loc = self.loc(unit, pos)
        self.decl_sites.append(DeclarationSite(site_id, owner, type_id, var, (), loc))
        self.used[site_id] = {}
        self.dep(owner, type_id, DependencyKind.DECLARE, loc, site_id)
        return site_id

    def annotate(self, unit, owner: str, annotations: list[ast.Annotation], target: str) -> list[str]:
        out = []
        for a in annotations:
            t = self.resolve(unit, a.type.name, "annotation", target)
            if t in self.units and self.units[t].type.kind != "annotation":
                raise self.err(unit, a.pos, f"{t} is not an annotation type")
            self.dep(owner, t, DependencyKind.USEANNOTATION, self.loc(unit, a.pos))
            if t not in out:
                out.append(t)
        return out

    def build(self) -> FactsDatabase:
        self.headers()
        entities: list[TypeEntity] = []
        for fqn in self.fqns:
            u = self.units[fqn]
            d = u.type
            annotations = self.annotate(u, fqn, d.annotations, "type")
            for refs, kind in ((d.extends, DependencyKind.EXTEND), (d.implements, DependencyKind.IMPLEMENT)):
                for ref in refs:
                    self.dep(fqn, self.resolve(u, ref.name), kind, self.loc(u, ref.pos))
            field_vars: dict[str, _Var] = {}
            for f in d.fields:
                self.annotate(u, fqn, f.annotations, "field")
                t = self.resolve(u, f.type.name)
                field_vars[f.name] = _Var(t, self.declare(u, fqn, t, f.name, f.pos))
            body = _Body(self, u, fqn, field_vars)
            for f in d.fields:
                if f.init is not None:
                    body.static = f.static
                    body.expr(f.init)
            for m in d.methods:
                self.annotate(u, fqn, m.annotations, "method")
                if m.return_type is not None:
                    rt = self.resolve(u, m.return_type.name)
                    self.declare(u, fqn, rt, f"{m.name}()", m.return_type.pos)
                for ref in m.throws:
                    self.dep(fqn, self.resolve(u, ref.name), DependencyKind.HANDLE, self.loc(u, ref.pos))
                scope: dict[str, _Var] = {}
                for p in m.params:
                    t = self.resolve(u, p.type.name)
                    scope[p.name] = _Var(t, self.declare(u, fqn, t, p.name, p.pos))
                if m.body is not None:
                    body.static = m.static
                    body.run(m.body, scope)
            entities.append(
                TypeEntity(
                    fqn,
                    d.kind,
                    self.supers[fqn],
                    tuple(annotations),
                    "type" if d.kind == "annotation" else None,
                    tuple(self.members[fqn]),
                    self.loc(u, d.pos),
                )
            )
        for ext_id in sorted(self.ext):
            entities.append(self.ext[ext_id].entity(ext_id))
        decls = tuple(
            DeclarationSite(
                s.site_id, s.enclosing_type, s.declared_type, s.variable_name,
                tuple(self.used[s.site_id].values()), s.location,
            )
            for s in self.decl_sites
        )
        db = FactsDatabase(
            types=tuple(sorted(entities, key=lambda t: t.id)),
            dependencies=tuple(self.deps),
            declaration_sites=decls,
            creation_sites=tuple(self.new_sites),
            externals=tuple(sorted(self.ext)),
        )
        validate(db)
        return db


class _Body:
    """Walks statements of one type, tracking local scopes."""

    def __init__(self, b: _Builder, unit: ast.CompilationUnit, owner: str, fields: dict[str, _Var]):
        self.b, self.unit, self.owner, self.fields = b, unit, owner, fields
        self.scopes: list[dict[str, _Var]] = []
        self.static = False

    def lookup(self, name: str) -> _Var | None:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        if name in self.fields:
            return self.fields[name]
        # inherited fields of internal supertypes
        for t in self.b.hierarchy(self.owner)[1:]:
            for m in self.b.members.get(t, ()):
                if m.member_kind == "field" and m.name == name:
                    return _Var(m.return_type, None)
        return None

    def run(self, block: ast.Block, params: dict[str, _Var]) -> None:
        self.scopes = [dict(params)]
        self.stmt(block)
        self.scopes = []

    def stmt(self, s: ast.Stmt) -> None:
        b, u = self.b, self.unit
        if isinstance(s, ast.Block):
            self.scopes.append({})
            for inner in s.stmts:
                self.stmt(inner)
            self.scopes.pop()
        elif isinstance(s, ast.LocalDecl):
            t = b.resolve(u, s.type.name)
            if s.init is not None:
                self.expr(s.init)
            if s.name in self.scopes[-1]:
                raise b.err(u, s.pos, f"variable {s.name} already defined")
            self.scopes[-1][s.name] = _Var(t, b.declare(u, self.owner, t, s.name, s.pos))
        elif isinstance(s, ast.ExprStmt):
            self.expr(s.expr, discarded=True)
        elif isinstance(s, (ast.Return, ast.Throw)):
            if s.value is not None:
                self.expr(s.value)
        elif isinstance(s, ast.If):
            self.expr(s.cond)
            self.stmt(ast.Block([s.then]))
            if s.other is not None:
                self.stmt(ast.Block([s.other]))
        elif isinstance(s, ast.While):
            self.expr(s.cond)
            self.stmt(ast.Block([s.body]))
        elif isinstance(s, ast.Try):
            self.stmt(s.body)
            for c in s.catches:
                t = b.resolve(u, c.type.name)
                b.dep(self.owner, t, DependencyKind.HANDLE, b.loc(u, c.type.pos))
                self.scopes.append({c.var: _Var(t, None)})
                self.stmt(c.body)
                self.scopes.pop()
            if s.final is not None:
                self.stmt(s.final)
        else:  # pragma: no cover - parser produces nothing else
            raise TypeError(s)

    def type_name(self, e: ast.Expr) -> str | None:
        """Dotted name if ``e`` spells a type rather than a value."""
        parts = []
        while isinstance(e, ast.FieldRead):
            parts.append(e.name)
            e = e.target
        if not isinstance(e, ast.Name) or self.lookup(e.ident) is not None:
            return None
        parts.append(e.ident)
        return ".".join(reversed(parts))

    def receiver(self, target: ast.Expr, pos: ast.Pos) -> tuple[str, str | None, bool]:
        """(type, declaration site, is_static_ref) of a member-access target."""
        b, u = self.b, self.unit
        if isinstance(target, ast.Name):
            var = self.lookup(target.ident)
            if var is not None:
                return var.type, var.site, False
        dotted = self.type_name(target)
        if dotted is not None:
            return b.resolve(u, dotted), None, True
        t = self.expr(target)
        if t is None or t in PRIMITIVE_TYPES:
            raise b.err(u, pos, "member access on a value of unknown or primitive type")
        return t, None, False

    def member(self, target: ast.Expr | None, name: str, args: list[ast.Expr], pos: ast.Pos, kind: str) -> str | None:
        b, u = self.b, self.unit
        arg_types = tuple(self.expr(a) for a in args)
        if target is None or isinstance(target, ast.This):
            sig = b.find_member(u, pos, self.owner, name, len(args), kind, arg_types)
            return sig.return_type
        rtype, site, _ = self.receiver(target, pos)
        sig = b.find_member(u, pos, rtype, name, len(args), kind, arg_types)
        if rtype != self.owner:
            b.dep(self.owner, rtype, DependencyKind.ACCESS, b.loc(u, pos), site)
        if site is not None:
            b.used[site][sig.key] = sig
        return sig.return_type

    def expr(self, e: ast.Expr, discarded: bool = False) -> str | None:
        b, u = self.b, self.unit
        if isinstance(e, ast.Lit):
            if e.type == "null":
                return None
            return b.external(STRING) if e.type == "String" else e.type
        if isinstance(e, ast.This):
            return self.owner
        if isinstance(e, ast.Name):
            var = self.lookup(e.ident)
            if var is None:
                raise b.err(u, e.pos, f"unknown variable {e.ident}")
            return var.type
        if isinstance(e, ast.New):
            t = b.resolve(u, e.type.name)
            if t in PRIMITIVE_TYPES or t == VOID:
                raise b.err(u, e.pos, f"cannot instantiate {t}")
            args = tuple(b.value_type(self.expr(a)) for a in e.args)
            if t in b.units:
                decl = b.units[t].type
                if decl.kind != "class":
                    raise b.err(u, e.pos, f"cannot instantiate {decl.kind} {t}")
                arities = {m.arity for m in b.members[t] if m.name == "<init>"}
                if len(args) not in arities:
                    raise b.err(u, e.pos, f"{t} has no constructor taking {len(args)} argument(s)")
            else:
                b.find_member(u, e.pos, t, "<init>", len(args), "method", args)
            site_id = b.next_site(self.owner, "new")
            loc = b.loc(u, e.type.pos)
            b.new_sites.append(CreationSite(site_id, self.owner, t, args, discarded, loc))
            b.dep(self.owner, t, DependencyKind.CREATE, loc, site_id)
            return t
        if isinstance(e, ast.Call):
            return self.member(e.target, e.name, e.args, e.pos, "method")
        if isinstance(e, ast.FieldRead):
            return self.member(e.target, e.name, [], e.pos, "field")
        if isinstance(e, ast.Assign):
            self.expr(e.value)
            return self.expr(e.target)
        if isinstance(e, ast.Binary):
            left, right = self.expr(e.left), self.expr(e.right)
            if e.op in ("==", "!=", "<", ">", "<=", ">=", "&&", "||"):
                return "boolean"
            if e.op == "+" and STRING in (left, right):
                return STRING
            return left if left in PRIMITIVE_TYPES else "int"
        if isinstance(e, ast.Unary):
            inner = self.expr(e.operand)
            return "boolean" if e.op == "!" else inner
        raise TypeError(e)  # pragma: no cover


def extract_files(paths: Iterable[str | Path], root: str | Path, stubs: FactsDatabase | None = None) -> FactsDatabase:
    """Extract facts from the given files; ``root`` anchors the reported paths."""
    root = Path(root)
    units = []
    for p in sorted(Path(p) for p in paths):
        try:
            rel = p.resolve().relative_to(root.resolve()).as_posix()
        except ValueError:
            rel = p.as_posix()
        units.append(parse_unit(p.read_text(encoding="utf-8"), rel))
    return _Builder(units, stubs).build()


def extract(source_root: str | Path, stubs: FactsDatabase | None = None) -> FactsDatabase:
    root = Path(source_root)
    if not root.is_dir():
        raise NotADirectoryError(str(root))
    return extract_files(root.rglob("*.java"), root, stubs)


def extract_sources(sources: dict[str, str], stubs: FactsDatabase | None = None) -> FactsDatabase:
    """Extract from in-memory ``{relative path: text}``."""
    units = [parse_unit(text, path) for path, text in sorted(sources.items())]
    return _Builder(units, stubs).build()
