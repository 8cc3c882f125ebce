"""DCL constraint files: module definitions and the four constraint modalities.

Grammar (``%`` starts a comment that runs to end of line)::

    file        := (module_decl | move_decl | constraint)*
    module_decl := "module" NAME ":" pattern ("," pattern)*
    move_decl   := "move" NAME "to" NAME
    constraint  := [LABEL ":"] clause
    clause      := "only" NAME "can-" KIND NAME_LIST
                 | NAME "can-" KIND "-only" NAME_LIST
                 | NAME "cannot-" KIND NAME_LIST
                 | NAME "must-" KIND NAME_LIST

``move`` lines record explicit module-membership overrides produced by the
Move Class refactoring.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from typing import Iterable

from .facts import DependencyKind, FactsDatabase, simple_name

log = logging.getLogger(__name__)

MODALITIES = ("only_can", "can_only", "cannot", "must")
SYSTEM = "$system"
JAVA = "$java"
BUILTIN_NAMES = {SYSTEM: "system", JAVA: "java", "JavaAPI": "java"}
RESERVED = {"module", "only", "move", "to"}


class DclError(ValueError):
    """Base class for constraint-file errors."""


class ParseError(DclError):
    def __init__(self, message: str, line: int = 0, column: int = 0, expected: Iterable[str] = ()):
        self.line, self.column = line, column
        self.expected = tuple(sorted(set(expected)))
        text = f"{line}:{column}: {message}"
        if self.expected:
            text += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(text)


class UnknownKindError(ParseError):
    pass


class UnresolvedModuleError(DclError):
    pass


@dataclass(frozen=True)
class ModuleDef:
    name: str
    patterns: tuple[str, ...] = ()
    builtin: str | None = None

    def __post_init__(self) -> None:
        if self.builtin is not None and self.patterns:
            raise DclError(f"builtin module {self.name} cannot carry patterns")


@dataclass(frozen=True)
class Constraint:
    id: str
    modality: str
    kind: DependencyKind
    origin: str
    targets: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DependencyKind(self.kind))
        if self.modality not in MODALITIES:
            raise DclError(f"bad modality {self.modality!r}")
        if not self.targets:
            raise DclError(f"constraint {self.id} has no targets")
        if self.modality == "must" and len(self.targets) != 1:
            raise DclError(f"must constraint {self.id} must have exactly one target")

    def clause(self) -> str:
        targets = ", ".join(self.targets)
        k = self.kind.value
        if self.modality == "only_can":
            return f"only {self.origin} can-{k} {targets}"
        if self.modality == "can_only":
            return f"{self.origin} can-{k}-only {targets}"
        if self.modality == "cannot":
            return f"{self.origin} cannot-{k} {targets}"
        return f"{self.origin} must-{k} {targets}"

    def __str__(self) -> str:
        return f"{self.id}: {self.clause()}"


@dataclass(frozen=True)
class ConstraintSet:
    modules: tuple[ModuleDef, ...] = ()
    constraints: tuple[Constraint, ...] = ()
    # (type id, module name): explicit membership recorded by a move
    overrides: tuple[tuple[str, str], ...] = ()

    def module(self, name: str) -> ModuleDef | None:
        for m in self.modules:
            if m.name == name:
                return m
        if name in BUILTIN_NAMES:
            return ModuleDef(name, builtin=BUILTIN_NAMES[name])
        return None

    @property
    def module_names(self) -> list[str]:
        return [m.name for m in self.modules]

    def constraint(self, cid: str) -> Constraint:
        for c in self.constraints:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def with_override(self, type_id: str, module: str) -> "ConstraintSet":
        kept = tuple(o for o in self.overrides if o[0] != type_id)
        return ConstraintSet(self.modules, self.constraints, kept + ((type_id, module),))


# --- lexer -------------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>[ \t\r\f\v]+)"
    r"|(?P<nl>\n)"
    r"|(?P<comment>%[^\n]*)"
    r"|(?P<word>[A-Za-z_$*][\w$.*]*(?:-[A-Za-z]+)*)"
    r"|(?P<punct>[:,])"
)


@dataclass
class _Tok:
    kind: str  # word | punct | eof
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        group = m.lastgroup
        if group == "nl":
            line += 1
            line_start = m.end()
        elif group in ("word", "punct"):
            toks.append(_Tok(group, m.group(), line, pos - line_start + 1))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


_NAME = re.compile(r"^[A-Za-z_$][\w$]*(\.[A-Za-z_$][\w$]*)*$")
_PATTERN = re.compile(r"^(\*\*|[A-Za-z_$][\w$]*(\.[A-Za-z_$][\w$]*)*(\.\*\*?)?)$")
_KINDS = {k.value for k in DependencyKind}


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def peek(self, n: int = 1) -> _Tok:
        return self.toks[min(self.i + n, len(self.toks) - 1)]

    def error(self, message: str, expected: Iterable[str] = (), tok: _Tok | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.col, expected)

    def advance(self) -> _Tok:
        t = self.tok
        self.i += 1
        return t

    def expect_punct(self, p: str) -> None:
        if self.tok.kind != "punct" or self.tok.text != p:
            raise self.error(f"unexpected {self.tok.text or 'end of input'!r}", [p])
        self.advance()

    def name(self, what: str = "NAME") -> str:
        t = self.tok
        if t.kind != "word" or not _NAME.match(t.text) or t.text in RESERVED:
            raise self.error(f"unexpected {t.text or 'end of input'!r}", [what])
        self.advance()
        return t.text

    def name_list(self) -> tuple[str, ...]:
        names = [self.name()]
        while self.tok.kind == "punct" and self.tok.text == ",":
            self.advance()
            names.append(self.name())
        return tuple(names)

    def parse(self) -> ConstraintSet:
        modules: list[ModuleDef] = []
        constraints: list[tuple[str | None, _Tok, Constraint]] = []
        overrides: list[tuple[str, str]] = []
        while self.tok.kind != "eof":
            t = self.tok
            if t.kind == "word" and t.text == "module":
                self.advance()
                name = self.name("module name")
                if name in BUILTIN_NAMES:
                    raise self.error(f"cannot redefine builtin module {name}", tok=t)
                if any(m.name == name for m in modules):
                    raise self.error(f"duplicate module {name}", tok=t)
                self.expect_punct(":")
                patterns = [self.pattern()]
                while self.tok.kind == "punct" and self.tok.text == ",":
                    self.advance()
                    patterns.append(self.pattern())
                modules.append(ModuleDef(name, tuple(patterns)))
            elif t.kind == "word" and t.text == "move":
                self.advance()
                type_id = self.name("type name")
                if self.tok.text != "to":
                    raise self.error(f"unexpected {self.tok.text or 'end of input'!r}", ["to"])
                self.advance()
                overrides.append((type_id, self.name("module name")))
            else:
                label = None
                if t.kind == "word" and self.peek().kind == "punct" and self.peek().text == ":":
                    label = self.name("LABEL")
                    self.advance()
                constraints.append((label, t, self.clause(label or "?")))
        return self.finish(modules, constraints, overrides)

    def pattern(self) -> str:
        t = self.tok
        if t.kind != "word" or not _PATTERN.match(t.text):
            raise self.error(f"bad module pattern {t.text or 'end of input'!r}", ["pattern"])
        self.advance()
        return t.text

    def keyword(self, prefix: str, suffix: str = "") -> tuple[DependencyKind, str]:
        t = self.tok
        if t.kind != "word" or not t.text.startswith(prefix):
            return None, t.text  # type: ignore[return-value]
        body = t.text[len(prefix):]
        if suffix:
            if not body.endswith(suffix):
                return None, t.text  # type: ignore[return-value]
            body = body[: -len(suffix)]
        if body not in _KINDS:
            raise UnknownKindError(f"unknown dependency kind {body!r}", t.line, t.col, sorted(_KINDS))
        self.advance()
        return DependencyKind(body), t.text

    def clause(self, cid: str) -> Constraint:
        t = self.tok
        if t.kind == "word" and t.text == "only":
            self.advance()
            origin = self.name()
            kind, _ = self.keyword("can-")
            if kind is None:
                raise self.error(f"unexpected {self.tok.text or 'end of input'!r}", ["can-KIND"])
            return Constraint(cid, "only_can", kind, origin, self.name_list())
        origin = self.name("NAME or 'only'")
        kt = self.tok
        expected = ["can-KIND-only", "cannot-KIND", "must-KIND"]
        if kt.kind != "word":
            raise self.error(f"unexpected {kt.text or 'end of input'!r}", expected)
        if kt.text.startswith("cannot-"):
            kind, _ = self.keyword("cannot-")
            modality = "cannot"
        elif kt.text.startswith("must-"):
            kind, _ = self.keyword("must-")
            modality = "must"
        elif kt.text.startswith("can-") and kt.text.endswith("-only"):
            kind, _ = self.keyword("can-", "-only")
            modality = "can_only"
        elif kt.text.startswith("can-"):
            raise self.error("a 'can-KIND' clause needs a leading 'only' or a trailing '-only'", expected)
        else:
            raise self.error(f"unexpected {kt.text!r}", expected)
        targets = self.name_list()
        if modality == "must" and len(targets) != 1:
            raise ParseError("must constraints take exactly one target", kt.line, kt.col)
        return Constraint(cid, modality, kind, origin, targets)

    def finish(self, modules, constraints, overrides) -> ConstraintSet:
        used = {label for label, _, _ in constraints if label}
        seen: set[str] = set()
        final: list[Constraint] = []
        counter = 0
        for label, tok, c in constraints:
            if label is None:
                counter += 1
                while f"C{counter}" in used:
                    counter += 1
                label = f"C{counter}"
            elif label in seen:
                raise ParseError(f"duplicate constraint id {label}", tok.line, tok.col)
            seen.add(label)
            final.append(Constraint(label, c.modality, c.kind, c.origin, c.targets))
            for name in (c.origin, *c.targets):
                if name.startswith("$") and name not in BUILTIN_NAMES and name not in {m.name for m in modules}:
                    raise UnresolvedModuleError(f"{tok.line}:{tok.col}: unknown builtin module {name}")
        return ConstraintSet(tuple(modules), tuple(final), tuple(overrides))


def parse_dcl(text: str, known_types: Iterable[str] | None = None) -> ConstraintSet:
    """Parse DCL text.

    Names that are neither defined modules nor builtins are kept as bare type
    references and checked when resolved. Pass ``known_types`` to check them
    eagerly instead.
    """
    cs = _Parser(text).parse()
    if known_types is not None:
        universe = sorted(set(known_types))
        for c in cs.constraints:
            for name in (c.origin, *c.targets):
                if cs.module(name) is None:
                    _bare_type(name, universe)
    return cs


def print_dcl(cs: ConstraintSet) -> str:
    lines = [f"module {m.name}: {', '.join(m.patterns)}" for m in cs.modules]
    lines += [f"move {t} to {m}" for t, m in cs.overrides]
    lines += [str(c) for c in cs.constraints]
    return "".join(line + "\n" for line in lines)


# --- module resolution ---------------------------------------------------------


def pattern_matches(pattern: str, type_id: str) -> bool:
    if pattern == "**":
        return True
    if pattern.endswith(".**"):
        return type_id.startswith(pattern[:-2])
    if pattern.endswith(".*"):
        prefix = pattern[:-1]
        return type_id.startswith(prefix) and "." not in type_id[len(prefix):]
    return type_id == pattern


def _bare_type(name: str, universe: Iterable[str]) -> str:
    universe = list(universe)
    if name in universe:
        return name
    hits = [t for t in universe if simple_name(t) == name]
    if len(hits) == 1:
        return hits[0]
    if len(hits) > 1:
        raise UnresolvedModuleError(f"type name {name!r} is ambiguous: {', '.join(sorted(hits))}")
    if "." in name:
        # a fully-qualified reference stands for itself even if no code mentions it yet
        return name
    raise UnresolvedModuleError(f"{name!r} is neither a module, a builtin, nor a known type")


class ModuleResolver:
    """Memoising module-name -> type-set resolution against one database."""

    def __init__(self, cs: ConstraintSet, db: FactsDatabase):
        self.cs, self.db = cs, db
        self._cache: dict[str, frozenset[str]] = {}
        self._overrides = dict(cs.overrides)

    def __call__(self, name: str) -> frozenset[str]:
        hit = self._cache.get(name)
        if hit is None:
            hit = self._cache[name] = self._resolve(name)
        return hit

    def _resolve(self, name: str) -> frozenset[str]:
        db = self.db
        mod = self.cs.module(name)
        if mod is None:
            return frozenset({_bare_type(name, db.universe)})
        if mod.builtin == "system":
            return frozenset(db.internal_ids)
        if mod.builtin == "java":
            return frozenset(t for t in db.universe if db.is_external(t))
        members = {t for t in db.universe if any(pattern_matches(p, t) for p in mod.patterns)}
        for type_id, target in self._overrides.items():
            if target == name:
                members.add(type_id)
            else:
                members.discard(type_id)
        return frozenset(members)

    def union(self, names: Iterable[str]) -> frozenset[str]:
        out: set[str] = set()
        for n in names:
            out |= self(n)
        return frozenset(out)

    def module_of(self, type_id: str) -> str | None:
        """First user-defined module (file order) containing ``type_id``."""
        for m in self.cs.modules:
            if type_id in self(m.name):
                return m.name
        return None


def resolve_module(cs: ConstraintSet, db: FactsDatabase, module_name: str) -> frozenset[str]:
    return ModuleResolver(cs, db)(module_name)


def overlap_warnings(cs: ConstraintSet, db: FactsDatabase) -> list[str]:
    """Pairs of user modules sharing members; legal, but usually a mistake."""
    resolve = ModuleResolver(cs, db)
    out = []
    mods = cs.modules
    for i, a in enumerate(mods):
        for b in mods[i + 1:]:
            shared = resolve(a.name) & resolve(b.name)
            if shared:
                out.append(f"modules {a.name} and {b.name} overlap on {len(shared)} type(s), e.g. {min(shared)}")
    return out
