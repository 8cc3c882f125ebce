"""Refactoring recommendations for violations, plus the auxiliary functions
their preconditions need (suitable module, factory search, typecheck).

Rules handled, keyed by the violated constraint:

====  ====================  ==================================================
rule  constraint            repair
====  ====================  ==================================================
D1    cannot/only/can-only  retype a declaration to an admissible supertype
D11   cannot/only, create   replace ``new B(..)`` with a factory call
D12   cannot/only, create   drop the instantiation (nobody may create ``B``)
A3    must-derive family    add the missing supertype
A6    must-useannotation    add the missing type annotation
A4    must-*                move the class to its most similar module
====  ====================  ==================================================
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Mapping

from .checker import DERIVE_FAMILY, Violation, can, check
from .dcl import SYSTEM, Constraint, ConstraintSet, ModuleResolver
from .facts import (
    CreationSite,
    DeclarationSite,
    DependencyKind,
    FactsDatabase,
    MemberSignature,
    PRIMITIVES,
    kind_subsumes,
    provided_members,
    resolve_super,
    simple_name,
)

DEFAULT_GAP = 0.1
RULE_ORDER = ("D1", "D11", "D12", "A3", "A6", "A4")


class NoModulesError(ValueError):
    pass


@dataclass(frozen=True)
class SimilarityReport:
    subject: str
    scores: tuple[tuple[str, float], ...]
    winner: str
    runner_up_gap: float

    def score(self, module: str) -> float:
        return dict(self.scores)[module]

    def to_dict(self) -> dict[str, Any]:
        return {
            "subject": self.subject,
            "scores": [[m, s] for m, s in self.scores],
            "winner": self.winner,
            "runner_up_gap": self.runner_up_gap,
        }

    def summary(self, top: int = 3) -> str:
        shown = ", ".join(f"{m}={s:.3f}" for m, s in self.scores[:top])
        return f"similarity of {simple_name(self.subject)}: {shown}"


@dataclass(frozen=True, eq=True)
class Recommendation:
    rule: str
    violation: Violation
    bindings: Mapping[str, Any]
    rationale: str
    similarity: SimilarityReport | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "rule": self.rule,
            "violation": self.violation.to_dict(),
            "bindings": dict(self.bindings),
            "rationale": self.rationale,
            "similarity": self.similarity.to_dict() if self.similarity else None,
        }

    def headline(self) -> str:
        b = self.bindings
        if self.rule == "D1":
            return f"D1 replace declared type {simple_name(b['declared_type'])} with {simple_name(b['chosen_supertype'])}"
        if self.rule == "D11":
            return f"D11 replace new {simple_name(b['created_type'])}(..) with {simple_name(b['factory'])}.{b['method']}(..)"
        if self.rule == "D12":
            if b["replacement"] == "remove":
                return f"D12 remove new {simple_name(b['created_type'])}(..)"
            return f"D12 replace new {simple_name(b['created_type'])}(..) with null"
        if self.rule == "A3":
            return f"A3 make {simple_name(b['type'])} {b['edge_kind']} {simple_name(b['supertype'])}"
        if self.rule == "A6":
            return f"A6 annotate {simple_name(b['type'])} with @{simple_name(b['annotation'])}"
        return f"A4 move {simple_name(b['type'])} from {b['from_module']} to {b['target_module']}"


class RecommendationList(list):
    """Ordered recommendations; ``diagnostics`` explains the rules that failed."""

    def __init__(self, items: Iterable[Recommendation] = (), diagnostics: Iterable[str] = ()):
        super().__init__(items)
        self.diagnostics: list[str] = list(diagnostics)


# --- auxiliary functions -----------------------------------------------------


def dependency_set(db: FactsDatabase, type_id: str) -> frozenset[str]:
    return frozenset(d.to for d in db.outgoing.get(type_id, ()) if d.to != type_id)


def jaccard(a: Iterable[str], b: Iterable[str]) -> Fraction:
    a, b = set(a), set(b)
    union = a | b
    if not union:
        return Fraction(0)
    return Fraction(len(a & b), len(union))


def suitable_module(
    db: FactsDatabase,
    cs: ConstraintSet,
    type_id: str,
    current: str | None = None,
    resolve: ModuleResolver | None = None,
) -> tuple[str, SimilarityReport]:
    """Module whose aggregate dependency set is most Jaccard-similar to the type's.

    Ties go to ``current`` (defaults to the type's first containing module),
    then to the lexicographically smallest module name.
    """
    if not cs.modules:
        raise NoModulesError("no user-defined modules to choose from")
    resolve = resolve or ModuleResolver(cs, db)
    if current is None:
        current = resolve.module_of(type_id)
    mine = dependency_set(db, type_id)
    exact: list[tuple[str, Fraction]] = []
    for m in cs.modules:
        aggregate: set[str] = set()
        for member in resolve(m.name):
            if member != type_id:
                aggregate |= dependency_set(db, member)
        exact.append((m.name, jaccard(mine, aggregate)))
    exact.sort(key=lambda ms: (-ms[1], ms[0] != current, ms[0]))
    gap = exact[0][1] - exact[1][1] if len(exact) > 1 else exact[0][1]
    report = SimilarityReport(
        subject=type_id,
        scores=tuple((m, float(s)) for m, s in exact),
        winner=exact[0][0],
        runner_up_gap=float(gap),
    )
    return report.winner, report


def typecheck_substitution(db: FactsDatabase, site: DeclarationSite, candidate: str) -> bool:
    provided = {m.key for m in provided_members(db, candidate)}
    return all(m.key in provided for m in site.used_members)


def _accepts(db: FactsDatabase, param: str, arg: str) -> bool:
    if param == arg:
        return True
    if arg in PRIMITIVES or param in PRIMITIVES:
        return False
    return param in resolve_super(db, arg)


def factory_candidates(
    db: FactsDatabase, created: str, arg_types: Iterable[str]
) -> list[tuple[str, MemberSignature]]:
    """Every (factory type, static creator method) for ``created``, best first."""
    args = tuple(arg_types)
    returns_ok = {created, *resolve_super(db, created)}
    ranked = []
    for t in sorted(db.type_map):
        builds = any(d.to == created and d.kind is DependencyKind.CREATE for d in db.outgoing.get(t, ()))
        if not builds:
            continue
        for m in db.type_map[t].members:
            if not (m.is_static and m.member_kind == "method" and m.return_type in returns_ok):
                continue
            if m.arity != len(args) or not all(_accepts(db, p, a) for p, a in zip(m.param_types, args)):
                continue
            exact = m.return_type == created
            ranked.append(((not exact, len(t), t, m.name, m.param_types), t, m))
    ranked.sort(key=lambda r: r[0])
    return [(t, m) for _, t, m in ranked]


def find_factory(
    db: FactsDatabase, created: str, arg_types: Iterable[str]
) -> tuple[str, MemberSignature] | None:
    found = factory_candidates(db, created, arg_types)
    return found[0] if found else None


def _representative_violates(c: Constraint, module: str, target: str, resolve: ModuleResolver) -> bool:
    # a hypothetical internal type belonging to ``module`` only
    if c.modality == "must":
        return False
    if not kind_subsumes(c.kind, DependencyKind.CREATE):
        return False
    inside = c.origin in (module, SYSTEM)
    targets = resolve.union(c.targets)
    if c.modality == "cannot":
        return inside and target in targets
    if c.modality == "only_can":
        return not inside and target in targets
    return inside and target not in targets


def allowed_creator_modules(
    cs: ConstraintSet, db: FactsDatabase, target: str, resolve: ModuleResolver | None = None
) -> set[str]:
    """Modules from which some class may instantiate ``target``.

    A populated module qualifies when one of its internal members could; an
    empty one is judged by a hypothetical member. Internal classes that belong
    to no module count as singleton modules named by their type id.
    """
    resolve = resolve or ModuleResolver(cs, db)
    internal = set(db.internal_ids) & set(db.type_map)
    allowed: set[str] = set()
    covered: set[str] = set()
    for m in cs.modules:
        members = resolve(m.name) & internal
        covered |= members
        if members:
            if any(can(db, cs, t, DependencyKind.CREATE, target, resolve) for t in sorted(members)):
                allowed.add(m.name)
        elif not any(_representative_violates(c, m.name, target, resolve) for c in cs.constraints):
            allowed.add(m.name)
    for t in sorted(internal - covered):
        if can(db, cs, t, DependencyKind.CREATE, target, resolve):
            allowed.add(t)
    return allowed


# --- rules -------------------------------------------------------------------


class _Context:
    def __init__(self, db: FactsDatabase, cs: ConstraintSet, gap: float):
        self.db, self.cs, self.gap = db, cs, gap
        self.resolve = ModuleResolver(cs, db)
        self._violations: set[tuple] | None = None
        self._suitable: dict[tuple[str, str | None], tuple[str, SimilarityReport]] = {}

    @property
    def violation_keys(self) -> set[tuple]:
        if self._violations is None:
            self._violations = {v.key for v in check(self.db, self.cs)}
        return self._violations

    def suitable(self, type_id: str, current: str | None) -> tuple[str, SimilarityReport]:
        key = (type_id, current)
        if key not in self._suitable:
            self._suitable[key] = suitable_module(self.db, self.cs, type_id, current, self.resolve)
        return self._suitable[key]

    def current_module(self, c: Constraint, type_id: str) -> str | None:
        mod = self.cs.module(c.origin)
        if mod is not None and mod.builtin is None:
            return c.origin
        return self.resolve.module_of(type_id)

    def single_target(self, c: Constraint) -> str | None:
        targets = self.resolve.union(c.targets)
        return next(iter(targets)) if len(targets) == 1 else None


def _rule_d1(ctx: _Context, c: Constraint, v: Violation, bound: Mapping | None = None):
    db = ctx.db
    site = db.site(v.site)
    if not isinstance(site, DeclarationSite) or site.declared_type != v.counterpart:
        return "D1: the violation is not tied to a declaration of the forbidden type"
    if v.kind not in (DependencyKind.DECLARE, DependencyKind.ACCESS):
        return "D1: only declarations (and accesses through them) can be retyped"
    if site.enclosing_type not in db.type_map or db.is_external(site.enclosing_type):
        return "D1: the declaring class is not part of the analysed system"
    forbidden = ctx.resolve.union(c.targets)
    linked = {d.kind for d in db.dependencies if d.site == site.site_id}
    declared = site.declared_type
    supers = resolve_super(db, declared)
    candidates = supers if bound is None else [bound["chosen_supertype"]]
    admissible, reasons = [], []
    for cand in candidates:
        if cand not in supers:
            reasons.append(f"{simple_name(cand)} is no longer a supertype of {simple_name(declared)}")
        elif c.modality != "can_only" and cand in forbidden:
            reasons.append(f"{simple_name(cand)} is itself in {', '.join(c.targets)}")
        elif not all(can(db, ctx.cs, site.enclosing_type, k, cand, ctx.resolve) for k in linked):
            reasons.append(f"{simple_name(site.enclosing_type)} may not depend on {simple_name(cand)}")
        elif not typecheck_substitution(db, site, cand):
            have = {m.key for m in provided_members(db, cand)}
            missing = sorted(str(m) for m in site.used_members if m.key not in have)
            reasons.append(f"{simple_name(cand)} lacks {', '.join(missing)}")
        else:
            admissible.append(cand)
    if not supers:
        reasons.append(f"{simple_name(declared)} has no supertypes")
    if not admissible:
        return "D1: no admissible supertype (" + "; ".join(reasons) + ")"
    chosen = admissible[0]
    bindings = {
        "site_id": site.site_id,
        "declared_type": declared,
        "chosen_supertype": chosen,
        "variable": site.variable_name,
        "alternatives": admissible[1:],
    }
    why = (
        f"{simple_name(site.enclosing_type)} declares {site.variable_name} as {simple_name(declared)}; "
        f"the most specific supertype outside {', '.join(c.targets)} that still provides "
        f"every used member is {chosen}"
    )
    return Recommendation("D1", v, bindings, why)


def _creation(ctx: _Context, v: Violation) -> CreationSite | str:
    site = ctx.db.site(v.site)
    if v.kind is not DependencyKind.CREATE or not isinstance(site, CreationSite) or site.created_type != v.counterpart:
        return "the violation is not tied to an instantiation"
    if site.enclosing_type not in ctx.db.type_map or ctx.db.is_external(site.enclosing_type):
        return "the instantiating class is not part of the analysed system"
    return site


def _rule_d11(ctx: _Context, c: Constraint, v: Violation, bound: Mapping | None = None):
    site = _creation(ctx, v)
    if isinstance(site, str):
        return "D11: " + site
    db, cs = ctx.db, ctx.cs
    created = site.created_type
    if not allowed_creator_modules(cs, db, created, ctx.resolve):
        return f"D11: no module may create {simple_name(created)}, so no factory can either"
    found = factory_candidates(db, created, site.arg_types)
    if bound is not None:
        found = [(t, m) for t, m in found if t == bound["factory"] and m.name == bound["method"]]
    reasons = []
    for fb, method in found:
        if not can(db, cs, fb, DependencyKind.CREATE, created, ctx.resolve):
            reasons.append(f"{simple_name(fb)} may not create {simple_name(created)}")
        elif not can(db, cs, site.enclosing_type, DependencyKind.ACCESS, fb, ctx.resolve):
            reasons.append(f"{simple_name(site.enclosing_type)} may not access {simple_name(fb)}")
        else:
            bindings = {
                "site_id": site.site_id,
                "created_type": created,
                "factory": fb,
                "method": method.name,
                "method_params": list(method.param_types),
            }
            why = (
                f"{simple_name(fb)}.{method.name} is a static creator for {simple_name(created)} "
                f"accepting ({', '.join(simple_name(a) for a in site.arg_types)}) and "
                f"{simple_name(site.enclosing_type)} may access it"
            )
            return Recommendation("D11", v, bindings, why)
    if not found:
        reasons.append(f"no static factory method for {simple_name(created)} matching the arguments")
    return "D11: " + "; ".join(reasons)


def _rule_d12(ctx: _Context, c: Constraint, v: Violation, bound: Mapping | None = None):
    site = _creation(ctx, v)
    if isinstance(site, str):
        return "D12: " + site
    allowed = allowed_creator_modules(ctx.cs, ctx.db, site.created_type, ctx.resolve)
    if allowed:
        return f"D12: {simple_name(site.created_type)} may still be created from {', '.join(sorted(allowed))}"
    bindings = {
        "site_id": site.site_id,
        "created_type": site.created_type,
        "replacement": "remove" if site.result_discarded else "null",
    }
    why = f"no class of the system may create {simple_name(site.created_type)}; it has to be obtained another way (e.g. injected)"
    return Recommendation("D12", v, bindings, why)


def _placement(ctx: _Context, c: Constraint, v: Violation, rule: str):
    """(current module, report) when the offender sits in its suitable module."""
    current = ctx.current_module(c, v.offender)
    try:
        winner, report = ctx.suitable(v.offender, current)
    except NoModulesError as exc:
        return f"{rule}: {exc}"
    if current is not None and winner != current:
        return f"{rule}: {simple_name(v.offender)} looks misplaced ({report.summary()})"
    return current, report


def _rule_a3(ctx: _Context, c: Constraint, v: Violation, bound: Mapping | None = None):
    if c.kind not in DERIVE_FAMILY:
        return "A3: constraint is not about inheritance"
    db = ctx.db
    a = db.get(v.offender)
    b_id = ctx.single_target(c)
    if a is None or db.is_external(a.id):
        return "A3: the offending class is not part of the analysed system"
    if b_id is None:
        return f"A3: {c.targets[0]} does not denote a single type"
    placed = _placement(ctx, c, v, "A3")
    if isinstance(placed, str):
        return placed
    _, report = placed
    b = db.get(b_id)
    b_kind = b.kind if b else {DependencyKind.IMPLEMENT: "interface", DependencyKind.EXTEND: "class"}.get(c.kind)
    if b_kind is None:
        return f"A3: cannot tell whether {simple_name(b_id)} is a class or an interface"
    if b_kind == "annotation":
        return f"A3: {simple_name(b_id)} is an annotation"
    if b_id == a.id or b_id in a.supertypes or a.id in resolve_super(db, b_id):
        return f"A3: adding {simple_name(b_id)} would create an inheritance cycle or duplicate"
    if b_kind == "interface":
        edge = DependencyKind.EXTEND if a.kind == "interface" else DependencyKind.IMPLEMENT
        if c.kind is DependencyKind.EXTEND and a.kind != "interface":
            return f"A3: a class cannot extend interface {simple_name(b_id)}"
    else:
        if c.kind is DependencyKind.IMPLEMENT:
            return f"A3: {simple_name(b_id)} is a class and cannot be implemented"
        if a.kind != "class":
            return f"A3: interface {simple_name(a.id)} cannot extend class {simple_name(b_id)}"
        # supertypes without facts are assumed to be classes
        if any(db.get(s) is None or db.get(s).kind == "class" for s in a.supertypes):
            return f"A3: {simple_name(a.id)} already has a superclass"
        edge = DependencyKind.EXTEND
    if not can(db, ctx.cs, a.id, edge, b_id, ctx.resolve):
        return f"A3: {simple_name(a.id)} may not {edge.value} {simple_name(b_id)}"
    bindings = {"type": a.id, "supertype": b_id, "edge_kind": edge.value}
    why = f"{simple_name(a.id)} is well placed ({report.summary()}); add the missing {edge.value} of {simple_name(b_id)}"
    return Recommendation("A3", v, bindings, why, report)


def _rule_a6(ctx: _Context, c: Constraint, v: Violation, bound: Mapping | None = None):
    if c.kind is not DependencyKind.USEANNOTATION:
        return "A6: constraint is not about annotations"
    db = ctx.db
    a = db.get(v.offender)
    b_id = ctx.single_target(c)
    if a is None or db.is_external(a.id):
        return "A6: the offending class is not part of the analysed system"
    if b_id is None:
        return f"A6: {c.targets[0]} does not denote a single annotation"
    b = db.get(b_id)
    if b is None or b.kind != "annotation" or b.annotation_target != "type":
        return f"A6: {simple_name(b_id)} is not an annotation applicable to types"
    placed = _placement(ctx, c, v, "A6")
    if isinstance(placed, str):
        return placed
    _, report = placed
    if not can(db, ctx.cs, a.id, DependencyKind.USEANNOTATION, b_id, ctx.resolve):
        return f"A6: {simple_name(a.id)} may not use @{simple_name(b_id)}"
    bindings = {"type": a.id, "annotation": b_id}
    why = f"{simple_name(a.id)} is well placed ({report.summary()}); add @{simple_name(b_id)}"
    return Recommendation("A6", v, bindings, why, report)


def _rule_a4(ctx: _Context, c: Constraint, v: Violation, bound: Mapping | None = None):
    db = ctx.db
    if v.offender not in db.type_map or db.is_external(v.offender):
        return "A4: the offending class is not part of the analysed system"
    current = ctx.current_module(c, v.offender)
    if current is None:
        return f"A4: {simple_name(v.offender)} belongs to no module"
    try:
        winner, report = ctx.suitable(v.offender, current)
    except NoModulesError as exc:
        return f"A4: {exc}"
    if winner == current:
        return f"A4: {current} is already the most similar module"
    margin = report.score(winner) - report.score(current)
    if margin < ctx.gap:
        return f"A4: {winner} beats {current} by only {margin:.3f} (< {ctx.gap})"
    if bound is not None and bound["target_module"] != winner:
        return f"A4: the most similar module is now {winner}"
    bindings = {"type": v.offender, "from_module": current, "target_module": winner}
    why = f"{simple_name(v.offender)} resembles {winner} more than {current} ({report.summary()})"
    return Recommendation("A4", v, bindings, why, report)


_RULES = {"D1": _rule_d1, "D11": _rule_d11, "D12": _rule_d12, "A3": _rule_a3, "A6": _rule_a6, "A4": _rule_a4}


def _applicable(c: Constraint, v: Violation) -> list[str]:
    if v.flavor == "absence":
        rules = []
        if c.kind in DERIVE_FAMILY:
            rules.append("A3")
        if c.kind is DependencyKind.USEANNOTATION:
            rules.append("A6")
        return rules + ["A4"]
    rules = ["D1"]
    if c.modality in ("cannot", "only_can") and v.kind is DependencyKind.CREATE:
        rules += ["D11", "D12"]
    return rules


def _verify(ctx: _Context, rec: Recommendation) -> str | None:
    from .refactor import transform  # circular at import time

    db2, cs2, _ = transform(ctx.db, ctx.cs, rec)
    after = {v.key for v in check(db2, cs2)}
    if rec.violation.key in after:
        return f"{rec.rule}: applying it would not remove the violation"
    new = after - ctx.violation_keys
    if new:
        return f"{rec.rule}: applying it would introduce {len(new)} new violation(s)"
    return None


def recommend(
    db: FactsDatabase,
    cs: ConstraintSet,
    v: Violation,
    gap: float = DEFAULT_GAP,
    verify: bool = True,
) -> RecommendationList:
    """Candidate repairs for ``v``, most specific first.

    Each returned recommendation satisfies its rule's preconditions and, when
    ``verify`` is set, has been applied to a scratch copy and re-checked.
    """
    ctx = _Context(db, cs, gap)
    c = cs.constraint(v.constraint_id)
    out = RecommendationList()
    for rule in _applicable(c, v):
        result = _RULES[rule](ctx, c, v)
        if isinstance(result, str):
            out.diagnostics.append(result)
            continue
        problem = _verify(ctx, result) if verify else None
        if problem:
            out.diagnostics.append(problem)
        else:
            out.append(result)
    if not out and not out.diagnostics:
        out.diagnostics.append("no rule in the catalogue applies to this violation")
    return out


def precondition_failure(
    db: FactsDatabase, cs: ConstraintSet, rec: Recommendation, gap: float = DEFAULT_GAP
) -> str | None:
    """Why ``rec`` no longer applies to (db, cs), or None if it still does."""
    ctx = _Context(db, cs, gap)
    try:
        c = cs.constraint(rec.violation.constraint_id)
    except KeyError:
        return f"constraint {rec.violation.constraint_id} is gone"
    if rec.violation.key not in ctx.violation_keys:
        return "the violation no longer exists"
    result = _RULES[rec.rule](ctx, c, rec.violation, rec.bindings)
    if isinstance(result, str):
        return result
    if result.bindings != rec.bindings and rec.rule not in ("D1", "D11"):
        return f"{rec.rule}: bindings changed to {dict(result.bindings)}"
    return None


def recommendations_json(entries: Iterable[tuple[Violation, RecommendationList]]) -> str:
    return json.dumps(
        [
            {
                "violation": v.to_dict(),
                "recommendations": [r.to_dict() for r in recs],
                "diagnostics": list(recs.diagnostics),
            }
            for v, recs in entries
        ],
        indent=2,
    ) + "\n"
