import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from archfix.dcl import (
    Constraint,
    ConstraintSet,
    DclError,
    ModuleDef,
    ParseError,
    UnknownKindError,
    UnresolvedModuleError,
    ModuleResolver,
    overlap_warnings,
    parse_dcl,
    pattern_matches,
    print_dcl,
)
from archfix.facts import DependencyKind, FactsDatabase, TypeEntity

ident = st.from_regex(r"[A-Za-z][A-Za-z0-9_]{0,5}", fullmatch=True).filter(
    lambda s: s not in {"module", "only", "move", "to"}
)
dotted = st.lists(ident, min_size=1, max_size=3).map(".".join)
pattern = st.one_of(
    dotted,
    dotted.map(lambda s: s + ".*"),
    dotted.map(lambda s: s + ".**"),
    st.just("**"),
)
kinds = st.sampled_from(list(DependencyKind))


@st.composite
def constraint_sets(draw):
    names = draw(st.lists(ident.map(lambda s: "M" + s), min_size=1, max_size=4, unique=True))
    modules = tuple(ModuleDef(n, tuple(draw(st.lists(pattern, min_size=1, max_size=3)))) for n in names)
    refs = st.one_of(st.sampled_from(names + ["$system", "$java"]), dotted.map(lambda s: "x." + s))
    labels = draw(st.lists(ident.map(lambda s: "L" + s), min_size=0, max_size=6, unique=True))
    constraints = []
    for i, label in enumerate(labels):
        modality = draw(st.sampled_from(["only_can", "can_only", "cannot", "must"]))
        n_targets = 1 if modality == "must" else draw(st.integers(1, 3))
        targets = tuple(draw(refs) for _ in range(n_targets))
        constraints.append(Constraint(label, modality, draw(kinds), draw(refs), targets))
    moves = tuple((f"x.Moved{i}", draw(st.sampled_from(names))) for i in range(draw(st.integers(0, 2))))
    return ConstraintSet(modules, tuple(constraints), moves)


@settings(max_examples=100, deadline=None)
@given(constraint_sets())
def test_print_parse_round_trip(cs):
    text = print_dcl(cs)
    assert parse_dcl(text) == cs
    assert print_dcl(parse_dcl(text)) == text


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet="modulecanotsyr-$:,.*%\n ABCxp_", max_size=80))
def test_parser_is_total(text):
    try:
        parse_dcl(text)
    except DclError:
        pass


@settings(max_examples=200, deadline=None)
@given(st.text(max_size=60))
def test_parser_is_total_on_arbitrary_text(text):
    try:
        parse_dcl(text)
    except DclError:
        pass


def test_all_four_modalities():
    cs = parse_dcl(
        """
        % layered
        module View: app.view.**
        module Model: app.model.*, app.Main
        R1: only View can-access Model
        View can-declare-only Model, $java
        Model cannot-depend View
        Model must-implement java.io.Serializable
        """
    )
    got = [(c.id, c.modality, c.kind.value, c.origin, c.targets) for c in cs.constraints]
    assert got == [
        ("R1", "only_can", "access", "View", ("Model",)),
        ("C1", "can_only", "declare", "View", ("Model", "$java")),
        ("C2", "cannot", "depend", "Model", ("View",)),
        ("C3", "must", "implement", "Model", ("java.io.Serializable",)),
    ]
    assert cs.modules[1].patterns == ("app.model.*", "app.Main")


def test_auto_labels_skip_taken_ids():
    cs = parse_dcl("A cannot-access B\nC1: A cannot-create B\nA cannot-handle B\n")
    assert [c.id for c in cs.constraints] == ["C2", "C1", "C3"]


def test_duplicate_label():
    with pytest.raises(ParseError) as err:
        parse_dcl("X: A cannot-access B\nX: A cannot-create B\n")
    assert err.value.line == 2


def test_error_positions():
    with pytest.raises(ParseError) as err:
        parse_dcl("module A: a.**\nA cannot-access\n")
    assert (err.value.line, err.value.column) == (3, 1)
    assert "NAME" in err.value.expected
    with pytest.raises(ParseError) as err:
        parse_dcl("module A: a.**\n  A can-access B\n")
    assert (err.value.line, err.value.column) == (2, 5)


def test_unknown_kind():
    with pytest.raises(UnknownKindError) as err:
        parse_dcl("A cannot-inherit B")
    assert "access" in err.value.expected and err.value.column == 3


def test_must_takes_one_target():
    with pytest.raises(ParseError):
        parse_dcl("A must-extend B, C")


def test_unknown_builtin_and_redefinition():
    with pytest.raises(UnresolvedModuleError):
        parse_dcl("$nope cannot-access $java")
    with pytest.raises(ParseError):
        parse_dcl("module $system: a.**")


def test_bare_type_names_resolve_against_known_types():
    parse_dcl("module A: a.**\nA must-implement Serializable", known_types=["java.io.Serializable", "a.X"])
    with pytest.raises(UnresolvedModuleError):
        parse_dcl("module A: a.**\nA must-implement Serializable", known_types=["a.X"])
    with pytest.raises(UnresolvedModuleError, match="ambiguous"):
        parse_dcl("module A: a.**\nA cannot-access List", known_types=["java.util.List", "java.awt.List"])


@pytest.mark.parametrize(
    "pat,tid,ok",
    [
        ("a.**", "a.b.C", True),
        ("a.**", "a.C", True),
        ("a.**", "ab.C", False),
        ("a.*", "a.C", True),
        ("a.*", "a.b.C", False),
        ("a.C", "a.C", True),
        ("a.C", "a.CD", False),
        ("**", "anything.At.all", True),
    ],
)
def test_patterns(pat, tid, ok):
    assert pattern_matches(pat, tid) is ok


def test_resolver_builtins_and_moves():
    db = FactsDatabase(
        (TypeEntity("a.X"), TypeEntity("b.Y"), TypeEntity("java.util.List")),
        externals=("java",),
    )
    cs = parse_dcl("module A: a.**\nmodule B: b.**\nmove a.X to B\n")
    r = ModuleResolver(cs, db)
    assert r("$system") == {"a.X", "b.Y"}
    assert r("$java") == r("JavaAPI") == {"java.util.List"}
    assert r("A") == set() and r("B") == {"a.X", "b.Y"}
    assert r.module_of("a.X") == "B"


def test_overlap_warning():
    db = FactsDatabase((TypeEntity("a.X"),))
    cs = parse_dcl("module A: a.**\nmodule B: a.X\n")
    assert len(overlap_warnings(cs, db)) == 1
