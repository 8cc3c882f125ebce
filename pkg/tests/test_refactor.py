import json

import pytest

from archfix import fixtures
from archfix.checker import check
from archfix.dcl import parse_dcl, print_dcl
from archfix.facts import DependencyKind as K
from archfix.facts import SourceLocation, validate
from archfix.recommender import recommend
from archfix.refactor import (
    ACTIONS,
    ConflictError,
    Edit,
    PatchPlan,
    StaleRecommendationError,
    apply,
    apply_all,
    transform,
)


def _first(corpus, rule=None):
    db, cs = corpus.facts(), corpus.constraints()
    for v in check(db, cs):
        for r in recommend(db, cs, v):
            if rule is None or r.rule == rule:
                return db, cs, r
    raise AssertionError("no recommendation")


def test_plan_orders_edits_bottom_up_per_file():
    e = [Edit(SourceLocation(f, ln, c), "add_annotation", "", "") for f, ln, c in [("b", 1, 1), ("a", 2, 1), ("a", 9, 4), ("a", 9, 8)]]
    plan = PatchPlan(tuple(e))
    assert [(x.location.file, x.location.line, x.location.column) for x in plan.edits] == [
        ("a", 9, 8), ("a", 9, 4), ("a", 2, 1), ("b", 1, 1)
    ]


def test_merge_conflict():
    e = Edit(SourceLocation("a", 1, 1), "move_type", "x", "y")
    with pytest.raises(ConflictError):
        PatchPlan((e,)).merge(PatchPlan((e,)))


def test_d1_retargets_site_and_linked_dependencies():
    db, cs, rec = _first(fixtures.dao_interface())
    db2, cs2, plan = apply(db, cs, rec)
    site = db2.site(rec.bindings["site_id"])
    assert site.declared_type == "app.dao.IProductDAO"
    linked = [d for d in db2.dependencies if d.site == site.site_id]
    assert len(linked) == 3 and {d.to for d in linked} == {"app.dao.IProductDAO"}
    validate(db2)
    (edit,) = plan.edits
    assert edit.action == "replace_declared_type"
    assert edit.after_text_hint == "IProductDAO dao"
    assert check(db2, cs2) == []


def test_d11_replaces_creation_with_factory_access():
    db, cs, rec = _first(fixtures.tc5())
    db2, _, plan = apply(db, cs, rec)
    site_id = rec.bindings["site_id"]
    assert db2.site(site_id) is None
    assert not [d for d in db2.dependencies if d.site == site_id]
    assert any(d.kind is K.ACCESS and d.to == rec.bindings["factory"] for d in db2.dependencies)
    validate(db2)
    assert plan.edits[0].after_text_hint.startswith("BaseJPADAO.get")


def test_d12_removes_or_nulls():
    db, cs = fixtures.tc9().facts(), fixtures.tc9().constraints()
    actions = []
    for v in check(db, cs):
        rec = recommend(db, cs, v)[0]
        _, _, plan = apply(db, cs, rec)
        actions.append(plan.edits[0].action)
    assert actions == ["remove_instantiation", "replace_new_with_null", "replace_new_with_null"]


def test_a3_adds_supertype_and_edge():
    db, cs, rec = _first(fixtures.tc1(), "A3")
    db2, _, plan = apply(db, cs, rec)
    t = db2.get(rec.bindings["type"])
    assert "java.io.Serializable" in t.supertypes
    assert any(d.from_ == t.id and d.kind is K.IMPLEMENT for d in db2.dependencies)
    assert plan.edits[0].after_text_hint.endswith("implements Serializable")


def test_a6_adds_annotation():
    db, cs, rec = _first(fixtures.gp4())
    db2, _, plan = apply(db, cs, rec)
    assert db2.get(rec.bindings["type"]).annotations == (rec.bindings["annotation"],)
    assert plan.edits[0].action == "add_annotation"


def test_a4_is_an_overlay_move():
    db, cs, rec = _first(fixtures.tc1(), "A4")
    db2, cs2, plan = apply(db, cs, rec)
    assert db2 == db
    assert cs2.overrides == (("tcom.dto.Dto09", "Constant"),)
    assert "move tcom.dto.Dto09 to Constant" in print_dcl(cs2)
    assert parse_dcl(print_dcl(cs2)) == cs2
    assert not [v for v in check(db2, cs2) if v.offender == "tcom.dto.Dto09"]
    assert plan.edits[0].action == "move_type"


def test_stale_recommendation_raises():
    db, cs, rec = _first(fixtures.gp4())
    db2, cs2, _ = apply(db, cs, rec)
    with pytest.raises(StaleRecommendationError):
        apply(db2, cs2, rec)


def test_apply_all_skips_stale():
    corpus = fixtures.dao_interface()
    db, cs = corpus.facts(), corpus.constraints()
    recs = [recommend(db, cs, v)[0] for v in check(db, cs)]
    result = apply_all(db, cs, recs)
    assert len(result.plan.edits) == 1 and len(result.skipped) == 2
    assert all(why.startswith("stale") for _, why in result.skipped)
    assert check(result.db, result.cs) == []


@pytest.mark.parametrize("corpus", fixtures.all_corpora(), ids=lambda c: c.name)
def test_batch_never_adds_violations(corpus):
    db, cs = corpus.facts(), corpus.constraints()
    before = {v.key for v in check(db, cs)}
    recs = [recs[0] for recs in (recommend(db, cs, v) for v in check(db, cs)) if recs]
    result = apply_all(db, cs, recs)
    after = {v.key for v in check(result.db, result.cs)}
    assert after <= before
    validate(result.db)


def test_plan_serialisations():
    db, cs, rec = _first(fixtures.tc9())
    plan = transform(db, cs, rec).plan
    doc = json.loads(plan.to_json())
    assert doc["edits"][0]["action"] in ACTIONS
    assert plan.to_text().startswith("--- tcom/boot/Bootstrap.java:")
