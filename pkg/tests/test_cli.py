import json
import subprocess
import sys

import pytest

from archfix import fixtures
from archfix.cli import ConfigError, RunConfig, cmd_check, cmd_extract, cmd_fix, main
from archfix.facts import load_facts


@pytest.fixture
def tree(tmp_path):
    def make(corpus):
        src, dcl = corpus.write(tmp_path / corpus.name)
        return str(src), str(dcl)

    return make


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_extract_writes_facts(tree, tmp_path, capsys):
    src, _ = tree(fixtures.gp4())
    out = tmp_path / "f.json"
    code, text, _ = run(capsys, "extract", "--src", src, "--out", str(out))
    assert code == 0 and "types" in text
    assert len(load_facts(out).types) > 20


def test_extract_empty_dir(tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    code, _, _ = run(capsys, "extract", "--src", str(tmp_path / "empty"), "--out", str(tmp_path / "f.json"))
    assert code == 0 and load_facts(tmp_path / "f.json").types == ()


def test_extract_syntax_error(tmp_path, capsys):
    (tmp_path / "s").mkdir()
    (tmp_path / "s" / "Bad.java").write_text("class Bad {\n  int x = ;\n}\n")
    code, _, err = run(capsys, "extract", "--src", str(tmp_path / "s"), "--out", str(tmp_path / "f.json"))
    assert code == 2 and "Bad.java:2:" in err


def test_check_clean(tree, capsys):
    src, dcl = tree(fixtures.clean())
    assert run(capsys, "check", "--dcl", dcl, "--src", src) == (0, "", "")


def test_check_gp4(tree, capsys):
    src, dcl = tree(fixtures.gp4())
    code, out, _ = run(capsys, "check", "--dcl", dcl, "--src", src, "--format", "json")
    doc = json.loads(out)
    assert code == 1 and len(doc) == 18 and {v["flavor"] for v in doc} == {"absence"}


def test_check_from_facts_file(tree, tmp_path, capsys):
    src, dcl = tree(fixtures.tc9())
    facts = tmp_path / "f.json"
    assert cmd_extract(src, str(facts)) == 0
    capsys.readouterr()
    code, out, _ = run(capsys, "check", "--dcl", dcl, "--facts", str(facts))
    assert code == 1 and out.count("TC9 divergence") == 3


def test_malformed_dcl(tree, tmp_path, capsys):
    src, _ = tree(fixtures.clean())
    bad = tmp_path / "bad.dcl"
    bad.write_text("module A: a.**\nA cannot-teleport B\n")
    code, _, err = run(capsys, "check", "--dcl", str(bad), "--src", src)
    assert code == 2 and "2:3:" in err


def test_missing_input(tmp_path, capsys):
    code, _, err = run(capsys, "check", "--dcl", str(tmp_path / "none.dcl"), "--facts", str(tmp_path / "none.json"))
    assert code == 2 and "error" in err


def test_fix_tc5(tree, capsys):
    src, dcl = tree(fixtures.tc5())
    code, out, _ = run(capsys, "fix", "--dcl", dcl, "--src", src, "--format", "json")
    doc = json.loads(out)
    assert code == 0
    rules = [r["recommendations"][0]["rule"] for r in doc["results"]]
    assert rules == ["D11"] * 13
    assert all(r["recommendations"][0]["bindings"]["factory"].endswith("BaseJPADAO") for r in doc["results"])


def test_fix_tc9_text(tree, capsys):
    src, dcl = tree(fixtures.tc9())
    code, out, _ = run(capsys, "fix", "--dcl", dcl, "--src", src)
    assert code == 0 and out.count("=> D12") == 3 and "D11" not in out


def test_fix_without_applicable_rule(tree, capsys):
    src, dcl = tree(fixtures.view_model())
    code, out, _ = run(capsys, "fix", "--dcl", dcl, "--src", src)
    assert code == 1 and "  ! D1:" in out


def test_fix_max_recs(tree, capsys):
    src, dcl = tree(fixtures.tc1())
    _, out, _ = run(capsys, "fix", "--dcl", dcl, "--src", src, "--format", "json", "--max-recs", "3")
    assert max(len(r["recommendations"]) for r in json.loads(out)["results"]) <= 3


def test_fix_plan_to_file(tree, tmp_path, capsys):
    src, dcl = tree(fixtures.gp4())
    plan = tmp_path / "plan.json"
    code, out, _ = run(capsys, "fix", "--dcl", dcl, "--src", src, "--apply", "plan", "--out", str(plan), "--format", "json")
    assert code == 0
    assert len(json.loads(plan.read_text())["edits"]) == 18
    assert json.loads(out)["summary"]["remaining"] == 0


def test_apply_writes_facts_and_moves(tree, tmp_path, capsys):
    src, dcl = tree(fixtures.tc1())
    out_facts = tmp_path / "after.json"
    code, out, _ = run(capsys, "apply", "--dcl", dcl, "--src", src, "--out", str(out_facts))
    assert code == 0 and "0 violation(s) remain" in out
    moved = out_facts.with_suffix(".dcl")
    assert "move tcom.dto.Dto09 to Constant" in moved.read_text()
    code, _, _ = run(capsys, "check", "--dcl", str(moved), "--facts", str(out_facts))
    assert code == 0


def test_apply_needs_out(tree, capsys):
    src, dcl = tree(fixtures.tc9())
    code, _, err = run(capsys, "apply", "--dcl", dcl, "--src", src)
    assert code == 2 and "--out" in err


def test_apply_flush_variant_leaves_violations(tree, tmp_path, capsys):
    src, dcl = tree(fixtures.dao_interface(uses_flush=True))
    code, _, _ = run(capsys, "apply", "--dcl", dcl, "--src", src, "--out", str(tmp_path / "o.json"))
    assert code == 1


def test_run_config_invariants():
    with pytest.raises(ConfigError):
        RunConfig("x.dcl")
    with pytest.raises(ConfigError):
        RunConfig("x.dcl", facts_path="f", source_root="s")
    with pytest.raises(ConfigError):
        RunConfig("x.dcl", facts_path="f", gap_threshold=1.5)
    with pytest.raises(ConfigError):
        RunConfig("x.dcl", facts_path="f", max_recs_per_violation=0)


@pytest.mark.parametrize("corpus", fixtures.all_corpora(), ids=lambda c: c.name)
def test_exit_codes_and_determinism(corpus, tree, capsys):
    src, dcl = tree(corpus)
    config = RunConfig(dcl, source_root=src)
    first = cmd_fix(config)
    text1 = capsys.readouterr().out
    assert cmd_fix(config) == first
    assert capsys.readouterr().out == text1
    expected_check = 1 if corpus.name != "CLEAN" else 0
    assert cmd_check(config) == expected_check
    capsys.readouterr()
    expected_fix = 1 if corpus.name in ("D1-flush", "VIEW") else 0
    assert first == expected_fix


def test_module_entry_point_and_no_color(tree, tmp_path):
    src, dcl = tree(fixtures.tc9())
    proc = subprocess.run(
        [sys.executable, "-m", "archfix", "check", "--dcl", dcl, "--src", src],
        capture_output=True,
        text=True,
        env={"ARCHFIX_NO_COLOR": "1", "PATH": ""},
    )
    assert proc.returncode == 1 and "\x1b[" not in proc.stdout


class _Tty:
    def isatty(self):
        return True


def test_styling_only_on_tty(monkeypatch):
    from archfix.cli import _Style

    monkeypatch.delenv("ARCHFIX_NO_COLOR", raising=False)
    assert _Style(_Tty())("x", "31") == "\x1b[31mx\x1b[0m"
    monkeypatch.setenv("ARCHFIX_NO_COLOR", "1")
    assert _Style(_Tty())("x", "31") == "x"
