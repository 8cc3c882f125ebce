"""archfix command line: extract, check, fix, apply."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import TextIO

from .checker import Violation, check, format_json
from .dcl import ConstraintSet, DclError, parse_dcl, print_dcl
from .extractor import DuplicateTypeError, SubsetParseError, extract
from .facts import FactsDatabase, FactsError, emit_facts, load_facts
from .recommender import DEFAULT_GAP, RecommendationList, recommend
from .refactor import PatchPlan, apply_all

OK, VIOLATIONS, ERROR = 0, 1, 2
FORMATS = ("text", "json")
APPLY_MODES = ("none", "plan", "facts")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    dcl_path: str
    facts_path: str | None = None
    source_root: str | None = None
    output_format: str = "text"
    gap_threshold: float = DEFAULT_GAP
    max_recs_per_violation: int = 1
    apply_mode: str = "none"
    out_path: str | None = None

    def __post_init__(self) -> None:
        if (self.facts_path is None) == (self.source_root is None):
            raise ConfigError("give exactly one of --facts or --src")
        if self.output_format not in FORMATS:
            raise ConfigError(f"unknown format {self.output_format!r}")
        if not 0.0 <= self.gap_threshold <= 1.0:
            raise ConfigError("--gap must lie in [0, 1]")
        if self.max_recs_per_violation < 1:
            raise ConfigError("--max-recs must be positive")
        if self.apply_mode not in APPLY_MODES:
            raise ConfigError(f"unknown apply mode {self.apply_mode!r}")
        if self.apply_mode == "facts" and self.out_path is None:
            raise ConfigError("--apply facts needs --out")


_OPERATIONAL = (OSError, FactsError, DclError, SubsetParseError, DuplicateTypeError, ConfigError, UnicodeDecodeError)


class _Style:
    def __init__(self, stream: TextIO):
        self.on = (
            not os.environ.get("ARCHFIX_NO_COLOR")
            and hasattr(stream, "isatty")
            and stream.isatty()
        )

    def __call__(self, text: str, code: str) -> str:
        return f"\x1b[{code}m{text}\x1b[0m" if self.on else text


def _fail(exc: BaseException, err: TextIO) -> int:
    print(f"archfix: error: {exc}", file=err)
    return ERROR


def _load(config: RunConfig) -> tuple[FactsDatabase, ConstraintSet]:
    if config.facts_path is not None:
        db = load_facts(config.facts_path)
    else:
        db = extract(config.source_root)
    cs = parse_dcl(Path(config.dcl_path).read_text(encoding="utf-8"), known_types=db.universe)
    return db, cs


def cmd_extract(source_root: str, out_path: str, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        db = extract(source_root)
        emit_facts(db, out_path)
    except _OPERATIONAL as exc:
        return _fail(exc, err)
    print(f"{len(db.types)} types, {len(db.dependencies)} dependencies -> {out_path}", file=out)
    return OK


def cmd_check(config: RunConfig, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        db, cs = _load(config)
    except _OPERATIONAL as exc:
        return _fail(exc, err)
    violations = check(db, cs)
    if config.output_format == "json":
        out.write(format_json(violations))
    else:
        style = _Style(out)
        for v in violations:
            print(style(str(v), "31"), file=out)
        if violations:
            print(f"{len(violations)} violation(s)", file=out)
    return VIOLATIONS if violations else OK


def _report_text(
    entries: list[tuple[Violation, RecommendationList]], top: int, out: TextIO
) -> None:
    style = _Style(out)
    for v, recs in entries:
        print(style(str(v), "31"), file=out)
        for r in recs[:top]:
            print("  => " + style(r.headline(), "32"), file=out)
            print(f"     {r.rationale}", file=out)
            if r.similarity is not None:
                print(f"     {r.similarity.summary()}", file=out)
        if not recs:
            for d in recs.diagnostics:
                print("  ! " + style(d, "33"), file=out)
    fixed = sum(1 for _, recs in entries if recs)
    if entries:
        print(f"{len(entries)} violation(s), {fixed} with recommendations", file=out)


def cmd_fix(config: RunConfig, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        db, cs = _load(config)
    except _OPERATIONAL as exc:
        return _fail(exc, err)
    violations = check(db, cs)
    entries = [(v, recommend(db, cs, v, config.gap_threshold)) for v in violations]
    top = config.max_recs_per_violation
    all_covered = all(recs for _, recs in entries)

    batch = None
    if config.apply_mode != "none":
        chosen = [recs[0] for _, recs in entries if recs]
        batch = apply_all(db, cs, chosen, config.gap_threshold)

    remaining = check(batch.db, batch.cs) if batch is not None else violations

    if config.output_format == "json":
        doc = {
            "results": [
                {
                    "violation": v.to_dict(),
                    "recommendations": [r.to_dict() for r in recs[:top]],
                    "diagnostics": list(recs.diagnostics) if not recs else [],
                }
                for v, recs in entries
            ],
            "summary": {
                "violations": len(entries),
                "with_recommendations": sum(1 for _, recs in entries if recs),
                "remaining": len(remaining) if batch is not None else None,
            },
        }
        if batch is not None:
            doc["skipped"] = [{"rule": r.rule, "reason": why} for r, why in batch.skipped]
            if config.apply_mode == "plan" and config.out_path is None:
                doc["plan"] = json.loads(batch.plan.to_json())
        out.write(json.dumps(doc, indent=2) + "\n")
    else:
        _report_text(entries, top, out)

    if batch is not None:
        try:
            _write_outputs(config, batch.plan, batch.db, batch.cs, cs, out)
        except _OPERATIONAL as exc:
            return _fail(exc, err)
        if config.output_format == "text":
            print(
                f"applied {len(batch.plan.edits)}, skipped {len(batch.skipped)}, "
                f"{len(remaining)} violation(s) remain",
                file=out,
            )

    if not violations:
        return OK
    if not all_covered or (batch is not None and remaining):
        return VIOLATIONS
    return OK


def _write_outputs(config: RunConfig, plan: PatchPlan, db, cs_after, cs_before, out: TextIO) -> None:
    if config.apply_mode == "plan":
        text = plan.to_json() if config.output_format == "json" else plan.to_text()
        if config.out_path is not None:
            Path(config.out_path).write_text(text, encoding="utf-8")
        elif config.output_format == "text":
            out.write(text)
        return
    emit_facts(db, config.out_path)
    if cs_after != cs_before:
        # moves live in the constraint overlay, so ship it next to the facts
        Path(config.out_path).with_suffix(".dcl").write_text(print_dcl(cs_after), encoding="utf-8")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="archfix", description="Architecture conformance checking and repair.")
    sub = p.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("extract", help="extract a facts database from Java sources")
    ex.add_argument("--src", required=True, metavar="DIR")
    ex.add_argument("--out", required=True, metavar="PATH")

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--dcl", required=True, metavar="PATH")
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--facts", metavar="PATH")
        src.add_argument("--src", metavar="DIR")
        sp.add_argument("--format", choices=FORMATS, default="text")

    ch = sub.add_parser("check", help="report violations")
    common(ch)

    for name, default in (("fix", "none"), ("apply", "facts")):
        sp = sub.add_parser(name, help="recommend repairs" if name == "fix" else "recommend and apply repairs")
        common(sp)
        sp.add_argument("--gap", type=float, default=DEFAULT_GAP)
        sp.add_argument("--max-recs", type=int, default=1)
        sp.add_argument("--apply", choices=APPLY_MODES, default=default)
        sp.add_argument("--out", metavar="PATH")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "extract":
        return cmd_extract(args.src, args.out)
    try:
        config = RunConfig(
            dcl_path=args.dcl,
            facts_path=args.facts,
            source_root=args.src,
            output_format=args.format,
            gap_threshold=getattr(args, "gap", DEFAULT_GAP),
            max_recs_per_violation=getattr(args, "max_recs", 1),
            apply_mode=getattr(args, "apply", "none"),
            out_path=getattr(args, "out", None),
        )
    except ConfigError as exc:
        return _fail(exc, sys.stderr)
    if args.command == "check":
        return cmd_check(config)
    return cmd_fix(config)


if __name__ == "__main__":
    sys.exit(main())
