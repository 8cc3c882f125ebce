"""Rule tally per constraint on the synthetic case-study fixtures.

    python scripts/rule_tally.py [--json]

Counts the top recommendation for every violation, mirroring the layout of
the case-study summary table (constraint, violations, rules triggered).
"""

import argparse
import json
import time
from collections import Counter

from archfix import check, fixtures, recommend


def tally(corpus):
    db, cs = corpus.facts(), corpus.constraints()
    start = time.perf_counter()
    rows = []
    for c in cs.constraints:
        vs = [v for v in check(db, cs) if v.constraint_id == c.id]
        rules = Counter(recs[0].rule if recs else "none" for recs in (recommend(db, cs, v) for v in vs))
        rows.append({"constraint": str(c), "violations": len(vs), "rules": dict(sorted(rules.items()))})
    return rows, time.perf_counter() - start


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    report = {}
    for name, make in fixtures.CASE_STUDIES.items():
        rows, secs = tally(make())
        report[name] = {"rows": rows, "seconds": round(secs, 4)}
    if args.json:
        print(json.dumps(report, indent=2))
        return
    for name, entry in report.items():
        for row in entry["rows"]:
            rules = ", ".join(f"{r} ({n} cases)" for r, n in row["rules"].items()) or "-"
            print(f"{row['constraint']:<70} {row['violations']:>3}  {rules}")
    total = sum(r["violations"] for e in report.values() for r in e["rows"])
    print(f"{total} violations in {sum(e['seconds'] for e in report.values()):.3f}s")


if __name__ == "__main__":
    main()
