"""How the A4 winning-gap threshold trades A4 moves against diagnostics on TC1.

    python scripts/gap_sweep.py [--misplaced N]

At gap 0 every misfit DTO is moved; past the misfits' margin (4/7) none is,
and their absences are left unrepaired.
"""

import argparse
from collections import Counter

from archfix import check, fixtures, recommend


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--misplaced", type=int, default=2)
    ap.add_argument("--steps", type=int, default=11)
    args = ap.parse_args()
    corpus = fixtures.tc1(misplaced=args.misplaced)
    db, cs = corpus.facts(), corpus.constraints()
    violations = check(db, cs)
    print("gap    A3  A4  none")
    for i in range(args.steps):
        gap = i / (args.steps - 1)
        rules = Counter()
        for v in violations:
            recs = recommend(db, cs, v, gap=gap)
            rules[recs[0].rule if recs else "none"] += 1
        print(f"{gap:4.2f}  {rules['A3']:3d} {rules['A4']:3d} {rules['none']:5d}")


if __name__ == "__main__":
    main()
