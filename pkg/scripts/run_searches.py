"""Run the three counterexample searches and optionally rewrite the test fixtures.

    python3 scripts/run_searches.py
    python3 scripts/run_searches.py --write-fixtures tests/fixtures
"""

import argparse
import sys
from pathlib import Path

from coremarket.counterexamples import SEARCHES
from coremarket.fileio import serialize_lists

DESCRIPTIONS = {
    "core-worst": "after q promotes p, the worst core house of p gets strictly worse.",
    "sr-unsolvable": "the instance has a stable matching; after q promotes p it has none.",
    "ssm-best": "q promotes p into a tie; p's best strongly stable partner gets worse.",
}


def fixture_text(kind: str, tries: int, which: str, body: str) -> str:
    head = [
        f"# Reconstruction: first hit of `coremarket search {kind} --seed 0` (try {tries}).",
        f"# {DESCRIPTIONS[kind]}",
        f"# This is the {which} market; p and q are the agents named p and q.",
    ]
    return "\n".join(head) + "\n" + body


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-tries", type=int, default=100_000)
    ap.add_argument("--write-fixtures", type=Path, metavar="DIR")
    args = ap.parse_args()

    missing = 0
    for kind, search in SEARCHES.items():
        found = search(args.seed, args.max_tries)
        if found is None:
            print(f"{kind:>14}: not found in {args.max_tries} tries")
            missing += 1
            continue
        names = found.before.names
        detail = {k: [None if x is None else names[x] for x in v] if isinstance(v, tuple) else names[v]
                  for k, v in found.detail.items()}
        print(f"{kind:>14}: try {found.tries}, {found.seconds:.2f} s, {detail}")
        if args.write_fixtures and args.seed == 0:
            stem = kind.replace("-", "_")
            for which, H in (("before", found.before), ("after", found.after)):
                path = args.write_fixtures / f"{stem}_{which}.market"
                path.write_text(fixture_text(kind, found.tries, which, serialize_lists(H)), encoding="utf-8")
    return 1 if missing else 0


if __name__ == "__main__":
    sys.exit(main())
