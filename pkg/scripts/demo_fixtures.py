"""Check the worked examples against their oracles on many random instances.

Usage: python scripts/demo_fixtures.py [--seed N] [--instances N]
"""
from __future__ import annotations

import argparse
import random

from pgqlab.harness import fixtures

RANDOM = {
    "transfers": fixtures.random_transfers,
    "increasing": fixtures.random_increasing,
    "alternating": fixtures.random_colors,
}


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--instances", type=int, default=100)
    args = ap.parse_args()
    bad_total = 0
    for name in sorted(RANDOM):
        fx = fixtures.load_fixture(name)
        rng = random.Random(f"{args.seed}:{name}")
        bad = nonempty = 0
        for _ in range(args.instances):
            db = RANDOM[name](rng)
            got = fixtures.run_engine(fx, db)
            want = fixtures.run_oracle(name, db)
            bad += got != want
            nonempty += bool(want if isinstance(want, bool) else len(want))
        print(f"{name}: {args.instances} instances, {nonempty} with answers, {bad} mismatches")
        bad_total += bad
    return 1 if bad_total else 0


if __name__ == "__main__":
    raise SystemExit(main())
