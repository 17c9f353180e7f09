"""Run every differential suite and print one summary line per suite.

Usage: python scripts/run_difftests.py [--seed N] [--cases N]
"""
from __future__ import annotations

import argparse

from pgqlab.harness.difftest import SUITES, difftest


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--cases", type=int, default=300)
    args = ap.parse_args()
    failed = 0
    for suite in sorted(SUITES):
        report = difftest(args.seed, args.cases, suite)
        print(f"{report.summary()} ({report.seconds:.1f}s)")
        for m in report.mismatches[:2]:
            print(f"  case {m.case}: {m.detail}")
        failed += not report.ok
    return 1 if failed else 0


if __name__ == "__main__":
    raise SystemExit(main())
