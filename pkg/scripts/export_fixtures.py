"""Write every worked example as a JSON database plus query file under data/.

Usage: python scripts/export_fixtures.py [outdir]
"""
from __future__ import annotations

import sys
from pathlib import Path

from pgqlab.cli import dump_db
from pgqlab.harness import fixtures
from pgqlab.syntax import print_query


def main(outdir: str = "data") -> None:
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    for name in sorted(fixtures.FIXTURES):
        fx = fixtures.load_fixture(name)
        (out / f"{name}.json").write_text(dump_db(fx.db) + "\n", encoding="utf-8")
        for qname, q in fx.queries.items():
            (out / f"{name}.{qname}.pgq").write_text(print_query(q) + "\n", encoding="utf-8")
        print(f"wrote {name}")


if __name__ == "__main__":
    main(*sys.argv[1:])
