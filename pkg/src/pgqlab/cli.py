"""Command-line frontend.

Exit codes: 0 success, 1 usage error, 2 static error (parse, arity, unknown relation),
3 runtime error (invalid view and the like), 4 difftest or demo mismatch. All output
goes to stdout in a fixed order so that repeated runs are byte-identical.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

from . import fotc as F
from . import pgq as Q
from . import relcore as rc
from . import xlate as X
from .harness import difftest as D
from .harness import fixtures
from .pattern_eval import UnboundVariable as PatternUnbound
from .pgraph import InvalidView, UnknownId, validate_view
from .syntax import ParseError, parse_formula, parse_query, print_formula, print_query

STATIC_ERRORS = (
    ParseError,
    rc.ArityMismatch,
    rc.UnknownRelation,
    rc.IndexOutOfRange,
    rc.BadValue,
    Q.StaticQueryError,
    X.OrderMismatch,
    F.VarOrderMismatch,
    F.MalformedFormula,
    F.UnboundVariable,
)
RUNTIME_ERRORS = (InvalidView, UnknownId, PatternUnbound, rc.PGQError)


class UsageError(Exception):
    pass


# --- database files ---------------------------------------------------------------------


def parse_db(text: str) -> rc.Database:
    """Database from the JSON form ``{"relations": {name: {"arity": k, "tuples": [...]}}}``."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg}", e.pos) from None
    if not isinstance(doc, dict) or not isinstance(doc.get("relations"), dict):
        raise ParseError('expected an object with a "relations" object', 0)
    rels = {}
    for name, body in doc["relations"].items():
        if not isinstance(body, dict) or not isinstance(body.get("arity"), int) or isinstance(body.get("arity"), bool):
            raise ParseError(f"relation {name!r} needs an integer arity", 0)
        tuples = body.get("tuples", [])
        if not isinstance(tuples, list):
            raise ParseError(f"relation {name!r}: tuples must be a list", 0)
        for i, row in enumerate(tuples):
            if not isinstance(row, list):
                raise ParseError(f"relation {name!r}: row {i} is not a list", 0)
            if len(row) != body["arity"]:
                raise rc.ArityMismatch(f"relation {name!r}: row {i} has length {len(row)}, expected {body['arity']}")
        rels[name] = rc.make_relation(body["arity"], [tuple(r) for r in tuples])
    return rc.make_database(rels)


def load_db(path: str) -> rc.Database:
    with open(path, encoding="utf-8") as fh:
        return parse_db(fh.read())


def dump_db(db: rc.Database) -> str:
    doc = {
        "relations": {
            name: {"arity": db[name].arity, "tuples": [list(r) for r in db[name].sorted_rows()]}
            for name in sorted(db.schema())
        }
    }
    return json.dumps(doc, indent=1)


def relation_json(rel: rc.Relation) -> str:
    return json.dumps({"arity": rel.arity, "rows": [list(r) for r in rel.sorted_rows()]})


# --- argument handling ------------------------------------------------------------------


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _text(args, name: str) -> Optional[str]:
    path = getattr(args, name, None)
    inline = getattr(args, f"{name}_text", None)
    if path and inline:
        raise UsageError(f"give either --{name} or --{name}-text, not both")
    if path:
        return _read(path)
    return inline


def _schema(args) -> dict:
    schema = {}
    if getattr(args, "db", None):
        schema.update(load_db(args.db).schema())
    for item in getattr(args, "schema", None) or []:
        for part in item.split(","):
            name, _, arity = part.partition(":")
            if not name or not arity.isdigit():
                raise UsageError(f"bad schema entry {part!r}; expected NAME:ARITY")
            schema[name.strip()] = int(arity)
    return schema


def _vars(args, f) -> tuple:
    if args.vars:
        return tuple(v.strip() for v in args.vars.split(",") if v.strip())
    return tuple(sorted(F.free_vars(f)))


def _need_one(query: Optional[str], formula: Optional[str]) -> None:
    if (query is None) == (formula is None):
        raise UsageError("give exactly one of a query or a formula")


def _seed(args) -> int:
    env = os.environ.get("PGQLAB_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"PGQLAB_SEED must be an integer, got {env!r}") from None
    return args.seed


# --- subcommands ------------------------------------------------------------------------


def cmd_eval(args, out: list) -> int:
    if not args.db:
        raise UsageError("eval needs --db")
    db = load_db(args.db)
    query, formula = _text(args, "query"), _text(args, "formula")
    _need_one(query, formula)
    if query is not None:
        rel = Q.eval_query(db, parse_query(query))
    else:
        f = parse_formula(formula)
        rel = F.eval_formula_rel(db, f, _vars(args, f))
    out.append(relation_json(rel))
    return 0


def cmd_translate(args, out: list) -> int:
    schema = _schema(args)
    query, formula = _text(args, "query"), _text(args, "formula")
    _need_one(query, formula)
    if args.to == "fotc":
        if query is None:
            raise UsageError("--to fotc translates a query")
        f, cols = X.pgq_to_fotc(parse_query(query), schema)
        out.append(print_formula(f))
        if args.show_vars:
            out.append(",".join(cols))
        return 0
    if formula is None:
        raise UsageError("--to pgq translates a formula")
    f = parse_formula(formula)
    q = X.fotc_to_pgq(f, _vars(args, f), X.TCStrategy(args.strategy), schema)
    out.append(print_query(q))
    return 0


def cmd_classify(args, out: list) -> int:
    query, formula = _text(args, "query"), _text(args, "formula")
    _need_one(query, formula)
    if query is not None:
        out.append(str(Q.classify_fragment(parse_query(query), _schema(args))))
    else:
        out.append(f"FO[TC^{F.tc_arity(parse_formula(formula))}]")
    return 0


def cmd_validate_view(args, out: list) -> int:
    if not args.db:
        raise UsageError("validate-view needs --db")
    db = load_db(args.db)
    if args.relations:
        names = [n.strip() for n in args.relations.split(",")]
        if len(names) != 6:
            raise UsageError("--relations needs six names")
        rels = []
        for n in names:
            if n not in db:
                raise rc.UnknownRelation(n)
            rels.append(db[n])
    else:
        text = _text(args, "view")
        if text is None:
            raise UsageError("give --relations, --view or --view-text")
        parts = [p for p in text.split(";") if p.strip()]
        if len(parts) != 6:
            raise UsageError(f"a view needs six queries separated by ';', got {len(parts)}")
        rels = [Q.eval_query(db, parse_query(p)) for p in parts]
    report = validate_view(rels, args.arity)
    out.append(json.dumps(report.to_json()))
    return 0 if report.valid else 3


def cmd_difftest(args, out: list) -> int:
    seed = _seed(args)
    suites = sorted(D.SUITES) if args.suite == "all" else [args.suite]
    if args.suite != "all" and args.suite not in D.SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from all, {', '.join(sorted(D.SUITES))}")
    failed = False
    for name in suites:
        report = D.difftest(seed, args.cases, name)
        failed |= not report.ok
        if args.json:
            out.append(json.dumps(report.to_json()))
        else:
            out.append(report.summary())
            for m in report.mismatches[: args.show]:
                out.append(f"  case {m.case}: {m.detail}")
    return 4 if failed else 0


def _show_result(x) -> str:
    if isinstance(x, rc.Relation):
        return json.dumps([list(r) for r in x.sorted_rows()])
    return json.dumps(x)


def cmd_demo(args, out: list) -> int:
    names = sorted(fixtures.FIXTURES) if args.name == "all" else [args.name]
    failed = False
    for name in names:
        if name not in fixtures.FIXTURES:
            raise UsageError(f"unknown demo {name!r}; choose from all, {', '.join(sorted(fixtures.FIXTURES))}")
        fx = fixtures.load_fixture(name)
        engine = fixtures.run_engine(fx)
        oracle = fixtures.run_oracle(name, fx.db)
        same = engine == oracle
        failed |= not same
        out.append(f"{name}: {'match' if same else 'MISMATCH'}")
        out.append(f"  engine: {_show_result(engine)}")
        out.append(f"  oracle: {_show_result(oracle)}")
    return 4 if failed else 0


# --- entry points -----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pgqlab", description="Evaluate, translate and cross-check graph queries and FO[TC] formulas.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def sources(sp, formula=True):
        sp.add_argument("--query", help="file holding a query")
        sp.add_argument("--query-text", help="query given inline")
        if formula:
            sp.add_argument("--formula", help="file holding an FO[TC] formula")
            sp.add_argument("--formula-text", help="formula given inline")

    def schema(sp):
        sp.add_argument("--db", help="JSON database file (supplies the schema)")
        sp.add_argument("--schema", action="append", help="NAME:ARITY[,NAME:ARITY...] (repeatable)")

    e = sub.add_parser("eval", help="evaluate a query or formula on a database")
    e.add_argument("--db")
    sources(e)
    e.add_argument("--vars", help="column order for a formula (default: sorted free variables)")
    e.set_defaults(func=cmd_eval)

    t = sub.add_parser("translate", help="translate a query to FO[TC] or a formula to a query")
    sources(t)
    schema(t)
    t.add_argument("--to", choices=("fotc", "pgq"), required=True)
    t.add_argument("--strategy", choices=[s.value for s in X.TCStrategy], default=X.TCStrategy.PARAM_ITERATE.value)
    t.add_argument("--vars", help="column order for a formula (default: sorted free variables)")
    t.add_argument("--show-vars", action="store_true", help="also print the output variables of a formula")
    t.set_defaults(func=cmd_translate)

    c = sub.add_parser("classify", help="fragment of a query or TC arity of a formula")
    sources(c)
    schema(c)
    c.set_defaults(func=cmd_classify)

    v = sub.add_parser("validate-view", help="check the view conditions on six relations")
    v.add_argument("--db")
    v.add_argument("--relations", help="six relation names from the database, comma separated")
    v.add_argument("--view", help="file with six queries separated by ';'")
    v.add_argument("--view-text")
    v.add_argument("--arity", type=int, help="expected identifier arity")
    v.set_defaults(func=cmd_validate_view)

    d = sub.add_parser("difftest", help="run a differential test suite")
    d.add_argument("--suite", default="all", help="suite name or 'all'")
    d.add_argument("--seed", type=int, default=0)
    d.add_argument("--cases", type=int, default=100)
    d.add_argument("--json", action="store_true")
    d.add_argument("--show", type=int, default=3, help="mismatches to print per suite")
    d.set_defaults(func=cmd_difftest)

    m = sub.add_parser("demo", help="run a worked example against its oracle")
    m.add_argument("name", nargs="?", default="all")
    m.set_defaults(func=cmd_demo)
    return p


def run(argv) -> tuple:
    """Run one command; returns ``(exit_code, stdout_text)``."""
    out: list = []
    try:
        args = build_parser().parse_args(argv)
        code = args.func(args, out)
    except SystemExit as e:
        # --help prints on its own and exits
        return (e.code or 0), ""
    except UsageError as e:
        return 1, f"usage error: {e}\n"
    except OSError as e:
        return 1, f"usage error: {e.strerror}: {e.filename}\n"
    except STATIC_ERRORS as e:
        return 2, f"static error: {type(e).__name__}: {e}\n"
    except RUNTIME_ERRORS as e:
        return 3, f"runtime error: {type(e).__name__}: {e}\n"
    return code, "".join(line + "\n" for line in out)


def main(argv=None) -> int:
    code, text = run(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
