from __future__ import annotations

import pytest

from pgqlab import pgq as Q
from pgqlab import relcore as rc
from pgqlab.harness import fixtures, oracles
from pgqlab.patterns import Concat, FwdEdge, Node, OutputPattern, PropAccess, Var, star
from pgqlab.pgraph import InvalidView
from pgqlab.relcore import make_database, make_relation as rel
from pgqlab.syntax import ParseError, parse_query

VIEW = ("N", "E", "S", "T", "L", "P")


def graph_db():
    return make_database(
        {
            "N": rel(1, [(1,), (2,), (3,)]),
            "E": rel(1, [(10,), (11,)]),
            "S": rel(2, [(10, 1), (11, 2)]),
            "T": rel(2, [(10, 2), (11, 3)]),
            "L": rel(2, [(1, "A")]),
            "P": rel(3, [(1, "k", 5), (2, "k", 6)]),
            "R": rel(2, [(1, 2)]),
            "S3": rel(3),
        }
    )


REACH = OutputPattern(Concat(Concat(Node("x"), star(FwdEdge(None))), Node("y")), (Var("x"), Var("y")))


def test_static_arity_examples():
    schema = graph_db().schema()
    assert Q.static_arity(Q.Const(5), schema) == 1
    with pytest.raises(rc.ArityMismatch):
        Q.static_arity(Q.Union(Q.Rel("R"), Q.Rel("S3")), schema)
    with pytest.raises(rc.UnknownRelation):
        Q.static_arity(Q.Rel("missing"), schema)
    # a binary view: identifiers of arity 2
    subs = (
        Q.Product(Q.Rel("N"), Q.Const(0)),
        Q.Product(Q.Rel("E"), Q.Const(0)),
        Q.Project((1, 3, 2, 3), Q.Product(Q.Rel("S"), Q.Const(0))),
        Q.Project((1, 3, 2, 3), Q.Product(Q.Rel("T"), Q.Const(0))),
        Q.Project((1, 3, 2), Q.Product(Q.Rel("L"), Q.Const(0))),
        Q.Project((1, 4, 2, 3), Q.Product(Q.Rel("P"), Q.Const(0))),
    )
    m = Q.MatchEXT(OutputPattern(Node("x"), (Var("x"), PropAccess("x", "k"))), subs, 2)
    assert Q.static_arity(m, schema) == 3
    assert Q.eval_query(graph_db(), m).rows == {(1, 0, 5), (2, 0, 6)}
    assert str(Q.classify_fragment(m, schema)) == "EXT(2)"


def test_declared_arity_is_checked():
    subs = tuple(Q.Rel(n) for n in VIEW)
    with pytest.raises(rc.ArityMismatch):
        Q.static_arity(Q.MatchEXT(REACH, subs, 2), graph_db().schema())


def test_inconsistent_view_arities():
    subs = (Q.Rel("N"), Q.Rel("R"), Q.Rel("S"), Q.Rel("T"), Q.Rel("L"), Q.Rel("P"))
    with pytest.raises(Q.ArityUndetermined):
        Q.classify_fragment(Q.MatchEXT(REACH, subs), graph_db().schema())


def test_diff_self_is_empty():
    assert Q.eval_query(graph_db(), Q.Diff(Q.Rel("R"), Q.Rel("R"))).is_empty()


def test_const_outside_active_domain():
    assert Q.eval_query(graph_db(), Q.Const("zz")).rows == {("zz",)}


def test_ro_equals_rw_wrapping():
    db = graph_db()
    ro = Q.eval_query(db, Q.MatchRO(REACH, VIEW))
    rw = Q.eval_query(db, Q.MatchRW(REACH, tuple(Q.Rel(n) for n in VIEW)))
    assert ro == rw
    assert ro.rows == {(1, 1), (2, 2), (3, 3), (1, 2), (2, 3), (1, 3)}


def test_invalid_view_is_an_error():
    subs = (Q.Rel("N"), Q.Rel("N"), Q.Rel("S"), Q.Rel("T"), Q.Rel("L"), Q.Rel("P"))
    with pytest.raises(InvalidView):
        Q.eval_query(graph_db(), Q.MatchRW(REACH, subs))


def test_classify():
    schema = graph_db().schema()
    assert str(Q.classify_fragment(parse_query("PI[1](SIGMA[$1=$2](REL R X REL N))"), schema)) == "RO"
    assert str(Q.classify_fragment(Q.MatchRO(REACH, VIEW), schema)) == "RO"
    rw = Q.MatchRW(REACH, tuple(Q.Rel(n) for n in VIEW))
    assert str(Q.classify_fragment(rw, schema)) == "RW"
    assert str(Q.classify_fragment(Q.Const(1), schema)) == "RW"
    # unary MatchEXT counts as RW
    assert str(Q.classify_fragment(Q.MatchEXT(REACH, tuple(Q.Rel(n) for n in VIEW)), schema)) == "RW"


def test_fixture_classes():
    assert str(Q.classify_fragment(*_q("increasing"))) == "EXT(4)"
    assert str(Q.classify_fragment(*_q("composite"))) == "EXT(3)"
    assert str(Q.classify_fragment(*_q("alternating"))) == "RW"


def _q(name):
    fx = fixtures.load_fixture(name)
    return next(iter(fx.queries.values())), fx.db.schema()


def test_alternating_fixture():
    fx = fixtures.load_fixture("alternating")
    assert fixtures.run_engine(fx) is True
    assert oracles.brute_alternating(fx.db) is True
    single = fixtures.colors_db(["r"], ["b"], [(1, "r", "b")])
    assert fixtures.run_engine(fx, single) is False


def test_increasing_fixture():
    fx = fixtures.load_fixture("increasing")
    got = fixtures.run_engine(fx)
    assert got == oracles.brute_increasing_paths(fixtures.increasing_graph(fx.db), "amount")
    # 150 then 50 does not chain; 50 then 150 does
    assert ("B1", "N", 1, "B1", "N", 2) in got.rows
    assert ("B1", "N", 2, "B2", "S", 3) in got.rows
    assert ("B1", "N", 1, "B2", "S", 4) in got.rows


def test_foreach_appends_parameters():
    db = graph_db()
    # for each node n: the nodes reachable from n in one step, tagged by n
    body = Q.Project(
        (2,), Q.Select(rc.ColEq(1, 3), Q.Product(Q.Project((1, 2), Q.MatchRO(REACH, VIEW)), Q.Param(1)))
    )
    got = Q.eval_query(db, Q.ForEach(Q.Rel("N"), body))
    assert got.arity == 2
    assert got.rows == {(1, 1), (2, 1), (3, 1), (2, 2), (3, 2), (3, 3)}
    with pytest.raises(Q.StaticQueryError):
        Q.static_arity(Q.Param(1), db.schema())


def test_parse_query_examples():
    assert parse_query("REL Account") == Q.Rel("Account")
    q = parse_query("PI[1](SIGMA[$1=$2](REL T X REL S))")
    assert q == Q.Project((1,), Q.Select(rc.ColEq(1, 2), Q.Product(Q.Rel("T"), Q.Rel("S"))))
    with pytest.raises(ParseError):
        parse_query("PI[1](REL")


def test_static_arity_matches_result(bank):
    q = next(iter(bank.queries.values()))
    assert Q.static_arity(q, bank.db.schema()) == Q.eval_query(bank.db, q).arity == 2
