from __future__ import annotations

import pytest

from pgqlab import fotc as F
from pgqlab import pgq as Q
from pgqlab import relcore as rc
from pgqlab import xlate as X
from pgqlab.harness.oracles import brute_reach
from pgqlab.patterns import FwdEdge, HasLabel, Node, Not, PropEq, Repeat
from pgqlab.pgraph import make_graph
from pgqlab.relcore import make_database, make_relation as rel

STRATS = list(X.TCStrategy)


def chain_db():
    return make_database({"E": rel(2, [(1, 2), (2, 3)]), "R": rel(2, [(1, 1), (1, 2)]), "U": rel(1, [(1,)])})


def view_db():
    return make_database(
        {
            "N": rel(1, [(1,), (2,)]),
            "E": rel(1, [(10,)]),
            "S": rel(2, [(10, 1)]),
            "T": rel(2, [(10, 2)]),
            "L": rel(2, [(1, "A"), (10, "T")]),
            "P": rel(3, [(1, "k", 5), (2, "k", 5), (10, "k", 6)]),
        }
    )


VIEW = X.view_from_relations(("N", "E", "S", "T", "L", "P"))


def holds(db, f, **a):
    return F.eval_formula(db, f, a)


# --- forward pieces -----------------------------------------------------------------------


def test_fresh_namer_avoids_used_names():
    nm = X.FreshNamer(used={"v_1", "v_2"})
    assert nm.fresh() == "v_3"
    assert len(set(nm.many(5))) == 5


def test_cond_translation():
    db = view_db()
    nm = X.FreshNamer()
    env = {"x": ("x",), "y": ("y",)}
    lab = X.cond_to_fotc(HasLabel("A", "x"), env, VIEW, nm)
    assert F.free_vars(lab) == {"x"}
    assert holds(db, lab, x=1) and not holds(db, lab, x=2)
    assert holds(db, X.cond_to_fotc(Not(HasLabel("A", "x")), env, VIEW, nm), x=2)
    same = X.cond_to_fotc(PropEq("x", "k", "y", "k"), env, VIEW, nm)
    assert holds(db, same, x=1, y=2) and not holds(db, same, x=1, y=10)


def test_node_and_edge_rules():
    db = view_db()
    nm = X.FreshNamer()
    node = X.pattern_to_fotc(Node("x"), VIEW, {"x": ("x",)}, ("s",), ("t",), nm)
    assert F.relations(node) == {"N"}
    assert holds(db, node, x=1, s=1, t=1) and not holds(db, node, x=1, s=1, t=2)
    edge = X.pattern_to_fotc(FwdEdge("e"), VIEW, {"e": ("e",)}, ("s",), ("t",), nm)
    assert F.relations(edge) == {"E", "S", "T"}
    assert holds(db, edge, e=10, s=1, t=2) and not holds(db, edge, e=10, s=2, t=1)


def test_star_rule_uses_tc():
    nm = X.FreshNamer()
    f = X.pattern_to_fotc(Repeat(FwdEdge(None), 0, None), VIEW, {}, ("s",), ("t",), nm)
    assert F.tc_arity(f) == 1
    db = view_db()
    assert holds(db, f, s=1, t=2) and holds(db, f, s=2, t=2) and not holds(db, f, s=2, t=1)
    # zero iterations only start from nodes
    assert not holds(db, f, s=10, t=10)


def test_relational_base_cases():
    schema = {"R": 2}
    f, cols = X.pgq_to_fotc(Q.Rel("R"), schema)
    assert f == F.Atom("R", ("x1", "x2")) and cols == ("x1", "x2")
    f, cols = X.pgq_to_fotc(Q.Const(5), schema)
    assert f == F.EqConst("x1", 5)
    f, cols = X.pgq_to_fotc(Q.Project((1,), Q.Rel("R")), schema)
    assert cols == ("x1",)
    assert F.eval_formula_rel(chain_db(), f, cols).rows == {(1,)}


def test_forward_on_match(bank):
    q = next(iter(bank.queries.values()))
    f, cols = X.pgq_to_fotc(q, bank.db.schema())
    assert F.eval_formula_rel(bank.db, f, cols) == Q.eval_query(bank.db, q)


# --- backward pieces ----------------------------------------------------------------------


def test_align_columns():
    q = Q.Rel("R")
    assert X.align_columns(q, ["x", "y"], ["x", "y"]) is q
    assert X.align_columns(q, ["x", "y"], ["y", "x"]) == Q.Project((2, 1), q)
    with pytest.raises(X.OrderMismatch):
        X.align_columns(q, ["x", "y"], ["x", "z"])


def test_equality_and_negation_shapes():
    schema = chain_db().schema()
    qa = X.active_domain_query(schema)
    q = X.fotc_to_pgq(F.Eq("x", "y"), ["x", "y"], X.TCStrategy.PARAM_ITERATE, schema)
    assert q == Q.Select(rc.ColEq(1, 2), Q.Product(qa, qa))
    q = X.fotc_to_pgq(F.Not(F.Atom("U", ("x",))), ["x"], X.TCStrategy.PARAM_ITERATE, schema)
    assert q == Q.Diff(qa, Q.Rel("U"))
    assert Q.eval_query(chain_db(), q).rows == {(2,), (3,)}


@pytest.mark.parametrize("strat", STRATS)
def test_forall_example(strat):
    db = make_database({"R": rel(2, [(1, 1), (1, 2)])})
    f = F.Forall("y", F.Atom("R", ("x", "y")))
    q = X.fotc_to_pgq(f, ["x"], strat, db.schema())
    assert Q.eval_query(db, q).rows == {(1,)}


@pytest.mark.parametrize("strat", STRATS)
def test_tc_clause_closure_plus_diagonal(strat):
    db = chain_db()
    qa = X.active_domain_query(db.schema())
    got = Q.eval_query(db, X.tc_clause_to_pgq(Q.Rel("E"), 1, 0, strat, qa))
    g = make_graph([1, 2, 3], [("a", 1, 2), ("b", 2, 3)])
    assert got == brute_reach(g)


@pytest.mark.parametrize("strat", STRATS)
def test_tc_clause_on_empty_body_is_diagonal(strat):
    db = chain_db()
    qa = X.active_domain_query(db.schema())
    empty = Q.Diff(Q.Rel("E"), Q.Rel("E"))
    got = Q.eval_query(db, X.tc_clause_to_pgq(empty, 1, 0, strat, qa))
    assert got.rows == {(v, v) for v in (1, 2, 3)}


@pytest.mark.parametrize("strat", STRATS)
def test_pair_reachability(strat):
    db = chain_db()
    body = F.And(F.Atom("E", ("u1", "v1")), F.Atom("E", ("u2", "v2")))
    f = F.TC(("u1", "u2"), ("v1", "v2"), body, ("a", "b"), ("c", "d"))
    order = ["a", "b", "c", "d"]
    q = X.fotc_to_pgq(f, order, strat, db.schema())
    assert Q.eval_query(db, q) == F.eval_formula_rel(db, f, order)


@pytest.mark.parametrize("strat", STRATS)
def test_parameterized_tc_both_strategies(strat):
    db = make_database({"C": rel(3, [(1, 2, "r"), (2, 3, "b"), (2, 3, "r")])})
    f = F.TC(("u",), ("v",), F.Atom("C", ("u", "v", "p")), ("x",), ("y",))
    order = ["p", "x", "y"]
    assert Q.eval_query(db, X.fotc_to_pgq(f, order, strat, db.schema())) == F.eval_formula_rel(db, f, order)


def test_strategy_identifier_arities():
    db = make_database({"C": rel(3, [(1, 2, "r")])})
    f = F.TC(("u",), ("v",), F.Atom("C", ("u", "v", "p")), ("x",), ("y",))
    schema = db.schema()
    order = ["p", "x", "y"]
    # the embedding widens identifiers by the parameter tuple
    assert X.max_identifier_arity(X.fotc_to_pgq(f, order, X.TCStrategy.PARAM_EMBED, schema), schema) == 3
    assert X.max_identifier_arity(X.fotc_to_pgq(f, order, X.TCStrategy.PARAM_ITERATE, schema), schema) == 2


def test_constants_join_the_active_domain():
    db = chain_db()
    f = F.Not(F.EqConst("x", 7))
    q = X.fotc_to_pgq(f, ["x"], X.TCStrategy.PARAM_ITERATE, db.schema())
    assert Q.eval_query(db, q) == F.eval_formula_rel(db, f, ["x"])
    assert (7,) not in Q.eval_query(db, q).rows


def test_order_errors():
    schema = chain_db().schema()
    with pytest.raises(F.UnboundVariable):
        X.fotc_to_pgq(F.Atom("E", ("x", "y")), ["x"], X.TCStrategy.PARAM_ITERATE, schema)
    with pytest.raises(F.VarOrderMismatch):
        X.fotc_to_pgq(F.Atom("U", ("x",)), ["x", "y"], X.TCStrategy.PARAM_ITERATE, schema)


def test_semantic_round_trip(bank):
    q = next(iter(bank.queries.values()))
    schema = bank.db.schema()
    f, cols = X.pgq_to_fotc(q, schema)
    back = X.fotc_to_pgq(f, cols, X.TCStrategy.PARAM_EMBED, schema)
    assert Q.eval_query(bank.db, back) == Q.eval_query(bank.db, q)
