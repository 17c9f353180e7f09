from __future__ import annotations

import pytest

from pgqlab import fotc as F
from pgqlab.harness.oracles import brute_reach
from pgqlab.pgraph import make_graph
from pgqlab.relcore import make_database, make_relation as rel
from pgqlab.syntax import parse_formula


def chain_db():
    return make_database({"E": rel(2, [(1, 2), (2, 3)]), "U": rel(1)})


CLOSURE = F.TC(("u",), ("v",), F.Atom("E", ("u", "v")), ("x",), ("y",))


def test_free_vars():
    assert F.free_vars(F.Atom("R", ("x", "y"))) == {"x", "y"}
    assert F.free_vars(F.Exists("x", F.Atom("R", ("x", "y")))) == {"y"}
    tc = F.TC(("u",), ("v",), F.Atom("E", ("u", "v", "p")), ("x",), ("y",))
    assert F.free_vars(tc) == {"p", "x", "y"}


def test_tc_is_reflexive():
    db = chain_db()
    for a in (1, 2, 3):
        assert F.eval_formula(db, CLOSURE, {"x": a, "y": a})
    # even on an empty body
    empty = F.TC(("u",), ("v",), F.Atom("U", ("u",)), ("x",), ("y",))
    assert F.eval_formula(db, empty, {"x": 2, "y": 2})
    assert not F.eval_formula(db, empty, {"x": 1, "y": 2})


def test_atom_over_empty_relation():
    assert not F.eval_formula(chain_db(), F.Atom("U", ("x",)), {"x": 1})


def test_tc_reaches_through_chain():
    db = chain_db()
    assert F.eval_formula(db, CLOSURE, {"x": 1, "y": 3})
    assert not F.eval_formula(db, CLOSURE, {"x": 3, "y": 1})


def test_result_relations():
    db = chain_db()
    assert F.eval_formula_rel(db, F.Eq("x", "x"), ("x",)).rows == {(1,), (2,), (3,)}
    assert F.eval_formula_rel(db, F.Atom("E", ("x", "y")), ("x", "y")) == db["E"]
    g = make_graph([1, 2, 3], [("e1", 1, 2), ("e2", 2, 3)])
    assert F.eval_formula_rel(db, CLOSURE, ("x", "y")) == brute_reach(g)


def test_var_order_must_be_a_permutation():
    with pytest.raises(F.VarOrderMismatch):
        F.eval_formula_rel(chain_db(), F.Atom("E", ("x", "y")), ("x",))


def test_unbound_variable():
    with pytest.raises(F.UnboundVariable):
        F.eval_formula(chain_db(), F.Atom("E", ("x", "y")), {"x": 1})


def test_tc_arity():
    assert F.tc_arity(F.Atom("E", ("x", "y"))) == 0
    tc2 = F.TC(("a", "b"), ("c", "d"), F.conj(F.Atom("E", ("a", "c")), F.Atom("E", ("b", "d"))), ("x", "y"), ("z", "w"))
    assert F.tc_arity(tc2) == 2
    tc3 = F.TC(("a", "b", "c"), ("d", "e", "f"), F.Atom("E", ("a", "d")), ("x", "x", "x"), ("y", "y", "y"))
    assert F.tc_arity(F.And(CLOSURE, F.Exists("x", tc3))) == 3


def test_malformed_tc():
    with pytest.raises(F.MalformedFormula):
        F.TC(("u",), ("u",), F.Atom("E", ("u", "u")), ("x",), ("y",))
    with pytest.raises(F.MalformedFormula):
        F.TC(("u",), ("v",), F.Atom("E", ("u", "v")), ("x", "z"), ("y",))


def test_eq_const_and_domain():
    db = chain_db()
    f = F.EqConst("x", 9)
    # constants of the formula join the quantification domain
    assert F.domain(db, f) == {1, 2, 3, 9}
    assert F.eval_formula_rel(db, f, ("x",)).rows == {(9,)}
    assert F.eval_formula(db, F.Exists("x", f), {})


def test_quantifier_duality_and_forall():
    db = make_database({"R": rel(2, [(1, 1), (1, 2)])})
    fa = F.Forall("y", F.Atom("R", ("x", "y")))
    assert F.eval_formula_rel(db, fa, ("x",)).rows == {(1,)}
    dual = F.Not(F.Exists("y", F.Not(F.Atom("R", ("x", "y")))))
    assert F.eval_formula_rel(db, dual, ("x",)) == F.eval_formula_rel(db, fa, ("x",))


def test_parameterized_tc():
    # edges tagged by colour p; closure only along one colour at a time
    db = make_database({"C": rel(3, [(1, 2, "r"), (2, 3, "b"), (2, 3, "r")])})
    f = F.TC(("u",), ("v",), F.Atom("C", ("u", "v", "p")), ("x",), ("y",))
    got = F.eval_formula_rel(db, f, ("p", "x", "y"))
    assert ("r", 1, 3) in got.rows
    assert ("b", 1, 3) not in got.rows
    assert got == F.eval_formula_rel_naive(db, f, ("p", "x", "y"))


def test_bottom_up_matches_enumeration():
    db = chain_db()
    f = parse_formula("E z. (TC[u; v](E(u, v) | E(v, u))(x; z) & !E(z, y))")
    order = ("x", "y")
    assert F.eval_formula_rel(db, f, order) == F.eval_formula_rel_naive(db, f, order)


def test_rename_free_avoids_capture():
    f = F.Exists("y", F.Atom("R", ("x", "y")))
    g = F.rename_free(f, {"x": "y"})
    assert F.free_vars(g) == {"y"}
    db = make_database({"R": rel(2, [(1, 2)])})
    assert F.eval_formula(db, g, {"y": 1})
    assert not F.eval_formula(db, g, {"y": 2})
