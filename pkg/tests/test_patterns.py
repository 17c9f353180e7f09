from __future__ import annotations

import pytest

from pgqlab.harness.oracles import brute_reach, transfers_over
from pgqlab.pattern_eval import (
    EMPTY,
    PathBudgetExceeded,
    UnboundVariable,
    eval_condition,
    eval_output,
    eval_pattern,
    eval_pattern_paths,
    project_endpoints,
)
from pgqlab.patterns import (
    Alt,
    And,
    BwdEdge,
    Concat,
    Filter,
    FwdEdge,
    HasLabel,
    Node,
    Not,
    Or,
    OutputPattern,
    PropAccess,
    PropEq,
    Repeat,
    Var,
    concat,
    schema_of,
    star,
    validate_pattern,
)
from pgqlab.pgraph import make_graph
from pgqlab.syntax import parse_pattern


def kinds(errs):
    return [e.kind for e in errs]


# --- schemas and static checks ------------------------------------------------------------


def test_schema_rules():
    assert schema_of(Node("x")) == {"x"}
    assert schema_of(Repeat(Concat(Node("x"), FwdEdge("e")), 1, None)) == frozenset()
    assert schema_of(Concat(Node("x"), Node("y"))) == {"x", "y"}
    assert schema_of(Node(None)) == frozenset()
    assert schema_of(Filter(BwdEdge("e"), HasLabel("A", "e"))) == {"e"}
    assert schema_of(Alt(Node("x"), Node("x"))) == {"x"}


def test_validate_reports():
    assert kinds(validate_pattern(Alt(Node("x"), Node("y")))) == ["SchemaMismatch"]
    assert kinds(validate_pattern(Filter(Node("x"), HasLabel("A", "y")))) == ["UnboundVarInCondition"]
    assert kinds(validate_pattern(Repeat(Node("x"), 3, 2))) == ["BadRepeat"]
    assert validate_pattern(parse_pattern("(x) (-[t]-> <Transfer(t)>){1,*} (y)")) == []


def test_validate_output_items():
    body = Concat(Node("x"), Node("y"))
    assert kinds(validate_pattern(OutputPattern(body, (Var("x"), Var("x"))))) == ["DuplicateOutput"]
    assert kinds(validate_pattern(OutputPattern(body, (Var("z"),)))) == ["UnboundOutputVar"]
    assert validate_pattern(OutputPattern(body, (Var("x"), PropAccess("x", "k"), PropAccess("y", "k")))) == []


def test_helpers():
    assert star(Node("x")) == Repeat(Node("x"), 0, None)
    assert concat(Node("x"), FwdEdge("e"), Node("y")) == Concat(Concat(Node("x"), FwdEdge("e")), Node("y"))


# --- conditions ---------------------------------------------------------------------------


def test_conditions_on_bank(bank_graph):
    g = bank_graph
    same = PropEq("t", "amount", "t", "amount")
    assert eval_condition(g, {"t": (1,)}, same)
    # accounts have no amount: undefined means false, and its negation true
    assert not eval_condition(g, {"t": ("DE01",)}, same)
    assert eval_condition(g, {"t": ("DE01",)}, Not(same))
    assert eval_condition(g, {"t": (1,)}, And(HasLabel("Transfer", "t"), Or(HasLabel("Nope", "t"), same)))


def test_unbound_condition_variable():
    g = make_graph([1], [])
    with pytest.raises(UnboundVariable):
        eval_condition(g, {}, HasLabel("A", "x"))


# --- endpoint semantics -------------------------------------------------------------------


def test_node_atom():
    g = make_graph([1, 2], [])
    assert eval_pattern(g, Node("x")) == {
        ((1,), (1,), frozenset({("x", (1,))})),
        ((2,), (2,), frozenset({("x", (2,))})),
    }


def test_zero_repetition_is_diagonal():
    g = make_graph([1, 2, 3], [(10, 1, 2)])
    assert eval_pattern(g, Repeat(FwdEdge("e"), 0, 0)) == {((n,), (n,), EMPTY) for n in (1, 2, 3)}


def test_edges_both_directions():
    g = make_graph([1, 2], [(10, 1, 2)])
    assert {(s, t) for s, t, _ in eval_pattern(g, FwdEdge("e"))} == {((1,), (2,))}
    assert {(s, t) for s, t, _ in eval_pattern(g, BwdEdge("e"))} == {((2,), (1,))}


def test_plus_on_bank_matches_chains(bank, bank_graph):
    got = {(s, t) for s, t, _ in eval_pattern(bank_graph, Repeat(FwdEdge("e"), 1, None))}
    chains = transfers_over(bank.db, -1)
    assert got == {((a,), (b,)) for a, b in chains.rows}


def test_star_on_bank_matches_closure(bank_graph):
    got = {s + t for s, t, _ in eval_pattern(bank_graph, star(FwdEdge(None)))}
    assert got == brute_reach(bank_graph).rows


def test_repetition_discards_bindings_and_no_compatibility():
    # two iterations through different edges: the edge variable may differ per iteration
    g = make_graph([1, 2, 3], [(10, 1, 2), (11, 2, 3)])
    got = eval_pattern(g, Repeat(FwdEdge("e"), 2, 2))
    assert got == {((1,), (3,), EMPTY)}


def test_concat_joins_on_shared_variables():
    g = make_graph([1, 2], [(10, 1, 2), (11, 2, 1)])
    p = concat(Node("x"), FwdEdge("e"), Node("y"), BwdEdge("e"), Node("x"))
    got = eval_pattern(g, p)
    assert {(s, t) for s, t, _ in got} == {((1,), (1,)), ((2,), (2,))}


def test_filter_shrinks_and_alt_commutes():
    g = make_graph([1, 2], [(10, 1, 2)], labels=[(1, "A")])
    p = Filter(Node("x"), HasLabel("A", "x"))
    assert eval_pattern(g, p) <= eval_pattern(g, Node("x"))
    a, b = Node("x"), Filter(Node("x"), HasLabel("A", "x"))
    assert eval_pattern(g, Alt(a, b)) == eval_pattern(g, Alt(b, a))


# --- output patterns ----------------------------------------------------------------------


def test_boolean_output():
    g = make_graph([1], [])
    assert eval_output(g, OutputPattern(Node("x"), ())).rows == {()}
    assert eval_output(make_graph([], []), OutputPattern(Node("x"), ())).is_empty()


def test_output_flattens_composite_ids():
    g = make_graph([("B1", "N")], [], props=[(("B1", "N"), "k", 7)], arity=2)
    out = eval_output(g, OutputPattern(Node("x"), (Var("x"), PropAccess("x", "k"))))
    assert out.arity == 3 and out.rows == {("B1", "N", 7)}


def test_output_drops_undefined_properties():
    g = make_graph([1, 2], [], props=[(1, "k", 5)])
    out = eval_output(g, OutputPattern(Node("x"), (Var("x"), PropAccess("x", "k"))))
    assert out.rows == {(1, 5)}


def test_transfers_output_pattern(bank_graph):
    op = OutputPattern(
        concat(Node("x"), Repeat(Filter(FwdEdge("t"), HasLabel("Big", "t")), 1, None), Node("y")),
        (PropAccess("x", "iban"), PropAccess("y", "iban")),
    )
    got = eval_output(bank_graph, op)
    # brute force: chains of transfers above 100 (all but transfer 3)
    hops = {("DE01", "DE02"), ("DE02", "FR01"), ("NL01", "DE01"), ("DE02", "NL01")}
    reach = set(hops)
    while True:
        more = {(a, d) for a, b in reach for c, d in hops if b == c} - reach
        if not more:
            break
        reach |= more
    assert got.rows == reach


# --- path semantics -----------------------------------------------------------------------


def test_path_atoms():
    g = make_graph([1, 2], [(10, 1, 2)])
    assert eval_pattern_paths(g, Node("x"), 2) == {(((1,),), frozenset({("x", (1,))})), (((2,),), frozenset({("x", (2,))}))}
    assert eval_pattern_paths(g, FwdEdge("e"), 2) == {(((1,), (10,), (2,)), frozenset({("e", (10,))}))}


def test_project_endpoints_basic():
    assert project_endpoints(frozenset()) == frozenset()
    assert project_endpoints({(((1,), (10,), (2,)), EMPTY)}) == {((1,), (2,), EMPTY)}


def test_paths_on_two_cycle():
    g = make_graph([1, 2], [(10, 1, 2), (11, 2, 1)])
    p = Repeat(FwdEdge(None), 1, None)
    assert project_endpoints(eval_pattern_paths(g, p, 2)) == eval_pattern(g, p)


def test_path_budget_stops_blowup():
    g = make_graph([1], [(10, 1, 1), (11, 1, 1), (12, 1, 1)])
    p = Repeat(Repeat(FwdEdge("f"), 2, None), 2, 4)
    with pytest.raises(PathBudgetExceeded):
        eval_pattern_paths(g, p, 3, budget=1000)
