from __future__ import annotations

import random

import pytest

from pgqlab import fotc as F
from pgqlab import pgq as Q
from pgqlab.harness import difftest as D
from pgqlab.harness import fixtures, generators as G, oracles
from pgqlab.patterns import pattern_depth, validate_pattern
from pgqlab.pgraph import make_graph, validate_view
from pgqlab.relcore import make_relation
from pgqlab.relcore import make_relation as rel

# --- oracles -----------------------------------------------------------------------------


def test_brute_reach_examples():
    assert brute(make_graph([], [])) == set()
    chain = make_graph([1, 2, 3], [("a", 1, 2), ("b", 2, 3)])
    assert brute(chain) == {(i, j) for i in (1, 2, 3) for j in (1, 2, 3) if i <= j}
    cycle = make_graph([1, 2], [("a", 1, 2), ("b", 2, 1)])
    assert brute(cycle) == {(i, j) for i in (1, 2) for j in (1, 2)}


def brute(g):
    return oracles.brute_reach(g).rows


def amounts(*edges):
    # edges are (id, src, tgt, amount)
    return make_graph(
        sorted({e[1] for e in edges} | {e[2] for e in edges}),
        [e[:3] for e in edges],
        props=[(e[0], "amount", e[3]) for e in edges],
    )


def test_increasing_paths_examples():
    assert oracles.brute_increasing_paths(amounts(("a", 1, 2, 5)), "amount").rows == {(1, 2)}
    down = amounts(("a", 1, 2, 150), ("b", 2, 3, 50))
    assert oracles.brute_increasing_paths(down, "amount").rows == {(1, 2), (2, 3)}
    up = amounts(("a", 1, 2, 50), ("b", 2, 3, 150))
    assert oracles.brute_increasing_paths(up, "amount").rows == {(1, 2), (2, 3), (1, 3)}
    with pytest.raises(oracles.MissingAmount):
        oracles.brute_increasing_paths(make_graph([1, 2], [("a", 1, 2)]), "amount")


def test_alternating_examples():
    assert not oracles.brute_alternating(fixtures.colors_db(["r"], ["b"], [(1, "r", "b")]))
    assert oracles.brute_alternating(fixtures.colors_db(["r", "r2"], ["b"], [(1, "r", "b"), (2, "b", "r2")]))
    same = fixtures.colors_db(["r", "r2", "r3"], [], [(1, "r", "r2"), (2, "r2", "r3")])
    assert not oracles.brute_alternating(same)
    with pytest.raises(oracles.SchemaMismatch):
        oracles.brute_alternating(fixtures.transfers_fixture().db)


def test_direct_view_checker():
    empty = [rel(1), rel(1), rel(2), rel(2), rel(2), rel(3)]
    assert oracles.violated_conditions(empty) == set()
    assert oracles.violated_conditions(empty[:3]) == {0}


# --- fixtures ----------------------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(fixtures.FIXTURES))
def test_fixture_matches_oracle(name):
    fx = fixtures.load_fixture(name)
    for q in fx.queries.values():
        Q.static_arity(q, fx.db.schema())
    assert fixtures.run_engine(fx) == fixtures.run_oracle(name, fx.db)


def test_transfers_fixture_matches_brute_force(bank):
    assert fixtures.run_engine(bank) == oracles.transfers_over(bank.db, 100)
    # transfer 3 (amount 50) is the only way out of FR01
    assert not any(r[0] == "FR01" for r in fixtures.run_engine(bank).rows)


@pytest.mark.parametrize("name,make", [("transfers", fixtures.random_transfers), ("composite", None)])
def test_random_fixture_instances(name, make):
    rng = random.Random(3)
    fx = fixtures.load_fixture(name)
    for _ in range(20):
        if make is None:
            accounts = [(rng.choice("AB"), rng.choice("NS"), i) for i in range(4)]
            ts = [(i,) + rng.choice(accounts) + rng.choice(accounts) + (i, 10) for i in range(5)]
            db = fixtures.composite_db(accounts, ts)
        else:
            db = make(rng)
        assert fixtures.run_engine(fx, db) == fixtures.run_oracle(name, db)


# --- generators --------------------------------------------------------------------------


@pytest.mark.parametrize("kind", ["db", "graph", "pattern", "query(RO)", "query(RW)", "query(EXT)", "formula"])
def test_generation_is_deterministic(kind):
    assert G.gen_instance(42, kind) == G.gen_instance(42, kind)


def test_fragment_requests_are_respected():
    schema = G.gen_db(random.Random(0)).schema()
    for seed in range(100):
        assert str(Q.classify_fragment(G.gen_instance(seed, "query(RO)"), schema)) == "RO"
        assert Q.classify_fragment(G.gen_instance(seed, "query(RW)"), schema).kind in ("RO", "RW")


def test_generated_objects_are_well_formed():
    rng = random.Random(8)
    for _ in range(200):
        p = G.gen_pattern(rng)
        assert validate_pattern(p) == [] and pattern_depth(p) <= 3
        g = G.gen_graph(rng)
        assert len(g.nodes) <= 6 and len(g.edges) <= 8
        f = G.gen_formula(rng)
        assert F.tc_arity(f) <= 2
        db = G.gen_db(rng)
        q = G.gen_query(rng)
        assert Q.eval_query(db, q).arity == Q.static_arity(q, db.schema())
        assert len(F.domain(db, F.EqConst("x", 1))) <= 5


def test_generated_views_are_valid():
    rng = random.Random(9)
    for _ in range(100):
        db = G.gen_db(rng)
        qg = G.QueryGen(rng)
        view = qg.unary_view()
        k = 1
        for _ in range(rng.randint(0, 2)):
            view = qg.lift(view, k)
            k += 1
        rels = [Q.eval_query(db, v) for v in view]
        assert validate_view(rels, k).valid


# --- difftest ----------------------------------------------------------------------------


@pytest.mark.parametrize(
    "suite", ["endpoint-vs-path", "pgq-to-fotc", "fotc-to-pgq", "strategy-agreement", "evaluator-agreement", "view-validation", "arity-forward"]
)
def test_suites_pass(suite):
    report = D.difftest(1, 40, suite)
    assert report.ok, [m.detail for m in report.mismatches[:3]]


def drop_one(x):
    if hasattr(x, "rows"):
        rows = x.sorted_rows()
        return make_relation(x.arity, rows[1:] if rows else [("junk",) * x.arity])
    return set(list(x)[1:]) if x else {("junk",)}


@pytest.mark.parametrize("suite", ["endpoint-vs-path", "pgq-to-fotc", "fotc-to-pgq", "view-validation"])
def test_corrupted_engine_is_caught(suite):
    report = D.difftest(1, 30, suite, fault=drop_one)
    assert len(report.mismatches) >= 1


def test_report_is_reproducible():
    a = D.difftest(5, 20, "pgq-to-fotc", fault=drop_one)
    b = D.difftest(5, 20, "pgq-to-fotc", fault=drop_one)
    assert a.to_json() == b.to_json()
    assert "mismatches" in a.summary()


def test_unknown_suite():
    with pytest.raises(KeyError):
        D.difftest(0, 1, "nope")
