"""Seeded random generators for graphs, patterns, databases, queries and formulas.

Every generator takes a ``random.Random`` so that a case is reproducible from its
seed. Generated queries only build views that are valid by construction: edges
come from a functional (edge, source, target) relation and node identifiers are
disjoint from edge identifiers.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

from .. import fotc as F
from .. import pgq as Q
from .. import relcore as rc
from ..patterns import (
    Alt,
    BwdEdge,
    Concat,
    Filter,
    FwdEdge,
    HasLabel,
    Node,
    OutputPattern,
    PropAccess,
    PropEq,
    Repeat,
    Var,
    pattern_depth,
    schema_of,
)
from ..patterns import And as CAnd
from ..patterns import Not as CNot
from ..patterns import Or as COr
from ..pgraph import PropertyGraph, make_graph
from ..relcore import Database, make_database, make_relation


@dataclass
class GenConfig:
    max_nodes: int = 6
    max_edges: int = 8
    pattern_depth: int = 3
    labels: tuple = ("A", "B")
    keys: tuple = ("k", "w")
    prop_values: tuple = (1, 2)
    node_vars: tuple = ("x", "y", "z")
    edge_vars: tuple = ("e", "f")
    # database and query generation
    pool: tuple = (1, 2, 3, "a", "b")
    query_depth: int = 2
    max_query_arity: int = 4
    max_id_arity: int = 3
    # formula generation
    formula_depth: int = 3
    formula_vars: tuple = ("x", "y", "z")
    max_tc_arity: int = 2
    formula_pool: tuple = (1, 2, 3, "a")


DEFAULT = GenConfig()


# --- graphs and patterns ----------------------------------------------------------------


def gen_graph(rng: random.Random, cfg: GenConfig = DEFAULT, arity: int = 1) -> PropertyGraph:
    n_nodes = rng.randint(1, cfg.max_nodes)
    n_edges = rng.randint(0, cfg.max_edges)

    def ident(prefix, i):
        base = (f"{prefix}{i}",)
        return base + tuple(rng.choice((0, 1)) for _ in range(arity - 1))

    nodes = sorted({ident("n", i) for i in range(n_nodes)})
    edges = []
    for i in range(n_edges):
        edges.append((ident("e", i), rng.choice(nodes), rng.choice(nodes)))
    edge_ids = {e for e, _, _ in edges}
    # duplicate edge ids (from the random suffix) would break functionality; keep the first
    seen, uniq = set(), []
    for e in edges:
        if e[0] not in seen:
            seen.add(e[0])
            uniq.append(e)
    ids = nodes + sorted(edge_ids)
    labels = [(i, l) for i in ids for l in cfg.labels if rng.random() < 0.3]
    props = [(i, k, rng.choice(cfg.prop_values)) for i in ids for k in cfg.keys if rng.random() < 0.5]
    return make_graph(nodes, uniq, labels, props, arity=arity)


def gen_condition(rng: random.Random, vars_: list, cfg: GenConfig = DEFAULT, depth: int = 2):
    if depth <= 0 or rng.random() < 0.5:
        if rng.random() < 0.5:
            return HasLabel(rng.choice(cfg.labels), rng.choice(vars_))
        return PropEq(rng.choice(vars_), rng.choice(cfg.keys), rng.choice(vars_), rng.choice(cfg.keys))
    r = rng.random()
    if r < 0.3:
        return CNot(gen_condition(rng, vars_, cfg, depth - 1))
    ctor = CAnd if r < 0.65 else COr
    return ctor(gen_condition(rng, vars_, cfg, depth - 1), gen_condition(rng, vars_, cfg, depth - 1))


def _atom(rng: random.Random, cfg: GenConfig):
    r = rng.random()
    if r < 0.4:
        return Node(rng.choice(cfg.node_vars + (None,)))
    var = rng.choice(cfg.edge_vars + (None,))
    return FwdEdge(var) if r < 0.8 else BwdEdge(var)


def _cover(p, missing, cfg: GenConfig):
    # make an alternative bind the same variables as its sibling
    for v in sorted(missing):
        p = Concat(p, Node(v)) if v in cfg.node_vars else Concat(p, Concat(FwdEdge(v), Node(None)))
    return p


def gen_pattern(rng: random.Random, cfg: GenConfig = DEFAULT, depth=None):
    """Random pattern of nesting depth at most ``depth``; draws again if the Alt repair overshoots."""
    depth = cfg.pattern_depth if depth is None else depth
    while True:
        p = _gen_pattern(rng, cfg, depth)
        if pattern_depth(p) <= depth:
            return p


def _gen_pattern(rng: random.Random, cfg: GenConfig, depth: int):
    if depth <= 0 or rng.random() < 0.25:
        return _atom(rng, cfg)
    r = rng.random()
    if r < 0.35:
        return Concat(_gen_pattern(rng, cfg, depth - 1), _gen_pattern(rng, cfg, depth - 1))
    if r < 0.5:
        left = _gen_pattern(rng, cfg, depth - 1)
        right = _gen_pattern(rng, cfg, depth - 1)
        sl, sr = schema_of(left), schema_of(right)
        if sl != sr:
            # the repair adds a level; fall back to a concatenation if that would go too deep
            if depth < 2:
                return Concat(left, right)
            left, right = _cover(left, sr - sl, cfg), _cover(right, sl - sr, cfg)
            if schema_of(left) != schema_of(right):
                return Concat(left, right)
        return Alt(left, right)
    if r < 0.75:
        body = _gen_pattern(rng, cfg, depth - 1)
        lo = rng.choice((0, 0, 1, 2))
        hi = rng.choice((None, lo, lo + 1, lo + 2))
        return Repeat(body, lo, hi)
    body = _gen_pattern(rng, cfg, depth - 1)
    vars_ = sorted(schema_of(body))
    if not vars_:
        return body
    return Filter(body, gen_condition(rng, vars_, cfg, 1))


def gen_output_pattern(rng: random.Random, cfg: GenConfig = DEFAULT, keys=None, depth=None) -> OutputPattern:
    body = gen_pattern(rng, cfg, depth)
    keys = cfg.keys if keys is None else keys
    items = []
    for v in sorted(schema_of(body)):
        if rng.random() < 0.6:
            items.append(Var(v))
        if rng.random() < 0.25:
            items.append(PropAccess(v, rng.choice(keys)))
    return OutputPattern(body, tuple(items))


# --- databases and queries --------------------------------------------------------------

BASE_VIEW = ("N", "E", "S", "T", "L", "P")


def gen_db(rng: random.Random, cfg: GenConfig = DEFAULT) -> Database:
    """A database whose relations N, E, S, T, L, P form a valid unary view, plus R/2 and U/1."""
    pool = list(cfg.pool)
    rng.shuffle(pool)
    n_nodes = rng.randint(1, len(pool) - 1)
    nodes, edge_pool = pool[:n_nodes], pool[n_nodes:]
    edges = [e for e in edge_pool if rng.random() < 0.8]
    src = [(e, rng.choice(nodes)) for e in edges]
    tgt = [(e, rng.choice(nodes)) for e in edges]
    ids = nodes + edges
    lab = [(i, l) for i in ids for l in cfg.pool if rng.random() < 0.15]
    prop = []
    for i in ids:
        for k in cfg.pool:
            if rng.random() < 0.12:
                prop.append((i, k, rng.choice(cfg.pool)))
    r = [(rng.choice(cfg.pool), rng.choice(cfg.pool)) for _ in range(rng.randint(0, 5))]
    u = [(v,) for v in cfg.pool if rng.random() < 0.5]
    return make_database(
        {
            "N": make_relation(1, [(n,) for n in nodes]),
            "E": make_relation(1, [(e,) for e in edges]),
            "S": make_relation(2, src),
            "T": make_relation(2, tgt),
            "L": make_relation(2, lab),
            "P": make_relation(3, prop),
            "R": make_relation(2, r),
            "U": make_relation(1, u),
        }
    )


def _and(conds):
    out = conds[0]
    for c in conds[1:]:
        out = rc.And(out, c)
    return out


class QueryGen:
    """Random queries of a requested fragment over the schema produced by ``gen_db``."""

    def __init__(self, rng: random.Random, cfg: GenConfig = DEFAULT, fragment: str = "EXT"):
        self.rng = rng
        self.cfg = cfg
        self.fragment = fragment
        self.schema = {"N": 1, "E": 1, "S": 2, "T": 2, "L": 2, "P": 3, "R": 2, "U": 1}

    def arity(self, q) -> int:
        return Q.static_arity(q, self.schema)

    # views -----------------------------------------------------------------------

    def triples(self):
        """A functional (edge, source, target) relation."""
        rng = self.rng
        base = Q.Project((1, 3, 5), Q.Select(_and([rc.ColEq(1, 2), rc.ColEq(1, 4)]), Q.Product(Q.Product(Q.Rel("E"), Q.Rel("S")), Q.Rel("T"))))
        r = rng.random()
        if r < 0.3:
            pat = OutputPattern(Concat(Concat(Node("x"), FwdEdge("e")), Node("y")), (Var("e"), Var("x"), Var("y")))
            base = Q.MatchRO(pat, BASE_VIEW)
        if rng.random() < 0.3:
            base = Q.Project((1, 3, 2), base)  # reversed edges
        r = rng.random()
        if r < 0.25:
            base = Q.Project((1, 2, 3), Q.Select(rc.ColEq(1, 4), Q.Product(base, Q.Rel("U"))))
        elif r < 0.4:
            base = Q.Diff(base, Q.Select(rc.ColEq(2, 3), base))
        return base

    def unary_view(self):
        rng = self.rng
        tq = self.triples()
        nodes = Q.Union(Q.Project((2,), tq), Q.Project((3,), tq))
        if rng.random() < 0.5:
            nodes = Q.Union(nodes, Q.Rel("N"))
        edges = Q.Project((1,), tq)
        ids = Q.Union(nodes, edges)
        r = rng.random()
        if r < 0.4:
            lab = Q.Project((1, 2), Q.Select(rc.ColEq(1, 3), Q.Product(Q.Rel("L"), ids)))
        elif r < 0.7 and self.fragment != "RO":
            lab = Q.Product(nodes, Q.Const(rng.choice(self.cfg.pool)))
        else:
            lab = Q.Project((1, 1), Q.Diff(edges, edges))
        if rng.random() < 0.7:
            prop = Q.Project((1, 2, 3), Q.Select(rc.ColEq(1, 4), Q.Product(Q.Rel("P"), ids)))
        else:
            prop = Q.Project((1, 1, 1), Q.Diff(edges, edges))
        return [nodes, edges, Q.Project((1, 2), tq), Q.Project((1, 3), tq), lab, prop]

    def state_query(self):
        rng = self.rng
        r = rng.random()
        if r < 0.4:
            return Q.Rel("U")
        if r < 0.7:
            return Q.Const(rng.choice(self.cfg.pool))
        return Q.Union(Q.Const(rng.choice(self.cfg.pool)), Q.Project((2,), Q.Rel("R")))

    def lift(self, view, k: int):
        """Append one state column to every identifier of an arity-``k`` view."""
        c = self.state_query()
        n, e, s, t, l, p = view
        last = lambda a: a + 1  # noqa: E731 - position of the appended state column
        ids = tuple(range(1, k + 1))
        return [
            Q.Product(n, c),
            Q.Product(e, c),
            Q.Project(ids + (last(2 * k),) + tuple(range(k + 1, 2 * k + 1)) + (last(2 * k),), Q.Product(s, c)),
            Q.Project(ids + (last(2 * k),) + tuple(range(k + 1, 2 * k + 1)) + (last(2 * k),), Q.Product(t, c)),
            Q.Project(ids + (last(k + 1), k + 1), Q.Product(l, c)),
            Q.Project(ids + (last(k + 2), k + 1, k + 2), Q.Product(p, c)),
        ]

    def match(self):
        rng = self.rng
        cfg = self.cfg
        out = gen_output_pattern(rng, self._pattern_cfg(), keys=cfg.pool, depth=2)
        if self.fragment == "RO" or rng.random() < 0.25:
            return Q.MatchRO(out, BASE_VIEW)
        view = self.unary_view()
        if self.fragment == "RW" or rng.random() < 0.4:
            return Q.MatchRW(out, tuple(view))
        k = 1
        for _ in range(rng.randint(1, cfg.max_id_arity - 1)):
            view = self.lift(view, k)
            k += 1
        return Q.MatchEXT(out, tuple(view), k if rng.random() < 0.5 else None)

    def _pattern_cfg(self) -> GenConfig:
        c = self.cfg
        return GenConfig(labels=tuple(c.pool[:2]), keys=tuple(c.pool[:2]), pattern_depth=2)

    # relational layer ----------------------------------------------------------------

    def leaf(self):
        rng = self.rng
        r = rng.random()
        if r < 0.45:
            return self.match()
        if r < 0.6 and self.fragment != "RO":
            return Q.Const(rng.choice(self.cfg.pool))
        return Q.Rel(rng.choice(sorted(self.schema)))

    def fit(self, q, arity: int):
        """Adjust ``q`` to the given arity by projection (or padding with itself)."""
        a = self.arity(q)
        if a == arity:
            return q
        if a == 0:
            q = Q.Product(q, Q.Rel("U"))
            a = 1
        return Q.Project(tuple(self.rng.randint(1, a) for _ in range(arity)), q)

    def query(self, depth=None):
        rng = self.rng
        depth = self.cfg.query_depth if depth is None else depth
        if depth <= 0 or rng.random() < 0.3:
            q = self.leaf()
        else:
            r = rng.random()
            sub = self.query(depth - 1)
            a = self.arity(sub)
            if r < 0.2 and a > 0:
                n = rng.randint(0, min(a, 3))
                q = Q.Project(tuple(rng.randint(1, a) for _ in range(n)), sub)
            elif r < 0.4 and a > 1:
                i, j = rng.sample(range(1, a + 1), 2)
                cond = rc.ColEq(i, j)
                if rng.random() < 0.3:
                    cond = rc.Not(cond)
                q = Q.Select(cond, sub)
            elif r < 0.55:
                other = self.query(depth - 1)
                if a + self.arity(other) > self.cfg.max_query_arity:
                    other = self.fit(other, max(0, self.cfg.max_query_arity - a))
                q = Q.Product(sub, other)
            else:
                other = self.fit(self.query(depth - 1), a)
                q = Q.Union(sub, other) if r < 0.8 else Q.Diff(sub, other)
        if self.arity(q) > self.cfg.max_query_arity:
            q = self.fit(q, self.cfg.max_query_arity)
        return q


def gen_query(rng: random.Random, fragment: str = "EXT", cfg: GenConfig = DEFAULT):
    return QueryGen(rng, cfg, fragment).query()


# --- formulas ---------------------------------------------------------------------------

FORMULA_SCHEMA = {"R": 2, "U": 1, "B": 3}


def gen_formula_db(rng: random.Random, cfg: GenConfig = DEFAULT) -> Database:
    pool = list(cfg.formula_pool)
    n = rng.randint(1, len(pool))
    dom = rng.sample(pool, n)
    return make_database(
        {
            "R": make_relation(2, [(rng.choice(dom), rng.choice(dom)) for _ in range(rng.randint(0, 6))]),
            "U": make_relation(1, [(v,) for v in dom if rng.random() < 0.5]),
            "B": make_relation(3, [tuple(rng.choice(dom) for _ in range(3)) for _ in range(rng.randint(0, 4))]),
        }
    )


class FormulaGen:
    def __init__(self, rng: random.Random, cfg: GenConfig = DEFAULT):
        self.rng = rng
        self.cfg = cfg
        self.counter = 0

    def fresh(self, base: str) -> str:
        self.counter += 1
        return f"{base}{self.counter}"

    def atom(self, scope: list):
        rng = self.rng
        r = rng.random()
        if r < 0.45:
            return F.Atom("R", (rng.choice(scope), rng.choice(scope)))
        if r < 0.65:
            return F.Atom("U", (rng.choice(scope),))
        if r < 0.75:
            return F.Atom("B", tuple(rng.choice(scope) for _ in range(3)))
        if r < 0.9:
            return F.Eq(rng.choice(scope), rng.choice(scope))
        return F.EqConst(rng.choice(scope), rng.choice(self.cfg.formula_pool))

    def formula(self, scope: list, depth: int, tc_ok: bool = True):
        rng = self.rng
        if depth <= 0 or rng.random() < 0.2:
            return self.atom(scope)
        r = rng.random()
        if r < 0.15:
            return F.Not(self.formula(scope, depth - 1, tc_ok))
        if r < 0.35:
            return F.And(self.formula(scope, depth - 1, tc_ok), self.formula(scope, depth - 1, tc_ok))
        if r < 0.5:
            return F.Or(self.formula(scope, depth - 1, tc_ok), self.formula(scope, depth - 1, tc_ok))
        if r < 0.7:
            v = rng.choice(scope)
            ctor = F.Exists if rng.random() < 0.7 else F.Forall
            return ctor(v, self.formula(scope, depth - 1, tc_ok))
        if tc_ok:
            return self.tc(scope, depth)
        return self.atom(scope)

    def tc(self, scope: list, depth: int, k=None):
        rng = self.rng
        k = k or rng.randint(1, self.cfg.max_tc_arity)
        u = tuple(self.fresh("u") for _ in range(k))
        v = tuple(self.fresh("v") for _ in range(k))
        # parameters: at most one outer variable may occur free in the body
        params = [rng.choice(scope)] if rng.random() < 0.4 else []
        inner_scope = list(u + v) + params
        body = self.formula(inner_scope, min(depth - 1, 2), tc_ok=False)
        # the body must mention at least one u and one v to be interesting
        body = F.And(body, self.edge_atom(u, v))
        x = tuple(rng.choice(scope) for _ in range(k))
        y = tuple(rng.choice(scope) for _ in range(k))
        return F.TC(u, v, body, x, y)

    def edge_atom(self, u, v):
        rng = self.rng
        parts = [F.Atom("R", (u[i], v[i])) if rng.random() < 0.7 else F.Atom("R", (v[i], u[i])) for i in range(len(u))]
        out = parts[0]
        for p in parts[1:]:
            out = F.Or(out, p) if rng.random() < 0.3 else F.And(out, p)
        return out


def gen_formula(rng: random.Random, cfg: GenConfig = DEFAULT):
    return FormulaGen(rng, cfg).formula(list(cfg.formula_vars), cfg.formula_depth)


def gen_tc_formula(rng: random.Random, cfg: GenConfig = DEFAULT):
    """A formula whose top-level connective is a TC with distinct endpoint variables."""
    g = FormulaGen(rng, cfg)
    k = rng.randint(1, cfg.max_tc_arity)
    f = g.tc(list(cfg.formula_vars), 3, k)
    xs = tuple(f"x{i}" for i in range(k))
    ys = tuple(f"y{i}" for i in range(k))
    return F.TC(f.u, f.v, f.body, xs, ys)


def gen_instance(seed, kind: str, cfg: GenConfig = DEFAULT):
    """Deterministic object for ``seed``; ``kind`` is db, graph, pattern, query(RO|RW|EXT) or formula."""
    rng = random.Random(seed)
    if kind == "db":
        return gen_db(rng, cfg)
    if kind == "graph":
        return gen_graph(rng, cfg)
    if kind == "pattern":
        return gen_pattern(rng, cfg)
    if kind.startswith("query"):
        fragment = kind[6:-1] if "(" in kind else "EXT"
        return gen_query(rng, fragment, cfg)
    if kind == "formula":
        return gen_formula(rng, cfg)
    raise ValueError(f"unknown kind {kind!r}")


# --- view bundles for validation tests ------------------------------------------------------


def gen_view_bundle(rng: random.Random, cfg: GenConfig = DEFAULT):
    """Six relations from a random graph, possibly mutated; returns (relations, mutation)."""
    from ..pgraph import to_relations

    k = rng.randint(1, 2)
    g = gen_graph(rng, GenConfig(max_nodes=4, max_edges=4), arity=k)
    rels = list(to_relations(g))
    mutation = rng.choice(["none", "overlap", "dangling_src", "double_tgt", "missing_src",
                           "label_orphan", "prop_orphan", "prop_conflict", "shape"])
    nodes, edges = sorted(g.nodes), sorted(g.edges)

    def add(i, row):
        rels[i] = make_relation(rels[i].arity, set(rels[i].rows) | {tuple(row)})

    ghost = ("ghost",) + (0,) * (k - 1)
    if mutation == "overlap" and nodes:
        add(1, nodes[0])
    elif mutation == "dangling_src" and edges:
        # source points at something that is not a node
        e = edges[0]
        rels[2] = make_relation(2 * k, {r for r in rels[2].rows if r[:k] != e} | {e + ghost})
    elif mutation == "double_tgt" and edges and len(nodes) > 1:
        e = edges[0]
        other = next(n for n in nodes if n != g.tgt[e])
        add(3, e + other)
    elif mutation == "missing_src" and edges:
        e = edges[-1]
        rels[2] = make_relation(2 * k, {r for r in rels[2].rows if r[:k] != e})
    elif mutation == "label_orphan":
        add(4, ghost + ("A",))
    elif mutation == "prop_orphan":
        add(5, ghost + ("k", 1))
    elif mutation == "prop_conflict" and nodes:
        n = nodes[0]
        add(5, n + ("k", 1))
        add(5, n + ("k", 2))
    elif mutation == "shape":
        rels[4] = make_relation(k + 2, [])
    if mutation != "shape" and rng.random() < 0.15:
        # a second, independent mutation
        add(4, ghost + ("B",))
    return rels, mutation
