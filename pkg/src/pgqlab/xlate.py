"""Translations between queries and FO[TC] formulas.

``pgq_to_fotc`` maps a query to a formula with the same result relation;
``fotc_to_pgq`` maps a formula back to a query. Transitive closure on the way back
is realised by building a graph view whose edges are the closure body's pairs and
matching a reachability pattern over it. Two strategies are offered:

* ``PARAM_ITERATE`` loops over the parameter tuples at evaluation time (``ForEach``)
  and builds one graph per tuple;
* ``PARAM_EMBED`` builds a single graph whose identifiers carry the parameter tuple.

In both, a closure pair ``(a, b)`` becomes an edge with identifier ``(a, b)`` from node
``(a, a)`` to node ``(b, b)``; self-loops are dropped because the closure is reflexive
anyway and an edge ``(a, a)`` would collide with the node ``(a, a)``. The full diagonal
over the domain is added at the end, since the closure is reflexive on every tuple,
not only on those that touch an edge.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

from . import fotc as F
from . import pgq as Q
from . import relcore as rc
from .patterns import (
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
    schema_of,
)
from .patterns import And as CAnd
from .patterns import Not as CNot
from .patterns import Or as COr
from .relcore import PGQError


class OrderMismatch(PGQError):
    pass


class TCStrategy(enum.Enum):
    PARAM_ITERATE = "iterate"
    PARAM_EMBED = "embed"


@dataclass
class FreshNamer:
    prefix: str = "v"
    used: set = field(default_factory=set)
    counter: int = 0

    def reserve(self, names) -> None:
        self.used.update(names)

    def fresh(self, hint: Optional[str] = None) -> str:
        base = hint or self.prefix
        while True:
            self.counter += 1
            name = f"{base}_{self.counter}"
            if name not in self.used:
                self.used.add(name)
                return name

    def many(self, n: int, hint: Optional[str] = None) -> tuple:
        return tuple(self.fresh(hint) for _ in range(n))


# --- forward: queries to formulas -------------------------------------------------------

N_, E_, SRC, TGT, LAB, PROP = range(6)


@dataclass
class ViewFormulas:
    """The six view relations as formula builders.

    ``build(i, vars)`` returns a formula whose free variables are exactly ``vars``
    (k, k, 2k, 2k, k+1 and k+2 of them).
    """

    k: int
    build: Callable[[int, tuple], object]

    def node(self, ids):
        return self.build(N_, tuple(ids))

    def edge(self, ids):
        return self.build(E_, tuple(ids))

    def src(self, e, n):
        return self.build(SRC, tuple(e) + tuple(n))

    def tgt(self, e, n):
        return self.build(TGT, tuple(e) + tuple(n))

    def lab(self, ids, w):
        return self.build(LAB, tuple(ids) + (w,))

    def prop(self, ids, key, val):
        return self.build(PROP, tuple(ids) + (key, val))


def view_from_relations(names: Sequence[str], k: int = 1) -> ViewFormulas:
    return ViewFormulas(k, lambda i, vs: F.Atom(names[i], vs))


def view_from_formulas(pairs: Sequence[tuple], k: int) -> ViewFormulas:
    """Six ``(formula, free-variable tuple)`` pairs, substituted capture-free on use."""

    def build(i, vs):
        f, params = pairs[i]
        return F.rename_free(f, dict(zip(params, vs)), avoid=frozenset(vs))

    return ViewFormulas(k, build)


def cond_to_fotc(theta, env: Mapping[str, tuple], view: ViewFormulas, namer: FreshNamer):
    if isinstance(theta, PropEq):
        kk, kk2, v, v2 = namer.many(4, "pk")
        return F.exists(
            (kk, v, kk2, v2),
            F.conj(
                view.prop(env[theta.x], kk, v),
                F.EqConst(kk, theta.k),
                view.prop(env[theta.x2], kk2, v2),
                F.EqConst(kk2, theta.k2),
                F.Eq(v, v2),
            ),
        )
    if isinstance(theta, HasLabel):
        w = namer.fresh("lb")
        return F.Exists(w, F.And(view.lab(env[theta.x], w), F.EqConst(w, theta.label)))
    if isinstance(theta, CAnd):
        return F.And(cond_to_fotc(theta.left, env, view, namer), cond_to_fotc(theta.right, env, view, namer))
    if isinstance(theta, COr):
        return F.Or(cond_to_fotc(theta.left, env, view, namer), cond_to_fotc(theta.right, env, view, namer))
    if isinstance(theta, CNot):
        return F.Not(cond_to_fotc(theta.arg, env, view, namer))
    raise TypeError(f"not a condition: {theta!r}")


def _eq_tuple(xs, ys):
    return F.eqs(xs, ys)


def _with_eqs(f, xs, ys):
    e = _eq_tuple(xs, ys)
    return f if e is None else F.And(f, e)


def pattern_to_fotc(p, view: ViewFormulas, env: Mapping[str, tuple], s: tuple, t: tuple, namer: FreshNamer):
    """Formula over ``env``'s tuples for ``schema_of(p)`` plus the endpoint tuples ``s``, ``t``."""
    k = view.k
    if isinstance(p, Node):
        if p.var is None:
            return F.And(view.node(s), _eq_tuple(s, t))
        x = env[p.var]
        return F.conj(view.node(x), _eq_tuple(x, s), _eq_tuple(s, t))
    if isinstance(p, (FwdEdge, BwdEdge)):
        a, b = (s, t) if isinstance(p, FwdEdge) else (t, s)
        e = env[p.var] if p.var is not None else namer.many(k, "e")
        f = F.conj(view.edge(e), view.src(e, a), view.tgt(e, b))
        return f if p.var is not None else F.exists(e, f)
    if isinstance(p, Concat):
        m = namer.many(k, "m")
        return F.exists(
            m,
            F.And(pattern_to_fotc(p.left, view, env, s, m, namer), pattern_to_fotc(p.right, view, env, m, t, namer)),
        )
    if isinstance(p, Alt):
        return F.Or(pattern_to_fotc(p.left, view, env, s, t, namer), pattern_to_fotc(p.right, view, env, s, t, namer))
    if isinstance(p, Filter):
        return F.And(pattern_to_fotc(p.body, view, env, s, t, namer), cond_to_fotc(p.cond, env, view, namer))
    if isinstance(p, Repeat):
        return _repeat_to_fotc(p, view, s, t, namer)
    raise TypeError(f"not a pattern: {p!r}")


def _step(body, view: ViewFormulas, a: tuple, b: tuple, namer: FreshNamer):
    # one iteration: the body's own variables are local to the iteration
    inner = {x: namer.many(view.k, x) for x in sorted(schema_of(body))}
    f = pattern_to_fotc(body, view, inner, a, b, namer)
    return F.exists([v for x in sorted(inner) for v in inner[x]], f)


def _power(body, view, n: int, s: tuple, t: tuple, namer):
    if n == 0:
        return F.And(view.node(s), _eq_tuple(s, t))
    points = [s] + [namer.many(view.k, "m") for _ in range(n - 1)] + [t]
    steps = [_step(body, view, points[i], points[i + 1], namer) for i in range(n)]
    return F.exists([v for pt in points[1:-1] for v in pt], F.conj(*steps))


def _repeat_to_fotc(p: Repeat, view: ViewFormulas, s, t, namer):
    if p.hi is not None:
        return F.disj(*(_power(p.body, view, n, s, t, namer) for n in range(p.lo, p.hi + 1)))
    u, v = namer.many(view.k, "u"), namer.many(view.k, "w")
    if p.lo == 0:
        closure = F.TC(u, v, _step(p.body, view, u, v, namer), s, t)
        return F.And(view.node(s), closure)
    m = namer.many(view.k, "m")
    closure = F.TC(u, v, _step(p.body, view, u, v, namer), m, t)
    return F.exists(m, F.And(_power(p.body, view, p.lo, s, m, namer), closure))


def output_to_fotc(op: OutputPattern, view: ViewFormulas, out: tuple, namer: FreshNamer):
    """Formula with free variables ``out`` describing the rows of the output pattern."""
    k = view.k
    env = {x: namer.many(k, x) for x in sorted(schema_of(op.body))}
    s, t = namer.many(k, "s"), namer.many(k, "t")
    parts = [pattern_to_fotc(op.body, view, env, s, t, namer)]
    pos = 0
    for item in op.omega:
        if isinstance(item, Var):
            parts.append(_eq_tuple(out[pos : pos + k], env[item.name]))
            pos += k
        else:
            kk = namer.fresh("pk")
            parts.append(F.Exists(kk, F.And(view.prop(env[item.name], kk, out[pos]), F.EqConst(kk, item.key))))
            pos += 1
    bound = list(s) + list(t) + [v for x in sorted(env) for v in env[x]]
    return F.exists(bound, F.conj(*parts))


def _sel_to_fotc(c, out):
    if isinstance(c, rc.ColEq):
        return F.Eq(out[c.i - 1], out[c.j - 1])
    if isinstance(c, rc.And):
        return F.And(_sel_to_fotc(c.left, out), _sel_to_fotc(c.right, out))
    if isinstance(c, rc.Or):
        return F.Or(_sel_to_fotc(c.left, out), _sel_to_fotc(c.right, out))
    return F.Not(_sel_to_fotc(c.arg, out))


class _Forward:
    def __init__(self, schema: Mapping[str, int], namer: FreshNamer):
        self.schema = schema
        self.namer = namer

    def arity(self, q, params) -> int:
        return Q.static_arity(q, self.schema, tuple(len(p) for p in params))

    def tau(self, q, out: tuple, params: tuple = ()):
        """Formula with free variables ``out`` (plus enclosing parameter variables)."""
        nm = self.namer
        if isinstance(q, Q.Rel):
            return F.Atom(q.name, out)
        if isinstance(q, Q.Const):
            return F.EqConst(out[0], q.value)
        if isinstance(q, Q.Param):
            return F.Eq(out[0], params[-1][q.index - 1])
        if isinstance(q, Q.Project):
            z = nm.many(self.arity(q.arg, params), "z")
            inner = self.tau(q.arg, z, params)
            return F.exists(z, _with_eqs(inner, out, [z[i - 1] for i in q.indices]))
        if isinstance(q, Q.Select):
            return F.And(self.tau(q.arg, out, params), _sel_to_fotc(q.cond, out))
        if isinstance(q, Q.Product):
            a = self.arity(q.left, params)
            return F.And(self.tau(q.left, out[:a], params), self.tau(q.right, out[a:], params))
        if isinstance(q, Q.Union):
            return F.Or(self.tau(q.left, out, params), self.tau(q.right, out, params))
        if isinstance(q, Q.Diff):
            return F.And(self.tau(q.left, out, params), F.Not(self.tau(q.right, out, params)))
        if isinstance(q, Q.MATCHES):
            k = Q.match_id_arity(q, self.schema, tuple(len(p) for p in params))
            if isinstance(q, Q.MatchRO):
                view = view_from_relations(q.rels, k)
            else:
                subs = q.subs
                view = ViewFormulas(k, lambda i, vs: self.tau(subs[i], vs, params))
            return output_to_fotc(q.out, view, out, nm)
        if isinstance(q, Q.ForEach):
            l = self.arity(q.params, params)
            b = len(out) - l
            p = out[b:]
            return F.And(self.tau(q.params, p, params), self.tau(q.body, out[:b], params + (p,)))
        raise TypeError(f"not a query: {q!r}")


def pgq_to_fotc(q, schema: Mapping[str, int], namer: Optional[FreshNamer] = None):
    """Formula and column order with the same result relation as ``q`` on every database."""
    n = Q.static_arity(q, schema)
    namer = namer or FreshNamer()
    out = tuple(f"x{i}" for i in range(1, n + 1))
    namer.reserve(out)
    return _Forward(schema, namer).tau(q, out), out


# --- backward: formulas to queries ------------------------------------------------------


def align_columns(q, from_order: Sequence[str], to_order: Sequence[str]):
    src, dst = list(from_order), list(to_order)
    if sorted(src) != sorted(dst) or len(set(src)) != len(src):
        raise OrderMismatch(f"{src} is not a permutation of {dst}")
    if src == dst:
        return q
    return Q.Project(tuple(src.index(v) + 1 for v in dst), q)


def empty_query(arity: int, qa):
    """A query with no rows of the given arity (``A MINUS A`` widened)."""
    base = Q.Diff(qa, qa)
    if arity == 0:
        return Q.Project((), base)
    return Q.Project(tuple([1] * arity), base)


def active_domain_query(schema: Mapping[str, int], consts=()):
    parts = []
    for name in sorted(schema):
        for i in range(1, schema[name] + 1):
            parts.append(Q.Project((i,), Q.Rel(name)))
    for c in sorted(consts, key=lambda v: rc.value_key(v)):
        parts.append(Q.Const(c))
    if not parts:
        return Q.Diff(Q.Const(0), Q.Const(0))
    out = parts[0]
    for p in parts[1:]:
        out = Q.Union(out, p)
    return out


def _conj_sel(conds):
    out = conds[0]
    for c in conds[1:]:
        out = rc.And(out, c)
    return out


def _range(a: int, b: int) -> tuple:
    # 1-based inclusive column positions a..b
    return tuple(range(a, b + 1))


def _reach(body, k: int, l: int, qa):
    """Reflexive-transitive closure of the pairs in ``body`` grouped by parameter columns.

    ``body`` has columns (a[k], b[k], c[l]); the result has the same layout. The
    closure is taken per parameter tuple ``c`` by one graph with identifiers of arity
    ``2k + l``. Only tuples that occur in ``body`` get their diagonal pair here.
    """
    w = 2 * k + l
    a_cols, b_cols, c_cols = _range(1, k), _range(k + 1, 2 * k), _range(2 * k + 1, w)
    loop = _conj_sel([rc.ColEq(i, k + i) for i in a_cols])
    edges = Q.Select(rc.Not(loop), body)
    nodes = Q.Union(Q.Project(a_cols + a_cols + c_cols, body), Q.Project(b_cols + b_cols + c_cols, body))
    src = Q.Project(_range(1, w) + a_cols + a_cols + c_cols, edges)
    tgt = Q.Project(_range(1, w) + b_cols + b_cols + c_cols, edges)
    lab = empty_query(w + 1, qa)
    prop = empty_query(w + 2, qa)
    pattern = OutputPattern(Concat(Concat(Node("x"), Repeat(FwdEdge(None), 0, None)), Node("y")), (Var("x"), Var("y")))
    match = Q.MatchEXT(pattern, (nodes, edges, src, tgt, lab, prop), w)
    # rows are (a, a, c, b, b, c); keep (a, b, c)
    return Q.Project(a_cols + tuple(w + i for i in a_cols) + c_cols, match)


def power(qa, n: int):
    if n == 0:
        return Q.Project((), Q.Const(0))
    out = qa
    for _ in range(n - 1):
        out = Q.Product(out, qa)
    return out


def tc_clause_to_pgq(body, k: int, l: int, strat: TCStrategy, qa):
    """Closure query with columns (a[k], b[k], c[l]) for a body with the same layout."""
    w = 2 * k + l
    diag = Q.Project(_range(1, k) + _range(1, k) + _range(k + 1, k + l), power(qa, k + l))
    if strat is TCStrategy.PARAM_EMBED or l == 0:
        return Q.Union(_reach(body, k, l, qa), diag)
    params = Q.Project(_range(2 * k + 1, w), body)
    tag = power_params(l)
    same = _conj_sel([rc.ColEq(2 * k + i, w + i) for i in range(1, l + 1)])
    per_param = Q.Project(_range(1, 2 * k), Q.Select(same, Q.Product(body, tag)))
    return Q.Union(Q.ForEach(params, _reach(per_param, k, 0, qa)), diag)


def power_params(l: int):
    out = Q.Param(1)
    for i in range(2, l + 1):
        out = Q.Product(out, Q.Param(i))
    return out


class _Backward:
    def __init__(self, schema: Mapping[str, int], strat: TCStrategy, qa):
        self.schema = schema
        self.strat = strat
        self.qa = qa

    def pad(self, q, cols: list, target: Sequence[str]):
        cols = list(cols)
        for c in target:
            if c not in cols:
                q = Q.Product(q, self.qa)
                cols.append(c)
        return align_columns(q, cols, target), list(target)

    def T(self, f):
        """Query and its column names (distinct free variables of ``f``)."""
        if isinstance(f, F.Atom):
            if f.rel not in self.schema:
                raise rc.UnknownRelation(f.rel)
            if self.schema[f.rel] != len(f.args):
                raise rc.ArityMismatch(f"{f.rel} has arity {self.schema[f.rel]}, used with {len(f.args)}")
            q = Q.Rel(f.rel)
            cols: list = []
            keep: list = []
            conds = []
            for i, x in enumerate(f.args, 1):
                if x in cols:
                    conds.append(rc.ColEq(keep[cols.index(x)], i))
                else:
                    cols.append(x)
                    keep.append(i)
            if conds:
                q = Q.Project(tuple(keep), Q.Select(_conj_sel(conds), q))
            return q, cols
        if isinstance(f, F.Eq):
            if f.x == f.y:
                return self.qa, [f.x]
            return Q.Select(rc.ColEq(1, 2), Q.Product(self.qa, self.qa)), [f.x, f.y]
        if isinstance(f, F.EqConst):
            return Q.Const(f.value), [f.x]
        if isinstance(f, F.Not):
            q, cols = self.T(f.arg)
            return Q.Diff(power(self.qa, len(cols)), q), cols
        if isinstance(f, F.And):
            q1, c1 = self.T(f.left)
            q2, c2 = self.T(f.right)
            if set(c1) == set(c2):
                q2 = align_columns(q2, c2, c1)
                return Q.Diff(q1, Q.Diff(q1, q2)), c1
            return self._join(q1, c1, q2, c2)
        if isinstance(f, F.Or):
            q1, c1 = self.T(f.left)
            q2, c2 = self.T(f.right)
            target = c1 + [c for c in c2 if c not in c1]
            q1, _ = self.pad(q1, c1, target)
            q2, _ = self.pad(q2, c2, target)
            return Q.Union(q1, q2), target
        if isinstance(f, F.Exists):
            q, cols = self.T(f.body)
            if f.var in cols:
                keep = [i for i, c in enumerate(cols, 1) if c != f.var]
                return Q.Project(tuple(keep), q), [c for c in cols if c != f.var]
            return Q.Product(q, Q.Project((), self.qa)), cols
        if isinstance(f, F.Forall):
            return self.T(F.Not(F.Exists(f.var, F.Not(f.body))))
        if isinstance(f, F.TC):
            return self._tc(f)
        raise TypeError(f"not a formula: {f!r}")

    def _join(self, q1, c1, q2, c2):
        a = len(c1)
        shared = [rc.ColEq(c1.index(c) + 1, a + j) for j, c in enumerate(c2, 1) if c in c1]
        q = Q.Product(q1, q2)
        if shared:
            q = Q.Select(_conj_sel(shared), q)
        keep = _range(1, a) + tuple(a + j for j, c in enumerate(c2, 1) if c not in c1)
        cols = c1 + [c for c in c2 if c not in c1]
        if len(keep) != a + len(c2):
            q = Q.Project(keep, q)
        return q, cols

    def _tc(self, f: F.TC):
        n = len(f.u)
        qb, cb = self.T(f.body)
        params = [c for c in cb if c not in f.u and c not in f.v]
        layout = list(f.u) + list(f.v) + params
        qb, _ = self.pad(qb, cb, layout)
        closure = tc_clause_to_pgq(qb, n, len(params), self.strat, self.qa)
        # columns of closure are (x, y, params); names may repeat or coincide with params
        names = list(f.x) + list(f.y) + params
        cols: list = []
        keep: list = []
        conds = []
        for i, x in enumerate(names, 1):
            if x in cols:
                conds.append(rc.ColEq(keep[cols.index(x)], i))
            else:
                cols.append(x)
                keep.append(i)
        q = closure
        if conds:
            q = Q.Select(_conj_sel(conds), q)
        if len(keep) != len(names):
            q = Q.Project(tuple(keep), q)
        return q, cols


def fotc_to_pgq(f, var_order: Sequence[str], strat: TCStrategy, schema: Mapping[str, int]):
    """Query over ``schema`` whose result equals the formula's result relation under ``var_order``."""
    order = list(var_order)
    missing = F.free_vars(f) - set(order)
    if missing:
        raise F.UnboundVariable(", ".join(sorted(missing)))
    if len(set(order)) != len(order) or set(order) != F.free_vars(f):
        raise F.VarOrderMismatch(f"{order} is not a permutation of {sorted(F.free_vars(f))}")
    qa = active_domain_query(schema, F.constants(f))
    q, cols = _Backward(schema, strat, qa).T(f)
    return align_columns(q, cols, order)


def max_identifier_arity(q, schema: Mapping[str, int]) -> int:
    return Q.max_id_arity(q, schema)
