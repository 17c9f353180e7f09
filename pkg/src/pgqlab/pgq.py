"""Query ASTs and evaluation for the read-only, read-write and extended fragments.

Besides the relational operators and the three match forms, two auxiliary nodes
support the parameter-iterating transitive-closure translation:
``ForEach(params, body)`` evaluates ``body`` once per row of ``params`` and tags every
result row with that parameter row, and ``Param(i)`` is the singleton ``{(c_i)}`` for
the innermost enclosing ``ForEach``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Union

from . import relcore as rc
from .pattern_eval import eval_pattern, output_arity, output_rows
from .patterns import OutputPattern, Var, validate_pattern
from .pgraph import pg_view
from .relcore import ArityMismatch, Database, PGQError, Relation, UnknownRelation, Value


class ArityUndetermined(ArityMismatch):
    pass


class StaticQueryError(PGQError):
    pass


@dataclass(frozen=True)
class Rel:
    name: str


@dataclass(frozen=True)
class Const:
    value: Value


@dataclass(frozen=True)
class Project:
    indices: tuple
    arg: "Query"


@dataclass(frozen=True)
class Select:
    cond: rc.SelCond
    arg: "Query"


@dataclass(frozen=True)
class Product:
    left: "Query"
    right: "Query"


@dataclass(frozen=True)
class Union:
    left: "Query"
    right: "Query"


@dataclass(frozen=True)
class Diff:
    left: "Query"
    right: "Query"


@dataclass(frozen=True)
class MatchRO:
    out: OutputPattern
    rels: tuple  # six relation names


@dataclass(frozen=True)
class MatchRW:
    out: OutputPattern
    subs: tuple  # six queries


@dataclass(frozen=True)
class MatchEXT:
    out: OutputPattern
    subs: tuple
    arity: Optional[int] = None


@dataclass(frozen=True)
class ForEach:
    params: "Query"
    body: "Query"


@dataclass(frozen=True)
class Param:
    index: int


Query = "Rel | Const | Project | Select | Product | Union | Diff | MatchRO | MatchRW | MatchEXT | ForEach | Param"
MATCHES = (MatchRO, MatchRW, MatchEXT)


def children(q) -> tuple:
    if isinstance(q, (Rel, Const, Param, MatchRO)):
        return ()
    if isinstance(q, (Project, Select)):
        return (q.arg,)
    if isinstance(q, (Product, Union, Diff)):
        return (q.left, q.right)
    if isinstance(q, (MatchRW, MatchEXT)):
        return tuple(q.subs)
    if isinstance(q, ForEach):
        return (q.params, q.body)
    raise TypeError(f"not a query: {q!r}")


def walk(q):
    yield q
    for c in children(q):
        yield from walk(c)


# --- static checks ---------------------------------------------------------------------


def _view_arity(arities, declared=None) -> int:
    k = arities[0]
    want = (k, k, 2 * k, 2 * k, k + 1, k + 2)
    if k < 1 or tuple(arities) != want:
        raise ArityUndetermined(f"view subquery arities {tuple(arities)} fit no identifier arity")
    if declared is not None and declared != k:
        raise ArityMismatch(f"declared identifier arity {declared}, subqueries give {k}")
    return k


def _check_output(out: OutputPattern) -> None:
    errs = validate_pattern(out)
    if errs:
        raise StaticQueryError("; ".join(map(str, errs)))


def match_id_arity(q, schema: Mapping[str, int], params: tuple = ()) -> int:
    if isinstance(q, MatchRO):
        for name in q.rels:
            if name not in schema:
                raise UnknownRelation(name)
        k = _view_arity([schema[n] for n in q.rels])
    else:
        k = _view_arity(
            [static_arity(s, schema, params) for s in q.subs],
            q.arity if isinstance(q, MatchEXT) else None,
        )
    if not isinstance(q, MatchEXT) and k != 1:
        raise ArityMismatch(f"{type(q).__name__} needs unary identifiers, got arity {k}")
    return k


def static_arity(q, schema: Mapping[str, int], params: tuple = ()) -> int:
    """Arity of the result of ``q``; ``params`` holds the arities of enclosing ForEach rows."""
    if isinstance(q, Rel):
        if q.name not in schema:
            raise UnknownRelation(q.name)
        return schema[q.name]
    if isinstance(q, Const):
        rc.check_value(q.value)
        return 1
    if isinstance(q, Param):
        if not params or not 1 <= q.index <= params[-1]:
            raise StaticQueryError(f"PARAM {q.index} outside a matching FOREACH")
        return 1
    if isinstance(q, Project):
        a = static_arity(q.arg, schema, params)
        for i in q.indices:
            if not 1 <= i <= a:
                raise rc.IndexOutOfRange(f"${i} outside arity {a}")
        return len(q.indices)
    if isinstance(q, Select):
        a = static_arity(q.arg, schema, params)
        for i in rc.cond_indices(q.cond):
            if not 1 <= i <= a:
                raise rc.IndexOutOfRange(f"${i} outside arity {a}")
        return a
    if isinstance(q, Product):
        return static_arity(q.left, schema, params) + static_arity(q.right, schema, params)
    if isinstance(q, (Union, Diff)):
        a, b = static_arity(q.left, schema, params), static_arity(q.right, schema, params)
        if a != b:
            raise ArityMismatch(f"{type(q).__name__} of arities {a} and {b}")
        return a
    if isinstance(q, MATCHES):
        _check_output(q.out)
        return output_arity(q.out.omega, match_id_arity(q, schema, params))
    if isinstance(q, ForEach):
        l = static_arity(q.params, schema, params)
        return static_arity(q.body, schema, params + (l,)) + l
    raise TypeError(f"not a query: {q!r}")


def column_names(out: OutputPattern, k: int) -> list:
    """Provenance of each output column, e.g. ``x[1]`` or ``x.amount``."""
    cols = []
    for item in out.omega:
        if isinstance(item, Var):
            cols += [item.name] if k == 1 else [f"{item.name}[{i}]" for i in range(1, k + 1)]
        else:
            cols.append(f"{item.name}.{item.key}")
    return cols


# --- classification --------------------------------------------------------------------


@dataclass(frozen=True)
class FragmentClass:
    kind: str  # "RO" | "RW" | "EXT"
    arity: int = 1

    def __str__(self):
        return f"EXT({self.arity})" if self.kind == "EXT" else self.kind


def max_id_arity(q, schema: Mapping[str, int], params: tuple = ()) -> int:
    """Largest identifier arity over all match nodes (0 when there are none)."""
    best = 0
    if isinstance(q, MATCHES):
        best = match_id_arity(q, schema, params)
    if isinstance(q, ForEach):
        l = static_arity(q.params, schema, params)
        return max(max_id_arity(q.params, schema, params), max_id_arity(q.body, schema, params + (l,)))
    for c in children(q):
        best = max(best, max_id_arity(c, schema, params))
    return best


def classify_fragment(q, schema: Mapping[str, int]) -> FragmentClass:
    static_arity(q, schema)
    nodes = list(walk(q))
    k = max_id_arity(q, schema)
    if k > 1:
        return FragmentClass("EXT", k)
    if any(isinstance(n, (Const, Param, ForEach, MatchRW, MatchEXT)) for n in nodes):
        return FragmentClass("RW", 1)
    return FragmentClass("RO", 1)


# --- evaluation ------------------------------------------------------------------------


def _conjuncts(c):
    if isinstance(c, rc.And):
        return _conjuncts(c.left) + _conjuncts(c.right)
    return [c]


def _eval_select(ev, q: Select, env) -> Relation:
    # selection over a product runs as a hash join on the cross-side equalities
    if isinstance(q.arg, Product):
        left = ev(q.arg.left, env)
        right = ev(q.arg.right, env)
        a = left.arity
        pairs, rest = [], []
        for c in _conjuncts(q.cond):
            if isinstance(c, rc.ColEq) and (c.i <= a) != (c.j <= a):
                i, j = (c.i, c.j) if c.i <= a else (c.j, c.i)
                pairs.append((i, j - a))
            else:
                rest.append(c)
        joined = rc.equijoin(left, right, pairs)
        for c in rest:
            joined = rc.select(joined, c)
        return joined
    return rc.select(ev(q.arg, env), q.cond)


class _Evaluator:
    """One evaluation run; shared subtrees (same object) are evaluated once per environment."""

    def __init__(self, db: Database):
        self.db = db
        self.memo: dict = {}

    def __call__(self, q, env: tuple) -> Relation:
        key = (id(q), env)
        hit = self.memo.get(key)
        if hit is None:
            hit = self.memo[key] = (q, self._eval(q, env))
        return hit[1]

    def _eval(self, q, env: tuple) -> Relation:
        db = self.db
        if isinstance(q, Rel):
            if q.name not in db:
                raise UnknownRelation(q.name)
            return db[q.name]
        if isinstance(q, Const):
            return rc.make_relation(1, [(q.value,)])
        if isinstance(q, Param):
            return rc.make_relation(1, [(env[-1][q.index - 1],)])
        if isinstance(q, Project):
            return rc.project(self(q.arg, env), q.indices)
        if isinstance(q, Select):
            return _eval_select(self, q, env)
        if isinstance(q, Product):
            return rc.product(self(q.left, env), self(q.right, env))
        if isinstance(q, Union):
            return rc.union(self(q.left, env), self(q.right, env))
        if isinstance(q, Diff):
            return rc.difference(self(q.left, env), self(q.right, env))
        if isinstance(q, MATCHES):
            if isinstance(q, MatchRO):
                for n in q.rels:
                    if n not in db:
                        raise UnknownRelation(n)
                rels = [db[n] for n in q.rels]
            else:
                rels = [self(s, env) for s in q.subs]
            expect = q.arity if isinstance(q, MatchEXT) else 1
            g = pg_view(rels, expect)
            return output_rows(g, q.out.omega, {mu for _, _, mu in eval_pattern(g, q.out.body)})
        if isinstance(q, ForEach):
            params = self(q.params, env)
            rows = set()
            arity = None
            for c in params.sorted_rows():
                part = self(q.body, env + (c,))
                arity = part.arity
                rows.update(r + c for r in part.rows)
            if arity is None:
                arity = static_arity(q.body, db.schema(), tuple(len(e) for e in env) + (params.arity,))
            return rc._trusted(arity + params.arity, rows)
        raise TypeError(f"not a query: {q!r}")


def eval_query(db: Database, q) -> Relation:
    static_arity(q, db.schema())
    return _Evaluator(db)(q, ())


def size(q) -> int:
    return sum(1 for _ in walk(q))
