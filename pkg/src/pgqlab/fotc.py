"""First-order logic with reflexive, parameterized transitive closure.

Two evaluators are provided and are kept independent of each other:

* ``eval_formula`` decides one assignment top-down (quantifiers enumerate the domain,
  TC runs a breadth-first search over tuples).
* ``eval_formula_rel`` computes the whole result relation bottom-up over named
  columns (joins for conjunction, anti-joins for negated conjuncts, closure per
  parameter group for TC).

The domain is the active domain of the database together with the constants that
occur in the formula, so ``x = 5`` is satisfiable even when 5 is not stored anywhere.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .relcore import Database, PGQError, UnknownRelation, Relation, Value, _trusted, active_domain, row_key


class UnboundVariable(PGQError):
    pass


class VarOrderMismatch(PGQError):
    pass


class MalformedFormula(PGQError):
    pass


@dataclass(frozen=True)
class Atom:
    rel: str
    args: tuple


@dataclass(frozen=True)
class Eq:
    x: str
    y: str


@dataclass(frozen=True)
class EqConst:
    x: str
    value: Value


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class TC:
    u: tuple
    v: tuple
    body: "Formula"
    x: tuple
    y: tuple

    def __post_init__(self):
        n = len(self.u)
        if n == 0 or not len(self.v) == len(self.x) == len(self.y) == n:
            raise MalformedFormula(f"TC tuple lengths {len(self.u)}, {len(self.v)}, {len(self.x)}, {len(self.y)}")
        if len(set(self.u) | set(self.v)) != 2 * n:
            raise MalformedFormula(f"TC variables {self.u}, {self.v} must be pairwise distinct")


Formula = "Atom | Eq | EqConst | Not | And | Or | Exists | Forall | TC"


def conj(*fs):
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disj(*fs):
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def exists(vs: Sequence[str], f):
    for v in reversed(list(vs)):
        f = Exists(v, f)
    return f


def eqs(xs: Sequence[str], ys: Sequence[str]):
    """Conjunction of pairwise equalities, or ``None`` when both are empty."""
    parts = [Eq(a, b) for a, b in zip(xs, ys)]
    return conj(*parts) if parts else None


# --- syntactic helpers -----------------------------------------------------------------


def free_vars(f) -> frozenset:
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, Eq):
        return frozenset([f.x, f.y])
    if isinstance(f, EqConst):
        return frozenset([f.x])
    if isinstance(f, Not):
        return free_vars(f.arg)
    if isinstance(f, (And, Or)):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - {f.var}
    if isinstance(f, TC):
        return (free_vars(f.body) - set(f.u) - set(f.v)) | set(f.x) | set(f.y)
    raise TypeError(f"not a formula: {f!r}")


def first_occurrence(f) -> list:
    """Free variables in order of first occurrence (left to right)."""
    seen: list = []

    def visit(g, bound):
        if isinstance(g, Atom):
            names = g.args
        elif isinstance(g, Eq):
            names = (g.x, g.y)
        elif isinstance(g, EqConst):
            names = (g.x,)
        elif isinstance(g, Not):
            return visit(g.arg, bound)
        elif isinstance(g, (And, Or)):
            visit(g.left, bound)
            return visit(g.right, bound)
        elif isinstance(g, (Exists, Forall)):
            return visit(g.body, bound | {g.var})
        elif isinstance(g, TC):
            visit(g.body, bound | set(g.u) | set(g.v))
            names = g.x + g.y
        else:
            raise TypeError(f"not a formula: {g!r}")
        for n in names:
            if n not in bound and n not in seen:
                seen.append(n)

    visit(f, frozenset())
    return seen


def all_vars(f) -> frozenset:
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, Eq):
        return frozenset([f.x, f.y])
    if isinstance(f, EqConst):
        return frozenset([f.x])
    if isinstance(f, Not):
        return all_vars(f.arg)
    if isinstance(f, (And, Or)):
        return all_vars(f.left) | all_vars(f.right)
    if isinstance(f, (Exists, Forall)):
        return all_vars(f.body) | {f.var}
    return all_vars(f.body) | set(f.u + f.v + f.x + f.y)


def constants(f) -> frozenset:
    if isinstance(f, EqConst):
        return frozenset([f.value])
    if isinstance(f, (Atom, Eq)):
        return frozenset()
    if isinstance(f, Not):
        return constants(f.arg)
    if isinstance(f, (And, Or)):
        return constants(f.left) | constants(f.right)
    return constants(f.body)


def relations(f) -> frozenset:
    if isinstance(f, Atom):
        return frozenset([f.rel])
    if isinstance(f, (Eq, EqConst)):
        return frozenset()
    if isinstance(f, Not):
        return relations(f.arg)
    if isinstance(f, (And, Or)):
        return relations(f.left) | relations(f.right)
    return relations(f.body)


def tc_arity(f) -> int:
    if isinstance(f, (Atom, Eq, EqConst)):
        return 0
    if isinstance(f, Not):
        return tc_arity(f.arg)
    if isinstance(f, (And, Or)):
        return max(tc_arity(f.left), tc_arity(f.right))
    if isinstance(f, (Exists, Forall)):
        return tc_arity(f.body)
    return max(len(f.u), tc_arity(f.body))


def size(f) -> int:
    if isinstance(f, (Atom, Eq, EqConst)):
        return 1
    if isinstance(f, Not):
        return 1 + size(f.arg)
    if isinstance(f, (And, Or)):
        return 1 + size(f.left) + size(f.right)
    return 1 + size(f.body)


def rename_free(f, mapping: Mapping[str, str], avoid=frozenset()):
    """Substitute free variables by ``mapping``, renaming bound variables to avoid capture."""
    taken = set(avoid) | set(mapping.values()) | all_vars(f)
    counter = itertools.count()

    def fresh(base):
        while True:
            name = f"{base}_{next(counter)}"
            if name not in taken:
                taken.add(name)
                return name

    def go(g, m):
        if isinstance(g, Atom):
            return Atom(g.rel, tuple(m.get(a, a) for a in g.args))
        if isinstance(g, Eq):
            return Eq(m.get(g.x, g.x), m.get(g.y, g.y))
        if isinstance(g, EqConst):
            return EqConst(m.get(g.x, g.x), g.value)
        if isinstance(g, Not):
            return Not(go(g.arg, m))
        if isinstance(g, (And, Or)):
            return type(g)(go(g.left, m), go(g.right, m))
        targets = set(m.values())
        if isinstance(g, (Exists, Forall)):
            inner = {k: v for k, v in m.items() if k != g.var}
            var = g.var
            if var in targets:
                var = fresh(g.var)
                inner[g.var] = var
            return type(g)(var, go(g.body, inner))
        inner = {k: v for k, v in m.items() if k not in g.u and k not in g.v}
        u, v = list(g.u), list(g.v)
        for seq in (u, v):
            for i, name in enumerate(seq):
                if name in targets:
                    seq[i] = fresh(name)
                    inner[name] = seq[i]
        return TC(
            tuple(u),
            tuple(v),
            go(g.body, inner),
            tuple(m.get(a, a) for a in g.x),
            tuple(m.get(a, a) for a in g.y),
        )

    return go(f, dict(mapping))


def domain(db: Database, f) -> frozenset:
    return active_domain(db) | constants(f)


def sorted_domain(dom) -> list:
    return sorted(dom, key=lambda v: row_key((v,)))


# --- pointwise evaluation --------------------------------------------------------------


def eval_formula(db: Database, f, assignment: Mapping[str, Value]) -> bool:
    missing = free_vars(f) - set(assignment)
    if missing:
        raise UnboundVariable(", ".join(sorted(missing)))
    dom = sorted_domain(domain(db, f))
    return _Pointwise(db, dom).holds(f, dict(assignment))


class _Pointwise:
    def __init__(self, db: Database, dom: list):
        self.db = db
        self.dom = dom
        self.memo: dict = {}  # per-evaluation TC reachability cache

    def holds(self, f, a: dict) -> bool:
        if isinstance(f, Atom):
            if f.rel not in self.db:
                raise UnknownRelation(f.rel)
            rel = self.db[f.rel]
            if rel.arity != len(f.args):
                raise MalformedFormula(f"{f.rel} has arity {rel.arity}, used with {len(f.args)}")
            return tuple(a[x] for x in f.args) in rel.rows
        if isinstance(f, Eq):
            return a[f.x] == a[f.y]
        if isinstance(f, EqConst):
            return a[f.x] == f.value
        if isinstance(f, Not):
            return not self.holds(f.arg, a)
        if isinstance(f, And):
            return self.holds(f.left, a) and self.holds(f.right, a)
        if isinstance(f, Or):
            return self.holds(f.left, a) or self.holds(f.right, a)
        if isinstance(f, Exists):
            return any(self.holds(f.body, {**a, f.var: d}) for d in self.dom)
        if isinstance(f, Forall):
            return all(self.holds(f.body, {**a, f.var: d}) for d in self.dom)
        if isinstance(f, TC):
            return self._tc(f, a)
        raise TypeError(f"not a formula: {f!r}")

    def _tc(self, f: TC, a: dict) -> bool:
        src = tuple(a[x] for x in f.x)
        dst = tuple(a[y] for y in f.y)
        if src == dst:
            return True  # zero steps
        params = sorted(free_vars(f.body) - set(f.u) - set(f.v))
        key = (id(f), src, tuple(a[p] for p in params))
        reached = self.memo.get(key)
        if reached is None:
            base = {p: a[p] for p in params}
            reached = {src}
            stack = [src]
            n = len(f.u)
            while stack:
                cur = stack.pop()
                env = dict(base)
                env.update(zip(f.u, cur))
                for nxt in itertools.product(self.dom, repeat=n):
                    if nxt in reached:
                        continue
                    env.update(zip(f.v, nxt))
                    if self.holds(f.body, env):
                        reached.add(nxt)
                        stack.append(nxt)
            self.memo[key] = reached
        return dst in reached


# --- bottom-up evaluation --------------------------------------------------------------


@dataclass(frozen=True)
class _Table:
    cols: tuple  # distinct variable names
    rows: frozenset

    def reorder(self, cols: Sequence[str]) -> "_Table":
        idx = [self.cols.index(c) for c in cols]
        return _Table(tuple(cols), frozenset(tuple(r[i] for i in idx) for r in self.rows))


def _join(a: _Table, b: _Table) -> _Table:
    shared = [c for c in a.cols if c in b.cols]
    extra = [c for c in b.cols if c not in a.cols]
    bi = [b.cols.index(c) for c in shared]
    bx = [b.cols.index(c) for c in extra]
    ai = [a.cols.index(c) for c in shared]
    index: dict = {}
    for r in b.rows:
        index.setdefault(tuple(r[i] for i in bi), []).append(tuple(r[i] for i in bx))
    out = set()
    for r in a.rows:
        for tail in index.get(tuple(r[i] for i in ai), ()):
            out.add(r + tail)
    return _Table(a.cols + tuple(extra), frozenset(out))


def _antijoin(a: _Table, b: _Table) -> _Table:
    # rows of a with no matching row in b; b's columns must be a subset of a's
    ai = [a.cols.index(c) for c in b.cols]
    return _Table(a.cols, frozenset(r for r in a.rows if tuple(r[i] for i in ai) not in b.rows))


def _extend(t: _Table, cols: Sequence[str], dom: list) -> _Table:
    """Cylindrify ``t`` so that it also ranges freely over ``cols``."""
    new = [c for c in cols if c not in t.cols]
    if not new:
        return t
    fill = list(itertools.product(dom, repeat=len(new)))
    return _Table(t.cols + tuple(new), frozenset(r + f for r in t.rows for f in fill))


def _flatten_and(f, out: list) -> list:
    if isinstance(f, And):
        _flatten_and(f.left, out)
        _flatten_and(f.right, out)
    else:
        out.append(f)
    return out


class _BottomUp:
    def __init__(self, db: Database, dom: list):
        self.db = db
        self.dom = dom

    def full(self, cols) -> _Table:
        return _extend(_Table((), frozenset([()])), cols, self.dom)

    def table(self, f) -> _Table:
        if isinstance(f, Atom):
            if f.rel not in self.db:
                raise UnknownRelation(f.rel)
            rel = self.db[f.rel]
            if rel.arity != len(f.args):
                raise MalformedFormula(f"{f.rel} has arity {rel.arity}, used with {len(f.args)}")
            cols: list = []
            for x in f.args:
                if x not in cols:
                    cols.append(x)
            first = [f.args.index(c) for c in cols]
            rows = set()
            for r in rel.rows:
                if all(r[i] == r[f.args.index(x)] for i, x in enumerate(f.args)):
                    rows.add(tuple(r[i] for i in first))
            return _Table(tuple(cols), frozenset(rows))
        if isinstance(f, Eq):
            if f.x == f.y:
                return self.full([f.x])
            return _Table((f.x, f.y), frozenset((d, d) for d in self.dom))
        if isinstance(f, EqConst):
            return _Table((f.x,), frozenset([(f.value,)]))
        if isinstance(f, Not):
            cols = sorted(free_vars(f.arg))
            return _antijoin(self.full(cols), self.table(f.arg).reorder(cols))
        if isinstance(f, And):
            return self._conjunction(_flatten_and(f, []))
        if isinstance(f, Or):
            cols = first_occurrence(f)
            left = _extend(self.table(f.left), cols, self.dom).reorder(cols)
            right = _extend(self.table(f.right), cols, self.dom).reorder(cols)
            return _Table(tuple(cols), left.rows | right.rows)
        if isinstance(f, Exists):
            t = self.table(f.body)
            if f.var not in t.cols:
                return t if self.dom else _Table(t.cols, frozenset())
            keep = [c for c in t.cols if c != f.var]
            return t.reorder(keep)
        if isinstance(f, Forall):
            return self.table(Not(Exists(f.var, Not(f.body))))
        if isinstance(f, TC):
            return self._tc(f)
        raise TypeError(f"not a formula: {f!r}")

    def _conjunction(self, parts: list) -> _Table:
        positive = [p for p in parts if not isinstance(p, Not)]
        negative = [p.arg for p in parts if isinstance(p, Not)]
        acc = _Table((), frozenset([()]))
        for p in positive:
            acc = _join(acc, self.table(p))
        for n in negative:
            nt = self.table(n)
            acc = _extend(acc, nt.cols, self.dom)
            acc = _antijoin(acc, nt)
        return acc

    def _tc(self, f: TC) -> _Table:
        n = len(f.u)
        body_vars = list(f.u) + list(f.v)
        params = [c for c in first_occurrence(f.body) if c not in body_vars]
        bt = _extend(self.table(f.body), body_vars + params, self.dom).reorder(body_vars + params)
        groups: dict = {}
        for r in bt.rows:
            groups.setdefault(r[2 * n :], set()).add((r[:n], r[n : 2 * n]))
        diag = [t for t in itertools.product(self.dom, repeat=n)]
        rows = set()
        for c in itertools.product(self.dom, repeat=len(params)):
            for s, t in _closure(groups.get(c, ()), diag):
                rows.add(s + t + c)
        # rows are over (x, y, params); x/y may repeat variables or mention params
        out_cols: list = []
        out_rows = set()
        names = list(f.x) + list(f.y)
        for c in names + params:
            if c not in out_cols:
                out_cols.append(c)
        for r in rows:
            env: dict = {}
            ok = True
            for name, val in zip(names + params, r):
                if env.setdefault(name, val) != val:
                    ok = False
                    break
            if ok:
                out_rows.add(tuple(env[c] for c in out_cols))
        return _Table(tuple(out_cols), frozenset(out_rows))


def _closure(pairs, diag) -> set:
    succ: dict = {}
    for s, t in pairs:
        succ.setdefault(s, set()).add(t)
    result = {(d, d) for d in diag}
    for s in list(succ):
        seen = {s}
        stack = [s]
        while stack:
            cur = stack.pop()
            for t in succ.get(cur, ()):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        result.update((s, t) for t in seen)
    return result


def eval_formula_rel(db: Database, f, var_order: Sequence[str]) -> Relation:
    order = tuple(var_order)
    if len(set(order)) != len(order) or set(order) != free_vars(f):
        raise VarOrderMismatch(f"{order} is not a permutation of {sorted(free_vars(f))}")
    dom = sorted_domain(domain(db, f))
    t = _BottomUp(db, dom).table(f)
    t = _extend(t, order, dom)  # only matters for degenerate cases like Exists over empty dom
    return _trusted(len(order), t.reorder(order).rows)


def eval_formula_rel_naive(db: Database, f, var_order: Sequence[str]) -> Relation:
    """Result relation by enumerating every assignment and asking ``eval_formula``."""
    order = tuple(var_order)
    if len(set(order)) != len(order) or set(order) != free_vars(f):
        raise VarOrderMismatch(f"{order} is not a permutation of {sorted(free_vars(f))}")
    dom = sorted_domain(domain(db, f))
    ev = _Pointwise(db, dom)
    rows = set()
    for vals in itertools.product(dom, repeat=len(order)):
        if ev.holds(f, dict(zip(order, vals))):
            rows.add(vals)
    return _trusted(len(order), rows)
