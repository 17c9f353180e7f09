"""Endpoint semantics of patterns, output patterns, and a path-semantics oracle.

Bindings are frozensets of ``(variable, identifier)`` pairs; identifiers are tuples
of values (length = the graph's identifier arity). A match triple is
``(source, target, binding)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .patterns import (
    Alt,
    And,
    BwdEdge,
    Concat,
    Condition,
    Filter,
    FwdEdge,
    HasLabel,
    Node,
    Not,
    Or,
    OutputPattern,
    Pattern,
    PropAccess,
    PropEq,
    Repeat,
    Var,
)
from .pgraph import PropertyGraph
from .relcore import PGQError, Relation, _trusted

EMPTY = frozenset()


class PathBudgetExceeded(PGQError):
    pass


class UnboundVariable(PGQError):
    pass


def compatible(mu1: frozenset, mu2: frozenset) -> bool:
    if not mu1 or not mu2:
        return True
    d1 = dict(mu1)
    return all(d1.get(x, v) == v for x, v in mu2)


def eval_condition(g: PropertyGraph, mu, theta: Condition) -> bool:
    env = mu if isinstance(mu, dict) else dict(mu)
    return _sat(g, env, theta)


def _lookup(env: dict, x: str):
    try:
        return env[x]
    except KeyError:
        raise UnboundVariable(x) from None


def _sat(g: PropertyGraph, env: dict, theta: Condition) -> bool:
    if isinstance(theta, PropEq):
        a = g.prop.get((_lookup(env, theta.x), theta.k))
        b = g.prop.get((_lookup(env, theta.x2), theta.k2))
        return a is not None and b is not None and a == b
    if isinstance(theta, HasLabel):
        return (_lookup(env, theta.x), theta.label) in g.lab
    if isinstance(theta, And):
        return _sat(g, env, theta.left) and _sat(g, env, theta.right)
    if isinstance(theta, Or):
        return _sat(g, env, theta.left) or _sat(g, env, theta.right)
    if isinstance(theta, Not):
        return not _sat(g, env, theta.arg)
    raise TypeError(f"not a condition: {theta!r}")


def _bind(var, ident) -> frozenset:
    return EMPTY if var is None else frozenset([(var, ident)])


def _compose(pairs: set, step: dict) -> set:
    out = set()
    for s, m in pairs:
        for t in step.get(m, ()):
            out.add((s, t))
    return out


def _repeat_pairs(g: PropertyGraph, body_pairs: Iterable, lo: int, hi) -> set:
    step: dict = {}
    for s, t in body_pairs:
        step.setdefault(s, set()).add(t)
    current = {(n, n) for n in g.nodes}
    for _ in range(lo):
        current = _compose(current, step)
    if hi is None:
        # least fixpoint of X = current ∪ X∘step
        result = set(current)
        frontier = set(current)
        while frontier:
            frontier = _compose(frontier, step) - result
            result |= frontier
        return result
    result = set(current)
    seen = {frozenset(current)}
    for _ in range(hi - lo):
        current = _compose(current, step)
        key = frozenset(current)
        if key in seen:
            break  # the power sequence has become periodic
        seen.add(key)
        result |= current
    return result


def eval_pattern(g: PropertyGraph, p: Pattern) -> frozenset:
    """The set of ``(source, target, binding)`` triples matching ``p`` in ``g``."""
    if isinstance(p, Node):
        return frozenset((n, n, _bind(p.var, n)) for n in g.nodes)
    if isinstance(p, FwdEdge):
        return frozenset((g.src[e], g.tgt[e], _bind(p.var, e)) for e in g.edges)
    if isinstance(p, BwdEdge):
        return frozenset((g.tgt[e], g.src[e], _bind(p.var, e)) for e in g.edges)
    if isinstance(p, Alt):
        return eval_pattern(g, p.left) | eval_pattern(g, p.right)
    if isinstance(p, Concat):
        left = eval_pattern(g, p.left)
        by_src: dict = {}
        for s, t, mu in eval_pattern(g, p.right):
            by_src.setdefault(s, []).append((t, mu))
        out = set()
        for s, m, mu1 in left:
            for t, mu2 in by_src.get(m, ()):
                if compatible(mu1, mu2):
                    out.add((s, t, mu1 | mu2))
        return frozenset(out)
    if isinstance(p, Filter):
        return frozenset(
            (s, t, mu) for s, t, mu in eval_pattern(g, p.body) if _sat(g, dict(mu), p.cond)
        )
    if isinstance(p, Repeat):
        body = {(s, t) for s, t, _ in eval_pattern(g, p.body)}
        return frozenset((s, t, EMPTY) for s, t in _repeat_pairs(g, body, p.lo, p.hi))
    raise TypeError(f"not a pattern: {p!r}")


def output_arity(omega, k: int) -> int:
    return sum(k if isinstance(item, Var) else 1 for item in omega)


def output_rows(g: PropertyGraph, omega, bindings: Iterable) -> Relation:
    """Rows of ``omega`` for each binding; a row with an undefined property is dropped."""
    rows = set()
    for mu in bindings:
        env = dict(mu)
        row: tuple = ()
        for item in omega:
            ident = env[item.name]
            if isinstance(item, Var):
                row += ident
            else:
                v = g.prop.get((ident, item.key))
                if v is None:
                    break
                row += (v,)
        else:
            rows.add(row)
    return _trusted(output_arity(omega, g.id_arity), rows)


def eval_output(g: PropertyGraph, op: OutputPattern) -> Relation:
    return output_rows(g, op.omega, {mu for _, _, mu in eval_pattern(g, op.body)})


# --- path semantics (oracle) ----------------------------------------------------------


def _path_cond(g: PropertyGraph, env: dict, theta) -> bool:
    # deliberately separate from _sat: the oracle must not share code with the evaluator
    if isinstance(theta, PropEq):
        if theta.x not in env or theta.x2 not in env:
            raise UnboundVariable(f"{theta.x} / {theta.x2}")
        k1, k2 = (env[theta.x], theta.k), (env[theta.x2], theta.k2)
        return k1 in g.prop and k2 in g.prop and g.prop[k1] == g.prop[k2]
    if isinstance(theta, HasLabel):
        if theta.x not in env:
            raise UnboundVariable(theta.x)
        return theta.label in {l for i, l in g.lab if i == env[theta.x]}
    if isinstance(theta, Not):
        return not _path_cond(g, env, theta.arg)
    if isinstance(theta, And):
        return _path_cond(g, env, theta.left) and _path_cond(g, env, theta.right)
    return _path_cond(g, env, theta.left) or _path_cond(g, env, theta.right)


def _join_paths(p1: tuple, p2: tuple) -> tuple:
    return p1 + p2[1:]


def _mu_agrees(m1: dict, m2: dict) -> bool:
    return all(m1[x] == v for x, v in m2.items() if x in m1)


def eval_pattern_paths(g: PropertyGraph, p: Pattern, rep_bound: int, budget: Optional[int] = None) -> frozenset:
    """Path semantics: a set of ``(path, binding)`` pairs.

    A path is ``(n0, e1, n1, ..., ek, nk)`` in traversal order. Unbounded repetitions
    are cut at ``rep_bound`` iterations, and beyond the lower bound only chains whose
    iteration endpoints are pairwise distinct are enumerated. Both restrictions keep
    the set finite without changing the set of endpoint triples once
    ``rep_bound >= lo + |N|``.

    Path sets can be exponential in the pattern (nested bounded repetitions over
    parallel edges); with ``budget`` set, PathBudgetExceeded is raised once more than
    that many paths have been built in total.
    """
    return _paths(g, p, rep_bound, _Budget(budget))


@dataclass
class _Budget:
    limit: Optional[int]
    used: int = 0

    def charge(self, n: int) -> None:
        self.used += n
        if self.limit is not None and self.used > self.limit:
            raise PathBudgetExceeded(f"more than {self.limit} paths")


def _paths(g: PropertyGraph, p: Pattern, rep_bound: int, budget: _Budget) -> frozenset:
    if isinstance(p, Node):
        return frozenset(((n,), _bind(p.var, n)) for n in g.nodes)
    if isinstance(p, FwdEdge):
        return frozenset(((g.src[e], e, g.tgt[e]), _bind(p.var, e)) for e in g.edges)
    if isinstance(p, BwdEdge):
        return frozenset(((g.tgt[e], e, g.src[e]), _bind(p.var, e)) for e in g.edges)
    if isinstance(p, Alt):
        return _paths(g, p.left, rep_bound, budget) | _paths(g, p.right, rep_bound, budget)
    if isinstance(p, Concat):
        out = set()
        rights = list(_paths(g, p.right, rep_bound, budget))
        for p1, mu1 in _paths(g, p.left, rep_bound, budget):
            d1 = dict(mu1)
            for p2, mu2 in rights:
                if p1[-1] == p2[0] and _mu_agrees(d1, dict(mu2)):
                    out.add((_join_paths(p1, p2), mu1 | mu2))
                    budget.charge(1)
        return frozenset(out)
    if isinstance(p, Filter):
        return frozenset(
            (path, mu)
            for path, mu in _paths(g, p.body, rep_bound, budget)
            if _path_cond(g, dict(mu), p.cond)
        )
    if isinstance(p, Repeat):
        return frozenset((path, EMPTY) for path in _repeat_paths(g, p, rep_bound, budget))
    raise TypeError(f"not a pattern: {p!r}")


def _repeat_paths(g: PropertyGraph, p: Repeat, rep_bound: int, budget: _Budget) -> set:
    body = {path for path, _ in _paths(g, p.body, rep_bound, budget)}
    starting: dict = {}
    for path in body:
        starting.setdefault(path[0], []).append(path)
    level = {(n,) for n in g.nodes}  # zero iterations
    for _ in range(p.lo):
        level = {_join_paths(a, b) for a in level for b in starting.get(a[-1], ())}
        budget.charge(len(level))
    out = set(level)
    if p.hi is not None:
        for _ in range(p.hi - p.lo):
            level = {_join_paths(a, b) for a in level for b in starting.get(a[-1], ())}
            budget.charge(len(level))
            out |= level
        return out
    # unbounded: extend with chains whose iteration endpoints never repeat
    frontier = [(path, frozenset([path[-1]])) for path in level]
    for _ in range(rep_bound):
        nxt = []
        for path, visited in frontier:
            for b in starting.get(path[-1], ()):
                if b[-1] in visited:
                    continue
                joined = _join_paths(path, b)
                out.add(joined)
                budget.charge(1)
                nxt.append((joined, visited | {b[-1]}))
        if not nxt:
            break
        frontier = nxt
    return out


def project_endpoints(matches: Iterable) -> frozenset:
    return frozenset((path[0], path[-1], mu) for path, mu in matches)
