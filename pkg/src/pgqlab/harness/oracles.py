"""Brute-force reference procedures.

Nothing here imports the pattern evaluator, the query evaluator or the TC code: each
oracle works directly on graphs or relations so that a bug in the engine cannot
hide itself by being reused on both sides of a comparison.
"""
from __future__ import annotations

from typing import Sequence

from ..pgraph import PropertyGraph
from ..relcore import Database, PGQError, Relation, make_relation


class MissingAmount(PGQError):
    pass


class SchemaMismatch(PGQError):
    pass


def brute_reach(g: PropertyGraph) -> Relation:
    """Reflexive-transitive closure of the edge relation, as flattened id pairs."""
    nodes = sorted(g.nodes)
    reach = {(n, n) for n in nodes}
    reach |= {(g.src[e], g.tgt[e]) for e in g.edges}
    while True:
        # square the relation until nothing new appears
        step = {(a, d) for (a, b) in reach for (c, d) in reach if b == c}
        if step <= reach:
            break
        reach |= step
    return make_relation(2 * g.id_arity, (a + b for a, b in reach))


def brute_increasing_paths(g: PropertyGraph, amount_key) -> Relation:
    """Pairs joined by a nonempty path whose edge amounts strictly increase."""
    amount = {}
    for e in g.edges:
        if (e, amount_key) not in g.prop:
            raise MissingAmount(f"edge {e!r} has no {amount_key!r} property")
        amount[e] = g.prop[(e, amount_key)]
    out_edges: dict = {}
    for e in g.edges:
        out_edges.setdefault(g.src[e], []).append(e)
    pairs = set()
    for e0 in g.edges:
        # depth-first search over (node, last amount); amounts only grow so it terminates
        stack = [(g.tgt[e0], amount[e0])]
        seen = set(stack)
        while stack:
            node, last = stack.pop()
            pairs.add((g.src[e0], node))
            for e in out_edges.get(node, ()):
                if amount[e] > last:
                    state = (g.tgt[e], amount[e])
                    if state not in seen:
                        seen.add(state)
                        stack.append(state)
    return make_relation(2 * g.id_arity, (a + b for a, b in pairs))


COLOR_SCHEMA = {"RedNodes": 1, "BlueNodes": 1, "Edges": 1, "Source": 2, "Target": 2}


def brute_alternating(db: Database) -> bool:
    """Is there a walk of at least two edges whose node colours alternate at every step?"""
    for name, arity in COLOR_SCHEMA.items():
        if name not in db or db[name].arity != arity:
            raise SchemaMismatch(f"colour database needs {name}/{arity}")
    red = {r[0] for r in db["RedNodes"]}
    blue = {r[0] for r in db["BlueNodes"]}
    src = {e: n for e, n in db["Source"]}
    tgt = {e: n for e, n in db["Target"]}
    steps = set()
    for (e,) in db["Edges"]:
        a, b = src.get(e), tgt.get(e)
        if (a in red and b in blue) or (a in blue and b in red):
            steps.add((a, b))
    # every longer alternating walk starts with two alternating steps
    return any(b == c for _, b in steps for c, _ in steps)


def violated_conditions(rels: Sequence[Relation]) -> set:
    """Direct check of the four view conditions (0 for shape problems)."""
    if len(rels) != 6:
        return {0}
    r1, r2, r3, r4, r5, r6 = rels
    k = r1.arity
    if k < 1 or [r.arity for r in rels] != [k, k, 2 * k, 2 * k, k + 1, k + 2]:
        return {0}
    nodes = set(r1.rows)
    edges = set(r2.rows)
    bad = set()
    if any(n in edges for n in nodes):
        bad.add(1)
    for rel in (r3, r4):
        for e in edges:
            images = [row[k:] for row in rel.rows if row[:k] == e]
            if len(images) != 1:
                bad.add(2)
        for row in rel.rows:
            if row[:k] not in edges or row[k:] not in nodes:
                bad.add(2)
    for row in r5.rows:
        if row[:k] not in nodes and row[:k] not in edges:
            bad.add(3)
    for row in r6.rows:
        if row[:k] not in nodes and row[:k] not in edges:
            bad.add(4)
        for other in r6.rows:
            if other != row and other[: k + 1] == row[: k + 1]:
                bad.add(4)
    return bad


def transfers_over(db: Database, threshold: int) -> Relation:
    """IBAN pairs joined by a nonempty chain of transfers each above ``threshold``."""
    hops = {(s, t) for _, s, t, _, amount in db["Transfer"] if amount > threshold}
    reach = set(hops)
    while True:
        more = {(a, d) for (a, b) in reach for (c, d) in hops if b == c} - reach
        if not more:
            break
        reach |= more
    return make_relation(2, reach)
