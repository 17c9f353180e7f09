"""Property graphs with k-ary identifiers and the six-relation view constructor.

A view is a bundle ``(R1, ..., R6)`` of node ids, edge ids, source, target, labels
and properties. ``validate_view`` checks the four well-formedness conditions and
reports witnesses; ``pg_view`` turns a valid bundle into a :class:`PropertyGraph`.
The identifier arity is inferred from ``R1``/``R2``, so one constructor covers the
unary, fixed-arity and any-arity variants.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .relcore import PGQError, Relation, Value, make_relation, row_key

# condition 0 is used for arity/shape problems that precede conditions 1-4
SHAPE = 0


class InvalidView(PGQError):
    def __init__(self, report: "ViewReport"):
        self.report = report
        super().__init__(report.describe())


class UnknownId(PGQError):
    pass


@dataclass(frozen=True)
class ViewReport:
    arity: Optional[int]
    violations: tuple = ()

    @property
    def valid(self) -> bool:
        return not self.violations

    def conditions(self) -> set:
        return {c for c, _ in self.violations}

    def describe(self) -> str:
        if self.valid:
            return f"valid view (identifier arity {self.arity})"
        parts = [f"condition {c}: {list(rows)[:3]}" for c, rows in self.violations]
        return "invalid view; " + "; ".join(parts)

    def to_json(self) -> dict:
        return {
            "valid": self.valid,
            "arity": self.arity,
            "violations": [
                {"condition": c, "witnesses": [list(r) for r in rows]} for c, rows in self.violations
            ],
        }


def _function_violations(rel: Relation, k: int, dom: frozenset, cod: frozenset) -> list:
    """Rows witnessing that ``rel`` does not encode a total function ``dom -> cod``."""
    bad = set()
    images: dict = {}
    for row in rel.rows:
        x, y = row[:k], row[k:]
        if x not in dom or y not in cod:
            bad.add(row)
            continue
        images.setdefault(x, []).append(row)
    for x, rows in images.items():
        if len(rows) > 1:
            bad.update(rows)
    for x in dom:
        if x not in images:
            # a missing image has no row to show; use the dangling id itself
            bad.add(x)
    return sorted(bad, key=row_key)


def validate_view(rels: Sequence[Relation], expect_arity: Optional[int] = None) -> ViewReport:
    if len(rels) != 6:
        return ViewReport(None, ((SHAPE, (("expected six relations", len(rels)),)),))
    r1, r2, r3, r4, r5, r6 = rels
    k = r1.arity
    shape = []
    if k < 1:
        shape.append(("R1 arity", r1.arity))
    want = {"R2": (r2, k), "R3": (r3, 2 * k), "R4": (r4, 2 * k), "R5": (r5, k + 1), "R6": (r6, k + 2)}
    for name, (rel, a) in want.items():
        if rel.arity != a:
            shape.append((f"{name} arity", rel.arity))
    if expect_arity is not None and k != expect_arity:
        shape.append(("expected arity", expect_arity))
    if shape:
        return ViewReport(k if k >= 1 else None, ((SHAPE, tuple(shape)),))

    nodes, edges = r1.rows, r2.rows
    ids = nodes | edges
    violations = []
    both = sorted(nodes & edges, key=row_key)
    if both:
        violations.append((1, tuple(both)))
    bad = _function_violations(r3, k, edges, nodes) + _function_violations(r4, k, edges, nodes)
    if bad:
        violations.append((2, tuple(sorted(set(bad), key=row_key))))
    bad = sorted((row for row in r5.rows if row[:k] not in ids), key=row_key)
    if bad:
        violations.append((3, tuple(bad)))
    bad = set()
    seen: dict = {}
    for row in r6.rows:
        if row[:k] not in ids:
            bad.add(row)
        seen.setdefault(row[: k + 1], []).append(row)
    for rows in seen.values():
        if len(rows) > 1:
            bad.update(rows)
    if bad:
        violations.append((4, tuple(sorted(bad, key=row_key))))
    return ViewReport(k, tuple(violations))


@dataclass(frozen=True)
class PropertyGraph:
    id_arity: int
    nodes: frozenset
    edges: frozenset
    src: Mapping[tuple, tuple]
    tgt: Mapping[tuple, tuple]
    lab: frozenset  # of (ident, label)
    prop: Mapping[tuple, Value]  # (ident, key) -> value
    _labels: Mapping = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        labels: dict = {}
        for ident, l in self.lab:
            labels.setdefault(ident, set()).add(l)
        object.__setattr__(self, "_labels", {i: frozenset(s) for i, s in labels.items()})

    def _check(self, ident):
        if ident not in self.nodes and ident not in self.edges:
            raise UnknownId(f"{ident!r} is neither a node nor an edge")

    def labels_of(self, ident) -> frozenset:
        self._check(ident)
        return self._labels.get(ident, frozenset())

    def prop_of(self, ident, key: Value) -> Optional[Value]:
        self._check(ident)
        return self.prop.get((ident, key))


def pg_view(rels: Sequence[Relation], expect_arity: Optional[int] = None) -> PropertyGraph:
    report = validate_view(rels, expect_arity)
    if not report.valid:
        raise InvalidView(report)
    k = report.arity
    r1, r2, r3, r4, r5, r6 = rels
    return PropertyGraph(
        id_arity=k,
        nodes=frozenset(r1.rows),
        edges=frozenset(r2.rows),
        src={row[:k]: row[k:] for row in r3.rows},
        tgt={row[:k]: row[k:] for row in r4.rows},
        lab=frozenset((row[:k], row[k]) for row in r5.rows),
        prop={(row[:k], row[k]): row[k + 1] for row in r6.rows},
    )


def labels_of(g: PropertyGraph, ident) -> frozenset:
    return g.labels_of(ident)


def prop_of(g: PropertyGraph, ident, key: Value) -> Optional[Value]:
    return g.prop_of(ident, key)


def to_relations(g: PropertyGraph) -> tuple:
    """Inverse of :func:`pg_view`."""
    k = g.id_arity
    return (
        make_relation(k, g.nodes),
        make_relation(k, g.edges),
        make_relation(2 * k, (e + n for e, n in g.src.items())),
        make_relation(2 * k, (e + n for e, n in g.tgt.items())),
        make_relation(k + 1, (i + (l,) for i, l in g.lab)),
        make_relation(k + 2, (i + (key, v) for (i, key), v in g.prop.items())),
    )


def make_graph(nodes, edges, labels=(), props=(), arity: int = 1) -> PropertyGraph:
    """Convenience builder for tests and oracles.

    ``nodes`` are ids; ``edges`` are ``(id, src, tgt)``; ``labels`` are ``(id, label)``;
    ``props`` are ``(id, key, value)``. Scalar ids are wrapped into 1-tuples when
    ``arity == 1``.
    """

    def wrap(x):
        return x if isinstance(x, tuple) else (x,)

    rels = (
        make_relation(arity, (wrap(n) for n in nodes)),
        make_relation(arity, (wrap(e) for e, _, _ in edges)),
        make_relation(2 * arity, (wrap(e) + wrap(s) for e, s, _ in edges)),
        make_relation(2 * arity, (wrap(e) + wrap(t) for e, _, t in edges)),
        make_relation(arity + 1, (wrap(i) + (l,) for i, l in labels)),
        make_relation(arity + 2, (wrap(i) + (key, v) for i, key, v in props)),
    )
    return pg_view(rels)
