"""Ordered values, set-semantics relations, databases and the relational-algebra primitives.

Values are plain Python ``int`` and ``str``. All integers sort before all strings;
integers compare numerically and strings by code point. ``bool`` is rejected because it
is an ``int`` subclass and would silently alias ``0``/``1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence, Union

Value = Union[int, str]
Row = tuple


class PGQError(Exception):
    """Base class for every error raised by the engine."""


class ArityMismatch(PGQError):
    pass


class UnknownRelation(PGQError):
    pass


class IndexOutOfRange(PGQError):
    pass


class BadValue(PGQError):
    pass


LT, EQ, GT = -1, 0, 1


def check_value(v) -> Value:
    if isinstance(v, bool) or not isinstance(v, (int, str)):
        raise BadValue(f"unsupported value {v!r}: only int and str are allowed")
    return v


def value_key(v: Value):
    return (0, v) if isinstance(v, int) else (1, v)


def row_key(row: Row):
    return tuple(value_key(v) for v in row)


def value_compare(a: Value, b: Value) -> int:
    ka, kb = value_key(a), value_key(b)
    return LT if ka < kb else (GT if ka > kb else EQ)


@dataclass(frozen=True)
class Relation:
    arity: int
    rows: frozenset

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __contains__(self, row):
        return row in self.rows

    def sorted_rows(self) -> list:
        return sorted(self.rows, key=row_key)

    def is_empty(self) -> bool:
        return not self.rows


def make_relation(arity: int, rows: Iterable[Sequence[Value]] = ()) -> Relation:
    """Build a relation, dropping duplicate rows.

    Raises ``ArityMismatch`` if a row has the wrong length.
    """
    if arity < 0:
        raise ArityMismatch(f"negative arity {arity}")
    out = set()
    for i, row in enumerate(rows):
        row = tuple(row)
        if len(row) != arity:
            raise ArityMismatch(f"row {i} has length {len(row)}, expected {arity}")
        for v in row:
            check_value(v)
        out.add(row)
    return Relation(arity, frozenset(out))


def _trusted(arity: int, rows) -> Relation:
    # internal constructor: rows already validated
    return Relation(arity, frozenset(rows))


TRUE = _trusted(0, [()])
FALSE = _trusted(0, [])


def empty(arity: int) -> Relation:
    return _trusted(arity, ())


@dataclass(frozen=True)
class Database:
    relations: Mapping[str, Relation]

    def __getitem__(self, name: str) -> Relation:
        return self.relations[name]

    def __contains__(self, name: str) -> bool:
        return name in self.relations

    def schema(self) -> dict:
        return {name: rel.arity for name, rel in self.relations.items()}


def make_database(relations: Mapping[str, Relation]) -> Database:
    return Database(dict(sorted(relations.items())))


def active_domain(db: Database) -> frozenset:
    return frozenset(v for rel in db.relations.values() for row in rel.rows for v in row)


# --- selection conditions over column positions (1-based) ---------------------------


@dataclass(frozen=True)
class ColEq:
    i: int
    j: int


@dataclass(frozen=True)
class And:
    left: "SelCond"
    right: "SelCond"


@dataclass(frozen=True)
class Or:
    left: "SelCond"
    right: "SelCond"


@dataclass(frozen=True)
class Not:
    arg: "SelCond"


SelCond = Union[ColEq, And, Or, Not]


def cond_indices(c: SelCond) -> set:
    if isinstance(c, ColEq):
        return {c.i, c.j}
    if isinstance(c, Not):
        return cond_indices(c.arg)
    return cond_indices(c.left) | cond_indices(c.right)


def holds(c: SelCond, row: Row) -> bool:
    if isinstance(c, ColEq):
        return row[c.i - 1] == row[c.j - 1]
    if isinstance(c, And):
        return holds(c.left, row) and holds(c.right, row)
    if isinstance(c, Or):
        return holds(c.left, row) or holds(c.right, row)
    return not holds(c.arg, row)


# --- the five primitives -----------------------------------------------------------


@dataclass(frozen=True)
class Project:
    indices: tuple


@dataclass(frozen=True)
class Select:
    cond: SelCond


class Product:
    pass


class Union_:
    pass


class Difference:
    pass


RAOp = Union[Project, Select, Product, Union_, Difference]


def project(rel: Relation, indices: Sequence[int]) -> Relation:
    for i in indices:
        if not 1 <= i <= rel.arity:
            raise IndexOutOfRange(f"column ${i} outside arity {rel.arity}")
    idx = [i - 1 for i in indices]
    return _trusted(len(idx), {tuple(row[i] for i in idx) for row in rel.rows})


def select(rel: Relation, cond: SelCond) -> Relation:
    for i in cond_indices(cond):
        if not 1 <= i <= rel.arity:
            raise IndexOutOfRange(f"column ${i} outside arity {rel.arity}")
    return _trusted(rel.arity, {row for row in rel.rows if holds(cond, row)})


def product(a: Relation, b: Relation) -> Relation:
    return _trusted(a.arity + b.arity, {ra + rb for ra in a.rows for rb in b.rows})


def union(a: Relation, b: Relation) -> Relation:
    if a.arity != b.arity:
        raise ArityMismatch(f"union of arities {a.arity} and {b.arity}")
    return _trusted(a.arity, a.rows | b.rows)


def difference(a: Relation, b: Relation) -> Relation:
    if a.arity != b.arity:
        raise ArityMismatch(f"difference of arities {a.arity} and {b.arity}")
    return _trusted(a.arity, a.rows - b.rows)


def ra_apply(op: RAOp, args: Sequence[Relation]) -> Relation:
    if isinstance(op, Project):
        (r,) = args
        return project(r, op.indices)
    if isinstance(op, Select):
        (r,) = args
        return select(r, op.cond)
    if isinstance(op, Product):
        a, b = args
        return product(a, b)
    if isinstance(op, Union_):
        a, b = args
        return union(a, b)
    if isinstance(op, Difference):
        a, b = args
        return difference(a, b)
    raise TypeError(f"unknown operator {op!r}")


def equijoin(a: Relation, b: Relation, pairs: Sequence[tuple]) -> Relation:
    """Hash join: rows ``ra + rb`` where ``ra[i-1] == rb[j-1]`` for every ``(i, j)``.

    ``j`` is relative to ``b``. Same result as selecting on the product.
    """
    if not pairs:
        return product(a, b)
    li = [i - 1 for i, _ in pairs]
    rj = [j - 1 for _, j in pairs]
    index: dict = {}
    for rb in b.rows:
        index.setdefault(tuple(rb[j] for j in rj), []).append(rb)
    out = set()
    for ra in a.rows:
        for rb in index.get(tuple(ra[i] for i in li), ()):
            out.add(ra + rb)
    return _trusted(a.arity + b.arity, out)
