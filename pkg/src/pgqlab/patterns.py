"""Pattern, condition and output-pattern ASTs with free-variable schemas.

An atom whose variable is ``None`` is anonymous. Anonymous atoms bind nothing, which
is observationally the same as binding a fresh hidden variable that no schema, filter
or output can mention.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .relcore import Value

INF = None  # upper bound of an unbounded repetition


@dataclass(frozen=True)
class Node:
    var: Optional[str] = None


@dataclass(frozen=True)
class FwdEdge:
    var: Optional[str] = None


@dataclass(frozen=True)
class BwdEdge:
    var: Optional[str] = None


@dataclass(frozen=True)
class Concat:
    left: "Pattern"
    right: "Pattern"


@dataclass(frozen=True)
class Alt:
    left: "Pattern"
    right: "Pattern"


@dataclass(frozen=True)
class Repeat:
    body: "Pattern"
    lo: int
    hi: Optional[int]  # None = unbounded


@dataclass(frozen=True)
class Filter:
    body: "Pattern"
    cond: "Condition"


Pattern = Union[Node, FwdEdge, BwdEdge, Concat, Alt, Repeat, Filter]


@dataclass(frozen=True)
class PropEq:
    x: str
    k: Value
    x2: str
    k2: Value


@dataclass(frozen=True)
class HasLabel:
    label: Value
    x: str


@dataclass(frozen=True)
class And:
    left: "Condition"
    right: "Condition"


@dataclass(frozen=True)
class Or:
    left: "Condition"
    right: "Condition"


@dataclass(frozen=True)
class Not:
    arg: "Condition"


Condition = Union[PropEq, HasLabel, And, Or, Not]


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class PropAccess:
    name: str
    key: Value


OutputItem = Union[Var, PropAccess]


@dataclass(frozen=True)
class OutputPattern:
    body: Pattern
    omega: tuple = ()


@dataclass(frozen=True)
class StaticError:
    kind: str
    detail: str

    def __str__(self):
        return f"{self.kind}: {self.detail}"


def star(p: Pattern) -> Repeat:
    return Repeat(p, 0, INF)


def concat(*ps: Pattern) -> Pattern:
    out = ps[0]
    for p in ps[1:]:
        out = Concat(out, p)
    return out


def schema_of(p: Pattern) -> frozenset:
    if isinstance(p, (Node, FwdEdge, BwdEdge)):
        return frozenset() if p.var is None else frozenset([p.var])
    if isinstance(p, Concat):
        return schema_of(p.left) | schema_of(p.right)
    if isinstance(p, Alt):
        return schema_of(p.left)
    if isinstance(p, Repeat):
        return frozenset()
    if isinstance(p, Filter):
        return schema_of(p.body)
    raise TypeError(f"not a pattern: {p!r}")


def cond_vars(c: Condition) -> frozenset:
    if isinstance(c, PropEq):
        return frozenset([c.x, c.x2])
    if isinstance(c, HasLabel):
        return frozenset([c.x])
    if isinstance(c, Not):
        return cond_vars(c.arg)
    return cond_vars(c.left) | cond_vars(c.right)


def item_var(item: OutputItem) -> str:
    return item.name


def validate_pattern(p) -> list:
    """Static errors of a pattern or output pattern; empty means well formed."""
    errors: list = []
    if isinstance(p, OutputPattern):
        _check(p.body, errors)
        sch = schema_of(p.body)
        if len(set(p.omega)) != len(p.omega):
            errors.append(StaticError("DuplicateOutput", f"repeated output item in {p.omega}"))
        for item in p.omega:
            if item.name not in sch:
                errors.append(StaticError("UnboundOutputVar", item.name))
    else:
        _check(p, errors)
    return errors


def _check(p: Pattern, errors: list) -> None:
    if isinstance(p, (Node, FwdEdge, BwdEdge)):
        if p.var == "":
            errors.append(StaticError("EmptyName", repr(p)))
        return
    if isinstance(p, (Concat, Alt)):
        _check(p.left, errors)
        _check(p.right, errors)
        if isinstance(p, Alt) and schema_of(p.left) != schema_of(p.right):
            errors.append(
                StaticError(
                    "SchemaMismatch",
                    f"{sorted(schema_of(p.left))} vs {sorted(schema_of(p.right))}",
                )
            )
        return
    if isinstance(p, Repeat):
        _check(p.body, errors)
        if p.lo < 0 or (p.hi is not None and p.lo > p.hi):
            errors.append(StaticError("BadRepeat", f"bounds {p.lo}..{p.hi}"))
        return
    if isinstance(p, Filter):
        _check(p.body, errors)
        sch = schema_of(p.body)
        for v in sorted(cond_vars(p.cond) - sch):
            errors.append(StaticError("UnboundVarInCondition", v))
        return
    raise TypeError(f"not a pattern: {p!r}")


def pattern_size(p: Pattern) -> int:
    if isinstance(p, (Node, FwdEdge, BwdEdge)):
        return 1
    if isinstance(p, (Concat, Alt)):
        return 1 + pattern_size(p.left) + pattern_size(p.right)
    return 1 + pattern_size(p.body)


def pattern_depth(p: Pattern) -> int:
    if isinstance(p, (Node, FwdEdge, BwdEdge)):
        return 0
    if isinstance(p, (Concat, Alt)):
        return 1 + max(pattern_depth(p.left), pattern_depth(p.right))
    return 1 + pattern_depth(p.body)


def all_vars(p: Pattern) -> frozenset:
    """Every named variable anywhere in ``p``, including inside repetitions."""
    if isinstance(p, (Node, FwdEdge, BwdEdge)):
        return frozenset() if p.var is None else frozenset([p.var])
    if isinstance(p, (Concat, Alt)):
        return all_vars(p.left) | all_vars(p.right)
    return all_vars(p.body)
