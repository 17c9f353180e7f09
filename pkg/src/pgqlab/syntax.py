"""Text syntax for patterns, queries and formulas: tokenizer, parsers and printers.

Printing is the inverse of parsing: ``parse_x(print_x(obj)) == obj`` for every AST.
Grammar summary::

    pattern  (x)  ()  -[e]->  -[]->  <-[e]-  p p  p | p  p{n,m}  p{n,*}  p*  p <COND>
    cond     x.key = y.key   label(x)   !c   c & c   c | c
    query    REL name  CONST v  PI[i,..](q)  SIGMA[$i=$j & ..](q)  q X q  q UNION q
             q MINUS q  MATCH pattern OUTPUT(x, y.key) ON(q;..;q) [ARITY n | ARITY *]
             MATCH pattern OUTPUT(..) ON(N;E;S;T;L;P)   (bare names: read-only match)
             FOREACH(q) DO(q)   PARAM i
    formula  R(x,y)  x=y  x=5  !f  f & f  f | f  E x. f  A x. f
             TC[u1,u2; v1,v2](f)(x1,x2; y1,y2)
"""
from __future__ import annotations

import json
import re

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
)
from .patterns import And as CAnd
from .patterns import Not as CNot
from .patterns import Or as COr
from .relcore import PGQError


class ParseError(PGQError):
    def __init__(self, message: str, pos: int):
        self.pos = pos
        super().__init__(f"{message} at position {pos}")


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<str>"(?:[^"\\]|\\.)*")
  | (?P<int>-?\d+)
  | (?P<sym><-\[|\]->|-\[|\]-|[()\[\]{}<>,;.=!&|*$])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)

KEYWORDS = {"REL", "CONST", "PI", "SIGMA", "X", "UNION", "MINUS", "MATCH", "OUTPUT", "ON", "ARITY",
            "FOREACH", "DO", "PARAM", "TC", "E", "A"}


def tokenize(text: str) -> list:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            val = m.group()
            if kind == "str":
                val = json.loads(val)
            elif kind == "int":
                val = int(val)
            out.append((kind, val, pos))
        pos = m.end()
    out.append(("eof", None, len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # token helpers
    def peek(self, off: int = 0):
        return self.toks[min(self.i + off, len(self.toks) - 1)]

    def at(self, val, off: int = 0) -> bool:
        kind, v, _ = self.peek(off)
        return kind in ("sym", "ident") and v == val

    def fail(self, what: str):
        kind, v, pos = self.peek()
        got = "end of input" if kind == "eof" else repr(v)
        raise ParseError(f"expected {what}, got {got}", pos)

    def expect(self, val):
        if not self.at(val):
            self.fail(repr(val))
        self.i += 1

    def accept(self, val) -> bool:
        if self.at(val):
            self.i += 1
            return True
        return False

    def ident(self) -> str:
        kind, v, _ = self.peek()
        if kind != "ident":
            self.fail("a name")
        self.i += 1
        return v

    def integer(self) -> int:
        kind, v, _ = self.peek()
        if kind != "int":
            self.fail("an integer")
        self.i += 1
        return v

    def value(self):
        kind, v, _ = self.peek()
        if kind not in ("int", "str"):
            self.fail("a constant")
        self.i += 1
        return v

    def key(self):
        # property keys and labels: bare identifier, quoted string or integer
        kind, v, _ = self.peek()
        if kind not in ("int", "str", "ident"):
            self.fail("a key")
        self.i += 1
        return v

    def done(self):
        if self.peek()[0] != "eof":
            self.fail("end of input")

    # patterns
    def pattern(self):
        p = self.concat()
        while self.accept("|"):
            p = Alt(p, self.concat())
        return p

    def starts_atom(self) -> bool:
        return self.at("(") or self.at("-[") or self.at("<-[")

    def concat(self):
        p = self.postfix()
        while self.starts_atom():
            p = Concat(p, self.postfix())
        return p

    def postfix(self):
        p = self.primary()
        while True:
            if self.accept("*"):
                p = Repeat(p, 0, None)
            elif self.at("{"):
                self.i += 1
                lo = self.integer()
                self.expect(",")
                hi = None if self.accept("*") else self.integer()
                self.expect("}")
                p = Repeat(p, lo, hi)
            elif self.at("<") and not self.at("<-["):
                self.i += 1
                c = self.cond()
                self.expect(">")
                p = Filter(p, c)
            else:
                return p

    def primary(self):
        if self.accept("-["):
            var = None if self.at("]->") else self.ident()
            self.expect("]->")
            return FwdEdge(var)
        if self.accept("<-["):
            var = None if self.at("]-") else self.ident()
            self.expect("]-")
            return BwdEdge(var)
        if self.at("("):
            if self.at(")", 1):
                self.i += 2
                return Node(None)
            if self.peek(1)[0] == "ident" and self.at(")", 2):
                var = self.peek(1)[1]
                self.i += 3
                return Node(var)
            self.i += 1
            p = self.pattern()
            self.expect(")")
            return p
        self.fail("a pattern")

    def cond(self):
        c = self.cond_and()
        while self.accept("|"):
            c = COr(c, self.cond_and())
        return c

    def cond_and(self):
        c = self.cond_not()
        while self.accept("&"):
            c = CAnd(c, self.cond_not())
        return c

    def cond_not(self):
        if self.accept("!"):
            return CNot(self.cond_not())
        if self.accept("("):
            c = self.cond()
            self.expect(")")
            return c
        kind, v, _ = self.peek()
        if kind in ("str", "int") or (kind == "ident" and self.at("(", 1)):
            label = self.key()
            self.expect("(")
            x = self.ident()
            self.expect(")")
            return HasLabel(label, x)
        x = self.ident()
        self.expect(".")
        k = self.key()
        self.expect("=")
        x2 = self.ident()
        self.expect(".")
        k2 = self.key()
        return PropEq(x, k, x2, k2)

    def output_items(self) -> tuple:
        self.expect("(")
        items = []
        if not self.at(")"):
            while True:
                name = self.ident()
                items.append(PropAccess(name, self.key()) if self.accept(".") else Var(name))
                if not self.accept(","):
                    break
        self.expect(")")
        return tuple(items)

    # queries
    def query(self):
        q = self.q_product()
        while True:
            if self.accept("UNION"):
                q = Q.Union(q, self.q_product())
            elif self.accept("MINUS"):
                q = Q.Diff(q, self.q_product())
            else:
                return q

    def q_product(self):
        q = self.q_factor()
        while self.accept("X"):
            q = Q.Product(q, self.q_factor())
        return q

    def int_list(self, close: str) -> tuple:
        out = []
        if not self.at(close):
            while True:
                out.append(self.integer())
                if not self.accept(","):
                    break
        return tuple(out)

    def q_factor(self):
        if self.accept("REL"):
            return Q.Rel(self.ident())
        if self.accept("CONST"):
            return Q.Const(self.value())
        if self.accept("PARAM"):
            return Q.Param(self.integer())
        if self.accept("PI"):
            self.expect("[")
            idx = self.int_list("]")
            self.expect("]")
            return Q.Project(idx, self.paren_query())
        if self.accept("SIGMA"):
            self.expect("[")
            c = self.sel()
            self.expect("]")
            return Q.Select(c, self.paren_query())
        if self.accept("FOREACH"):
            params = self.paren_query()
            self.expect("DO")
            return Q.ForEach(params, self.paren_query())
        if self.accept("MATCH"):
            return self.match()
        if self.at("("):
            return self.paren_query()
        self.fail("a query")

    def paren_query(self):
        self.expect("(")
        q = self.query()
        self.expect(")")
        return q

    def sel(self):
        c = self.sel_and()
        while self.accept("|"):
            c = rc.Or(c, self.sel_and())
        return c

    def sel_and(self):
        c = self.sel_not()
        while self.accept("&"):
            c = rc.And(c, self.sel_not())
        return c

    def sel_not(self):
        if self.accept("!"):
            return rc.Not(self.sel_not())
        if self.accept("("):
            c = self.sel()
            self.expect(")")
            return c
        self.expect("$")
        i = self.integer()
        self.expect("=")
        self.expect("$")
        return rc.ColEq(i, self.integer())

    def match(self):
        body = self.pattern()
        self.expect("OUTPUT")
        out = OutputPattern(body, self.output_items())
        self.expect("ON")
        self.expect("(")
        # no query is a single name, so six names followed by separators mean a read-only match
        bare = all(
            self.peek(2 * j)[0] == "ident" and self.at(";" if j < 5 else ")", 2 * j + 1) for j in range(6)
        )
        if bare:
            names = []
            for j in range(6):
                names.append(self.ident())
                self.expect(";" if j < 5 else ")")
            return Q.MatchRO(out, tuple(names))
        subs = []
        for j in range(6):
            subs.append(self.query())
            self.expect(";" if j < 5 else ")")
        if self.accept("ARITY"):
            arity = None if self.accept("*") else self.integer()
            return Q.MatchEXT(out, tuple(subs), arity)
        return Q.MatchRW(out, tuple(subs))

    # formulas
    def formula(self):
        f = self.f_and()
        while self.accept("|"):
            f = F.Or(f, self.f_and())
        return f

    def f_and(self):
        f = self.f_unary()
        while self.accept("&"):
            f = F.And(f, self.f_unary())
        return f

    def f_unary(self):
        if self.accept("!"):
            return F.Not(self.f_unary())
        for word, ctor in (("E", F.Exists), ("A", F.Forall)):
            if self.at(word) and self.peek(1)[0] == "ident" and self.at(".", 2):
                self.i += 1
                var = self.ident()
                self.expect(".")
                return ctor(var, self.formula())
        return self.f_primary()

    def var_list(self, close: str) -> tuple:
        out = []
        if not self.at(close):
            while True:
                out.append(self.ident())
                if not self.accept(","):
                    break
        return tuple(out)

    def f_primary(self):
        if self.accept("("):
            f = self.formula()
            self.expect(")")
            return f
        if self.at("TC") and self.at("[", 1):
            _, _, pos = self.peek()
            self.i += 2
            u = self.var_list(";")
            self.expect(";")
            v = self.var_list("]")
            self.expect("]")
            self.expect("(")
            body = self.formula()
            self.expect(")")
            self.expect("(")
            x = self.var_list(";")
            self.expect(";")
            y = self.var_list(")")
            self.expect(")")
            try:
                return F.TC(u, v, body, x, y)
            except F.MalformedFormula as exc:
                raise ParseError(str(exc), pos) from None
        name = self.ident()
        if self.accept("("):
            args = self.var_list(")")
            self.expect(")")
            return F.Atom(name, args)
        self.expect("=")
        kind, v, _ = self.peek()
        if kind == "ident":
            self.i += 1
            return F.Eq(name, v)
        return F.EqConst(name, self.value())


def _parse(text: str, rule: str):
    p = _Parser(text)
    out = getattr(p, rule)()
    p.done()
    return out


def parse_pattern(text: str):
    return _parse(text, "pattern")


def parse_condition(text: str):
    return _parse(text, "cond")


def parse_query(text: str):
    return _parse(text, "query")


def parse_formula(text: str):
    return _parse(text, "formula")


def parse_output_pattern(text: str) -> OutputPattern:
    p = _Parser(text)
    body = p.pattern()
    p.expect("OUTPUT")
    out = OutputPattern(body, p.output_items())
    p.done()
    return out


# --- printers --------------------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def show_value(v) -> str:
    return str(v) if isinstance(v, int) else json.dumps(v)


def show_key(v) -> str:
    if isinstance(v, str) and _IDENT.match(v) and v not in KEYWORDS:
        return v
    return show_value(v)


def _name(n) -> str:
    return "" if n is None else n


def print_condition(c) -> str:
    if isinstance(c, PropEq):
        return f"{c.x}.{show_key(c.k)} = {c.x2}.{show_key(c.k2)}"
    if isinstance(c, HasLabel):
        return f"{show_key(c.label)}({c.x})"
    if isinstance(c, CNot):
        return f"!{_cond_atom(c.arg)}"
    if isinstance(c, CAnd):
        return f"{_cond_atom(c.left)} & {_cond_atom(c.right)}"
    return f"{_cond_atom(c.left)} | {_cond_atom(c.right)}"


def _cond_atom(c) -> str:
    s = print_condition(c)
    return s if isinstance(c, (PropEq, HasLabel, CNot)) else f"({s})"


def print_pattern(p) -> str:
    if isinstance(p, Node):
        return f"({_name(p.var)})"
    if isinstance(p, FwdEdge):
        return f"-[{_name(p.var)}]->"
    if isinstance(p, BwdEdge):
        return f"<-[{_name(p.var)}]-"
    if isinstance(p, Concat):
        left = print_pattern(p.left)
        if isinstance(p.left, Alt):
            left = f"({left})"
        right = print_pattern(p.right)
        if isinstance(p.right, (Alt, Concat)):
            right = f"({right})"
        return f"{left} {right}"
    if isinstance(p, Alt):
        right = print_pattern(p.right)
        if isinstance(p.right, Alt):
            right = f"({right})"
        return f"{print_pattern(p.left)} | {right}"
    body = print_pattern(p.body)
    if not isinstance(p.body, (Node, FwdEdge, BwdEdge)):
        body = f"({body})"
    if isinstance(p, Repeat):
        if p.lo == 0 and p.hi is None:
            return f"{body}*"
        return f"{body}{{{p.lo},{'*' if p.hi is None else p.hi}}}"
    return f"{body} <{print_condition(p.cond)}>"


def print_output_pattern(op: OutputPattern) -> str:
    items = ", ".join(i.name if isinstance(i, Var) else f"{i.name}.{show_key(i.key)}" for i in op.omega)
    return f"{print_pattern(op.body)} OUTPUT({items})"


def print_selcond(c) -> str:
    if isinstance(c, rc.ColEq):
        return f"${c.i}=${c.j}"
    if isinstance(c, rc.Not):
        return f"!{_sel_atom(c.arg)}"
    op = "&" if isinstance(c, rc.And) else "|"
    return f"{_sel_atom(c.left)} {op} {_sel_atom(c.right)}"


def _sel_atom(c) -> str:
    s = print_selcond(c)
    return s if isinstance(c, (rc.ColEq, rc.Not)) else f"({s})"


def print_query(q) -> str:
    if isinstance(q, Q.Rel):
        return f"REL {q.name}"
    if isinstance(q, Q.Const):
        return f"CONST {show_value(q.value)}"
    if isinstance(q, Q.Param):
        return f"PARAM {q.index}"
    if isinstance(q, Q.Project):
        return f"PI[{','.join(map(str, q.indices))}]({print_query(q.arg)})"
    if isinstance(q, Q.Select):
        return f"SIGMA[{print_selcond(q.cond)}]({print_query(q.arg)})"
    if isinstance(q, Q.ForEach):
        return f"FOREACH({print_query(q.params)}) DO({print_query(q.body)})"
    if isinstance(q, (Q.Product, Q.Union, Q.Diff)):
        op = {Q.Product: "X", Q.Union: "UNION", Q.Diff: "MINUS"}[type(q)]
        return f"{_query_atom(q.left)} {op} {_query_atom(q.right)}"
    head = f"MATCH {print_output_pattern(q.out)}"
    if isinstance(q, Q.MatchRO):
        return f"{head} ON({';'.join(q.rels)})"
    subs = ";".join(print_query(s) for s in q.subs)
    if isinstance(q, Q.MatchRW):
        return f"{head} ON({subs})"
    return f"{head} ON({subs}) ARITY {'*' if q.arity is None else q.arity}"


def _query_atom(q) -> str:
    s = print_query(q)
    return f"({s})" if isinstance(q, (Q.Product, Q.Union, Q.Diff, Q.MATCHES)) else s


def print_formula(f) -> str:
    if isinstance(f, F.Atom):
        return f"{f.rel}({', '.join(f.args)})"
    if isinstance(f, F.Eq):
        return f"{f.x} = {f.y}"
    if isinstance(f, F.EqConst):
        return f"{f.x} = {show_value(f.value)}"
    if isinstance(f, F.Not):
        return f"!{_formula_atom(f.arg)}"
    if isinstance(f, (F.And, F.Or)):
        op = "&" if isinstance(f, F.And) else "|"
        return f"{_formula_atom(f.left)} {op} {_formula_atom(f.right)}"
    if isinstance(f, (F.Exists, F.Forall)):
        q = "E" if isinstance(f, F.Exists) else "A"
        return f"{q} {f.var}. {print_formula(f.body)}"
    if isinstance(f, F.TC):
        return (
            f"TC[{', '.join(f.u)}; {', '.join(f.v)}]({print_formula(f.body)})"
            f"({', '.join(f.x)}; {', '.join(f.y)})"
        )
    raise TypeError(f"not a formula: {f!r}")


def _formula_atom(f) -> str:
    s = print_formula(f)
    return s if isinstance(f, (F.Atom, F.TC, F.Not)) else f"({s})"
