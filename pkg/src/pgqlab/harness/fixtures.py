"""Worked examples as databases plus queries, with random instance builders.

* ``transfers``: accounts keyed by IBAN, transfers as edges; pairs joined by a chain
  of transfers above 100. The comparison ``amount > 100`` is not part of the
  condition language, so the database carries the set of large amounts in
  ``Over100`` and the view turns it into a ``Big`` label.
* ``composite``: accounts keyed by (bank, branch, acct) triples; reachability with
  ternary identifiers, returning bank and branch of both endpoints.
* ``increasing``: pairs of accounts joined by a path whose amounts strictly
  increase, via node copies (bank, branch, acct, l) for every incoming amount l.
  ``Less`` is an explicit order relation on the amounts (and 0).
* ``alternating``: does a walk exist that alternates red and blue at every step?
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from .. import pgq as Q
from ..pgraph import PropertyGraph, make_graph
from ..relcore import Database, make_database, make_relation
from ..syntax import parse_query
from . import oracles


@dataclass
class Fixture:
    name: str
    db: Database
    queries: dict = field(default_factory=dict)
    oracle: str = ""


# --- transfers --------------------------------------------------------------------------

TRANSFERS_VIEW = (
    "REL Account",
    "PI[1](REL Transfer)",
    "PI[1,2](REL Transfer)",
    "PI[1,3](REL Transfer)",
    '(REL Account X CONST "Account") UNION (PI[1](REL Transfer) X CONST "Transfer")'
    ' UNION PI[1,7](SIGMA[$5=$6](REL Transfer X REL Over100) X CONST "Big")',
    'PI[1,2,1](REL Account X CONST "iban")'
    ' UNION PI[1,6,4](REL Transfer X CONST "ts")'
    ' UNION PI[1,6,5](REL Transfer X CONST "amount")',
)

TRANSFERS_QUERY = (
    "MATCH (x) (-[t]-> <Transfer(t) & Big(t)>){1,*} (y) OUTPUT(x.iban, y.iban) ON("
    + "; ".join(TRANSFERS_VIEW)
    + ")"
)


def transfers_db(accounts, transfers, threshold: int = 100) -> Database:
    """``transfers`` rows are (t_id, src_iban, tgt_iban, ts, amount)."""
    amounts = {t[4] for t in transfers}
    return make_database(
        {
            "Account": make_relation(1, [(a,) for a in accounts]),
            "Transfer": make_relation(5, transfers),
            "Over100": make_relation(1, [(a,) for a in amounts if a > threshold]),
        }
    )


def transfers_fixture() -> Fixture:
    accounts = ["DE01", "DE02", "FR01", "NL01"]
    transfers = [
        (1, "DE01", "DE02", 10, 150),
        (2, "DE02", "FR01", 11, 250),
        (3, "FR01", "NL01", 12, 50),
        (4, "NL01", "DE01", 13, 300),
        (5, "DE02", "NL01", 14, 120),
    ]
    return Fixture("transfers", transfers_db(accounts, transfers), {"big_chains": parse_query(TRANSFERS_QUERY)}, "transfers_over")


def random_transfers(rng: random.Random, n_accounts: int = 4, n_transfers: int = 6) -> Database:
    accounts = [f"IB{i}" for i in range(n_accounts)]
    transfers = [
        (i, rng.choice(accounts), rng.choice(accounts), 100 + i, rng.choice([50, 90, 100, 101, 150, 400]))
        for i in range(n_transfers)
    ]
    return transfers_db(accounts, transfers)


# --- composite identifiers --------------------------------------------------------------

COMPOSITE_QUERY = (
    "MATCH (x) (-[t]-> <Transfer(t)>){1,*} (y) OUTPUT(x.bank, x.branch, y.bank, y.branch) ON("
    "REL Account; "
    'PI[1,10,10](REL Transfer X CONST "#t"); '
    'PI[1,10,10,2,3,4](REL Transfer X CONST "#t"); '
    'PI[1,10,10,5,6,7](REL Transfer X CONST "#t"); '
    'PI[1,10,10,11](REL Transfer X CONST "#t" X CONST "Transfer"); '
    'PI[1,2,3,4,1](REL Account X CONST "bank") UNION PI[1,2,3,4,2](REL Account X CONST "branch")'
    ") ARITY 3"
)


def composite_db(accounts, transfers) -> Database:
    """``accounts`` are (bank, branch, acct); ``transfers`` have nine columns."""
    return make_database(
        {"Account": make_relation(3, accounts), "Transfer": make_relation(9, transfers)}
    )


def composite_fixture() -> Fixture:
    accounts = [("B1", "N", 1), ("B1", "S", 2), ("B2", "N", 3)]
    transfers = [
        (1, "B1", "N", 1, "B1", "S", 2, 10, 50),
        (2, "B1", "S", 2, "B2", "N", 3, 11, 20),
    ]
    return Fixture("composite", composite_db(accounts, transfers), {"branch_reach": parse_query(COMPOSITE_QUERY)}, "brute_reach")


# --- increasing amounts -----------------------------------------------------------------

_COPIES = "((REL Account X CONST 0) UNION PI[5,6,7,9](REL Transfer))"
# Transfer(1..9) X copies(10..13) X Less(14,15), source copy below the amount
_STEPS = f"SIGMA[$2=$10 & $3=$11 & $4=$12 & $13=$14 & $9=$15](REL Transfer X {_COPIES} X REL Less)"
_STEPS_TAGGED = f'({_STEPS} X CONST "#e")'

INCREASING_VIEW = (
    _COPIES,
    f"PI[1,13,16,16]{_STEPS_TAGGED}",
    f"PI[1,13,16,16,2,3,4,13]{_STEPS_TAGGED}",
    f"PI[1,13,16,16,5,6,7,9]{_STEPS_TAGGED}",
    'REL Account X CONST 0 X CONST "Start"',
    "PI[1,1,1,1,1,1](REL Account MINUS REL Account)",
)

INCREASING_QUERY = (
    "PI[1,2,3,5,6,7](MATCH ((x) -[]->{1,*} (y)) <Start(x)> OUTPUT(x, y) ON("
    + "; ".join(INCREASING_VIEW)
    + ") ARITY 4)"
)


def increasing_db(accounts, transfers) -> Database:
    amounts = sorted({0} | {t[8] for t in transfers})
    less = [(a, b) for a in amounts for b in amounts if a < b]
    return make_database(
        {
            "Account": make_relation(3, accounts),
            "Transfer": make_relation(9, transfers),
            "Less": make_relation(2, less),
        }
    )


def increasing_graph(db: Database) -> PropertyGraph:
    """The transfer graph itself, built directly from the rows (for the oracle)."""
    nodes = [tuple(a) for a in db["Account"].sorted_rows()]
    edges, props = [], []
    for t in db["Transfer"].sorted_rows():
        eid = (t[0], "#e", "#e")
        edges.append((eid, tuple(t[1:4]), tuple(t[4:7])))
        props.append((eid, "amount", t[8]))
    return make_graph(nodes, edges, props=props, arity=3)


def increasing_fixture() -> Fixture:
    accounts = [("B1", "N", 1), ("B1", "N", 2), ("B2", "S", 3), ("B2", "S", 4)]
    transfers = [
        (1, "B1", "N", 1, "B1", "N", 2, 1, 150),
        (2, "B1", "N", 2, "B2", "S", 3, 2, 50),
        (3, "B1", "N", 1, "B2", "S", 3, 3, 50),
        (4, "B2", "S", 3, "B2", "S", 4, 4, 150),
    ]
    return Fixture("increasing", increasing_db(accounts, transfers), {"increasing": parse_query(INCREASING_QUERY)}, "brute_increasing_paths")


def random_increasing(rng: random.Random, n_accounts: int = 4, n_transfers: int = 6) -> Database:
    accounts = [(rng.choice(["B1", "B2"]), rng.choice(["N", "S"]), i) for i in range(n_accounts)]
    transfers = []
    for i in range(n_transfers):
        s, t = rng.choice(accounts), rng.choice(accounts)
        transfers.append((100 + i,) + s + t + (i, rng.randint(1, 5) * 10))
    return increasing_db(accounts, transfers)


# --- alternating colours ----------------------------------------------------------------

ALTERNATING_QUERY = (
    "MATCH (((x) -[]-> (y) -[]-> (z)) <Red(x) & Blue(y) & Red(z) | Blue(x) & Red(y) & Blue(z)>){1,*} OUTPUT() ON("
    "REL RedNodes UNION REL BlueNodes; REL Edges; REL Source; REL Target; "
    '(REL RedNodes X CONST "Red") UNION (REL BlueNodes X CONST "Blue"); '
    "PI[1,1,1](REL Edges MINUS REL Edges))"
)


def colors_db(red, blue, edges) -> Database:
    """``edges`` are (id, src, tgt) between coloured nodes."""
    return make_database(
        {
            "RedNodes": make_relation(1, [(r,) for r in red]),
            "BlueNodes": make_relation(1, [(b,) for b in blue]),
            "Edges": make_relation(1, [(e,) for e, _, _ in edges]),
            "Source": make_relation(2, [(e, s) for e, s, _ in edges]),
            "Target": make_relation(2, [(e, t) for e, _, t in edges]),
        }
    )


def alternating_fixture() -> Fixture:
    db = colors_db(["r1", "r2"], ["b1"], [(1, "r1", "b1"), (2, "b1", "r2")])
    return Fixture("alternating", db, {"alternating": parse_query(ALTERNATING_QUERY)}, "brute_alternating")


def random_colors(rng: random.Random, n_nodes: int = 5, n_edges: int = 5) -> Database:
    nodes = [f"n{i}" for i in range(n_nodes)]
    red = [n for n in nodes if rng.random() < 0.5]
    blue = [n for n in nodes if n not in red]
    edges = [(i, rng.choice(nodes), rng.choice(nodes)) for i in range(n_edges)]
    return colors_db(red, blue, edges)


# --- running fixtures -------------------------------------------------------------------


def run_oracle(name: str, db: Database):
    if name == "transfers":
        return oracles.transfers_over(db, 100)
    if name == "composite":
        g = composite_graph(db)
        # nonempty paths only, reported as (bank, branch) of both ends
        plus = _plus({(g.src[e], g.tgt[e]) for e in g.edges})
        return make_relation(4, [(a[0], a[1], b[0], b[1]) for a, b in plus])
    if name == "increasing":
        return oracles.brute_increasing_paths(increasing_graph(db), "amount")
    if name == "alternating":
        return oracles.brute_alternating(db)
    raise KeyError(name)


def _plus(step: set) -> set:
    reach = set(step)
    while True:
        more = {(a, d) for a, b in reach for c, d in step if b == c} - reach
        if not more:
            return reach
        reach |= more


def composite_graph(db: Database) -> PropertyGraph:
    nodes = [tuple(a) for a in db["Account"].sorted_rows()]
    edges = [((t[0], "#t", "#t"), tuple(t[1:4]), tuple(t[4:7])) for t in db["Transfer"].sorted_rows()]
    return make_graph(nodes, edges, arity=3)


def run_engine(fx: Fixture, db: Database | None = None):
    db = db if db is not None else fx.db
    q = next(iter(fx.queries.values()))
    rel = Q.eval_query(db, q)
    if fx.name == "alternating":
        return not rel.is_empty()
    return rel


FIXTURES = {
    "transfers": transfers_fixture,
    "composite": composite_fixture,
    "increasing": increasing_fixture,
    "alternating": alternating_fixture,
}


def load_fixture(name: str) -> Fixture:
    return FIXTURES[name]()
