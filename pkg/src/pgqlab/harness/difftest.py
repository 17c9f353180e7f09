"""Differential testing: the same question answered by two independent routes.

Each suite draws ``cases`` random instances from a seeded stream, computes a result
two ways and records every disagreement. A ``fault`` hook may rewrite the first
route's answer; it exists so tests can check that a broken engine is caught.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

from .. import fotc as F
from .. import pgq as Q
from .. import relcore as rc
from .. import xlate as X
from ..pattern_eval import PathBudgetExceeded, eval_pattern, eval_pattern_paths, project_endpoints
from ..pgraph import InvalidView, validate_view
from ..syntax import print_formula, print_pattern, print_query
from . import generators as G
from . import oracles


@dataclass
class Mismatch:
    """One disagreement; ``case`` together with the report's seed and suite reproduces it."""

    case: int
    obj: str
    expected: object
    got: object

    @property
    def detail(self) -> str:
        return f"{self.obj}: expected {_show(self.expected)}, got {_show(self.got)}"

    def to_json(self) -> dict:
        return {"case": self.case, "object": self.obj, "expected": _jsonable(self.expected), "got": _jsonable(self.got)}


def _jsonable(x):
    if isinstance(x, rc.Relation):
        return [list(r) for r in x.sorted_rows()]
    if isinstance(x, (set, frozenset)):
        return sorted(x, key=repr)
    return x


def _show(x) -> str:
    if isinstance(x, rc.Relation):
        return f"{len(x)} rows"
    if isinstance(x, (set, frozenset)) and any(isinstance(t, tuple) for t in x):
        return f"{len(x)} triples"
    return str(_jsonable(x))


@dataclass
class DiffReport:
    suite: str
    seed: int
    cases: int
    mismatches: list = field(default_factory=list)
    skipped: int = 0
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def summary(self) -> str:
        status = "ok" if self.ok else f"{len(self.mismatches)} mismatches"
        return f"{self.suite}: seed={self.seed} cases={self.cases} skipped={self.skipped} {status}"

    def to_json(self) -> dict:
        # timing is left out so that reports are byte-identical across runs
        return {
            "suite": self.suite,
            "seed": self.seed,
            "cases": self.cases,
            "skipped": self.skipped,
            "mismatches": [m.to_json() for m in self.mismatches],
        }


Fault = Optional[Callable]


def case_rng(seed: int, suite: str, i: int) -> random.Random:
    # string seeds hash through sha512, stable across processes
    return random.Random(f"{seed}:{suite}:{i}")


# nested repetitions over parallel edges can have exponentially many paths
PATH_BUDGET = 50_000


def _endpoint_vs_path(rng, cfg, fault):
    g = G.gen_graph(rng, cfg)
    p = G.gen_pattern(rng, cfg)
    got = eval_pattern(g, p)
    if fault:
        got = fault(got)
    want = project_endpoints(eval_pattern_paths(g, p, len(g.nodes) + 2, PATH_BUDGET))
    if got != want:
        return (f"pattern {print_pattern(p)}", want, got)
    return None


def _pgq_to_fotc(rng, cfg, fault):
    db = G.gen_db(rng, cfg)
    q = G.gen_query(rng, rng.choice(("RO", "RW", "EXT")), cfg)
    got = Q.eval_query(db, q)
    if fault:
        got = fault(got)
    f, xs = X.pgq_to_fotc(q, db.schema())
    want = F.eval_formula_rel(db, f, xs)
    if got != want:
        return (f"query {print_query(q)}", want, got)
    return None


def _formula_case(rng, cfg):
    db = G.gen_formula_db(rng, cfg)
    f = G.gen_formula(rng, cfg)
    return db, f, tuple(sorted(F.free_vars(f)))


def _fotc_to_pgq(rng, cfg, fault):
    db, f, xs = _formula_case(rng, cfg)
    want = F.eval_formula_rel(db, f, xs)
    for strat in X.TCStrategy:
        got = Q.eval_query(db, X.fotc_to_pgq(f, xs, strat, db.schema()))
        if fault:
            got = fault(got)
        if got != want:
            return (f"{strat.value} translation of {print_formula(f)}", want, got)
    return None


def _strategy_agreement(rng, cfg, fault):
    db, f, xs = _formula_case(rng, cfg)
    a = Q.eval_query(db, X.fotc_to_pgq(f, xs, X.TCStrategy.PARAM_ITERATE, db.schema()))
    if fault:
        a = fault(a)
    b = Q.eval_query(db, X.fotc_to_pgq(f, xs, X.TCStrategy.PARAM_EMBED, db.schema()))
    if a != b:
        return (f"iterate vs embed on {print_formula(f)}", b, a)
    return None


def _evaluator_agreement(rng, cfg, fault):
    db, f, xs = _formula_case(rng, cfg)
    got = F.eval_formula_rel(db, f, xs)
    if fault:
        got = fault(got)
    want = F.eval_formula_rel_naive(db, f, xs)
    if got != want:
        return (f"bottom-up vs enumeration on {print_formula(f)}", want, got)
    return None


def fragment_bound(fc: Q.FragmentClass) -> int:
    return fc.arity if fc.kind == "EXT" else 1


def forward_arity_violation(q, schema) -> Optional[str]:
    f, _ = X.pgq_to_fotc(q, schema)
    bound = fragment_bound(Q.classify_fragment(q, schema))
    if F.tc_arity(f) > bound:
        return (f"tc arity of the translation of {print_query(q)}", f"<= {bound}", F.tc_arity(f))
    return None


def backward_arity_violation(f, xs, schema) -> Optional[str]:
    q = X.fotc_to_pgq(f, xs, X.TCStrategy.PARAM_ITERATE, schema)
    got = X.max_identifier_arity(q, schema)
    bound = max(1, F.tc_arity(f))
    if got > bound:
        return (f"identifier arity of the iterate translation of {print_formula(f)}", f"<= {bound}", got)
    return None


def _arity_forward(rng, cfg, fault):
    db = G.gen_db(rng, cfg)
    q = G.gen_query(rng, rng.choice(("RO", "RW", "EXT")), cfg)
    return forward_arity_violation(q, db.schema())


def _arity_backward(rng, cfg, fault):
    db, f, xs = _formula_case(rng, cfg)
    return backward_arity_violation(f, xs, db.schema())


def _arity_preservation(rng, cfg, fault):
    return _arity_forward(rng, cfg, fault) or _arity_backward(rng, cfg, fault)


def _view_validation(rng, cfg, fault):
    rels, mutation = G.gen_view_bundle(rng, cfg)
    got = validate_view(rels).conditions()
    if fault:
        got = fault(got)
    want = oracles.violated_conditions(rels)
    if got != want:
        return (f"view bundle with mutation {mutation}", want, got)
    return None


SUITES = {
    "endpoint-vs-path": _endpoint_vs_path,
    "pgq-to-fotc": _pgq_to_fotc,
    "fotc-to-pgq": _fotc_to_pgq,
    "strategy-agreement": _strategy_agreement,
    "evaluator-agreement": _evaluator_agreement,
    "arity-preservation": _arity_preservation,
    "arity-forward": _arity_forward,
    "arity-backward": _arity_backward,
    "view-validation": _view_validation,
}


def difftest(seed: int, cases: int, suite: str, cfg: G.GenConfig = G.DEFAULT, fault: Fault = None) -> DiffReport:
    if suite not in SUITES:
        raise KeyError(f"unknown suite {suite!r}; choose from {', '.join(sorted(SUITES))}")
    check = SUITES[suite]
    report = DiffReport(suite, seed, cases)
    start = time.perf_counter()
    # skipped cases are replaced by fresh draws, up to twice the requested number
    done, i = 0, 0
    while done < cases and i < 2 * cases + 10:
        try:
            found = check(case_rng(seed, suite, i), cfg, fault)
        except (InvalidView, PathBudgetExceeded):
            # generated views are valid by construction; the path oracle may run out of budget
            report.skipped += 1
            i += 1
            continue
        if found is not None:
            report.mismatches.append(Mismatch(i, *found))
        done += 1
        i += 1
    report.cases = done
    report.seconds = time.perf_counter() - start
    return report
