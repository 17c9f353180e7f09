from __future__ import annotations

import pytest

from pgqlab.harness import fixtures


@pytest.fixture(scope="session")
def bank():
    return fixtures.transfers_fixture()


@pytest.fixture(scope="session")
def bank_graph(bank):
    from pgqlab import pgq as Q
    from pgqlab.pgraph import pg_view
    from pgqlab.syntax import parse_query

    rels = [Q.eval_query(bank.db, parse_query(t)) for t in fixtures.TRANSFERS_VIEW]
    return pg_view(rels)
