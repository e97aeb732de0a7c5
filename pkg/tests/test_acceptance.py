"""The twelve acceptance criteria on the full reference parameter sets.

Each test prints one PASS/FAIL line; the lines are repeated, in order, in
the terminal summary.
"""

import pytest

from crownwave import fixtures as fx
from crownwave import verify


@pytest.fixture(scope="module")
def ctx(fixture_doc):
    problems = fx.check_integrity(fixture_doc)
    assert not problems, problems
    return verify.Context(verify.REFERENCE_SETS, fixture_doc)


@pytest.mark.parametrize("number", [c[0] for c in verify.CRITERIA],
                         ids=[f"{c[0]:02d}-{c[1].replace(' ', '-')}" for c in verify.CRITERIA])
def test_criterion(number, ctx, acceptance_log):
    res = verify.run_one(number, ctx)
    line = res.line()
    acceptance_log[number] = line
    print(line)
    for c in res.checks:
        print(f"    {'ok ' if c.passed else 'BAD'} {c.name}: {c.value:.3g} {c.relation} {c.tolerance:g}")
    assert res.error is None, res.error
    assert res.checks, "criterion produced no checks"
    assert res.passed, line
