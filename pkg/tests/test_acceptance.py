"""One test per acceptance criterion, each at its fixed tolerance and time budget.

Every test records a one-line PASS/FAIL summary (printed in the terminal
summary) before asserting, so a failing criterion still reports its numbers.
"""
import pytest

from artifact import acceptance


def _run(n, record_criterion, **kw):
    r = acceptance.CRITERIA[n](**kw)
    record_criterion(r.line())
    print(r.line())
    assert r.passed, r.line()


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6, 8, 9])
def test_criterion(n, record_criterion):
    _run(n, record_criterion)


def test_criterion_7(record_criterion):
    _run(7, record_criterion, workers=None)


@pytest.mark.slow
def test_criterion_10(record_criterion):
    _run(10, record_criterion, workers=None)
