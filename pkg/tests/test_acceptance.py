"""Acceptance criteria 1-12 with the default configuration (several minutes)."""

import pytest

from cauchylab.acceptance import acceptance_suite


@pytest.fixture(scope="module")
def report():
    return acceptance_suite()


@pytest.mark.parametrize("number", range(1, 13))
def test_criterion(report, number, capsys):
    row = next(r for r in report.rows if r.number == number)
    with capsys.disabled():
        print("\n" + row.line() + (f"\n     note: {row.note}" if row.note and not row.passed else ""))
    assert row.status in ("pass", "FAIL"), row.measured
    assert row.passed, f"{row.title}: measured {row.measured}, expected {row.expected}"
