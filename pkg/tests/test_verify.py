"""Tests for the verification suite."""

import pytest

from core.reports import dumps
from core.verify import VerificationSuite, summary_rows
from models.results import PropertyRow, VerifyReport

EXACT_ROWS = {
    "exact cover equals exhaustive oracle",
    "greedy within 1 + ln n of exact",
    "zero-exponent cost is the covering number",
    "H <= lambda and lambda(4d) <= 4^s H(d)",
    "cost nonincreasing in s below diameter 1/2",
    "Vitali subfamily disjoint, 5r dilations cover",
    "lambda_loc(4d) <= 4^dim H_loc(d)",
    "|U|^Q+ <= |U|^Q- <= e^C |U|^Q+",
}


@pytest.fixture
def suite():
    """Quick suite without fixtures loaded."""
    return VerificationSuite(quick=True, seed=0)


def test_oracle_rows(suite):
    """Test the exact-versus-oracle and greedy rows."""
    rows = suite.check_oracle_equivalence()
    assert [r.name for r in rows] == ["exact cover equals exhaustive oracle", "greedy within 1 + ln n of exact"]
    assert all(r.passed for r in rows)
    assert rows[0].fixture == "random x20"


def test_covering_number_row(suite):
    """Test the covering number row."""
    assert suite.check_covering_number().passed


def test_spherical_comparison_row(suite):
    """Test the ball versus subset comparison row."""
    row = suite.check_spherical_comparison()
    assert row.passed
    assert row.value <= 1.0 + 1e-9


def test_vitali_row(suite):
    """Test the Vitali row."""
    row = suite.check_vitali()
    assert row.passed
    assert row.fixture == "random x50"


def test_monotone_row(suite):
    """Test monotonicity in s on subsampled fixtures."""
    suite._load_fixtures()
    assert [fx.name for fx in suite.fixtures] == ["grid", "cantor", "glue"]
    assert suite.check_monotone_in_s().passed


def test_glue_window_is_narrowed(suite):
    """Test that glued fixtures fit exponents on a window every piece resolves."""
    suite._load_fixtures()
    glue = suite.fixtures[2]
    lo, hi = suite.window_of(glue)
    assert lo == pytest.approx(4.0 / 64)
    assert hi < glue.space.diameter / 4.0


def test_summary_rows_format(suite):
    """Test the printed table rows."""
    report = VerifyReport(rows=[PropertyRow(name="n", fixture="f", passed=True, value=0.5)], quick=True)
    assert summary_rows(report) == [("PASS", "n", "f", "0.5")]


@pytest.mark.slow
def test_quick_suite_runs():
    """Test a whole quick run and its determinism across thread counts."""
    one = VerificationSuite(quick=True, threads=1).run()
    many = VerificationSuite(quick=True, threads=2).run()

    names = {r.name for r in one.rows}
    assert EXACT_ROWS <= names
    failing = [(r.name, r.fixture, r.detail) for r in one.rows if not r.passed]
    assert not failing
    assert one.passed
    assert dumps(one) == dumps(many)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
