"""Acceptance criteria 1-14, one test each.

Each test prints a single PASS/FAIL line with the measured values.  The
criteria compare measured exponents against theoretical targets; see the
README for which ones the sup-based estimator does not reach.
"""

import pytest

from pressure_lab.acceptance import CRITERIA, evaluate


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys, tmp_path):
    res = evaluate(number, out_dir=tmp_path)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.detail
