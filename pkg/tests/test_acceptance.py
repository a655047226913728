"""The eleven numbered acceptance criteria, one test each.

Each test prints a single ``[PASS]``/``[FAIL]`` line (visible under
``pytest -v``) and then asserts the criterion held.
"""

import pytest

from seqauction.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda c: f"criterion-{c.number:02d}")
def test_criterion(criterion, capsys):
    result = run_criterion(criterion)
    with capsys.disabled():
        print("\n" + result.line())
        for f in result.failures[:5]:
            print(f"    expected {result.expected}; observed {f}")
    assert result.passed, "; ".join(result.failures[:5]) or result.observed
