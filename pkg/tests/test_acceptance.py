"""The ten acceptance criteria at their stated tolerances and time budgets.

Each test prints one ``[PASS]``/``[FAIL]`` line; the lines are repeated in
the terminal summary. The heavy criteria (3, 4, 6, 9) take minutes each.
"""

import pytest

from conftest import ACCEPTANCE_LINES
from ctrwlimit.acceptance import DEFAULT_SEED, TITLES, run_criterion


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(TITLES), ids=lambda n: f"criterion_{n:02d}")
def test_criterion(number, tmp_path):
    result = run_criterion(number, seed=DEFAULT_SEED, threads=1, workdir=str(tmp_path))
    line = result.line()
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert result.passed, line
