import json
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

# Filled in by the acceptance tests; echoed after the run so the one-line
# per-criterion verdicts survive pytest's output capture.
ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def toy_table():
    """Brute-force group table of the embedded toy curve: k -> affine k*G."""
    data = json.loads((FIXTURES / "toy_group_table.json").read_text())
    table = {k: (x, y) for k, x, y in data["table"]}
    table[0] = None
    return data, table
