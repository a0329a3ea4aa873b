import sys
from pathlib import Path

# make reference_values importable regardless of invocation directory
sys.path.insert(0, str(Path(__file__).parent))

# per-criterion verdict lines filled in by tests/test_acceptance.py
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
