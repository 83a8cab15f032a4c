import pytest

# criterion number -> (ok, title, detail), filled by test_acceptance.py
ACCEPTANCE_KEY = pytest.StashKey[dict]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(ACCEPTANCE_KEY, {})
    if not results:
        return
    from test_acceptance import format_line

    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(format_line(number, *results[number]))
