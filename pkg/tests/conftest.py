"""Collects acceptance verdicts and prints them after the test run."""

VERDICTS = []


def record(criterion, ok, detail=""):
    line = f"CRITERION {criterion}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
    VERDICTS.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.write_line(line)
