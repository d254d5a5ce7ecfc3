"""Collects acceptance verdicts and prints them once at the end of the session."""

VERDICTS: list[tuple[int, bool, str, str]] = []


def record(number: int, passed: bool, title: str, detail: str = "") -> None:
    line = f"{'PASS' if passed else 'FAIL'} criterion {number:>2}: {title}" + (f" ({detail})" if detail else "")
    VERDICTS.append((number, passed, title, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, _, _, line in sorted(VERDICTS, key=lambda v: v[0]):
        terminalreporter.write_line(line)
