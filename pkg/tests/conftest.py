"""Shared test plumbing: collects acceptance-criterion outcomes and prints a
one-line pass/fail summary per criterion at the end of the run."""

_CRITERIA = {}


def record_criterion(number, title, ok, detail=""):
    _CRITERIA[number] = (title, bool(ok), detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, detail = _CRITERIA[number]
        status = "PASS" if ok else "FAIL"
        line = f"[{status}] criterion {number:2d}: {title}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
