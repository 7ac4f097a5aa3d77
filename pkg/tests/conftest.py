"""Collects acceptance verdicts and prints one line per criterion."""

_verdicts = []


def record_verdict(num: int, label: str, ok: bool, detail: str) -> None:
    _verdicts.append((num, label, ok, detail))


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for num, label, ok, detail in sorted(_verdicts):
        word = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {num:02d} {word}  {label}  [{detail}]")
