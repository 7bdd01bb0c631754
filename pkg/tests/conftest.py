import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, detail, seconds in sorted(results):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {num}: {title} ({detail}; {seconds:.1f}s)")
