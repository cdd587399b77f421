def pytest_terminal_summary(terminalreporter):
    from test_acceptance import SUMMARY

    if not SUMMARY:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(SUMMARY):
        ok, line = SUMMARY[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {line}")
