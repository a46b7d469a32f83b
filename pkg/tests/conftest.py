def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    rows = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when == "call" and "test_acceptance.py::" in rep.nodeid:
                rows.append((rep.nodeid.split("::")[1], "PASS" if outcome == "passed" else "FAIL"))
    if rows:
        terminalreporter.section("acceptance criteria")
        for name, verdict in sorted(rows):
            terminalreporter.write_line(f"{verdict}  {name}")
