import hypothesis

hypothesis.settings.register_profile(
    "suite", deadline=None, max_examples=25, derandomize=True)
hypothesis.settings.load_profile("suite")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = {}
    for outcome in ("passed", "failed", "error", "skipped"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" not in nodeid or "::test_c" not in nodeid:
                continue
            if getattr(report, "when", "call") not in ("call", "setup"):
                continue
            name = nodeid.split("::test_", 1)[1]
            tag = name.split("_", 1)[0].upper()
            label = name.split("_", 1)[1].replace("_", " ") if "_" in name else ""
            status = {"passed": "PASS", "failed": "FAIL",
                      "error": "FAIL", "skipped": "SKIPPED"}[outcome]
            lines[tag] = f"criterion {tag} ({label}): {status}"
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for tag in sorted(lines, key=lambda t: int(t[1:])):
            terminalreporter.write_line(lines[tag])
