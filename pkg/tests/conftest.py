import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" not in nodeid or rep.when not in ("call", "setup"):
                continue
            if outcome == "passed" and rep.when != "call":
                continue
            status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIPPED"}[outcome]
            if outcome == "skipped" and "NO-DATA" in str(rep.longrepr):
                status = "SKIPPED-NO-DATA"
            lines.append((nodeid, status))
    if lines:
        terminalreporter.section("acceptance criteria")
        for nodeid, status in sorted(lines):
            terminalreporter.write_line(f"{status:<16} {nodeid.split('::', 1)[1]}")
