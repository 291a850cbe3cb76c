import os

from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion id -> list of (passed, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict[str, list[tuple[bool, str]]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=lambda c: (int(c.split(".")[0]), c)):
        checks = ACCEPTANCE[cid]
        ok = all(p for p, _ in checks)
        tr.write_line(f"criterion {cid}: {'PASS' if ok else 'FAIL'}")
        for p, detail in checks:
            tr.write_line(f"    [{'ok' if p else 'FAIL'}] {detail}")
