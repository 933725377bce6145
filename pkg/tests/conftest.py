from __future__ import annotations

# (criterion, check, ok, detail) appended by test_acceptance.py
ACCEPTANCE: list[tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    by_crit: dict[int, list[tuple[str, bool, str]]] = {}
    for crit, check, ok, detail in ACCEPTANCE:
        by_crit.setdefault(crit, []).append((check, ok, detail))
    for crit in sorted(by_crit):
        checks = by_crit[crit]
        verdict = "PASS" if all(ok for _, ok, _ in checks) else "FAIL"
        parts = "; ".join(f"{c}: {'pass' if ok else 'FAIL'} ({d})" for c, ok, d in checks)
        tr.write_line(f"criterion {crit}: {verdict}: {parts}")
