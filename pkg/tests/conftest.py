from collections import OrderedDict

import pytest

CRITERIA = OrderedDict(
    [
        ("C1", "error-budget reproduction"),
        ("C2", "ideal-limit spin fidelity"),
        ("C3", "parity-preserving rotation"),
        ("C4", "blockade aperiodicity"),
        ("C5", "logical-gate catalog"),
        ("C6", "Stratonovich-Weyl suite"),
        ("C7", "solver correctness"),
        ("C8", "not reproducible at desk scale"),
    ]
)

_CHECKS = OrderedDict((k, []) for k in CRITERIA)


@pytest.fixture
def record():
    """``record(criterion, check, ok, detail)`` logs one acceptance check."""

    def _record(criterion, check, ok, detail=""):
        _CHECKS[criterion].append((check, ok, detail))
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not any(_CHECKS.values()):
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for key, title in CRITERIA.items():
        checks = _CHECKS[key]
        if not checks:
            tr.write_line(f"{key} {title}: NOT RUN")
            continue
        if all(ok is None for _, ok, _ in checks):
            status = "DOCUMENTED"
        else:
            status = "PASS" if all(ok is not False for _, ok, _ in checks) else "FAIL"
        failed = [c for c, ok, _ in checks if ok is False]
        suffix = f" (failing: {', '.join(failed)})" if failed else ""
        tr.write_line(f"{key} {title}: {status}{suffix}")
        for check, ok, detail in checks:
            mark = {True: "ok", False: "FAIL", None: "--"}[ok]
            tr.write_line(f"    [{mark}] {check}: {detail}")
