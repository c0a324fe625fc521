from collections import defaultdict

import pytest

_RESULTS: dict[int, list[tuple[str, bool, str]]] = defaultdict(list)


class Recorder:
    def __call__(self, criterion: int, label: str, ok: bool, detail: str = "") -> bool:
        _RESULTS[criterion].append((label, bool(ok), detail))
        return bool(ok)


@pytest.fixture(scope="session")
def record():
    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit in sorted(_RESULTS):
        rows = _RESULTS[crit]
        bad = [r for r in rows if not r[1]]
        verdict = "PASS" if not bad else "FAIL"
        tr.write_line(f"criterion {crit}: {verdict} ({len(rows) - len(bad)}/{len(rows)} checks)")
        for label, ok, detail in rows:
            tr.write_line(f"    {'ok  ' if ok else 'FAIL'} {label}: {detail}")
