import pytest

from mrdt.datatypes import catalog_lookup

# datatypes expected to pass every check
ROSTER = ["counter", "pn-counter", "gset", "gmap", "orset", "orset-efficient", "rwset", "ewflag", "dwflag",
          "swmap", "mvr", "optreg", "rga", "json"]
CRDT_ROSTER = ["gcounter", "pn-counter", "gset", "gmap", "orset", "2p-set", "mvr"]


@pytest.fixture
def orset():
    return catalog_lookup("orset")


@pytest.fixture
def counter():
    return catalog_lookup("counter")


ACCEPTANCE = {}  # criterion number -> (passed, detail)


def record_criterion(number, passed, detail):
    ACCEPTANCE[number] = (bool(passed), detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
