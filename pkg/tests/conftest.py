import pytest

# one visible pass/fail line per acceptance criterion at the end of the run
_acceptance_results: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    _acceptance_results.append((report.nodeid, report.outcome.upper()))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in _acceptance_results:
        name = nodeid.split("::")[-1]
        terminalreporter.write_line(f"[{'PASS' if outcome == 'PASSED' else outcome}] {name}")


@pytest.fixture
def store(tmp_path):
    from svcwatch.inventory import InventoryStore

    return InventoryStore(tmp_path / "data")


@pytest.fixture
def mem_store():
    from svcwatch.inventory import InventoryStore

    return InventoryStore()


@pytest.fixture
def kb():
    from svcwatch.classify import KnowledgeBase

    return KnowledgeBase()


@pytest.fixture(scope="session")
def transcript_bytes():
    from pathlib import Path

    return (Path(__file__).parent / "fixtures" / "tasklist_svc_sample.txt").read_bytes()
