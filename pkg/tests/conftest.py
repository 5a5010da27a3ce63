import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

from erode.reference import reference_model  # noqa: E402
from erode.store import ExperimentStore, extract_dataset, parse_csv, seed_csv_text  # noqa: E402

settings.register_profile("repo", max_examples=100, derandomize=True, deadline=None)
settings.load_profile("repo")


@pytest.fixture
def table1_text():
    return seed_csv_text()


@pytest.fixture
def table1_records(table1_text):
    return parse_csv(table1_text)


@pytest.fixture
def table1_store(table1_records):
    return ExperimentStore(table1_records)


@pytest.fixture
def table1_dataset(table1_store):
    return extract_dataset(table1_store.records)


@pytest.fixture(params=[1, 2, 3], ids=["linear", "quadratic", "cubic"])
def reference(request):
    return reference_model(request.param)


# ---- one summary line per acceptance criterion

_criteria: dict[str, dict] = {}
CRITERION_6_BUDGET = 30.0


def _criterion_of(nodeid):
    if "test_acceptance.py" not in nodeid:
        return None
    name = nodeid.split("::")[-1]
    if not name.startswith("test_criterion_"):
        return None
    return name.split("_")[2]


def pytest_runtest_logreport(report):
    c = _criterion_of(report.nodeid)
    if c is None:
        return
    entry = _criteria.setdefault(c, {"ok": True, "seconds": 0.0, "tests": 0})
    if report.when == "call":
        entry["seconds"] += report.duration
        entry["tests"] += 1
    if report.failed:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(_criteria, key=int):
        e = _criteria[c]
        ok = e["ok"] and (c != "6" or e["seconds"] < CRITERION_6_BUDGET)
        terminalreporter.write_line(
            f"criterion {c}: {'PASS' if ok else 'FAIL'} ({e['tests']} tests, {e['seconds']:.2f} s)"
        )


def pytest_sessionfinish(session, exitstatus):
    e = _criteria.get("6")
    if e and e["seconds"] >= CRITERION_6_BUDGET and exitstatus == 0:
        session.exitstatus = 1
