import pytest

from gasketstats import kernels

ACCEPTANCE_LINES = []


@pytest.fixture(params=sorted(kernels.available()))
def backend(request, monkeypatch):
    """Run the test once per importable kernel backend."""
    monkeypatch.setattr(kernels, "impl", kernels.available()[request.param])
    return request.param


@pytest.fixture
def criterion(request):
    """Record a one-line pass/fail verdict for an acceptance criterion."""
    state = {}

    def record(label, detail=""):
        state["label"] = label
        state["detail"] = detail

    yield record
    rep = getattr(request.node, "rep_call", None)
    if "label" in state:
        ok = rep is not None and rep.passed
        ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] {state['label']} {state['detail']}".rstrip())


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
