import pytest

_RESULTS = pytest.StashKey[list]()


@pytest.fixture
def acceptance(request):
    """Record one acceptance line; it is echoed now and in the terminal summary."""
    store = request.config.stash.setdefault(_RESULTS, [])

    def record(number, title, ok, detail):
        line = f"criterion {number:>2} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
        store.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_RESULTS, [])
    if not store:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for _, line in sorted(store):
        terminalreporter.write_line(line)
