import pytest

CRITERIA = range(1, 11)
_STORE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_STORE] = {}


@pytest.fixture
def criterion(request):
    """``criterion(k, ok, detail)`` records one item of acceptance criterion ``k``."""
    store = request.config.stash[_STORE]

    def record(k, ok, detail=""):
        store.setdefault(k, []).append((bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    store = config.stash[_STORE]
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for k in CRITERIA:
        items = store.get(k)
        if items is None:
            terminalreporter.write_line(f"criterion {k:2d}: NOT RUN")
            continue
        ok = all(o for o, _ in items)
        details = "; ".join(d for o, d in items if d and (ok or not o))
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {details}")
