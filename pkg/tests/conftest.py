import os

import pytest

from coinvlat.pipeline import ClassContext, load_expectations

ACCEPTANCE_LINES: list[str] = []


def pytest_addoption(parser):
    parser.addoption("--deep", action="store_true", default=False, help="run the optional index-3/4 product searches")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--deep"):
        return
    skip = pytest.mark.skip(reason="needs --deep")
    for item in items:
        if "deep" in item.keywords:
            item.add_marker(skip)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    """A cold cache per session unless COINVLAT_TEST_CACHE points somewhere."""
    env = os.environ.get("COINVLAT_TEST_CACHE")
    return env or str(tmp_path_factory.mktemp("cache"))


@pytest.fixture(scope="session")
def expectations():
    return load_expectations()


@pytest.fixture(scope="session")
def contexts(cache_dir):
    made = {}

    def get(name):
        if name not in made:
            made[name] = ClassContext(name, cache_dir=cache_dir)
        return made[name]

    return get


@pytest.fixture(scope="session")
def acceptance():
    def record(criterion, label, ok, detail=""):
        mark = "PASS" if ok else "FAIL"
        ACCEPTANCE_LINES.append(f"[{mark}] criterion {criterion}: {label}" + (f" ({detail})" if detail else ""))
        return ok

    return record
