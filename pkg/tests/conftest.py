import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("numlab", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("numlab")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def spaces():
    from numlab import build_space
    cache = {}

    def get(text):
        if text not in cache:
            cache[text] = build_space(text)
        return cache[text]
    return get
