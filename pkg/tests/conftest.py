import os
import random

import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def cache_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("zkpark-cache")
    os.environ["ZKPARK_CACHE_DIR"] = str(path)
    return str(path)


@pytest.fixture(scope="session")
def keys(cache_dir):
    """keys(depth) -> (pk, vk), built once per session."""
    from zkpark.params import keys_for_depth

    def get(depth):
        return keys_for_depth(depth, cache_dir)

    return get


@pytest.fixture(scope="session")
def acceptance():
    """acceptance(n, ok, detail) records one pass/fail line and returns ok."""

    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record


@pytest.fixture
def rng():
    return random.Random(0x5EED)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
