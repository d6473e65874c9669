from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def mini_path():
    return FIXTURES / "mini_pool.jsonl"


@pytest.fixture
def mini(mini_path):
    from probectl.pool import load_pools

    return load_pools(mini_path)


ACCEPTANCE: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, note in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}{'  (' + note + ')' if note else ''}")
