import pytest

from malnorm.stallings import build_subgroup_graph
from malnorm.words import parse_word

ACCEPTANCE_LINES: list[str] = []


def W(text: str, rank: int = 2):
    return parse_word(text, rank)


def G(*gens: str, rank: int = 2):
    return build_subgroup_graph([parse_word(g, rank) for g in gens], rank)


@pytest.fixture
def record_criterion():
    def record(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE_LINES.append(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
