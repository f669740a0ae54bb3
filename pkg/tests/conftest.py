import numpy as np
import pytest

_ACCEPTANCE: list[str] = []


class AcceptanceLog:
    """Collects one PASS/FAIL line per acceptance criterion."""

    def record(self, number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok


@pytest.fixture
def acceptance() -> AcceptanceLog:
    return AcceptanceLog()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
