import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from contactflow.charts import flat_unit_cotangent_torus, standard_heisenberg

settings.register_profile("contactflow", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("contactflow")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def heis():
    return standard_heisenberg(1, 2.0)


@pytest.fixture
def heis2():
    return standard_heisenberg(2, 2.0)


@pytest.fixture
def torus():
    return flat_unit_cotangent_torus()


# -- acceptance reporting ----------------------------------------------------------------

ACCEPTANCE_LINES: dict[int, str] = {}


class Criterion:
    """Context manager recording one pass/fail line per acceptance criterion.

    The body fills ``checks`` with (description, passed) pairs; the line is
    written even when the body raises, and the runtime budget is enforced.
    """

    def __init__(self, number: int, title: str, budget: float):
        self.number, self.title, self.budget = number, title, budget
        self.checks: list[tuple[str, bool]] = []

    def check(self, description: str, passed) -> None:
        self.checks.append((description, bool(passed)))

    def __enter__(self):
        import time

        self._start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        import time

        elapsed = time.perf_counter() - self._start
        self.check(f"runtime {elapsed:.1f}s < {self.budget:g}s", elapsed < self.budget)
        if exc is not None:
            self.check(f"raised {exc_type.__name__}: {exc}", False)
        passed = all(ok for _, ok in self.checks)
        failed = [d for d, ok in self.checks if not ok]
        line = (f"criterion {self.number:>2} {'PASS' if passed else 'FAIL'}  {self.title}"
                + (f"  [failed: {'; '.join(failed)}]" if failed else f"  [{self.checks[-1][0]}]"))
        ACCEPTANCE_LINES[self.number] = line
        print(line)
        if exc is None:
            assert passed, "\n".join(f"{'ok  ' if ok else 'FAIL'} {d}" for d, ok in self.checks)
        return False


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
