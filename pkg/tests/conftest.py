import re
from importlib import resources

import pytest
from hypothesis import settings

from polaromech.materials import _parse_table, lookup_material

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def table_with_gap_slope(c1_ev: float):
    """Built-in table with a different linear bandgap coefficient."""
    text = resources.files("polaromech.data").joinpath("materials.cfg").read_text()
    text = re.sub(r"bandgap_c1 = \S+ eV", f"bandgap_c1 = {c1_ev!r} eV", text)
    return _parse_table(text, f"test c1={c1_ev}")


@pytest.fixture(scope="session")
def gaas():
    return lookup_material("GaAs")


@pytest.fixture(scope="session")
def reference_exciton(gaas):
    from polaromech.exciton import QWSpec, self_consistent_exciton

    return self_consistent_exciton(QWSpec(8e-9, 0.05, gaas))


ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}


class Criterion:
    """Collects named checks; records one PASS/FAIL line and fails the test if any check failed."""

    def __init__(self, results: dict, number: int, title: str):
        self.results, self.number, self.title = results, number, title
        self.checks: list[tuple[str, bool]] = []

    def check(self, label: str, ok) -> bool:
        self.checks.append((label, bool(ok)))
        return bool(ok)

    def __enter__(self):
        return self

    def __exit__(self, kind, exc, tb):
        failed = [label for label, ok in self.checks if not ok]
        if exc is not None:
            failed.append(f"{type(exc).__name__}: {exc}")
        status = "PASS" if not failed else "FAIL"
        detail = "; ".join(label for label, _ in self.checks) if not failed else "failed: " + "; ".join(failed)
        line = f"criterion {self.number:2d} {status}  {self.title}  [{detail}]"
        self.results[self.number] = line
        print(line)
        if exc is None and failed:
            raise AssertionError(line)
        return False


@pytest.fixture
def criterion(request):
    results = request.config.stash[ACCEPTANCE]
    return lambda number, title: Criterion(results, number, title)


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(ACCEPTANCE, {})
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
