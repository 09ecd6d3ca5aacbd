import itertools
import os

import pytest
from hypothesis import settings

from eqsmooth.complex import SimplicialComplex

settings.register_profile("default", max_examples=40, deadline=None)
settings.register_profile("ci", max_examples=100, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def boundary(n):
    """Boundary of the n-simplex on the standard basis of R^(n+1)."""
    pts = [[int(i == j) for j in range(n + 1)] for i in range(n + 1)]
    return SimplicialComplex(pts, itertools.combinations(range(n + 1), n))


def simplex(n):
    pts = [[int(i == j) for j in range(n)] for i in range(-1, n)]
    return SimplicialComplex(pts, [tuple(range(n + 1))])


def cycle(m):
    return SimplicialComplex.from_abstract([(i, (i + 1) % m) for i in range(m)])


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def record(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        lines.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
