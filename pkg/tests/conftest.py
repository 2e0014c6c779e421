import sys
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from helpers import load_e1  # noqa: E402

from homnc.model import Cache, Instance, User  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def e1():
    return load_e1()


@st.composite
def instances(draw, max_caches=3, max_users=4, max_contents=4, max_cap=3, min_contents=1):
    C = draw(st.integers(1, max_caches))
    n = draw(st.integers(min_contents, max_contents))
    cache_ids = [f"c{i}" for i in range(C)]
    contents = [f"s{j}" for j in range(n)]
    caches = tuple(Cache(c, draw(st.integers(0, max_cap))) for c in cache_ids)
    users = []
    for k in range(draw(st.integers(0, max_users))):
        nbr = frozenset(draw(st.lists(st.sampled_from(cache_ids), max_size=C)))
        weight = Fraction(draw(st.integers(0, 6)), draw(st.integers(1, 4)))
        reqs = {}
        if contents:
            masses = draw(st.lists(st.integers(0, 5), min_size=n, max_size=n))
            if sum(masses) == 0:
                masses[0] = 1
            reqs = {s: Fraction(m, sum(masses)) for s, m in zip(contents, masses) if m}
        users.append(User(f"u{k}", weight, nbr, reqs))
    target = Fraction(draw(st.integers(0, 10)), draw(st.integers(1, 3)))
    return Instance(caches, tuple(users), tuple(contents), target)
