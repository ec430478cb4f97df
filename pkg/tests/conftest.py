import random

import pytest
from hypothesis import settings

from l2lab.groups import folner_set

settings.register_profile("l2lab", max_examples=60, deadline=None)
settings.load_profile("l2lab")


def random_connected_set(spec, size, rng):
    """Grow a connected set from the identity by random Cayley-graph steps."""
    elems = {spec.identity}
    frontier = [spec.identity]
    while len(elems) < size:
        g = rng.choice(frontier)
        h = rng.choice(spec.neighbors(g))
        if h not in elems:
            elems.add(h)
            frontier.append(h)
    return folner_set(spec, elems, label=f"random n={size}")


@pytest.fixture
def rng():
    return random.Random(20240611)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
