import itertools
import random
import sys

import pytest

from ppts.graph import PartitionedGraph, generate_partitioned_graph
from ppts.paillier import keygen

# small keys keep protocol tests fast; crypto tests use real sizes explicitly
FAST_BITS = 128


@pytest.fixture(scope="session")
def keys256():
    return keygen(256, random.Random(2024))


@pytest.fixture(scope="session")
def keys_fast():
    return keygen(FAST_BITS, random.Random(7))


def triangle(m: int = 3) -> PartitionedGraph:
    owner = (0, 1, 2) if m == 3 else (0, 0, 1)
    return PartitionedGraph(3, m, owner, ((0, 1), (0, 2), (1, 2)))


def complete_graph(n: int, m: int) -> PartitionedGraph:
    return generate_partitioned_graph(n, 1.0, m, seed=0)


def brute_force_colorable(g: PartitionedGraph, k: int) -> bool:
    for colors in itertools.product(range(k), repeat=g.n_vertices):
        if all(colors[u] != colors[v] for u, v in g.edges):
            return True
    return False


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    lines = getattr(acceptance, "LINES", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(lines):
        for line in lines[key]:
            terminalreporter.write_line(line)
