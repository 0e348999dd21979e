import io
import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from ppts.errors import ParameterError
from ppts.graph import (EXAMPLE_CONFLICTED_COLORING, EXAMPLE_PROPER_COLORING, Coloring,
                        PartitionedGraph, conflict, count_conflicts, example_graph,
                        generate_partitioned_graph, hot, is_proper_k_coloring, parse_graph,
                        total_conflicts, write_graph)

from conftest import triangle


def test_generator_complete_graph_blocks():
    g = generate_partitioned_graph(7, 1.0, 3, seed=11)
    assert len(g.edges) == 21
    assert g.owner == (0, 0, 0, 1, 1, 2, 2)


def test_generator_edgeless_all_inner():
    g = generate_partitioned_graph(10, 0.0, 2, seed=5)
    assert g.edges == ()
    assert g.border_vertices == frozenset()


@pytest.mark.parametrize("seed", range(5))
def test_generator_edge_count_concentration(seed):
    g = generate_partitioned_graph(100, 0.1, 10, seed=seed)
    pairs = math.comb(100, 2)
    sigma = math.sqrt(pairs * 0.1 * 0.9)
    assert abs(len(g.edges) - 495) <= 3 * sigma


def test_generator_deterministic_serialization():
    a = generate_partitioned_graph(40, 0.2, 4, seed=9).to_text()
    b = generate_partitioned_graph(40, 0.2, 4, seed=9).to_text()
    assert a == b
    assert a != generate_partitioned_graph(40, 0.2, 4, seed=10).to_text()


@pytest.mark.parametrize("args", [(5, 1.5, 2), (5, -0.1, 2), (3, 0.5, 4), (5, float("nan"), 2)])
def test_generator_rejects_bad_parameters(args):
    n, d, m = args
    with pytest.raises(ParameterError):
        generate_partitioned_graph(n, d, m, seed=0)


def test_graph_validation():
    with pytest.raises(ParameterError):
        PartitionedGraph(2, 1, (0, 0), ((0, 0),))
    with pytest.raises(ParameterError):
        PartitionedGraph(2, 1, (0, 0), ((0, 1), (1, 0)))
    with pytest.raises(ParameterError):
        PartitionedGraph(2, 1, (0, 3), ())
    with pytest.raises(ParameterError):
        PartitionedGraph(2, 1, (0, 0), ((0, 2),))


def test_edge_and_vertex_classes_consistent():
    g = generate_partitioned_graph(30, 0.2, 3, seed=1)
    for e in g.edges:
        assert (e in g.internal_edges) == (g.owner[e[0]] == g.owner[e[1]])
        assert (e in g.external_edges) != (e in g.internal_edges)
    border = {v for e in g.external_edges for v in e}
    assert g.border_vertices == border


def test_conflict_basic_and_exhaustive():
    assert conflict(hot(0, 3), hot(0, 3)) == 1
    assert conflict(hot(0, 3), hot(1, 3)) == 0
    pairs = [(a, b) for a in range(4) for b in range(4) if conflict(hot(a, 4), hot(b, 4))]
    assert pairs == [(0, 0), (1, 1), (2, 2), (3, 3)]
    with pytest.raises(ParameterError):
        conflict(hot(0, 3), hot(0, 4))


@given(st.integers(1, 6).flatmap(lambda k: st.tuples(st.just(k), st.integers(0, k - 1),
                                                      st.integers(0, k - 1))))
def test_conflict_symmetric(args):
    k, a, b = args
    assert conflict(hot(a, k), hot(b, k)) == conflict(hot(b, k), hot(a, k))
    assert sum(hot(a, k).bits()) == 1


def test_example_graph_structure():
    g = example_graph()
    assert g.n_vertices == 7 and g.m_parties == 3
    # 1-based labels in the file: external 2-4, 3-6, 4-7, 5-6
    assert set(g.external_edges) == {(1, 3), (2, 5), (3, 6), (4, 5)}
    assert 0 not in g.border_vertices


def test_example_conflicted_coloring_total_three():
    report = total_conflicts(example_graph(), EXAMPLE_CONFLICTED_COLORING)
    assert report.total == 3
    assert report.total == sum(report.per_edge.values())


def test_example_proper_coloring():
    assert is_proper_k_coloring(example_graph(), EXAMPLE_PROPER_COLORING, 3)


def test_distinct_colors_no_conflict():
    g = generate_partitioned_graph(12, 0.5, 3, seed=2)
    assert total_conflicts(g, Coloring(12, tuple(range(12)))).total == 0


def test_random_small_graph_recount():
    rng = random.Random(4)
    g = generate_partitioned_graph(8, 0.5, 2, seed=4)
    x = Coloring.random(8, 2, rng)
    recount = 0
    for u in range(8):
        for v in range(u + 1, 8):
            if (u, v) in set(g.edges) and x.colors[u] == x.colors[v]:
                recount += 1
    assert total_conflicts(g, x).total == recount == count_conflicts(g.edges, x.colors)


def test_monochrome_not_proper():
    g = generate_partitioned_graph(6, 0.6, 2, seed=3)
    assert g.edges
    assert not is_proper_k_coloring(g, Coloring(3, (1,) * 6), 3)


def test_triangle_two_colorings_all_fail():
    g = triangle()
    results = [is_proper_k_coloring(g, Coloring(2, c), 2)
               for c in itertools.product(range(2), repeat=3)]
    assert len(results) == 8 and not any(results)


def test_partial_coloring_rejected():
    g = triangle()
    with pytest.raises(ParameterError):
        total_conflicts(g, Coloring(3, (0, 1)))
    with pytest.raises(ParameterError):
        Coloring.from_mapping(3, {0: 1, 2: 0}, n_vertices=3)


def test_wrong_k_is_not_proper():
    assert not is_proper_k_coloring(example_graph(), Coloring(4, EXAMPLE_PROPER_COLORING.colors), 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 12), st.floats(0, 1), st.integers(1, 4), st.integers(0, 10 ** 6),
       st.integers(1, 4))
def test_partition_identity_and_zero_iff_proper(n, density, m, seed, k):
    m = min(m, n)
    g = generate_partitioned_graph(n, density, m, seed=seed)
    x = Coloring.random(n, k, random.Random(seed))
    report = total_conflicts(g, x)
    internal = sum(count_conflicts(g.internal_edges_of(p), x.colors) for p in range(m))
    external = count_conflicts(g.external_edges, x.colors)
    assert report.total == internal + external >= 0
    assert (report.total == 0) == is_proper_k_coloring(g, x, k)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 15), st.floats(0, 1), st.integers(1, 5), st.integers(0, 10 ** 6))
def test_file_round_trip(n, density, m, seed):
    m = min(m, n)
    g = generate_partitioned_graph(n, density, m, seed=seed)
    buf = io.StringIO()
    write_graph(g, buf, "round trip")
    assert parse_graph(buf.getvalue()) == g


def test_example_file_round_trip():
    g = example_graph()
    assert parse_graph(g.to_text()) == g


@pytest.mark.parametrize("text", [
    "o 1 0\np dgc 1 1 0\n",
    "p dgc 2 1 0\no 1 0\n",
    "p dgc 2 1 1\no 1 0\no 2 0\n",
    "p dgc 1 1 0\np dgc 1 1 0\no 1 0\n",
    "p dgc 1 1 0\nx 1\n",
])
def test_parse_errors(text):
    with pytest.raises(ParameterError):
        parse_graph(text)
