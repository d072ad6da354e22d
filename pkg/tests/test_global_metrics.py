import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import (
    brute_triangles_and_triples,
    cycle,
    edge_degree_sequences,
    floyd_warshall_np,
    fw_average_distance,
    path,
    pearson_two_pass,
    random_digraph,
)
from linknet.global_metrics import (
    ASSORTATIVITY_PAIRS,
    assortativity,
    avg_distance,
    clustering,
    global_report,
    gscc_fraction,
    mean_degrees,
)
from linknet.graph import DirectedGraph

two_cycle = DirectedGraph.from_edges(2, [0, 1], [1, 0])


def pendant_cycle():
    return DirectedGraph.from_edges(4, [0, 1, 2, 2], [1, 2, 0, 3])


def star(leaves):
    return DirectedGraph.from_edges(leaves + 1, [0] * leaves, range(1, leaves + 1))


def clique(k):
    t, h = zip(*[(i, j) for i in range(k) for j in range(k) if i != j])
    return DirectedGraph.from_edges(k, t, h)


@st.composite
def graphs(draw, max_n=12):
    n = draw(st.integers(1, max_n))
    p = draw(st.sampled_from([0.1, 0.2, 0.5, 0.8]))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_digraph(n, p, np.random.default_rng(seed))


def test_mean_degrees_examples():
    assert mean_degrees(two_cycle) == (1.0, 1.0, 1.0)
    din, d, frac = mean_degrees(path(3))
    assert din == pytest.approx(2 / 3)
    assert d == pytest.approx(4 / 3)
    assert frac == 0.0


def test_mean_degrees_undefined_fraction_without_edges():
    assert mean_degrees(DirectedGraph.from_edges(3, [], []))[2] is None


def test_mean_degrees_empty_graph():
    with pytest.raises(ValueError):
        mean_degrees(DirectedGraph.from_edges(0, [], []))


def test_gscc_fraction_examples():
    assert gscc_fraction(pendant_cycle()) == 0.75
    assert gscc_fraction(path(3)) == pytest.approx(1 / 3)
    assert gscc_fraction(cycle(3)) == 1.0


def test_avg_distance_examples():
    ell, pairs = avg_distance(path(3))
    assert (pairs, ell) == (3, pytest.approx(4 / 3))
    assert avg_distance(cycle(3)) == (1.5, 6)
    assert avg_distance(DirectedGraph.from_edges(3, [], [])) == (None, 0)


def test_avg_distance_200_node_oracle():
    g = random_digraph(200, 0.01, np.random.default_rng(7))
    d = floyd_warshall_np(g)
    off = ~np.eye(g.n, dtype=bool) & np.isfinite(d)
    total, pairs = int(d[off].sum()), int(off.sum())
    ell, n_pairs = avg_distance(g)
    assert n_pairs == pairs
    assert ell == total / pairs


@settings(max_examples=80, deadline=None)
@given(graphs(max_n=8))
def test_avg_distance_small_graph_oracle(g):
    exact, pairs = fw_average_distance(g)
    ell, n_pairs = avg_distance(g)
    assert n_pairs == pairs
    assert (ell is None) == (exact is None)
    if exact is not None:
        assert Fraction(ell).limit_denominator(10**6) == exact


def test_clustering_examples():
    c, t, paths, _, _ = clustering(cycle(3))
    assert (c, t, paths) == (1.0, 1, 3)

    c, t, paths, c_rand, second = clustering(path(3))
    assert c == 0.0
    assert second == 2.0
    assert c_rand == pytest.approx(1 / 16, abs=1e-15)

    c, t, paths, _, _ = clustering(star(3))
    assert (c, t, paths) == (0.0, 0, 3)


def test_clustering_without_edges():
    c, t, paths, c_rand, second = clustering(DirectedGraph.from_edges(4, [], []))
    assert (c, t, paths, c_rand, second) == (0.0, 0, 0, None, 0.0)


@settings(max_examples=80, deadline=None)
@given(graphs())
def test_clustering_matches_triple_enumeration(g):
    tri, paths = brute_triangles_and_triples(g)
    c, t, big_t, _, _ = clustering(g)
    assert (t, big_t) == (tri, paths)
    assert c == (3 * tri / paths if paths else 0.0)


@pytest.mark.parametrize("k", [2, 3, 5, 8])
def test_symmetric_clique(k):
    g = clique(k)
    assert gscc_fraction(g) == 1.0
    assert clustering(g)[0] == (1.0 if k >= 3 else 0.0)
    assert mean_degrees(g)[2] == 1.0


@settings(max_examples=80, deadline=None)
@given(graphs(max_n=15))
def test_degree_bounds_and_antiparallel_count(g):
    din, d, frac = mean_degrees(g)
    assert din <= d + 1e-12 and d <= 2 * din + 1e-12
    edges = set(zip(*map(list, g.edges())))
    anti_pairs = sum(1 for (i, j) in edges if (j, i) in edges) // 2
    total_degree = int(g.degree.sum())
    if g.m:
        assert frac == pytest.approx(2 * anti_pairs / total_degree, abs=1e-15)


def test_assortativity_degenerate_cases():
    assert assortativity(path(3), "out", "in") is None
    for a, b in ASSORTATIVITY_PAIRS:
        assert assortativity(cycle(5), a, b) is None
        assert assortativity(DirectedGraph.from_edges(3, [], []), a, b) is None


def test_assortativity_bad_end():
    with pytest.raises(ValueError):
        assortativity(path(3), "sideways", "in")


@pytest.mark.parametrize("seed", range(5))
def test_assortativity_pearson_oracle(seed):
    g = random_digraph(30, 0.15, np.random.default_rng(seed))
    for a, b in ASSORTATIVITY_PAIRS:
        want = pearson_two_pass(*edge_degree_sequences(g, a, b))
        got = assortativity(g, a, b)
        assert got == pytest.approx(want, abs=1e-12)
        assert -1.0 <= got <= 1.0


def test_global_report_fields():
    r = global_report(pendant_cycle())
    assert (r.n, r.m) == (4, 4)
    assert r.gscc_fraction == 0.75
    row = r.as_row()
    assert set(["r_out_in", "r_in_out", "r_out_out", "r_in_in"]) <= set(row)
    assert math.isclose(row["mean_in_degree"], 1.0)
