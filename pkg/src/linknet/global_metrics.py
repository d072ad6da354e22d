"""Whole-graph statistics: degree means, giant component, distances, clustering, assortativity.

Statistics that are undefined for a graph (no edges, zero variance, no finite
distances) come back as ``None`` rather than NaN.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from linknet.graph import DirectedGraph, bfs_batch, map_ordered, scc, source_batches

DEGREE_ENDS = ("out", "in")
ASSORTATIVITY_PAIRS = (("out", "in"), ("in", "out"), ("out", "out"), ("in", "in"))


@dataclass
class GlobalReport:
    n: int
    m: int
    mean_in_degree: float
    mean_degree: float
    antiparallel_fraction: float | None
    gscc_fraction: float
    avg_distance: float | None
    finite_pair_count: int
    clustering: float
    triangle_count: int
    path_triple_count: int
    random_clustering: float | None
    second_moment: float
    assortativity: dict[str, float | None] = field(default_factory=dict)

    def as_row(self) -> dict[str, object]:
        row = {k: v for k, v in self.__dict__.items() if k != "assortativity"}
        for key, value in self.assortativity.items():
            row["r_" + key.replace("-", "_")] = value
        return row


def mean_degrees(g: DirectedGraph) -> tuple[float, float, float | None]:
    """Mean in-degree, mean undirected degree and the antiparallel share ``2*din/d - 1``."""
    if g.n == 0:
        raise ValueError("mean degrees need at least one node")
    mean_in = g.m / g.n
    total = int(g.degree.sum())
    mean_deg = total / g.n
    if g.m == 0:
        return mean_in, mean_deg, None
    # 2*(m/n) / (total/n) - 1, kept as a ratio of integers
    return mean_in, mean_deg, (2 * g.m - total) / total


def gscc_fraction(g: DirectedGraph) -> float:
    if g.n == 0:
        raise ValueError("empty graph")
    return scc(g).largest_size / g.n


def distance_totals(g: DirectedGraph, threads: int | None = None) -> tuple[int, int]:
    """Sum of all finite positive distances and the number of such ordered pairs."""

    def work(batch):
        dist = bfs_batch(g, batch).dist
        finite = dist > 0
        return int(dist[finite].sum(dtype=np.int64)), int(finite.sum())

    total = pairs = 0
    for s, c in map_ordered(work, source_batches(g.n), threads):
        total += s
        pairs += c
    return total, pairs


def avg_distance(g: DirectedGraph, threads: int | None = None) -> tuple[float | None, int]:
    """Mean distance over ordered pairs joined by a directed path, and the pair count."""
    total, pairs = distance_totals(g, threads)
    return (total / pairs if pairs else None), pairs


def undirected(g: DirectedGraph) -> sp.csr_matrix:
    a = g.adjacency
    s = (a + a.T).tocsr()
    s.data[:] = 1
    return s


def triangle_count(g: DirectedGraph) -> int:
    """Triangles of the undirected projection, each counted once."""
    s = undirected(g)
    # orient every edge from lower to higher (degree, index) rank
    deg = g.degree
    rank = np.empty(g.n, dtype=np.int64)
    rank[np.lexsort((np.arange(g.n), deg))] = np.arange(g.n)
    coo = s.tocoo()
    fwd = rank[coo.row] < rank[coo.col]
    ones = np.ones(int(fwd.sum()), dtype=np.int64)
    d = sp.csr_matrix((ones, (coo.row[fwd], coo.col[fwd])), shape=s.shape)
    return int((d @ d).multiply(d).sum())


def clustering(g: DirectedGraph) -> tuple[float, int, int, float | None, float]:
    """Returns ``(C, t, T, C_random, second_moment)`` on the undirected projection."""
    deg = g.degree.astype(np.int64)
    t = triangle_count(g)
    paths = int((deg * (deg - 1) // 2).sum())
    c = 3 * t / paths if paths else 0.0
    n = g.n
    second = float((deg * deg).sum()) / n
    mean = float(deg.sum()) / n
    c_random = (second - mean) ** 2 / (n * mean**3) if mean > 0 else None
    return c, t, paths, c_random, second


def _degree_of(g: DirectedGraph, end: str) -> np.ndarray:
    if end == "out":
        return g.out_degree
    if end == "in":
        return g.in_degree
    raise ValueError(f"degree end must be 'in' or 'out', got {end!r}")


def assortativity(g: DirectedGraph, tail_end: str, head_end: str) -> float | None:
    """Pearson correlation over edges of a tail-node degree against a head-node degree."""
    alpha_deg, beta_deg = _degree_of(g, tail_end), _degree_of(g, head_end)
    m = g.m
    if m == 0:
        return None
    tails, heads = g.edges()
    a = alpha_deg[tails].astype(np.int64)
    b = beta_deg[heads].astype(np.int64)
    # exact integer moments; python ints avoid overflow of the products
    sa, sb = int(a.sum()), int(b.sum())
    saa, sbb, sab = int((a * a).sum()), int((b * b).sum()), int((a * b).sum())
    var_a = m * saa - sa * sa
    var_b = m * sbb - sb * sb
    if var_a == 0 or var_b == 0:
        return None
    r = (m * sab - sa * sb) / math.sqrt(var_a * var_b)
    return max(-1.0, min(1.0, r))


def global_report(g: DirectedGraph, threads: int | None = None) -> GlobalReport:
    mean_in, mean_deg, frac = mean_degrees(g)
    ell, pairs = avg_distance(g, threads)
    c, t, paths, c_random, second = clustering(g)
    assort = {f"{a}-{b}": assortativity(g, a, b) for a, b in ASSORTATIVITY_PAIRS}
    return GlobalReport(
        n=g.n,
        m=g.m,
        mean_in_degree=mean_in,
        mean_degree=mean_deg,
        antiparallel_fraction=frac,
        gscc_fraction=gscc_fraction(g),
        avg_distance=ell,
        finite_pair_count=pairs,
        clustering=c,
        triangle_count=t,
        path_triple_count=paths,
        random_clustering=c_random,
        second_moment=second,
        assortativity=assort,
    )
