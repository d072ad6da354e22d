"""Graph generators and brute-force oracles shared by the test modules.

The oracles deliberately avoid the library's traversal code: distances come
from Floyd-Warshall on a dense matrix, shortest paths from explicit DFS
enumeration, and strong components from pairwise reachability.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from linknet.graph import DirectedGraph
from linknet.local_metrics import ALL_FEATURES, Feature

INF = math.inf


# -- generators ---------------------------------------------------------------


def random_digraph(n: int, p: float, rng: np.random.Generator) -> DirectedGraph:
    mask = rng.random((n, n)) < p
    np.fill_diagonal(mask, False)
    t, h = np.nonzero(mask)
    return DirectedGraph.from_edges(n, t, h)


def er_digraph(n: int, mean_out: float, seed: int) -> DirectedGraph:
    """Directed G(n, m) with m = n * mean_out sampled edges (duplicates collapse)."""
    rng = np.random.default_rng(seed)
    m = int(round(n * mean_out))
    # resample until enough distinct non-loop edges exist
    code = np.unique(rng.integers(0, n * n, size=int(m * 1.05) + 16))
    code = code[code // n != code % n]
    code = rng.permutation(code)[:m]
    return DirectedGraph.from_edges(n, code // n, code % n)


def heavy_tailed_digraph(n: int, exponent: float, seed: int, kmin: int = 1) -> DirectedGraph:
    """Configuration-style digraph with power-law in- and out-degree sequences.

    Degrees are drawn independently from a continuous Pareto tail with the
    given exponent (floored to integers >= kmin), stub totals are balanced,
    and out-stubs are matched to a random permutation of in-stubs. Self-loops
    and repeated pairs are discarded.
    """
    rng = np.random.default_rng(seed)

    def sequence():
        u = rng.random(n)
        return np.floor(kmin * (1.0 - u) ** (-1.0 / (exponent - 1.0))).astype(np.int64).clip(max=n - 1)

    out_deg, in_deg = sequence(), sequence()
    gap = int(out_deg.sum() - in_deg.sum())
    if gap > 0:
        np.add.at(in_deg, rng.integers(0, n, gap), 1)
    elif gap < 0:
        np.add.at(out_deg, rng.integers(0, n, -gap), 1)
    tails = np.repeat(np.arange(n), out_deg)
    heads = rng.permutation(np.repeat(np.arange(n), in_deg))
    return DirectedGraph.from_edges(n, tails, heads)


def cycle(n: int) -> DirectedGraph:
    return DirectedGraph.from_edges(n, range(n), [(i + 1) % n for i in range(n)])


def path(n: int) -> DirectedGraph:
    return DirectedGraph.from_edges(n, range(n - 1), range(1, n))


# -- oracles --------------------------------------------------------------------


def adjacency_lists(g: DirectedGraph) -> list[list[int]]:
    return [list(g.out_neighbors(i)) for i in range(g.n)]


def floyd_warshall(g: DirectedGraph) -> list[list[float]]:
    n = g.n
    d = [[0 if i == j else INF for j in range(n)] for i in range(n)]
    for i, outs in enumerate(adjacency_lists(g)):
        for j in outs:
            d[i][j] = 1
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            if dik == INF:
                continue
            di = d[i]
            for j in range(n):
                if dik + dk[j] < di[j]:
                    di[j] = dik + dk[j]
    return d


def fw_average_distance(g: DirectedGraph) -> tuple[Fraction | None, int]:
    d = floyd_warshall(g)
    finite = [d[i][j] for i in range(g.n) for j in range(g.n) if i != j and d[i][j] < INF]
    if not finite:
        return None, 0
    return Fraction(sum(finite), len(finite)), len(finite)


def fw_closeness(g: DirectedGraph) -> tuple[list[float], list[float]]:
    d = floyd_warshall(g)
    close, graph = [], []
    for i in range(g.n):
        reach = [d[i][j] for j in range(g.n) if j != i and d[i][j] < INF]
        close.append(1.0 / sum(reach) if reach else 0.0)
        graph.append(1.0 / max(reach) if reach else 0.0)
    return close, graph


def reachability_matrix(g: DirectedGraph) -> list[list[bool]]:
    d = floyd_warshall(g)
    return [[d[i][j] < INF for j in range(g.n)] for i in range(g.n)]


def brute_scc_partition(g: DirectedGraph) -> set[frozenset[int]]:
    r = reachability_matrix(g)
    return {frozenset(j for j in range(g.n) if r[i][j] and r[j][i]) for i in range(g.n)}


def all_shortest_paths(g: DirectedGraph, j: int, k: int, dist: int) -> list[tuple[int, ...]]:
    """Every directed j->k path with exactly ``dist`` edges (DFS enumeration)."""
    adj = adjacency_lists(g)
    found = []

    def dfs(node, trail):
        if len(trail) - 1 == dist:
            if node == k:
                found.append(tuple(trail))
            return
        for w in adj[node]:
            if w not in trail:
                trail.append(w)
                dfs(w, trail)
                trail.pop()

    dfs(j, [j])
    return found


def brute_betweenness_stress(g: DirectedGraph) -> tuple[list[Fraction], list[int]]:
    d = floyd_warshall(g)
    between = [Fraction(0)] * g.n
    stress = [0] * g.n
    for j, k in itertools.permutations(range(g.n), 2):
        if d[j][k] == INF:
            continue
        paths = all_shortest_paths(g, j, k, int(d[j][k]))
        sigma = len(paths)
        through = [0] * g.n
        for p in paths:
            for i in p[1:-1]:
                through[i] += 1
        for i in range(g.n):
            if through[i]:
                between[i] += Fraction(through[i], sigma)
                stress[i] += through[i]
    return between, stress


def pearson_two_pass(alpha, beta) -> float | None:
    m = len(alpha)
    mu_a = sum(alpha) / m
    mu_b = sum(beta) / m
    va = sum((a - mu_a) ** 2 for a in alpha) / m
    vb = sum((b - mu_b) ** 2 for b in beta) / m
    if va == 0 or vb == 0:
        return None
    cov = sum((a - mu_a) * (b - mu_b) for a, b in zip(alpha, beta)) / m
    return cov / math.sqrt(va * vb)


def edge_degree_sequences(g: DirectedGraph, tail_end: str, head_end: str):
    adj = adjacency_lists(g)
    indeg = [0] * g.n
    for outs in adj:
        for j in outs:
            indeg[j] += 1
    deg = {"out": [len(o) for o in adj], "in": indeg}
    alpha, beta = [], []
    for i, outs in enumerate(adj):
        for j in outs:
            alpha.append(deg[tail_end][i])
            beta.append(deg[head_end][j])
    return alpha, beta


def dense_power_eigvec(m: np.ndarray, start: np.ndarray, iters: int = 200_000, tol: float = 1e-15) -> np.ndarray:
    v = start / np.linalg.norm(start)
    for _ in range(iters):
        w = m @ v
        norm = np.linalg.norm(w)
        if norm == 0:
            return v
        w /= norm
        if np.abs(w - v).max() <= tol:
            return w
        v = w
    return v


def vote_oracle(candidates, feature_values, top=10, quorum=6) -> set[int]:
    """Tally top-``top`` appearances over every feature list, one candidate at a time."""
    tally = {c: 0 for c in candidates}
    for values in feature_values:
        ranked = sorted(candidates, key=lambda c: (-values[c], c))
        for c in ranked[:top]:
            tally[c] += 1
    return {c for c, votes in tally.items() if votes >= quorum}


def floyd_warshall_np(g: DirectedGraph) -> np.ndarray:
    """Dense min-plus Floyd-Warshall; ``inf`` marks unreachable pairs."""
    n = g.n
    d = np.full((n, n), np.inf)
    for i, outs in enumerate(adjacency_lists(g)):
        d[i, outs] = 1.0
    np.fill_diagonal(d, 0.0)
    for k in range(n):
        np.minimum(d, d[:, k, None] + d[None, k, :], out=d)
    return d


def brute_triangles_and_triples(g: DirectedGraph) -> tuple[int, int]:
    """Undirected triangles and two-edge paths by enumerating node triples."""
    nbr = [set() for _ in range(g.n)]
    for i, outs in enumerate(adjacency_lists(g)):
        for j in outs:
            nbr[i].add(j)
            nbr[j].add(i)
    tri = paths = 0
    for a, b, c in itertools.combinations(range(g.n), 3):
        e = (b in nbr[a]) + (c in nbr[b]) + (c in nbr[a])
        if e == 3:
            tri += 1
            paths += 3
        elif e == 2:
            paths += 1
    return tri, paths


# -- planted search instance ---------------------------------------------------

_WORDS = (
    "amber basalt cobalt dune ember fjord garnet harbor indigo juniper kelp lagoon "
    "marble nectar onyx prairie quartz reef sierra tundra umber violet willow yarrow"
).split()


def planted_search_instance(seed: int, pages: int = 600, survivors: int = 14, small_sizes=(0, 3, 5, 8, 10, 10)):
    """Corpus records, keywords and feature vectors with a known relevant set per keyword.

    Surviving keywords own disjoint candidate sets of 38-40 pages. In each, a
    planted set P (6-10 pages) sits on top of the designated feature and of six
    more features; the spare top-ten slots of those seven lists go to disjoint
    blocks of other candidates, and the remaining three features are random.
    Non-planted candidates therefore collect at most four votes while planted
    ones collect at least seven, so the relevant set is exactly P and the
    designated feature lists it first.
    """
    rng = np.random.default_rng(seed)
    designated = Feature.BETWEENNESS
    planted_feats = [designated] + [f for f in ALL_FEATURES if f is not designated][:6]
    values = {f: rng.random(pages) for f in ALL_FEATURES}
    texts = [[] for _ in range(pages)]
    keywords, planted, sizes = [], {}, {}
    perm = rng.permutation(pages)
    cursor = 0
    for k in range(survivors):
        kw = f"topic {_WORDS[k]}"
        size = int(rng.integers(38, 41))
        members = np.sort(perm[cursor : cursor + size])
        cursor += size
        p_size = int(rng.integers(6, 11))
        chosen = rng.permutation(members)
        top, rest = chosen[:p_size], chosen[p_size:]
        spare = 10 - p_size
        for j, f in enumerate(planted_feats):
            values[f][top] = 10 + rng.random(p_size)
            block = rest[j * spare : (j + 1) * spare]
            values[f][block] = 5 + rng.random(len(block))
        for i in members.tolist():
            texts[i].append(kw)
        keywords.append(kw)
        planted[kw] = frozenset(top.tolist())
        sizes[kw] = size
    for k, size in enumerate(small_sizes, start=survivors):
        kw = f"topic {_WORDS[k]}"
        for i in rng.choice(pages, size=size, replace=False).tolist():
            texts[i].append(kw)
        keywords.append(kw)
        sizes[kw] = size
    order = rng.permutation(len(keywords))
    keywords = [keywords[i] for i in order]
    records = [
        {"id": f"p{i:04d}", "title": f"Page {i}", "text": " filler ".join(texts[i]) or "filler", "links": []}
        for i in range(pages)
    ]
    return records, keywords, values, designated, planted, sizes
