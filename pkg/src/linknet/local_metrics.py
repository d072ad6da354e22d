"""Per-node features and their complementary cumulative distributions.

Ten features are supported: in-degree, out-degree, degree, betweenness,
stress, closeness, graph centrality, hub, authority and page rank.

The four shortest-path centralities share one sweep of breadth-first
searches, run in batches of sources. For each batch the shortest-path
counts are pushed forward level by level, and dependencies are pulled back
from the deepest level, as in Brandes' accumulation. Stress accumulates
integer path counts, so it is exact as long as counts fit in machine words.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from linknet.graph import DirectedGraph, bfs_batch, map_ordered, source_batches

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITERS = 100_000
DAMPING = 0.85

# cap on batch_size * (n + m) so a batch of expanded edge lists stays small
_CENTRALITY_CELLS = 1 << 21


class Feature(enum.Enum):
    IN_DEGREE = "indegree"
    OUT_DEGREE = "outdegree"
    DEGREE = "degree"
    BETWEENNESS = "betweenness"
    STRESS = "stress"
    CLOSENESS = "closeness"
    GRAPH_CENTRALITY = "graph-centrality"
    HUB = "hub"
    AUTHORITY = "authority"
    PAGERANK = "pagerank"

    @classmethod
    def parse(cls, name: str) -> "Feature":
        key = name.strip().lower().replace("_", "-")
        for f in cls:
            if key in (f.value, f.name.lower().replace("_", "-")):
                return f
        raise ValueError(f"unknown feature {name!r}; expected one of {', '.join(f.value for f in cls)}")


ALL_FEATURES = tuple(Feature)


class ConvergenceError(RuntimeError):
    def __init__(self, what: str, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"{what} did not converge in {iterations} iterations (last change {residual:.3e})")


@dataclass(frozen=True)
class FeatureVector:
    feature: Feature
    values: np.ndarray

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class CcdTable:
    """``fraction[k]`` of nodes have a value strictly above ``z[k]``."""

    z: np.ndarray
    fraction: np.ndarray

    def __call__(self, z: float) -> float:
        i = np.searchsorted(self.z, z, side="right") - 1
        if i < 0:
            raise ValueError("z below the smallest tabulated threshold")
        return float(self.fraction[i])


def degree_vectors(g: DirectedGraph) -> tuple[FeatureVector, FeatureVector, FeatureVector]:
    return (
        FeatureVector(Feature.IN_DEGREE, g.in_degree.astype(float)),
        FeatureVector(Feature.OUT_DEGREE, g.out_degree.astype(float)),
        FeatureVector(Feature.DEGREE, g.degree.astype(float)),
    )


# -- shortest-path centralities ---------------------------------------------


def _expand_out_edges(g: DirectedGraph, rows: np.ndarray, nodes: np.ndarray):
    """Flatten out-edges of ``(row, node)`` pairs; returns parents kept, seg starts, rows, heads."""
    deg = g.out_degree[nodes]
    keep = deg > 0
    rows, nodes, deg = rows[keep], nodes[keep], deg[keep]
    seg = np.zeros(len(deg), dtype=np.int64)
    np.cumsum(deg[:-1], out=seg[1:])
    total = int(deg.sum())
    offsets = np.arange(total, dtype=np.int64) - np.repeat(seg, deg) + np.repeat(g.out_ptr[nodes], deg)
    return keep, seg, np.repeat(rows, deg), g.out_idx[offsets]


def _centrality_batch(g: DirectedGraph, batch: np.ndarray, with_paths: bool):
    layers = bfs_batch(g, batch, count_paths=with_paths)
    dist = layers.dist
    reach = np.where(dist > 0, dist, 0).astype(np.int64)
    dsum = reach.sum(axis=1)
    dmax = reach.max(axis=1)
    if not with_paths:
        return dsum, dmax, None, None

    sigma = layers.sigma
    delta = np.zeros(dist.shape, dtype=np.float64)
    gamma = np.zeros(dist.shape, dtype=np.int64)
    for depth in range(len(layers.levels) - 1, 1, -1):
        rp, cp = layers.levels[depth - 1]
        keep, seg, re, w = _expand_out_edges(g, rp, cp)
        if not len(w):
            continue
        on_dag = dist[re, w] == depth
        pull_b = np.zeros(len(w))
        pull_s = np.zeros(len(w), dtype=np.int64)
        r_ok, w_ok = re[on_dag], w[on_dag]
        pull_b[on_dag] = (1.0 + delta[r_ok, w_ok]) / sigma[r_ok, w_ok]
        pull_s[on_dag] = 1 + gamma[r_ok, w_ok]
        rk, ck = rp[keep], cp[keep]
        delta[rk, ck] = sigma[rk, ck] * np.add.reduceat(pull_b, seg)
        gamma[rk, ck] = np.add.reduceat(pull_s, seg)

    between = delta.sum(axis=0)
    # sigma * gamma per cell, summed over the batch rows; fall back to
    # python integers when int64 could overflow
    bound = int(sigma.max(initial=0)) * int(gamma.max(initial=0)) * len(batch)
    if bound < 2**62:
        stress = (sigma * gamma).sum(axis=0).astype(object)
    else:
        stress = (sigma.astype(object) * gamma.astype(object)).sum(axis=0)
    return dsum, dmax, between, stress


def _sweep(g: DirectedGraph, with_paths: bool, threads: int | None):
    n = g.n
    dsum = np.zeros(n, dtype=np.int64)
    dmax = np.zeros(n, dtype=np.int64)
    between = np.zeros(n)
    stress = np.zeros(n, dtype=object)
    size = max(1, min(n, _CENTRALITY_CELLS // max(n + g.m, 1)))
    batches = source_batches(n, size)

    def work(batch):
        return batch, _centrality_batch(g, batch, with_paths)

    for batch, (s, mx, b, st) in map_ordered(work, batches, threads):
        dsum[batch] = s
        dmax[batch] = mx
        if with_paths:
            between += b
            stress += st
    return dsum, dmax, between, stress


def shortest_path_centralities(g: DirectedGraph, threads: int | None = None) -> tuple[FeatureVector, FeatureVector]:
    """Betweenness and stress of every node (unnormalized, ordered pairs)."""
    _, _, between, stress = _sweep(g, True, threads)
    return (
        FeatureVector(Feature.BETWEENNESS, between),
        FeatureVector(Feature.STRESS, stress.astype(np.float64)),
    )


def _closeness_from(dsum, dmax):
    with np.errstate(divide="ignore"):
        close = np.where(dsum > 0, 1.0 / np.maximum(dsum, 1), 0.0)
        graph = np.where(dmax > 0, 1.0 / np.maximum(dmax, 1), 0.0)
    return FeatureVector(Feature.CLOSENESS, close), FeatureVector(Feature.GRAPH_CENTRALITY, graph)


def closeness_and_graph_centrality(g: DirectedGraph, threads: int | None = None) -> tuple[FeatureVector, FeatureVector]:
    """Reciprocal of the distance sum and of the eccentricity over reachable nodes; 0 for sinks."""
    dsum, dmax, _, _ = _sweep(g, False, threads)
    return _closeness_from(dsum, dmax)


# -- link analysis ----------------------------------------------------------


def hits(g: DirectedGraph, tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS):
    """Hub and authority scores, each rescaled to sum to one.

    Starting from all ones, each round recomputes authorities from the hubs
    of in-neighbors and scales them to unit Euclidean norm, then recomputes
    hubs from the new authorities of out-neighbors and scales them the same
    way. Rounds stop once no component of either vector moves by more than
    ``tol``.

    Returns ``(hub, authority, iterations)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = g.n
    if g.m == 0:
        uniform = np.full(n, 1.0 / n) if n else np.empty(0)
        return FeatureVector(Feature.HUB, uniform), FeatureVector(Feature.AUTHORITY, uniform.copy()), 0

    a, at = g.adjacency.astype(float), g.adjacency_t.astype(float)
    x = np.ones(n)
    y = np.ones(n)
    residual = np.inf
    for it in range(1, max_iters + 1):
        x_new = at @ y
        x_new /= np.linalg.norm(x_new)
        y_new = a @ x_new
        y_new /= np.linalg.norm(y_new)
        residual = max(np.abs(x_new - x).max(), np.abs(y_new - y).max())
        x, y = x_new, y_new
        if residual <= tol:
            return (
                FeatureVector(Feature.HUB, y / y.sum()),
                FeatureVector(Feature.AUTHORITY, x / x.sum()),
                it,
            )
    raise ConvergenceError("HITS", max_iters, float(residual))


def pagerank(g: DirectedGraph, tol: float = DEFAULT_TOL, max_iters: int = DEFAULT_MAX_ITERS):
    """Iterate ``rho_i := 0.15 + 0.85 * sum(rho_j / outdeg_j for j -> i)`` from all ones.

    Sinks pass nothing on; there is no teleport redistribution. The fixed
    point is rescaled to sum to one. Returns ``(vector, iterations)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    n = g.n
    if n == 0:
        return FeatureVector(Feature.PAGERANK, np.empty(0)), 0
    at = g.adjacency_t.astype(float)
    out = g.out_degree.astype(float)
    has_out = out > 0
    rho = np.ones(n)
    share = np.zeros(n)
    residual = np.inf
    for it in range(1, max_iters + 1):
        np.divide(rho, out, out=share, where=has_out)
        new = (1.0 - DAMPING) + DAMPING * (at @ share)
        residual = np.abs(new - rho).max()
        rho = new
        if residual <= tol:
            return FeatureVector(Feature.PAGERANK, rho / rho.sum()), it
    raise ConvergenceError("page rank", max_iters, float(residual))


# -- everything at once -----------------------------------------------------


def compute_features(
    g: DirectedGraph,
    features=ALL_FEATURES,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    threads: int | None = None,
) -> dict[Feature, FeatureVector]:
    """Compute the requested features, sharing work between related ones."""
    wanted = [Feature.parse(f) if isinstance(f, str) else f for f in features]
    out: dict[Feature, FeatureVector] = {}
    if {Feature.IN_DEGREE, Feature.OUT_DEGREE, Feature.DEGREE} & set(wanted):
        for fv in degree_vectors(g):
            out[fv.feature] = fv
    path_based = {Feature.BETWEENNESS, Feature.STRESS, Feature.CLOSENESS, Feature.GRAPH_CENTRALITY}
    if path_based & set(wanted):
        with_paths = bool({Feature.BETWEENNESS, Feature.STRESS} & set(wanted))
        dsum, dmax, between, stress = _sweep(g, with_paths, threads)
        out[Feature.CLOSENESS], out[Feature.GRAPH_CENTRALITY] = _closeness_from(dsum, dmax)
        if with_paths:
            out[Feature.BETWEENNESS] = FeatureVector(Feature.BETWEENNESS, between)
            out[Feature.STRESS] = FeatureVector(Feature.STRESS, stress.astype(np.float64))
    if {Feature.HUB, Feature.AUTHORITY} & set(wanted):
        out[Feature.HUB], out[Feature.AUTHORITY], _ = hits(g, tol, max_iters)
    if Feature.PAGERANK in wanted:
        out[Feature.PAGERANK], _ = pagerank(g, tol, max_iters)
    return {f: out[f] for f in wanted}


def ccd(v: FeatureVector | np.ndarray) -> CcdTable:
    """Fraction of nodes whose value strictly exceeds each distinct value (and zero)."""
    values = np.asarray(v.values if isinstance(v, FeatureVector) else v, dtype=float)
    n = len(values)
    if n == 0:
        raise ValueError("CCD of an empty vector")
    ordered = np.sort(values)
    z = np.unique(np.concatenate([[0.0], ordered]))
    above = n - np.searchsorted(ordered, z, side="right")
    return CcdTable(z, above / n)
