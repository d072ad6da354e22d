"""Immutable directed graph plus traversal primitives.

Adjacency is kept in compressed sparse row form in both directions, with each
neighbor list sorted. Distances use an unsigned sentinel for unreachable
nodes so that sums over finite distances stay exact integers.
"""

from __future__ import annotations

import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterator, Sequence, TypeVar

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

UNREACHABLE = np.iinfo(np.uint32).max

# upper bound on batch_size * n cells held per batched BFS
_BATCH_CELLS = 1 << 22

T = TypeVar("T")


class DirectedGraph:
    """Simple directed graph on nodes ``0..n-1``: no self-loops, no parallel edges."""

    def __init__(self, n: int, out_ptr, out_idx, in_ptr, in_idx, labels=None):
        self.n = int(n)
        self.out_ptr = out_ptr
        self.out_idx = out_idx
        self.in_ptr = in_ptr
        self.in_idx = in_idx
        self.labels: tuple[str, ...] = (
            tuple(labels) if labels is not None else tuple(str(i) for i in range(self.n))
        )
        if len(self.labels) != self.n:
            raise ValueError("labels must have one entry per node")
        for arr in (out_ptr, out_idx, in_ptr, in_idx):
            arr.flags.writeable = False

    @classmethod
    def from_edges(cls, n: int, tails, heads, labels=None) -> "DirectedGraph":
        tails = np.asarray(tails, dtype=np.int64).reshape(-1)
        heads = np.asarray(heads, dtype=np.int64).reshape(-1)
        if tails.shape != heads.shape:
            raise ValueError("tails and heads differ in length")
        if tails.size and (min(tails.min(), heads.min()) < 0 or max(tails.max(), heads.max()) >= n):
            raise ValueError("edge endpoint out of range")
        keep = tails != heads
        code = np.unique(tails[keep] * n + heads[keep]) if n else np.empty(0, np.int64)
        t, h = np.divmod(code, n) if n else (code, code)
        out_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(t, minlength=n), out=out_ptr[1:])
        order = np.lexsort((t, h))
        in_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(h, minlength=n), out=in_ptr[1:])
        return cls(n, out_ptr, h.astype(np.int64), in_ptr, t[order].astype(np.int64), labels)

    @classmethod
    def from_adjacency(cls, adjacency: dict[int, Sequence[int]] | Sequence[Sequence[int]], n=None, labels=None):
        items = adjacency.items() if isinstance(adjacency, dict) else enumerate(adjacency)
        tails, heads = [], []
        for i, outs in items:
            for j in outs:
                tails.append(i)
                heads.append(j)
        if n is None:
            n = max([len(adjacency)] + [x + 1 for x in tails + heads])
        return cls.from_edges(n, tails, heads, labels)

    def __repr__(self):
        return f"DirectedGraph(n={self.n}, m={self.m})"

    @property
    def m(self) -> int:
        return int(self.out_ptr[-1])

    def _check(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(f"node {i} out of range for graph with {self.n} nodes")
        return int(i)

    def out_neighbors(self, i: int) -> np.ndarray:
        i = self._check(i)
        return self.out_idx[self.out_ptr[i] : self.out_ptr[i + 1]]

    def in_neighbors(self, i: int) -> np.ndarray:
        i = self._check(i)
        return self.in_idx[self.in_ptr[i] : self.in_ptr[i + 1]]

    @property
    def out_adj(self) -> list[list[int]]:
        return [self.out_neighbors(i).tolist() for i in range(self.n)]

    @property
    def in_adj(self) -> list[list[int]]:
        return [self.in_neighbors(i).tolist() for i in range(self.n)]

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Tail and head arrays, ordered by (tail, head)."""
        return np.repeat(np.arange(self.n), np.diff(self.out_ptr)), self.out_idx

    @cached_property
    def in_degree(self) -> np.ndarray:
        return np.diff(self.in_ptr)

    @cached_property
    def out_degree(self) -> np.ndarray:
        return np.diff(self.out_ptr)

    @cached_property
    def antiparallel(self) -> np.ndarray:
        """Per node, the number of neighbors linked in both directions."""
        a = self.adjacency
        return np.asarray(a.multiply(a.T).sum(axis=1)).ravel().astype(np.int64)

    @cached_property
    def degree(self) -> np.ndarray:
        """Number of distinct neighbors with edge directions ignored."""
        return self.in_degree + self.out_degree - self.antiparallel

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """0/1 adjacency matrix, ``A[i, j] = 1`` iff ``i -> j``."""
        data = np.ones(self.m, dtype=np.int64)
        return sp.csr_matrix((data, self.out_idx, self.out_ptr), shape=(self.n, self.n))

    @cached_property
    def adjacency_t(self) -> sp.csr_matrix:
        data = np.ones(self.m, dtype=np.int64)
        return sp.csr_matrix((data, self.in_idx, self.in_ptr), shape=(self.n, self.n))

    def transpose(self) -> "DirectedGraph":
        return DirectedGraph(
            self.n, self.in_ptr.copy(), self.in_idx.copy(), self.out_ptr.copy(), self.out_idx.copy(), self.labels
        )

    def without_nodes(self, isolated) -> "DirectedGraph":
        """Same node set with every edge touching an ``isolated`` node removed."""
        mask = np.zeros(self.n, dtype=bool)
        mask[np.asarray(isolated, dtype=np.int64)] = True
        t, h = self.edges()
        keep = ~(mask[t] | mask[h])
        return DirectedGraph.from_edges(self.n, t[keep], h[keep], self.labels)


def degrees(g: DirectedGraph, i: int) -> tuple[int, int, int]:
    """``(in_degree, out_degree, degree)`` of node ``i``."""
    i = g._check(i)
    return int(g.in_degree[i]), int(g.out_degree[i]), int(g.degree[i])


def bfs_distances(g: DirectedGraph, source: int) -> np.ndarray:
    """Hop distances from ``source``; unreachable nodes hold ``UNREACHABLE``."""
    source = g._check(source)
    dist = np.full(g.n, UNREACHABLE, dtype=np.uint32)
    dist[source] = 0
    queue = deque([source])
    ptr, idx = g.out_ptr, g.out_idx
    while queue:
        v = queue.popleft()
        dv = dist[v] + 1
        for w in idx[ptr[v] : ptr[v + 1]]:
            if dist[w] == UNREACHABLE:
                dist[w] = dv
                queue.append(w)
    return dist


def reach_set(g: DirectedGraph, i: int) -> set[int]:
    """Nodes at finite, positive distance from ``i``."""
    dist = bfs_distances(g, i)
    return {int(j) for j in np.flatnonzero((dist > 0) & (dist != UNREACHABLE))}


@dataclass(frozen=True)
class SccDecomposition:
    """Strongly connected components.

    Component ids are assigned in order of each component's smallest node, so
    ``largest`` (the first component of maximal size) is the one holding the
    smallest node index among the tied candidates.
    """

    labels: np.ndarray
    sizes: np.ndarray
    largest: int

    @property
    def count(self) -> int:
        return len(self.sizes)

    @property
    def largest_size(self) -> int:
        return int(self.sizes[self.largest]) if len(self.sizes) else 0

    def components(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.count)]
        for node, c in enumerate(self.labels.tolist()):
            out[c].append(node)
        return out


def _canonical_scc(raw: np.ndarray) -> SccDecomposition:
    # first occurrence of each raw label gives its smallest node
    _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    labels = rank[inverse.reshape(-1)]
    sizes = np.bincount(labels, minlength=len(first))
    largest = int(np.argmax(sizes)) if len(sizes) else -1
    return SccDecomposition(labels, sizes, largest)


def scc_labels(adjacency: sp.spmatrix) -> tuple[int, np.ndarray]:
    """Raw strong-component labelling of a sparse adjacency matrix (linear time)."""
    return connected_components(adjacency, directed=True, connection="strong")


def scc(g: DirectedGraph) -> SccDecomposition:
    if g.n == 0:
        return SccDecomposition(np.empty(0, np.int64), np.empty(0, np.int64), -1)
    _, raw = scc_labels(g.adjacency)
    return _canonical_scc(raw)


@dataclass
class BfsLayers:
    """Breadth-first layers for a batch of sources.

    ``dist[r, v]`` is the distance from ``sources[r]`` to ``v`` (``-1`` when
    unreachable). ``levels[d]`` holds the ``(row, node)`` coordinates at
    distance ``d``. ``sigma`` counts shortest paths when requested.
    """

    sources: np.ndarray
    dist: np.ndarray
    levels: list[tuple[np.ndarray, np.ndarray]]
    sigma: np.ndarray | None = None


def bfs_batch(g: DirectedGraph, sources, count_paths: bool = False) -> BfsLayers:
    """Level-synchronous BFS from several sources at once."""
    sources = np.asarray(sources, dtype=np.int64)
    b, n = len(sources), g.n
    rows = np.arange(b)
    dist = np.full((b, n), -1, dtype=np.int32)
    dist[rows, sources] = 0
    sigma = None
    vals = np.ones(b, dtype=np.int64)
    if count_paths:
        sigma = np.zeros((b, n), dtype=np.int64)
        sigma[rows, sources] = 1
    levels = [(rows, sources)]
    a = g.adjacency
    frontier = sp.csr_matrix((vals, (rows, sources)), shape=(b, n))
    depth = 0
    while frontier.nnz:
        reached = (frontier @ a).tocoo()
        r, c, v = reached.row, reached.col, reached.data
        new = dist[r, c] < 0
        r, c, v = r[new], c[new], v[new]
        if not len(r):
            break
        depth += 1
        dist[r, c] = depth
        if count_paths:
            sigma[r, c] = v
        else:
            v = np.ones(len(r), dtype=np.int64)
        levels.append((r, c))
        frontier = sp.csr_matrix((v, (r, c)), shape=(b, n))
    return BfsLayers(sources, dist, levels, sigma)


def batch_size_for(n: int) -> int:
    return max(1, min(n, _BATCH_CELLS // max(n, 1)))


def source_batches(n: int, batch_size: int | None = None) -> list[np.ndarray]:
    size = batch_size or batch_size_for(n)
    return [np.arange(lo, min(lo + size, n)) for lo in range(0, n, size)]


def default_threads() -> int:
    return os.cpu_count() or 1


def map_ordered(func: Callable[[np.ndarray], T], batches: list[np.ndarray], threads: int | None = None) -> Iterator[T]:
    """Apply ``func`` to every batch; results come back in batch order."""
    threads = threads or 1
    if threads <= 1 or len(batches) <= 1:
        return map(func, batches)
    pool = ThreadPoolExecutor(max_workers=threads)
    try:
        return iter(list(pool.map(func, batches)))
    finally:
        pool.shutdown()
