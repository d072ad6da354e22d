"""Node-isolation experiments on the giant strongly connected component.

Nodes are isolated one at a time (all incident edges removed, the node stays)
until no strongly connected component has more than one node. After each
step the largest component size is recorded.

Isolating a node can only split the component that contains it, so each
step re-runs the strong-component search on that component alone, with a
compiled Tarjan pass over the component's induced subgraph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np
from numba import njit

from linknet.graph import DirectedGraph, map_ordered, scc
from linknet.local_metrics import DEFAULT_MAX_ITERS, DEFAULT_TOL, Feature, FeatureVector, compute_features

DEFAULT_TRIALS = 10


@dataclass(frozen=True)
class RandomSchedule:
    seed: int = 0
    trials: int = DEFAULT_TRIALS

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("a random schedule needs at least one trial")

    @property
    def name(self) -> str:
        return "random"


@dataclass(frozen=True)
class TargetedSchedule:
    feature: Feature
    recompute_every: int | None = None
    tol: float = DEFAULT_TOL
    max_iters: int = DEFAULT_MAX_ITERS

    def __post_init__(self):
        if isinstance(self.feature, str):
            object.__setattr__(self, "feature", Feature.parse(self.feature))
        if self.recompute_every is not None and self.recompute_every < 1:
            raise ValueError("recompute_every must be a positive step count")

    @property
    def name(self) -> str:
        return self.feature.value


@dataclass
class PercolationTrace:
    """``points`` holds ``(isolated_count, isolated_fraction, S)`` after each isolation."""

    schedule: str
    n: int
    points: list[tuple[int, float, float]] = field(default_factory=list)
    breakdown_fraction: float = 0.0
    trial_breakdowns: list[float] = field(default_factory=list)

    @property
    def s_values(self) -> list[float]:
        return [p[2] for p in self.points]


@njit(cache=True)
def _tarjan_subset(indptr, indices, nodes, local, labels):
    """Strong components of the subgraph induced by ``nodes``.

    ``local[u]`` is the position of node ``u`` in ``nodes`` or -1 when ``u``
    is outside the subset. Writes a component number per position into
    ``labels`` and returns the number of components.
    """
    k = len(nodes)
    index = np.full(k, -1, dtype=np.int64)
    low = np.zeros(k, dtype=np.int64)
    on_stack = np.zeros(k, dtype=np.bool_)
    stack = np.empty(k, dtype=np.int64)
    call_node = np.empty(k, dtype=np.int64)
    call_edge = np.empty(k, dtype=np.int64)
    top = 0
    counter = 0
    comp = 0
    for root in range(k):
        if index[root] != -1:
            continue
        index[root] = counter
        low[root] = counter
        counter += 1
        stack[top] = root
        top += 1
        on_stack[root] = True
        call_node[0] = root
        call_edge[0] = indptr[nodes[root]]
        depth = 1
        while depth > 0:
            v = call_node[depth - 1]
            e = call_edge[depth - 1]
            end = indptr[nodes[v] + 1]
            descended = False
            while e < end:
                w = local[indices[e]]
                e += 1
                if w < 0:
                    continue
                if index[w] == -1:
                    call_edge[depth - 1] = e
                    index[w] = counter
                    low[w] = counter
                    counter += 1
                    stack[top] = w
                    top += 1
                    on_stack[w] = True
                    call_node[depth] = w
                    call_edge[depth] = indptr[nodes[w]]
                    depth += 1
                    descended = True
                    break
                if on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
            if descended:
                continue
            depth -= 1
            if low[v] == index[v]:
                while True:
                    top -= 1
                    x = stack[top]
                    on_stack[x] = False
                    labels[x] = comp
                    if x == v:
                        break
                comp += 1
            if depth > 0:
                u = call_node[depth - 1]
                if low[v] < low[u]:
                    low[u] = low[v]
    return comp


def scc_of_subset(g: DirectedGraph, nodes: np.ndarray, local: np.ndarray | None = None) -> tuple[int, np.ndarray]:
    """Strong components of the subgraph induced by ``nodes`` (labels by position)."""
    nodes = np.asarray(nodes, dtype=np.int64)
    if local is None:
        local = np.full(g.n, -1, dtype=np.int64)
    local[nodes] = np.arange(len(nodes))
    labels = np.empty(len(nodes), dtype=np.int64)
    try:
        k = _tarjan_subset(g.out_ptr, g.out_idx, nodes, local, labels)
    finally:
        local[nodes] = -1
    return int(k), labels


class _ComponentTracker:
    """Strong components of a graph under progressive node isolation."""

    def __init__(self, g: DirectedGraph):
        self.g = g
        self.local = np.full(g.n, -1, dtype=np.int64)
        dec = scc(g)
        self.labels = dec.labels.copy()
        self.sizes = {c: int(s) for c, s in enumerate(dec.sizes)}
        self.next_id = len(dec.sizes)
        self.members: dict[int, np.ndarray] = {}
        order = np.argsort(self.labels, kind="stable")
        bounds = np.cumsum(dec.sizes)
        for c, chunk in enumerate(np.split(order, bounds[:-1]) if len(order) else []):
            if len(chunk) > 1:
                self.members[c] = chunk
        self.hist = np.bincount(dec.sizes, minlength=2) if len(dec.sizes) else np.zeros(2, np.int64)
        self.largest = int(dec.largest_size)

    def _drop(self, size: int):
        self.hist[size] -= 1

    def _add(self, size: int) -> int:
        c = self.next_id
        self.next_id += 1
        self.sizes[c] = size
        self.hist[size] += 1
        return c

    def isolate(self, v: int):
        c = int(self.labels[v])
        size = self.sizes.pop(c)
        self._drop(size)
        if size == 1:
            self.labels[v] = self._add(1)
        else:
            rest = self.members.pop(c)
            rest = rest[rest != v]
            self.labels[v] = self._add(1)
            k, raw = scc_of_subset(self.g, rest, self.local)
            counts = np.bincount(raw, minlength=k)
            ids = np.array([self._add(int(s)) for s in counts], dtype=np.int64)
            self.labels[rest] = ids[raw]
            if (counts > 1).any():
                order = np.argsort(raw, kind="stable")
                for local, chunk in enumerate(np.split(order, np.cumsum(counts)[:-1])):
                    if len(chunk) > 1:
                        self.members[int(ids[local])] = rest[chunk]
        while self.largest > 1 and self.hist[self.largest] == 0:
            self.largest -= 1

    @property
    def broken(self) -> bool:
        return self.largest <= 1


def run_order(g: DirectedGraph, order: Iterable[int], name: str = "custom") -> PercolationTrace:
    """Isolate nodes in the given order until no component has two or more nodes."""
    n = g.n
    trace = PercolationTrace(name, n)
    tracker = _ComponentTracker(g)
    if n == 0 or tracker.broken:
        return trace
    count = 0
    for v in order:
        count += 1
        tracker.isolate(int(v))
        trace.points.append((count, count / n, tracker.largest / n))
        if tracker.broken:
            break
    else:
        raise ValueError("isolation order exhausted before every cycle was broken")
    trace.breakdown_fraction = count / n
    return trace


def _rank_desc(values: np.ndarray, candidates: np.ndarray) -> np.ndarray:
    # highest value first, ties by lowest node index
    return candidates[np.lexsort((candidates, -values[candidates]))]


def targeted_order(
    g: DirectedGraph,
    schedule: TargetedSchedule,
    threads: int | None = None,
    features: Mapping[Feature, FeatureVector] | None = None,
) -> Iterator[int]:
    """Nodes by decreasing feature value; optionally re-rank on the damaged graph every k steps.

    ``features`` may carry vectors already computed on ``g`` so that several
    schedules over one graph share the work.
    """
    if features is not None and schedule.feature in features:
        values = np.asarray(features[schedule.feature].values)
    else:
        values = compute_features(g, [schedule.feature], schedule.tol, schedule.max_iters, threads)[schedule.feature].values
    order = _rank_desc(values, np.arange(g.n))
    k = schedule.recompute_every
    if k is None:
        yield from order.tolist()
        return
    isolated: list[int] = []
    remaining = order
    while len(remaining):
        step, remaining = remaining[:k], remaining[k:]
        for v in step.tolist():
            isolated.append(v)
            yield v
        if len(remaining):
            damaged = g.without_nodes(isolated)
            fv = compute_features(damaged, [schedule.feature], schedule.tol, schedule.max_iters, threads)
            remaining = _rank_desc(fv[schedule.feature].values, np.sort(remaining))


def _average(traces: list[PercolationTrace], name: str, n: int) -> PercolationTrace:
    """Pointwise mean of S; trials that stopped early hold their last S."""
    out = PercolationTrace(name, n)
    out.trial_breakdowns = [t.breakdown_fraction for t in traces]
    length = max(len(t.points) for t in traces)
    if length == 0:
        return out
    table = np.empty((len(traces), length))
    for row, t in zip(table, traces):
        s = t.s_values
        row[: len(s)] = s
        row[len(s) :] = s[-1] if s else 1.0 / n
    mean = table.mean(axis=0)
    out.points = [(k + 1, (k + 1) / n, float(mean[k])) for k in range(length)]
    out.breakdown_fraction = float(np.mean(out.trial_breakdowns))
    return out


def isolate_run(
    g: DirectedGraph,
    schedule,
    threads: int | None = None,
    features: Mapping[Feature, FeatureVector] | None = None,
) -> PercolationTrace:
    """Run one isolation schedule.

    A random schedule runs ``trials`` independent shuffles (seeded from
    ``seed``) and reports the pointwise mean of S and the mean breakdown
    fraction. A targeted schedule ranks nodes by the feature computed on the
    intact graph (taken from ``features`` when given), unless
    ``recompute_every`` asks for periodic re-ranking.
    """
    if isinstance(schedule, RandomSchedule):
        seeds = np.random.SeedSequence(schedule.seed).spawn(schedule.trials)

        def trial(seed_seq):
            rng = np.random.default_rng(seed_seq)
            return run_order(g, rng.permutation(g.n), "random")

        # one "batch" per trial keeps map_ordered's ordering guarantee
        traces = list(map_ordered(lambda ss: trial(ss[0]), [[s] for s in seeds], threads))
        return _average(traces, schedule.name, g.n)
    if isinstance(schedule, TargetedSchedule):
        trace = run_order(g, targeted_order(g, schedule, threads, features), schedule.name)
        trace.trial_breakdowns = [trace.breakdown_fraction]
        return trace
    raise TypeError(f"not an isolation schedule: {schedule!r}")


def parse_schedule(name: str, seed: int = 0, trials: int = DEFAULT_TRIALS, recompute_every=None, **kw):
    if name.strip().lower() == "random":
        return RandomSchedule(seed, trials)
    return TargetedSchedule(Feature.parse(name), recompute_every, **kw)


def breakdown_summary(traces: Iterable[PercolationTrace]) -> list[tuple[str, float]]:
    """``(schedule, breakdown_fraction)`` rows, smallest fraction first."""
    rows = [(t.schedule, t.breakdown_fraction) for t in traces]
    if not rows:
        raise ValueError("no traces to summarise")
    return sorted(rows, key=lambda r: r[1])
