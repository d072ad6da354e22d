"""Keyword search ranked by local features, scored with Precision and Recall.

For a keyword, the candidate set is every page whose title or text contains
the keyword as a contiguous run of tokens. Without expert judgments, the
relevant set is decided by a vote of the ten feature rankings: a candidate is
relevant when it places in the top ten of at least six of them. Keywords with
ten or fewer candidates are dropped.
"""

from __future__ import annotations

import math
import re
from collections import defaultdict
from dataclasses import dataclass, field
from os import PathLike
from typing import Iterable, Mapping, Sequence

import numpy as np

from linknet.corpus import Corpus
from linknet.graph import DirectedGraph
from linknet.local_metrics import ALL_FEATURES, DEFAULT_MAX_ITERS, DEFAULT_TOL, Feature, FeatureVector, compute_features

MIN_CANDIDATES = 11
TOP = 10
QUORUM = 6
DEFAULT_LIMIT = 100
BUCKETS = 11

_TOKEN = re.compile(r"[^\W_]+")


class QueryDropped(ValueError):
    """The keyword has no usable relevant set."""


def tokenize(text: str) -> list[str]:
    """Case-folded runs of Unicode letters and digits."""
    return _TOKEN.findall(text.casefold())


class KeywordIndex:
    """Positional token index over page titles and texts."""

    def __init__(self, corpus: Corpus):
        self.n = len(corpus)
        # (page, field) -> token positions, field 0 = title, 1 = text
        self._postings: dict[str, dict[tuple[int, int], list[int]]] = defaultdict(lambda: defaultdict(list))
        for i, page in enumerate(corpus.pages):
            for fld, body in enumerate((page.title, page.text)):
                for pos, tok in enumerate(tokenize(body)):
                    self._postings[tok][(i, fld)].append(pos)

    def match(self, keyword: str) -> np.ndarray:
        """Sorted node indices of pages containing ``keyword``."""
        toks = tokenize(keyword)
        if not toks:
            raise ValueError(f"keyword {keyword!r} has no searchable tokens")
        first = self._postings.get(toks[0])
        if not first:
            return np.empty(0, dtype=np.int64)
        rest = [self._postings.get(t, {}) for t in toks[1:]]
        hits = set()
        for key, positions in first.items():
            if key[0] in hits:
                continue
            for p in positions:
                if all(p + off + 1 in set(post.get(key, ())) for off, post in enumerate(rest)):
                    hits.add(key[0])
                    break
        return np.array(sorted(hits), dtype=np.int64)


def match_keyword(corpus: Corpus | KeywordIndex, keyword: str) -> np.ndarray:
    index = corpus if isinstance(corpus, KeywordIndex) else KeywordIndex(corpus)
    return index.match(keyword)


def _values(v) -> np.ndarray:
    return np.asarray(v.values if isinstance(v, FeatureVector) else v)


def answer_list(candidates, values) -> np.ndarray:
    """Candidates by non-increasing value, ties by ascending node index."""
    candidates = np.asarray(candidates, dtype=np.int64)
    vals = _values(values)[candidates]
    return candidates[np.lexsort((candidates, -vals))]


def relevant_set(candidates, feature_vectors: Mapping[Feature, object] | Sequence) -> frozenset[int]:
    """Candidates in the top ten of at least six of the ten feature rankings."""
    candidates = np.asarray(candidates, dtype=np.int64)
    if len(candidates) < MIN_CANDIDATES:
        return frozenset()
    vectors = list(feature_vectors.values()) if isinstance(feature_vectors, Mapping) else list(feature_vectors)
    if len(vectors) != len(ALL_FEATURES):
        raise ValueError(f"voting needs all {len(ALL_FEATURES)} feature vectors, got {len(vectors)}")
    votes: dict[int, int] = defaultdict(int)
    for v in vectors:
        for node in answer_list(candidates, v)[:TOP].tolist():
            votes[node] += 1
    return frozenset(node for node, count in votes.items() if count >= QUORUM)


def _hits(answers: np.ndarray, relevant: frozenset[int]) -> np.ndarray:
    return np.cumsum(np.fromiter((a in relevant for a in answers.tolist()), dtype=np.int64, count=len(answers)))


def precision_recall(answers, relevant) -> tuple[np.ndarray, np.ndarray]:
    """Precision and Recall of every prefix ``answers[:k]``, ``k = 1..len(answers)``."""
    relevant = frozenset(relevant)
    if not relevant:
        raise QueryDropped("empty relevant set")
    answers = np.asarray(answers, dtype=np.int64)
    hits = _hits(answers, relevant)
    k = np.arange(1, len(answers) + 1)
    return hits / k, hits / len(relevant)


@dataclass
class QueryResult:
    keyword: str
    candidates: np.ndarray
    relevant: frozenset[int]
    answers: dict[Feature, np.ndarray] = field(default_factory=dict)

    @property
    def dropped(self) -> bool:
        return not self.relevant

    def hits(self, feature: Feature) -> np.ndarray:
        return _hits(self.answers[feature], self.relevant)

    def precision_recall(self, feature: Feature) -> tuple[np.ndarray, np.ndarray]:
        return precision_recall(self.answers[feature], self.relevant)


@dataclass(frozen=True)
class PRCurve:
    """Mean Precision per Recall bucket ``[0,.1), ..., [.9,1), [1,1]``; ``None`` marks an empty bucket."""

    feature: Feature
    abscissae: tuple[float, ...]
    precision: tuple[float | None, ...]
    counts: tuple[int, ...]


def evaluate_query(keyword: str, candidates, features: Mapping[Feature, object]) -> QueryResult:
    candidates = np.asarray(candidates, dtype=np.int64)
    relevant = relevant_set(candidates, features)
    result = QueryResult(keyword, candidates, relevant)
    if relevant:
        result.answers = {f: answer_list(candidates, v) for f, v in features.items()}
    return result


def bucketed_curve(results: Iterable[QueryResult], feature: Feature, after_full_recall: bool = False) -> PRCurve:
    """Average each prefix's Precision into the bucket holding its Recall.

    A query contributes prefixes up to the first one that reaches full
    Recall, so the ``[1, 1]`` bucket holds the Precision at which the last
    relevant node was found. ``after_full_recall=True`` keeps the longer
    prefixes too, which drags that bucket below 1 even for a perfect ranking.
    """
    sums: list[list[float]] = [[] for _ in range(BUCKETS)]
    used = 0
    for res in results:
        if res.dropped:
            continue
        used += 1
        hits = res.hits(feature)
        size = len(res.relevant)
        if not after_full_recall:
            full = np.flatnonzero(hits == size)
            if len(full):
                hits = hits[: full[0] + 1]
        for k, h in enumerate(hits.tolist(), 1):
            # integer bucket index; recall == 1 lands in the last bucket only
            sums[(10 * h) // size].append(h / k)
    if not used:
        raise QueryDropped("every query was dropped; no curve to average")
    return PRCurve(
        feature,
        tuple(b / 10 for b in range(BUCKETS)),
        tuple(math.fsum(s) / len(s) if s else None for s in sums),
        tuple(len(s) for s in sums),
    )


@dataclass
class SuiteResult:
    curves: dict[Feature, PRCurve]
    results: list[QueryResult]
    dropped: list[dict]
    not_evaluated: list[str]

    def drop_report(self) -> dict:
        return {
            "evaluated": [r.keyword for r in self.results if not r.dropped],
            "dropped": self.dropped,
            "not_evaluated_after_limit": self.not_evaluated,
        }


def read_keywords(path: str | PathLike) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


def evaluate_keywords(
    corpus: Corpus | KeywordIndex,
    features: Mapping[Feature, object],
    keywords: Iterable[str],
    limit: int = DEFAULT_LIMIT,
) -> SuiteResult:
    """Walk keywords in rank order, keeping the first ``limit`` that survive the candidate-count rule."""
    if limit < 1:
        raise ValueError("limit must be positive")
    index = corpus if isinstance(corpus, KeywordIndex) else KeywordIndex(corpus)
    features = {f: _values(features[f]) for f in ALL_FEATURES}
    kept: list[QueryResult] = []
    dropped: list[dict] = []
    keywords = list(keywords)
    pos = 0
    for pos, kw in enumerate(keywords):
        if len(kept) >= limit:
            break
        x = index.match(kw)
        if len(x) < MIN_CANDIDATES:
            dropped.append({"keyword": kw, "candidates": int(len(x)), "reason": "too_few_candidates"})
            continue
        res = evaluate_query(kw, x, features)
        if res.dropped:
            dropped.append({"keyword": kw, "candidates": int(len(x)), "reason": "no_majority"})
        kept.append(res)
    else:
        pos = len(keywords)
    rest = keywords[pos:] if len(kept) >= limit else []
    live = [r for r in kept if not r.dropped]
    curves = {f: bucketed_curve(live, f) for f in ALL_FEATURES} if live else {}
    return SuiteResult(curves, kept, dropped, rest)


def run_keyword_suite(
    corpus: Corpus,
    graph: DirectedGraph,
    keywords: Iterable[str] | str | PathLike,
    limit: int = DEFAULT_LIMIT,
    tol: float = DEFAULT_TOL,
    max_iters: int = DEFAULT_MAX_ITERS,
    threads: int | None = None,
) -> SuiteResult:
    if isinstance(keywords, (str, PathLike)):
        keywords = read_keywords(keywords)
    if graph.n != len(corpus):
        raise ValueError("graph and corpus disagree on the number of pages")
    features = compute_features(graph, ALL_FEATURES, tol, max_iters, threads)
    return evaluate_keywords(corpus, features, keywords, limit)
