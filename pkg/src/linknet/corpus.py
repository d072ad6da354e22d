"""Reading page collections and turning their links into directed graphs.

A corpus file holds one JSON object per line::

    {"id": "a", "title": "A", "text": "...", "links": [{"target": "b", "kind": "intext"}]}

Link kinds are ``intext``, ``seealso`` and ``referencedby``.
"""

from __future__ import annotations

import enum
import io
import json
import logging
from dataclasses import dataclass, field
from os import PathLike
from typing import IO, Iterable

from linknet.graph import DirectedGraph

log = logging.getLogger(__name__)


class CorpusFormatError(ValueError):
    """A corpus record could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class LinkKind(enum.Enum):
    IN_TEXT = "intext"
    SEE_ALSO = "seealso"
    REFERENCED_BY = "referencedby"


class GraphVariant(enum.Enum):
    ALL_LINKS = "all"
    SEE_ALSO_ONLY = "seealso"

    def keeps(self, kind: LinkKind) -> bool:
        if kind is LinkKind.REFERENCED_BY:
            # back-links duplicate the forward link from the other page
            return False
        if self is GraphVariant.SEE_ALSO_ONLY:
            return kind is LinkKind.SEE_ALSO
        return True


@dataclass(frozen=True)
class Link:
    target: str
    kind: LinkKind


@dataclass(frozen=True)
class Page:
    id: str
    title: str
    text: str
    links: tuple[Link, ...] = ()


@dataclass(frozen=True)
class Corpus:
    pages: tuple[Page, ...]
    dropped_links: int = 0
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        ordered = tuple(sorted(self.pages, key=lambda p: p.id))
        object.__setattr__(self, "pages", ordered)
        object.__setattr__(self, "_index", {p.id: i for i, p in enumerate(ordered)})

    def __len__(self) -> int:
        return len(self.pages)

    @property
    def ids(self) -> list[str]:
        return [p.id for p in self.pages]

    def index_of(self, page_id: str) -> int:
        return self._index[page_id]

    @property
    def link_count(self) -> int:
        return sum(len(p.links) for p in self.pages)


def _parse_link(raw, lineno: int) -> Link:
    if not isinstance(raw, dict):
        raise CorpusFormatError("link must be an object", lineno)
    target, kind = raw.get("target"), raw.get("kind")
    if not isinstance(target, str):
        raise CorpusFormatError("link target must be a string", lineno)
    try:
        return Link(target, LinkKind(kind))
    except ValueError:
        raise CorpusFormatError(f"unknown link kind {kind!r}", lineno) from None


def _parse_record(line: str, lineno: int) -> Page:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusFormatError(f"invalid JSON ({exc.msg})", lineno) from None
    if not isinstance(rec, dict):
        raise CorpusFormatError("record must be an object", lineno)
    for name in ("id", "title", "text"):
        if not isinstance(rec.get(name), str):
            raise CorpusFormatError(f"field {name!r} must be a string", lineno)
    links = rec.get("links", [])
    if not isinstance(links, list):
        raise CorpusFormatError("field 'links' must be an array", lineno)
    return Page(
        rec["id"], rec["title"], rec["text"], tuple(_parse_link(x, lineno) for x in links)
    )


def parse_corpus(source: IO[bytes] | IO[str] | Iterable[str] | bytes | str) -> Corpus:
    """Parse newline-delimited corpus records.

    Accepts a binary or text stream, an iterable of lines, or the raw file
    content. Links whose target is not a page of the corpus are dropped and
    counted in ``Corpus.dropped_links``.
    """
    if isinstance(source, (bytes, str)):
        source = io.BytesIO(source) if isinstance(source, bytes) else io.StringIO(source)

    pages: list[Page] = []
    seen: dict[str, int] = {}
    for lineno, line in enumerate(source, 1):
        if isinstance(line, bytes):
            try:
                line = line.decode("utf-8")
            except UnicodeDecodeError:
                raise CorpusFormatError("not valid UTF-8", lineno) from None
        if not line.strip():
            continue
        page = _parse_record(line, lineno)
        if page.id in seen:
            raise CorpusFormatError(
                f"duplicate page id {page.id!r} (first on line {seen[page.id]})", lineno
            )
        seen[page.id] = lineno
        pages.append(page)

    dropped = 0
    kept: list[Page] = []
    for page in pages:
        links = tuple(l for l in page.links if l.target in seen)
        dropped += len(page.links) - len(links)
        kept.append(Page(page.id, page.title, page.text, links))
    if dropped:
        log.warning("dropped %d link(s) to pages missing from the corpus", dropped)
    return Corpus(tuple(kept), dropped)


def read_corpus(path: str | PathLike) -> Corpus:
    with open(path, "rb") as fh:
        return parse_corpus(fh)


def build_graph(corpus: Corpus, variant: GraphVariant = GraphVariant.ALL_LINKS) -> DirectedGraph:
    """One node per page, one edge per distinct ordered pair of linked pages.

    Node ``i`` is the ``i``-th page in lexicographic id order. Self-links and
    repeated links collapse away; ``referencedby`` links never yield edges.
    """
    tails: list[int] = []
    heads: list[int] = []
    for i, page in enumerate(corpus.pages):
        for link in page.links:
            if variant.keeps(link.kind):
                tails.append(i)
                heads.append(corpus.index_of(link.target))
    return DirectedGraph.from_edges(len(corpus), tails, heads, labels=corpus.ids)
