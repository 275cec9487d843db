"""Dirichlet-smoothed document language models and log-linear scoring."""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Iterable, Iterator, Tuple, Union

from .textindex import Document, Index, _phrase_count

DEFAULT_MU = 2500.0

#: A unigram term, or an n-gram given as a tuple of terms.
LexEntity = Union[str, Tuple[str, ...]]


@dataclass(frozen=True)
class SmoothingConfig:
    mu: float = DEFAULT_MU

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"Dirichlet mu must be > 0, got {self.mu}")


def _canonical(entity) -> LexEntity:
    if isinstance(entity, str):
        return entity
    entity = tuple(entity)
    return entity[0] if len(entity) == 1 else entity


class QueryModel(Mapping):
    """Sparse, read-only map from lexical entity to weight.

    Zero weights are dropped on construction. Iteration follows insertion
    order, which fixes the summation order used when scoring.
    """

    __slots__ = ("_weights",)

    def __init__(self, weights=()):
        items = weights.items() if isinstance(weights, Mapping) else weights
        clean = {}
        for entity, w in items:
            w = float(w)
            if not math.isfinite(w):
                raise ValueError(f"non-finite weight {w} for {entity!r}")
            entity = _canonical(entity)
            if w != 0.0:
                clean[entity] = w
        self._weights = clean

    def __getitem__(self, entity) -> float:
        return self._weights[_canonical(entity)]

    def __iter__(self) -> Iterator[LexEntity]:
        return iter(self._weights)

    def __len__(self) -> int:
        return len(self._weights)

    def __repr__(self) -> str:
        return f"QueryModel({self._weights!r})"

    def scaled(self, factor: float) -> "QueryModel":
        return QueryModel((e, w * factor) for e, w in self._weights.items())

    @property
    def terms(self) -> list:
        return [e for e in self._weights if isinstance(e, str)]


def doc_prob(index: Index, doc, entity: LexEntity, cfg: SmoothingConfig = SmoothingConfig()) -> float:
    """P(entity | doc) under Dirichlet smoothing.

    N-grams use the count of length-n windows as the document length.
    """
    doc = index.document(doc)
    entity = _canonical(entity)
    if isinstance(entity, str):
        freq = doc.term_freqs.get(entity, 0)
        length = doc.length
    else:
        freq = _phrase_count(doc, entity)
        length = max(0, doc.length - len(entity) + 1)
    mu = cfg.mu
    return (freq + mu * index.coll_prob(entity)) / (length + mu)


def score(index: Index, doc, qm: QueryModel, cfg: SmoothingConfig = SmoothingConfig()) -> float:
    """log P(d | s) = sum of weight * log P(entity | d) over the query model."""
    if not len(qm):
        raise ValueError("cannot score with an empty query model")
    doc = index.document(doc)
    total = 0.0
    for entity, weight in qm.items():
        total += weight * math.log(doc_prob(index, doc, entity, cfg))
    return total


def idf(index: Index, term: str) -> float:
    n = index.stats.num_docs
    df = index.stats.doc_freq.get(term, 0)
    return math.log((n + 1) / (df + 0.5))


def _ml_prob(docs: Iterable[Document], term: str) -> float:
    count = length = 0
    for d in docs:
        count += d.term_freqs.get(term, 0)
        length += d.length
    return count / length if length else 0.0


def feedback_docs(index: Index, session, i: int, source: str = "sat") -> list:
    """Indexed documents standing in for interaction ``i`` (1-based).

    ``source="sat"`` takes SAT-clicked documents and falls back to the
    top-ranked result when there are none; ``source="top"`` always takes the
    top-ranked result. Documents outside the index are left out.
    """
    if not 1 <= i <= len(session.history):
        raise IndexError(f"interaction {i} outside 1..{len(session.history)} in session {session.session_id}")
    interaction = session.history[i - 1]
    docnos = interaction.sat_docnos if source == "sat" else []
    if not docnos:
        docnos = [interaction.serp[0].docno] if interaction.serp else []
    return [d for d in map(index.get, docnos) if d is not None]


def sat_prob(index: Index, session, i: int, term: str, source: str = "sat") -> float:
    """Maximum-likelihood probability of ``term`` in interaction ``i``'s feedback documents."""
    if source not in ("sat", "top"):
        raise ValueError(f"unknown feedback source {source!r}")
    return _ml_prob(feedback_docs(index, session, i, source), term)
