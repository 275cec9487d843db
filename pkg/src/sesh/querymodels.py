"""Session query models: term frequency, Nugget and the query change model.

Each builder produces one model per query in the session and sums them
(uniform aggregation).
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .lmscore import QueryModel, idf, sat_prob
from .sessionlog import Query, Session
from .textindex import Index, tokenize

logger = logging.getLogger(__name__)

AnchorTexts = Dict[str, List[str]]

TF_SCOPES = ("first_query", "last_query", "all_queries")
NUGGET_VARIANTS = ("RL2", "RL3", "RL4")


@dataclass(frozen=True)
class NuggetParams:
    k_snippet: int = 10
    theta: float = 0.97
    k_anchor: int = 5
    beta: float = 0.1
    variant: str = "RL2"
    max_order: int = 3
    #: "coverage": fraction of feedback texts containing the n-gram >= theta;
    #: "count": number of feedback texts containing it >= min_count.
    comparator: str = "coverage"
    min_count: int = 1

    def __post_init__(self):
        if not 0 < self.theta <= 1:
            raise ValueError(f"theta must be in (0, 1], got {self.theta}")
        if not 0 <= self.beta <= 1:
            raise ValueError(f"beta must be in [0, 1], got {self.beta}")
        if self.k_snippet < 1 or self.k_anchor < 1:
            raise ValueError("k_snippet and k_anchor must be >= 1")
        if self.variant not in NUGGET_VARIANTS:
            raise ValueError(f"unknown Nugget variant {self.variant!r}")
        if self.comparator not in ("coverage", "count"):
            raise ValueError(f"unknown comparator {self.comparator!r}")
        if self.max_order < 2:
            raise ValueError("max_order must be >= 2")


@dataclass(frozen=True)
class QcmParams:
    alpha: float = 2.2
    beta: float = 1.8
    epsilon: float = 0.07
    delta: float = 0.4
    #: where P(t | d_{i-1}) comes from: "sat" (SAT clicks, else top result) or "top"
    source: str = "sat"

    def __post_init__(self):
        for name in ("alpha", "beta", "epsilon", "delta"):
            v = getattr(self, name)
            if not (v >= 0 and v != float("inf")):
                raise ValueError(f"QCM {name} must be finite and >= 0, got {v}")
        if self.source not in ("sat", "top"):
            raise ValueError(f"unknown QCM probability source {self.source!r}")


@dataclass(frozen=True)
class QcmDecomposition:
    """Theme, added and removed terms, each in first-occurrence order."""

    theme: Tuple[str, ...]
    added: Tuple[str, ...]
    removed: Tuple[str, ...]


def _unique(terms: Iterable[str]) -> List[str]:
    return list(dict.fromkeys(terms))


def tf_model(query) -> QueryModel:
    terms = query.terms if isinstance(query, Query) else tuple(query)
    if not terms:
        raise ValueError("cannot build a TF model for an empty query")
    return QueryModel(Counter(terms))


def aggregate(models: Sequence[QueryModel], scheme: str = "uniform") -> QueryModel:
    if scheme != "uniform":
        raise ValueError(f"unsupported aggregation scheme {scheme!r}")
    if not models:
        raise ValueError("nothing to aggregate")
    total: Dict = {}
    for m in models:
        for entity, w in m.items():
            total[entity] = total.get(entity, 0.0) + w
    return QueryModel(total)


def tf_session_model(session: Session, scope: str = "all_queries") -> QueryModel:
    if scope == "first_query":
        return tf_model(_nonempty(session.queries)[0])
    if scope == "last_query":
        return tf_model(session.current_query)
    if scope == "all_queries":
        return aggregate([tf_model(q) for q in _nonempty(session.queries)])
    raise ValueError(f"unknown TF scope {scope!r}")


def _nonempty(queries: Iterable[Query]) -> List[Query]:
    return [q for q in queries if q.terms]


def qcm_decompose(q_prev, q_cur) -> QcmDecomposition:
    prev = _unique(q_prev.terms if isinstance(q_prev, Query) else q_prev)
    cur = _unique(q_cur.terms if isinstance(q_cur, Query) else q_cur)
    prev_set, cur_set = set(prev), set(cur)
    return QcmDecomposition(
        theme=tuple(t for t in cur if t in prev_set),
        added=tuple(t for t in cur if t not in prev_set),
        removed=tuple(t for t in prev if t not in cur_set),
    )


def qcm_weight(case: str, prob: float, idf_value: float = 0.0, params: QcmParams = QcmParams()) -> float:
    """Weight of one term under the query change model.

    ``case`` is one of "theme", "added_present", "added_absent", "removed".
    """
    if case == "theme":
        return 1 + params.alpha * (1 - prob)
    if case == "added_present":
        return 1 - params.beta * prob
    if case == "added_absent":
        return 1 + params.epsilon * idf_value
    if case == "removed":
        return -params.delta * prob
    raise ValueError(f"unknown QCM case {case!r}")


def _in_top_document(index: Index, interaction, term: str) -> bool:
    if not interaction.serp:
        return False
    top = interaction.serp[0]
    doc = index.get(top.docno)
    if doc is not None:
        return doc.term_freqs.get(term, 0) > 0
    # the top document is outside the index: fall back to what the log shows
    return term in tokenize(top.snippet, index.config)


def qcm_interaction_model(index: Index, session: Session, i: int, params: QcmParams = QcmParams()) -> QueryModel:
    """Query model of the i-th query (1-based, the current query is n+1)."""
    queries = session.queries
    if not 1 <= i <= len(queries):
        raise IndexError(f"query {i} outside 1..{len(queries)} in session {session.session_id}")
    if i == 1:
        return tf_model(queries[0]) if queries[0].terms else QueryModel()
    prev_interaction = session.history[i - 2]
    if not prev_interaction.serp:
        raise ValueError(f"session {session.session_id}: interaction {i - 1} has no SERP")
    dec = qcm_decompose(queries[i - 2], queries[i - 1])

    def prob(term):
        return sat_prob(index, session, i - 1, term, params.source)

    weights: Dict[str, float] = {}
    for t in dec.theme:
        weights[t] = qcm_weight("theme", prob(t), params=params)
    for t in dec.added:
        if _in_top_document(index, prev_interaction, t):
            weights[t] = qcm_weight("added_present", prob(t), params=params)
        else:
            weights[t] = qcm_weight("added_absent", 0.0, idf(index, t), params=params)
    for t in dec.removed:
        weights[t] = qcm_weight("removed", prob(t), params=params)
    return QueryModel(weights)


def qcm_session_model(index: Index, session: Session, params: QcmParams = QcmParams()) -> QueryModel:
    return aggregate([qcm_interaction_model(index, session, i, params) for i in range(1, len(session) + 1)])


def read_anchors(path) -> AnchorTexts:
    """Read ``{"docno": ..., "anchors": [...]}`` JSON lines."""
    anchors: AnchorTexts = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                anchors.setdefault(obj["docno"], []).extend(obj["anchors"])
    return anchors


def _ngrams(terms: Sequence[str], max_order: int) -> List[Tuple[str, ...]]:
    out = []
    for n in range(2, min(len(terms), max_order) + 1):
        for start in range(len(terms) - n + 1):
            out.append(tuple(terms[start:start + n]))
    return _unique(out)


def _contains(tokens: Sequence[str], gram: Tuple[str, ...]) -> bool:
    n = len(gram)
    return any(tuple(tokens[k:k + n]) == gram for k in range(len(tokens) - n + 1))


def nugget_feedback_texts(
    index: Index,
    interaction,
    params: NuggetParams,
    anchors: Optional[AnchorTexts] = None,
) -> List[List[str]]:
    """Tokenized feedback texts mined from one SERP, one per result."""
    top = list(interaction.serp[: params.k_snippet])
    if params.variant == "RL4":
        clicked = [r for r in top if r.clicked]
        top = clicked or top
    texts = []
    for r in top:
        text = r.snippet
        if params.variant == "RL3" and anchors is not None:
            text = " ".join([text] + list(anchors.get(r.docno, [])[: params.k_anchor]))
        texts.append(tokenize(text, index.config))
    return texts


def accepted_ngrams(query_terms: Sequence[str], texts: Sequence[Sequence[str]], params: NuggetParams) -> List[Tuple[str, ...]]:
    if not texts:
        return []
    accepted = []
    for gram in _ngrams(query_terms, params.max_order):
        hits = sum(1 for toks in texts if _contains(toks, gram))
        if params.comparator == "coverage":
            ok = hits / len(texts) >= params.theta
        else:
            ok = hits >= params.min_count
        if ok:
            accepted.append(gram)
    return accepted


def nugget_interaction_model(
    index: Index,
    session: Session,
    i: int,
    params: NuggetParams = NuggetParams(),
    anchors: Optional[AnchorTexts] = None,
) -> QueryModel:
    queries = session.queries
    query = queries[i - 1]
    if not query.terms:
        return QueryModel()
    weights: Dict = dict(tf_model(query))
    if i >= 2:
        texts = nugget_feedback_texts(index, session.history[i - 2], params, anchors)
        for gram in accepted_ngrams(query.terms, texts, params):
            weights[gram] = params.beta
    return QueryModel(weights)


def nugget_model(
    index: Index,
    session: Session,
    params: NuggetParams = NuggetParams(),
    anchors: Optional[AnchorTexts] = None,
) -> QueryModel:
    if params.variant == "RL3" and anchors is None:
        logger.warning("Nugget RL3 without anchor texts; falling back to RL2 behaviour")
    return aggregate([nugget_interaction_model(index, session, i, params, anchors) for i in range(1, len(session) + 1)])


METHODS = ("tf_first", "tf_last", "tf_all", "nugget_rl2", "nugget_rl3", "nugget_rl4", "qcm")


@dataclass(frozen=True)
class MethodConfig:
    """Everything needed to turn a session into a query model."""

    name: str = "tf_all"
    qcm: QcmParams = QcmParams()
    nugget: NuggetParams = NuggetParams()
    anchors: Optional[Mapping[str, List[str]]] = field(default=None, compare=False, hash=False)

    def __post_init__(self):
        if self.name not in METHODS:
            raise ValueError(f"unknown method {self.name!r}; expected one of {METHODS}")


def session_model(index: Index, session: Session, method: MethodConfig) -> QueryModel:
    name = method.name
    if name.startswith("tf_"):
        scope = {"tf_first": "first_query", "tf_last": "last_query", "tf_all": "all_queries"}[name]
        return tf_session_model(session, scope)
    if name == "qcm":
        return qcm_session_model(index, session, method.qcm)
    variant = name.split("_")[1].upper()
    params = method.nugget
    if params.variant != variant:
        params = NuggetParams(**{**params.__dict__, "variant": variant})
    return nugget_model(index, session, params, method.anchors)
