"""Upper bounds: the ground-truth re-ranking and ideal unigram term weights."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .lmscore import QueryModel, SmoothingConfig, doc_prob
from .metrics import NoRelevantJudgments, ndcg_at_k
from .ranker import CandidateSet, Ranking
from .sessionlog import Session
from .textindex import Index

DEFAULT_MAX_ASSIGNMENTS = 10_000_000


class GridTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class GridConfig:
    lo: float = -1.0
    hi: float = 1.0
    step: float = 0.1
    max_unique_terms: int = 7
    max_assignments: int = DEFAULT_MAX_ASSIGNMENTS

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError("grid lo must be below hi")
        if not self.step > 0:
            raise ValueError("grid step must be positive")
        self.lattice  # validates alignment

    @property
    def lattice(self) -> Tuple[int, int, int]:
        """(k_lo, k_hi, denominator) with weights k / denominator.

        Working in integers keeps the 21-point default lattice free of
        accumulated floating-point drift.
        """
        denom = round(1 / self.step)
        if not math.isclose(denom * self.step, 1.0, rel_tol=1e-9):
            raise ValueError(f"grid step {self.step} must be 1/integer")
        k_lo, k_hi = round(self.lo * denom), round(self.hi * denom)
        if not (math.isclose(k_lo / denom, self.lo, abs_tol=1e-9) and math.isclose(k_hi / denom, self.hi, abs_tol=1e-9)):
            raise ValueError("grid bounds must be multiples of the step")
        return k_lo, k_hi, denom

    @property
    def weights(self) -> List[float]:
        k_lo, k_hi, denom = self.lattice
        return [k / denom for k in range(k_lo, k_hi + 1)]

    @property
    def points_per_term(self) -> int:
        k_lo, k_hi, _ = self.lattice
        return k_hi - k_lo + 1


@dataclass(frozen=True)
class GridResult:
    session_id: str
    terms: Tuple[str, ...]
    best_vector: Tuple[float, ...]
    best_ndcg: float
    assignments_evaluated: int
    extra_evaluated: int = 0
    #: True when the maximum came from an injected extra point
    best_is_extra: bool = False

    @property
    def best_weights(self) -> QueryModel:
        return QueryModel(zip(self.terms, self.best_vector))

    def as_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "terms": list(self.terms),
            "best_weights": list(self.best_vector),
            "best_ndcg": self.best_ndcg,
            "assignments_evaluated": self.assignments_evaluated,
            "extra_evaluated": self.extra_evaluated,
            "best_is_extra": self.best_is_extra,
        }


def _gain(grade: Optional[int]) -> int:
    return max(0, grade or 0)


def ground_truth_rank(candidates: CandidateSet, judged: Mapping[str, int]) -> Ranking:
    """Order candidates by judged gain; unjudged documents have gain 0."""
    if not candidates.docnos:
        raise ValueError(f"session {candidates.session_id}: no candidates")
    return Ranking.from_scores(candidates.session_id, ((d, float(_gain(judged.get(d)))) for d in candidates.docnos))


def session_terms(session: Session) -> Tuple[str, ...]:
    """Unique unigram terms over all queries of the session, sorted."""
    return tuple(sorted({t for q in session.queries for t in q.terms}))


class _NdcgEvaluator:
    """Scores candidates under many weight vectors at once.

    Per-document scores are accumulated term by term in the same order and
    with the same arithmetic as ``lmscore.score`` over a model whose entities
    are ``terms`` in order, so rankings agree exactly with ``rerank``.
    """

    def __init__(self, index, candidates, terms, judged, cfg, k=10):
        gains = {d: g for d, g in judged.items() if g > 0}
        if not gains:
            raise NoRelevantJudgments(f"session {candidates.session_id}: no positively judged documents")
        # candidates sorted by docno so a stable argsort breaks ties by docno
        docnos = sorted(candidates.docnos)
        present = [d for d in docnos if d in index]
        absent = [d for d in docnos if d not in index]
        self.docnos = present
        self.absent = absent
        self.logp = np.array(
            [[math.log(doc_prob(index, d, t, cfg)) for t in terms] for d in present], dtype=np.float64
        ).reshape(len(present), len(terms))
        self.gain_present = np.array([gains.get(d, 0) for d in present], dtype=np.float64)
        self.gain_absent = np.array([gains.get(d, 0) for d in absent], dtype=np.float64)
        self.k = k
        self.discount = 1.0 / np.log2(np.arange(2, k + 2, dtype=np.float64))
        ideal = sorted(gains.values(), reverse=True)[:k]
        self.idcg = sum(g / math.log2(r + 1) for r, g in enumerate(ideal, 1))

    def _order(self, weights: np.ndarray) -> np.ndarray:
        scores = np.zeros((len(self.docnos), weights.shape[0]), dtype=np.float64)
        for t in range(weights.shape[1]):
            w = weights[:, t]
            # zero-weight entities are absent from a QueryModel: skip them exactly
            scores += np.where(w != 0.0, w[None, :] * self.logp[:, t:t + 1], 0.0)
        return np.argsort(-scores, axis=0, kind="stable")

    def ranked_docnos(self, vector: Sequence[float]) -> List[str]:
        order = self._order(np.asarray(vector, dtype=np.float64).reshape(1, -1))[:, 0]
        return [self.docnos[i] for i in order] + self.absent

    def ndcg(self, weights: np.ndarray) -> np.ndarray:
        """NDCG@k for each row of ``weights`` (shape B x T)."""
        b = weights.shape[0]
        order = self._order(weights)
        top = self.gain_present[order[: self.k]]
        if top.shape[0] < self.k and self.gain_absent.size:
            # missing documents rank after every indexed one, in docno order
            fill = self.gain_absent[: self.k - top.shape[0]]
            top = np.vstack([top, np.repeat(fill[:, None], b, axis=1)])
        dcg = (top * self.discount[: top.shape[0], None]).sum(axis=0)
        return dcg / self.idcg


def ideal_weights(
    index: Index,
    session: Session,
    candidates: CandidateSet,
    judged: Mapping[str, int],
    grid: GridConfig = GridConfig(),
    cfg: SmoothingConfig = SmoothingConfig(),
    extra_points: Iterable[Mapping[str, float]] = (),
    batch_size: int = 20_000,
) -> GridResult:
    """Exhaustive grid search over unigram weights maximizing NDCG@10.

    Assignments are enumerated in lexicographic order of the weight vector
    (terms sorted), and only a strictly better NDCG replaces the incumbent,
    so ties resolve to the lexicographically smallest maximizer. Optional
    ``extra_points`` (term -> weight maps) are evaluated after the grid and
    win only when strictly better.
    """
    terms = session_terms(session)
    if len(terms) > grid.max_unique_terms:
        raise GridTooLarge(f"session {session.session_id}: {len(terms)} unique terms > {grid.max_unique_terms}")
    total = grid.points_per_term ** len(terms)
    if total > grid.max_assignments:
        raise GridTooLarge(f"session {session.session_id}: {total} assignments > cap {grid.max_assignments}")
    evaluator = _NdcgEvaluator(index, candidates, terms, judged, cfg)
    lattice = np.array(grid.weights, dtype=np.float64)

    best_ndcg, best_vec = -1.0, None
    product = itertools.product(range(len(lattice)), repeat=len(terms))
    while True:
        chunk = list(itertools.islice(product, batch_size))
        if not chunk:
            break
        weights = lattice[np.array(chunk, dtype=np.int64).reshape(len(chunk), len(terms))]
        values = evaluator.ndcg(weights)
        i = int(np.argmax(values))  # first maximum within the batch
        if values[i] > best_ndcg:
            best_ndcg, best_vec = float(values[i]), tuple(float(w) for w in weights[i])

    extras = [tuple(float(p.get(t, 0.0)) for t in terms) for p in extra_points]
    best_is_extra = False
    if extras:
        values = evaluator.ndcg(np.array(extras, dtype=np.float64).reshape(len(extras), len(terms)))
        i = int(np.argmax(values))
        if values[i] > best_ndcg:
            best_ndcg, best_vec, best_is_extra = float(values[i]), extras[i], True
    # report the winner through the scalar metric so it compares exactly with other runs
    best_ndcg = ndcg_at_k(evaluator.ranked_docnos(best_vec), judged)
    return GridResult(session.session_id, terms, best_vec, best_ndcg, total, len(extras), best_is_extra)


def assignment_ndcg(
    index: Index,
    session: Session,
    candidates: CandidateSet,
    judged: Mapping[str, int],
    weights: Mapping[str, float],
    cfg: SmoothingConfig = SmoothingConfig(),
) -> float:
    """NDCG@10 of a single term-weight assignment through the grid evaluator."""
    terms = session_terms(session)
    evaluator = _NdcgEvaluator(index, candidates, terms, judged, cfg)
    return ndcg_at_k(evaluator.ranked_docnos([float(weights.get(t, 0.0)) for t in terms]), judged)
