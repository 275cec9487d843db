"""NDCG@10 / MRR evaluation and the analyses built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .diagnostics import Diagnostics
from .querymodels import MethodConfig, session_model
from .ranker import Ranking, RankerConfig, first_pass, rerank
from .sessionlog import Session
from .textindex import Index


class NoRelevantJudgments(ValueError):
    pass


@dataclass(frozen=True)
class EvalResult:
    session_id: str
    ndcg_at_10: float
    mrr: float


@dataclass
class EvalSummary:
    results: List[EvalResult] = field(default_factory=list)
    #: sessions without positively judged documents
    excluded: List[str] = field(default_factory=list)
    #: run sessions absent from the qrels
    unknown: List[str] = field(default_factory=list)
    #: qrels sessions absent from the run
    missing: List[str] = field(default_factory=list)

    @property
    def mean_ndcg(self) -> Optional[float]:
        return _mean([r.ndcg_at_10 for r in self.results])

    @property
    def mean_mrr(self) -> Optional[float]:
        return _mean([r.mrr for r in self.results])

    def as_dict(self) -> dict:
        return {
            "sessions_evaluated": len(self.results),
            "ndcg_at_10": self.mean_ndcg,
            "mrr": self.mean_mrr,
            "excluded_no_relevant": self.excluded,
            "unknown_sessions": self.unknown,
            "missing_sessions": self.missing,
        }


def _mean(values: Sequence[float]) -> Optional[float]:
    return math.fsum(values) / len(values) if values else None


def _docnos(ranking) -> List[str]:
    return ranking.docnos if isinstance(ranking, Ranking) else list(ranking)


def _gains(judged: Mapping[str, int]) -> Dict[str, int]:
    return {d: g for d, g in judged.items() if g > 0}


def ndcg_at_k(ranking: Union[Ranking, Sequence[str]], judged: Mapping[str, int], k: int = 10) -> float:
    """Linear-gain NDCG; negative grades count as zero gain."""
    gains = _gains(judged)
    if not gains:
        raise NoRelevantJudgments("no positively judged documents")
    dcg = 0.0
    for r, docno in enumerate(_docnos(ranking)[:k], 1):
        g = gains.get(docno)
        if g:
            dcg += g / math.log2(r + 1)
    ideal = sorted(gains.values(), reverse=True)[:k]
    idcg = sum(g / math.log2(r + 1) for r, g in enumerate(ideal, 1))
    return dcg / idcg


def mrr(ranking: Union[Ranking, Sequence[str]], judged: Mapping[str, int]) -> float:
    gains = _gains(judged)
    if not gains:
        raise NoRelevantJudgments("no positively judged documents")
    for r, docno in enumerate(_docnos(ranking), 1):
        if docno in gains:
            return 1.0 / r
    return 0.0


def evaluate_run(
    run: Iterable[Ranking],
    qrels: Mapping[str, Mapping[str, int]],
    missing_as_zero: bool = False,
    report: Optional[Diagnostics] = None,
) -> EvalSummary:
    if report is None:
        report = Diagnostics()
    summary = EvalSummary()
    seen = set()
    for ranking in run:
        sid = ranking.session_id
        seen.add(sid)
        if sid not in qrels:
            report.warn(f"run session {sid} has no judgments; skipped")
            summary.unknown.append(sid)
            continue
        try:
            result = EvalResult(sid, ndcg_at_k(ranking, qrels[sid]), mrr(ranking, qrels[sid]))
        except NoRelevantJudgments:
            report.skip(sid, "no positively judged documents")
            summary.excluded.append(sid)
            continue
        summary.results.append(result)
    for sid in qrels:
        if sid in seen:
            continue
        summary.missing.append(sid)
        if missing_as_zero and _gains(qrels[sid]):
            summary.results.append(EvalResult(sid, 0.0, 0.0))
        else:
            report.warn(f"judged session {sid} absent from run")
    return summary


def by_session_length(results: Iterable[EvalResult], sessions: Iterable[Session]) -> Dict[int, Tuple[int, float]]:
    """Map session length (number of queries) to (count, mean NDCG@10)."""
    lengths = {s.session_id: len(s) for s in sessions}
    groups: Dict[int, List[float]] = {}
    for r in results:
        groups.setdefault(lengths[r.session_id], []).append(r.ndcg_at_10)
    return {n: (len(v), math.fsum(v) / len(v)) for n, v in sorted(groups.items())}


ModelBuilder = Callable[[Index, Session], "object"]


def progressing_session(
    index: Index,
    session: Session,
    method: Union[MethodConfig, ModelBuilder],
    qrels: Mapping[str, Mapping[str, int]],
    mode: str = "full_history",
    cfg: RankerConfig = RankerConfig(),
) -> List[float]:
    """NDCG@10 after each query of ``session``, replaying its history.

    ``mode="previous_query_only"`` keeps only the interaction right before
    the query being answered.
    """
    if mode not in ("full_history", "previous_query_only"):
        raise ValueError(f"unknown history mode {mode!r}")
    judged = qrels[session.session_id]
    build = method if callable(method) else (lambda idx, s: session_model(idx, s, method))
    values = []
    for j in range(1, len(session) + 1):
        partial = session.truncated(j, previous_only=mode == "previous_query_only")
        candidates = first_pass(index, partial, cfg)
        ranking = rerank(index, candidates, build(index, partial), cfg)
        values.append(ndcg_at_k(ranking, judged))
    return values


@dataclass(frozen=True)
class BoxStats:
    q1: float
    median: float
    q3: float
    mean: float
    whisker_low: float
    whisker_high: float
    outliers: Tuple[float, ...]

    def as_dict(self) -> dict:
        return {
            "q1": self.q1,
            "median": self.median,
            "q3": self.q3,
            "mean": self.mean,
            "whisker_low": self.whisker_low,
            "whisker_high": self.whisker_high,
            "outliers": list(self.outliers),
        }


def box_stats(values: Iterable[float], whis: float = 1.5) -> BoxStats:
    """Box-plot summary.

    Quartiles use linear interpolation between order statistics (numpy's
    default percentile rule, as matplotlib's box plots do). Whiskers sit on
    the most extreme data points within ``whis`` IQRs of the box.
    """
    x = np.asarray(list(values), dtype=float)
    if x.size == 0:
        raise ValueError("box_stats needs at least one value")
    q1, median, q3 = (float(v) for v in np.percentile(x, [25, 50, 75]))
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - whis * iqr, q3 + whis * iqr
    inside = x[(x >= lo_fence) & (x <= hi_fence)]
    low, high = float(inside.min()), float(inside.max())
    outliers = tuple(float(v) for v in np.sort(x[(x < low) | (x > high)]))
    return BoxStats(q1, median, q3, math.fsum(x.tolist()) / x.size, low, high, outliers)
