"""Two-phase retrieval and TREC run files."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

from .diagnostics import Diagnostics
from .lmscore import QueryModel, SmoothingConfig, score
from .querymodels import tf_model
from .sessionlog import Session
from .textindex import Index

logger = logging.getLogger(__name__)

DEFAULT_FIRST_PASS = 2000
MISSING_SCORE = -math.inf


@dataclass(frozen=True)
class RankerConfig:
    smoothing: SmoothingConfig = SmoothingConfig()
    first_pass_n: int = DEFAULT_FIRST_PASS

    def __post_init__(self):
        if self.first_pass_n < 1:
            raise ValueError("first_pass_n must be >= 1")


@dataclass(frozen=True)
class CandidateSet:
    session_id: str
    docnos: Tuple[str, ...]


@dataclass(frozen=True)
class Ranking:
    session_id: str
    entries: Tuple[Tuple[str, float, int], ...]

    def __post_init__(self):
        seen = set()
        for pos, (docno, _, rank) in enumerate(self.entries, 1):
            if rank != pos:
                raise ValueError(f"{self.session_id}: rank {rank} at position {pos}")
            if docno in seen:
                raise ValueError(f"{self.session_id}: duplicate docno {docno}")
            seen.add(docno)

    def check_order(self) -> None:
        """Raise unless scores are non-increasing with ties by ascending docno.

        Not enforced on construction: runs read back from disk carry rounded
        scores that may tie out of docno order.
        """
        for (d0, s0, _), (d1, s1, r1) in zip(self.entries, self.entries[1:]):
            if s1 > s0 or (s1 == s0 and d1 < d0):
                raise ValueError(f"{self.session_id}: entries out of order at rank {r1}")

    @classmethod
    def from_scores(cls, session_id: str, scored: Iterable[Tuple[str, float]]) -> "Ranking":
        ordered = sorted(scored, key=lambda x: (-x[1], x[0]))
        return cls(session_id, tuple((d, s, r) for r, (d, s) in enumerate(ordered, 1)))

    @property
    def docnos(self) -> List[str]:
        return [e[0] for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)

    def truncated(self, n: int) -> "Ranking":
        return Ranking(self.session_id, self.entries[:n])


def first_pass(index: Index, session: Session, cfg: RankerConfig = RankerConfig()) -> CandidateSet:
    """Top ``cfg.first_pass_n`` documents for the current query alone."""
    if not session.current_query.terms:
        raise ValueError(f"session {session.session_id}: empty current query")
    qm = tf_model(session.current_query)
    smoothing = cfg.smoothing
    scored = [(doc.docno, score(index, doc, qm, smoothing)) for doc in index.documents]
    scored.sort(key=lambda x: (-x[1], x[0]))
    return CandidateSet(session.session_id, tuple(d for d, _ in scored[: cfg.first_pass_n]))


def rerank(
    index: Index,
    candidates: CandidateSet,
    qm: QueryModel,
    cfg: RankerConfig = RankerConfig(),
    report: Optional[Diagnostics] = None,
) -> Ranking:
    if not candidates.docnos:
        raise ValueError(f"session {candidates.session_id}: no candidates to rerank")
    scored = []
    for docno in candidates.docnos:
        doc = index.get(docno)
        if doc is None:
            msg = f"session {candidates.session_id}: candidate {docno} not in index; ranked last"
            if report is not None:
                report.warn(msg)
            else:
                logger.warning(msg)
            scored.append((docno, MISSING_SCORE))
        else:
            scored.append((docno, score(index, doc, qm, cfg.smoothing)))
    return Ranking.from_scores(candidates.session_id, scored)


def write_run(rankings: Iterable[Ranking], tag: str) -> str:
    if not tag or any(c.isspace() for c in tag):
        raise ValueError(f"run tag must be non-empty without whitespace: {tag!r}")
    lines = []
    for ranking in rankings:
        ranking.check_order()
        for docno, sc, rank in ranking.entries:
            lines.append(f"{ranking.session_id} Q0 {docno} {rank} {sc:.6f} {tag}\n")
    return "".join(lines)


def read_run(text: str) -> List[Ranking]:
    """Parse run lines; entries are ordered by their rank column."""
    grouped: Dict[str, List[Tuple[int, str, float]]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts:
            continue
        if len(parts) != 6:
            raise ValueError(f"run line {lineno}: expected 6 fields, got {len(parts)}")
        sid, _, docno, rank, sc, _tag = parts
        grouped.setdefault(sid, []).append((int(rank), docno, float(sc)))
    out = []
    for sid, rows in grouped.items():
        rows.sort()
        out.append(Ranking(sid, tuple((d, s, r) for r, (_, d, s) in enumerate(rows, 1))))
    return out
