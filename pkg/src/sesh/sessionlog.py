"""TREC Session Track logs and session-centric relevance judgments."""

from __future__ import annotations

import io
import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from .diagnostics import Diagnostics
from .textindex import TokenizerConfig, _open_text, tokenize

#: Clicks with at least this dwell time (seconds) count as satisfied.
SAT_DWELL_SECONDS = 30.0

Qrels = Dict[str, Dict[str, int]]


class SessionLogError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class Query:
    text: str
    terms: Tuple[str, ...]

    @classmethod
    def from_text(cls, text: str, config: TokenizerConfig = TokenizerConfig()) -> "Query":
        return cls(text, tuple(tokenize(text, config)))

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class ResultEntry:
    docno: str
    rank: int
    title: str = ""
    snippet: str = ""
    clicked: bool = False
    sat_click: bool = False

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f"result rank must be >= 1, got {self.rank}")
        if self.sat_click and not self.clicked:
            raise ValueError(f"SAT click on unclicked result {self.docno}")


@dataclass(frozen=True)
class Interaction:
    query: Query
    serp: Tuple[ResultEntry, ...] = ()

    def __post_init__(self):
        ranks = [r.rank for r in self.serp]
        if ranks != list(range(1, len(ranks) + 1)):
            raise ValueError(f"SERP ranks must run 1..n, got {ranks}")

    @property
    def sat_docnos(self) -> List[str]:
        return [r.docno for r in self.serp if r.sat_click]

    @property
    def clicked_docnos(self) -> List[str]:
        return [r.docno for r in self.serp if r.clicked]


@dataclass(frozen=True)
class Session:
    session_id: str
    history: Tuple[Interaction, ...]
    current_query: Query
    topic_id: Optional[str] = None

    @property
    def queries(self) -> List[Query]:
        """All queries q_1 ... q_{n+1}, the current one last."""
        return [it.query for it in self.history] + [self.current_query]

    def __len__(self) -> int:
        return len(self.history) + 1

    def truncated(self, j: int, previous_only: bool = False) -> "Session":
        """The session as it stood when query ``j`` (1-based) was issued."""
        if not 1 <= j <= len(self):
            raise IndexError(f"query index {j} outside 1..{len(self)}")
        current = self.queries[j - 1]
        history = self.history[: j - 1]
        if previous_only:
            history = history[-1:]
        return Session(self.session_id, tuple(history), current, self.topic_id)


def _line_of(exc: ET.ParseError) -> int:
    return exc.position[0]


def _truthy(value: str) -> bool:
    return value.strip().lower() in ("1", "true", "yes", "sat")


def _result_docno(elem: ET.Element) -> str:
    for tag in ("clueweb12id", "clueweb09id", "docno", "docid"):
        text = elem.findtext(tag)
        if text and text.strip():
            return text.strip()
    url = elem.findtext("url")
    if url and url.strip():
        return url.strip()
    raise SessionLogError("result without a document id")


def _is_sat(click: ET.Element, dwell: float) -> bool:
    for attr in ("sat", "satisfied"):
        if attr in click.attrib:
            return _truthy(click.attrib[attr])
    start, end = click.get("starttime"), click.get("endtime")
    if start is None or end is None:
        return False
    try:
        return float(end) - float(start) >= dwell
    except ValueError:
        return False


def _parse_interaction(elem: ET.Element, config: TokenizerConfig, dwell: float) -> Interaction:
    query = Query.from_text((elem.findtext("query") or "").strip(), config)
    results = []
    for pos, res in enumerate(elem.iterfind("results/result"), 1):
        rank = int(res.get("rank", pos))
        results.append(
            (rank, _result_docno(res), (res.findtext("title") or "").strip(), (res.findtext("snippet") or "").strip())
        )
    results.sort(key=lambda r: r[0])
    # clicks reference results by rank, or by docno in some editions
    clicked: Dict[int, bool] = {}
    by_docno = {docno: rank for rank, docno, _, _ in results}
    for click in elem.iterfind("clicked/click"):
        rank_text = click.findtext("rank")
        if rank_text is not None and rank_text.strip():
            rank = int(rank_text)
        else:
            rank = by_docno.get((click.findtext("docno") or "").strip())
            if rank is None:
                continue
        clicked[rank] = clicked.get(rank, False) or _is_sat(click, dwell)
    serp = []
    for new_rank, (rank, docno, title, snippet) in enumerate(results, 1):
        serp.append(ResultEntry(docno, new_rank, title, snippet, rank in clicked, clicked.get(rank, False)))
    return Interaction(query, tuple(serp))


def parse_sessions(
    source: Union[bytes, str, Path, IO[bytes]],
    config: TokenizerConfig = TokenizerConfig(),
    report: Optional[Diagnostics] = None,
    sat_dwell: float = SAT_DWELL_SECONDS,
) -> List[Session]:
    """Parse a Session Track XML log (2011-2014 layouts).

    Sessions without a usable current query are skipped and recorded in
    ``report``.
    """
    if report is None:
        report = Diagnostics()
    if isinstance(source, bytes):
        source = io.BytesIO(source)
    try:
        root = ET.parse(source).getroot()
    except ET.ParseError as exc:
        raise SessionLogError(f"malformed session XML: {exc.msg}", _line_of(exc)) from None

    sessions = []
    seen = set()
    for elem in root.iter("session"):
        session_id = elem.get("num") or elem.get("id")
        if session_id is None:
            raise SessionLogError("session element without num attribute")
        if session_id in seen:
            raise SessionLogError(f"duplicate session id {session_id}")
        seen.add(session_id)
        topic = elem.find("topic")
        topic_id = topic.get("num") if topic is not None else elem.get("topic")

        history = tuple(_parse_interaction(it, config, sat_dwell) for it in elem.iterfind("interaction"))
        for i, it in enumerate(history, 1):
            if not it.query.terms:
                report.warn(f"session {session_id}: interaction {i} has an empty query")
        current = elem.find("currentquery")
        if current is None or not (current.findtext("query") or "").strip():
            report.skip(session_id, "missing current query")
            continue
        current_query = Query.from_text(current.findtext("query").strip(), config)
        if not current_query.terms:
            report.skip(session_id, "current query is empty after tokenization")
            continue
        sessions.append(Session(session_id, history, current_query, topic_id))
    report.counts["sessions"] += len(sessions)
    return sessions


def dump_sessions(sessions: Iterable[Session]) -> bytes:
    """Serialize sessions back to Session Track XML (debug dump).

    SAT flags are written explicitly so the dump re-parses to equal sessions.
    """
    root = ET.Element("sessiontrack")
    for s in sessions:
        se = ET.SubElement(root, "session", num=s.session_id)
        if s.topic_id is not None:
            ET.SubElement(se, "topic", num=s.topic_id)
        for i, it in enumerate(s.history, 1):
            ie = ET.SubElement(se, "interaction", num=str(i))
            ET.SubElement(ie, "query").text = it.query.text
            results = ET.SubElement(ie, "results")
            for r in it.serp:
                re_ = ET.SubElement(results, "result", rank=str(r.rank))
                ET.SubElement(re_, "docno").text = r.docno
                ET.SubElement(re_, "title").text = r.title
                ET.SubElement(re_, "snippet").text = r.snippet
            clicked = [r for r in it.serp if r.clicked]
            if clicked:
                ce = ET.SubElement(ie, "clicked")
                for num, r in enumerate(clicked, 1):
                    click = ET.SubElement(ce, "click", num=str(num), sat="1" if r.sat_click else "0")
                    ET.SubElement(click, "rank").text = str(r.rank)
        cq = ET.SubElement(se, "currentquery")
        ET.SubElement(cq, "query").text = s.current_query.text
    ET.indent(root)
    return ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"


def read_mapping(source) -> Tuple[Dict[str, List[str]], Dict[int, int]]:
    """Load ``{"topic_to_sessions": ..., "grade_map": ...}`` from JSON."""
    if isinstance(source, (str, Path)):
        obj = json.loads(Path(source).read_text(encoding="utf-8"))
    elif isinstance(source, Mapping):
        obj = source
    else:
        obj = json.load(source)
    topic_map = {str(t): [str(s) for s in ss] for t, ss in obj.get("topic_to_sessions", {}).items()}
    grade_map = {int(k): int(v) for k, v in obj.get("grade_map", {}).items()}
    return topic_map, grade_map


def topic_map_from_sessions(sessions: Iterable[Session]) -> Dict[str, List[str]]:
    out: Dict[str, List[str]] = {}
    for s in sessions:
        if s.topic_id is not None:
            out.setdefault(s.topic_id, []).append(s.session_id)
    return out


def parse_qrels(
    source,
    topic_map: Optional[Mapping[str, Sequence[str]]] = None,
    grade_map: Optional[Mapping[int, int]] = None,
    report: Optional[Diagnostics] = None,
) -> Qrels:
    """Read ``topic 0 docno grade`` lines into session-centric judgments.

    Without ``topic_map`` the topic ids are taken to be session ids. Grades
    missing from ``grade_map`` pass through unchanged.
    """
    if report is None:
        report = Diagnostics()
    grade_map = grade_map or {}
    by_topic: Dict[str, Dict[str, int]] = {}
    with _open_text(source) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            report.counts["qrels_lines"] += 1
            if len(parts) != 4:
                report.warn(f"qrels line {lineno}: expected 4 fields, got {len(parts)}")
                report.counts["qrels_rejected"] += 1
                continue
            topic, _, docno, grade_text = parts
            try:
                grade = int(grade_text)
            except ValueError:
                report.warn(f"qrels line {lineno}: non-integer grade {grade_text!r}")
                report.counts["qrels_rejected"] += 1
                continue
            judged = by_topic.setdefault(topic, {})
            if docno in judged:
                report.warn(f"qrels line {lineno}: duplicate judgment for ({topic}, {docno}); last line wins")
                report.counts["qrels_duplicates"] += 1
            judged[docno] = grade_map.get(grade, grade)

    qrels: Qrels = {}
    for topic, judged in by_topic.items():
        sessions = [topic] if topic_map is None else topic_map.get(topic)
        if not sessions:
            report.warn(f"qrels: topic {topic} has no session mapping; {len(judged)} judgments dropped")
            report.counts["qrels_unmapped"] += len(judged)
            continue
        for session_id in sessions:
            qrels.setdefault(session_id, {}).update(judged)
    report.counts["qrels_entries"] += sum(len(v) for v in qrels.values())
    return qrels


def write_qrels(qrels: Mapping[str, Mapping[str, int]]) -> str:
    lines = []
    for sid in qrels:
        for docno, grade in qrels[sid].items():
            lines.append(f"{sid} 0 {docno} {grade}\n")
    return "".join(lines)
