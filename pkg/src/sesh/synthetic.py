"""Deterministic synthetic session-search benchmark.

The generator produces every input the pipeline consumes: a JSON-lines
corpus, a spam-score sidecar, a Session Track style XML log, topic-centric
qrels with a topic->session mapping and grade map, and anchor texts.
Sessions draw their queries from a small per-topic vocabulary (one theme
term plus facet terms), and their SERPs come from retrieving each logged
query against the generated corpus itself.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Tuple

import numpy as np

DEFAULT_SEED = 2016
FILES = {
    "corpus": "corpus.jsonl",
    "spam": "spam.txt",
    "sessions": "sessions.xml",
    "qrels": "qrels.txt",
    "mapping": "mapping.json",
    "anchors": "anchors.jsonl",
}

_SYLLABLES = [
    "ba", "ce", "di", "fo", "gu", "ha", "je", "ki", "lo", "mu", "na", "pe", "qui", "ro", "su",
    "ta", "ve", "wi", "xo", "yu", "za", "bre", "cla", "dro", "fli", "gra", "plo", "stu", "tri", "vor",
]

# raw grade 4 marks a topic's key page; the grade map folds it to gain 3
RAW_KEY_GRADE = 4
GRADE_MAP = {RAW_KEY_GRADE: 3}


@dataclass
class Benchmark:
    corpus: List[Tuple[str, str]]
    spam: Dict[str, int]
    sessions_xml: bytes
    qrels_text: str
    mapping: dict
    anchors: Dict[str, List[str]]
    session_lengths: Dict[str, int] = field(default_factory=dict)

    def write(self, directory) -> Path:
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / FILES["corpus"], "w", encoding="utf-8") as fh:
            for docno, text in self.corpus:
                fh.write(json.dumps({"docno": docno, "text": text}) + "\n")
        with open(out / FILES["spam"], "w", encoding="utf-8") as fh:
            for docno, sc in self.spam.items():
                fh.write(f"{sc} {docno}\n")
        (out / FILES["sessions"]).write_bytes(self.sessions_xml)
        (out / FILES["qrels"]).write_text(self.qrels_text, encoding="utf-8")
        (out / FILES["mapping"]).write_text(json.dumps(self.mapping, indent=1, sort_keys=True) + "\n", encoding="utf-8")
        with open(out / FILES["anchors"], "w", encoding="utf-8") as fh:
            for docno, anchors in self.anchors.items():
                fh.write(json.dumps({"docno": docno, "anchors": anchors}) + "\n")
        return out


def bundled_path() -> Path:
    """Directory holding the pre-generated default benchmark."""
    return Path(resources.files("sesh") / "data" / "synthetic")


def _words(rng, n: int, prefix: str = "") -> List[str]:
    words = set()
    out = []
    while len(out) < n:
        k = rng.integers(2, 4)
        w = prefix + "".join(_SYLLABLES[i] for i in rng.integers(0, len(_SYLLABLES), size=k))
        if w not in words:
            words.add(w)
            out.append(w)
    return out


def _session_lengths(num_sessions: int) -> List[int]:
    # six length-5 sessions so the progressing-session analysis has material
    base = [1, 2, 2, 3, 5, 4, 2, 5, 6, 3, 1, 5, 2, 4, 5, 3, 6, 2, 5, 1, 3, 4, 5, 2, 6, 3, 2, 4, 1, 3]
    return [base[i % len(base)] for i in range(num_sessions)]


def generate_benchmark(
    seed: int = DEFAULT_SEED,
    num_docs: int = 1000,
    num_topics: int = 20,
    num_sessions: int = 30,
) -> Benchmark:
    from .ranker import RankerConfig, first_pass
    from .sessionlog import Query, Session
    from .textindex import build_index

    rng = np.random.default_rng(seed)
    background = _words(rng, 3000)
    zipf = 1.0 / (np.arange(len(background)) + 2.7)
    zipf /= zipf.sum()
    topic_vocab = _words(rng, num_topics * 4, prefix="z")
    topics = [topic_vocab[4 * t: 4 * t + 4] for t in range(num_topics)]

    def filler(n):
        return [background[i] for i in rng.choice(len(background), size=n, p=zipf)]

    def compose(length, phrases):
        tokens = filler(length)
        for phrase in phrases:
            pos = int(rng.integers(0, len(tokens) + 1))
            tokens[pos:pos] = phrase
        return " ".join(tokens)

    docs: Dict[str, str] = {}
    grades: Dict[int, Dict[str, int]] = {t: {} for t in range(num_topics)}
    anchors: Dict[str, List[str]] = {}
    per_topic = (num_docs * 3 // 5) // num_topics
    serial = 0
    # shuffled numbering so docno order (the tie-break) carries no relevance signal
    numbers = rng.permutation(num_docs) + 1

    def new_docno():
        nonlocal serial
        serial += 1
        return f"doc-{numbers[serial - 1]:05d}"

    for t, (theme, *facets) in enumerate(topics):
        for j in range(per_topic):
            docno = new_docno()
            length = int(rng.integers(80, 200))
            other = topics[int(rng.integers(0, num_topics))][0]
            if j == 0:
                # key page: theme bound to every facet as phrases
                phrases = [[theme, f] for f in facets]
                grades[t][docno] = RAW_KEY_GRADE
            elif j <= 5:
                f = str(rng.choice(facets))
                phrases = [[theme, f]] + [[f]] * int(rng.integers(0, 3))
                grades[t][docno] = 2
            elif j <= 11:
                # relevant but lexically weak: a facet, the theme only sometimes
                phrases = [[str(rng.choice(facets))]] * int(rng.integers(1, 3))
                if rng.random() < 0.4:
                    phrases.append([theme])
                grades[t][docno] = 1
            elif j % 3 == 0:
                # theme-heavy page on the wrong subject
                phrases = [[theme]] * int(rng.integers(2, 6))
                if rng.random() < 0.5:
                    grades[t][docno] = 0
            elif j % 3 == 1:
                # facets under another topic's theme
                phrases = [[other, f] for f in rng.choice(facets, size=2, replace=False)] * int(rng.integers(1, 3))
                grades[t][docno] = 0
            else:
                phrases = [[theme], [str(rng.choice(facets))]] * int(rng.integers(1, 3))
                if rng.random() < 0.5:
                    grades[t][docno] = 0
            docs[docno] = compose(length, phrases)
            if grades[t].get(docno, 0) > 0 and rng.random() < 0.6:
                anchors[docno] = [f"{theme} {rng.choice(facets)}", f"about {theme}"] + filler(2)
    while len(docs) < num_docs:
        docno = new_docno()
        extra = [[str(w)] for w in rng.choice(topic_vocab, size=int(rng.integers(0, 3)))]
        docs[docno] = compose(int(rng.integers(60, 220)), extra)

    docnos = sorted(docs)
    spam = {d: int(rng.integers(70, 100)) for d in docnos}
    for d in rng.choice(docnos, size=num_docs // 20, replace=False):
        spam[str(d)] = int(rng.integers(0, 70))
    for t in range(num_topics):
        for d in list(grades[t]):
            if spam[d] < 70 and rng.random() < 0.5:
                grades[t][d] = -2

    corpus = [(d, docs[d]) for d in docnos]
    index = build_index(corpus, spam=spam, threshold=70)
    spam_docs = [d for d in docnos if spam[d] < 70]

    # sessions: the first num_topics sessions take one topic each, the rest revisit topics
    lengths = _session_lengths(num_sessions)
    topic_to_sessions: Dict[str, List[str]] = {}
    root = ET.Element("sessiontrack2014")
    for s in range(num_sessions):
        t = s if s < num_topics else int(rng.integers(0, num_topics))
        sid = str(s + 1)
        topic_id = f"T{t + 1}"
        topic_to_sessions.setdefault(topic_id, []).append(sid)
        theme, *facets = topics[t]
        pool = facets if s % 5 == 4 else facets[:2]
        queries = _query_sequence(rng, theme, pool, lengths[s])

        se = ET.SubElement(root, "session", num=sid, starttime="0")
        ET.SubElement(se, "topic", num=topic_id)
        clock = 0.0
        for i, q in enumerate(queries[:-1], 1):
            ie = ET.SubElement(se, "interaction", num=str(i), starttime=f"{clock:.2f}", type="reformulate")
            ET.SubElement(ie, "query").text = " ".join(q)
            probe = Session(sid, (), Query(" ".join(q), tuple(q)))
            serp = list(first_pass(index, probe, RankerConfig(first_pass_n=10)).docnos)
            if spam_docs and rng.random() < 0.3:
                serp.insert(int(rng.integers(0, len(serp))), str(rng.choice(spam_docs)))
                serp = serp[:10]
            results = ET.SubElement(ie, "results")
            for rank, docno in enumerate(serp, 1):
                re_ = ET.SubElement(results, "result", rank=str(rank))
                ET.SubElement(re_, "url").text = f"http://example.org/{docno}"
                ET.SubElement(re_, "clueweb12id").text = docno
                ET.SubElement(re_, "title").text = " ".join(docs[docno].split()[:5])
                ET.SubElement(re_, "snippet").text = _snippet(docs[docno], q)
            clicks = []
            for rank, docno in enumerate(serp, 1):
                g = grades[t].get(docno, 0)
                if rng.random() < (0.7 if g > 0 else 0.1):
                    dwell = float(rng.uniform(30, 120) if g > 0 and rng.random() < 0.8 else rng.uniform(3, 25))
                    clicks.append((rank, docno, dwell))
            if clicks:
                ce = ET.SubElement(ie, "clicked")
                for num, (rank, docno, dwell) in enumerate(clicks, 1):
                    start = clock + 5 * num
                    click = ET.SubElement(ce, "click", num=str(num), starttime=f"{start:.2f}", endtime=f"{start + dwell:.2f}")
                    ET.SubElement(click, "rank").text = str(rank)
                    ET.SubElement(click, "docno").text = docno
            clock += 60 + 10 * len(clicks)
        cq = ET.SubElement(se, "currentquery", starttime=f"{clock:.2f}")
        ET.SubElement(cq, "query").text = " ".join(queries[-1])
    ET.indent(root)
    sessions_xml = ET.tostring(root, encoding="utf-8", xml_declaration=True) + b"\n"

    lines = []
    for t in range(num_topics):
        for docno in sorted(grades[t]):
            lines.append(f"T{t + 1} 0 {docno} {grades[t][docno]}\n")
    mapping = {
        "topic_to_sessions": topic_to_sessions,
        "grade_map": {str(k): v for k, v in GRADE_MAP.items()},
    }
    return Benchmark(
        corpus=corpus,
        spam=spam,
        sessions_xml=sessions_xml,
        qrels_text="".join(lines),
        mapping=mapping,
        anchors={d: anchors[d] for d in sorted(anchors)},
        session_lengths={str(s + 1): lengths[s] for s in range(num_sessions)},
    )


def _query_sequence(rng, theme: str, facets: List[str], length: int) -> List[List[str]]:
    """Queries that keep the theme, drift across facets, and sometimes drop the theme."""
    queries = []
    current = [theme] if rng.random() < 0.5 else [theme, str(rng.choice(facets))]
    for _ in range(length):
        queries.append(list(current))
        move = rng.random()
        if move < 0.45:
            current = [theme, str(rng.choice(facets))]
        elif move < 0.75:
            extra = [f for f in facets if f not in current]
            current = current + [str(rng.choice(extra))] if extra else [theme]
        elif move < 0.9:
            current = [str(rng.choice(facets))]
        else:
            current = [theme]
    return queries


def _snippet(text: str, query: List[str], width: int = 12) -> str:
    tokens = text.split()
    hits = [i for i, tok in enumerate(tokens) if tok in query]
    center = hits[0] if hits else 0
    start = max(0, center - width // 2)
    return " ".join(tokens[start:start + width])
