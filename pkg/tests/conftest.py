import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sesh.sessionlog import parse_qrels, parse_sessions, read_mapping
from sesh.synthetic import FILES, bundled_path
from sesh.textindex import build_index, read_corpus, read_spam_scores


@pytest.fixture(scope="session")
def bench_dir():
    return bundled_path()


@pytest.fixture(scope="session")
def bench_index(bench_dir):
    return build_index(read_corpus(bench_dir / FILES["corpus"]), read_spam_scores(bench_dir / FILES["spam"]), 70)


@pytest.fixture(scope="session")
def bench_sessions(bench_dir):
    return parse_sessions(bench_dir / FILES["sessions"])


@pytest.fixture(scope="session")
def bench_qrels(bench_dir):
    topic_map, grade_map = read_mapping(bench_dir / FILES["mapping"])
    return parse_qrels(bench_dir / FILES["qrels"], topic_map, grade_map)


def toy_index(*texts, **kw):
    return build_index([(f"d{i}", t) for i, t in enumerate(texts, 1)], **kw)


def make_session(history, current, sid="s1", topic=None):
    """Session from ``[(query_text, [docno | (docno, snippet, clicked, sat)])]``."""
    from sesh.sessionlog import Interaction, Query, ResultEntry, Session

    interactions = []
    for text, serp in history:
        entries = []
        for rank, r in enumerate(serp, 1):
            if isinstance(r, str):
                r = (r, "", False, False)
            docno, snippet, clicked, sat = r
            entries.append(ResultEntry(docno, rank, "", snippet, clicked, sat))
        interactions.append(Interaction(Query.from_text(text), tuple(entries)))
    return Session(sid, tuple(interactions), Query.from_text(current), topic)


#: (criterion number, title, passed, detail) rows recorded by test_acceptance
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num}. {title}: {detail}")
