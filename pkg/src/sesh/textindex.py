"""Tokenization, corpus ingestion and the positional inverted index."""

from __future__ import annotations

import gc
import json
import logging
import re
import struct
import threading
from collections import defaultdict
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_SPAM_THRESHOLD = 70

_TOKEN_RE = re.compile(r"[^\W_]+")

INDEX_MAGIC = b"SESHIDX\x00"
INDEX_VERSION = 1


class DuplicateDocnoError(ValueError):
    def __init__(self, docno: str):
        super().__init__(f"duplicate docno: {docno!r}")
        self.docno = docno


class CorpusFormatError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class UnknownDocumentError(KeyError):
    def __init__(self, docno):
        super().__init__(docno)
        self.docno = docno

    def __str__(self):
        return f"document not in index: {self.docno!r}"


class IndexFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TokenizerConfig:
    """Lowercase + alphanumeric split; stopping and stemming are opt-in."""

    stopwords: bool = False
    stem: bool = False

    @property
    def fingerprint(self) -> str:
        return f"lower-alnum;stop={int(self.stopwords)};stem={int(self.stem)}"

    @classmethod
    def from_fingerprint(cls, fingerprint: str) -> "TokenizerConfig":
        parts = dict(p.split("=") for p in fingerprint.split(";")[1:])
        return cls(stopwords=parts["stop"] == "1", stem=parts["stem"] == "1")


_stemmer = None
_stoplist = None


def _stem(token: str) -> str:
    global _stemmer
    if _stemmer is None:
        from nltk.stem import PorterStemmer

        _stemmer = PorterStemmer()
    return _stemmer.stem(token)


def _is_stopword(token: str) -> bool:
    global _stoplist
    if _stoplist is None:
        from sklearn.feature_extraction.text import ENGLISH_STOP_WORDS

        _stoplist = frozenset(ENGLISH_STOP_WORDS)
    return token in _stoplist


def tokenize(text: str, config: TokenizerConfig = TokenizerConfig()) -> List[str]:
    """Split ``text`` into lowercase alphanumeric terms.

    >>> tokenize("U.S. open 2014")
    ['u', 's', 'open', '2014']
    """
    tokens = _TOKEN_RE.findall(text.lower())
    if config.stopwords:
        tokens = [t for t in tokens if not _is_stopword(t)]
    if config.stem:
        tokens = [s for s in map(_stem, tokens) if s]
    return tokens


@dataclass
class Document:
    docno: str
    internal_id: int
    length: int
    term_freqs: Dict[str, int]
    positions: Dict[str, List[int]]

    @classmethod
    def from_tokens(cls, docno: str, internal_id: int, tokens: Sequence[str]) -> "Document":
        grouped = defaultdict(list)
        for pos, tok in enumerate(tokens):
            grouped[tok].append(pos)
        positions = dict(grouped)
        term_freqs = {t: len(p) for t, p in positions.items()}
        return cls(docno, internal_id, len(tokens), term_freqs, positions)

    def tokens(self) -> List[str]:
        out = [""] * self.length
        for term, plist in self.positions.items():
            for p in plist:
                out[p] = term
        return out


@dataclass
class CollectionStats:
    num_docs: int = 0
    total_terms: int = 0
    doc_freq: Dict[str, int] = field(default_factory=dict)
    coll_freq: Dict[str, int] = field(default_factory=dict)

    def add(self, doc: Document) -> None:
        self.num_docs += 1
        self.total_terms += doc.length
        df, cf = self.doc_freq, self.coll_freq
        for term, tf in doc.term_freqs.items():
            df[term] = df.get(term, 0) + 1
            cf[term] = cf.get(term, 0) + tf

    @property
    def oov_prob(self) -> float:
        """Collection probability floor for unseen terms and n-grams."""
        return 0.5 / max(self.total_terms, 1)


def read_spam_scores(source: Union[str, Path, IO[str]]) -> Dict[str, int]:
    """Read a ``score docno`` sidecar into a docno -> percentile map."""
    scores = {}
    with _open_text(source) as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ValueError(f"spam scores line {lineno}: expected 'score docno'")
            score = int(parts[0])
            if not 0 <= score <= 99:
                raise ValueError(f"spam scores line {lineno}: score {score} outside 0-99")
            scores[parts[1]] = score
    return scores


class _open_text:
    def __init__(self, source):
        self.source = source
        self.fh = None

    def __enter__(self):
        if isinstance(self.source, (str, Path)):
            self.fh = open(self.source, encoding="utf-8")
            return self.fh
        return self.source

    def __exit__(self, *exc):
        if self.fh is not None:
            self.fh.close()


_TREC_DOC_RE = re.compile(rb"<DOC>(.*?)</DOC>", re.S)
_TREC_DOCNO_RE = re.compile(rb"<DOCNO>\s*(.*?)\s*</DOCNO>", re.S)
_TREC_TEXT_RE = re.compile(rb"<TEXT>(.*?)</TEXT>", re.S)


def read_corpus(path: Union[str, Path]) -> Iterator[Tuple[str, str]]:
    """Yield ``(docno, text)`` from a JSON-lines or TRECTEXT corpus file."""
    data = Path(path).read_bytes()
    stripped = data.lstrip()
    if stripped.startswith(b"<"):
        yield from _read_trectext(data)
    else:
        yield from _read_jsonl(data)


def _read_jsonl(data: bytes) -> Iterator[Tuple[str, str]]:
    offset = 0
    for raw in data.splitlines(keepends=True):
        line_offset = offset
        offset += len(raw)
        if not raw.strip():
            continue
        try:
            obj = json.loads(raw)
            docno, text = obj["docno"], obj["text"]
        except (ValueError, KeyError, TypeError) as exc:
            raise CorpusFormatError(f"unreadable corpus record: {exc}", line_offset) from None
        if not isinstance(docno, str) or not isinstance(text, str):
            raise CorpusFormatError("docno and text must be strings", line_offset)
        yield docno, text


def _read_trectext(data: bytes) -> Iterator[Tuple[str, str]]:
    for match in _TREC_DOC_RE.finditer(data):
        body = match.group(1)
        docno_m = _TREC_DOCNO_RE.search(body)
        if docno_m is None:
            raise CorpusFormatError("<DOC> without <DOCNO>", match.start())
        texts = _TREC_TEXT_RE.findall(body)
        try:
            docno = docno_m.group(1).decode("utf-8")
            text = " ".join(t.decode("utf-8") for t in texts)
        except UnicodeDecodeError:
            raise CorpusFormatError("invalid UTF-8 in record", match.start()) from None
        yield docno, text


class Index:
    """Immutable positional inverted index with collection statistics.

    Internal ids follow sorted docno order, so the result does not depend on
    the order in which documents were supplied.
    """

    def __init__(self, documents: List[Document], config: TokenizerConfig):
        self.documents = documents
        self.config = config
        self.docno_to_id = {d.docno: d.internal_id for d in documents}
        stats = self.stats = CollectionStats()
        df, cf = stats.doc_freq, stats.coll_freq
        postings: Dict[str, List[int]] = {}
        # one pass over each document's terms fills postings and collection stats
        for doc in documents:
            stats.num_docs += 1
            stats.total_terms += doc.length
            doc_id = doc.internal_id
            for term, tf in doc.term_freqs.items():
                plist = postings.get(term)
                if plist is None:
                    postings[term] = [doc_id]
                    df[term] = 1
                    cf[term] = tf
                else:
                    plist.append(doc_id)
                    df[term] += 1
                    cf[term] += tf
        self.postings = postings
        self.doc_lengths = np.fromiter((d.length for d in documents), dtype=np.int64, count=len(documents))
        self.spam_filtered = 0
        self._phrase_cache: Dict[Tuple[str, ...], float] = {}
        self._lock = threading.Lock()

    @property
    def fingerprint(self) -> str:
        return self.config.fingerprint

    def __len__(self) -> int:
        return len(self.documents)

    def __contains__(self, docno) -> bool:
        return docno in self.docno_to_id

    def get(self, docno: str) -> Optional[Document]:
        i = self.docno_to_id.get(docno)
        return None if i is None else self.documents[i]

    def document(self, doc: Union[str, Document]) -> Document:
        if isinstance(doc, Document):
            return doc
        i = self.docno_to_id.get(doc)
        if i is None:
            raise UnknownDocumentError(doc)
        return self.documents[i]

    def tokenize(self, text: str) -> List[str]:
        return tokenize(text, self.config)

    def term_prob(self, term: str) -> float:
        cf = self.stats.coll_freq.get(term, 0)
        if cf == 0:
            return self.stats.oov_prob
        return cf / self.stats.total_terms

    def coll_prob(self, entity) -> float:
        if isinstance(entity, str):
            return self.term_prob(entity)
        if len(entity) == 1:
            return self.term_prob(entity[0])
        return coll_phrase_prob(self, entity)

    def save(self, path: Union[str, Path]) -> None:
        save_index(self, path)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Index":
        return load_index(path)


@contextmanager
def _gc_paused():
    # millions of small acyclic lists otherwise trigger repeated full collections
    enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if enabled:
            gc.enable()


def build_index(
    corpus: Iterable[Tuple[str, str]],
    spam: Optional[Mapping[str, int]] = None,
    threshold: int = DEFAULT_SPAM_THRESHOLD,
    config: TokenizerConfig = TokenizerConfig(),
) -> Index:
    """Index ``(docno, text)`` records, dropping documents whose spam score is
    below ``threshold``. Documents absent from ``spam`` are kept."""
    if not 0 <= threshold <= 100:
        raise ValueError(f"spam threshold must be in [0, 100], got {threshold}")
    texts: Dict[str, str] = {}
    filtered = 0
    for docno, text in corpus:
        if docno in texts:
            raise DuplicateDocnoError(docno)
        if spam is not None and spam.get(docno, 100) < threshold:
            filtered += 1
            # keep a placeholder so duplicates of filtered docs are still caught
            texts[docno] = None
            continue
        texts[docno] = text
    kept = sorted(d for d, t in texts.items() if t is not None)
    with _gc_paused():
        documents = [Document.from_tokens(docno, i, tokenize(texts[docno], config)) for i, docno in enumerate(kept)]
        index = Index(documents, config)
    if filtered:
        logger.info("spam filter removed %d of %d documents", filtered, len(texts))
    index.spam_filtered = filtered
    return index


def phrase_freq(index: Index, doc: Union[str, Document], ngram: Sequence[str]) -> int:
    """Count contiguous occurrences of ``ngram`` in ``doc`` from its positions."""
    if len(ngram) < 2:
        raise ValueError("phrase_freq needs an n-gram of length >= 2")
    doc = index.document(doc)
    return _phrase_count(doc, ngram)


def _phrase_count(doc: Document, ngram: Sequence[str]) -> int:
    plists = []
    for term in ngram:
        plist = doc.positions.get(term)
        if plist is None:
            return 0
        plists.append(plist)
    later = [set(p) for p in plists[1:]]
    count = 0
    for start in plists[0]:
        if all(start + k in s for k, s in enumerate(later, 1)):
            count += 1
    return count


def coll_phrase_prob(index: Index, ngram: Sequence[str]) -> float:
    """Collection probability of an n-gram over all length-n windows.

    Falls back to the out-of-vocabulary floor when the n-gram never occurs.
    """
    if len(ngram) < 2:
        raise ValueError("coll_phrase_prob needs an n-gram of length >= 2")
    key = tuple(ngram)
    cached = index._phrase_cache.get(key)
    if cached is not None:
        return cached
    plists = [index.postings.get(t) for t in key]
    numerator = 0
    if all(plists):
        candidates = set(plists[0]).intersection(*plists[1:])
        numerator = sum(_phrase_count(index.documents[i], key) for i in sorted(candidates))
    if numerator == 0:
        prob = index.stats.oov_prob
    else:
        windows = int(np.maximum(index.doc_lengths - len(key) + 1, 0).sum())
        prob = numerator / windows
    with index._lock:
        index._phrase_cache[key] = prob
    return prob


# Index file layout (little-endian):
#   magic[8] | u32 version | u32 header_len | header JSON (utf-8)
#   | u32 lengths[num_docs] | u32 token_ids[total_terms]
# Token ids refer to the header's sorted vocabulary.


def save_index(index: Index, path: Union[str, Path]) -> None:
    vocab = sorted(index.stats.coll_freq)
    term_id = {t: i for i, t in enumerate(vocab)}
    header = {
        "fingerprint": index.fingerprint,
        "num_docs": index.stats.num_docs,
        "total_terms": index.stats.total_terms,
        "docnos": [d.docno for d in index.documents],
        "vocab": vocab,
    }
    header_bytes = json.dumps(header, ensure_ascii=False, separators=(",", ":")).encode("utf-8")
    lengths = np.asarray(index.doc_lengths, dtype="<u4")
    stream = np.empty(index.stats.total_terms, dtype="<u4")
    offset = 0
    for doc in index.documents:
        for term, plist in doc.positions.items():
            stream[[offset + p for p in plist]] = term_id[term]
        offset += doc.length
    with open(path, "wb") as fh:
        fh.write(INDEX_MAGIC)
        fh.write(struct.pack("<II", INDEX_VERSION, len(header_bytes)))
        fh.write(header_bytes)
        fh.write(lengths.tobytes())
        fh.write(stream.tobytes())


def load_index(path: Union[str, Path]) -> Index:
    data = Path(path).read_bytes()
    if data[:8] != INDEX_MAGIC:
        raise IndexFormatError(f"{path}: not an index file")
    version, header_len = struct.unpack_from("<II", data, 8)
    if version != INDEX_VERSION:
        raise IndexFormatError(f"{path}: unsupported index version {version}")
    start = 16 + header_len
    header = json.loads(data[16:start].decode("utf-8"))
    n = header["num_docs"]
    lengths = np.frombuffer(data, dtype="<u4", count=n, offset=start)
    stream = np.frombuffer(data, dtype="<u4", count=header["total_terms"], offset=start + 4 * n)
    vocab = header["vocab"]
    documents = []
    offset = 0
    for i, (docno, length) in enumerate(zip(header["docnos"], lengths.tolist())):
        tokens = [vocab[t] for t in stream[offset:offset + length].tolist()]
        documents.append(Document.from_tokens(docno, i, tokens))
        offset += length
    return Index(documents, TokenizerConfig.from_fingerprint(header["fingerprint"]))
