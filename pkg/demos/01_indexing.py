"""
Building and persisting an index
================================

Tokenize a corpus, drop spam pages, inspect term and phrase statistics,
then write the index to disk and load it back.
"""

import tempfile
from pathlib import Path

from sesh.synthetic import FILES, bundled_path
from sesh.textindex import (
    build_index,
    coll_phrase_prob,
    load_index,
    phrase_freq,
    read_corpus,
    read_spam_scores,
    tokenize,
)

# the tokenizer lowercases and keeps runs of letters and digits
print(tokenize("Jaguar XF-2016 price, U.K."))

# a three-document toy index
toy = build_index([("a", "red apple pie"), ("b", "apple pie recipe apple pie"), ("c", "green apple")])
print("df(apple) =", toy.stats.doc_freq["apple"], " cf(apple) =", toy.stats.coll_freq["apple"])
print("positions of 'pie' in b:", toy.document("b").positions["pie"])
print("phrase 'apple pie' in b:", phrase_freq(toy, "b", ["apple", "pie"]))
# phrase probability is measured over bigram windows: 3 hits over 2 + 4 + 1 windows
print("P_c(apple pie) =", coll_phrase_prob(toy, ["apple", "pie"]))
# an unseen phrase falls back to 0.5 / total terms
print("P_c(pie apple) =", coll_phrase_prob(toy, ["pie", "apple"]))

# the bundled benchmark, with its spam scores applied at threshold 70
data = bundled_path()
spam = read_spam_scores(data / FILES["spam"])
index = build_index(read_corpus(data / FILES["corpus"]), spam, threshold=70)
print(f"{index.stats.num_docs} documents kept, {index.spam_filtered} spam pages dropped, "
      f"{len(index.stats.coll_freq)} distinct terms")

# the on-disk format is a JSON header plus a packed token stream
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "bench.idx"
    index.save(path)
    again = load_index(path)
    print(f"saved {path.stat().st_size / 1e6:.2f} MB; reloaded stats equal: {again.stats == index.stats}")
