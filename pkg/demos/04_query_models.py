"""
Session query models
====================

Turn one session into term-frequency, Nugget and query change model
weights and compare them side by side.
"""

from sesh.querymodels import (
    MethodConfig,
    METHODS,
    qcm_decompose,
    qcm_interaction_model,
    read_anchors,
    session_model,
)
from sesh.synthetic import FILES, bundled_path
from sesh.sessionlog import parse_sessions
from sesh.textindex import build_index, read_corpus, read_spam_scores

data = bundled_path()
index = build_index(read_corpus(data / FILES["corpus"]), read_spam_scores(data / FILES["spam"]))
anchors = read_anchors(data / FILES["anchors"])
session = next(s for s in parse_sessions(data / FILES["sessions"]) if len(s) == 5)
print("queries:", [q.text for q in session.queries])

# how each reformulation splits into kept, added and dropped terms
for i in range(2, len(session) + 1):
    prev, cur = session.queries[i - 2], session.queries[i - 1]
    dec = qcm_decompose(prev, cur)
    weights = qcm_interaction_model(index, session, i)
    print(f"q{i - 1} -> q{i}: theme={dec.theme} added={dec.added} removed={dec.removed}")
    print("    weights:", {t: round(w, 3) for t, w in weights.items()})

# every method's aggregated model
for name in METHODS:
    qm = session_model(index, session, MethodConfig(name, anchors=anchors))
    shown = {(" ".join(e) if isinstance(e, tuple) else e): round(w, 3) for e, w in qm.items()}
    print(f"{name:11s}", shown)
