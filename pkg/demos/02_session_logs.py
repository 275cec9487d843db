"""
Reading session logs and judgments
==================================

Parse a Session Track style XML log, look at one session's interactions
and clicks, and copy topic-level judgments onto sessions.
"""

from sesh.diagnostics import Diagnostics
from sesh.sessionlog import parse_qrels, parse_sessions, read_mapping
from sesh.synthetic import FILES, bundled_path

data = bundled_path()
report = Diagnostics()
sessions = parse_sessions(data / FILES["sessions"], report=report)
print(f"{len(sessions)} sessions; lengths:", sorted(len(s) for s in sessions))

# one session in detail: every logged query, its top results and clicks
session = next(s for s in sessions if len(s) == 4)
for i, interaction in enumerate(session.history, 1):
    print(f"q{i}: {interaction.query.text!r}")
    for r in interaction.serp[:3]:
        mark = "SAT" if r.sat_click else ("click" if r.clicked else "")
        print(f"    {r.rank:2d} {r.docno} {mark}")
    print("    SAT documents:", interaction.sat_docnos)
print("current query:", session.current_query.text)

# judgments are per topic; the mapping copies them to every session of the topic
topic_map, grade_map = read_mapping(data / FILES["mapping"])
qrels = parse_qrels(data / FILES["qrels"], topic_map, grade_map, report)
judged = qrels[session.session_id]
print(f"session {session.session_id}: {len(judged)} judged documents, "
      f"{sum(g > 0 for g in judged.values())} relevant, grades {sorted(set(judged.values()))}")
print("loader counts:", dict(report.counts))

# a truncated session answers an earlier query with only the history before it
step2 = session.truncated(2)
print("as of query 2:", step2.current_query.text, "with", len(step2.history), "interaction(s) of history")
