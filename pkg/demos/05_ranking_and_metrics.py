"""
Reranking sessions and evaluating runs
======================================

Retrieve candidates for each current query, rerank them with every
method, write a TREC run and score it with NDCG@10 and MRR.
"""

from sesh.metrics import box_stats, by_session_length, evaluate_run
from sesh.querymodels import METHODS, MethodConfig, read_anchors, session_model
from sesh.ranker import first_pass, read_run, rerank, write_run
from sesh.sessionlog import parse_qrels, parse_sessions, read_mapping
from sesh.synthetic import FILES, bundled_path
from sesh.textindex import build_index, read_corpus, read_spam_scores

data = bundled_path()
index = build_index(read_corpus(data / FILES["corpus"]), read_spam_scores(data / FILES["spam"]))
sessions = parse_sessions(data / FILES["sessions"])
topic_map, grade_map = read_mapping(data / FILES["mapping"])
qrels = parse_qrels(data / FILES["qrels"], topic_map, grade_map)
anchors = read_anchors(data / FILES["anchors"])

# the first pass uses the current query alone; every method reranks the same candidates
candidates = {s.session_id: first_pass(index, s) for s in sessions}

print(f"{'method':12s} {'NDCG@10':>8s} {'MRR':>7s}")
for name in METHODS:
    method = MethodConfig(name, anchors=anchors)
    run = [rerank(index, candidates[s.session_id], session_model(index, s, method)) for s in sessions]
    # run files round-trip through the standard six-column format
    text = write_run(run, name)
    summary = evaluate_run(read_run(text), qrels)
    print(f"{name:12s} {summary.mean_ndcg:8.3f} {summary.mean_mrr:7.3f}")
    if name == "tf_all":
        tf_all = summary

print("\nfirst run line:", text.splitlines()[0])
stats = box_stats([r.ndcg_at_10 for r in tf_all.results])
print(f"TF(all) per-session NDCG@10: median {stats.median:.3f}, IQR {stats.q1:.3f}-{stats.q3:.3f}, "
      f"{len(stats.outliers)} outliers")
for length, (count, mean) in by_session_length(tf_all.results, sessions).items():
    print(f"  sessions with {length} queries: {count:2d}, mean NDCG@10 {mean:.3f}")
