"""
Upper bounds: ground truth and ideal term weights
=================================================

Compare TF(all) with the best achievable lexical reweighting (a grid over
per-term weights) and with ordering the candidates by their judgments.
"""

import time

from sesh.metrics import ndcg_at_k
from sesh.oracles import GridConfig, GridTooLarge, ground_truth_rank, ideal_weights
from sesh.querymodels import tf_session_model
from sesh.ranker import RankerConfig, first_pass, rerank
from sesh.sessionlog import parse_qrels, parse_sessions, read_mapping
from sesh.synthetic import FILES, bundled_path
from sesh.textindex import build_index, read_corpus, read_spam_scores

data = bundled_path()
index = build_index(read_corpus(data / FILES["corpus"]), read_spam_scores(data / FILES["spam"]))
sessions = parse_sessions(data / FILES["sessions"])
topic_map, grade_map = read_mapping(data / FILES["mapping"])
qrels = parse_qrels(data / FILES["qrels"], topic_map, grade_map)

cfg = RankerConfig(first_pass_n=200)
grid = GridConfig(lo=-1, hi=1, step=0.1, max_unique_terms=3)
print(f"{grid.points_per_term} weights per term, up to {grid.points_per_term ** 3} assignments per session\n")

start = time.perf_counter()
rows = []
for s in sessions:
    judged = qrels[s.session_id]
    cands = first_pass(index, s, cfg)
    tf = tf_session_model(s, "all_queries")
    try:
        # the TF model itself is offered as an extra point so the bound never falls below it
        result = ideal_weights(index, s, cands, judged, grid, cfg.smoothing, extra_points=[tf])
    except GridTooLarge as exc:
        print("skip:", exc)
        continue
    rows.append((
        ndcg_at_k(rerank(index, cands, tf, cfg), judged),
        result.best_ndcg,
        ndcg_at_k(ground_truth_rank(cands, judged), judged),
    ))
    if len(rows) <= 3:
        print(f"session {s.session_id}: best weights {dict(result.best_weights)}")

n = len(rows)
tf, ideal, gt = (sum(col) / n for col in zip(*rows))
print(f"\n{n} sessions in {time.perf_counter() - start:.1f}s")
print(f"TF(all) {tf:.3f} <= ideal weights {ideal:.3f} <= ground truth {gt:.3f}")
