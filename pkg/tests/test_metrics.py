import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_session
from naive import brute_ndcg, brute_rr
from sesh.diagnostics import Diagnostics
from sesh.metrics import (
    NoRelevantJudgments,
    box_stats,
    by_session_length,
    evaluate_run,
    mrr,
    ndcg_at_k,
    progressing_session,
)
from sesh.querymodels import MethodConfig
from sesh.ranker import Ranking


def test_ndcg_worked_examples():
    assert ndcg_at_k(["a"], {"a": 1}) == 1.0
    # single relevant document at rank 2
    assert ndcg_at_k(["x", "a"], {"a": 1}) == pytest.approx(0.6309297535714575, rel=1e-15)
    assert ndcg_at_k(["x", "a"], {"a": 3, "x": -2}) == pytest.approx(1 / math.log2(3))
    # linear gain, not exponential
    judged = {"a": 2, "b": 1}
    assert ndcg_at_k(["b", "a"], judged) == pytest.approx((1 + 2 / math.log2(3)) / (2 + 1 / math.log2(3)))


def test_ndcg_cutoff_and_short_rankings():
    judged = {f"d{i}": 1 for i in range(12)}
    assert ndcg_at_k([f"d{i}" for i in range(12)], judged) == 1.0
    assert ndcg_at_k([f"x{i}" for i in range(10)] + ["d0"], judged) == 0.0
    assert ndcg_at_k([], {"a": 1}) == 0.0


def test_no_relevant_raises():
    with pytest.raises(NoRelevantJudgments):
        ndcg_at_k(["a"], {"a": 0, "b": -2})
    with pytest.raises(NoRelevantJudgments):
        mrr(["a"], {})


def test_mrr():
    assert mrr(["x", "y", "a"], {"a": 1, "x": 0}) == pytest.approx(1 / 3)
    assert mrr(["x"], {"a": 2}) == 0.0


rankings = st.lists(st.sampled_from([f"d{i}" for i in range(30)]), max_size=25, unique=True)
judgments = st.dictionaries(st.sampled_from([f"d{i}" for i in range(30)]), st.integers(-2, 3), max_size=10).filter(
    lambda j: any(g > 0 for g in j.values()))


@settings(max_examples=200)
@given(rankings, judgments)
def test_metrics_match_brute_force(docnos, judged):
    n = ndcg_at_k(docnos, judged)
    assert n == pytest.approx(brute_ndcg(docnos, judged), abs=1e-12)
    assert 0.0 <= n <= 1.0 + 1e-12
    assert mrr(docnos, judged) == pytest.approx(brute_rr(docnos, judged), abs=1e-12)


def test_evaluate_run_bookkeeping():
    run = [Ranking.from_scores("s1", [("a", 1.0)]), Ranking.from_scores("s2", [("a", 1.0)]),
           Ranking.from_scores("s9", [("a", 1.0)])]
    qrels = {"s1": {"a": 1}, "s2": {"a": 0}, "s3": {"b": 2}}
    report = Diagnostics()
    summary = evaluate_run(run, qrels, report=report)
    assert [r.session_id for r in summary.results] == ["s1"]
    assert summary.excluded == ["s2"] and summary.unknown == ["s9"] and summary.missing == ["s3"]
    assert report.skipped == {"s2": "no positively judged documents"}
    summary = evaluate_run(run, qrels, missing_as_zero=True)
    assert summary.mean_ndcg == 0.5 and summary.mean_mrr == 0.5
    assert evaluate_run([], {}).mean_ndcg is None


def test_by_session_length():
    from sesh.metrics import EvalResult

    sessions = [make_session([], "a", sid="1"), make_session([("a", ["d"])], "b", sid="2"),
                make_session([("a", ["d"])], "c", sid="3")]
    results = [EvalResult("1", 0.5, 1), EvalResult("2", 0.2, 1), EvalResult("3", 0.4, 1)]
    out = by_session_length(results, sessions)
    assert out[1] == (1, 0.5)
    assert out[2][0] == 2 and out[2][1] == pytest.approx(0.3)


def test_box_stats_outlier():
    stats = box_stats([1, 2, 3, 4, 100])
    assert (stats.q1, stats.median, stats.q3) == (2.0, 3.0, 4.0)
    assert stats.whisker_low == 1.0 and stats.whisker_high == 4.0
    assert stats.outliers == (100.0,)
    assert stats.mean == 22.0
    with pytest.raises(ValueError):
        box_stats([])


@given(st.lists(st.floats(0, 1), min_size=1, max_size=40))
def test_box_stats_matches_numpy(values):
    stats = box_stats(values)
    q = np.percentile(values, [25, 50, 75])
    assert (stats.q1, stats.median, stats.q3) == tuple(float(v) for v in q)
    iqr = stats.q3 - stats.q1
    lo, hi = stats.q1 - 1.5 * iqr, stats.q3 + 1.5 * iqr
    inside = [v for v in values if lo <= v <= hi]
    assert (stats.whisker_low, stats.whisker_high) == (min(inside), max(inside))
    assert sorted(v for v in values if not lo <= v <= hi) == list(stats.outliers)


def test_progressing_session_steps(bench_index, bench_sessions, bench_qrels):
    sess = next(s for s in bench_sessions if len(s) == 5 and s.session_id in bench_qrels)
    for mode in ("full_history", "previous_query_only"):
        values = progressing_session(bench_index, sess, MethodConfig("tf_all"), bench_qrels, mode)
        assert len(values) == 5 and all(0 <= v <= 1 for v in values)
    last = progressing_session(bench_index, sess, MethodConfig("tf_last"), bench_qrels)
    prev = progressing_session(bench_index, sess, MethodConfig("tf_last"), bench_qrels, "previous_query_only")
    assert last == prev
    with pytest.raises(ValueError):
        progressing_session(bench_index, sess, MethodConfig("tf_all"), bench_qrels, "sideways")


@pytest.mark.parametrize("values, expected", [([0, 0, 0, 0], 0.0), ([0.37], 0.37)])
def test_box_stats_degenerate(values, expected):
    stats = box_stats(values)
    assert stats.q1 == stats.median == stats.q3 == stats.mean == expected
    assert stats.outliers == ()
