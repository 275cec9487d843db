import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_session, toy_index
from sesh.lmscore import idf, sat_prob
from sesh.querymodels import (
    MethodConfig,
    NuggetParams,
    QcmParams,
    accepted_ngrams,
    aggregate,
    nugget_feedback_texts,
    nugget_model,
    qcm_decompose,
    qcm_interaction_model,
    qcm_session_model,
    qcm_weight,
    session_model,
    tf_model,
    tf_session_model,
)
from sesh.lmscore import QueryModel


def test_default_parameters():
    assert QcmParams() == QcmParams(alpha=2.2, beta=1.8, epsilon=0.07, delta=0.4, source="sat")
    p = NuggetParams()
    assert (p.k_snippet, p.theta, p.k_anchor, p.beta, p.max_order) == (10, 0.97, 5, 0.1, 3)
    with pytest.raises(ValueError):
        QcmParams(alpha=-1)
    with pytest.raises(ValueError):
        NuggetParams(theta=0)


def test_tf_models():
    sess = make_session([("a b a", ["d1"]), ("b c", ["d1"])], "c d")
    assert dict(tf_model(sess.history[0].query)) == {"a": 2.0, "b": 1.0}
    assert dict(tf_session_model(sess, "first_query")) == {"a": 2.0, "b": 1.0}
    assert dict(tf_session_model(sess, "last_query")) == {"c": 1.0, "d": 1.0}
    assert dict(tf_session_model(sess, "all_queries")) == {"a": 2.0, "b": 2.0, "c": 2.0, "d": 1.0}
    with pytest.raises(ValueError):
        tf_session_model(sess, "middle")
    with pytest.raises(ValueError):
        tf_model([])


def test_tf_all_skips_empty_history_queries():
    sess = make_session([("!!", ["d1"]), ("a", ["d1"])], "a")
    assert dict(tf_session_model(sess, "all_queries")) == {"a": 2.0}
    assert dict(tf_session_model(sess, "first_query")) == {"a": 1.0}


@given(st.lists(st.dictionaries(st.sampled_from("abcde"), st.integers(-5, 5)), min_size=1, max_size=5))
def test_aggregate_is_sum(models):
    agg = aggregate([QueryModel(m) for m in models])
    for t in "abcde":
        assert agg.get(t, 0.0) == sum(m.get(t, 0) for m in models)


@pytest.mark.parametrize(
    "prev, cur, theme, added, removed",
    [
        ("a b", "a c", ("a",), ("c",), ("b",)),
        ("a b", "a b", ("a", "b"), (), ()),
        ("a", "b", (), ("b",), ("a",)),
        ("a b b", "b a c a", ("b", "a"), ("c",), ()),
    ],
)
def test_decompose(prev, cur, theme, added, removed):
    dec = qcm_decompose(prev.split(), cur.split())
    assert (dec.theme, dec.added, dec.removed) == (theme, added, removed)


@given(st.lists(st.sampled_from("abcdef"), max_size=6), st.lists(st.sampled_from("abcdef"), max_size=6))
def test_decompose_partitions(prev, cur):
    dec = qcm_decompose(prev, cur)
    assert set(dec.theme) | set(dec.added) == set(cur)
    assert set(dec.theme) | set(dec.removed) == set(prev)
    assert not set(dec.theme) & set(dec.added) and not set(dec.theme) & set(dec.removed)


F = Fraction


@pytest.mark.parametrize("p", [F(0), F(1, 5), F(1, 2), F(1)])
def test_qcm_weight_closed_forms(p):
    params = QcmParams()
    pf = float(p)
    assert qcm_weight("theme", pf) == pytest.approx(float(1 + F(22, 10) * (1 - p)), abs=1e-15)
    assert qcm_weight("added_present", pf) == pytest.approx(float(1 - F(18, 10) * p), abs=1e-15)
    assert qcm_weight("removed", pf) == pytest.approx(float(-F(4, 10) * p), abs=1e-15)
    assert qcm_weight("added_absent", 0.0, 2.0, params) == pytest.approx(1.14, abs=1e-15)
    with pytest.raises(ValueError):
        qcm_weight("other", pf)


def test_qcm_interaction_model_cases():
    # previous top document d1 holds "a" and "c"; SAT doc d2 holds a, b
    idx = toy_index("a c x x", "a b b b b", "y")
    sess = make_session([("a b", [("d1", "", False, False), ("d2", "", True, True)])], "a c e")
    qm = qcm_interaction_model(idx, sess, 2)
    p = lambda t: sat_prob(idx, sess, 1, t)
    assert p("a") == 0.2 and p("b") == 0.8
    assert qm["a"] == pytest.approx(1 + 2.2 * 0.8)
    # "c" is in the top document but not in the SAT document
    assert qm["c"] == pytest.approx(1.0)
    assert qm["e"] == pytest.approx(1 + 0.07 * idf(idx, "e"))
    assert qm["b"] == pytest.approx(-0.4 * 0.8)
    # first query falls back to TF
    assert dict(qcm_interaction_model(idx, sess, 1)) == {"a": 1.0, "b": 1.0}


def test_qcm_unindexed_top_uses_snippet():
    idx = toy_index("a b")
    sess = make_session([("a", [("gone", "the word c here", False, False)])], "a c d")
    qm = qcm_interaction_model(idx, sess, 2)
    assert qm["c"] == pytest.approx(1 - 1.8 * 0.0)
    assert qm["d"] == pytest.approx(1 + 0.07 * idf(idx, "d"))


def test_qcm_session_model_sums_interactions():
    idx = toy_index("a b c", "a d")
    sess = make_session([("a b", ["d1"]), ("a c", ["d2"])], "a d")
    total = qcm_session_model(idx, sess)
    parts = [qcm_interaction_model(idx, sess, i) for i in (1, 2, 3)]
    for t in total:
        assert total[t] == pytest.approx(sum(m.get(t, 0.0) for m in parts))


def test_qcm_single_query_equals_tf():
    idx = toy_index("a b")
    sess = make_session([], "a b a")
    assert dict(qcm_session_model(idx, sess)) == dict(tf_session_model(sess, "all_queries"))


def test_accepted_ngrams_threshold():
    texts = [["a", "b", "c"]] * 97 + [["x"]] * 3
    assert accepted_ngrams(["a", "b", "c"], texts, NuggetParams()) == [("a", "b"), ("b", "c"), ("a", "b", "c")]
    texts = [["a", "b", "c"]] * 96 + [["x"]] * 4
    assert accepted_ngrams(["a", "b", "c"], texts, NuggetParams()) == []
    assert accepted_ngrams(["a", "b"], texts, NuggetParams(comparator="count", min_count=50)) == [("a", "b")]
    assert accepted_ngrams(["a", "b"], [], NuggetParams()) == []


def test_max_order_caps_grams():
    texts = [["a", "b", "c", "d"]]
    grams = accepted_ngrams(list("abcd"), texts, NuggetParams())
    assert max(map(len, grams)) == 3
    grams = accepted_ngrams(list("abcd"), texts, NuggetParams(max_order=4))
    assert ("a", "b", "c", "d") in grams


def _nugget_session():
    serp = [(f"d{i}", "red apple pie" if i != 3 else "red apple", i in (1, 2), i == 1) for i in range(1, 4)]
    return make_session([("red apple", serp)], "red apple pie")


def test_nugget_variants():
    idx = toy_index("red apple pie", "red apple pie", "red apple")
    sess = _nugget_session()
    rl2 = nugget_model(idx, sess, NuggetParams(variant="RL2"))
    # "apple pie" appears in 2/3 snippets; "red apple" in all
    assert rl2[("red", "apple")] == pytest.approx(0.1)
    assert ("apple", "pie") not in rl2
    assert rl2["red"] == 2.0 and rl2["pie"] == 1.0
    rl4 = nugget_model(idx, sess, NuggetParams(variant="RL4"))
    # only clicked results d1, d2 feed RL4
    assert rl4[("apple", "pie")] == pytest.approx(0.1)
    assert rl4[("red", "apple", "pie")] == pytest.approx(0.1)
    anchors = {"d3": ["apple pie recipes"]}
    rl3 = nugget_model(idx, sess, NuggetParams(variant="RL3"), anchors)
    assert rl3[("apple", "pie")] == pytest.approx(0.1)


def test_nugget_feedback_respects_k():
    idx = toy_index("x")
    sess = _nugget_session()
    texts = nugget_feedback_texts(idx, sess.history[0], NuggetParams(k_snippet=2))
    assert len(texts) == 2
    anchors = {"d1": [f"anc{i}" for i in range(9)]}
    texts = nugget_feedback_texts(idx, sess.history[0], NuggetParams(variant="RL3", k_anchor=5), anchors)
    assert texts[0] == ["red", "apple", "pie"] + [f"anc{i}" for i in range(5)]


def test_nugget_rl3_without_anchors_warns(caplog):
    idx = toy_index("x")
    with caplog.at_level("WARNING"):
        nugget_model(idx, _nugget_session(), NuggetParams(variant="RL3"))
    assert "anchor" in caplog.text


def test_session_model_dispatch(bench_index, bench_sessions):
    for sess in bench_sessions[:5]:
        assert session_model(bench_index, sess, MethodConfig("tf_all")) == tf_session_model(sess, "all_queries")
        assert session_model(bench_index, sess, MethodConfig("qcm")) == qcm_session_model(bench_index, sess)
        qm = session_model(bench_index, sess, MethodConfig("nugget_rl4"))
        assert all(math.isfinite(w) for w in qm.values())
    with pytest.raises(ValueError):
        MethodConfig("bm25")


def test_single_query_session_methods_agree(bench_index):
    sess = make_session([], "zkiqui zxomu")
    tf = tf_session_model(sess, "all_queries")
    for name in ("qcm", "nugget_rl2", "nugget_rl3", "nugget_rl4", "tf_first", "tf_last"):
        assert dict(session_model(bench_index, sess, MethodConfig(name))) == dict(tf)
