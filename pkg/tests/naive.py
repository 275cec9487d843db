"""Independent reference implementations used as test oracles.

Everything here recomputes from raw token lists on each call and shares no
code with the package beyond the tokenizer.
"""

import math


def phrase_count(tokens, gram):
    n = len(gram)
    return sum(1 for i in range(len(tokens) - n + 1) if list(tokens[i:i + n]) == list(gram))


def naive_doc_prob(corpus_tokens, docno, entity, mu):
    tokens = corpus_tokens[docno]
    gram = [entity] if isinstance(entity, str) else list(entity)
    n = len(gram)
    freq = phrase_count(tokens, gram)
    length = max(0, len(tokens) - n + 1)
    total_terms = sum(len(t) for t in corpus_tokens.values())
    coll_num = sum(phrase_count(t, gram) for t in corpus_tokens.values())
    coll_den = sum(max(0, len(t) - n + 1) for t in corpus_tokens.values())
    p_c = coll_num / coll_den if coll_num else 0.5 / total_terms
    return (freq + mu * p_c) / (length + mu)


def naive_score(corpus_tokens, docno, weights, mu):
    return sum(w * math.log(naive_doc_prob(corpus_tokens, docno, e, mu)) for e, w in weights.items())


def brute_ndcg(docnos, judged, k=10):
    gain = {d: max(0, g) for d, g in judged.items()}
    dcg = 0.0
    for i in range(min(k, len(docnos))):
        dcg += gain.get(docnos[i], 0) * (1.0 / math.log2(i + 2))
    ideal = sorted((g for g in gain.values() if g > 0), reverse=True)
    idcg = 0.0
    for i in range(min(k, len(ideal))):
        idcg += ideal[i] / math.log2(i + 2)
    return dcg / idcg


def brute_rr(docnos, judged):
    for i, d in enumerate(docnos):
        if judged.get(d, 0) > 0:
            return 1 / (i + 1)
    return 0.0
