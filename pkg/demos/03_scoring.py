"""
Dirichlet-smoothed query likelihood
===================================

Score documents with a weighted query model and see how the smoothing
parameter and negative weights move the ranking.
"""

import math

from sesh.lmscore import QueryModel, SmoothingConfig, doc_prob, idf, score
from sesh.textindex import build_index

docs = [
    ("d1", "jaguar car dealer jaguar xf price"),
    ("d2", "the jaguar is a big cat of the americas"),
    ("d3", "used car prices and car dealer reviews"),
]
index = build_index(docs)

# P(t | d) = (tf + mu * P_c(t)) / (|d| + mu)
for mu in (1.0, 10.0, 2500.0):
    cfg = SmoothingConfig(mu)
    probs = [doc_prob(index, d, "jaguar", cfg) for d, _ in docs]
    print(f"mu={mu:<7} P(jaguar|d) =", " ".join(f"{p:.4f}" for p in probs))

# a query model maps terms or n-grams to weights; the score is sum w * log P
cars = QueryModel({"jaguar": 1.0, "car": 1.0, ("jaguar", "xf"): 0.1})
cats = QueryModel({"jaguar": 1.0, "car": -0.4})
for name, qm in (("cars", cars), ("cats", cats)):
    ranked = sorted(docs, key=lambda d: -score(index, d[0], qm, SmoothingConfig(10)))
    print(name, "->", [d for d, _ in ranked])

# the score is linear in the weights, so scaling a model does not change the order
assert math.isclose(score(index, "d1", cars.scaled(2)), 2 * score(index, "d1", cars))

# idf as used by the query change model for brand-new terms
print({t: round(idf(index, t), 4) for t in ("jaguar", "car", "unseen")})
