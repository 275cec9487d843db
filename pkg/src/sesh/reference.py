"""Published TREC Session track (2011-2014) NDCG@10 / MRR for the implemented methods.

Used only for side-by-side context in reports; nothing here is computed.
"""

EDITIONS = ("2011", "2012", "2013", "2014")

# method -> edition -> (NDCG@10, MRR)
PUBLISHED_RESULTS = {
    "oracle": {"2011": (0.777, 0.868), "2012": (0.695, 0.865), "2013": (0.517, 0.920), "2014": (0.410, 0.800)},
    "tf_first": {"2011": (0.371, 0.568), "2012": (0.302, 0.523), "2013": (0.121, 0.379), "2014": (0.120, 0.336)},
    "tf_last": {"2011": (0.358, 0.598), "2012": (0.316, 0.586), "2013": (0.133, 0.358), "2014": (0.156, 0.458)},
    "tf_all": {"2011": (0.448, 0.685), "2012": (0.348, 0.604), "2013": (0.162, 0.477), "2014": (0.174, 0.478)},
    "nugget_rl2": {"2011": (0.437, 0.677), "2012": (0.352, 0.609), "2013": (0.163, 0.488), "2014": (0.173, 0.476)},
    "nugget_rl3": {"2011": (0.442, 0.678), "2012": (0.360, 0.619), "2013": (0.162, 0.488), "2014": (0.172, 0.477)},
    "nugget_rl4": {"2011": (0.437, 0.677), "2012": (0.352, 0.609), "2013": (0.163, 0.488), "2014": (0.173, 0.476)},
    "qcm": {"2011": (0.440, 0.661), "2012": (0.342, 0.575), "2013": (0.160, 0.484), "2014": (0.162, 0.450)},
}

# NDCG@10 on sessions with at most 7 unique query terms: TF(all), ideal weights, ground truth
PUBLISHED_IDEAL = {
    "2011": (0.391, 0.589, 0.716),
    "2012": (0.333, 0.528, 0.682),
    "2013": (0.179, 0.361, 0.593),
    "2014": (0.183, 0.296, 0.453),
}
