"""
Evaluating and comparing topic models
=====================================

Six numbers summarize a topic model: outlier count, topic count, the share
of multi-word keywords, the Gini inequality of topic sizes, sliding-window
coherence, and the silhouette of the clustering. Side by side across runs,
they show how an embedding choice changes the result. This demo evaluates
two models built from different synthetic embeddings of the same corpus and
prints the comparison table.
"""

import numpy as np

from qda.clustering import ClusterConfig, hdbscan
from qda.metrics import aggregate_reports, compare_runs, evaluate
from qda.reduction import ReductionConfig, reduce
from qda.topics import build_topic_model, keyword_tokens

# One corpus, three themes.
texts = []
for k, theme in enumerate(
    [
        "The {a} artisans demanded higher wages at the {b} meeting.",
        "Evening classes taught the {a} apprentices geometry near the {b}.",
        "Rents for the {a} tenement rooms doubled along the {b} road.",
    ]
):
    for i in range(12):
        texts.append(theme.format(a=["young", "skilled", "weary"][i % 3],
                                  b=["market", "foundry", "harbour"][i // 4]))
tokens = keyword_tokens(texts)

def make_model(emb_seed: int, tightness: float):
    """Embed the same corpus with different quality, then model it."""
    rng = np.random.default_rng(emb_seed)
    emb = rng.normal(0.0, tightness, (len(texts), 16)).astype(np.float32)
    for k in range(3):
        emb[k * 12 : (k + 1) * 12, k] += 9.0
    coords = reduce(emb, ReductionConfig(n_neighbors=8, epochs=80, seed=2)).coords
    assignment = hdbscan(coords.astype(np.float64), ClusterConfig(min_cluster_size=6, min_samples=3))
    return build_topic_model(texts, assignment, emb), coords

# Model A: tight embeddings. Model B: noisier embeddings of the same text.
model_a, coords_a = make_model(4, 0.4)
model_b, coords_b = make_model(9, 1.2)

report_a = evaluate(model_a, coords_a, time_minutes=0.02, sentence_tokens=tokens)
report_b = evaluate(model_b, coords_b, time_minutes=0.03, sentence_tokens=tokens)

print("model A:", report_a.to_dict())
print("model B:", report_b.to_dict())

# The comparison table aligns both runs; undefined metrics would print NaN.
table = compare_runs([("tight-embeddings", report_a), ("noisy-embeddings", report_b)])
print("\n" + table.to_text())

# Aggregation across runs gives per-metric mean and sample stdev.
agg = aggregate_reports([report_a, report_b])
print("mean silhouette:  %.3f" % agg["mean"]["silhouette"])
print("stdev silhouette: %.3f" % agg["stdev"]["silhouette"])
