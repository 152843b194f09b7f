"""
Topic discovery from sentence embeddings
========================================

The semantic route to themes: embed sentences, reduce to 2D, cluster by
density, then describe each cluster with class-based keyword weights
(W = tf * ln(1 + A / f_t)) and its most central member sentences. This demo
builds a corpus with three known themes, fakes the embedding step with
theme-coded vectors, and recovers the themes as labeled topics.
"""

import numpy as np

from qda.clustering import ClusterConfig, hdbscan
from qda.reduction import ReductionConfig, reduce
from qda.topics import build_topic_model

rng = np.random.default_rng(6)

# Twelve sentences per theme, written from small templates.
THEMES = {
    "wages": [
        "The {adj} artisans demanded higher wages at the {place} meeting.",
        "Wages for the {adj} trades fell behind prices near the {place}.",
        "Union delegates argued that wages must rise before the {place} closes.",
        "The {adj} weavers petitioned for wages matching the {place} rates.",
    ],
    "schooling": [
        "Evening classes offered the {adj} apprentices lessons near the {place}.",
        "The {adj} institute taught drawing and geometry beside the {place}.",
        "Teachers praised the {adj} apprentices studying at the {place} nightly.",
        "Lectures on mechanics drew {adj} crowds to the {place} hall.",
    ],
    "housing": [
        "Crowded lodgings worried the {adj} inspectors visiting the {place} daily.",
        "Rent for the {adj} tenement rooms doubled along the {place} road.",
        "Sanitary reports described the {adj} dwellings beside the {place} canal.",
        "Families shared the {adj} cellars underneath the {place} arches.",
    ],
}
ADJS = ["young", "skilled", "weary"]
PLACES = ["market", "foundry", "harbour"]

texts = []
for templates in THEMES.values():
    for i in range(12):
        t = templates[i % len(templates)]
        texts.append(t.format(adj=ADJS[i % 3], place=PLACES[(i // 3) % 3]))
print(f"corpus: {len(texts)} sentences, 3 themes")

# Stand-in embeddings: each theme occupies its own region of a 16D space.
# (In real use these come precomputed from a sentence-embedding model.)
embeddings = rng.normal(0.0, 0.5, (len(texts), 16)).astype(np.float32)
for k in range(3):
    embeddings[k * 12 : (k + 1) * 12, k] += 9.0

# Reduce and cluster.
coords = reduce(embeddings, ReductionConfig(n_neighbors=8, epochs=80, seed=2)).coords
assignment = hdbscan(coords.astype(np.float64), ClusterConfig(min_cluster_size=6, min_samples=3))
print(f"clusters: {assignment.n_clusters()}, outliers: {int((assignment.labels == -1).sum())}")

# Build the topic model: keywords and representative sentences per cluster.
model = build_topic_model(texts, assignment, embeddings)
for topic in model.topics:
    terms = [" ".join(term) for term, _ in topic.keywords[:4]]
    print(f"\n{topic.label} (size {topic.size})")
    print(f"  keywords: {', '.join(terms)}")
    rep = topic.representatives[0]
    print(f"  exemplar: {texts[rep]}")
