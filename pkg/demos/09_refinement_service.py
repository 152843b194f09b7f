"""
The refinement service over HTTP
================================

Interactive refinement runs against a small JSON API: reads are free,
mutations carry the client's last-seen revision, and a stale revision is
rejected with 409 instead of silently overwriting newer work. This demo
drives the service in-process: it builds a session from a finished run,
browses topics, merges two of them, provokes a revision conflict, and
exports the final report.
"""

import tempfile
import warnings
from pathlib import Path

import numpy as np

warnings.filterwarnings("ignore", message="Using `httpx` with `starlette.testclient`")
from fastapi.testclient import TestClient

from qda.clustering import ClusterConfig
from qda.embeddings import EmbeddingMatrix, write_embeddings
from qda.pipeline import RunConfig, run
from qda.reduction import ReductionConfig
from qda.service import build_session, create_app

workdir = Path(tempfile.mkdtemp(prefix="qda_demo_"))

# Produce a run directory to serve (same recipe as the pipeline demo).
texts = []
for k, theme in enumerate(
    [
        "The {a} artisans demanded higher wages at the {b} meeting.",
        "Evening classes taught the {a} apprentices geometry near the {b}.",
        "Rents for the {a} tenement rooms doubled along the {b} road.",
    ]
):
    for i in range(8):
        texts.append(theme.format(a=["young", "skilled"][i % 2],
                                  b=["market", "foundry"][i // 4]))
(workdir / "corpus.txt").write_text(" ".join(texts) + "\n", encoding="utf-8")
rng = np.random.default_rng(4)
emb = rng.normal(0.0, 0.5, (len(texts), 12)).astype(np.float32)
for k in range(3):
    emb[k * 8 : (k + 1) * 8, k] += 9.0
write_embeddings(EmbeddingMatrix(emb, "demo"), workdir / "emb.qdae")
run(
    RunConfig(
        corpus_paths=(str(workdir / "corpus.txt"),),
        embeddings_path=str(workdir / "emb.qdae"),
        reduction=ReductionConfig(n_neighbors=8, epochs=60),
        cluster=ClusterConfig(min_cluster_size=6, min_samples=3),
        seed=2,
    ),
    workdir / "out",
)

# Serve the run. (`qda serve --model out/model.json` does the same from the
# command line; the TestClient keeps this demo self-contained.)
session = build_session(workdir / "out" / "model.json")
client = TestClient(create_app(session))

state = client.get("/api/session").json()
print(f"session {state['session_id'][:8]}... revision {state['revision']}")

topics = client.get("/api/topics").json()["topics"]
print(f"topics: {[(t['topic_id'], t['size']) for t in topics]}")

# Merge the two smallest topics, quoting the current revision.
ids = [t["topic_id"] for t in sorted(topics, key=lambda t: t["size"])[:2]]
resp = client.post("/api/topics/merge", json={"ids": ids, "revision": state["revision"]})
print(f"\nmerge {ids}: HTTP {resp.status_code}, new revision {resp.json()['revision']}")

# A second client that still quotes revision 0 must be turned away.
stale = client.post("/api/topics/merge", json={"ids": ids, "revision": state["revision"]})
print(f"stale merge: HTTP {stale.status_code}, body {stale.json()}")

# Metrics reflect the refinement immediately.
metrics = client.get("/api/metrics").json()["metrics"]
print(f"\nmetrics after merge: topics={metrics['topics']} gini={metrics['gini']:.3f}")

# Select everything and export the final report.
current = client.get("/api/session").json()["revision"]
remaining = [t["topic_id"] for t in client.get("/api/topics").json()["topics"]]
client.post("/api/selection", json={"ids": remaining, "revision": current})
report = client.get("/api/export").json()
print(f"exported topics: {[t['topic_id'] for t in report['topics']]}")
