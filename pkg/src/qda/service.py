"""HTTP/JSON service for interactive topic refinement.

Serves a saved model for browsing, merging, renaming, and selecting topics.
Every response carries the current revision; mutating requests must echo the
revision they saw and get 409 back when it is stale (optimistic concurrency,
so two tabs can't silently overwrite each other). Accepted mutations are
persisted to disk before the response is sent, and the refinement log makes
any session state reproducible from the base model. The service never touches
the corpus, embeddings, or reduced coordinates — only refinement state.
"""

from __future__ import annotations

import datetime as _dt
import json
import math
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Query
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .clustering import ClusterAssignment
from .lexical import load_stopwords
from .metrics import MetricsReport, evaluate
from .topics import TopicModel, keyword_tokens, merge_topics, rename_topic, select_topics


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


@dataclass
class SessionState:
    session_id: str
    model: TopicModel
    model_path: Path
    assignment_path: Path
    session_path: Path
    texts: list[str]
    sentence_tokens: list[list[str]]
    embeddings: np.ndarray
    points: np.ndarray
    base_time_minutes: float
    created: str
    updated: str
    lock: threading.Lock = field(default_factory=threading.Lock)
    _metrics_cache: dict[int, MetricsReport] = field(default_factory=dict)

    @property
    def revision(self) -> int:
        return self.model.revision

    def metrics(self) -> MetricsReport:
        if self.revision not in self._metrics_cache:
            seed = int(self.model.run_config.get("seed", 0))
            self._metrics_cache[self.revision] = evaluate(
                self.model,
                self.points,
                self.base_time_minutes,
                sentence_tokens=self.sentence_tokens,
                seed=seed,
            )
        return self._metrics_cache[self.revision]

    def persist(self) -> None:
        self.updated = _now()
        self.model.save(self.model_path, assignment_ref=self.assignment_path.name)
        self.model.assignment.write_csv(self.assignment_path)
        self.session_path.write_text(
            json.dumps(
                {
                    "session_id": self.session_id,
                    "revision": self.revision,
                    "created": self.created,
                    "updated": self.updated,
                },
                indent=2,
            )
            + "\n",
            encoding="utf-8",
        )


def build_session(
    model_path: str | Path,
    sentences_path: Path | None = None,
    points_path: Path | None = None,
    embeddings_path: Path | None = None,
    session_path: Path | None = None,
) -> SessionState:
    """Assemble a session from a run's artifact directory. Sentences and
    reduced points default to siblings of the model; the full embeddings
    default to the path recorded in the model's run configuration."""
    from .corpus import read_sentences_jsonl
    from .embeddings import load_embeddings

    model_path = Path(model_path)
    base = model_path.parent
    model = TopicModel.load(model_path)

    sentences_path = sentences_path or base / "sentences.jsonl"
    points_path = points_path or base / "reduced.qdae"
    if embeddings_path is None:
        recorded = model.run_config.get("embeddings_path")
        if not recorded:
            raise FileNotFoundError("no embeddings path recorded; pass one explicitly")
        embeddings_path = Path(recorded)
    for p, what in ((sentences_path, "sentences"), (points_path, "points"), (embeddings_path, "embeddings")):
        if not Path(p).exists():
            raise FileNotFoundError(f"{what} file not found: {p}")

    sentences = read_sentences_jsonl(sentences_path)
    texts = [s.text for s in sentences]
    stop_path = model.run_config.get("corpus", {}).get("stopwords_path")
    stopwords = load_stopwords(stop_path) if stop_path else load_stopwords()

    report_path = base / "report.csv"
    base_time = 0.0
    if report_path.exists():
        base_time = MetricsReport.read_csv(report_path).time_minutes
        if math.isnan(base_time):
            base_time = 0.0

    session_path = session_path or base / "session.json"
    created = _now()
    session_id = uuid.uuid4().hex[:12]
    if session_path.exists():
        prior = json.loads(session_path.read_text(encoding="utf-8"))
        session_id = prior.get("session_id", session_id)
        created = prior.get("created", created)

    return SessionState(
        session_id=session_id,
        model=model,
        model_path=model_path,
        assignment_path=base / model.to_dict()["assignment_ref"],
        session_path=session_path,
        texts=texts,
        sentence_tokens=keyword_tokens(texts, stopwords),
        embeddings=load_embeddings(embeddings_path).data,
        points=load_embeddings(points_path).data,
        base_time_minutes=base_time,
        created=created,
        updated=_now(),
    )


def export_final_report(session: SessionState, out_path: str | Path | None = None) -> dict:
    """Final report over the selected topics only, with metrics recomputed on
    the refined assignment. Empty selection produces an empty report plus a
    warning field."""
    selected = [t for t in session.model.topics if t.selected]
    report = {
        "session_id": session.session_id,
        "revision": session.revision,
        "topics": [
            {
                **t.to_dict(),
                "representative_sentences": [
                    {"sent_id": sid, "text": session.texts[sid]} for sid in t.representatives
                ],
            }
            for t in sorted(selected, key=lambda t: -t.size)
        ],
        "metrics": session.metrics().to_jsonable(),
    }
    if not selected:
        report["warning"] = "no topics selected"
    if out_path is None:
        out_path = session.model_path.parent / "final_report.json"
    Path(out_path).write_text(
        json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    return report


class MergeRequest(BaseModel):
    ids: list[int]
    revision: int


class RenameRequest(BaseModel):
    label: str
    revision: int


class SelectionRequest(BaseModel):
    ids: list[int]
    revision: int


def _error(status: int, message: str, revision: int) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message, "revision": revision})


def create_app(session: SessionState, static_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="qda refinement service", docs_url=None, redoc_url=None)

    @app.get("/api/session")
    def get_session():
        labels = session.model.assignment.labels
        return {
            "revision": session.revision,
            "session_id": session.session_id,
            "created": session.created,
            "updated": session.updated,
            "topic_count": len(session.model.topics),
            "outlier_count": int((labels == -1).sum()),
            "sentence_count": len(session.texts),
            "selected_ids": sorted(t.topic_id for t in session.model.topics if t.selected),
        }

    @app.get("/api/topics")
    def list_topics():
        labels = session.model.assignment.labels
        return {
            "revision": session.revision,
            "outliers": int((labels == -1).sum()),
            "topics": [t.to_dict() for t in session.model.topics],
        }

    @app.get("/api/topics/{topic_id}")
    def get_topic(topic_id: int):
        try:
            topic = session.model.get_topic(topic_id)
        except KeyError:
            return _error(404, "unknown topic", session.revision)
        doc = topic.to_dict()
        doc["representative_sentences"] = [
            {"sent_id": sid, "text": session.texts[sid]} for sid in topic.representatives
        ]
        return {"revision": session.revision, "topic": doc}

    @app.get("/api/topics/{topic_id}/sentences")
    def topic_sentences(topic_id: int, limit: int = Query(default=50, ge=1, le=5000)):
        labels = session.model.assignment.labels
        if topic_id != -1:
            try:
                session.model.get_topic(topic_id)
            except KeyError:
                return _error(404, "unknown topic", session.revision)
        members = np.flatnonzero(labels == topic_id)
        strengths = session.model.assignment.strengths
        return {
            "revision": session.revision,
            "topic_id": topic_id,
            "total": int(members.size),
            "sentences": [
                {
                    "sent_id": int(i),
                    "text": session.texts[int(i)],
                    "strength": float(strengths[int(i)]),
                }
                for i in members[:limit]
            ],
        }

    @app.post("/api/topics/merge")
    def merge(req: MergeRequest):
        with session.lock:
            if req.revision != session.revision:
                return _error(409, "stale revision", session.revision)
            try:
                new_model = merge_topics(
                    session.model,
                    req.ids,
                    sentence_tokens=session.sentence_tokens,
                    embeddings=session.embeddings,
                )
            except KeyError:
                return _error(404, "unknown topic", session.revision)
            except ValueError as exc:
                return _error(400, str(exc), session.revision)
            session.model = new_model
            session.persist()
            merged = new_model.refinement_log[-1]["new_id"]
            return {
                "revision": session.revision,
                "topic": new_model.get_topic(merged).to_dict(),
            }

    @app.patch("/api/topics/{topic_id}")
    def rename(topic_id: int, req: RenameRequest):
        with session.lock:
            if req.revision != session.revision:
                return _error(409, "stale revision", session.revision)
            try:
                session.model = rename_topic(session.model, topic_id, req.label)
            except KeyError:
                return _error(404, "unknown topic", session.revision)
            except ValueError as exc:
                return _error(400, str(exc), session.revision)
            session.persist()
            return {
                "revision": session.revision,
                "topic": session.model.get_topic(topic_id).to_dict(),
            }

    @app.post("/api/selection")
    def select(req: SelectionRequest):
        import warnings

        with session.lock:
            if req.revision != session.revision:
                return _error(409, "stale revision", session.revision)
            try:
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    session.model = select_topics(session.model, req.ids)
            except KeyError:
                return _error(404, "unknown topic", session.revision)
            session.persist()
            return {
                "revision": session.revision,
                "selected_ids": sorted(t.topic_id for t in session.model.topics if t.selected),
            }

    @app.get("/api/metrics")
    def get_metrics():
        return {"revision": session.revision, "metrics": session.metrics().to_jsonable()}

    @app.get("/api/export")
    def export():
        return export_final_report(session)

    if static_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True), name="ui")

    return app
