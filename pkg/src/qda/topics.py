"""Cluster keyword extraction and manual topic refinement.

Keywords come from class-based TF-IDF: each topic's sentences form one class
document, and a term's weight is tf_{t,c} * ln(1 + A / f_t) with A the average
token count per class and f_t the term's total count across classes. The
outlier class never participates. Refinement (merge / rename / select) is
pure — every operation returns a new model with the action appended to a
replayable log and the revision bumped by one.
"""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .clustering import ClusterAssignment
from .lexical import load_stopwords, tokenize

Term = tuple[str, ...]


@dataclass(frozen=True)
class Topic:
    topic_id: int
    label: str
    size: int
    keywords: tuple[tuple[Term, float], ...]  # weight-descending
    representatives: tuple[int, ...]
    selected: bool = False

    def to_dict(self) -> dict:
        return {
            "topic_id": self.topic_id,
            "label": self.label,
            "size": self.size,
            "keywords": [{"term": list(t), "weight": w} for t, w in self.keywords],
            "representatives": list(self.representatives),
            "selected": self.selected,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Topic":
        return cls(
            topic_id=int(d["topic_id"]),
            label=d["label"],
            size=int(d["size"]),
            keywords=tuple((tuple(k["term"]), float(k["weight"])) for k in d["keywords"]),
            representatives=tuple(int(s) for s in d["representatives"]),
            selected=bool(d.get("selected", False)),
        )


@dataclass
class TopicModel:
    topics: list[Topic]
    assignment: ClusterAssignment
    run_config: dict
    refinement_log: list[dict] = field(default_factory=list)
    revision: int = 0

    def topic_ids(self) -> list[int]:
        return [t.topic_id for t in self.topics]

    def get_topic(self, topic_id: int) -> Topic:
        for t in self.topics:
            if t.topic_id == topic_id:
                return t
        raise KeyError(f"unknown topic id {topic_id}")

    @property
    def next_topic_id(self) -> int:
        """Smallest id never used; merged-away ids stay retired."""
        used = set(self.topic_ids())
        for entry in self.refinement_log:
            if entry["action"] == "merge":
                used.update(entry["ids"])
                used.add(entry["new_id"])
        return max(used) + 1 if used else 0

    def members(self, topic_id: int) -> np.ndarray:
        return np.flatnonzero(self.assignment.labels == topic_id)

    def to_dict(self, assignment_ref: str = "assignment.csv") -> dict:
        return {
            "run_config": self.run_config,
            "topics": [t.to_dict() for t in sorted(self.topics, key=lambda t: t.topic_id)],
            "assignment_ref": assignment_ref,
            "refinement_log": self.refinement_log,
            "revision": self.revision,
        }

    def save(self, path: str | Path, assignment_ref: str = "assignment.csv") -> None:
        doc = self.to_dict(assignment_ref)
        Path(path).write_text(
            json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path, assignment: ClusterAssignment | None = None) -> "TopicModel":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if assignment is None:
            ref = Path(path).parent / doc["assignment_ref"]
            assignment = ClusterAssignment.read_csv(ref)
        return cls(
            topics=[Topic.from_dict(t) for t in doc["topics"]],
            assignment=assignment,
            run_config=doc["run_config"],
            refinement_log=list(doc["refinement_log"]),
            revision=int(doc["revision"]),
        )


def model_hash(model: TopicModel) -> str:
    """Content hash of the model artifact (canonical JSON, no timestamps)."""
    doc = model.to_dict()
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def keyword_tokens(
    texts: list[str], stopwords: frozenset[str] | set[str] | None = None
) -> list[list[str]]:
    """Per-sentence keyword vocabulary: lowercased tokens minus stopwords."""
    if stopwords is None:
        stopwords = load_stopwords()
    return [[t for t in tokenize(text) if t not in stopwords] for text in texts]


def _ngrams(tokens: list[str], arity: int) -> list[Term]:
    return [tuple(tokens[i : i + arity]) for i in range(len(tokens) - arity + 1)]


def ctfidf(
    sentence_tokens: list[list[str]],
    labels: np.ndarray,
    ngram_range: tuple[int, int] = (1, 2),
) -> dict[int, dict[Term, float]]:
    """Per-class term weights W = tf * ln(1 + A / f_t).

    Classes are the non-outlier labels; n-grams are windowed within sentences
    so a phrase never spans two sentences.
    """
    lo, hi = ngram_range
    if not (1 <= lo <= hi):
        raise ValueError(f"bad ngram_range {ngram_range!r}")
    class_ids = sorted({int(l) for l in labels if l >= 0})
    if not class_ids:
        raise ValueError("nothing to model")

    tf: dict[int, dict[Term, int]] = {c: {} for c in class_ids}
    token_totals: dict[int, int] = {c: 0 for c in class_ids}
    for toks, label in zip(sentence_tokens, labels):
        c = int(label)
        if c < 0:
            continue
        token_totals[c] += len(toks)
        counts = tf[c]
        for arity in range(lo, hi + 1):
            for gram in _ngrams(toks, arity):
                counts[gram] = counts.get(gram, 0) + 1

    f_t: dict[Term, int] = {}
    for counts in tf.values():
        for term, count in counts.items():
            f_t[term] = f_t.get(term, 0) + count
    A = sum(token_totals.values()) / len(class_ids)

    return {
        c: {term: count * math.log(1.0 + A / f_t[term]) for term, count in counts.items()}
        for c, counts in tf.items()
    }


def top_keywords(weights: dict[Term, float], k: int = 10) -> list[tuple[Term, float]]:
    """k highest-weight terms; equal weights order lexicographically."""
    return sorted(weights.items(), key=lambda kv: (-kv[1], kv[0]))[:k]


def representative_sentences(
    member_ids: np.ndarray, embeddings: np.ndarray, k: int = 3
) -> list[int]:
    """Members closest (cosine) to the topic centroid in the full embedding
    space; ties fall to the smaller sent_id."""
    members = np.asarray(member_ids, dtype=np.int64)
    if members.size == 0:
        return []
    X = np.asarray(embeddings, dtype=np.float64)[members]
    centroid = X.mean(axis=0)
    c_norm = np.linalg.norm(centroid)
    norms = np.linalg.norm(X, axis=1)
    denom = norms * c_norm
    with np.errstate(invalid="ignore", divide="ignore"):
        sims = np.where(denom > 0.0, X @ centroid / np.where(denom > 0, denom, 1.0), 0.0)
    order = sorted(range(members.size), key=lambda i: (-sims[i], members[i]))
    return [int(members[i]) for i in order[:k]]


def _build_topics(
    labels: np.ndarray,
    sentence_tokens: list[list[str]],
    embeddings: np.ndarray,
    *,
    ngram_range: tuple[int, int],
    keyword_k: int,
    representative_k: int,
    label_overrides: dict[int, str] | None = None,
    selected_ids: set[int] | None = None,
) -> list[Topic]:
    weights = ctfidf(sentence_tokens, labels, ngram_range)
    overrides = label_overrides or {}
    selected = selected_ids or set()
    topics = []
    for c in sorted(weights):
        members = np.flatnonzero(labels == c)
        topics.append(
            Topic(
                topic_id=c,
                label=overrides.get(c, f"topic_{c}"),
                size=int(members.size),
                keywords=tuple(top_keywords(weights[c], keyword_k)),
                representatives=tuple(
                    representative_sentences(members, embeddings, representative_k)
                ),
                selected=c in selected,
            )
        )
    return topics


def _model_params(run_config: dict) -> tuple[tuple[int, int], int, int]:
    ngram = tuple(run_config.get("ngram_range", (1, 2)))
    return (ngram, int(run_config.get("keyword_k", 10)), int(run_config.get("representative_k", 3)))


def build_topic_model(
    texts: list[str],
    assignment: ClusterAssignment,
    embeddings: np.ndarray,
    run_config: dict | None = None,
    stopwords: frozenset[str] | set[str] | None = None,
) -> TopicModel:
    """Initial model straight from a clustering: one topic per label, default
    names, keywords and representatives computed, empty refinement log."""
    run_config = dict(run_config or {})
    run_config.setdefault("ngram_range", [1, 2])
    run_config.setdefault("keyword_k", 10)
    run_config.setdefault("representative_k", 3)
    ngram_range, keyword_k, representative_k = _model_params(run_config)
    sentence_tokens = keyword_tokens(texts, stopwords)
    topics = _build_topics(
        assignment.labels,
        sentence_tokens,
        np.asarray(embeddings),
        ngram_range=ngram_range,
        keyword_k=keyword_k,
        representative_k=representative_k,
    )
    return TopicModel(topics=topics, assignment=assignment, run_config=run_config)


def merge_topics(
    model: TopicModel,
    ids: list[int],
    *,
    sentence_tokens: list[list[str]],
    embeddings: np.ndarray,
) -> TopicModel:
    """Fuse topics into one new topic (fresh id), recomputing every topic's
    keywords over the changed class structure."""
    ids = [int(i) for i in ids]
    if -1 in ids:
        raise ValueError("cannot merge the outlier class")
    if len(set(ids)) < 2:
        raise ValueError("merge needs at least 2 distinct topic ids")
    existing = set(model.topic_ids())
    for i in ids:
        if i not in existing:
            raise KeyError(f"unknown topic id {i}")

    new_id = model.next_topic_id
    labels = model.assignment.labels.copy()
    labels[np.isin(labels, ids)] = new_id
    assignment = ClusterAssignment(labels, model.assignment.strengths.copy())

    ngram_range, keyword_k, representative_k = _model_params(model.run_config)
    overrides = {
        t.topic_id: t.label
        for t in model.topics
        if t.topic_id not in ids and t.label != f"topic_{t.topic_id}"
    }
    selected = {t.topic_id for t in model.topics if t.selected and t.topic_id not in ids}
    topics = _build_topics(
        labels,
        sentence_tokens,
        np.asarray(embeddings),
        ngram_range=ngram_range,
        keyword_k=keyword_k,
        representative_k=representative_k,
        label_overrides=overrides,
        selected_ids=selected,
    )
    log = model.refinement_log + [{"action": "merge", "ids": sorted(set(ids)), "new_id": new_id}]
    return TopicModel(
        topics=topics,
        assignment=assignment,
        run_config=model.run_config,
        refinement_log=log,
        revision=model.revision + 1,
    )


def rename_topic(model: TopicModel, topic_id: int, label: str) -> TopicModel:
    topic_id = int(topic_id)
    if not isinstance(label, str) or not label.strip():
        raise ValueError("label must be a non-empty string")
    if len(label) > 120:
        raise ValueError("label too long (max 120 characters)")
    model.get_topic(topic_id)  # raises KeyError for unknown ids
    topics = [replace(t, label=label) if t.topic_id == topic_id else t for t in model.topics]
    log = model.refinement_log + [{"action": "rename", "id": topic_id, "label": label}]
    return TopicModel(
        topics=topics,
        assignment=model.assignment,
        run_config=model.run_config,
        refinement_log=log,
        revision=model.revision + 1,
    )


def select_topics(model: TopicModel, ids: list[int]) -> TopicModel:
    ids = [int(i) for i in ids]
    existing = set(model.topic_ids())
    for i in ids:
        if i not in existing:
            raise KeyError(f"unknown topic id {i}")
    if not ids:
        warnings.warn("empty selection: final report will contain no topics", stacklevel=2)
    chosen = set(ids)
    topics = [replace(t, selected=t.topic_id in chosen) for t in model.topics]
    log = model.refinement_log + [{"action": "select", "ids": sorted(chosen)}]
    return TopicModel(
        topics=topics,
        assignment=model.assignment,
        run_config=model.run_config,
        refinement_log=log,
        revision=model.revision + 1,
    )


def replay_log(
    base: TopicModel,
    log: list[dict],
    *,
    sentence_tokens: list[list[str]],
    embeddings: np.ndarray,
) -> TopicModel:
    """Re-apply a refinement log to a base model. Replaying a model's own log
    onto its base must reproduce the model exactly."""
    model = base
    for entry in log:
        action = entry["action"]
        if action == "merge":
            model = merge_topics(
                model, entry["ids"], sentence_tokens=sentence_tokens, embeddings=embeddings
            )
            if model.refinement_log[-1]["new_id"] != entry["new_id"]:
                raise ValueError("refinement log is inconsistent: merge produced a different id")
        elif action == "rename":
            model = rename_topic(model, entry["id"], entry["label"])
        elif action == "select":
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                model = select_topics(model, entry["ids"])
        else:
            raise ValueError(f"unknown refinement action {action!r}")
    return model
