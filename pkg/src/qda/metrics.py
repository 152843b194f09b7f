"""Run evaluation: outlier/topic counts, keyword n-gram share, topic-size
inequality, sliding-window coherence, silhouette, and run comparison tables.

Undefined values are genuine outputs here, not errors: coherence is undefined
when a topic's keywords lack occurrence support, silhouette when there are
fewer than two clusters. They carry through as NaN and render as the literal
string "NaN" in CSV and text tables.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clustering import ClusterAssignment
from .topics import Term, TopicModel

_FIELDS = (
    "outliers",
    "topics",
    "ngram_score",
    "gini",
    "coherence_cv",
    "silhouette",
    "time_minutes",
)


def _labels_of(assignment) -> np.ndarray:
    if isinstance(assignment, ClusterAssignment):
        return assignment.labels
    return np.asarray(assignment, dtype=np.int64)


def count_outliers(assignment) -> int:
    return int((_labels_of(assignment) == -1).sum())


def count_topics(assignment) -> int:
    labels = _labels_of(assignment)
    return int(np.unique(labels[labels >= 0]).size)


def ngram_score(topic_keywords: list[list[Term]]) -> float:
    """Share of keywords that are multi-word phrases, over all topics."""
    total = sum(len(kws) for kws in topic_keywords)
    if total == 0:
        return math.nan
    multi = sum(1 for kws in topic_keywords for term in kws if len(term) >= 2)
    return multi / total


def gini(sizes: list[int]) -> float:
    """Mean absolute difference over twice the mean: sum |x_i - x_j| / (2 n^2 xbar)."""
    x = np.asarray(sizes, dtype=np.float64)
    n = x.size
    if n <= 1:
        return 0.0
    total = x.sum()
    if total == 0.0:
        return 0.0
    diffs = np.abs(x[:, None] - x[None, :]).sum()
    return float(diffs / (2.0 * n * n * (total / n)))


def _window_iter(tokens: list[str], window: int):
    if len(tokens) <= window:
        yield tokens
    else:
        for i in range(len(tokens) - window + 1):
            yield tokens[i : i + window]


def _occurs(window_tokens: list[str], term: Term) -> bool:
    if len(term) == 1:
        return term[0] in window_tokens
    k = len(term)
    for i in range(len(window_tokens) - k + 1):
        if tuple(window_tokens[i : i + k]) == term:
            return True
    return False


def coherence_cv(
    topic_keywords: list[list[Term]],
    sentence_tokens: list[list[str]],
    window: int = 110,
    epsilon: float = 1e-12,
) -> float:
    """Sliding-window coherence over keyword co-occurrence.

    Boolean occurrence is counted over width-`window` token windows within each
    sentence (a shorter sentence is one window). Word pairs get NPMI with
    smoothing epsilon; each word's NPMI vector against the topic's words (self
    included) is compared by cosine with the topic's summed vector; the score
    averages those cosines over words, then over topics. NaN when there are no
    topics or any keyword never occurs.
    """
    if not topic_keywords or any(len(kws) == 0 for kws in topic_keywords):
        return math.nan

    all_terms = sorted({t for kws in topic_keywords for t in kws})
    term_ix = {t: i for i, t in enumerate(all_terms)}
    T = len(all_terms)
    occ = np.zeros(T, dtype=np.int64)
    joint = np.zeros((T, T), dtype=np.int64)
    n_windows = 0
    for tokens in sentence_tokens:
        for win in _window_iter(tokens, window):
            n_windows += 1
            present = [term_ix[t] for t in all_terms if _occurs(win, t)]
            for a in present:
                occ[a] += 1
            for ai, a in enumerate(present):
                for b in present[ai + 1 :]:
                    joint[a, b] += 1
                    joint[b, a] += 1
    if n_windows == 0:
        return math.nan
    np.fill_diagonal(joint, occ)

    p = occ / n_windows
    pj = joint / n_windows

    topic_scores = []
    for kws in topic_keywords:
        idx = [term_ix[t] for t in kws]
        if any(occ[i] == 0 for i in idx):
            return math.nan
        k = len(idx)
        npmi = np.empty((k, k))
        for r, a in enumerate(idx):
            for c, b in enumerate(idx):
                pab = pj[a, b] + epsilon
                npmi[r, c] = math.log(pab / (p[a] * p[b])) / -math.log(pab)
        vsum = npmi.sum(axis=0)
        cosines = []
        for r in range(k):
            num = float(npmi[r] @ vsum)
            den = float(np.linalg.norm(npmi[r]) * np.linalg.norm(vsum))
            cosines.append(num / den if den > 0.0 else 0.0)
        topic_scores.append(sum(cosines) / k)
    return sum(topic_scores) / len(topic_scores)


def silhouette(
    points: np.ndarray,
    labels: np.ndarray,
    sample_cap: int = 10_000,
    seed: int = 0,
) -> float:
    """Mean (b - a)/max(a, b) over non-outlier points, euclidean distances.

    Clusters of one get s = 0. Above sample_cap non-outlier points, a seeded
    uniform subsample of sample_cap points is scored instead. NaN with fewer
    than two clusters.
    """
    X = np.asarray(points, dtype=np.float64)
    labels = _labels_of(labels)
    keep = np.flatnonzero(labels >= 0)
    if np.unique(labels[keep]).size < 2:
        return math.nan
    if keep.size > sample_cap:
        rng = np.random.default_rng(seed)
        keep = np.sort(rng.choice(keep, size=sample_cap, replace=False))
        if np.unique(labels[keep]).size < 2:
            return math.nan
    X = X[keep]
    labs = labels[keep]
    m = X.shape[0]
    cluster_ids, inv = np.unique(labs, return_inverse=True)
    k = cluster_ids.size
    counts = np.bincount(inv, minlength=k)
    onehot = np.zeros((m, k))
    onehot[np.arange(m), inv] = 1.0

    scores = np.zeros(m)
    block = 1024
    for start in range(0, m, block):
        stop = min(start + block, m)
        diffs = X[start:stop, None, :] - X[None, :, :]
        d = np.sqrt((diffs * diffs).sum(axis=2))  # (b, m)
        per_cluster = d @ onehot  # (b, k) distance sums
        for row in range(stop - start):
            i = start + row
            c = inv[i]
            if counts[c] == 1:
                scores[i] = 0.0
                continue
            a = per_cluster[row, c] / (counts[c] - 1)
            b_vals = [
                per_cluster[row, j] / counts[j] for j in range(k) if j != c and counts[j] > 0
            ]
            b = min(b_vals)
            denom = max(a, b)
            scores[i] = (b - a) / denom if denom > 0.0 else 0.0
    return float(scores.mean())


def _fmt(value, decimals: int = 3) -> str:
    if isinstance(value, int):
        return str(value)
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "NaN"
    return f"{value:.{decimals}f}"


@dataclass(frozen=True)
class MetricsReport:
    outliers: int
    topics: int
    ngram_score: float
    gini: float
    coherence_cv: float
    silhouette: float
    time_minutes: float

    def values(self) -> tuple:
        return tuple(getattr(self, f) for f in _FIELDS)

    def to_dict(self) -> dict:
        return {f: getattr(self, f) for f in _FIELDS}

    def to_jsonable(self) -> dict:
        """NaN becomes null: JSON has no NaN literal."""
        out = {}
        for f in _FIELDS:
            v = getattr(self, f)
            out[f] = None if isinstance(v, float) and math.isnan(v) else v
        return out

    def csv_row(self) -> list[str]:
        return [_fmt(v) for v in self.values()]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(_FIELDS)
            w.writerow(self.csv_row())

    @classmethod
    def read_csv(cls, path: str | Path) -> "MetricsReport":
        with open(path, newline="", encoding="utf-8") as fh:
            row = next(csv.DictReader(fh))
        return cls(
            outliers=int(row["outliers"]),
            topics=int(row["topics"]),
            ngram_score=float(row["ngram_score"]),
            gini=float(row["gini"]),
            coherence_cv=float(row["coherence_cv"]),
            silhouette=float(row["silhouette"]),
            time_minutes=float(row["time_minutes"]),
        )


def evaluate(
    model: TopicModel,
    points: np.ndarray,
    time_minutes: float = 0.0,
    *,
    sentence_tokens: list[list[str]],
    window: int = 110,
    sample_cap: int = 10_000,
    seed: int = 0,
) -> MetricsReport:
    """All six metrics over a topic model plus the caller-measured pipeline
    time (embedding precomputation is never part of that time)."""
    labels = model.assignment.labels
    keywords = [[term for term, _ in t.keywords] for t in model.topics]
    sizes = [t.size for t in model.topics]
    return MetricsReport(
        outliers=count_outliers(labels),
        topics=count_topics(labels),
        ngram_score=ngram_score(keywords),
        gini=gini(sizes),
        coherence_cv=coherence_cv(keywords, sentence_tokens, window=window),
        silhouette=silhouette(points, labels, sample_cap=sample_cap, seed=seed),
        time_minutes=time_minutes,
    )


@dataclass
class ComparisonTable:
    rows: list[tuple[str, MetricsReport]]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(("model",) + _FIELDS)
        for tag, report in self.rows:
            w.writerow(
                [tag]
                + [
                    "NaN" if isinstance(v, float) and math.isnan(v) else repr(v)
                    if isinstance(v, float)
                    else str(v)
                    for v in report.values()
                ]
            )
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")

    def to_text(self) -> str:
        header = ("model",) + _FIELDS
        body = [[tag] + [_fmt(v) for v in report.values()] for tag, report in self.rows]
        widths = [
            max(len(header[c]), *(len(r[c]) for r in body)) if body else len(header[c])
            for c in range(len(header))
        ]
        lines = [
            "  ".join(h.ljust(widths[i]) for i, h in enumerate(header)),
            "  ".join("-" * w for w in widths),
        ]
        for r in body:
            lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(r)))
        return "\n".join(lines) + "\n"


def compare_runs(reports: list[tuple[str, MetricsReport]]) -> ComparisonTable:
    """Table of runs in input order, one row per (tag, report)."""
    if not reports:
        raise ValueError("nothing to compare: no reports given")
    return ComparisonTable(rows=list(reports))


def aggregate_reports(reports: list[MetricsReport]) -> dict[str, dict[str, float]]:
    """Per-metric mean and sample standard deviation across runs."""
    if not reports:
        raise ValueError("no reports to aggregate")
    out: dict[str, dict[str, float]] = {"mean": {}, "stdev": {}}
    for f in _FIELDS:
        vals = np.asarray([float(getattr(r, f)) for r in reports])
        out["mean"][f] = float(vals.mean())
        out["stdev"][f] = float(vals.std(ddof=1)) if vals.size > 1 else 0.0
    return out
