"""End-to-end runner: ingest -> lexical -> reduce -> cluster -> topics ->
evaluate, with a JSON-serializable configuration and on-disk artifacts.

A run writes sentences.jsonl, reduced.qdae, assignment.csv, model.json, and
report.csv into the output directory. Reruns with the same configuration and
seed produce byte-identical model.json (no timestamps in artifacts). The
reported time covers reduction through keyword extraction; reading the
precomputed embeddings is deliberately outside the clock.
"""

from __future__ import annotations

import dataclasses
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

from .clustering import ClusterAssignment, ClusterConfig, hdbscan
from .corpus import (
    Sentence,
    corpus_stats,
    ingest_corpus,
    read_sentences_jsonl,
    segment_corpus,
    write_sentences_jsonl,
)
from .embeddings import load_embeddings, validate_alignment
from .lexical import load_stopwords
from .metrics import MetricsReport, aggregate_reports, evaluate
from .reduction import ReducedEmbedding, ReductionConfig, reduce
from .topics import TopicModel, build_topic_model, keyword_tokens


class PipelineError(Exception):
    """A stage failure; carries the stage name and the process exit code."""

    def __init__(self, stage: str, message: str, exit_code: int = 1):
        super().__init__(message)
        self.stage = stage
        self.exit_code = exit_code


@dataclass(frozen=True)
class RunConfig:
    corpus_paths: tuple[str, ...]
    embeddings_path: str
    corpus_format: str = "plain-text"
    min_tokens: int = 5
    stopwords_path: str | None = None
    reduction: ReductionConfig = field(default_factory=ReductionConfig)
    cluster: ClusterConfig = field(default_factory=ClusterConfig)
    ngram_range: tuple[int, int] = (1, 2)
    keyword_k: int = 10
    representative_k: int = 3
    seed: int = 0

    def __post_init__(self):
        if not self.corpus_paths:
            raise ValueError("corpus_paths must not be empty")
        if self.reduction.seed != self.seed:
            object.__setattr__(
                self, "reduction", dataclasses.replace(self.reduction, seed=self.seed)
            )

    def with_seed(self, seed: int) -> "RunConfig":
        return dataclasses.replace(
            self, seed=seed, reduction=dataclasses.replace(self.reduction, seed=seed)
        )

    def to_dict(self) -> dict:
        return {
            "corpus": {
                "paths": list(self.corpus_paths),
                "format": self.corpus_format,
                "min_tokens": self.min_tokens,
                "stopwords_path": self.stopwords_path,
            },
            "embeddings_path": self.embeddings_path,
            "reduction": self.reduction.to_dict(),
            "cluster": self.cluster.to_dict(),
            "ngram_range": list(self.ngram_range),
            "keyword_k": self.keyword_k,
            "representative_k": self.representative_k,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        corpus = d.get("corpus", {})
        red = dict(d.get("reduction", {}))
        clu = dict(d.get("cluster", {}))
        seed = int(d.get("seed", red.get("seed", 0)))
        red["seed"] = seed
        known_red = {f.name for f in dataclasses.fields(ReductionConfig)}
        known_clu = {f.name for f in dataclasses.fields(ClusterConfig)}
        return cls(
            corpus_paths=tuple(corpus.get("paths", d.get("corpus_paths", ()))),
            embeddings_path=d["embeddings_path"],
            corpus_format=corpus.get("format", "plain-text"),
            min_tokens=int(corpus.get("min_tokens", 5)),
            stopwords_path=corpus.get("stopwords_path"),
            reduction=ReductionConfig(**{k: v for k, v in red.items() if k in known_red}),
            cluster=ClusterConfig(**{k: v for k, v in clu.items() if k in known_clu}),
            ngram_range=tuple(d.get("ngram_range", (1, 2))),
            keyword_k=int(d.get("keyword_k", 10)),
            representative_k=int(d.get("representative_k", 3)),
            seed=seed,
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class RunResult:
    out_dir: Path
    sentences: list[Sentence]
    model: TopicModel
    report: MetricsReport
    reduced: ReducedEmbedding

    @property
    def artifact_paths(self) -> dict[str, Path]:
        return {
            "sentences": self.out_dir / "sentences.jsonl",
            "reduced": self.out_dir / "reduced.qdae",
            "assignment": self.out_dir / "assignment.csv",
            "model": self.out_dir / "model.json",
            "report": self.out_dir / "report.csv",
        }


def _stage(name: str, fn, *args, exit_code: int = 1, **kwargs):
    try:
        return fn(*args, **kwargs)
    except PipelineError:
        raise
    except FileNotFoundError as exc:
        raise PipelineError(name, str(exc), exit_code=exit_code) from exc
    except Exception as exc:
        raise PipelineError(name, str(exc), exit_code=exit_code) from exc


def run(config: RunConfig, out_dir: str | Path) -> RunResult:
    """Execute every stage and write the artifact set. Raises PipelineError
    with the failing stage's name; a missing embedding file exits with 2."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    def ingest_stage():
        corpus = ingest_corpus(list(config.corpus_paths), config.corpus_format)
        sentences = segment_corpus(corpus, min_tokens=config.min_tokens)
        if not sentences:
            raise ValueError("no sentences survived segmentation")
        return sentences

    sentences = _stage("ingest", ingest_stage)
    write_sentences_jsonl(sentences, out / "sentences.jsonl")

    def embeddings_stage():
        path = Path(config.embeddings_path)
        if not path.exists():
            raise PipelineError("embeddings", "embedding file not found", exit_code=2)
        m = load_embeddings(path)
        validate_alignment(len(sentences), m)
        return m

    emb = _stage("embeddings", embeddings_stage)

    def lexical_stage():
        stopwords = (
            load_stopwords(config.stopwords_path) if config.stopwords_path else load_stopwords()
        )
        texts = [s.text for s in sentences]
        return stopwords, texts, keyword_tokens(texts, stopwords)

    stopwords, texts, sent_tokens = _stage("lexical", lexical_stage)

    started = time.perf_counter()
    reduced = _stage("reduce", reduce, emb, config.reduction)
    assignment = _stage("cluster", hdbscan, reduced.coords, config.cluster)
    model = _stage(
        "topics",
        build_topic_model,
        texts,
        assignment,
        emb.data,
        run_config=config.to_dict(),
        stopwords=stopwords,
    )
    minutes = (time.perf_counter() - started) / 60.0

    report = _stage(
        "evaluate",
        evaluate,
        model,
        reduced.coords,
        minutes,
        sentence_tokens=sent_tokens,
        seed=config.seed,
    )

    def write_stage():
        reduced.save(out / "reduced.qdae")
        assignment.write_csv(out / "assignment.csv")
        model.save(out / "model.json")
        report.write_csv(out / "report.csv")

    _stage("write", write_stage)
    return RunResult(out, sentences, model, report, reduced)


def sweep(configs: list[RunConfig], out_root: str | Path) -> tuple[list[MetricsReport], dict]:
    """Run each configuration into its own subdirectory and summarize the
    reports with per-metric mean and standard deviation."""
    if not configs:
        raise ValueError("sweep needs at least one configuration")
    root = Path(out_root)
    reports = []
    for i, cfg in enumerate(configs):
        result = run(cfg, root / f"run_{i}")
        reports.append(result.report)
    summary = aggregate_reports(reports)
    (root / "sweep_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return reports, summary


def load_run_artifacts(out_dir: str | Path):
    """Read back the artifact set written by run() (sentences, model, reduced)."""
    out = Path(out_dir)
    sentences = read_sentences_jsonl(out / "sentences.jsonl")
    assignment = ClusterAssignment.read_csv(out / "assignment.csv")
    model = TopicModel.load(out / "model.json", assignment=assignment)
    reduced = load_embeddings(out / "reduced.qdae")
    return sentences, model, reduced


def corpus_table(sentences: list[Sentence]) -> dict:
    """The six-field sentence-length summary as a plain dict."""
    return corpus_stats(sentences).to_dict()


__all__ = [
    "PipelineError",
    "RunConfig",
    "RunResult",
    "run",
    "sweep",
    "load_run_artifacts",
    "corpus_table",
]
