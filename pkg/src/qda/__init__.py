"""Transparent, reproducible topic analysis for text corpora.

The package pairs two arms of evidence over the same sentence corpus: exact
lexical statistics (n-gram tables, lemma aggregation, percentile significance)
and semantic clustering (neighbor-graph 2-D reduction, density clustering,
class-based TF-IDF keywords), plus an evaluation suite and an HTTP service for
manual topic refinement. Every stage is deterministic under a fixed seed.
"""

__version__ = "0.1.0"

from .clustering import ClusterAssignment, ClusterConfig, hdbscan
from .corpus import (
    Corpus,
    CorpusStats,
    Document,
    IngestError,
    Sentence,
    corpus_stats,
    ingest_corpus,
    segment_corpus,
    segment_sentences,
)
from .embeddings import (
    EmbeddingFormatError,
    EmbeddingMatrix,
    cosine_similarity,
    load_embeddings,
    write_embeddings,
)
from .lexical import (
    FrequencyTable,
    LemmaLexicon,
    build_frequency_table,
    build_lemma_table,
    lemmatize,
    load_stopwords,
    percentile_rank,
    search_terms,
    significance_flag,
    tokenize,
    top_items,
)
from .metrics import (
    ComparisonTable,
    MetricsReport,
    coherence_cv,
    compare_runs,
    count_outliers,
    count_topics,
    evaluate,
    gini,
    ngram_score,
    silhouette,
)
from .pipeline import PipelineError, RunConfig, RunResult, run, sweep
from .reduction import ReducedEmbedding, ReductionConfig, reduce
from .topics import (
    Topic,
    TopicModel,
    build_topic_model,
    ctfidf,
    merge_topics,
    model_hash,
    rename_topic,
    replay_log,
    representative_sentences,
    select_topics,
    top_keywords,
)

__all__ = [name for name in dir() if not name.startswith("_")]
