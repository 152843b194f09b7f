"""Command-line front end.

One subcommand per pipeline stage plus `run` (everything), `compare` (tabulate
several report files), and `serve` (HTTP refinement service). Stage failures
print `error in stage <name>: ...` on stderr and exit nonzero; a missing
embedding file exits with code 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .clustering import ClusterAssignment, ClusterConfig, hdbscan
from .corpus import corpus_stats, ingest_corpus, read_sentences_jsonl, segment_corpus, write_sentences_jsonl
from .embeddings import load_embeddings
from .lexical import (
    LemmaLexicon,
    build_frequency_table,
    export_table_csv,
    lemmatize,
    load_stopwords,
    percentile_rank,
    search_terms,
    significance_flag,
    tokenize,
    top_items,
)
from .metrics import MetricsReport, compare_runs, evaluate
from .pipeline import PipelineError, RunConfig, run
from .reduction import ReductionConfig, reduce
from .topics import TopicModel, build_topic_model, keyword_tokens, model_hash


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qda", description="corpus topic analysis pipeline")
    p.add_argument("--version", action="version", version=f"qda {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("ingest", help="read documents, segment into sentences")
    sp.add_argument("paths", nargs="+", help="text or JSONL files")
    sp.add_argument("--format", choices=["plain-text", "jsonl"], default="plain-text")
    sp.add_argument("--min-tokens", type=int, default=5)
    sp.add_argument("--out", default=".", help="output directory")

    sp = sub.add_parser("lexical", help="n-gram frequency and percentile tables")
    sp.add_argument("--sentences", default="sentences.jsonl")
    sp.add_argument("--arity", type=int, default=2, choices=[1, 2, 3])
    sp.add_argument("--query", help="show only n-grams containing this token")
    sp.add_argument("--top", type=int, default=10)
    sp.add_argument("--lemmatize", action="store_true", help="map tokens to root forms first")
    sp.add_argument("--keep-stopwords", action="store_true")
    sp.add_argument("--stopwords", help="alternate stopword list file")
    sp.add_argument("--threshold", type=float, default=95.0, help="significance percentile")
    sp.add_argument("--export", help="write the full table to this CSV file")

    sp = sub.add_parser("reduce", help="project embeddings to 2-D")
    sp.add_argument("--embeddings", required=True)
    sp.add_argument("--out", default=".")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--n-neighbors", type=int, default=15)
    sp.add_argument("--min-dist", type=float, default=0.1)
    sp.add_argument("--epochs", type=int, default=200)
    sp.add_argument("--metric", choices=["cosine", "euclidean"], default="cosine")

    sp = sub.add_parser("cluster", help="density clustering of reduced points")
    sp.add_argument("--points", required=True, help="reduced coordinates file")
    sp.add_argument("--out", default=".")
    sp.add_argument("--min-cluster-size", type=int, default=15)
    sp.add_argument("--min-samples", type=int, default=None)

    sp = sub.add_parser("topics", help="keywords and representatives per cluster")
    sp.add_argument("--sentences", required=True)
    sp.add_argument("--assignment", required=True)
    sp.add_argument("--embeddings", required=True)
    sp.add_argument("--out", default=".")
    sp.add_argument("--ngram-max", type=int, default=2)
    sp.add_argument("--keywords", type=int, default=10)
    sp.add_argument("--representatives", type=int, default=3)
    sp.add_argument("--stopwords")

    sp = sub.add_parser("evaluate", help="score a topic model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--points", required=True)
    sp.add_argument("--out", required=True, help="report CSV path")
    sp.add_argument("--sentences", help="defaults to sentences.jsonl beside the model")
    sp.add_argument("--seed", type=int, default=0)

    sp = sub.add_parser("compare", help="tabulate several report files")
    sp.add_argument("reports", nargs="+", help="report CSV files")
    sp.add_argument("--out", help="also write the combined table to this CSV")

    sp = sub.add_parser("run", help="full pipeline from a JSON config")
    sp.add_argument("--config", required=True)
    sp.add_argument("--seed", type=int, default=None, help="override the config seed")
    sp.add_argument("--out", default="out")

    sp = sub.add_parser("serve", help="HTTP refinement service over a saved model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)
    sp.add_argument("--sentences", help="defaults to sentences.jsonl beside the model")
    sp.add_argument("--points", help="defaults to reduced.qdae beside the model")
    sp.add_argument("--embeddings", help="defaults to the path recorded in the model")
    sp.add_argument("--static", help="directory of UI files to serve at /")

    return p


def _cmd_ingest(args) -> int:
    corpus = ingest_corpus(args.paths, args.format)
    sentences = segment_corpus(corpus, min_tokens=args.min_tokens)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_sentences_jsonl(sentences, out / "sentences.jsonl")
    if sentences:
        for key, value in corpus_stats(sentences).to_dict().items():
            print(f"{key}: {value}")
    else:
        print("no sentences survived segmentation", file=sys.stderr)
    print(f"wrote {out / 'sentences.jsonl'}")
    return 0


def _cmd_lexical(args) -> int:
    sentences = read_sentences_jsonl(args.sentences)
    token_lists = [tokenize(s.text) for s in sentences]
    if args.lemmatize:
        lexicon = LemmaLexicon.from_file()
        token_lists = [lemmatize(toks, lexicon) for toks in token_lists]
    stopwords = load_stopwords(args.stopwords) if args.stopwords else None
    policy = "keep" if args.keep_stopwords else "drop"
    table = build_frequency_table(token_lists, args.arity, stopwords, stopword_policy=policy)

    if args.query:
        rows = search_terms(table, args.query)[: args.top]
    else:
        rows = [
            (key, count, percentile_rank(table, count)) for key, count in top_items(table, args.top)
        ]
    for key, count, pct in rows:
        flag = "*" if significance_flag(pct, args.threshold) else " "
        print(f"{' '.join(key):40s} {count:8d} {pct:7.2f}{flag}")
    if args.export:
        export_table_csv(table, args.export)
        print(f"wrote {args.export}")
    return 0


def _cmd_reduce(args) -> int:
    emb = load_embeddings(args.embeddings)
    config = ReductionConfig(
        n_neighbors=args.n_neighbors,
        min_dist=args.min_dist,
        epochs=args.epochs,
        seed=args.seed,
        metric=args.metric,
    )
    reduced = reduce(emb, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reduced.save(out / "reduced.qdae")
    print(f"wrote {out / 'reduced.qdae'} ({reduced.n} points, seed {args.seed})")
    return 0


def _cmd_cluster(args) -> int:
    points = load_embeddings(args.points).data
    config = ClusterConfig(min_cluster_size=args.min_cluster_size, min_samples=args.min_samples)
    assignment = hdbscan(points, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    assignment.write_csv(out / "assignment.csv")
    n_out = int((assignment.labels == -1).sum())
    print(
        f"wrote {out / 'assignment.csv'}: {assignment.n_clusters()} clusters, {n_out} outliers"
    )
    return 0


def _cmd_topics(args) -> int:
    sentences = read_sentences_jsonl(args.sentences)
    assignment = ClusterAssignment.read_csv(args.assignment)
    emb = load_embeddings(args.embeddings)
    stopwords = load_stopwords(args.stopwords) if args.stopwords else None
    run_config = {
        "ngram_range": [1, args.ngram_max],
        "keyword_k": args.keywords,
        "representative_k": args.representatives,
    }
    model = build_topic_model(
        [s.text for s in sentences], assignment, emb.data, run_config, stopwords
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    model.save(out / "model.json", assignment_ref=Path(args.assignment).name)
    print(f"wrote {out / 'model.json'} ({len(model.topics)} topics)")
    for t in model.topics[:10]:
        words = ", ".join(" ".join(term) for term, _ in t.keywords[:5])
        print(f"  {t.label} (n={t.size}): {words}")
    return 0


def _cmd_evaluate(args) -> int:
    model_path = Path(args.model)
    model = TopicModel.load(model_path)
    points = load_embeddings(args.points).data
    sentences_path = Path(args.sentences) if args.sentences else model_path.parent / "sentences.jsonl"
    if not sentences_path.exists():
        raise PipelineError("evaluate", f"sentences file not found: {sentences_path}")
    sentences = read_sentences_jsonl(sentences_path)
    stop_path = model.run_config.get("corpus", {}).get("stopwords_path")
    stopwords = load_stopwords(stop_path) if stop_path else load_stopwords()
    tokens = keyword_tokens([s.text for s in sentences], stopwords)
    report = evaluate(model, points, 0.0, sentence_tokens=tokens, seed=args.seed)
    report.write_csv(args.out)
    print(f"wrote {args.out}")
    for key, value in zip(report.to_dict(), report.csv_row()):
        print(f"{key}: {value}")
    return 0


def _cmd_compare(args) -> int:
    rows = [(Path(p).stem, MetricsReport.read_csv(p)) for p in args.reports]
    table = compare_runs(rows)
    print(table.to_text(), end="")
    if args.out:
        table.write_csv(args.out)
        print(f"wrote {args.out}")
    return 0


def _cmd_run(args) -> int:
    config = RunConfig.load(args.config)
    if args.seed is not None:
        config = config.with_seed(args.seed)
    result = run(config, args.out)
    for name, path in result.artifact_paths.items():
        print(f"{name}: {path}")
    print(f"model hash: {model_hash(result.model)}")
    for key, value in zip(result.report.to_dict(), result.report.csv_row()):
        print(f"{key}: {value}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import build_session, create_app

    model_path = Path(args.model)
    session = build_session(
        model_path,
        sentences_path=Path(args.sentences) if args.sentences else None,
        points_path=Path(args.points) if args.points else None,
        embeddings_path=Path(args.embeddings) if args.embeddings else None,
    )
    app = create_app(session, static_dir=Path(args.static) if args.static else None)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "lexical": _cmd_lexical,
    "reduce": _cmd_reduce,
    "cluster": _cmd_cluster,
    "topics": _cmd_topics,
    "evaluate": _cmd_evaluate,
    "compare": _cmd_compare,
    "run": _cmd_run,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except PipelineError as exc:
        print(f"error in stage {exc.stage}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
