import json
import math

import numpy as np
import pytest

from qda.clustering import ClusterAssignment, ClusterConfig
from qda.corpus import corpus_stats, ingest_corpus, read_sentences_jsonl, segment_corpus
from qda.embeddings import EmbeddingMatrix, load_embeddings, write_embeddings
from qda.metrics import MetricsReport
from qda.pipeline import (
    PipelineError,
    RunConfig,
    corpus_table,
    load_run_artifacts,
    run,
    sweep,
)
from qda.reduction import ReductionConfig
from qda.topics import TopicModel, model_hash

THEMES = {
    "wages": [
        "The {adj} artisans demanded higher wages at the {noun} meeting.",
        "Wages for the {adj} trades fell behind prices near the {noun}.",
        "Union delegates argued that wages must rise before the {noun} closes.",
    ],
    "schooling": [
        "Evening classes offered the {adj} apprentices lessons near the {noun}.",
        "The {adj} institute taught drawing and geometry beside the {noun}.",
        "Teachers praised the {adj} apprentices who studied at the {noun} nightly.",
    ],
    "housing": [
        "Crowded lodgings worried the {adj} inspectors visiting the {noun} daily.",
        "Rent for the {adj} tenement rooms doubled along the {noun} road.",
        "Sanitary reports described the {adj} dwellings beside the {noun} canal.",
    ],
}
ADJS = ["young", "skilled", "weary", "northern"]
NOUNS = ["market", "foundry", "harbour", "mill"]


def write_corpus(path, per_theme=8):
    """Deterministic themed corpus; returns the expected sentence count."""
    lines = []
    for templates in THEMES.values():
        for i in range(per_theme):
            t = templates[i % len(templates)]
            lines.append(t.format(adj=ADJS[i % len(ADJS)], noun=NOUNS[i % len(NOUNS)]))
    path.write_text(" ".join(lines) + "\n", encoding="utf-8")
    return len(lines)


def write_theme_embeddings(path, n, per_theme, dim=12, seed=4):
    rng = np.random.default_rng(seed)
    data = rng.normal(0, 0.5, (n, dim))
    for k in range(3):
        data[k * per_theme : (k + 1) * per_theme, k] += 9.0
    write_embeddings(EmbeddingMatrix(data.astype(np.float32), "toy"), path)
    return data


@pytest.fixture
def workspace(tmp_path):
    corpus = tmp_path / "corpus.txt"
    n = write_corpus(corpus, per_theme=8)
    sentences = segment_corpus(ingest_corpus([corpus]))
    assert len(sentences) == n  # every template sentence has >= 5 tokens
    emb = tmp_path / "emb.qdae"
    write_theme_embeddings(emb, n, 8)
    config = RunConfig(
        corpus_paths=(str(corpus),),
        embeddings_path=str(emb),
        reduction=ReductionConfig(n_neighbors=8, epochs=50),
        cluster=ClusterConfig(min_cluster_size=6, min_samples=3),
        seed=2,
    )
    return tmp_path, config


class TestRunConfig:
    def test_round_trip(self, workspace, tmp_path):
        _, config = workspace
        path = tmp_path / "config.json"
        config.save(path)
        back = RunConfig.load(path)
        assert back == config

    def test_dict_shape(self, workspace):
        _, config = workspace
        d = config.to_dict()
        assert set(d) == {
            "corpus",
            "embeddings_path",
            "reduction",
            "cluster",
            "ngram_range",
            "keyword_k",
            "representative_k",
            "seed",
        }
        assert set(d["corpus"]) == {"paths", "format", "min_tokens", "stopwords_path"}

    def test_seed_propagates_to_reduction(self):
        config = RunConfig(corpus_paths=("a.txt",), embeddings_path="e.qdae", seed=9)
        assert config.reduction.seed == 9
        assert config.with_seed(4).reduction.seed == 4
        assert config.with_seed(4).seed == 4

    def test_empty_corpus_paths_rejected(self):
        with pytest.raises(ValueError):
            RunConfig(corpus_paths=(), embeddings_path="e.qdae")


class TestRun:
    def test_artifacts_written_and_loadable(self, workspace):
        tmp_path, config = workspace
        out = tmp_path / "out"
        result = run(config, out)
        for name, p in result.artifact_paths.items():
            assert p.exists(), name

        sentences = read_sentences_jsonl(out / "sentences.jsonl")
        assert len(sentences) == 24
        reduced = load_embeddings(out / "reduced.qdae")
        assert reduced.data.shape == (24, 2)
        asg = ClusterAssignment.read_csv(out / "assignment.csv")
        assert asg.labels.shape == (24,)
        model = TopicModel.load(out / "model.json")
        assert model.topic_ids() == [t.topic_id for t in model.topics]
        report = MetricsReport.read_csv(out / "report.csv")
        assert report.topics >= 2  # themes separate cleanly
        # the CSV rounds to 3 decimals, so a sub-30ms run reads back as 0.0
        assert result.report.time_minutes > 0.0
        assert report.time_minutes >= 0.0

    def test_report_matches_returned_model(self, workspace):
        tmp_path, config = workspace
        result = run(config, tmp_path / "out")
        assert result.report.topics == len(result.model.topics)
        assert result.report.outliers == int((result.model.assignment.labels == -1).sum())

    def test_same_seed_same_hash(self, workspace):
        tmp_path, config = workspace
        h1 = model_hash(run(config, tmp_path / "o1").model)
        h2 = model_hash(run(config, tmp_path / "o2").model)
        assert h1 == h2

    def test_run_config_recorded_in_model(self, workspace):
        tmp_path, config = workspace
        result = run(config, tmp_path / "out")
        assert result.model.run_config["seed"] == config.seed
        assert result.model.run_config["embeddings_path"] == config.embeddings_path

    def test_missing_embeddings_is_stage_error(self, workspace, tmp_path):
        _, config = workspace
        import dataclasses

        broken = dataclasses.replace(config, embeddings_path=str(tmp_path / "ghost.qdae"))
        with pytest.raises(PipelineError) as exc:
            run(broken, tmp_path / "out")
        assert exc.value.stage == "embeddings"
        assert exc.value.exit_code == 2
        assert "not found" in str(exc.value)

    def test_misaligned_embeddings_rejected(self, workspace, tmp_path):
        tmp_path_ws, config = workspace
        import dataclasses

        bad = tmp_path / "short.qdae"
        write_embeddings(EmbeddingMatrix(np.zeros((5, 3), dtype=np.float32), "short"), bad)
        broken = dataclasses.replace(config, embeddings_path=str(bad))
        with pytest.raises(PipelineError) as exc:
            run(broken, tmp_path / "out")
        assert exc.value.stage == "embeddings"

    def test_empty_corpus_is_ingest_error(self, tmp_path):
        empty = tmp_path / "empty.txt"
        empty.write_text("Tiny. Sad. No.\n", encoding="utf-8")  # all below min_tokens
        emb = tmp_path / "e.qdae"
        write_embeddings(EmbeddingMatrix(np.zeros((1, 2), dtype=np.float32), "x"), emb)
        config = RunConfig(corpus_paths=(str(empty),), embeddings_path=str(emb))
        with pytest.raises(PipelineError) as exc:
            run(config, tmp_path / "out")
        assert exc.value.stage == "ingest"
        assert "no sentences" in str(exc.value)

    def test_load_run_artifacts(self, workspace):
        tmp_path, config = workspace
        run(config, tmp_path / "out")
        sentences, model, reduced = load_run_artifacts(tmp_path / "out")
        assert len(sentences) == 24
        assert model.assignment.labels.shape == (24,)
        assert reduced.data.shape == (24, 2)


class TestSweep:
    def test_two_seeds(self, workspace):
        tmp_path, config = workspace
        reports, summary = sweep([config, config.with_seed(5)], tmp_path / "sweep")
        assert len(reports) == 2
        assert (tmp_path / "sweep" / "run_0" / "model.json").exists()
        assert (tmp_path / "sweep" / "run_1" / "model.json").exists()
        data = json.loads((tmp_path / "sweep" / "sweep_summary.json").read_text())
        assert set(data) == {"mean", "stdev"}
        assert data["mean"]["topics"] == pytest.approx(
            (reports[0].topics + reports[1].topics) / 2
        )


def test_corpus_table_fields(workspace):
    tmp_path, config = workspace
    sentences = segment_corpus(ingest_corpus([config.corpus_paths[0]]))
    table = corpus_table(sentences)
    assert set(table) == {
        "total_sentences",
        "avg_length",
        "min_length",
        "max_length",
        "under_5",
        "over_25",
    }
    assert table["total_sentences"] == 24
    assert table["under_5"] == 0


class TestCli:
    def test_ingest_prints_stats(self, workspace, capsys):
        from qda.cli import main

        tmp_path, config = workspace
        out = tmp_path / "ingested"
        rc = main(["ingest", config.corpus_paths[0], "--out", str(out)])
        assert rc == 0
        text = capsys.readouterr().out
        assert "total_sentences: 24" in text
        assert "under_5: 0" in text
        assert (out / "sentences.jsonl").exists()

    def test_lexical_query(self, workspace, capsys):
        from qda.cli import main

        tmp_path, config = workspace
        out = tmp_path / "ingested"
        assert main(["ingest", config.corpus_paths[0], "--out", str(out)]) == 0
        capsys.readouterr()
        rc = main(
            ["lexical", "--sentences", str(out / "sentences.jsonl"), "--arity", "1", "--top", "5"]
        )
        assert rc == 0
        lines = [l for l in capsys.readouterr().out.splitlines() if l.strip()]
        assert len(lines) == 5

    def test_full_stage_chain(self, workspace, capsys):
        from qda.cli import main

        tmp_path, config = workspace
        d = tmp_path / "stages"
        assert main(["ingest", config.corpus_paths[0], "--out", str(d)]) == 0
        assert (
            main(
                ["reduce", "--embeddings", config.embeddings_path, "--out", str(d),
                 "--seed", "2", "--n-neighbors", "8", "--epochs", "50"]
            )
            == 0
        )
        assert (
            main(
                ["cluster", "--points", str(d / "reduced.qdae"),
                 "--min-cluster-size", "6", "--min-samples", "3", "--out", str(d)]
            )
            == 0
        )
        assert (
            main(
                ["topics", "--sentences", str(d / "sentences.jsonl"),
                 "--assignment", str(d / "assignment.csv"),
                 "--embeddings", config.embeddings_path, "--out", str(d)]
            )
            == 0
        )
        assert (
            main(
                ["evaluate", "--model", str(d / "model.json"),
                 "--points", str(d / "reduced.qdae"), "--out", str(d / "report.csv")]
            )
            == 0
        )
        report = MetricsReport.read_csv(d / "report.csv")
        assert report.topics >= 2

    def test_run_twice_same_hash_on_stdout(self, workspace, capsys):
        from qda.cli import main

        tmp_path, config = workspace
        cfg_path = tmp_path / "config.json"
        config.save(cfg_path)
        hashes = []
        for name in ("r1", "r2"):
            rc = main(["run", "--config", str(cfg_path), "--out", str(tmp_path / name)])
            assert rc == 0
            out = capsys.readouterr().out
            line = [l for l in out.splitlines() if l.startswith("model hash:")][0]
            hashes.append(line.split(":", 1)[1].strip())
        assert hashes[0] == hashes[1]

    def test_compare_over_two_reports(self, workspace, capsys, tmp_path):
        from qda.cli import main

        ws, config = workspace
        run(config, ws / "out")
        a = tmp_path / "alpha.csv"
        b = tmp_path / "beta.csv"
        a.write_bytes((ws / "out" / "report.csv").read_bytes())
        b.write_bytes((ws / "out" / "report.csv").read_bytes())
        out_csv = tmp_path / "table.csv"
        rc = main(["compare", str(a), str(b), "--out", str(out_csv)])
        assert rc == 0
        text = capsys.readouterr().out
        assert "alpha" in text and "beta" in text
        header = out_csv.read_text().splitlines()[0]
        assert header == "model,outliers,topics,ngram_score,gini,coherence_cv,silhouette,time_minutes"

    def test_missing_embeddings_exit_code(self, workspace, capsys, tmp_path):
        from qda.cli import main

        ws, config = workspace
        import dataclasses

        broken = dataclasses.replace(config, embeddings_path=str(tmp_path / "nope.qdae"))
        cfg_path = tmp_path / "broken.json"
        broken.save(cfg_path)
        rc = main(["run", "--config", str(cfg_path), "--out", str(tmp_path / "out")])
        assert rc == 2
        err = capsys.readouterr().err
        assert "error in stage embeddings" in err

    def test_unreadable_input_returns_one(self, capsys, tmp_path):
        from qda.cli import main

        rc = main(["ingest", str(tmp_path / "absent.txt"), "--out", str(tmp_path / "s.jsonl")])
        assert rc == 1
        assert "error" in capsys.readouterr().err
