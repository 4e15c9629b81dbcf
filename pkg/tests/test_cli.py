import json
import os

import pytest

from ohc_topics.cli import load_config, main
from ohc_topics.schema import LABELS
from ohc_topics.synth import fixture_forum


def small_config(root, **overrides):
    config = {
        "paths": {
            "input": str(root / "input/posts.jsonl"),
            "corpus_dir": str(root / "work/corpus"),
            "tokens": str(root / "work/tokens.jsonl"),
            "vocab": str(root / "work/vocab.tsv"),
            "embeddings": str(root / "work/embeddings.txt"),
            "labels": str(root / "input/labels.jsonl"),
            "model_dir": str(root / "work/models"),
            "reports_dir": str(root / "work/reports"),
            "sentence_labels": str(root / "work/sentence_labels.jsonl"),
            "post_labels": str(root / "work/post_labels.jsonl"),
            "annotations": str(root / "input/annotations.jsonl"),
            "gold_training": str(root / "input/gold_training.jsonl"),
            "event_log": str(root / "work/annotation.log"),
        },
        "textprep": {"min_count": 2},
        "embed": {"window": 3, "negatives": 3, "epochs": 1, "initial_lr": 0.025,
                  "subsample_threshold": 1e-3, "seed": 1, "dim": 24},
        "llda": {"alpha": 0.1, "beta": 0.5, "train_iterations": 60,
                 "infer_iterations": 30, "burn_in": 10, "seed": 1,
                 "calibration_limit": 60},
        "linear": {"C": 1.0, "epochs": 8, "seed": 1},
        "cnn": {"dim": 24, "hidden": 12, "filter_widths": [2, 3], "cost_ratio": 0.25,
                "learning_rate": 0.1, "epochs": 2, "batch_size": 16, "seed": 1,
                "fine_tune_embeddings": False},
        "eval": {"folds": 3, "seed": 7},
        "serve": {"port": 8099, "ui_dir": str(root / "no-ui")},
    }
    config.update(overrides)
    return config


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("pipeline")
    (root / "input").mkdir()
    lines, gold = fixture_forum(n_authors=10, posts_per_author=6, seed=5)
    (root / "input/posts.jsonl").write_text("\n".join(lines) + "\n")
    with open(root / "input/labels.jsonl", "w") as fh:
        for sid, codes in gold.items():
            fh.write(json.dumps({"sentence_id": sid, "labels": codes}) + "\n")
    config_path = root / "config.json"
    config_path.write_text(json.dumps(small_config(root)))
    return root, str(config_path)


def run(config_path, *args):
    return main(["--config", config_path, *args])


@pytest.fixture(scope="module")
def pipeline(workdir):
    root, config = workdir
    assert run(config, "ingest") == 0
    assert run(config, "preprocess") == 0
    assert run(config, "embed") == 0
    assert run(config, "train", "--model", "llda") == 0
    assert run(config, "train", "--model", "linear") == 0
    assert run(config, "train", "--model", "linear-emb") == 0
    assert run(config, "train", "--model", "cnn") == 0
    assert run(config, "label", "--model", "linear") == 0
    for mode in ("prevalence", "stage", "post", "day", "week"):
        assert run(config, "analyze", "--by", mode) == 0
    return root, config


class TestConfig:
    def test_defaults_valid(self):
        config = load_config(None)
        assert config["llda"]["alpha"] == 0.1
        assert config["cnn"]["hidden"] == 800

    def test_env_var_fallback(self, tmp_path, monkeypatch):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"eval": {"folds": 4, "seed": 3}}))
        monkeypatch.setenv("OHC_TOPICS_CONFIG", str(path))
        assert load_config(None)["eval"]["folds"] == 4

    def test_duplicate_paths_rejected(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(
            json.dumps({"paths": {"tokens": "same.jsonl", "vocab": "same.jsonl"}})
        )
        assert main(["--config", str(path), "preprocess"]) == 1

    def test_missing_seed_rejected(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"eval": {"seed": None}}))
        assert main(["--config", str(path), "preprocess"]) == 1

    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code == 2

    def test_unknown_flag_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main(["ingest", "--bogus"])
        assert exc.value.code == 2


class TestPipeline:
    def test_corpus_archive_written(self, pipeline):
        root, _ = pipeline
        for name in ("posts.jsonl", "sentences.jsonl", "authors.jsonl"):
            assert (root / "work/corpus" / name).exists()

    def test_artifacts_carry_config_hash(self, pipeline):
        root, config = pipeline
        meta = json.loads((root / "work/tokens.jsonl.meta.json").read_text())
        from ohc_topics.cli import config_hash, load_config

        assert meta["config_hash"] == config_hash(load_config(config))

    def test_vocab_and_tokens(self, pipeline):
        root, _ = pipeline
        vocab_lines = (root / "work/vocab.tsv").read_text().strip().split("\n")
        assert vocab_lines[0] == "UNK\t0"
        rec = json.loads((root / "work/tokens.jsonl").read_text().split("\n")[0])
        assert {"sentence_id", "post_id", "tokens"} <= set(rec)

    def test_embeddings_header(self, pipeline):
        root, _ = pipeline
        header = (root / "work/embeddings.txt").read_text().split("\n")[0]
        v, d = header.split()
        assert int(d) == 24

    def test_models_written(self, pipeline):
        root, _ = pipeline
        for name in ("llda.model", "llda.thresholds", "linear_bow.model",
                     "linear_emb.model", "cnn.model"):
            assert (root / "work/models" / name).exists()

    def test_eval_report(self, pipeline):
        root, config = pipeline
        assert run(config, "eval", "--model", "baseline,linear", "--folds", "3") == 0
        report = (root / "work/reports/eval_baseline_linear.csv").read_text()
        lines = report.strip().split("\n")
        assert lines[0] == "label,baseline_p,baseline_r,baseline_f,linear_p,linear_r,linear_f"
        assert len(lines) == 1 + 1 + len(LABELS)
        micro = lines[1].split(",")
        assert micro[0] == "Micro"
        assert float(micro[2]) == 1.0  # baseline recall

    def test_label_outputs(self, pipeline):
        root, _ = pipeline
        sentence_lines = (root / "work/sentence_labels.jsonl").read_text().strip().split("\n")
        post_lines = (root / "work/post_labels.jsonl").read_text().strip().split("\n")
        rec = json.loads(post_lines[0])
        assert {"post_id", "labels", "sentence_count", "counts"} <= set(rec)
        assert rec["labels"]  # aggregation always yields at least MISC
        n_sentences = sum(1 for _ in open(root / "work/tokens.jsonl"))
        assert len(sentence_lines) == n_sentences

    def test_analysis_csvs(self, pipeline):
        root, _ = pipeline
        reports = root / "work/reports"
        assert (reports / "prevalence.csv").read_text().startswith("topic,percent")
        assert (reports / "stage.csv").read_text().startswith("stage,topic,percent,n_posts")
        for unit in ("post", "day", "week"):
            body = (reports / f"trajectory_{unit}.csv").read_text()
            assert body.startswith("bin,topic,frequency,n_posts")
            assert (reports / f"trajectory_{unit}_long.csv").exists()

    def test_label_before_train_fails(self, tmp_path):
        root = tmp_path
        (root / "input").mkdir()
        lines, gold = fixture_forum(n_authors=3, posts_per_author=2, seed=1)
        (root / "input/posts.jsonl").write_text("\n".join(lines) + "\n")
        (root / "input/labels.jsonl").write_text("")
        config_path = root / "config.json"
        config_path.write_text(json.dumps(small_config(root)))
        assert run(str(config_path), "ingest") == 0
        assert run(str(config_path), "preprocess") == 0
        assert run(str(config_path), "label", "--model", "cnn") == 1

    def test_agreement_report(self, pipeline):
        root, config = pipeline
        sids = []
        with open(root / "work/tokens.jsonl") as fh:
            for line in fh:
                sids.append(json.loads(line)["sentence_id"])
                if len(sids) == 20:
                    break
        import random

        rng = random.Random(5)
        with open(root / "input/annotations.jsonl", "w") as fh:
            for sid in sids:
                labels = rng.sample(LABELS, rng.randint(1, 2))
                fh.write(json.dumps({"sentence_id": sid, "coder_id": "c1", "labels": labels}) + "\n")
                agree = rng.random() < 0.7
                other = labels if agree else rng.sample(LABELS, 1)
                fh.write(json.dumps({"sentence_id": sid, "coder_id": "c2", "labels": other}) + "\n")
        assert run(config, "agreement") == 0
        body = (root / "work/reports/agreement.csv").read_text()
        lines = body.strip().split("\n")
        assert lines[0] == "label,c1|c2"
        assert lines[1].startswith("AVG,")
        assert len(lines) == 1 + 1 + len(LABELS)
