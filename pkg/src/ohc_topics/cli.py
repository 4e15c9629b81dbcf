"""Pipeline CLI: ingest -> preprocess -> embed -> train -> eval -> label
-> analyze -> agreement -> serve.

One JSON config file drives every stage (flag overrides win); every
artifact gets a .meta.json sidecar recording the hash of the effective
config that produced it. All seeds are explicit in the config, never
wall-clock, so a fixed config reproduces byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import os
import sys

from ohc_topics import analytics, cnn, embed, evaluation, linear, llda, textprep
from ohc_topics.corpus import ingest_posts, load_corpus, save_corpus
from ohc_topics.evaluation import LabeledSentence
from ohc_topics.schema import LABELS, LabelSet

DEFAULT_CONFIG = {
    "paths": {
        "input": "input/posts.jsonl",
        "corpus_dir": "work/corpus",
        "tokens": "work/tokens.jsonl",
        "vocab": "work/vocab.tsv",
        "embeddings": "work/embeddings.txt",
        "labels": "input/labels.jsonl",
        "model_dir": "work/models",
        "reports_dir": "work/reports",
        "sentence_labels": "work/sentence_labels.jsonl",
        "post_labels": "work/post_labels.jsonl",
        "annotations": "input/annotations.jsonl",
        "gold_training": "input/gold_training.jsonl",
        "event_log": "work/annotation.log",
    },
    "textprep": {"min_count": 5},
    "embed": {
        "window": 5,
        "negatives": 5,
        "epochs": 5,
        "initial_lr": 0.025,
        "subsample_threshold": 1e-3,
        "seed": 1,
    },
    "llda": {
        "alpha": 0.1,
        "beta": 0.5,
        "train_iterations": 1000,
        "infer_iterations": 200,
        "burn_in": 100,
        "seed": 1,
        "calibration_limit": 0,
    },
    "linear": {"C": 1.0, "epochs": 30, "seed": 1},
    "cnn": {
        "dim": 100,
        "hidden": 800,
        "filter_widths": [3, 4, 5],
        "cost_ratio": 0.25,
        "learning_rate": 0.05,
        "epochs": 25,
        "batch_size": 32,
        "seed": 1,
        "fine_tune_embeddings": False,
    },
    "eval": {"folds": 5, "seed": 7},
    "serve": {"port": 8000, "ui_dir": "frontend/dist"},
}

MODELS = ("llda", "linear", "linear-emb", "cnn")


class CliError(Exception):
    pass


def load_config(path: str | None) -> dict:
    config = copy.deepcopy(DEFAULT_CONFIG)
    if path is None:
        path = os.environ.get("OHC_TOPICS_CONFIG")
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                user = json.load(fh)
        except OSError as exc:
            raise CliError(f"config: cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise CliError(f"config: {path} is not valid JSON: {exc}") from exc
        for section, values in user.items():
            if section not in config or not isinstance(values, dict):
                config[section] = values
            else:
                config[section].update(values)
    validate_config(config)
    return config


def validate_config(config: dict) -> None:
    paths = config["paths"]
    normalized = {}
    for name, value in paths.items():
        key = os.path.normpath(os.path.abspath(str(value)))
        if key in normalized:
            raise CliError(
                f"config: paths.{name} and paths.{normalized[key]} point to the same "
                f"location {value!r}"
            )
        normalized[key] = name
    for section in ("embed", "llda", "linear", "cnn", "eval"):
        seed = config[section].get("seed")
        if not isinstance(seed, int):
            raise CliError(f"config: {section}.seed must be an explicit integer")


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def write_artifact(path: str, content: str, chash: str) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(content)
    with open(path + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump({"config_hash": chash}, fh)


def write_meta(path: str, chash: str) -> None:
    with open(path + ".meta.json", "w", encoding="utf-8") as fh:
        json.dump({"config_hash": chash}, fh)


# ---------------------------------------------------------------------- stages


def cmd_ingest(args, config) -> int:
    paths = config["paths"]
    corpus = ingest_posts(args.input or paths["input"])
    out_dir = args.out or paths["corpus_dir"]
    os.makedirs(out_dir, exist_ok=True)
    save_corpus(corpus, out_dir)
    write_meta(os.path.join(out_dir, "posts.jsonl"), config_hash(config))
    stats = corpus.stats
    print(
        f"ingested {len(corpus.posts)} posts, {len(corpus.sentences)} sentences, "
        f"{len(corpus.authors)} authors ({stats.malformed} malformed, "
        f"{stats.duplicates} duplicate ids skipped)"
    )
    return 0


def cmd_preprocess(args, config) -> int:
    paths = config["paths"]
    corpus = load_corpus(paths["corpus_dir"])
    chash = config_hash(config)
    lines = []
    sequences = []
    for sentence in corpus.sentences:
        tokens = textprep.preprocess_sentence(sentence.text)
        sequences.append(tokens)
        lines.append(
            json.dumps(
                {
                    "sentence_id": sentence.sentence_id,
                    "post_id": sentence.post_id,
                    "tokens": tokens,
                },
                ensure_ascii=False,
            )
        )
    write_artifact(paths["tokens"], "\n".join(lines) + "\n", chash)
    vocab = textprep.build_vocab(sequences, min_count=config["textprep"]["min_count"])
    textprep.save_vocab(vocab, paths["vocab"])
    write_meta(paths["vocab"], chash)
    print(f"preprocessed {len(sequences)} sentences; vocabulary size {len(vocab)}")
    return 0


def load_tokens(path) -> list[tuple[str, str, list[str]]]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            out.append((rec["sentence_id"], rec["post_id"], rec["tokens"]))
    return out


def load_labels(path) -> dict[str, LabelSet]:
    labels = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            labels[rec["sentence_id"]] = LabelSet.from_codes(rec["labels"])
    return labels


def cmd_embed(args, config) -> int:
    paths = config["paths"]
    vocab = textprep.load_vocab(paths["vocab"])
    rows = load_tokens(paths["tokens"])
    cfg = embed.EmbedConfig(**config["embed"])
    table = embed.train_embeddings([tokens for _, _, tokens in rows], vocab, cfg)
    embed.save_embeddings(table, paths["embeddings"])
    write_meta(paths["embeddings"], config_hash(config))
    print(f"trained {table.vectors.shape[0]}x{table.vectors.shape[1]} embeddings")
    return 0


def _labeled_items(config) -> list[LabeledSentence]:
    paths = config["paths"]
    gold = load_labels(paths["labels"])
    items = []
    for sentence_id, post_id, tokens in load_tokens(paths["tokens"]):
        if sentence_id in gold:
            items.append(
                LabeledSentence(
                    post_id=post_id,
                    sentence_id=sentence_id,
                    tokens=tuple(tokens),
                    gold=gold[sentence_id],
                )
            )
    if not items:
        raise CliError("no labeled sentences: check paths.labels and paths.tokens")
    return items


def _load_embedding_table(paths):
    if not os.path.exists(paths["embeddings"]):
        raise CliError(f"embeddings not found at {paths['embeddings']} (run `embed` first)")
    return embed.load_embeddings(paths["embeddings"])


def cmd_train(args, config) -> int:
    paths = config["paths"]
    model_dir = paths["model_dir"]
    os.makedirs(model_dir, exist_ok=True)
    vocab = textprep.load_vocab(paths["vocab"])
    items = _labeled_items(config)
    chash = config_hash(config)
    name = args.model
    if name == "llda":
        cfg = llda.LldaConfig(**config["llda"])
        model, thresholds = llda.fit_and_calibrate(items, vocab, cfg)
        path = os.path.join(model_dir, "llda.model")
        llda.save_llda(model, path)
        write_meta(path, chash)
        tpath = os.path.join(model_dir, "llda.thresholds")
        write_artifact(tpath, " ".join(format(t, ".9g") for t in thresholds) + "\n", chash)
    elif name in ("linear", "linear-emb"):
        mode = "bow" if name == "linear" else "emb"
        table = _load_embedding_table(paths) if mode == "emb" else None
        cfg = linear.LinearConfig(**config["linear"])
        model = linear.train_from_sentences(items, vocab, mode, table, cfg)
        path = os.path.join(model_dir, f"linear_{mode}.model")
        linear.save_linear(model, path)
        write_meta(path, chash)
    elif name == "cnn":
        table = _load_embedding_table(paths)
        cfg = cnn.CnnConfig(**config["cnn"])
        model = cnn.train_from_sentences(items, vocab, table, cfg)
        path = os.path.join(model_dir, "cnn.model")
        cnn.save_cnn(model, path)
        write_meta(path, chash)
    else:
        raise CliError(f"unknown model {name!r}")
    print(f"trained {name} on {len(items)} labeled sentences")
    return 0


def cmd_eval(args, config) -> int:
    paths = config["paths"]
    vocab = textprep.load_vocab(paths["vocab"])
    items = _labeled_items(config)
    folds = args.folds or config["eval"]["folds"]
    seed = config["eval"]["seed"] if args.seed is None else args.seed
    names = [m.strip() for m in args.model.split(",")]
    table = None
    if any(m in ("linear-emb", "cnn") for m in names):
        table = _load_embedding_table(paths)
    reports = {}
    for name in names:
        spec = {"linear": "linear-bow"}.get(name, name)
        reports[name] = evaluation.run_cv(
            spec,
            items,
            k=folds,
            seed=seed,
            vocab=vocab,
            embeddings=table,
            llda_config=llda.LldaConfig(**config["llda"]),
            linear_config=linear.LinearConfig(**config["linear"]),
            cnn_config=cnn.CnnConfig(**config["cnn"]),
        )
    chash = config_hash(config)
    slug = "_".join(names).replace("-", "")
    base = os.path.join(paths["reports_dir"], f"eval_{slug}")
    write_artifact(base + ".txt", evaluation.render_report_text(reports), chash)
    write_artifact(base + ".csv", evaluation.render_report_csv(reports), chash)
    print(f"wrote {base}.txt and .csv ({folds} folds, seed {seed})")
    return 0


def _predict_all(config, name, vocab, rows):
    paths = config["paths"]
    model_dir = paths["model_dir"]
    if name == "llda":
        path = os.path.join(model_dir, "llda.model")
        if not os.path.exists(path):
            raise CliError(f"model not found: {path} (run `train --model llda` first)")
        model = llda.load_llda(path)
        with open(os.path.join(model_dir, "llda.thresholds"), encoding="utf-8") as fh:
            thresholds = [float(x) for x in fh.read().split()]
        cfg = llda.LldaConfig(**config["llda"])
        return [
            llda.decide_labels(llda.infer_theta(model, vocab.ids(tokens), cfg), thresholds)
            for _, _, tokens in rows
        ]
    if name in ("linear", "linear-emb"):
        mode = "bow" if name == "linear" else "emb"
        path = os.path.join(model_dir, f"linear_{mode}.model")
        if not os.path.exists(path):
            raise CliError(f"model not found: {path} (run `train --model {name}` first)")
        model = linear.load_linear(path)
        table = _load_embedding_table(paths) if mode == "emb" else None
        return [
            linear.predict_linear(model, linear.featurize(tokens, mode, vocab, table))
            for _, _, tokens in rows
        ]
    if name == "cnn":
        path = os.path.join(model_dir, "cnn.model")
        if not os.path.exists(path):
            raise CliError(f"model not found: {path} (run `train --model cnn` first)")
        table = _load_embedding_table(paths)
        model = cnn.load_cnn(path, embeddings=table.vectors)
        return cnn.predict_batch(model, [vocab.ids(tokens) for _, _, tokens in rows])
    raise CliError(f"unknown model {name!r}")


def cmd_label(args, config) -> int:
    paths = config["paths"]
    vocab = textprep.load_vocab(paths["vocab"])
    rows = load_tokens(paths["tokens"])
    predictions = _predict_all(config, args.model, vocab, rows)
    chash = config_hash(config)

    lines = []
    by_post: dict[str, list[LabelSet]] = {}
    for (sentence_id, post_id, _), pred in zip(rows, predictions):
        lines.append(json.dumps({"sentence_id": sentence_id, "labels": pred.codes()}))
        by_post.setdefault(post_id, []).append(pred)
    write_artifact(paths["sentence_labels"], "\n".join(lines) + "\n", chash)

    post_lines = []
    for post_id, sets in by_post.items():
        pl = analytics.aggregate_post_labels(post_id, sets)
        post_lines.append(
            json.dumps(
                {
                    "post_id": pl.post_id,
                    "labels": pl.labels.codes(),
                    "sentence_count": pl.sentence_count,
                    "counts": pl.counts,
                }
            )
        )
    write_artifact(paths["post_labels"], "\n".join(post_lines) + "\n", chash)
    print(f"labeled {len(rows)} sentences across {len(by_post)} posts with {args.model}")
    return 0


def load_post_labels(path) -> list[analytics.PostLabels]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            out.append(
                analytics.PostLabels(
                    post_id=rec["post_id"],
                    labels=LabelSet.from_codes(rec["labels"]),
                    sentence_count=rec["sentence_count"],
                    counts=rec["counts"],
                )
            )
    return out


def cmd_analyze(args, config) -> int:
    paths = config["paths"]
    if not os.path.exists(paths["post_labels"]):
        raise CliError(f"post labels not found: {paths['post_labels']} (run `label` first)")
    post_labels = load_post_labels(paths["post_labels"])
    corpus = load_corpus(paths["corpus_dir"])
    chash = config_hash(config)
    reports_dir = paths["reports_dir"]
    mode = args.by
    if mode == "prevalence":
        prev = analytics.prevalence(post_labels)
        write_artifact(os.path.join(reports_dir, "prevalence.csv"), analytics.prevalence_csv(prev), chash)
        long_rows = [("all", code, prev[code], len(post_labels)) for code in LABELS]
        write_artifact(
            os.path.join(reports_dir, "prevalence_long.csv"),
            analytics.long_csv("prevalence", long_rows),
            chash,
        )
    elif mode == "stage":
        rows = analytics.stratify_by_stage(corpus, post_labels)
        write_artifact(os.path.join(reports_dir, "stage.csv"), analytics.stage_csv(rows), chash)
        long_rows = [
            (row.stage.value, code, row.percent[code], row.n_posts)
            for row in rows
            for code in LABELS
        ]
        write_artifact(
            os.path.join(reports_dir, "stage_long.csv"),
            analytics.long_csv("stage", long_rows),
            chash,
        )
    elif mode in analytics.TRAJECTORY_UNITS:
        series = analytics.trajectory(corpus, post_labels, mode)
        write_artifact(
            os.path.join(reports_dir, f"trajectory_{mode}.csv"),
            analytics.trajectory_csv(series),
            chash,
        )
        long_rows = [
            (str(b.index), code, b.frequency[code], b.n_posts)
            for b in series.bins
            for code in LABELS
        ]
        write_artifact(
            os.path.join(reports_dir, f"trajectory_{mode}_long.csv"),
            analytics.long_csv(f"trajectory_{mode}", long_rows),
            chash,
        )
    else:
        raise CliError(f"unknown analysis {mode!r}")
    print(f"wrote {mode} analysis to {reports_dir}")
    return 0


def cmd_agreement(args, config) -> int:
    paths = config["paths"]
    by_coder: dict[str, dict[str, LabelSet]] = {}
    with open(paths["annotations"], encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            by_coder.setdefault(rec["coder_id"], {})[rec["sentence_id"]] = LabelSet.from_codes(
                rec["labels"]
            )
    coders = sorted(by_coder)
    pairs = {}
    for i, a in enumerate(coders):
        for b in coders[i + 1 :]:
            shared = sorted(set(by_coder[a]) & set(by_coder[b]))
            if not shared:
                continue
            a_sets = [by_coder[a][sid] for sid in shared]
            b_sets = [by_coder[b][sid] for sid in shared]
            pairs[f"{a}|{b}"] = evaluation.average_kappa(a_sets, b_sets)
    if not pairs:
        raise CliError("no coder pairs share annotated sentences")
    chash = config_hash(config)
    base = os.path.join(paths["reports_dir"], "agreement")
    write_artifact(base + ".txt", evaluation.render_agreement_text(pairs), chash)
    write_artifact(base + ".csv", evaluation.render_agreement_csv(pairs), chash)
    print(f"wrote {base}.txt and .csv for {len(pairs)} coder pair(s)")
    return 0


def cmd_serve(args, config) -> int:
    import uvicorn

    from ohc_topics.annotation import AnnotationStore, create_app

    paths = config["paths"]
    corpus = load_corpus(paths["corpus_dir"])
    gold = load_labels(paths["gold_training"])
    store = AnnotationStore(corpus, gold, paths["event_log"])
    ui_dir = config["serve"].get("ui_dir")
    app = create_app(store, ui_dir=ui_dir)
    port = args.port or config["serve"]["port"]
    uvicorn.run(app, host="127.0.0.1", port=port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ohc-topics",
        description="Forum topic classification and longitudinal analytics pipeline",
    )
    parser.add_argument("--config", help="JSON config path (or $OHC_TOPICS_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="read raw post records into a corpus archive")
    p.add_argument("--input")
    p.add_argument("--out")

    sub.add_parser("preprocess", help="tokenize, mask, stem; build the vocabulary")
    sub.add_parser("embed", help="train skip-gram embeddings on the corpus")

    p = sub.add_parser("train", help="train one classifier on the labeled sentences")
    p.add_argument("--model", required=True, choices=MODELS)

    p = sub.add_parser("eval", help="k-fold cross-validation report")
    p.add_argument("--model", required=True, help="comma-separated: baseline,llda,linear,linear-emb,cnn")
    p.add_argument("--folds", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("label", help="predict labels corpus-wide and aggregate per post")
    p.add_argument("--model", required=True, choices=MODELS)

    p = sub.add_parser("analyze", help="prevalence, stage, or trajectory CSVs")
    p.add_argument("--by", required=True, choices=("prevalence", "stage", "post", "day", "week"))

    sub.add_parser("agreement", help="pairwise coder kappa report")

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--port", type=int)

    return parser


COMMANDS = {
    "ingest": cmd_ingest,
    "preprocess": cmd_preprocess,
    "embed": cmd_embed,
    "train": cmd_train,
    "eval": cmd_eval,
    "label": cmd_label,
    "analyze": cmd_analyze,
    "agreement": cmd_agreement,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        return COMMANDS[args.command](args, config)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: missing input: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pipeline errors propagate with context
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
