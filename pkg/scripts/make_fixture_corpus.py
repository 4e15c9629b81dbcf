#!/usr/bin/env python3
"""Write a synthetic forum corpus plus gold labels and a ready config.

Produces input/posts.jsonl, input/labels.jsonl, input/gold_training.jsonl
and config.json under the target directory so the full CLI pipeline can
run immediately:

    python scripts/make_fixture_corpus.py demo/
    ohc-topics --config demo/config.json ingest
"""

import argparse
import json
import os

from ohc_topics.synth import fixture_forum


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("target", help="directory to create")
    ap.add_argument("--authors", type=int, default=20)
    ap.add_argument("--posts-per-author", type=int, default=10)
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args()

    root = os.path.abspath(args.target)
    os.makedirs(os.path.join(root, "input"), exist_ok=True)
    lines, gold = fixture_forum(
        n_authors=args.authors, posts_per_author=args.posts_per_author, seed=args.seed
    )
    with open(os.path.join(root, "input/posts.jsonl"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    with open(os.path.join(root, "input/labels.jsonl"), "w") as fh:
        for sid, codes in gold.items():
            fh.write(json.dumps({"sentence_id": sid, "labels": codes}) + "\n")
    # the first annotated post doubles as the service's training gold
    first_post = next(iter(gold)).rsplit(":", 1)[0]
    with open(os.path.join(root, "input/gold_training.jsonl"), "w") as fh:
        for sid, codes in gold.items():
            if sid.rsplit(":", 1)[0] == first_post:
                fh.write(json.dumps({"sentence_id": sid, "labels": codes}) + "\n")

    config = {
        "paths": {
            "input": os.path.join(root, "input/posts.jsonl"),
            "corpus_dir": os.path.join(root, "work/corpus"),
            "tokens": os.path.join(root, "work/tokens.jsonl"),
            "vocab": os.path.join(root, "work/vocab.tsv"),
            "embeddings": os.path.join(root, "work/embeddings.txt"),
            "labels": os.path.join(root, "input/labels.jsonl"),
            "model_dir": os.path.join(root, "work/models"),
            "reports_dir": os.path.join(root, "work/reports"),
            "sentence_labels": os.path.join(root, "work/sentence_labels.jsonl"),
            "post_labels": os.path.join(root, "work/post_labels.jsonl"),
            "annotations": os.path.join(root, "input/annotations.jsonl"),
            "gold_training": os.path.join(root, "input/gold_training.jsonl"),
            "event_log": os.path.join(root, "work/annotation.log"),
        },
        "textprep": {"min_count": 2},
        "embed": {"window": 5, "negatives": 5, "epochs": 3, "initial_lr": 0.025,
                  "subsample_threshold": 1.0, "seed": 1, "dim": 50},
        "llda": {"alpha": 0.1, "beta": 0.5, "train_iterations": 300,
                 "infer_iterations": 100, "burn_in": 30, "seed": 1,
                 "calibration_limit": 200},
        "linear": {"C": 1.0, "epochs": 30, "seed": 1},
        "cnn": {"dim": 50, "hidden": 96, "filter_widths": [2, 3, 4],
                "cost_ratio": 0.25, "learning_rate": 0.3, "epochs": 10,
                "batch_size": 32, "seed": 1, "fine_tune_embeddings": False},
        "eval": {"folds": 5, "seed": 7},
        "serve": {"port": 8000, "ui_dir": "frontend/dist"},
    }
    with open(os.path.join(root, "config.json"), "w") as fh:
        json.dump(config, fh, indent=2)
    print(f"wrote {len(lines)} posts, {len(gold)} gold sentences, config.json -> {root}")


if __name__ == "__main__":
    main()
