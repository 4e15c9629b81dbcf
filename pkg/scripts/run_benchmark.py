#!/usr/bin/env python3
"""Train and score all classifiers on the keyword-triggered benchmark.

Prints a per-label and micro F table across systems (baseline, llda,
linear-bow, linear-emb, cnn) using a post-level train/test split.
"""

import argparse
import time

from ohc_topics import evaluation
from ohc_topics.cnn import CnnConfig
from ohc_topics.embed import EmbedConfig, train_embeddings
from ohc_topics.evaluation import EvalReport, baseline_all, render_report_text
from ohc_topics.linear import LinearConfig
from ohc_topics.llda import LldaConfig
from ohc_topics.synth import keyword_benchmark
from ohc_topics.textprep import build_vocab


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sentences", type=int, default=2000)
    ap.add_argument("--noise", type=float, default=0.10)
    ap.add_argument("--seed", type=int, default=31)
    ap.add_argument("--train-fraction", type=float, default=0.75)
    ap.add_argument("--cnn-epochs", type=int, default=20)
    ap.add_argument("--systems", default="baseline,llda,linear-bow,linear-emb,cnn")
    args = ap.parse_args()

    items = keyword_benchmark(n_sentences=args.sentences, noise=args.noise, seed=args.seed)
    posts = sorted({s.post_id for s in items})
    cut = int(len(posts) * args.train_fraction)
    train_posts = set(posts[:cut])
    train = [s for s in items if s.post_id in train_posts]
    test = [s for s in items if s.post_id not in train_posts]
    gold = [s.gold for s in test]
    print(f"{len(train)} train / {len(test)} test sentences, noise {args.noise}")

    vocab = build_vocab([s.tokens for s in items], min_count=1)
    table = train_embeddings(
        [list(s.tokens) for s in items],
        vocab,
        EmbedConfig(epochs=3, seed=19, subsample_threshold=1.0),
    )

    resources = dict(
        vocab=vocab,
        embeddings=table,
        llda_config=LldaConfig(
            train_iterations=150, infer_iterations=60, burn_in=20, seed=23,
            calibration_limit=400,
        ),
        linear_config=LinearConfig(C=1.0, epochs=30, seed=29),
        cnn_config=CnnConfig(learning_rate=0.5, epochs=args.cnn_epochs, seed=37),
    )

    reports = {}
    for spec in args.systems.split(","):
        t0 = time.time()
        if spec == "baseline":
            pred = baseline_all(test)
        else:
            pred = evaluation.make_classifier(spec, **resources)(train, test)
        report = EvalReport()
        report.add(gold, pred)
        reports[spec] = report
        print(f"  {spec}: micro-F {report.micro.f1:.3f} ({time.time() - t0:.0f}s)")

    print()
    print(render_report_text(reports))


if __name__ == "__main__":
    main()
