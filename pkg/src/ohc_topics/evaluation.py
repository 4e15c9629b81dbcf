"""Cross-validation, micro-averaged multi-label metrics, agreement.

All 0/0 ratios resolve to 0 (stated convention; low-support labels
depend on it). Micro counts are exact integer sums over the per-label
confusion counts, so `micro == sum(per_label)` is an identity, not an
approximation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Sequence

from ohc_topics.schema import LABELS, N_LABELS, LabelSet


@dataclass(frozen=True)
class LabeledSentence:
    post_id: str
    sentence_id: str
    tokens: tuple[str, ...]
    gold: LabelSet


@dataclass
class LabelCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0


@dataclass
class EvalReport:
    per_label: dict[str, LabelCounts] = field(
        default_factory=lambda: {code: LabelCounts() for code in LABELS}
    )
    folds: int = 0
    seed: int = 0

    @property
    def micro(self) -> LabelCounts:
        total = LabelCounts()
        for counts in self.per_label.values():
            total.tp += counts.tp
            total.fp += counts.fp
            total.fn += counts.fn
        return total

    def add(self, gold: Sequence[LabelSet], pred: Sequence[LabelSet]) -> None:
        if len(gold) != len(pred):
            raise ValueError("gold/pred length mismatch")
        for g, p in zip(gold, pred):
            both = g & p
            for code in both:
                self.per_label[code].tp += 1
            for code in p - g:
                self.per_label[code].fp += 1
            for code in g - p:
                self.per_label[code].fn += 1


def kfold_split(post_ids: Sequence[str], k: int = 5, seed: int = 0) -> list[set[str]]:
    """Partition post ids into k folds with sizes differing by at most 1."""
    unique = sorted(set(post_ids))
    if len(unique) < k:
        raise ValueError(f"need at least {k} posts, got {len(unique)}")
    rng = random.Random(seed)
    rng.shuffle(unique)
    folds: list[set[str]] = [set() for _ in range(k)]
    for i, post_id in enumerate(unique):
        folds[i % k].add(post_id)
    return folds


def micro_prf(gold: Sequence[LabelSet], pred: Sequence[LabelSet]) -> tuple[float, float, float]:
    if len(gold) != len(pred):
        raise ValueError("gold/pred length mismatch")
    report = EvalReport()
    report.add(gold, pred)
    m = report.micro
    return m.precision, m.recall, m.f1


def per_label_prf(
    gold: Sequence[LabelSet], pred: Sequence[LabelSet], label: str
) -> tuple[float, float, float]:
    if len(gold) != len(pred):
        raise ValueError("gold/pred length mismatch")
    counts = LabelCounts()
    for g, p in zip(gold, pred):
        has_g, has_p = label in g, label in p
        if has_g and has_p:
            counts.tp += 1
        elif has_p:
            counts.fp += 1
        elif has_g:
            counts.fn += 1
    return counts.precision, counts.recall, counts.f1


def baseline_all(sentences: Sequence) -> list[LabelSet]:
    """Tag every sentence with all 11 labels."""
    return [LabelSet.full() for _ in sentences]


def cohen_kappa(a: Sequence[LabelSet], b: Sequence[LabelSet], label: str) -> float:
    """Binary presence/absence kappa for one label.

    p_e == 1 happens only when both coders are constant and identical in
    presence; kappa is then 1 if observed agreement is perfect, else 0.
    """
    if len(a) != len(b):
        raise ValueError("annotation length mismatch")
    n = len(a)
    if n == 0:
        raise ValueError("need at least one annotation")
    a_pres = [label in s for s in a]
    b_pres = [label in s for s in b]
    p_o = sum(x == y for x, y in zip(a_pres, b_pres)) / n
    pa = sum(a_pres) / n
    pb = sum(b_pres) / n
    p_e = pa * pb + (1 - pa) * (1 - pb)
    if p_e == 1.0:
        return 1.0 if p_o == 1.0 else 0.0
    return (p_o - p_e) / (1 - p_e)


def average_kappa(a: Sequence[LabelSet], b: Sequence[LabelSet]) -> dict[str, float]:
    """Per-label kappa plus the unweighted mean over the 11 labels."""
    per_label = {code: cohen_kappa(a, b, code) for code in LABELS}
    per_label["AVG"] = sum(per_label[code] for code in LABELS) / N_LABELS
    return per_label


CLASSIFIERS = ("baseline", "llda", "linear-bow", "linear-emb", "cnn")

TrainPredict = Callable[
    [list[LabeledSentence], list[LabeledSentence]], list[LabelSet]
]


def make_classifier(
    spec: str,
    vocab=None,
    embeddings=None,
    llda_config=None,
    linear_config=None,
    cnn_config=None,
) -> TrainPredict:
    """Bind a classifier spec name to a train-on/predict-on callable."""
    if spec == "baseline":
        return lambda train, test: baseline_all(test)
    if spec == "llda":
        from ohc_topics import llda

        def run_llda(train, test):
            model, thresholds = llda.fit_and_calibrate(train, vocab, llda_config)
            return [
                llda.decide_labels(
                    llda.infer_theta(model, vocab.ids(s.tokens), llda_config), thresholds
                )
                for s in test
            ]

        return run_llda
    if spec in ("linear-bow", "linear-emb"):
        from ohc_topics import linear

        def run_linear(train, test):
            mode = "bow" if spec == "linear-bow" else "emb"
            model = linear.train_from_sentences(
                train, vocab, mode, embeddings, linear_config
            )
            return [
                linear.predict_linear(
                    model, linear.featurize(s.tokens, model.mode, vocab, embeddings)
                )
                for s in test
            ]

        return run_linear
    if spec == "cnn":
        from ohc_topics import cnn

        def run_cnn(train, test):
            model = cnn.train_from_sentences(train, vocab, embeddings, cnn_config)
            return [cnn.predict_cnn(model, vocab.ids(s.tokens)) for s in test]

        return run_cnn
    raise ValueError(f"unknown classifier spec {spec!r} (choose from {CLASSIFIERS})")


def run_cv(
    classifier: str | TrainPredict,
    items: Sequence[LabeledSentence],
    k: int = 5,
    seed: int = 0,
    **resources,
) -> EvalReport:
    """k-fold cross validation split at post level; counts pool over folds."""
    fn = classifier if callable(classifier) else make_classifier(classifier, **resources)
    folds = kfold_split([s.post_id for s in items], k=k, seed=seed)
    report = EvalReport(folds=k, seed=seed)
    for held_out in folds:
        train = [s for s in items if s.post_id not in held_out]
        test = [s for s in items if s.post_id in held_out]
        pred = fn(train, test)
        report.add([s.gold for s in test], pred)
    return report


def render_report_text(reports: dict[str, EvalReport]) -> str:
    """Aligned table: one row per label plus Micro, P/R/F per system."""
    systems = list(reports)
    header = ["Label"]
    for name in systems:
        header += [f"{name}:P", f"{name}:R", f"{name}:F"]
    rows = [header]
    for code in ("Micro",) + LABELS:
        row = [code]
        for name in systems:
            counts = (
                reports[name].micro if code == "Micro" else reports[name].per_label[code]
            )
            row += [
                format(counts.precision, ".9g"),
                format(counts.recall, ".9g"),
                format(counts.f1, ".9g"),
            ]
        rows.append(row)
    widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
    lines = []
    for r in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    return "\n".join(lines) + "\n"


def render_report_csv(reports: dict[str, EvalReport]) -> str:
    systems = list(reports)
    cols = ["label"]
    for name in systems:
        cols += [f"{name}_p", f"{name}_r", f"{name}_f"]
    lines = [",".join(cols)]
    for code in ("Micro",) + LABELS:
        cells = [code]
        for name in systems:
            counts = (
                reports[name].micro if code == "Micro" else reports[name].per_label[code]
            )
            cells += [
                format(counts.precision, ".9g"),
                format(counts.recall, ".9g"),
                format(counts.f1, ".9g"),
            ]
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def render_agreement_text(pairs: dict[str, dict[str, float]]) -> str:
    """Kappa table: AVG row first, then the 11 labels; one column per pair."""
    names = list(pairs)
    header = ["Label"] + names
    rows = [header]
    for code in ("AVG",) + LABELS:
        rows.append([code] + [format(pairs[n][code], ".9g") for n in names])
    widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
    return (
        "\n".join(
            "  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in rows
        )
        + "\n"
    )


def render_agreement_csv(pairs: dict[str, dict[str, float]]) -> str:
    names = list(pairs)
    lines = [",".join(["label"] + names)]
    for code in ("AVG",) + LABELS:
        lines.append(",".join([code] + [format(pairs[n][code], ".9g") for n in names]))
    return "\n".join(lines) + "\n"
