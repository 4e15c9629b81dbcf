"""One-vs-rest linear max-margin classifier (bag-of-words or embedding features).

Each of the 11 labels gets an independent binary classifier minimizing

    (1/m) sum_i max(0, 1 - y_i (w.x_i + b)) + ||w||^2 / (2 C m)

by epoch-shuffled per-example subgradient descent with step 1/(lambda t),
lambda = 1/(C m). The bias rides along unregularized. Per-label training
draws from label-specific RNG streams so retraining one label cannot
perturb the others.
"""

from __future__ import annotations

import logging
import random
import zlib
from dataclasses import dataclass, field

import numpy as np

from ohc_topics.schema import LABELS, N_LABELS, LabelSet

log = logging.getLogger(__name__)

EMB_DIM = 100


class LinearError(Exception):
    pass


@dataclass
class LinearConfig:
    C: float = 1.0
    epochs: int = 30
    seed: int = 1

    def __post_init__(self):
        if self.C <= 0:
            raise ValueError("C must be positive")


@dataclass
class FeatureVector:
    """Sparse (ids/values) or dense feature vector with its norm cached."""

    dim: int
    ids: np.ndarray | None = None
    values: np.ndarray | None = None
    dense: np.ndarray | None = None
    norm: float = 0.0

    def dot(self, weights: np.ndarray) -> float:
        if weights.shape[0] != self.dim:
            raise LinearError(
                f"dimension mismatch: features {self.dim}, weights {weights.shape[0]}"
            )
        if self.dense is not None:
            return float(weights @ self.dense)
        if len(self.ids) == 0:
            return 0.0
        return float(weights[self.ids] @ self.values)

    def add_into(self, weights: np.ndarray, scale: float) -> None:
        if self.dense is not None:
            weights += scale * self.dense
        elif len(self.ids):
            weights[self.ids] += scale * self.values


def featurize_bow(tokens, vocab) -> FeatureVector:
    """L2-normalized token counts over vocabulary ids (OOV counts as UNK)."""
    counts: dict[int, float] = {}
    for token in tokens:
        i = vocab.id(token)
        counts[i] = counts.get(i, 0.0) + 1.0
    if not counts:
        return FeatureVector(dim=len(vocab), ids=np.array([], dtype=np.int64), values=np.array([]))
    ids = np.array(sorted(counts), dtype=np.int64)
    values = np.array([counts[i] for i in ids])
    norm = float(np.sqrt(np.sum(values**2)))
    if norm > 0:
        values = values / norm
    return FeatureVector(dim=len(vocab), ids=ids, values=values, norm=1.0 if norm else 0.0)


def featurize_emb(tokens, table) -> FeatureVector:
    """Arithmetic mean of the tokens' embedding rows; empty -> zero vector."""
    if not tokens:
        dense = np.zeros(table.dim)
    else:
        rows = [table.vectors[table.vocab.id(t)] for t in tokens]
        dense = np.mean(rows, axis=0)
    return FeatureVector(dim=table.dim, dense=dense, norm=float(np.linalg.norm(dense)))


def featurize(tokens, mode: str, vocab=None, table=None) -> FeatureVector:
    return featurize_bow(tokens, vocab) if mode == "bow" else featurize_emb(tokens, table)


@dataclass
class LinearModel:
    mode: str  # "bow" | "emb"
    weights: np.ndarray  # 11 x dim
    biases: np.ndarray  # 11
    objective_history: dict[str, list[float]] = field(default_factory=dict)


def _label_seed(seed: int, code: str) -> int:
    return (seed * 0x9E3779B1 + zlib.crc32(code.encode())) & 0x7FFFFFFF


def objective(features, y, w, b, C) -> float:
    m = len(features)
    hinge = 0.0
    for x, yi in zip(features, y):
        hinge += max(0.0, 1.0 - yi * (x.dot(w) + b))
    return hinge / m + float(w @ w) / (2.0 * C * m)


def train_binary(features, y, config: LinearConfig, seed: int):
    """Subgradient descent for one label; returns (w, b, per-epoch objective).

    Raw 1/(lambda t) iterates keep bouncing between support vectors, so
    the final model is the average of the iterates over the second half
    of training (tail averaging); the recorded epoch objective is the
    objective of that running candidate.
    """
    m = len(features)
    dim = features[0].dim
    lam = 1.0 / (config.C * m)
    w = np.zeros(dim)
    b = 0.0
    rng = random.Random(seed)
    order = list(range(m))
    t = 0
    history = []
    avg_from = (config.epochs // 2) * m
    w_sum = np.zeros(dim)
    b_sum = 0.0
    n_avg = 0
    for _ in range(config.epochs):
        rng.shuffle(order)
        for i in order:
            t += 1
            eta = 1.0 / (lam * t)
            x, yi = features[i], y[i]
            margin = yi * (x.dot(w) + b)
            w *= 1.0 - eta * lam
            if margin < 1.0:
                x.add_into(w, eta * yi)
                # the unregularized bias lacks strong convexity: the
                # lambda-amplified step would swamp it and 1/t cannot
                # unwind early drift, so it steps at 1/sqrt(t)
                b += yi / t**0.5
            if t > avg_from:
                w_sum += w
                b_sum += b
                n_avg += 1
        if n_avg:
            history.append(objective(features, y, w_sum / n_avg, b_sum / n_avg, config.C))
        else:
            history.append(objective(features, y, w, b, config.C))
    if n_avg:
        return w_sum / n_avg, b_sum / n_avg, history
    return w, b, history


def train_ovr(
    dataset,
    config: LinearConfig | None = None,
    mode: str = "bow",
    label_seeds: dict[str, int] | None = None,
) -> LinearModel:
    """Train the 11 independent binary classifiers.

    dataset: list of (FeatureVector, LabelSet). A label with no positive
    examples gets the constant always-negative classifier.
    """
    cfg = config or LinearConfig()
    if not dataset:
        raise LinearError("empty training set")
    features = [x for x, _ in dataset]
    dim = features[0].dim
    model = LinearModel(mode=mode, weights=np.zeros((N_LABELS, dim)), biases=np.zeros(N_LABELS))
    for idx, code in enumerate(LABELS):
        y = [1.0 if code in gold else -1.0 for _, gold in dataset]
        if not any(yi > 0 for yi in y):
            log.warning("label %s has no positive examples; always-negative", code)
            model.biases[idx] = -1.0
            model.objective_history[code] = []
            continue
        seed = (label_seeds or {}).get(code, _label_seed(cfg.seed, code))
        w, b, history = train_binary(features, y, cfg, seed)
        model.weights[idx] = w
        model.biases[idx] = b
        model.objective_history[code] = history
    return model


def predict_linear(model: LinearModel, features: FeatureVector) -> LabelSet:
    """Labels with strictly positive margin; the empty set is legal."""
    mask = 0
    for idx in range(N_LABELS):
        if features.dot(model.weights[idx]) + model.biases[idx] > 0.0:
            mask |= 1 << idx
    return LabelSet(mask)


def train_from_sentences(items, vocab, mode, embeddings=None, config=None) -> LinearModel:
    dataset = [(featurize(s.tokens, mode, vocab, embeddings), s.gold) for s in items]
    return train_ovr(dataset, config, mode=mode)


def save_linear(model: LinearModel, path) -> None:
    """Header 'mode dim', then one line per label: code, bias, weights."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{model.mode} {model.weights.shape[1]}\n")
        for idx, code in enumerate(LABELS):
            bias = format(model.biases[idx], ".9g")
            if model.mode == "bow":
                pairs = " ".join(
                    f"{i}:{format(v, '.9g')}"
                    for i, v in enumerate(model.weights[idx])
                    if v != 0.0
                )
                fh.write(f"{code} {bias} {pairs}".rstrip() + "\n")
            else:
                values = " ".join(format(v, ".9g") for v in model.weights[idx])
                fh.write(f"{code} {bias} {values}\n")


def load_linear(path) -> LinearModel:
    with open(path, encoding="utf-8") as fh:
        mode, dim = fh.readline().split()
        dim = int(dim)
        weights = np.zeros((N_LABELS, dim))
        biases = np.zeros(N_LABELS)
        for line in fh:
            parts = line.split()
            idx = LABELS.index(parts[0])
            biases[idx] = float(parts[1])
            if mode == "bow":
                for pair in parts[2:]:
                    i, v = pair.split(":")
                    weights[idx, int(i)] = float(v)
            else:
                weights[idx] = [float(v) for v in parts[2:]]
    return LinearModel(mode=mode, weights=weights, biases=biases)
