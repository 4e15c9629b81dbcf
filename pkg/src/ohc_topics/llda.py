"""Labeled-LDA classifier: collapsed Gibbs training, topics are labels.

During training each token's topic is restricted to its document's
label set; the per-token conditional is

    p(z = k | rest)  propto  (n_dk + alpha) * (n_kw + beta) / (n_k + V*beta)

over k in the document's labels. Test-time inference runs Gibbs over a
single document with all 11 topics allowed and phi held fixed.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass

import numpy as np

from ohc_topics.schema import LABELS, N_LABELS, LabelSet

log = logging.getLogger(__name__)

THRESHOLD_GRID = [x / 100 for x in range(5, 51, 5)]


class LldaError(Exception):
    pass


@dataclass
class LldaConfig:
    alpha: float = 0.1
    beta: float = 0.5
    train_iterations: int = 1000
    infer_iterations: int = 200
    burn_in: int = 100
    seed: int = 1
    calibration_limit: int = 0  # 0 = use every training sentence
    debug: bool = False

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if not self.burn_in < self.infer_iterations:
            raise ValueError("burn_in must be smaller than infer_iterations")


@dataclass
class LldaModel:
    topic_word_counts: np.ndarray  # N x V, integers
    topic_totals: np.ndarray  # N, integers
    alpha: float
    beta: float

    @property
    def n_vocab(self) -> int:
        return self.topic_word_counts.shape[1]

    @property
    def phi(self) -> np.ndarray:
        denom = self.topic_totals[:, None] + self.n_vocab * self.beta
        return (self.topic_word_counts + self.beta) / denom


def fit_llda(
    docs: list[tuple[list[int], LabelSet]],
    n_vocab: int,
    config: LldaConfig | None = None,
    on_sweep=None,
) -> LldaModel:
    """Collapsed Gibbs over labeled documents (token ids, label set)."""
    cfg = config or LldaConfig()
    if not docs:
        raise LldaError("empty training corpus")
    allowed: list[list[int]] = []
    tokens: list[list[int]] = []
    for doc_tokens, labels in docs:
        if not labels:
            raise LldaError("unlabeled training instance")
        allowed.append(labels.indices())
        tokens.append(list(doc_tokens))

    rng = random.Random(cfg.seed)
    V = n_vocab
    alpha, beta = cfg.alpha, cfg.beta
    vbeta = V * beta
    n_kw = [[0] * V for _ in range(N_LABELS)]
    n_k = [0] * N_LABELS
    n_dk = [[0] * N_LABELS for _ in docs]
    z: list[list[int]] = []
    for d, doc_tokens in enumerate(tokens):
        lam = allowed[d]
        assignments = []
        for _ in doc_tokens:
            k = lam[rng.randrange(len(lam))] if len(lam) > 1 else lam[0]
            assignments.append(k)
        z.append(assignments)
        for w, k in zip(doc_tokens, assignments):
            n_dk[d][k] += 1
            n_kw[k][w] += 1
            n_k[k] += 1

    for sweep in range(cfg.train_iterations):
        for d, doc_tokens in enumerate(tokens):
            lam = allowed[d]
            dk = n_dk[d]
            zs = z[d]
            for i, w in enumerate(doc_tokens):
                k_old = zs[i]
                dk[k_old] -= 1
                n_kw[k_old][w] -= 1
                n_k[k_old] -= 1
                if len(lam) == 1:
                    k_new = lam[0]
                else:
                    total = 0.0
                    weights = []
                    for k in lam:
                        wt = (dk[k] + alpha) * (n_kw[k][w] + beta) / (n_k[k] + vbeta)
                        total += wt
                        weights.append(wt)
                    r = rng.random() * total
                    acc = 0.0
                    k_new = lam[-1]
                    for k, wt in zip(lam, weights):
                        acc += wt
                        if r < acc:
                            k_new = k
                            break
                zs[i] = k_new
                dk[k_new] += 1
                n_kw[k_new][w] += 1
                n_k[k_new] += 1
        if cfg.debug:
            for d in range(len(tokens)):
                assert all(k in allowed[d] for k in z[d]), "assignment left label set"
            assert sum(n_k) == sum(len(t) for t in tokens), "count conservation broken"
        if on_sweep is not None:
            on_sweep(sweep, n_k, n_kw)

    return LldaModel(
        topic_word_counts=np.array(n_kw, dtype=np.int64),
        topic_totals=np.array(n_k, dtype=np.int64),
        alpha=alpha,
        beta=beta,
    )


def infer_theta(model: LldaModel, token_ids: list[int], config: LldaConfig | None = None) -> np.ndarray:
    """Posterior topic mixture for one sentence, phi held fixed.

    theta_k = (n_dk + alpha) / (len + N*alpha), averaged over the
    post-burn-in sweeps. Empty sentences get the uniform vector.
    """
    cfg = config or LldaConfig()
    alpha = model.alpha
    n = len(token_ids)
    if n == 0:
        log.warning("empty token sequence: returning uniform topic mixture")
        return np.full(N_LABELS, 1.0 / N_LABELS)
    phi = model.phi
    rng = random.Random(cfg.seed)
    weights_by_word = {w: phi[:, w] for w in set(token_ids)}
    dk = [0] * N_LABELS
    z = []
    for w in token_ids:
        k = rng.randrange(N_LABELS)
        z.append(k)
        dk[k] += 1
    theta_sum = np.zeros(N_LABELS)
    kept = 0
    for sweep in range(cfg.infer_iterations):
        for i, w in enumerate(token_ids):
            k_old = z[i]
            dk[k_old] -= 1
            pw = weights_by_word[w]
            total = 0.0
            weights = []
            for k in range(N_LABELS):
                wt = (dk[k] + alpha) * pw[k]
                total += wt
                weights.append(wt)
            r = rng.random() * total
            acc = 0.0
            k_new = N_LABELS - 1
            for k in range(N_LABELS):
                acc += weights[k]
                if r < acc:
                    k_new = k
                    break
            z[i] = k_new
            dk[k_new] += 1
        if sweep >= cfg.burn_in:
            theta_sum += (np.array(dk) + alpha) / (n + N_LABELS * alpha)
            kept += 1
    return theta_sum / kept


def decide_labels(theta: np.ndarray, thresholds) -> LabelSet:
    """Labels whose theta clears the per-label threshold; argmax fallback."""
    mask = 0
    for i in range(N_LABELS):
        if theta[i] >= thresholds[i]:
            mask |= 1 << i
    if mask == 0:
        mask = 1 << int(np.argmax(theta))
    return LabelSet(mask)


def calibrate_thresholds(
    model: LldaModel,
    docs: list[tuple[list[int], LabelSet]],
    config: LldaConfig | None = None,
) -> list[float]:
    """Per-label thresholds maximizing per-label F on held-in data."""
    cfg = config or LldaConfig()
    if cfg.calibration_limit and len(docs) > cfg.calibration_limit:
        docs = docs[: cfg.calibration_limit]
    thetas = [infer_theta(model, ids, cfg) for ids, _ in docs]
    golds = [labels for _, labels in docs]
    thresholds = []
    for i in range(N_LABELS):
        gold_pres = [labels.has_index(i) for labels in golds]
        if not any(gold_pres):
            # never seen in training: no threshold can be tuned, never predict
            thresholds.append(2.0)
            continue
        best_t, best_f = THRESHOLD_GRID[0], -1.0
        for t in THRESHOLD_GRID:
            tp = fp = fn = 0
            for theta, has in zip(thetas, gold_pres):
                pred = theta[i] >= t
                if pred and has:
                    tp += 1
                elif pred:
                    fp += 1
                elif has:
                    fn += 1
            p = tp / (tp + fp) if tp + fp else 0.0
            r = tp / (tp + fn) if tp + fn else 0.0
            f = 2 * p * r / (p + r) if p + r else 0.0
            if f > best_f:
                best_f, best_t = f, t
        thresholds.append(best_t)
    return thresholds


def fit_and_calibrate(train_items, vocab, config: LldaConfig | None = None):
    """Adapter from LabeledSentence items: fit, then tune decision thresholds."""
    docs = [(vocab.ids(s.tokens), s.gold) for s in train_items]
    model = fit_llda(docs, len(vocab), config)
    thresholds = calibrate_thresholds(model, docs, config)
    return model, thresholds


def save_llda(model: LldaModel, path) -> None:
    """Header (N, V, alpha, beta) plus the integer count matrix."""
    with open(path, "w", encoding="utf-8") as fh:
        N, V = model.topic_word_counts.shape
        fh.write(f"{N} {V} {format(model.alpha, '.9g')} {format(model.beta, '.9g')}\n")
        for k in range(N):
            fh.write(" ".join(str(int(c)) for c in model.topic_word_counts[k]) + "\n")


def load_llda(path) -> LldaModel:
    with open(path, encoding="utf-8") as fh:
        n_topics, V, alpha, beta = fh.readline().split()
        counts = np.zeros((int(n_topics), int(V)), dtype=np.int64)
        for k in range(int(n_topics)):
            counts[k] = [int(x) for x in fh.readline().split()]
    return LldaModel(
        topic_word_counts=counts,
        topic_totals=counts.sum(axis=1),
        alpha=float(alpha),
        beta=float(beta),
    )
