"""Skip-gram word embeddings with negative sampling, trained from scratch.

Training is single-threaded and fully deterministic for a fixed seed:
one RNG drives window sizes, subsampling, and negative draws, and
sequences are visited in corpus order every epoch. The UNK row (id 0)
is not trained; it is set to the mean of all trained rows afterwards.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from ohc_topics.textprep import Vocabulary

DIM = 100


class TrainingError(Exception):
    pass


@dataclass
class EmbedConfig:
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    initial_lr: float = 0.025
    subsample_threshold: float = 1e-3
    seed: int = 1
    dim: int = DIM

    def __post_init__(self):
        if self.window < 1 or self.negatives < 1 or self.epochs < 1:
            raise ValueError("window, negatives, and epochs must be >= 1")
        if self.initial_lr <= 0:
            raise ValueError("initial_lr must be positive")


@dataclass
class EmbeddingTable:
    dim: int
    vectors: np.ndarray  # V x dim, row 0 is UNK
    vocab: Vocabulary

    def row(self, token_id: int) -> np.ndarray:
        if 0 <= token_id < self.vectors.shape[0]:
            return self.vectors[token_id]
        return self.vectors[0]


def lookup(table: EmbeddingTable, token: str) -> np.ndarray:
    """Embedding row for a token; OOV tokens share the UNK row."""
    return table.vectors[table.vocab.id(token)]


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def pair_loss(center_vec: np.ndarray, context_vec: np.ndarray, neg_vecs: np.ndarray) -> float:
    """Negative-sampling loss for one (center, context) pair."""
    pos = float(np.dot(context_vec, center_vec))
    negs = neg_vecs @ center_vec
    return float(-np.log(_sigmoid(pos)) - np.sum(np.log(_sigmoid(-negs))))


def pair_grad(center_vec, context_vec, neg_vecs):
    """Gradients of pair_loss w.r.t. (center, context, negatives)."""
    s_pos = _sigmoid(float(np.dot(context_vec, center_vec)))
    s_neg = _sigmoid(neg_vecs @ center_vec)
    g_center = (s_pos - 1.0) * context_vec + s_neg @ neg_vecs
    g_context = (s_pos - 1.0) * center_vec
    g_negs = s_neg[:, None] * center_vec[None, :]
    return g_center, g_context, g_negs


def train_embeddings(sequences, vocab: Vocabulary, config: EmbedConfig | None = None) -> EmbeddingTable:
    """Train skip-gram vectors over token sequences (lists of tokens or ids)."""
    cfg = config or EmbedConfig()
    if len(vocab) < 2:
        raise TrainingError("insufficient data: vocabulary is trivial")
    id_seqs = []
    counts = np.zeros(len(vocab), dtype=np.int64)
    for seq in sequences:
        tokens = seq.tokens if hasattr(seq, "tokens") else seq
        ids = tokens if tokens and isinstance(tokens[0], int) else vocab.ids(tokens)
        ids = [i for i in ids if i != 0]  # UNK is not trained
        if ids:
            id_seqs.append(ids)
            for i in ids:
                counts[i] += 1
    total = int(counts.sum())
    if total == 0:
        raise TrainingError("insufficient data: no in-vocabulary tokens")

    V = len(vocab)
    rng = np.random.default_rng(cfg.seed)
    w_in = (rng.random((V, cfg.dim)) - 0.5) / cfg.dim
    w_out = np.zeros((V, cfg.dim))

    # keep probability per the conventional subsampling schedule
    freq = counts / total
    keep = np.ones(V)
    mask = freq > 0
    t = cfg.subsample_threshold
    keep[mask] = np.minimum(1.0, np.sqrt(t / freq[mask]) + t / freq[mask])

    # negative draws follow the unigram distribution raised to 3/4
    noise = counts.astype(np.float64) ** 0.75
    noise[0] = 0.0
    cum_noise = np.cumsum(noise / noise.sum())

    min_lr = cfg.initial_lr * 1e-4
    planned = cfg.epochs * total
    processed = 0
    for _ in range(cfg.epochs):
        for ids in id_seqs:
            kept = [i for i in ids if keep[i] >= 1.0 or rng.random() < keep[i]]
            processed += len(ids)
            lr = max(min_lr, cfg.initial_lr * (1.0 - processed / planned))
            n = len(kept)
            for pos in range(n):
                center = kept[pos]
                b = int(rng.integers(1, cfg.window + 1))
                for off in range(-b, b + 1):
                    j = pos + off
                    if off == 0 or j < 0 or j >= n:
                        continue
                    context = kept[j]
                    negs = np.searchsorted(cum_noise, rng.random(cfg.negatives))
                    negs = negs[negs != context]
                    v = w_in[center]
                    g_center, g_context, g_negs = pair_grad(v, w_out[context], w_out[negs])
                    w_in[center] = v - lr * g_center
                    w_out[context] -= lr * g_context
                    np.subtract.at(w_out, negs, lr * g_negs)
        if not np.all(np.isfinite(w_in)) or not np.all(np.isfinite(w_out)):
            raise TrainingError("non-finite values during embedding training")

    if V > 1:
        w_in[0] = w_in[1:].mean(axis=0)
    return EmbeddingTable(dim=cfg.dim, vectors=w_in, vocab=vocab)


def save_embeddings(table: EmbeddingTable, path: str | os.PathLike) -> None:
    """Text format: 'V D' header, then one 'token v1 .. vD' line per row."""
    with open(path, "w", encoding="utf-8") as fh:
        V, D = table.vectors.shape
        fh.write(f"{V} {D}\n")
        for token_id in range(V):
            token = table.vocab.token_of[token_id]
            values = " ".join(format(x, ".9g") for x in table.vectors[token_id])
            fh.write(f"{token} {values}\n")


def load_embeddings(path: str | os.PathLike) -> EmbeddingTable:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().split()
        V, D = int(header[0]), int(header[1])
        vocab = Vocabulary()
        vocab.id_of = {}
        vocab.token_of = []
        vectors = np.zeros((V, D))
        for token_id in range(V):
            parts = fh.readline().rstrip("\n").split(" ")
            token = parts[0]
            vocab.id_of[token] = token_id
            vocab.token_of.append(token)
            vectors[token_id] = [float(x) for x in parts[1 : D + 1]]
    return EmbeddingTable(dim=D, vectors=vectors, vocab=vocab)
