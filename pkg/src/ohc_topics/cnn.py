"""Convolutional sentence classifier with max-over-positions pooling.

Architecture: embedding lookup -> one convolutional layer (H filters
split as evenly as possible across the configured widths, ReLU) ->
max pooling over positions -> fully connected layer -> 11 logits.
Multi-label logistic loss with asymmetric costs: negative terms are
down-weighted by the cost ratio alpha.

Sentences shorter than the widest filter are padded with the all-zero
vector (PAD id -1, excluded from the vocabulary). Batched evaluation
masks positions beyond each sentence's own valid range, so a sentence's
logits do not depend on what it is batched with. Max-pool gradient
routes to the lowest-index argmax position on ties.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ohc_topics.schema import LABELS, N_LABELS, LabelSet

PAD_ID = -1


class TrainingError(Exception):
    pass


def filter_counts(hidden: int, widths) -> tuple[int, ...]:
    """Split H across widths as evenly as possible, extras to the narrowest."""
    base, rem = divmod(hidden, len(widths))
    return tuple(base + (1 if i < rem else 0) for i in range(len(widths)))


@dataclass
class CnnConfig:
    dim: int = 100
    hidden: int = 800
    filter_widths: tuple[int, ...] = (3, 4, 5)
    cost_ratio: float = 0.25
    learning_rate: float = 0.05
    epochs: int = 25
    batch_size: int = 32
    seed: int = 1
    fine_tune_embeddings: bool = False
    n_labels: int = N_LABELS

    def __post_init__(self):
        self.filter_widths = tuple(self.filter_widths)
        if not 0 < self.cost_ratio <= 1:
            raise ValueError("cost_ratio must be in (0, 1]")
        if any(w < 1 for w in self.filter_widths):
            raise ValueError("filter widths must be >= 1")


@dataclass
class CnnModel:
    dim: int
    hidden: int
    widths: tuple[int, ...]
    counts: tuple[int, ...]
    cost_ratio: float
    filters: list[np.ndarray]  # per width: (count, width*dim)
    filter_biases: list[np.ndarray]  # per width: (count,)
    out_weights: np.ndarray  # (n_labels, hidden)
    out_biases: np.ndarray  # (n_labels,)
    embeddings: np.ndarray  # (V, dim); PAD embeds as the zero vector
    fine_tuned: bool = False

    @property
    def n_labels(self) -> int:
        return self.out_weights.shape[0]

    @property
    def parameter_count(self) -> int:
        conv = sum(c * (w * self.dim + 1) for w, c in zip(self.widths, self.counts))
        return conv + self.n_labels * self.hidden + self.n_labels


@dataclass
class ForwardTrace:
    activations: list[np.ndarray]  # per width: (positions, count)
    argmax: list[np.ndarray]  # per width: (count,)
    pooled: np.ndarray  # (hidden,)
    logits: np.ndarray  # (11,)


def _embed_batch(model: CnnModel, batch_ids: list[list[int]]):
    w_max = max(model.widths)
    lengths = [max(len(ids), w_max) for ids in batch_ids]
    L = max(lengths)
    B = len(batch_ids)
    X = np.zeros((B, L, model.dim))
    for b, ids in enumerate(batch_ids):
        for i, token_id in enumerate(ids):
            if token_id != PAD_ID:
                X[b, i] = model.embeddings[token_id]
    return X, lengths


def _batch_forward(model: CnnModel, batch_ids: list[list[int]]):
    """Logits plus everything backward needs; per-sentence position masks."""
    X, lengths = _embed_batch(model, batch_ids)
    B, L, D = X.shape
    cols_by_width = []
    acts_by_width = []
    args_by_width = []
    scores_by_width = []
    pooled_parts = []
    for w, F, bias in zip(model.widths, model.filters, model.filter_biases):
        P = L - w + 1
        view = np.lib.stride_tricks.sliding_window_view(X, w, axis=1)  # (B,P,D,w)
        cols = np.ascontiguousarray(view.transpose(0, 1, 3, 2)).reshape(B, P, w * D)
        S = cols @ F.T + bias  # (B,P,count)
        A = np.maximum(S, 0.0)
        for b, n in enumerate(lengths):
            valid = n - w + 1
            if valid < P:
                A[b, valid:, :] = -1.0  # below any ReLU output, never pooled
        arg = A.argmax(axis=1)  # ties -> lowest position
        pooled = np.take_along_axis(A, arg[:, None, :], axis=1)[:, 0, :]
        cols_by_width.append(cols)
        scores_by_width.append(S)
        acts_by_width.append(A)
        args_by_width.append(arg)
        pooled_parts.append(pooled)
    pooled = np.concatenate(pooled_parts, axis=1)  # (B,H)
    logits = pooled @ model.out_weights.T + model.out_biases
    return {
        "X": X,
        "lengths": lengths,
        "cols": cols_by_width,
        "scores": scores_by_width,
        "acts": acts_by_width,
        "args": args_by_width,
        "pooled": pooled,
        "logits": logits,
    }


def forward(model: CnnModel, token_ids) -> tuple[np.ndarray, ForwardTrace]:
    """Logits for one sentence; the trace records pooling decisions."""
    state = _batch_forward(model, [list(token_ids)])
    trace = ForwardTrace(
        activations=[a[0] for a in state["acts"]],
        argmax=[a[0] for a in state["args"]],
        pooled=state["pooled"][0],
        logits=state["logits"][0],
    )
    return state["logits"][0], trace


def _stable_sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _sign_vector(gold: LabelSet, n_labels: int = N_LABELS) -> np.ndarray:
    y = np.full(n_labels, -1.0)
    for i in gold.indices():
        if i < n_labels:
            y[i] = 1.0
    return y


def loss(logits: np.ndarray, gold: LabelSet, alpha: float) -> float:
    """Sum over labels of cost * log(1 + exp(-y * logit)); negatives cost alpha."""
    y = _sign_vector(gold, len(logits))
    costs = np.where(y > 0, 1.0, alpha)
    return float(np.sum(costs * np.logaddexp(0.0, -y * logits)))


def batch_loss(model: CnnModel, batch, alpha: float | None = None) -> float:
    a = model.cost_ratio if alpha is None else alpha
    state = _batch_forward(model, [list(ids) for ids, _ in batch])
    total = 0.0
    for row, (_, gold) in zip(state["logits"], batch):
        total += loss(row, gold, a)
    return total / len(batch)


@dataclass
class CnnGradients:
    filters: list[np.ndarray]
    filter_biases: list[np.ndarray]
    out_weights: np.ndarray
    out_biases: np.ndarray
    embeddings: np.ndarray | None
    loss: float


def gradient(model: CnnModel, batch, alpha: float | None = None) -> CnnGradients:
    """Exact gradients of the mean batch loss w.r.t. every parameter."""
    if not batch:
        raise ValueError("batch must be non-empty")
    a = model.cost_ratio if alpha is None else alpha
    batch_ids = [list(ids) for ids, _ in batch]
    state = _batch_forward(model, batch_ids)
    logits = state["logits"]
    B = len(batch)

    y = np.stack([_sign_vector(gold, model.n_labels) for _, gold in batch])
    costs = np.where(y > 0, 1.0, a)
    margins = -y * logits
    total = float(np.sum(costs * np.logaddexp(0.0, margins))) / B
    # d/dz of cost*log(1+exp(-y z)) = -cost*y*sigmoid(-y z)
    dlogits = -costs * y * _stable_sigmoid(margins) / B  # (B, n_labels)

    d_out_w = dlogits.T @ state["pooled"]
    d_out_b = dlogits.sum(axis=0)
    d_pooled = dlogits @ model.out_weights  # (B,H)

    need_emb = model.fine_tuned
    dX = np.zeros_like(state["X"]) if need_emb else None
    d_filters = []
    d_fbiases = []
    offset = 0
    for wi, (w, F) in enumerate(zip(model.widths, model.filters)):
        count = model.counts[wi]
        dp = d_pooled[:, offset : offset + count]  # (B,count)
        offset += count
        arg = state["args"][wi]  # (B,count)
        S = state["scores"][wi]
        Bn = S.shape[0]
        rows = np.arange(Bn)[:, None]
        filt = np.arange(count)[None, :]
        s_at = S[rows, arg, filt]  # (B,count)
        gate = (s_at > 0).astype(float)
        dS_at = dp * gate  # (B,count)
        cols = state["cols"][wi]
        cols_at = cols[rows, arg, :]  # (B,count,w*D)
        d_filters.append(np.einsum("bf,bfk->fk", dS_at, cols_at))
        d_fbiases.append(dS_at.sum(axis=0))
        if need_emb:
            dcols = np.zeros_like(cols)
            contrib = dS_at[:, :, None] * F[None, :, :]  # (B,count,w*D)
            np.add.at(dcols, (rows, arg), contrib)
            D = model.dim
            P = cols.shape[1]
            dwin = dcols.reshape(Bn, P, w, D)
            for o in range(w):
                dX[:, o : o + P, :] += dwin[:, :, o, :]

    d_emb = None
    if need_emb:
        d_emb = np.zeros_like(model.embeddings)
        for b, ids in enumerate(batch_ids):
            for i, token_id in enumerate(ids):
                if token_id != PAD_ID:
                    d_emb[token_id] += dX[b, i]

    return CnnGradients(
        filters=d_filters,
        filter_biases=d_fbiases,
        out_weights=d_out_w,
        out_biases=d_out_b,
        embeddings=d_emb,
        loss=total,
    )


def init_model(config: CnnConfig, embeddings: np.ndarray) -> CnnModel:
    """Uniform(-0.05, 0.05) filters, zero biases, zero output layer."""
    rng = np.random.default_rng(config.seed)
    counts = filter_counts(config.hidden, config.filter_widths)
    filters = []
    fbiases = []
    for w, c in zip(config.filter_widths, counts):
        filters.append(rng.uniform(-0.05, 0.05, size=(c, w * config.dim)))
        fbiases.append(np.zeros(c))
    emb = embeddings.copy() if config.fine_tune_embeddings else embeddings
    return CnnModel(
        dim=config.dim,
        hidden=config.hidden,
        widths=config.filter_widths,
        counts=counts,
        cost_ratio=config.cost_ratio,
        filters=filters,
        filter_biases=fbiases,
        out_weights=np.zeros((config.n_labels, config.hidden)),
        out_biases=np.zeros(config.n_labels),
        embeddings=emb,
        fine_tuned=config.fine_tune_embeddings,
    )


def train_cnn(dataset, config: CnnConfig, embeddings: np.ndarray) -> CnnModel:
    """Mini-batch SGD; per-epoch mean loss must stay finite or training aborts."""
    if not dataset:
        raise TrainingError("empty training set")
    model = init_model(config, embeddings)
    rng = np.random.default_rng(config.seed + 1)
    n = len(dataset)
    lr = config.learning_rate
    for _ in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = [dataset[i] for i in order[start : start + config.batch_size]]
            grads = gradient(model, batch)
            if not np.isfinite(grads.loss):
                raise TrainingError("training diverged (non-finite loss)")
            for wi in range(len(model.widths)):
                model.filters[wi] -= lr * grads.filters[wi]
                model.filter_biases[wi] -= lr * grads.filter_biases[wi]
            model.out_weights -= lr * grads.out_weights
            model.out_biases -= lr * grads.out_biases
            if model.fine_tuned:
                model.embeddings -= lr * grads.embeddings
            epoch_loss += grads.loss * len(batch)
        if not np.isfinite(epoch_loss):
            raise TrainingError("training diverged (non-finite loss)")
    return model


def _decide(logits: np.ndarray) -> LabelSet:
    mask = 0
    for i in range(len(logits)):
        if logits[i] >= 0.0:
            mask |= 1 << i
    if mask == 0:
        mask = 1 << int(np.argmax(logits))
    return LabelSet(mask)


def predict_cnn(model: CnnModel, token_ids) -> LabelSet:
    """Labels with sigmoid(logit) >= 0.5; falls back to the argmax label."""
    logits, _ = forward(model, token_ids)
    return _decide(logits)


def predict_batch(model: CnnModel, batch_ids: list[list[int]]) -> list[LabelSet]:
    state = _batch_forward(model, [list(ids) for ids in batch_ids])
    return [_decide(row) for row in state["logits"]]


def train_from_sentences(items, vocab, table, config: CnnConfig | None = None) -> CnnModel:
    cfg = config or CnnConfig()
    dataset = [(vocab.ids(s.tokens), s.gold) for s in items]
    return train_cnn(dataset, cfg, table.vectors)


def save_cnn(model: CnnModel, path) -> None:
    """Self-describing header, then the flat parameter array (one value
    per line, 9 significant digits) in declared order: per width filter
    weights row-major then biases, output weights row-major, output
    biases, then the embedding matrix when fine-tuned."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{model.dim} {model.hidden} {format(model.cost_ratio, '.9g')}\n")
        fh.write(" ".join(str(w) for w in model.widths) + "\n")
        fh.write(" ".join(str(c) for c in model.counts) + "\n")
        emb_rows = model.embeddings.shape[0] if model.fine_tuned else 0
        fh.write(f"{int(model.fine_tuned)} {emb_rows} {model.n_labels}\n")
        chunks = []
        for wi in range(len(model.widths)):
            chunks.append(model.filters[wi].ravel())
            chunks.append(model.filter_biases[wi])
        chunks.append(model.out_weights.ravel())
        chunks.append(model.out_biases)
        if model.fine_tuned:
            chunks.append(model.embeddings.ravel())
        for chunk in chunks:
            for value in chunk:
                fh.write(format(value, ".9g") + "\n")


def load_cnn(path, embeddings: np.ndarray | None = None) -> CnnModel:
    with open(path, encoding="utf-8") as fh:
        dim_s, hidden_s, alpha_s = fh.readline().split()
        dim, hidden = int(dim_s), int(hidden_s)
        widths = tuple(int(w) for w in fh.readline().split())
        counts = tuple(int(c) for c in fh.readline().split())
        fine_s, emb_rows_s, n_labels_s = fh.readline().split()
        fine_tuned, emb_rows, n_labels = bool(int(fine_s)), int(emb_rows_s), int(n_labels_s)
        values = [float(line) for line in fh]
    pos = 0

    def take(n):
        nonlocal pos
        chunk = np.array(values[pos : pos + n])
        pos += n
        return chunk

    filters = []
    fbiases = []
    for w, c in zip(widths, counts):
        filters.append(take(c * w * dim).reshape(c, w * dim))
        fbiases.append(take(c))
    out_w = take(n_labels * hidden).reshape(n_labels, hidden)
    out_b = take(n_labels)
    if fine_tuned:
        emb = take(emb_rows * dim).reshape(emb_rows, dim)
    else:
        if embeddings is None:
            raise ValueError("model was trained with frozen embeddings; pass them in")
        emb = embeddings
    return CnnModel(
        dim=dim,
        hidden=hidden,
        widths=widths,
        counts=counts,
        cost_ratio=float(alpha_s),
        filters=filters,
        filter_biases=fbiases,
        out_weights=out_w,
        out_biases=out_b,
        embeddings=emb,
        fine_tuned=fine_tuned,
    )
