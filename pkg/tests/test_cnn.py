import math

import numpy as np
import pytest

from ohc_topics.cnn import (
    CnnConfig,
    TrainingError,
    batch_loss,
    filter_counts,
    forward,
    gradient,
    init_model,
    load_cnn,
    loss,
    predict_batch,
    predict_cnn,
    save_cnn,
    train_cnn,
)
from ohc_topics.schema import LABELS, N_LABELS, LabelSet
from ohc_topics.synth import keyword_benchmark


def tiny_model(seed=0, n_labels=3, fine_tune=False, n_vocab=9):
    config = CnnConfig(
        dim=4,
        hidden=6,
        filter_widths=(2, 3),
        cost_ratio=0.25,
        seed=seed,
        n_labels=n_labels,
        fine_tune_embeddings=fine_tune,
    )
    rng = np.random.default_rng(seed + 100)
    emb = rng.normal(0, 0.4, size=(n_vocab, 4))
    model = init_model(config, emb)
    # nonzero output layer so every parameter class gets gradient flow
    model.out_weights = rng.normal(0, 0.3, size=model.out_weights.shape)
    model.out_biases = rng.normal(0, 0.1, size=model.out_biases.shape)
    for i in range(len(model.filter_biases)):
        model.filter_biases[i] = rng.normal(0, 0.1, size=model.filter_biases[i].shape)
    return model


def tiny_batch(seed=1, n=4, n_vocab=9, max_len=7):
    rng = np.random.default_rng(seed)
    batch = []
    for _ in range(n):
        length = int(rng.integers(1, max_len))
        ids = rng.integers(0, n_vocab, size=length).tolist()
        gold = LabelSet.from_codes(
            [LABELS[i] for i in rng.choice(3, size=int(rng.integers(1, 3)), replace=False)]
        )
        batch.append((ids, gold))
    return batch


class TestFilterCounts:
    def test_spec_split(self):
        assert filter_counts(800, (3, 4, 5)) == (267, 267, 266)

    def test_exact_division(self):
        assert filter_counts(6, (2, 3)) == (3, 3)


class TestForward:
    def test_zero_network_logits_equal_biases(self):
        model = tiny_model()
        for i in range(len(model.filters)):
            model.filters[i][:] = 0.0
            model.filter_biases[i][:] = 0.0
        model.out_weights[:] = 0.0
        b = np.array([0.3, -0.2, 0.7])
        model.out_biases = b.copy()
        logits, _ = forward(model, [1, 2, 3, 4])
        assert np.allclose(logits, b, atol=1e-15)

    def test_short_sentence_padded(self):
        model = tiny_model()
        logits, trace = forward(model, [1])
        assert logits.shape == (3,)
        assert np.all(np.isfinite(logits))
        assert trace.pooled.shape == (6,)

    def test_empty_sentence(self):
        model = tiny_model()
        logits, _ = forward(model, [])
        assert np.all(np.isfinite(logits))

    def test_pad_append_invariance(self):
        # single-token sentence: appended pads only create pure-pad
        # windows, which cannot win the max when filter biases <= 0
        model = tiny_model()
        for i in range(len(model.filter_biases)):
            model.filter_biases[i] = -np.abs(model.filter_biases[i])
        base, _ = forward(model, [5])
        for n_pads in (1, 2, 3, 8):
            padded, _ = forward(model, [5] + [-1] * n_pads)
            assert np.allclose(padded, base, atol=1e-15)

    def test_pooled_length_fixed_for_all_lengths(self):
        model = tiny_model()
        for length in range(1, 51):
            _, trace = forward(model, list(np.arange(length) % 9))
            assert trace.pooled.shape == (6,)

    def test_batch_matches_single(self):
        model = tiny_model()
        batch = [[1], [2, 3, 4, 5, 6, 7], [8, 1, 2]]
        preds = predict_batch(model, batch)
        for ids, pred in zip(batch, preds):
            assert predict_cnn(model, ids) == pred


class TestLoss:
    def test_zero_logits_one_positive(self):
        logits = np.zeros(N_LABELS)
        gold = LabelSet.from_codes(["TREA"])
        assert loss(logits, gold, 0.25) == pytest.approx(3.5 * math.log(2), abs=1e-12)

    def test_alpha_one_symmetric(self):
        rng = np.random.default_rng(3)
        logits = rng.normal(size=N_LABELS)
        gold = LabelSet.from_codes(["DIAG", "NUTR"])
        y = np.array([1.0 if code in gold else -1.0 for code in LABELS])
        expected = float(np.sum(np.logaddexp(0.0, -y * logits)))
        assert loss(logits, gold, 1.0) == pytest.approx(expected, abs=1e-12)

    def test_confident_correct_loss_vanishes(self):
        logits = np.full(N_LABELS, -40.0)
        logits[LABELS.index("HSYS")] = 40.0
        assert loss(logits, LabelSet.from_codes(["HSYS"]), 0.25) < 1e-12

    def test_nonnegative(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            logits = rng.normal(size=N_LABELS) * 3
            gold = LabelSet.from_codes(["PERS"])
            assert loss(logits, gold, 0.25) >= 0.0


class TestGradient:
    def _fd_check(self, model, batch, array, analytic, h=1e-6, rtol=1e-4):
        flat = array.ravel()
        ga = np.asarray(analytic).ravel()
        idx = np.arange(flat.size)
        for j in idx:
            orig = flat[j]
            flat[j] = orig + h
            up = batch_loss(model, batch)
            flat[j] = orig - h
            down = batch_loss(model, batch)
            flat[j] = orig
            fd = (up - down) / (2 * h)
            assert abs(ga[j] - fd) / (abs(ga[j]) + 1e-8) < rtol, (j, ga[j], fd)

    def test_all_parameter_classes_match_fd(self):
        model = tiny_model(seed=2, fine_tune=True)
        batch = tiny_batch(seed=3)
        grads = gradient(model, batch)
        for wi in range(len(model.filters)):
            self._fd_check(model, batch, model.filters[wi], grads.filters[wi])
            self._fd_check(model, batch, model.filter_biases[wi], grads.filter_biases[wi])
        self._fd_check(model, batch, model.out_weights, grads.out_weights)
        self._fd_check(model, batch, model.out_biases, grads.out_biases)
        self._fd_check(model, batch, model.embeddings, grads.embeddings)

    def test_frozen_embeddings_have_no_gradient(self):
        model = tiny_model(seed=4, fine_tune=False)
        grads = gradient(model, tiny_batch(seed=5))
        assert grads.embeddings is None

    def test_gradient_near_zero_at_perfect_fit(self):
        model = tiny_model(seed=6)
        # saturate: all logits pushed to the gold sign with huge biases
        for i in range(len(model.filters)):
            model.filters[i][:] = 0.0
            model.filter_biases[i][:] = 0.0
        model.out_weights[:] = 0.0
        gold = LabelSet.from_codes(["ALTR"])
        model.out_biases = np.array([60.0, -60.0, -60.0])
        grads = gradient(model, [([1, 2], gold)])
        assert grads.loss < 1e-12
        for arr in [grads.out_weights, grads.out_biases] + grads.filters:
            assert np.max(np.abs(arr)) < 1e-6

    def test_never_selected_filter_gets_zero_gradient(self):
        model = tiny_model(seed=7)
        batch = tiny_batch(seed=8, n=2)
        # force filter 0 of width 2 to never win: huge negative bias
        model.filter_biases[0][0] = -100.0
        grads = gradient(model, batch)
        assert np.allclose(grads.filters[0][0], 0.0)
        assert grads.filter_biases[0][0] == 0.0

    def test_empty_batch_rejected(self):
        with pytest.raises(ValueError):
            gradient(tiny_model(), [])

    def test_loss_decreases_under_line_search(self):
        # some sufficiently small full-batch step must strictly decrease
        # the loss; the first step that does must already be found early
        model = tiny_model(seed=9)
        batch = tiny_batch(seed=10)
        before = batch_loss(model, batch)
        grads = gradient(model, batch)

        def stepped(step):
            import copy

            trial = copy.deepcopy(model)
            for wi in range(len(trial.filters)):
                trial.filters[wi] -= step * grads.filters[wi]
                trial.filter_biases[wi] -= step * grads.filter_biases[wi]
            trial.out_weights -= step * grads.out_weights
            trial.out_biases -= step * grads.out_biases
            return batch_loss(trial, batch)

        steps = [10 ** (-k) for k in range(0, 7)]
        losses = [stepped(s) for s in steps]
        assert any(l < before for l in losses)
        # and for small enough steps the decrease is monotone in step order
        assert losses[-1] < before
        assert losses[-2] < before


class TestTraining:
    def test_epochs_zero_returns_initialized_model(self):
        config = CnnConfig(dim=4, hidden=6, filter_widths=(2, 3), epochs=0, seed=3, n_labels=3)
        rng = np.random.default_rng(11)
        emb = rng.normal(size=(5, 4))
        dataset = [([1, 2], LabelSet.from_codes(["ALTR"]))]
        model = train_cnn(dataset, config, emb)
        fresh = init_model(config, emb)
        for a, b in zip(model.filters, fresh.filters):
            assert np.array_equal(a, b)
        assert np.array_equal(model.out_weights, fresh.out_weights)

    def test_deterministic(self):
        items = keyword_benchmark(n_sentences=60, noise=0.0, seed=1)
        vocab_tokens = sorted({t for s in items for t in s.tokens})
        tok_id = {t: i + 1 for i, t in enumerate(vocab_tokens)}
        dataset = [([tok_id[t] for t in s.tokens], s.gold) for s in items]
        rng = np.random.default_rng(13)
        emb = rng.normal(0, 0.3, size=(len(tok_id) + 1, 16))
        config = CnnConfig(
            dim=16, hidden=12, filter_widths=(2, 3), epochs=2, batch_size=8, seed=5
        )
        m1 = train_cnn(dataset, config, emb)
        m2 = train_cnn(dataset, config, emb)
        for a, b in zip(m1.filters, m2.filters):
            assert np.array_equal(a, b)
        assert np.array_equal(m1.out_weights, m2.out_weights)

    @pytest.mark.filterwarnings("ignore:overflow:RuntimeWarning")
    def test_divergence_aborts(self):
        # conflicting golds on identical inputs keep gradients alive; with
        # fine-tuned embeddings and an absurd step the loop explodes
        dataset = [
            ([1, 2], LabelSet.from_codes(["ALTR"])),
            ([1, 2], LabelSet.from_codes(["DAIL"])),
        ] * 4
        config = CnnConfig(
            dim=4, hidden=6, filter_widths=(2, 3), epochs=80, seed=3,
            learning_rate=1e8, n_labels=3, fine_tune_embeddings=True,
        )
        rng = np.random.default_rng(17)
        emb = rng.normal(size=(5, 4))
        with pytest.raises(TrainingError):
            train_cnn(dataset, config, emb)

    def test_learns_keyword_corpus(self):
        items = keyword_benchmark(n_sentences=2000, noise=0.0, seed=21)
        vocab_tokens = sorted({t for s in items for t in s.tokens})
        tok_id = {t: i + 1 for i, t in enumerate(vocab_tokens)}
        dataset = [([tok_id[t] for t in s.tokens], s.gold) for s in items]
        emb = np.eye(len(tok_id) + 1)
        config = CnnConfig(
            dim=emb.shape[1], hidden=64, filter_widths=(2, 3), epochs=20,
            learning_rate=0.5, batch_size=16, seed=7,
        )
        train, test = dataset[:1500], dataset[1500:]
        model = train_cnn(train, config, emb)
        tp = fp = fn = 0
        for ids, gold in test:
            pred = predict_cnn(model, ids)
            tp += len(pred & gold)
            fp += len(pred - gold)
            fn += len(gold - pred)
        p = tp / (tp + fp)
        r = tp / (tp + fn)
        f = 2 * p * r / (p + r)
        assert f >= 0.95, f


class TestPredict:
    def test_plain_threshold(self):
        model = tiny_model()
        logits = np.array([3.0, -3.0, -1.0])
        from ohc_topics.cnn import _decide

        assert _decide(logits) == LabelSet.from_codes(["ALTR"])

    def test_fallback_argmax(self):
        from ohc_topics.cnn import _decide

        assert _decide(np.array([-5.0, -4.0, -6.0])) == LabelSet.from_codes(["DAIL"])

    def test_two_positive(self):
        from ohc_topics.cnn import _decide

        assert _decide(np.array([2.0, 2.0, -2.0])) == LabelSet.from_codes(["ALTR", "DAIL"])

    def test_sigmoid_half_equals_sign_rule(self):
        rng = np.random.default_rng(29)
        from ohc_topics.cnn import _decide

        for _ in range(50):
            logits = rng.normal(size=N_LABELS)
            by_sign = {i for i in range(N_LABELS) if logits[i] >= 0}
            by_sigmoid = {i for i in range(N_LABELS) if 1 / (1 + np.exp(-logits[i])) >= 0.5}
            assert by_sign == by_sigmoid
            got = _decide(logits)
            expect = by_sign or {int(np.argmax(logits))}
            assert set(got.indices()) == expect


class TestModelInvariants:
    def test_parameter_count(self):
        model = tiny_model()
        expected = 3 * (2 * 4 + 1) + 3 * (3 * 4 + 1) + 3 * 6 + 3
        assert model.parameter_count == expected

    def test_spec_architecture_count(self):
        config = CnnConfig(seed=1)
        emb = np.zeros((4, 100))
        model = init_model(config, emb)
        conv = 267 * (3 * 100 + 1) + 267 * (4 * 100 + 1) + 266 * (5 * 100 + 1)
        assert model.parameter_count == conv + 11 * 800 + 11


class TestSerialization:
    def test_round_trip_frozen(self, tmp_path):
        model = tiny_model(seed=31)
        p1 = tmp_path / "m.model"
        save_cnn(model, p1)
        again = load_cnn(p1, embeddings=model.embeddings)
        logits_a, _ = forward(model, [1, 2, 3])
        logits_b, _ = forward(again, [1, 2, 3])
        assert np.allclose(logits_a, logits_b, atol=1e-8)
        save_cnn(again, tmp_path / "m2.model")
        assert p1.read_bytes() == (tmp_path / "m2.model").read_bytes()

    def test_frozen_requires_embeddings(self, tmp_path):
        model = tiny_model(seed=37)
        save_cnn(model, tmp_path / "m.model")
        with pytest.raises(ValueError, match="frozen"):
            load_cnn(tmp_path / "m.model")

    def test_round_trip_fine_tuned_includes_embeddings(self, tmp_path):
        model = tiny_model(seed=41, fine_tune=True)
        save_cnn(model, tmp_path / "m.model")
        again = load_cnn(tmp_path / "m.model")
        assert np.allclose(again.embeddings, model.embeddings, atol=1e-8)
