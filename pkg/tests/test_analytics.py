import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ohc_topics.analytics import (
    aggregate_post_labels,
    prevalence,
    prevalence_csv,
    stage_csv,
    stratify_by_stage,
    trajectory,
    trajectory_csv,
)
from ohc_topics.corpus import CancerStage, ingest_posts
from ohc_topics.schema import LABELS, MISC, LabelSet
from ohc_topics.synth import random_labelsets


def aggregate_oracle(sentence_labels):
    """Brute-force restatement of the >1/10 rule with MISC default."""
    n = len(sentence_labels)
    chosen = []
    for code in LABELS:
        if code == MISC:
            continue
        count = sum(1 for labels in sentence_labels if code in labels)
        if count / n > 1 / 10 + 1e-15 or count * 10 > n:  # exact integer rule
            chosen.append(code)
    return set(chosen) if chosen else {MISC}


class TestAggregate:
    def test_two_of_ten(self):
        sets = [LabelSet.from_codes(["TREA"])] * 2 + [LabelSet.from_codes([MISC])] * 8
        assert aggregate_post_labels("p", sets).labels == LabelSet.from_codes(["TREA"])

    def test_exactly_one_tenth_is_not_enough(self):
        codes = [c for c in LABELS if c != MISC][:10]
        sets = [LabelSet.from_codes([c]) for c in codes]
        assert aggregate_post_labels("p", sets).labels == LabelSet.from_codes([MISC])

    def test_one_of_nine(self):
        sets = [LabelSet.from_codes(["DIAG"])] + [LabelSet.from_codes([MISC])] * 8
        assert aggregate_post_labels("p", sets).labels == LabelSet.from_codes(["DIAG"])

    def test_zero_sentences_error(self):
        with pytest.raises(ValueError):
            aggregate_post_labels("p", [])

    def test_misc_votes_ignored(self):
        # MISC on many sentences never produces a MISC label while
        # another topic qualifies
        sets = [LabelSet.from_codes([MISC])] * 8 + [LabelSet.from_codes(["NUTR"])] * 2
        assert aggregate_post_labels("p", sets).labels == LabelSet.from_codes(["NUTR"])

    def test_duplication_invariance(self):
        sets = random_labelsets(7, seed=1)
        once = aggregate_post_labels("p", sets)
        doubled = aggregate_post_labels("p", sets + sets)
        assert once.labels == doubled.labels

    @given(st.integers(0, 10_000))
    def test_matches_brute_force(self, seed):
        rng = random.Random(seed)
        n = rng.randint(1, 25)
        sets = random_labelsets(n, seed=seed)
        got = aggregate_post_labels("p", sets)
        assert set(got.labels.codes()) == aggregate_oracle(sets)
        assert got.sentence_count == n


class TestPrevalence:
    def test_counting(self):
        pls = [
            aggregate_post_labels(f"p{i}", [LabelSet.from_codes(codes)])
            for i, codes in enumerate([["TREA"], ["TREA"], ["PERS"], ["PERS", "TREA"]])
        ]
        prev = prevalence(pls)
        assert prev["TREA"] == pytest.approx(75.0)
        assert prev["PERS"] == pytest.approx(50.0)

    def test_empty(self):
        prev = prevalence([])
        assert all(v == 0.0 for v in prev.values())

    def test_bounds(self):
        pls = [
            aggregate_post_labels(f"p{i}", random_labelsets(5, seed=i))
            for i in range(30)
        ]
        prev = prevalence(pls)
        for code in LABELS:
            assert 0.0 <= prev[code] <= 100.0

    def test_csv_shape(self):
        prev = prevalence([])
        lines = prevalence_csv(prev).strip().split("\n")
        assert lines[0] == "topic,percent"
        assert len(lines) == 1 + len(LABELS)


def make_corpus(posts):
    """posts: list of (post_id, author, created_iso, signature, n_sentences)."""
    lines = []
    for post_id, author, created, signature, n in posts:
        text = " ".join(["This is fine."] * n)
        rec = {
            "post_id": post_id,
            "thread_id": "t",
            "forum_id": "f",
            "author_id": author,
            "created_at": created,
            "text": text,
        }
        if signature:
            rec["signature"] = signature
        lines.append(json.dumps(rec))
    return ingest_posts(lines)


def labels_for(corpus, mapping):
    out = []
    for post in corpus.posts:
        sets = [LabelSet.from_codes(mapping[post.post_id])] * len(
            corpus.sentences_of(post.post_id)
        )
        out.append(aggregate_post_labels(post.post_id, sets))
    return out


class TestStage:
    def test_unknown_excluded(self):
        corpus = make_corpus(
            [
                ("p1", "a1", "2015-01-01T00:00:00Z", "Stage IV", 2),
                ("p2", "a1", "2015-01-02T00:00:00Z", "Stage IV", 2),
                ("p3", "a2", "2015-01-01T00:00:00Z", None, 2),
            ]
        )
        pls = labels_for(corpus, {"p1": ["PERS"], "p2": ["PERS"], "p3": ["TREA"]})
        rows = stratify_by_stage(corpus, pls)
        assert len(rows) == 1
        assert rows[0].stage is CancerStage.StageIV
        assert rows[0].n_posts == 2
        assert rows[0].percent["PERS"] == pytest.approx(100.0)
        assert rows[0].percent["TREA"] == 0.0

    def test_all_unknown_empty_table(self, caplog):
        corpus = make_corpus([("p1", "a1", "2015-01-01T00:00:00Z", None, 1)])
        pls = labels_for(corpus, {"p1": ["TREA"]})
        import logging

        with caplog.at_level(logging.WARNING):
            rows = stratify_by_stage(corpus, pls)
        assert rows == []
        assert any("stage" in r.message for r in caplog.records)

    def test_partition_sizes(self):
        posts = []
        stages = ["Stage I", "Stage I", "Stage II", "Stage IIIA", None]
        for a, sig in enumerate(stages):
            for p in range(a + 1):
                posts.append((f"p{a}_{p}", f"a{a}", "2015-01-01T00:00:00Z", sig, 1))
        corpus = make_corpus(posts)
        pls = labels_for(corpus, {p.post_id: ["DAIL"] for p in corpus.posts})
        rows = stratify_by_stage(corpus, pls)
        known_posts = sum(r.n_posts for r in rows)
        assert known_posts == 1 + 2 + 3 + 4  # author a4 has no stage
        csv = stage_csv(rows)
        assert csv.startswith("stage,topic,percent,n_posts")


class TestTrajectory:
    def fixture(self):
        # two authors; author A posts on days 0 and 13, author B on day 0
        corpus = make_corpus(
            [
                ("a1", "alice", "2015-01-01T00:00:00Z", None, 1),
                ("a2", "alice", "2015-01-14T00:00:00Z", None, 1),
                ("b1", "bob", "2015-03-05T12:00:00Z", None, 1),
            ]
        )
        pls = labels_for(
            corpus, {"a1": ["DIAG"], "a2": ["PERS"], "b1": ["PERS", "DIAG"]}
        )
        return corpus, pls

    def test_week_binning(self):
        corpus, pls = self.fixture()
        series = trajectory(corpus, pls, "week")
        assert [b.index for b in series.bins] == [0, 1]
        week0, week1 = series.bins
        # week 0 pools alice's day-0 post and bob's only post
        assert week0.n_posts == 2
        assert week0.frequency["DIAG"] == pytest.approx(1.0)
        assert week0.frequency["PERS"] == pytest.approx(0.5)
        assert week1.n_posts == 1
        assert week1.frequency["PERS"] == pytest.approx(1.0)
        assert week1.frequency["DIAG"] == 0.0

    def test_day_binning_has_dense_axis(self):
        corpus, pls = self.fixture()
        series = trajectory(corpus, pls, "day")
        assert [b.index for b in series.bins] == list(range(14))
        assert series.bins[0].n_posts == 2
        assert series.bins[13].n_posts == 1
        for b in series.bins[1:13]:
            assert b.n_posts == 0
            assert all(v is None for v in b.frequency.values())

    def test_post_binning(self):
        corpus, pls = self.fixture()
        series = trajectory(corpus, pls, "post")
        assert series.bins[0].n_posts == 2  # both authors' first posts
        assert series.bins[1].n_posts == 1
        assert series.bins[0].frequency["DIAG"] == pytest.approx(1.0)
        assert series.bins[0].frequency["PERS"] == pytest.approx(0.5)

    def test_frequencies_bounded(self):
        corpus, pls = self.fixture()
        for unit in ("post", "day", "week"):
            series = trajectory(corpus, pls, unit)
            total_posts = sum(b.n_posts for b in series.bins)
            assert total_posts == len(pls)
            for b in series.bins:
                for v in b.frequency.values():
                    assert v is None or 0.0 <= v <= 1.0

    def test_bad_unit(self):
        corpus, pls = self.fixture()
        with pytest.raises(ValueError):
            trajectory(corpus, pls, "month")

    def test_csv_empty_cell_for_empty_bins(self):
        corpus, pls = self.fixture()
        csv = trajectory_csv(trajectory(corpus, pls, "day"))
        line_for_bin1 = [l for l in csv.split("\n") if l.startswith("1,ALTR")][0]
        assert line_for_bin1 == "1,ALTR,,0"
