"""Post-level label aggregation and corpus-wide topic analytics.

A post carries a topic iff strictly more than 1/10 of its sentences do
(integer comparison, so the 1/10 boundary is exact); MISC is only the
fallback when nothing qualifies and never votes toward the threshold.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from ohc_topics.corpus import CancerStage, Corpus
from ohc_topics.schema import LABELS, MISC, LabelSet

log = logging.getLogger(__name__)

STAGES = (
    CancerStage.Stage0,
    CancerStage.StageI,
    CancerStage.StageII,
    CancerStage.StageIII,
    CancerStage.StageIV,
)


@dataclass(frozen=True)
class PostLabels:
    post_id: str
    labels: LabelSet
    sentence_count: int
    counts: dict[str, int]  # per-label sentence counts, MISC included

    def __hash__(self):
        return hash(self.post_id)


def aggregate_post_labels(post_id: str, sentence_labels: list[LabelSet]) -> PostLabels:
    """Aggregate one post's sentence label sets by the strict >1/10 rule."""
    n = len(sentence_labels)
    if n == 0:
        raise ValueError(f"post {post_id} has no sentences")
    counts = {code: 0 for code in LABELS}
    for labels in sentence_labels:
        for code in labels:
            counts[code] += 1
    mask = 0
    for i, code in enumerate(LABELS):
        if code == MISC:
            continue
        if counts[code] * 10 > n:
            mask |= 1 << i
    post_set = LabelSet(mask) if mask else LabelSet.from_codes([MISC])
    return PostLabels(post_id=post_id, labels=post_set, sentence_count=n, counts=counts)


def prevalence(post_labels: list[PostLabels]) -> dict[str, float]:
    """Percent of posts carrying each topic (a post counts once per topic)."""
    total = len(post_labels)
    if total == 0:
        return {code: 0.0 for code in LABELS}
    return {
        code: 100.0 * sum(1 for pl in post_labels if code in pl.labels) / total
        for code in LABELS
    }


@dataclass
class StageRow:
    stage: CancerStage
    n_posts: int
    percent: dict[str, float]


def stratify_by_stage(corpus: Corpus, post_labels: list[PostLabels]) -> list[StageRow]:
    """Per-stage topic prevalence; posts by Unknown-stage authors excluded."""
    by_stage: dict[CancerStage, list[PostLabels]] = {s: [] for s in STAGES}
    for pl in post_labels:
        post = corpus.post(pl.post_id)
        info = corpus.authors.get(post.author_id)
        if info is None or info.stage is CancerStage.Unknown:
            continue
        by_stage[info.stage].append(pl)
    if all(not posts for posts in by_stage.values()):
        log.warning("no posts by stage-known authors; stage table is empty")
    return [
        StageRow(stage=s, n_posts=len(by_stage[s]), percent=prevalence(by_stage[s]))
        for s in STAGES
        if by_stage[s]
    ]


TRAJECTORY_UNITS = ("post", "day", "week")


@dataclass
class TrajectoryBin:
    index: int
    n_posts: int
    frequency: dict[str, float | None]  # None marks bins with no posts


@dataclass
class TrajectorySeries:
    unit: str
    bins: list[TrajectoryBin]


def trajectory(corpus: Corpus, post_labels: list[PostLabels], unit: str) -> TrajectorySeries:
    """Average per-bin topic frequency over all posts, pooled across authors.

    Bin index per author: post ordinal, whole days since first activity,
    or whole weeks. Empty bins are emitted with count 0 so the axis
    stays dense for plotting.
    """
    if unit not in TRAJECTORY_UNITS:
        raise ValueError(f"unit must be one of {TRAJECTORY_UNITS}")
    labels_of = {pl.post_id: pl for pl in post_labels}
    by_author: dict[str, list] = {}
    for pl in post_labels:
        post = corpus.post(pl.post_id)
        by_author.setdefault(post.author_id, []).append(post)

    bin_posts: dict[int, int] = {}
    bin_topic: dict[int, dict[str, int]] = {}
    for author_id, posts in by_author.items():
        posts.sort(key=lambda p: (p.created_at, p.post_id))
        first = corpus.authors[author_id].first_activity
        for ordinal, post in enumerate(posts):
            if unit == "post":
                b = ordinal
            else:
                days = (post.created_at - first) // 86400
                b = int(days) if unit == "day" else int(days // 7)
            bin_posts[b] = bin_posts.get(b, 0) + 1
            topics = bin_topic.setdefault(b, {code: 0 for code in LABELS})
            for code in labels_of[post.post_id].labels:
                topics[code] += 1

    if not bin_posts:
        return TrajectorySeries(unit=unit, bins=[])
    bins = []
    for b in range(max(bin_posts) + 1):
        n = bin_posts.get(b, 0)
        if n == 0:
            freq: dict[str, float | None] = {code: None for code in LABELS}
        else:
            topics = bin_topic[b]
            freq = {code: topics[code] / n for code in LABELS}
        bins.append(TrajectoryBin(index=b, n_posts=n, frequency=freq))
    return TrajectorySeries(unit=unit, bins=bins)


def _fmt(x: float) -> str:
    return format(x, ".9g")


def prevalence_csv(prev: dict[str, float]) -> str:
    lines = ["topic,percent"]
    for code in LABELS:
        lines.append(f"{code},{_fmt(prev[code])}")
    return "\n".join(lines) + "\n"


def stage_csv(rows: list[StageRow]) -> str:
    lines = ["stage,topic,percent,n_posts"]
    for row in rows:
        for code in LABELS:
            lines.append(f"{row.stage.value},{code},{_fmt(row.percent[code])},{row.n_posts}")
    return "\n".join(lines) + "\n"


def trajectory_csv(series: TrajectorySeries) -> str:
    lines = ["bin,topic,frequency,n_posts"]
    for b in series.bins:
        for code in LABELS:
            value = "" if b.frequency[code] is None else _fmt(b.frequency[code])
            lines.append(f"{b.index},{code},{value},{b.n_posts}")
    return "\n".join(lines) + "\n"


def long_csv(section: str, rows: list[tuple[str, str, float | None, int]]) -> str:
    """Plot-ready long format: section,group,topic,value,n_posts."""
    lines = ["section,group,topic,value,n_posts"]
    for group, code, value, n in rows:
        cell = "" if value is None else _fmt(value)
        lines.append(f"{section},{group},{code},{cell},{n}")
    return "\n".join(lines) + "\n"
