"""Synthetic corpora with known structure, for benchmarks and tests.

Three generators: a keyword-triggered labeled corpus (separable up to
controlled distractor noise), a planted topic-model corpus with known
word distributions, and a small fixture forum in the raw ingestion
format with gold sentence labels known by construction.
"""

from __future__ import annotations

import json
import random

import numpy as np

from ohc_topics.evaluation import LabeledSentence
from ohc_topics.schema import LABELS, MISC, LabelSet

# stem-level trigger vocabularies, one disjoint block per topic
KEYWORDS = {
    "ALTR": ["acupunctur", "homeopathi", "medit", "herbal", "yoga"],
    "DAIL": ["sleep", "errand", "laundri", "garden", "commut"],
    "DIAG": ["tumor", "carcinoma", "grade", "diagnos", "margin"],
    "FIND": ["pain", "fatigu", "nausea", "swell", "numb"],
    "HSYS": ["oncologist", "hospit", "insur", "nurs", "clinic"],
    "MISC": ["hug", "bless", "congratul", "welcom", "greet"],
    "NUTR": ["diet", "vitamin", "protein", "smoothi", "kale"],
    "PERS": ["husband", "daughter", "famili", "retir", "grandkid"],
    "RSRC": ["websit", "articl", "link", "blog", "pamphlet"],
    "TEST": ["mammogram", "ultrasound", "biopsi", "scan", "bloodwork"],
    "TREA": ["chemo", "radiat", "tamoxifen", "herceptin", "mastectomi"],
}

FILLER = [
    "week", "time", "felt", "start", "month", "year", "told", "went",
    "look", "found", "share", "post", "ladi", "everyon", "today", "morn",
]


def keyword_benchmark(
    n_sentences: int = 2000,
    noise: float = 0.10,
    seed: int = 0,
    sentences_per_post: int = 4,
) -> list[LabeledSentence]:
    """Keyword-triggered multi-label corpus.

    Each sentence carries 1-2 topics and emits 2-3 trigger stems per
    topic plus filler; a `noise` fraction of sentences also contains one
    distractor stem from a non-gold topic.
    """
    rng = random.Random(seed)
    items = []
    for i in range(n_sentences):
        k = 1 if rng.random() < 0.7 else 2
        topics = rng.sample(LABELS, k)
        tokens: list[str] = []
        for topic in topics:
            tokens.extend(rng.sample(KEYWORDS[topic], rng.randint(2, 3)))
        tokens.extend(rng.choices(FILLER, k=rng.randint(2, 4)))
        if rng.random() < noise:
            others = [t for t in LABELS if t not in topics]
            tokens.append(rng.choice(KEYWORDS[rng.choice(others)]))
        rng.shuffle(tokens)
        post_id = f"p{i // sentences_per_post:05d}"
        items.append(
            LabeledSentence(
                post_id=post_id,
                sentence_id=f"{post_id}:{i % sentences_per_post}",
                tokens=tuple(tokens),
                gold=LabelSet.from_codes(topics),
            )
        )
    return items


def planted_llda_corpus(
    n_topics: int = 4,
    n_docs: int = 500,
    seed: int = 0,
    own_words: int = 15,
    shared_words: int = 10,
    doc_len: tuple[int, int] = (8, 14),
):
    """Corpus drawn from known per-topic word distributions.

    Topic k owns a block of `own_words` ids carrying 0.9 of its mass;
    0.1 spreads uniformly over a shared block. Id 0 is reserved (UNK).
    Returns (docs, phi, n_vocab) with docs as (token_ids, LabelSet).
    """
    n_vocab = 1 + n_topics * own_words + shared_words
    phi = np.zeros((n_topics, n_vocab))
    for k in range(n_topics):
        start = 1 + k * own_words
        phi[k, start : start + own_words] = 0.9 / own_words
        phi[k, 1 + n_topics * own_words :] = 0.1 / shared_words
    rng = np.random.default_rng(seed)
    docs = []
    for _ in range(n_docs):
        k_labels = 1 if rng.random() < 0.7 else 2
        topics = sorted(rng.choice(n_topics, size=k_labels, replace=False).tolist())
        length = int(rng.integers(doc_len[0], doc_len[1] + 1))
        mix = phi[topics].mean(axis=0)
        ids = rng.choice(n_vocab, size=length, p=mix).tolist()
        docs.append((ids, LabelSet.from_codes([LABELS[t] for t in topics])))
    return docs, phi, n_vocab


# surface-level sentence material for the fixture forum
SURFACE = {
    "ALTR": ["acupuncture", "meditation", "herbal tea", "yoga class"],
    "DAIL": ["sleeping better", "running errands", "doing laundry", "gardening again"],
    "DIAG": ["the tumor was small", "grade two carcinoma", "clear margins", "diagnosed in spring"],
    "FIND": ["sharp pain", "constant fatigue", "some nausea", "numb fingers"],
    "HSYS": ["my oncologist", "the hospital staff", "an insurance claim", "the clinic"],
    "MISC": ["hugs to all", "many blessings", "welcome aboard", "congratulations dear"],
    "NUTR": ["a kale smoothie", "more protein", "vitamin pills", "a strict diet"],
    "PERS": ["my husband", "our daughter", "the whole family", "being retired"],
    "RSRC": ["this website", "a helpful article", "the blog post", "a pamphlet"],
    "TEST": ["another mammogram", "an ultrasound", "the biopsy", "a bone scan"],
    "TREA": ["weekly chemo", "daily radiation", "tamoxifen pills", "the mastectomy"],
}

_TEMPLATES = [
    "I wanted to mention {a} this week.",
    "We talked about {a} yesterday.",
    "Honestly {a} made a difference.",
    "They asked about {a} and {b} today.",
    "Between {a} and {b} it was a long month.",
]

_SIGNATURES = [
    "Dx 3/2010, Stage IIA, ER+",
    "stage iv since 2012",
    "Stage I survivor",
    "Stage 0 DCIS, lumpectomy",
    "Stage IIIB, mom of two",
    None,
]


def fixture_forum(
    n_authors: int = 12,
    posts_per_author: int = 8,
    seed: int = 0,
    annotated_fraction: float = 0.75,
):
    """Small raw forum (ingestion JSONL lines) plus gold sentence labels.

    Post texts are built from whole sentences with known topics, so the
    gold mapping sentence_id -> labels survives re-segmentation.
    Returns (jsonl_lines, gold) with gold as {sentence_id: [codes]}.
    """
    rng = random.Random(seed)
    lines = []
    gold: dict[str, list[str]] = {}
    base = 1420070400  # 2015-01-01T00:00:00Z
    post_counter = 0
    n_posts_total = n_authors * posts_per_author
    n_annotated = int(n_posts_total * annotated_fraction)
    for a in range(n_authors):
        author = f"user{a:03d}"
        signature = _SIGNATURES[a % len(_SIGNATURES)]
        for p in range(posts_per_author):
            post_id = f"post{post_counter:05d}"
            n_sent = rng.randint(2, 5)
            sentence_texts = []
            for s in range(n_sent):
                if rng.random() < 0.25:
                    topics = [MISC]
                else:
                    k = 1 if rng.random() < 0.8 else 2
                    topics = rng.sample([t for t in LABELS if t != MISC], k)
                phrases = [rng.choice(SURFACE[t]) for t in topics]
                if len(phrases) == 1:
                    template = rng.choice(_TEMPLATES[:3])
                    text = template.format(a=phrases[0])
                else:
                    template = rng.choice(_TEMPLATES[3:])
                    text = template.format(a=phrases[0], b=phrases[1])
                sentence_texts.append(text)
                if post_counter < n_annotated:
                    gold[f"{post_id}:{s}"] = sorted(topics)
            created = base + a * 86400 * rng.randint(0, 20) + p * 86400 * rng.randint(1, 9)
            record = {
                "post_id": post_id,
                "thread_id": f"thread{a % 5}",
                "forum_id": f"forum{a % 3}",
                "author_id": author,
                "created_at": _iso(created),
                "text": " ".join(sentence_texts),
            }
            if signature is not None:
                record["signature"] = signature
            lines.append(json.dumps(record))
            post_counter += 1
    return lines, gold


def _iso(epoch: int) -> str:
    import datetime as dt

    return dt.datetime.fromtimestamp(epoch, tz=dt.timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%SZ"
    )


def random_labelsets(n: int, seed: int, allow_empty: bool = False) -> list[LabelSet]:
    """Random label sets; gold-style sets always carry at least one label."""
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        k = rng.randint(0 if allow_empty else 1, 3)
        out.append(LabelSet.from_codes(rng.sample(LABELS, k)) if k else LabelSet(0))
    return out
