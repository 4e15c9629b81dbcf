"""Forum corpus: post records, sentence segmentation, author stage extraction.

Ingestion reads line-delimited JSON post records, substitutes emoticons
with EMO_* codes, segments sentences with a rule-based splitter, and
indexes authors (first activity, self-reported cancer stage parsed from
signatures). The resulting Corpus is immutable by convention and safe to
share read-only.
"""

from __future__ import annotations

import datetime as _dt
import enum
import json
import logging
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Iterator

log = logging.getLogger(__name__)

_TERMINALS = ".!?"
_CLOSERS = "\"')]"


def _load_data_lines(name: str) -> list[str]:
    text = resources.files("ohc_topics.data").joinpath(name).read_text("utf-8")
    return [line.strip() for line in text.splitlines() if line.strip()]


def load_abbreviations() -> frozenset[str]:
    """Lowercase abbreviations, each including its trailing period."""
    return frozenset(_load_data_lines("abbreviations.txt"))


def load_emoticons() -> list[tuple[str, str]]:
    """(surface, code) pairs, longest surfaces first so they match eagerly."""
    pairs = []
    for line in _load_data_lines("emoticons.tsv"):
        surface, code = line.split("\t")
        pairs.append((surface, code))
    pairs.sort(key=lambda p: -len(p[0]))
    return pairs


_ABBREVIATIONS = load_abbreviations()
_EMOTICONS = load_emoticons()
# the lookahead keeps ':/' inside URLs and similar runs intact
_EMOTICON_RE = re.compile(
    "(?:" + "|".join(re.escape(surface) for surface, _ in _EMOTICONS) + ")(?![A-Za-z0-9/])"
)
_EMOTICON_CODE = {surface: code for surface, code in _EMOTICONS}


def substitute_emoticons(text: str) -> str:
    """Replace emoticon surfaces with EMO_POS / EMO_NEG / EMO_OTHER codes."""
    return _EMOTICON_RE.sub(lambda m: " %s " % _EMOTICON_CODE[m.group(0)], text)


class CancerStage(enum.Enum):
    Stage0 = "0"
    StageI = "I"
    StageII = "II"
    StageIII = "III"
    StageIV = "IV"
    Unknown = "Unknown"


_STAGE_RE = re.compile(r"stage[\s:=-]*(0|iv|iii|ii|i)([a-c])?\b", re.IGNORECASE)
_STAGE_OF = {
    "0": CancerStage.Stage0,
    "i": CancerStage.StageI,
    "ii": CancerStage.StageII,
    "iii": CancerStage.StageIII,
    "iv": CancerStage.StageIV,
}


def parse_stage(signature: str | None) -> CancerStage:
    """First case-insensitive 'stage {0,I..IV}' match; sub-stages collapse."""
    if not signature:
        return CancerStage.Unknown
    m = _STAGE_RE.search(signature)
    if m is None:
        return CancerStage.Unknown
    return _STAGE_OF[m.group(1).lower()]


def split_sentences(text: str, abbreviations: frozenset[str] | None = None) -> list[str]:
    """Rule-based sentence segmentation.

    A boundary is a run of {., !, ?} (plus closing quotes/brackets)
    followed by whitespace and an uppercase letter or digit. A period
    whose preceding token is a known abbreviation does not split.
    """
    abbrevs = _ABBREVIATIONS if abbreviations is None else abbreviations
    if not text or text.isspace():
        return []
    boundaries = []
    n = len(text)
    i = 0
    while i < n:
        ch = text[i]
        if ch not in _TERMINALS:
            i += 1
            continue
        # consume the full terminal+closer run
        j = i
        while j < n and text[j] in _TERMINALS + _CLOSERS:
            j += 1
        if j >= n:
            break
        if not text[j].isspace():
            i = j
            continue
        k = j
        while k < n and text[k].isspace():
            k += 1
        if k >= n or not (text[k].isupper() or text[k].isdigit()):
            i = j
            continue
        if ch == "." and _is_abbreviation(text, i, abbrevs):
            i = j
            continue
        boundaries.append(j)
        i = k
    spans = []
    start = 0
    for b in boundaries + [n]:
        chunk = text[start:b].strip()
        if chunk:
            spans.append(chunk)
        start = b
    return spans


def _is_abbreviation(text: str, period_at: int, abbrevs: frozenset[str]) -> bool:
    # token = maximal run of letters and internal periods ending here
    start = period_at
    while start > 0 and (text[start - 1].isalpha() or text[start - 1] == "."):
        start -= 1
    token = text[start : period_at + 1].lower()
    # strip leading periods picked up from an ellipsis
    token = token.lstrip(".")
    return token in abbrevs


@dataclass(frozen=True)
class Post:
    post_id: str
    thread_id: str
    forum_id: str
    author_id: str
    created_at: int  # unix epoch seconds, UTC
    text: str
    signature: str | None = None


@dataclass(frozen=True)
class Sentence:
    sentence_id: str
    post_id: str
    index: int
    text: str
    tokens: tuple[str, ...] | None = None  # filled by textprep, not persisted here


@dataclass(frozen=True)
class AuthorInfo:
    author_id: str
    first_activity: int
    stage: CancerStage


@dataclass
class IngestStats:
    records: int = 0
    malformed: int = 0
    duplicates: int = 0


@dataclass
class Corpus:
    posts: list[Post] = field(default_factory=list)
    sentences: list[Sentence] = field(default_factory=list)
    authors: dict[str, AuthorInfo] = field(default_factory=dict)
    stats: IngestStats = field(default_factory=IngestStats)

    def __post_init__(self):
        self._post_by_id = {p.post_id: p for p in self.posts}
        self._sentences_by_post: dict[str, list[Sentence]] = {}
        for s in self.sentences:
            self._sentences_by_post.setdefault(s.post_id, []).append(s)

    def post(self, post_id: str) -> Post:
        return self._post_by_id[post_id]

    def has_post(self, post_id: str) -> bool:
        return post_id in self._post_by_id

    def sentences_of(self, post_id: str) -> list[Sentence]:
        return self._sentences_by_post.get(post_id, [])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Corpus)
            and self.posts == other.posts
            and self.sentences == other.sentences
            and self.authors == other.authors
        )


class IngestError(Exception):
    pass


def parse_timestamp(value: str) -> int:
    """ISO-8601 timestamp to unix epoch seconds (naive values read as UTC)."""
    raw = value.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    dt = _dt.datetime.fromisoformat(raw)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=_dt.timezone.utc)
    return int(dt.timestamp())


def format_timestamp(epoch: int) -> str:
    dt = _dt.datetime.fromtimestamp(epoch, tz=_dt.timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


_REQUIRED_FIELDS = ("post_id", "thread_id", "forum_id", "author_id", "created_at", "text")


def ingest_posts(source: str | os.PathLike | Iterable[str]) -> Corpus:
    """Build a Corpus from line-delimited JSON post records.

    Malformed lines are counted and skipped; a duplicate post_id keeps the
    first record seen and counts a warning. An unreadable source raises
    IngestError.
    """
    if isinstance(source, (str, os.PathLike)):
        try:
            fh = open(source, encoding="utf-8")
        except OSError as exc:
            raise IngestError(f"cannot read {source}: {exc}") from exc
        with fh:
            return _ingest_lines(fh)
    return _ingest_lines(source)


def _ingest_lines(lines: Iterator[str]) -> Corpus:
    stats = IngestStats()
    posts: list[Post] = []
    seen: set[str] = set()
    for line in lines:
        if not line.strip():
            continue
        stats.records += 1
        try:
            rec = json.loads(line)
            if not isinstance(rec, dict):
                raise ValueError("record is not an object")
            for name in _REQUIRED_FIELDS:
                if name not in rec:
                    raise ValueError(f"missing field {name!r}")
            if rec["text"] is None:
                raise ValueError("text is null")
            post = Post(
                post_id=str(rec["post_id"]),
                thread_id=str(rec["thread_id"]),
                forum_id=str(rec["forum_id"]),
                author_id=str(rec["author_id"]),
                created_at=parse_timestamp(str(rec["created_at"])),
                text=substitute_emoticons(str(rec["text"])),
                signature=None if rec.get("signature") is None else str(rec["signature"]),
            )
        except (ValueError, TypeError, KeyError) as exc:
            stats.malformed += 1
            log.warning("skipping malformed record: %s", exc)
            continue
        if post.post_id in seen:
            stats.duplicates += 1
            log.warning("duplicate post_id %s rejected", post.post_id)
            continue
        seen.add(post.post_id)
        posts.append(post)

    sentences: list[Sentence] = []
    for post in posts:
        for idx, chunk in enumerate(split_sentences(post.text)):
            sentences.append(
                Sentence(
                    sentence_id=f"{post.post_id}:{idx}",
                    post_id=post.post_id,
                    index=idx,
                    text=chunk,
                )
            )

    authors: dict[str, AuthorInfo] = {}
    first_activity: dict[str, int] = {}
    stage_of: dict[str, CancerStage] = {}
    for post in posts:
        a = post.author_id
        if a not in first_activity or post.created_at < first_activity[a]:
            first_activity[a] = post.created_at
        # first parseable stage in record order wins
        if stage_of.get(a, CancerStage.Unknown) is CancerStage.Unknown:
            stage_of[a] = parse_stage(post.signature)
    for a in first_activity:
        authors[a] = AuthorInfo(a, first_activity[a], stage_of.get(a, CancerStage.Unknown))

    return Corpus(posts=posts, sentences=sentences, authors=authors, stats=stats)


def post_record(p: Post) -> dict:
    rec = {
        "post_id": p.post_id,
        "thread_id": p.thread_id,
        "forum_id": p.forum_id,
        "author_id": p.author_id,
        "created_at": format_timestamp(p.created_at),
        "text": p.text,
    }
    if p.signature is not None:
        rec["signature"] = p.signature
    return rec


def save_corpus(corpus: Corpus, out_dir: str | os.PathLike) -> None:
    """Write the archive: posts.jsonl, sentences.jsonl, authors.jsonl."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "posts.jsonl"), "w", encoding="utf-8") as fh:
        for p in corpus.posts:
            fh.write(json.dumps(post_record(p), ensure_ascii=False) + "\n")
    with open(os.path.join(out_dir, "sentences.jsonl"), "w", encoding="utf-8") as fh:
        for s in corpus.sentences:
            fh.write(
                json.dumps(
                    {
                        "sentence_id": s.sentence_id,
                        "post_id": s.post_id,
                        "index": s.index,
                        "text": s.text,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    with open(os.path.join(out_dir, "authors.jsonl"), "w", encoding="utf-8") as fh:
        for a in corpus.authors.values():
            fh.write(
                json.dumps(
                    {
                        "author_id": a.author_id,
                        "first_activity": format_timestamp(a.first_activity),
                        "stage": a.stage.value,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_corpus(archive_dir: str | os.PathLike) -> Corpus:
    """Re-ingest a saved archive from its posts.jsonl."""
    return ingest_posts(os.path.join(archive_dir, "posts.jsonl"))
