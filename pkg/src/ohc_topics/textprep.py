"""Tokenization, entity masking, stopword removal, and stemming.

The pipeline per sentence is tokenize -> mask_entities -> stopword
filter -> stem, repeated to a fixed point so that re-preprocessing a
stored token stream is a no-op (stems can land in the stopword list,
e.g. having -> have, so one pass alone is not idempotent).

Placeholder tokens are ALL-CAPS and pass through every stage unchanged;
everything else is lowercase on output.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources

from ohc_topics import porter
from ohc_topics.corpus import load_abbreviations

PLACEHOLDERS = frozenset(
    {
        "NUMBER",
        "MONEY",
        "TIME",
        "DATE",
        "PERSON",
        "LOCATION",
        "ORGANIZATION",
        "EMO_POS",
        "EMO_NEG",
        "EMO_OTHER",
        "UNK",
    }
)

UNK = "UNK"

_ABBREVIATIONS = load_abbreviations()

_LEX_RULES = [
    re.compile(p)
    for p in (
        r"[A-Z][A-Z_]+",                       # placeholder candidates / acronyms
        r"\$\d+(?:[.,]\d+)*",                  # currency
        r"\d{1,2}:\d{2}(?:[ap]m)?|\d+[ap]m\b", # clock times
        r"\d+(?:[./]\d+)+(?:th|st|nd|rd|s)?",  # decimals and slashed dates
        r"\d+(?:th|st|nd|rd|s)?",              # integers, ordinals, decades
        r"[A-Za-z]+(?:\.[A-Za-z]+)+\.?",       # dotted abbreviations, domains
        r"[A-Za-z]+(?:'[A-Za-z]+)*",           # words and contractions
        r"([^\w\s])\1*",                       # punctuation runs
    )
]


def _lex(text: str) -> list[str]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        for rule in _LEX_RULES:
            m = rule.match(text, pos)
            if m:
                token = m.group(0)
                end = m.end()
                # a known abbreviation keeps its trailing period
                if (
                    token.isalpha()
                    and end < n
                    and text[end] == "."
                    and (token.lower() + ".") in _ABBREVIATIONS
                ):
                    token += "."
                    end += 1
                tokens.append(token)
                pos = end
                break
        else:
            tokens.append(text[pos])
            pos += 1
    return tokens


def _fold_case(token: str) -> str:
    if token in PLACEHOLDERS:
        return token
    return token.lower()


def tokenize(text: str) -> list[str]:
    """Lowercased tokens; numbers, currency, and EMO_* codes stay whole."""
    return [_fold_case(t) for t in _lex(text)]


def tokenize_cased(text: str) -> list[str]:
    """Same segmentation as tokenize() but with original casing kept."""
    return _lex(text)


def load_stopwords() -> frozenset[str]:
    text = resources.files("ohc_topics.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(line.strip() for line in text.splitlines() if line.strip())


def load_gazetteer() -> dict[tuple[str, ...], str]:
    """Map of lowercase token tuples to entity class, longest keys first."""
    text = resources.files("ohc_topics.data").joinpath("gazetteer.tsv").read_text("utf-8")
    table: dict[tuple[str, ...], str] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        surface, cls = line.split("\t")
        key = tuple(tokenize(surface))
        table[key] = cls
    return table


_STOPWORDS = load_stopwords()
_GAZETTEER = load_gazetteer()
_GAZETTEER_MAXLEN = max(len(k) for k in _GAZETTEER)

_HONORIFICS = frozenset({"dr.", "mr.", "mrs.", "ms.", "prof.", "rev.", "dr", "mr", "mrs", "ms"})
_MONTHS = frozenset(
    "january february march april may june july august september october november december".split()
) | frozenset(
    {"jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.", "sep.", "sept.", "oct.", "nov.", "dec."}
)

_MONEY_RE = re.compile(r"\$\d")
_TIME_RE = re.compile(r"\d{1,2}:\d{2}(?:[ap]m)?$|\d+[ap]m$")
_SLASH_DATE_RE = re.compile(r"\d+(?:/\d+)+$")
_DAYLIKE_RE = re.compile(r"\d+(?:th|st|nd|rd)?$")


def _is_capitalized(token: str) -> bool:
    return token[:1].isupper() and token[1:].islower() and token.isalpha()


def mask_entities(tokens: list[str]) -> list[str]:
    """Replace entity mentions with placeholder tokens.

    Gazetteer matches (longest first) mask PERSON/LOCATION/ORGANIZATION;
    an honorific followed by capitalized words masks PERSON when casing
    is available; regexes mask MONEY before NUMBER, then TIME and DATE.
    Output never has more tokens than the input.
    """
    out: list[str] = []
    i = 0
    n = len(tokens)
    while i < n:
        token = tokens[i]
        if token in PLACEHOLDERS:
            out.append(token)
            i += 1
            continue
        matched = False
        for width in range(min(_GAZETTEER_MAXLEN, n - i), 0, -1):
            key = tuple(t.lower() for t in tokens[i : i + width])
            cls = _GAZETTEER.get(key)
            if cls is not None:
                out.append(cls)
                i += width
                matched = True
                break
        if matched:
            continue
        low = token.lower()
        if low in _HONORIFICS and i + 1 < n and _is_capitalized(tokens[i + 1]):
            i += 1
            while i < n and _is_capitalized(tokens[i]) and tokens[i] not in PLACEHOLDERS:
                i += 1
            out.append("PERSON")
            continue
        if _MONEY_RE.match(token):
            out.append("MONEY")
            i += 1
            continue
        if _TIME_RE.fullmatch(low):
            out.append("TIME")
            i += 1
            continue
        if low in _MONTHS:
            # "may" is also a modal verb; treat it as a month only before a day/year
            followed = i + 1 < n and _DAYLIKE_RE.fullmatch(tokens[i + 1].lower())
            if low != "may" or followed:
                i += 1
                absorbed = 0
                while i < n and absorbed < 2 and _DAYLIKE_RE.fullmatch(tokens[i].lower()):
                    i += 1
                    absorbed += 1
                out.append("DATE")
                continue
        if _SLASH_DATE_RE.fullmatch(low) or re.fullmatch(r"(?:19|20)\d\ds?", low):
            out.append("DATE")
            i += 1
            continue
        if low[:1].isdigit() or _MONEY_RE.match(low):
            out.append("NUMBER")
            i += 1
            continue
        out.append(token)
        i += 1
    return out


def _is_lexical(token: str) -> bool:
    return any(ch.isalnum() for ch in token)


def _pass(tokens: list[str], stopwords: frozenset[str]) -> list[str]:
    masked = mask_entities(tokens)
    folded = [_fold_case(t) for t in masked]
    kept = [t for t in folded if t in PLACEHOLDERS or (_is_lexical(t) and t not in stopwords)]
    return [t if t in PLACEHOLDERS else porter.stem(t) for t in kept]


def preprocess_tokens(tokens: list[str], stopwords: frozenset[str] | None = None) -> list[str]:
    """mask -> filter -> stem, iterated to a fixed point."""
    sw = _STOPWORDS if stopwords is None else stopwords
    current = tokens
    for _ in range(10):
        nxt = _pass(current, sw)
        if nxt == current:
            return nxt
        current = nxt
    return current


def preprocess_sentence(text: str, stopwords: frozenset[str] | None = None) -> list[str]:
    """Classifier-ready tokens for one sentence."""
    return preprocess_tokens(tokenize_cased(text), stopwords)


@dataclass(frozen=True)
class TokenSequence:
    sentence_id: str
    tokens: tuple[str, ...]


@dataclass
class Vocabulary:
    """Dense token ids; id 0 is always the UNK placeholder."""

    id_of: dict[str, int] = field(default_factory=lambda: {UNK: 0})
    token_of: list[str] = field(default_factory=lambda: [UNK])
    min_count: int = 1

    def __len__(self) -> int:
        return len(self.token_of)

    @property
    def size(self) -> int:
        return len(self.token_of)

    def id(self, token: str) -> int:
        return self.id_of.get(token, 0)

    def ids(self, tokens) -> list[int]:
        get = self.id_of.get
        return [get(t, 0) for t in tokens]


def build_vocab(
    sequences,
    min_count: int = 5,
    stopwords: frozenset[str] | None = None,
) -> Vocabulary:
    """Tokens with corpus frequency >= min_count, stopwords excluded."""
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    sw = _STOPWORDS if stopwords is None else stopwords
    counts: dict[str, int] = {}
    for seq in sequences:
        tokens = seq.tokens if isinstance(seq, TokenSequence) else seq
        for token in tokens:
            counts[token] = counts.get(token, 0) + 1
    vocab = Vocabulary(min_count=min_count)
    eligible = [
        (token, c)
        for token, c in counts.items()
        if c >= min_count and token not in sw and token != UNK
    ]
    eligible.sort(key=lambda item: (-item[1], item[0]))
    for token, _ in eligible:
        vocab.id_of[token] = len(vocab.token_of)
        vocab.token_of.append(token)
    return vocab


def save_vocab(vocab: Vocabulary, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for token_id, token in enumerate(vocab.token_of):
            fh.write(f"{token}\t{token_id}\n")


def load_vocab(path) -> Vocabulary:
    vocab = Vocabulary()
    vocab.id_of = {}
    vocab.token_of = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            token, token_id = line.rstrip("\n").split("\t")
            assert int(token_id) == len(vocab.token_of), "vocab ids must be dense"
            vocab.id_of[token] = int(token_id)
            vocab.token_of.append(token)
    return vocab
