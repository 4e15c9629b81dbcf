"""The fixed 11-topic label schema and multi-label sets over it.

Label codes are four-letter abbreviations, kept in a fixed alphabetical
order; every serialized artifact relies on this order being stable.
"""

from __future__ import annotations

from typing import Iterable, Iterator

LABELS: tuple[str, ...] = (
    "ALTR",
    "DAIL",
    "DIAG",
    "FIND",
    "HSYS",
    "MISC",
    "NUTR",
    "PERS",
    "RSRC",
    "TEST",
    "TREA",
)

N_LABELS = len(LABELS)

LABEL_INDEX: dict[str, int] = {code: i for i, code in enumerate(LABELS)}

# Short human-readable glosses used by the annotation service and UI.
LABEL_DESCRIPTIONS: dict[str, str] = {
    "ALTR": "alternative or complementary medicine",
    "DAIL": "day-to-day life while managing the disease",
    "DIAG": "diagnosis results, measurements, and test outcomes",
    "FIND": "signs, symptoms, and side effects",
    "HSYS": "doctors, nurses, hospitals, practices, and insurers",
    "MISC": "greetings, sign-offs, and anything not covered elsewhere",
    "NUTR": "food, diet, and supplements",
    "PERS": "personal background and circumstances",
    "RSRC": "links, quotes, or pointers to outside information",
    "TEST": "testing procedures themselves (not their results)",
    "TREA": "treatments: procedures, medications, devices",
}

MISC = "MISC"


class LabelSet:
    """Immutable bitset over the 11 schema labels."""

    __slots__ = ("mask",)

    def __init__(self, mask: int = 0):
        if not 0 <= mask < (1 << N_LABELS):
            raise ValueError(f"label mask out of range: {mask}")
        object.__setattr__(self, "mask", mask)

    def __setattr__(self, name, value):
        raise AttributeError("LabelSet is immutable")

    @classmethod
    def from_codes(cls, codes: Iterable[str]) -> "LabelSet":
        mask = 0
        for code in codes:
            try:
                mask |= 1 << LABEL_INDEX[code]
            except KeyError:
                raise ValueError(f"unknown label code: {code!r}") from None
        return cls(mask)

    @classmethod
    def full(cls) -> "LabelSet":
        return cls((1 << N_LABELS) - 1)

    def codes(self) -> list[str]:
        return [code for i, code in enumerate(LABELS) if self.mask >> i & 1]

    def has(self, code: str) -> bool:
        return bool(self.mask >> LABEL_INDEX[code] & 1)

    def has_index(self, i: int) -> bool:
        return bool(self.mask >> i & 1)

    def indices(self) -> list[int]:
        return [i for i in range(N_LABELS) if self.mask >> i & 1]

    def add(self, code: str) -> "LabelSet":
        return LabelSet(self.mask | 1 << LABEL_INDEX[code])

    def __or__(self, other: "LabelSet") -> "LabelSet":
        return LabelSet(self.mask | other.mask)

    def __and__(self, other: "LabelSet") -> "LabelSet":
        return LabelSet(self.mask & other.mask)

    def __sub__(self, other: "LabelSet") -> "LabelSet":
        return LabelSet(self.mask & ~other.mask)

    def __contains__(self, code: str) -> bool:
        return self.has(code)

    def __iter__(self) -> Iterator[str]:
        return iter(self.codes())

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __bool__(self) -> bool:
        return self.mask != 0

    def __eq__(self, other) -> bool:
        return isinstance(other, LabelSet) and self.mask == other.mask

    def __hash__(self) -> int:
        return hash(self.mask)

    def __repr__(self) -> str:
        return f"LabelSet({{{', '.join(self.codes())}}})"


EMPTY = LabelSet(0)
