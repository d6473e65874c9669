"""Canonical answer values and the majority-vote primitive."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import EmptyVote

ABSTAIN_KEY = "<abstain>"

_WS = re.compile(r"\s+")
_INT = re.compile(r"[+-]?\d{1,3}(,\d{3})+|[+-]?\d+")


@dataclass(frozen=True, order=False)
class Answer:
    """A final-answer value. Equality and hashing use ``canonical`` only."""

    canonical: str
    raw: str = field(default="", compare=False)

    @property
    def is_abstain(self) -> bool:
        return self.canonical == ABSTAIN_KEY

    def __str__(self) -> str:
        return self.canonical


ABSTAIN = Answer(ABSTAIN_KEY, "")


def _unwrap(text: str) -> str:
    # peel \boxed{...} and $...$ layers until nothing changes
    while True:
        before = text
        text = text.strip()
        if text.startswith("\\boxed{") and text.endswith("}"):
            text = text[len("\\boxed{"):-1]
        elif len(text) >= 2 and text.startswith("$") and text.endswith("$"):
            text = text.strip("$")
        if text == before:
            return text


def normalize(raw: str) -> str:
    """Return the canonical key for ``raw`` (``ABSTAIN_KEY`` when empty)."""
    text = _WS.sub(" ", _unwrap(raw)).strip()
    if not text:
        return ABSTAIN_KEY
    if _INT.fullmatch(text):
        return str(int(text.replace(",", "")))
    return text


def canonicalize(raw: str | None) -> Answer:
    if raw is None:
        return ABSTAIN
    return Answer(normalize(raw), raw)


@dataclass(frozen=True)
class VoteTally:
    counts: Mapping[str, int]
    total: int

    @classmethod
    def from_counter(cls, counter: Counter) -> "VoteTally":
        counts = {k: v for k, v in sorted(counter.items()) if v > 0}
        return cls(counts, sum(counts.values()))

    def __eq__(self, other):
        if not isinstance(other, VoteTally):
            return NotImplemented
        return dict(self.counts) == dict(other.counts) and self.total == other.total

    def __hash__(self):
        return hash((tuple(sorted(self.counts.items())), self.total))


def pick_winner(counts: Mapping[str, int]) -> str | None:
    """Key with the highest count; ties go to the smallest key."""
    best = None
    best_n = 0
    for key, n in counts.items():
        if n > best_n or (n == best_n and n > 0 and key < best):
            best, best_n = key, n
    return best


def mode(answers: Iterable[Answer]) -> tuple[Answer, VoteTally]:
    """Majority vote over ``answers`` ignoring ABSTAIN entries.

    Ties are broken by the lexicographically smallest canonical value, so the
    result does not depend on input order. Returns ABSTAIN when every entry
    abstains.
    """
    answers = list(answers)
    if not answers:
        raise EmptyVote("mode() of an empty answer list")
    counter = Counter(a.canonical for a in answers if not a.is_abstain)
    tally = VoteTally.from_counter(counter)
    key = pick_winner(tally.counts)
    if key is None:
        return ABSTAIN, tally
    # smallest raw spelling keeps the winner independent of input order
    raw = min(a.raw for a in answers if a.canonical == key)
    return Answer(key, raw), tally
