"""Vote and majority hypotheses over multisets of concepts."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .core import Concept


@dataclass(frozen=True)
class VoteHypothesis:
    """Average of a non-empty multiset of concepts; duplicates count twice."""
    counts: tuple[tuple[Concept, int], ...]

    def __post_init__(self):
        if not self.counts or any(c <= 0 for _, c in self.counts):
            raise ValueError("a vote needs at least one member with positive multiplicity")

    @classmethod
    def of(cls, members: Iterable[Concept]) -> VoteHypothesis:
        return cls(tuple(sorted(Counter(tuple(m) for m in members).items())))

    @classmethod
    def from_counts(cls, counts) -> VoteHypothesis:
        merged = Counter()
        for row, c in counts:
            merged[tuple(row)] += c
        return cls(tuple(sorted(merged.items())))

    @property
    def size(self) -> int:
        return sum(c for _, c in self.counts)

    @property
    def distinct(self) -> int:
        return len(self.counts)

    def __call__(self, x: int) -> Fraction:
        return Fraction(sum(c for row, c in self.counts if row[x]), self.size)

    def members(self) -> list[Concept]:
        return [row for row, c in self.counts for _ in range(c)]


@dataclass(frozen=True)
class MajHypothesis:
    """Majority vote; an exact tie predicts 1."""
    vote: VoteHypothesis

    def __call__(self, x: int) -> int:
        return int(self.vote(x) >= Fraction(1, 2))


def vote_eval(v: VoteHypothesis, x: int) -> Fraction:
    return v(x)


def maj_eval(m: MajHypothesis | VoteHypothesis, x: int) -> int:
    if isinstance(m, VoteHypothesis):
        m = MajHypothesis(m)
    return m(x)
