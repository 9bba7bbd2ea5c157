"""Finite unions of closed intervals with exact endpoints."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable


@dataclass(frozen=True)
class IntervalUnion:
    """Sorted, pairwise disjoint closed intervals ``[a, b]``.

    Intervals that overlap or share an endpoint are merged on construction.
    Degenerate intervals ``[a, a]`` are kept and have length 0.
    """

    intervals: tuple = ()

    @classmethod
    def from_intervals(cls, items: Iterable) -> "IntervalUnion":
        merged: list[list[Fraction]] = []
        for a, b in sorted((min(a, b), max(a, b)) for a, b in items):
            if merged and a <= merged[-1][1]:
                if b > merged[-1][1]:
                    merged[-1][1] = b
            else:
                merged.append([a, b])
        return cls(tuple((a, b) for a, b in merged))

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    @property
    def length(self) -> Fraction:
        return sum((b - a for a, b in self.intervals), Fraction(0))

    def map(self, branches) -> "IntervalUnion":
        """Union of the images of every interval under every affine branch."""
        return IntervalUnion.from_intervals(br.image(a, b) for br in branches for a, b in self.intervals)

    def contains_point(self, x) -> bool:
        return any(a <= x <= b for a, b in self.intervals)

    def issubset(self, other: "IntervalUnion") -> bool:
        """Every interval lies inside a single interval of ``other``."""
        j, theirs = 0, other.intervals
        for a, b in self.intervals:
            while j < len(theirs) and theirs[j][1] < a:
                j += 1
            if j == len(theirs) or not (theirs[j][0] <= a and b <= theirs[j][1]):
                return False
        return True

    __le__ = issubset
