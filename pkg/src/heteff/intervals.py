"""Pure set algebra over half-open integer-nanosecond intervals.

Everything here operates on :class:`FlatSet`, a normalized interval list:
sorted, pairwise disjoint, non-adjacent, no zero-length members. Raw record
lists (unsorted, overlapping, as emitted by profilers) enter through
:func:`flatten`; the other operations assume flat inputs.

All arithmetic is exact integer arithmetic; the algorithms are O(k log k)
sort-and-sweep over the interval endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .model import Interval


@dataclass(frozen=True)
class FlatSet:
    """Disjoint union of intervals, canonically normalized.

    Invariants: sorted by start, strictly increasing; pairwise disjoint and
    non-adjacent (no ``end == next.start``); no zero-length members.
    """

    intervals: tuple[Interval, ...] = ()

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)


EMPTY = FlatSet()


def flatten(raw: Iterable[Interval]) -> FlatSet:
    """Merge an arbitrary interval list into its disjoint union.

    Overlapping intervals are merged; adjacent intervals merge too, since
    ``[a,b)`` + ``[b,c)`` covers ``[a,c)`` with no gap. Zero-length inputs
    vanish. Raises ValueError naming the offending index if an interval has
    ``start > end``.
    """
    items = list(raw)
    for i, iv in enumerate(items):
        if iv.start > iv.end:
            raise ValueError(f"malformed interval at index {i}: [{iv.start}, {iv.end})")
    items = [iv for iv in items if iv.duration > 0]
    items.sort()
    merged: list[Interval] = []
    for iv in items:
        if merged and iv.start <= merged[-1].end:
            if iv.end > merged[-1].end:
                merged[-1] = Interval(merged[-1].start, iv.end)
        else:
            merged.append(iv)
    return FlatSet(tuple(merged))


def subtract(a: FlatSet, b: FlatSet) -> FlatSet:
    """Points in ``a`` and not in ``b``."""
    out: list[Interval] = []
    bs = b.intervals
    j = 0
    for iv in a.intervals:
        cursor = iv.start
        while j < len(bs) and bs[j].end <= cursor:
            j += 1
        k = j
        while k < len(bs) and bs[k].start < iv.end:
            if bs[k].start > cursor:
                out.append(Interval(cursor, bs[k].start))
            cursor = max(cursor, bs[k].end)
            k += 1
        if cursor < iv.end:
            out.append(Interval(cursor, iv.end))
    return FlatSet(tuple(out))


def complement(a: FlatSet, bounds: Interval) -> FlatSet:
    """Points in ``bounds`` not covered by ``a``; ``a`` outside bounds is ignored."""
    if bounds.start > bounds.end:
        raise ValueError(f"malformed bounds: [{bounds.start}, {bounds.end})")
    if bounds.duration == 0:
        return EMPTY
    return subtract(FlatSet((bounds,)), a)


def total_duration(a: FlatSet) -> int:
    """Sum of interval durations, exact."""
    return sum(iv.duration for iv in a.intervals)


def intersect(a: FlatSet, bounds: Interval) -> FlatSet:
    """Restrict ``a`` to ``bounds`` (used for clamping runaway records)."""
    out = []
    for iv in a.intervals:
        s, e = max(iv.start, bounds.start), min(iv.end, bounds.end)
        if s < e:
            out.append(Interval(s, e))
    return FlatSet(tuple(out))
