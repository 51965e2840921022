"""Order aggressiveness by penetrability: the 12-type taxonomy.

Buys: 1 (p > 1), 2 (p = 1, partially filled), 3 (p = 1, filled),
4 (rests inside the spread), 5 (rests at the best bid), 6 (rests below it).
Sells mirror as 7-12.
"""

from __future__ import annotations

import bisect
import csv
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .book import BUY, SELL, OrderBook, OrderEvent, Quotes
from .errors import InvariantViolation

DEFAULT_BUCKETS = (1, 2, 3, 4)
MARKET_TYPES = (1, 2, 3, 7, 8, 9)
LIMIT_TYPES = (4, 5, 6, 10, 11, 12)
INTENSITY_TYPES = (4, 5, 10, 11)


class ClassifiedOrder(NamedTuple):
    event: OrderEvent
    order_type: int
    p: int
    executed: int
    remaining: int
    pre_spread: Optional[int]
    spread_bucket: Optional[int]


def penetrability(book: OrderBook, side: str, executed: int) -> int:
    """Number of opposite price levels consumed by ``executed`` shares.

    ``book`` must be the state just before the order arrived.
    """
    if executed < 0:
        raise ValueError("executed volume must be non-negative")
    if executed == 0:
        return 0
    cum = 0
    for j, (_, volume) in enumerate(book.depth(SELL if side == BUY else BUY), start=1):
        cum += volume
        if executed <= cum:
            return j
    raise ValueError(
        f"executed volume {executed} exceeds opposite-side volume {cum}"
    )


def spread_bucket(spread: Optional[int], edges: Sequence[int] = DEFAULT_BUCKETS):
    """1-based bucket index; the last bucket is open-ended (``>= edges[-1]``)."""
    if spread is None:
        return None
    i = bisect.bisect_right(edges, spread)
    return i if i > 0 else None


def order_type(side: str, price: int, p: int, remaining: int, pre: Quotes) -> int:
    """Type 1-12 from penetrability and the pre-arrival quotes."""
    if side == BUY:
        if p > 1:
            return 1
        if p == 1:
            return 2 if remaining > 0 else 3
        if pre.ask is not None and price >= pre.ask:
            raise InvariantViolation(
                f"buy at {price} did not execute against ask {pre.ask}"
            )
        if pre.bid is None or price > pre.bid:
            return 4
        return 5 if price == pre.bid else 6
    if p > 1:
        return 7
    if p == 1:
        return 8 if remaining > 0 else 9
    if pre.bid is not None and price <= pre.bid:
        raise InvariantViolation(f"sell at {price} did not execute against bid {pre.bid}")
    if pre.ask is None or price < pre.ask:
        return 10
    return 11 if price == pre.ask else 12


def classify(
    book: OrderBook,
    ev: OrderEvent,
    executed: int,
    remaining: int,
    edges: Sequence[int] = DEFAULT_BUCKETS,
) -> ClassifiedOrder:
    """Classify a submit given the book at 0- and its execution outcome."""
    if executed + remaining != ev.size:
        raise ValueError("executed + remaining must equal the order size")
    pre = book.quotes()
    p = penetrability(book, ev.side, executed)
    s = pre.spread
    return ClassifiedOrder(
        ev, order_type(ev.side, ev.price, p, remaining, pre), p,
        executed, remaining, s, spread_bucket(s, edges),
    )


class TypeCountTable:
    """Counts of orders per type (rows 1-12) and spread bucket (columns).

    Orders that arrived on a one-sided book have no spread bucket and are kept
    in ``unbucketed``.
    """

    def __init__(self, edges: Sequence[int] = DEFAULT_BUCKETS):
        self.edges = tuple(edges)
        self.counts = np.zeros((12, len(self.edges)), dtype=np.int64)
        self.unbucketed = np.zeros(12, dtype=np.int64)

    def add(self, order_type: int, bucket: Optional[int]) -> None:
        if bucket is None:
            self.unbucketed[order_type - 1] += 1
        else:
            self.counts[order_type - 1, bucket - 1] += 1

    def add_arrays(self, types, buckets) -> None:
        types = np.asarray(types, dtype=np.int64)
        buckets = np.asarray(buckets, dtype=np.int64)
        ok = buckets > 0
        np.add.at(self.counts, (types[ok] - 1, buckets[ok] - 1), 1)
        np.add.at(self.unbucketed, types[~ok] - 1, 1)

    def merge(self, other: "TypeCountTable") -> "TypeCountTable":
        if other.edges != self.edges:
            raise ValueError("cannot merge tables with different spread buckets")
        out = TypeCountTable(self.edges)
        out.counts = self.counts + other.counts
        out.unbucketed = self.unbucketed + other.unbucketed
        return out

    @property
    def total(self) -> int:
        return int(self.counts.sum() + self.unbucketed.sum())

    def row_totals(self) -> np.ndarray:
        return self.counts.sum(axis=1) + self.unbucketed

    def column_labels(self):
        labels = [f"spread_{e}" for e in self.edges[:-1]]
        return labels + [f"spread_{self.edges[-1]}plus"]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["type"] + self.column_labels())
            for k in range(12):
                w.writerow([k + 1] + [int(c) for c in self.counts[k]])

    @classmethod
    def from_csv(cls, path) -> "TypeCountTable":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        header = rows[0][1:]
        edges = [int(h.split("_")[1].removesuffix("plus")) for h in header]
        table = cls(edges)
        for row in rows[1:]:
            table.counts[int(row[0]) - 1] = [int(x) for x in row[1:]]
        return table

    def __eq__(self, other):
        return (
            isinstance(other, TypeCountTable)
            and self.edges == other.edges
            and np.array_equal(self.counts, other.counts)
            and np.array_equal(self.unbucketed, other.unbucketed)
        )

    def __repr__(self):
        return f"TypeCountTable(total={self.total}, edges={self.edges})"


def tabulate(
    classified: Iterable[ClassifiedOrder], edges: Sequence[int] = DEFAULT_BUCKETS
) -> TypeCountTable:
    table = TypeCountTable(edges)
    for c in classified:
        table.add(c.order_type, c.spread_bucket)
    return table


def mirror_type(k: int) -> int:
    return k + 6 if k <= 6 else k - 6

