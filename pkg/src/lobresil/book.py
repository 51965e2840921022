"""Two-sided limit order book with price-time priority matching.

Prices are integer ticks, sizes integer shares. Every submitted order first
matches against the opposite side level by level (FIFO inside a level); any
unexecuted remainder rests at the order's limit price. The book reports a
:class:`BestLimitUpdate` whenever the top-of-book quadruple
``(b1, B1, a1, A1)`` changes, which is the event clock used by the
resiliency curves.
"""

from __future__ import annotations

import bisect
import copy
from collections import deque
from typing import Iterable, NamedTuple, Optional

from .errors import InvariantViolation, RejectedEvent

BUY = "B"
SELL = "S"
SUBMIT = "S"
CANCEL = "C"


class OrderEvent(NamedTuple):
    """One raw order-flow record.

    ``timestamp`` is milliseconds since the open of the continuous session
    (both trading segments concatenated). For cancels, ``size`` is the number
    of shares withdrawn; a full cancel uses the order's remaining size.
    """

    day: int
    timestamp: int
    order_id: int
    side: str
    price: int
    size: int
    action: str = SUBMIT


class Trade(NamedTuple):
    price: int
    size: int
    aggressor_side: str
    maker_id: int
    taker_id: int
    timestamp: int


class Quotes(NamedTuple):
    """Top of book. Absent sides are ``None`` in both price and size."""

    bid: Optional[int]
    bid_size: Optional[int]
    ask: Optional[int]
    ask_size: Optional[int]

    @property
    def spread(self) -> Optional[int]:
        if self.bid is None or self.ask is None:
            return None
        return self.ask - self.bid


EMPTY_QUOTES = Quotes(None, None, None, None)


class BestLimitUpdate(NamedTuple):
    seq: int
    day: int
    timestamp: int
    pre: Quotes
    post: Quotes


class Execution(NamedTuple):
    """Result of applying one event."""

    trades: list
    update: Optional[BestLimitUpdate]
    executed: int
    remaining: int


class SnapshotEntry(NamedTuple):
    side: str
    price: int
    size: int


class _Level:
    __slots__ = ("volume", "orders")

    def __init__(self):
        self.volume = 0
        self.orders = deque()


class _Side:
    # keys hold sign * price in ascending order, so the best level is keys[-1]
    # on both sides (bids: sign=+1, asks: sign=-1).
    __slots__ = ("sign", "levels", "keys", "n_orders")

    def __init__(self, sign):
        self.sign = sign
        self.levels = {}
        self.keys = []
        self.n_orders = 0

    def best(self):
        if not self.keys:
            return None, None
        price = self.sign * self.keys[-1]
        return price, self.levels[price].volume

    def depth(self):
        """(price, volume) pairs from the best level outwards."""
        s = self.sign
        return [(s * k, self.levels[s * k].volume) for k in reversed(self.keys)]

    def add(self, entry):
        price = entry[3]
        level = self.levels.get(price)
        if level is None:
            level = self.levels[price] = _Level()
            bisect.insort(self.keys, self.sign * price)
        level.orders.append(entry)
        level.volume += entry[1]
        self.n_orders += 1

    def drop_level(self, price):
        del self.levels[price]
        key = self.sign * price
        if self.keys[-1] == key:
            self.keys.pop()
        else:
            del self.keys[bisect.bisect_left(self.keys, key)]


class OrderBook:
    """Price-time priority book for a single instrument-day.

    Resting orders are stored as ``[order_id, remaining, side, price]`` lists
    inside per-level FIFO queues.
    """

    def __init__(self, day: int = 0):
        self.day = day
        self.bids = _Side(1)
        self.asks = _Side(-1)
        self._orders = {}
        self._seq = 0
        self._quotes = EMPTY_QUOTES

    # -- inspection ---------------------------------------------------------

    def quotes(self) -> Quotes:
        return self._quotes

    def _compute_quotes(self):
        bp, bv = self.bids.best()
        ap, av = self.asks.best()
        return Quotes(bp, bv, ap, av)

    def depth(self, side: str) -> list:
        """Price levels of one side as ``(price, volume)``, best first."""
        return (self.bids if side == BUY else self.asks).depth()

    def order_count(self, side: str) -> int:
        return (self.bids if side == BUY else self.asks).n_orders

    def resting(self, order_id: int) -> Optional[tuple]:
        """``(side, price, remaining)`` for a resting order, else ``None``."""
        entry = self._orders.get(order_id)
        if entry is None:
            return None
        return entry[2], entry[3], entry[1]

    def queue(self, side: str, price: int) -> list:
        """Resting ``(order_id, remaining)`` at one level, in time priority."""
        level = (self.bids if side == BUY else self.asks).levels.get(price)
        if level is None:
            return []
        return [(e[0], e[1]) for e in level.orders]

    def snapshot(self) -> "OrderBook":
        """Deep copy, safe to read while this book keeps mutating."""
        return copy.deepcopy(self)

    def __len__(self):
        return len(self._orders)

    def __repr__(self):
        q = self._quotes
        return (
            f"OrderBook(day={self.day}, bid={q.bid}x{q.bid_size}, "
            f"ask={q.ask}x{q.ask_size}, orders={len(self._orders)})"
        )

    # -- mutation -----------------------------------------------------------

    def load_snapshot(self, entries: Iterable[SnapshotEntry]) -> None:
        """Seed the book with resting orders (ids -1, -2, ... in row order)."""
        for i, (side, price, size) in enumerate(entries, start=1):
            if size <= 0 or price <= 0:
                raise ValueError(f"snapshot row {i}: non-positive price or size")
            entry = [-i, size, side, price]
            self._orders[-i] = entry
            (self.bids if side == BUY else self.asks).add(entry)
        self._quotes = self._compute_quotes()
        q = self._quotes
        if q.bid is not None and q.ask is not None and q.bid >= q.ask:
            raise ValueError(f"crossed snapshot: bid {q.bid} >= ask {q.ask}")

    def apply(self, ev: OrderEvent) -> Execution:
        """Apply one event in place.

        Raises :class:`RejectedEvent` (book untouched) for invalid events and
        :class:`InvariantViolation` if the resting book ends up crossed.
        """
        if ev.action == SUBMIT:
            trades, executed, remaining = self._submit(ev)
        elif ev.action == CANCEL:
            self._cancel(ev)
            trades, executed, remaining = [], 0, 0
        else:
            raise RejectedEvent(f"order {ev.order_id}: unknown action {ev.action!r}")

        pre = self._quotes
        bp, bv = self.bids.best()
        ap, av = self.asks.best()
        if bp is not None and ap is not None and bp >= ap:
            raise InvariantViolation(
                f"crossed book after order {ev.order_id}: bid {bp} >= ask {ap}"
            )
        update = None
        if bp != pre[0] or bv != pre[1] or ap != pre[2] or av != pre[3]:
            post = Quotes(bp, bv, ap, av)
            update = BestLimitUpdate(self._seq, self.day, ev.timestamp, pre, post)
            self._seq += 1
            self._quotes = post
        return Execution(trades, update, executed, remaining)

    def _submit(self, ev):
        if ev.size <= 0 or ev.price <= 0:
            raise RejectedEvent(f"order {ev.order_id}: non-positive price or size")
        if ev.order_id in self._orders:
            raise RejectedEvent(f"order {ev.order_id}: duplicate resting order id")
        if ev.side == BUY:
            own, opp = self.bids, self.asks
        elif ev.side == SELL:
            own, opp = self.asks, self.bids
        else:
            raise RejectedEvent(f"order {ev.order_id}: unknown side {ev.side!r}")

        trades = []
        left = ev.size
        keys = opp.keys
        limit_key = opp.sign * ev.price
        sign = opp.sign
        levels = opp.levels
        orders = self._orders
        while left and keys and keys[-1] >= limit_key:
            price = sign * keys[-1]
            level = levels[price]
            queue = level.orders
            while left and queue:
                maker = queue[0]
                fill = maker[1] if maker[1] <= left else left
                trades.append(
                    Trade(price, fill, ev.side, maker[0], ev.order_id, ev.timestamp)
                )
                left -= fill
                level.volume -= fill
                maker[1] -= fill
                if maker[1] == 0:
                    queue.popleft()
                    opp.n_orders -= 1
                    del orders[maker[0]]
            if not queue:
                del levels[price]
                keys.pop()
        if left:
            entry = [ev.order_id, left, ev.side, ev.price]
            orders[ev.order_id] = entry
            own.add(entry)
        return trades, ev.size - left, left

    def _cancel(self, ev):
        entry = self._orders.get(ev.order_id)
        if entry is None:
            raise RejectedEvent(f"cancel of unknown or filled order {ev.order_id}")
        if entry[2] != ev.side or entry[3] != ev.price:
            raise RejectedEvent(
                f"cancel of order {ev.order_id}: side/price do not match resting order"
            )
        if ev.size <= 0 or ev.size > entry[1]:
            raise RejectedEvent(
                f"cancel of order {ev.order_id}: size {ev.size} outside 1..{entry[1]}"
            )
        side = self.bids if entry[2] == BUY else self.asks
        level = side.levels[entry[3]]
        level.volume -= ev.size
        entry[1] -= ev.size
        if entry[1] == 0:
            level.orders.remove(entry)
            side.n_orders -= 1
            del self._orders[ev.order_id]
            if not level.orders:
                side.drop_level(entry[3])


def best_quotes(book: OrderBook) -> Quotes:
    return book.quotes()


def spread(book: OrderBook) -> Optional[int]:
    """Bid-ask spread in ticks, or ``None`` when either side is empty."""
    return book.quotes().spread


def replay(snapshot, events, day=0):
    """Run ``events`` through a fresh book.

    Returns ``(book, trades, updates, rejected)`` where ``rejected`` is a list
    of ``(event_index, message)`` diagnostics.
    """
    book = OrderBook(day)
    book.load_snapshot(snapshot)
    trades, updates, rejected = [], [], []
    for i, ev in enumerate(events):
        try:
            res = book.apply(ev)
        except RejectedEvent as exc:
            rejected.append((i, str(exc)))
            continue
        trades.extend(res.trades)
        if res.update is not None:
            updates.append(res.update)
    return book, trades, updates, rejected
