"""Test-only oracles: a naive re-scanning order book and a raw random stream."""

import bisect
import random

from lobresil.book import BUY, CANCEL, SELL, SUBMIT, OrderEvent, SnapshotEntry


class NaiveBook:
    """Reference book: one flat sorted list per side, rescanned for every query.

    Entries are ``[priority_price, seq, order_id, size]`` with
    ``priority_price = -price`` for bids, so the list head is the best order.
    """

    def __init__(self, snapshot=()):
        self.side = {BUY: [], SELL: []}
        self.where = {}  # order id -> side, the only index kept
        self.seq = 0
        for i, (side, price, size) in enumerate(snapshot, start=1):
            self._rest(side, price, -i, size)

    def _rest(self, side, price, oid, size):
        key = -price if side == BUY else price
        bisect.insort(self.side[side], [key, self.seq, oid, size])
        self.where[oid] = side
        self.seq += 1

    def quad(self):
        out = []
        for side in (BUY, SELL):
            lst = self.side[side]
            if not lst:
                out += [None, None]
                continue
            key = lst[0][0]
            vol = 0
            for e in lst:
                if e[0] != key:
                    break
                vol += e[3]
            out += [-key if side == BUY else key, vol]
        return tuple(out)

    def _find(self, oid):
        side = self.where.get(oid)
        if side is None:
            return None, None
        for i, e in enumerate(self.side[side]):
            if e[2] == oid:
                return side, i
        raise AssertionError("index out of sync")

    def apply(self, ev):
        """Returns ``(trades, rejected)``; trades as (price, size, aggressor, maker, taker, ts)."""
        if ev.action == CANCEL:
            side, i = self._find(ev.order_id)
            if side is None:
                return [], True
            e = self.side[side][i]
            price = -e[0] if side == BUY else e[0]
            if side != ev.side or price != ev.price or not 0 < ev.size <= e[3]:
                return [], True
            e[3] -= ev.size
            if e[3] == 0:
                del self.side[side][i]
                del self.where[ev.order_id]
            return [], False
        if ev.size <= 0 or ev.price <= 0 or self._find(ev.order_id)[0] is not None:
            return [], True
        opp = self.side[SELL if ev.side == BUY else BUY]
        left = ev.size
        trades = []
        while left and opp:
            head = opp[0]
            price = head[0] if ev.side == BUY else -head[0]
            if (ev.side == BUY and price > ev.price) or (ev.side == SELL and price < ev.price):
                break
            fill = min(left, head[3])
            trades.append((price, fill, ev.side, head[2], ev.order_id, ev.timestamp))
            left -= fill
            head[3] -= fill
            if head[3] == 0:
                opp.pop(0)
                del self.where[head[2]]
        if left:
            self._rest(ev.side, ev.price, ev.order_id, left)
        return trades, False


def naive_replay(snapshot, events):
    """``(quad trajectory per accepted event, trades, updates, rejected indices)``."""
    book = NaiveBook(snapshot)
    quads, trades, updates, rejected = [], [], [], []
    prev = book.quad()
    for i, ev in enumerate(events):
        tr, rej = book.apply(ev)
        if rej:
            rejected.append(i)
            continue
        trades.extend(tr)
        q = book.quad()
        quads.append(q)
        if q != prev:
            updates.append((ev.timestamp, prev, q))
        prev = q
    return quads, trades, updates, rejected


def random_stream(seed, n, day=1, mid=1000):
    """Unconstrained random events: sides can empty, some cancels are stale."""
    rng = random.Random(seed)
    snapshot = [SnapshotEntry(BUY, mid - 1 - i, rng.randint(1, 5) * 100) for i in range(3)]
    snapshot += [SnapshotEntry(SELL, mid + 1 + i, rng.randint(1, 5) * 100) for i in range(3)]
    known = {-(i + 1): (s.side, s.price, s.size) for i, s in enumerate(snapshot)}
    events = []
    ts = 0
    for oid in range(1, n + 1):
        ts += rng.randint(0, 2000)
        if known and rng.random() < 0.4:
            target = rng.choice(list(known)) if rng.random() < 0.9 else rng.randint(1, n)
            side, price, size = known.get(target, (BUY, mid, 100))
            full = True
            if rng.random() < 0.3:
                size = rng.randint(1, size)
                full = False
            # sizes are as submitted, so fills make some of these cancels invalid
            events.append(OrderEvent(day, ts, target, side, price, size, CANCEL))
            if full:
                known.pop(target, None)
            continue
        side = BUY if rng.random() < 0.5 else SELL
        price = max(1, mid + rng.randint(-6, 6))
        size = rng.choice([1, 50, 100, 200, 300, 500, 1000])
        ev = OrderEvent(day, ts, oid, side, price, size, SUBMIT)
        events.append(ev)
        known[oid] = (side, price, size)
        if len(known) > 400:
            known.pop(next(iter(known)))
    return snapshot, events
