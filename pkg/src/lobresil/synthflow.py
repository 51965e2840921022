"""Seeded zero-intelligence order flow with opening book snapshots.

Events arrive as a Poisson process over the session. Each arrival is a limit
order, a marketable order or a cancel, drawn in proportion to the configured
rates. Limit orders go inside the spread with a fixed probability, otherwise a
geometric number of ticks behind the same-side best. Marketable orders are
priced a geometric number of ticks through the opposite best. Cancels hit a
uniformly random resting order; a cancel that would empty a side is dropped,
and a marketable order that would sweep a whole side is capped, so both sides
stay populated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from .book import BUY, CANCEL, SELL, SUBMIT, OrderBook, OrderEvent, Quotes, SnapshotEntry
from .classify import MARKET_TYPES
from .errors import InfeasibleShock, RejectedEvent
from .flow import OrderFlow
from .session import Session


@dataclass(frozen=True)
class FlowParams:
    limit_rate: float = 40.0  # events per minute
    market_rate: float = 8.0
    cancel_rate: float = 36.0
    in_spread_prob: float = 0.2
    placement_p: float = 0.4  # geometric parameter, ticks behind same-side best
    market_price_p: float = 0.7  # geometric parameter, ticks through opposite best
    size_mu: float = 0.7  # log-normal, in lots
    size_sigma: float = 0.8
    market_size_mu: float = 1.2
    lot: int = 100
    partial_cancel_prob: float = 0.2
    initial_mid: int = 1000
    bootstrap_levels: int = 8
    bootstrap_depth: int = 1000
    days: int = 1
    seed: int = 0
    session: Session = field(default_factory=Session)

    def __post_init__(self):
        for name in ("limit_rate", "market_rate", "cancel_rate"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        for name in ("in_spread_prob", "partial_cancel_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        for name in ("placement_p", "market_price_p"):
            if not 0.0 < getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in (0, 1]")
        if self.initial_mid <= self.bootstrap_levels + 1:
            raise ValueError("initial_mid too small for the bootstrap ladder")

    @property
    def total_rate(self) -> float:
        return self.limit_rate + self.market_rate + self.cancel_rate


def bootstrap_snapshot(mid: int, levels: int, depth: int) -> list:
    """Symmetric ladder around ``mid`` with a 2-tick spread."""
    rows = [SnapshotEntry(BUY, mid - 1 - i, depth) for i in range(levels)]
    rows += [SnapshotEntry(SELL, mid + 1 + i, depth) for i in range(levels)]
    return rows


class _Live:
    """Resting order ids with O(1) uniform sampling and removal."""

    def __init__(self):
        self.ids = []
        self.pos = {}

    def add(self, oid):
        self.pos[oid] = len(self.ids)
        self.ids.append(oid)

    def discard(self, oid):
        i = self.pos.pop(oid, None)
        if i is None:
            return
        last = self.ids.pop()
        if last != oid:
            self.ids[i] = last
            self.pos[last] = i

    def __len__(self):
        return len(self.ids)


def _generate_day(day, mid, params, rng):
    L = params.session.length_ms
    snap = bootstrap_snapshot(mid, params.bootstrap_levels, params.bootstrap_depth)
    book = OrderBook(day)
    book.load_snapshot(snap)
    live = _Live()
    for i in range(len(snap)):
        live.add(-(i + 1))

    R = params.total_rate
    n = int(rng.poisson(R * params.session.minutes)) if R > 0 else 0
    times = np.floor(np.sort(rng.uniform(0, L, n))).astype(np.int64).tolist()
    probs = np.array([params.limit_rate, params.market_rate, params.cancel_rate]) / (R or 1)
    kinds = rng.choice(3, size=n, p=probs).tolist() if n else []
    is_buy = (rng.random(n) < 0.5).tolist()
    u_spread = rng.random(n).tolist()
    u_pick = rng.random(n).tolist()
    behind = (rng.geometric(params.placement_p, n) - 1).tolist()
    through = (rng.geometric(params.market_price_p, n) - 1).tolist()
    lots = np.maximum(1, np.rint(np.exp(rng.normal(params.size_mu, params.size_sigma, n))))
    mlots = np.maximum(1, np.rint(np.exp(rng.normal(params.market_size_mu, params.size_sigma, n))))
    sizes = (lots.astype(np.int64) * params.lot).tolist()
    msizes = (mlots.astype(np.int64) * params.lot).tolist()
    partial = (rng.random(n) < params.partial_cancel_prob).tolist()

    events = []
    next_id = 1
    lot = params.lot
    for i in range(n):
        ts = times[i]
        kind = kinds[i]
        q = book._quotes
        if kind == 2:
            if not len(live):
                continue
            oid = live.ids[int(u_pick[i] * len(live))]
            side, price, rem = book.resting(oid)
            if partial[i] and rem > lot:
                size = lot * max(1, int(u_spread[i] * (rem // lot)))
                size = min(size, rem - 1)
            else:
                size = rem
                if book.order_count(side) == 1:
                    continue
            ev = OrderEvent(day, ts, oid, side, price, size, CANCEL)
            book.apply(ev)
            events.append(ev)
            if size == rem:
                live.discard(oid)
            continue

        side = BUY if is_buy[i] else SELL
        price = None
        size = sizes[i]
        if kind == 1:
            opp = q.ask if side == BUY else q.bid
            if opp is not None:
                size = msizes[i]
                price = opp + through[i] if side == BUY else opp - through[i]
                price, size = _cap_sweep(book, side, price, size)
        if price is None:
            price = _limit_price(q, side, u_spread[i], behind[i], params.in_spread_prob)
        if price < 1:
            price = 1
        ev = OrderEvent(day, ts, next_id, side, price, size, SUBMIT)
        next_id += 1
        res = book.apply(ev)
        events.append(ev)
        for tr in res.trades:
            if book.resting(tr.maker_id) is None:
                live.discard(tr.maker_id)
        if res.remaining:
            live.add(ev.order_id)
    q = book.quotes()
    if q.bid is not None and q.ask is not None:
        mid = (q.bid + q.ask) // 2
    return snap, events, mid


def _cap_sweep(book, side, price, size):
    """Keep a marketable order from emptying the opposite side."""
    levels = book.depth(SELL if side == BUY else BUY)
    total = sum(v for _, v in levels)
    worst = levels[-1][0]
    reaches_all = price >= worst if side == BUY else price <= worst
    if not reaches_all or size < total:
        return price, size
    if len(levels) >= 2:
        return levels[-2][0], size
    if total > 1:
        return price, total - 1
    return None, size


def _limit_price(q, side, u, behind, in_spread_prob):
    bid, ask = q.bid, q.ask
    if side == BUY:
        if bid is not None and ask is not None and ask - bid > 1 and u < in_spread_prob:
            return bid + 1 + int(u / in_spread_prob * (ask - bid - 1))
        ref = bid if bid is not None else (ask - 1 if ask is not None else 1)
        return ref - behind
    if bid is not None and ask is not None and ask - bid > 1 and u < in_spread_prob:
        return ask - 1 - int(u / in_spread_prob * (ask - bid - 1))
    ref = ask if ask is not None else (bid + 1 if bid is not None else 2)
    return ref + behind


def generate(params: FlowParams) -> OrderFlow:
    """Generate ``params.days`` days of order flow; fully determined by ``params``."""
    rng = np.random.default_rng(params.seed)
    events, snaps = [], {}
    mid = params.initial_mid
    for day in range(1, params.days + 1):
        snap, evs, mid = _generate_day(day, mid, params, rng)
        mid = max(mid, params.bootstrap_levels + 2)
        snaps[day] = snap
        events.extend(evs)
    return OrderFlow(events, snaps)


def baseline_flow(
    days: int = 20,
    limit_rate: float = 4.0,
    anchor_rate: float = 1.0,
    seed: int = 0,
    session: Session = Session(),
    mid: int = 1000,
    half_spread: int = 5,
    depth: int = 10**9,
) -> OrderFlow:
    """Stationary flow whose limit-order types arrive as independent Poisson
    processes, unaffected by the market orders.

    Each of types 4, 5, 6, 10, 11, 12 arrives at ``limit_rate`` per minute;
    types 4/10 are inside-spread orders cancelled at the same timestamp so the
    spread never closes. Market orders (types 3 and 9, one share against a
    very deep best level) arrive at ``anchor_rate`` per minute and never move
    the quotes.
    """
    rng = np.random.default_rng(seed)
    L = session.length_ms
    b1, a1 = mid - half_spread, mid + half_spread
    snap = [SnapshotEntry(BUY, b1, depth), SnapshotEntry(SELL, a1, depth)]
    kinds = (4, 5, 6, 10, 11, 12, 3, 9)
    rates = np.array([limit_rate] * 6 + [anchor_rate / 2] * 2)
    events, snaps = [], {}
    for day in range(1, days + 1):
        snaps[day] = list(snap)
        n = int(rng.poisson(rates.sum() * session.minutes))
        times = np.floor(np.sort(rng.uniform(0, L, n))).astype(np.int64).tolist()
        which = rng.choice(len(kinds), size=n, p=rates / rates.sum()).tolist()
        oid = 1
        for ts, w in zip(times, which):
            k = kinds[w]
            side = BUY if k in (3, 4, 5, 6) else SELL
            if k in (4, 10):
                price = b1 + 1 if k == 4 else a1 - 1
                events.append(OrderEvent(day, ts, oid, side, price, 100, SUBMIT))
                events.append(OrderEvent(day, ts, oid, side, price, 100, CANCEL))
            else:
                price = {5: b1, 6: b1 - 1, 11: a1, 12: a1 + 1, 3: a1, 9: b1}[k]
                size = 1 if k in (3, 9) else 100
                events.append(OrderEvent(day, ts, oid, side, price, size, SUBMIT))
            oid += 1
    return OrderFlow(events, snaps)


# -- shock injection ---------------------------------------------------------------


class ShockSpec(NamedTuple):
    """Request one effective market order of ``order_type`` at ``timestamp``.

    ``magnitude`` depends on the type: levels to penetrate for types 1/7
    (default 2), unexecuted remainder as a fraction of the best opposite
    depth for 2/8 (default 0.5), executed fraction of that depth for 3/9
    (default 0.5).
    """

    order_type: int
    timestamp: int
    magnitude: Optional[float] = None
    day: Optional[int] = None


class InjectedShock(NamedTuple):
    """An inserted order plus the book it met: quotes and the first two
    opposite levels as ``(price, volume)``."""

    day: int
    order_id: int
    order_type: int
    timestamp: int
    side: str
    price: int
    size: int
    pre_quotes: Quotes
    opposite: tuple


def _opposite_levels(book, side):
    return book.depth(SELL if side == BUY else BUY)


def shock_order(book: OrderBook, order_type: int, magnitude=None):
    """``(side, price, size)`` of an order that classifies as ``order_type``
    against the current book; raises :class:`InfeasibleShock` otherwise."""
    if order_type not in MARKET_TYPES:
        raise ValueError(f"type {order_type} is not an effective market order")
    side = BUY if order_type <= 6 else SELL
    kind = order_type if order_type <= 6 else order_type - 6
    levels = _opposite_levels(book, side)
    n = len(levels)
    order = None
    if not _two_sided(book):
        pass  # no pre-shock spread to respond from
    elif kind == 1:
        p = int(magnitude or 2)
        if p < 2:
            raise ValueError("a type-1/7 shock needs penetrability >= 2")
        if n >= p:
            before = sum(v for _, v in levels[: p - 1])
            a_p, v_p = levels[p - 1]
            if v_p >= 2 or n > p:
                order = (side, a_p, before + max(1, v_p // 2))
    elif kind == 2:
        frac = 0.5 if magnitude is None else float(magnitude)
        if n >= 2:
            a1, v1 = levels[0]
            order = (side, a1, v1 + max(1, int(frac * v1)))
    else:
        frac = 0.5 if magnitude is None else float(magnitude)
        if n >= 1 and levels[0][1] >= 2:
            a1, v1 = levels[0]
            order = (side, a1, min(v1 - 1, max(1, int(frac * v1))))
    if order is None:
        feasible = feasible_shock_types(book)
        raise InfeasibleShock(
            f"type {order_type} not supported by the book (feasible: {list(feasible)})",
            feasible,
        )
    return order


def _two_sided(book: OrderBook) -> bool:
    q = book.quotes()
    return q.bid is not None and q.ask is not None


def feasible_shock_types(book: OrderBook) -> tuple:
    out = []
    if not _two_sided(book):
        return ()
    for k in MARKET_TYPES:
        side = BUY if k <= 6 else SELL
        levels = _opposite_levels(book, side)
        kind = k if k <= 6 else k - 6
        n = len(levels)
        if kind == 1:
            ok = n >= 2 and (levels[1][1] >= 2 or n > 2)
        elif kind == 2:
            ok = n >= 2
        else:
            ok = n >= 1 and levels[0][1] >= 2
        if ok:
            out.append(k)
    return tuple(out)


def inject_shocks(flow: OrderFlow, shocks, on_infeasible: str = "raise"):
    """Insert effective market orders of known type into ``flow``.

    Each shock goes after every event at or before its timestamp. Later
    cancels invalidated by the shock (order already filled, or size beyond
    what is left) are dropped or trimmed. Returns ``(new_flow, injected)``.
    With ``on_infeasible="skip"`` unsupported shocks are silently left out.
    """
    if on_infeasible not in ("raise", "skip"):
        raise ValueError("on_infeasible must be 'raise' or 'skip'")
    days = flow.days
    by_day = {}
    for s in shocks:
        d = days[0] if s.day is None else s.day
        by_day.setdefault(d, []).append(s)
    events, injected = [], []
    for day, snap, evs in flow.iter_days():
        pending = sorted(by_day.get(day, []), key=lambda s: s.timestamp)
        if not pending:
            events.extend(evs)
            continue
        book = OrderBook(day)
        book.load_snapshot(snap)
        next_id = max([e.order_id for e in evs] + [0]) + 1
        j = 0
        for ev in evs + [None]:
            while j < len(pending) and (ev is None or ev.timestamp > pending[j].timestamp):
                spec = pending[j]
                j += 1
                try:
                    side, price, size = shock_order(book, spec.order_type, spec.magnitude)
                except InfeasibleShock:
                    if on_infeasible == "raise":
                        raise
                    continue
                shock = OrderEvent(day, spec.timestamp, next_id, side, price, size, SUBMIT)
                next_id += 1
                pre = book.quotes()
                opposite = tuple(_opposite_levels(book, side)[:2])
                book.apply(shock)
                events.append(shock)
                injected.append(InjectedShock(day, shock.order_id, spec.order_type,
                                              spec.timestamp, side, price, size,
                                              pre, opposite))
            if ev is None:
                break
            if ev.action == CANCEL:
                rest = book.resting(ev.order_id)
                if rest is None:
                    continue
                if ev.size > rest[2]:
                    ev = ev._replace(size=rest[2])
            try:
                book.apply(ev)
            except RejectedEvent:
                pass
            events.append(ev)
    return OrderFlow(events, dict(flow.snapshots)), injected


def inject_shock(flow: OrderFlow, spec: ShockSpec):
    """Single-shock form of :func:`inject_shocks`; raises when infeasible."""
    new_flow, injected = inject_shocks(flow, [spec])
    return new_flow, injected[0]
