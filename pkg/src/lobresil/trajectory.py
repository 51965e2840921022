"""Replay one instrument-day and record what the downstream analyses need.

A :class:`DayReplay` keeps the best-limit-update clock (timestamps plus the
quote quadruple after every update) and one row per submitted order with its
classification and the position of its pre-arrival state on that clock.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .book import SUBMIT, OrderBook
from .classify import DEFAULT_BUCKETS, ClassifiedOrder, order_type, spread_bucket
from .errors import InputError, RejectedEvent

log = logging.getLogger(__name__)


@dataclass
class DayReplay:
    day: int
    # best-limit-update clock; quotes[0] is the opening state, quotes[i + 1]
    # the state after update i. Columns: b1, B1, a1, A1 (NaN when absent).
    update_ts: np.ndarray
    quotes: np.ndarray
    # one entry per accepted submit
    order_id: np.ndarray
    order_ts: np.ndarray
    order_type: np.ndarray
    is_buy: np.ndarray
    size: np.ndarray
    executed: np.ndarray
    remaining: np.ndarray
    p: np.ndarray
    pre_spread: np.ndarray  # float, NaN on a one-sided book
    bucket: np.ndarray  # 0 when undefined
    pre_update: np.ndarray  # index into ``quotes`` of the 0- state
    n_events: int = 0
    rejected: list = field(default_factory=list)
    classified: list | None = None

    @property
    def n_updates(self) -> int:
        return len(self.update_ts)

    @property
    def spread(self) -> np.ndarray:
        return self.quotes[:, 2] - self.quotes[:, 0]


def replay_day(day, snapshot, events, edges=DEFAULT_BUCKETS, keep_classified=False):
    """Replay ``events`` of one day from its opening ``snapshot``.

    Rejected events (e.g. cancels of unknown ids) are logged and skipped.
    """
    book = OrderBook(day)
    try:
        book.load_snapshot(snapshot)
    except ValueError as exc:
        raise InputError(f"day {day}: bad opening snapshot: {exc}") from None
    upd_ts = []
    upd_q = [book.quotes()]
    rows = []
    classified = [] if keep_classified else None
    rejected = []
    apply = book.apply
    for i, ev in enumerate(events):
        pre = book._quotes
        try:
            res = apply(ev)
        except RejectedEvent as exc:
            rejected.append((i, str(exc)))
            continue
        if res.update is not None:
            upd_ts.append(ev.timestamp)
            upd_q.append(res.update.post)
        if ev.action != SUBMIT:
            continue
        trades = res.trades
        if not trades:
            p = 0
        elif len(trades) == 1 or trades[0].price == trades[-1].price:
            p = 1
        else:
            p = len({t.price for t in trades})
        typ = order_type(ev.side, ev.price, p, res.remaining, pre)
        s = None if pre[0] is None or pre[2] is None else pre[2] - pre[0]
        b = spread_bucket(s, edges)
        # the 0- state sits before this event's own update (if any)
        n_before = len(upd_ts) - (res.update is not None)
        rows.append((ev.order_id, ev.timestamp, typ, ev.side == "B", ev.size,
                     res.executed, res.remaining, p,
                     np.nan if s is None else s, b or 0, n_before))
        if keep_classified:
            classified.append(ClassifiedOrder(ev, typ, p, res.executed, res.remaining, s, b))
    if rejected:
        log.warning("day %s: %d events rejected (first: %s)", day, len(rejected), rejected[0][1])

    cols = list(zip(*rows)) if rows else [()] * 11
    dtypes = [np.int64, np.int64, np.int64, bool, np.int64, np.int64, np.int64,
              np.int64, float, np.int64, np.int64]
    arrs = [np.asarray(c, dtype=d) for c, d in zip(cols, dtypes)]
    return DayReplay(
        day=day,
        update_ts=np.asarray(upd_ts, dtype=np.int64),
        quotes=np.array(upd_q, dtype=float).reshape(-1, 4),
        order_id=arrs[0], order_ts=arrs[1], order_type=arrs[2], is_buy=arrs[3],
        size=arrs[4], executed=arrs[5], remaining=arrs[6], p=arrs[7],
        pre_spread=arrs[8], bucket=arrs[9], pre_update=arrs[10],
        n_events=len(events), rejected=rejected, classified=classified,
    )


def replay_flow(flow, edges=DEFAULT_BUCKETS, keep_classified=False):
    """Replay every day of an :class:`~lobresil.flow.OrderFlow`, in day order."""
    return [
        replay_day(day, snap, evs, edges, keep_classified)
        for day, snap, evs in flow.iter_days()
    ]
