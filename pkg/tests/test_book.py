import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lobresil import (
    BUY, CANCEL, SELL, InvariantViolation, OrderBook, OrderEvent, RejectedEvent,
    SnapshotEntry, best_quotes, replay, spread,
)
from lobresil.flow import OrderFlow, mirror_flow

from helpers import naive_replay, random_stream


def book_with(bids=(), asks=()):
    b = OrderBook(day=1)
    b.load_snapshot([SnapshotEntry(BUY, p, v) for p, v in bids]
                    + [SnapshotEntry(SELL, p, v) for p, v in asks])
    return b


def buy(oid, price, size, ts=0):
    return OrderEvent(1, ts, oid, BUY, price, size)


def sell(oid, price, size, ts=0):
    return OrderEvent(1, ts, oid, SELL, price, size)


# -- documented examples --------------------------------------------------------


def test_buy_walks_two_ask_levels():
    b = book_with(asks=[(1001, 400), (1002, 600)])
    res = b.apply(buy(1, 1002, 700))
    assert [(t.price, t.size) for t in res.trades] == [(1001, 400), (1002, 300)]
    assert (res.executed, res.remaining) == (700, 0)
    q = b.quotes()
    assert (q.ask, q.ask_size) == (1002, 300)
    assert res.update is not None


def test_limit_behind_best_emits_no_update():
    b = book_with(bids=[(1000, 500)])
    res = b.apply(buy(1, 999, 200))
    assert res.trades == [] and res.executed == 0 and res.remaining == 200
    assert b.depth(BUY) == [(1000, 500), (999, 200)]
    assert res.update is None


def test_partial_cancel_at_best_updates_depth():
    b = book_with(bids=[(1000, 500)])
    res = b.apply(OrderEvent(1, 5, -1, BUY, 1000, 150, CANCEL))
    assert b.quotes().bid_size == 350
    assert res.update is not None
    assert res.update.pre.bid_size == 500 and res.update.post.bid_size == 350


def test_best_quotes_examples():
    b = book_with(bids=[(1000, 500)], asks=[(1003, 200)])
    assert tuple(best_quotes(b)) == (1000, 500, 1003, 200)
    b = book_with(asks=[(1001, 400), (1002, 600)])
    q = best_quotes(b)
    assert (q.ask, q.ask_size) == (1001, 400) and q.bid is None
    b = book_with(bids=[(1000, 500)])
    q = best_quotes(b)
    assert q.ask is None and q.ask_size is None


def test_spread_examples():
    assert spread(book_with([(1000, 1)], [(1001, 1)])) == 1
    assert spread(book_with([(1000, 1)], [(1004, 1)])) == 4
    assert spread(book_with(asks=[(1004, 1)])) is None


# -- errors -----------------------------------------------------------------------


@pytest.mark.parametrize("ev", [
    OrderEvent(1, 0, 99, BUY, 1000, 10, CANCEL),  # unknown id
    OrderEvent(1, 0, -1, SELL, 1000, 10, CANCEL),  # wrong side
    OrderEvent(1, 0, -1, BUY, 999, 10, CANCEL),  # wrong price
    OrderEvent(1, 0, -1, BUY, 1000, 501, CANCEL),  # more than remaining
    OrderEvent(1, 0, -1, BUY, 1000, 0, CANCEL),
    OrderEvent(1, 0, 7, BUY, 1000, 0),
    OrderEvent(1, 0, 7, BUY, 0, 10),
    OrderEvent(1, 0, -1, BUY, 1000, 10),  # duplicate resting id
    OrderEvent(1, 0, 7, "X", 1000, 10),
    OrderEvent(1, 0, 7, BUY, 1000, 10, "Z"),
])
def test_rejected_events_leave_book_unchanged(ev):
    b = book_with([(1000, 500)], [(1002, 300)])
    before = (b.depth(BUY), b.depth(SELL), b.quotes(), len(b))
    with pytest.raises(RejectedEvent):
        b.apply(ev)
    assert (b.depth(BUY), b.depth(SELL), b.quotes(), len(b)) == before


def test_cancel_of_filled_order_rejected():
    b = book_with(asks=[(1001, 100)])
    b.apply(buy(1, 1001, 100))
    with pytest.raises(RejectedEvent):
        b.apply(OrderEvent(1, 1, -1, SELL, 1001, 100, CANCEL))


def test_crossed_book_is_an_invariant_violation():
    b = book_with([(1000, 100)], [(1002, 100)])
    # corrupt the book behind the engine's back: a bid level above the ask
    b.bids.add([77, 5, BUY, 1005])
    with pytest.raises(InvariantViolation):
        b.apply(buy(1, 990, 1))


def test_crossed_snapshot_rejected():
    with pytest.raises(ValueError):
        book_with([(1002, 1)], [(1001, 1)])


def test_fifo_within_level():
    b = book_with()
    for oid in (1, 2, 3):
        b.apply(sell(oid, 1001, 100, ts=oid))
    res = b.apply(buy(4, 1001, 150, ts=9))
    assert [(t.maker_id, t.size) for t in res.trades] == [(1, 100), (2, 50)]
    assert b.queue(SELL, 1001) == [(2, 50), (3, 100)]


def test_remainder_rests_at_limit():
    b = book_with([(999, 100)], [(1001, 100)])
    res = b.apply(buy(1, 1003, 250))
    assert (res.executed, res.remaining) == (100, 150)
    assert b.quotes().bid == 1003 and b.quotes().bid_size == 150
    assert b.resting(1) == (BUY, 1003, 150)


def test_snapshot_copy_is_independent():
    b = book_with([(999, 100)], [(1001, 100)])
    snap = b.snapshot()
    b.apply(buy(1, 1001, 100))
    assert snap.quotes().ask == 1001 and b.quotes().ask is None


# -- properties -------------------------------------------------------------------


def _check_invariants(book):
    bids, asks = book.depth(BUY), book.depth(SELL)
    assert all(p1 > p2 for (p1, _), (p2, _) in zip(bids, bids[1:]))
    assert all(p1 < p2 for (p1, _), (p2, _) in zip(asks, asks[1:]))
    if bids and asks:
        assert bids[0][0] < asks[0][0]
    for side, levels in ((BUY, bids), (SELL, asks)):
        for price, vol in levels:
            q = book.queue(side, price)
            assert q and vol == sum(r for _, r in q) and all(r > 0 for _, r in q)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**6))
def test_oracle_equivalence_and_invariants(seed):
    snap, events = random_stream(seed, 300)
    book = OrderBook(1)
    book.load_snapshot(snap)
    quads, trades, updates = [], [], []
    rejected = []
    resting = sum(s.size for s in snap)
    submitted = cancelled = traded = 0
    for i, ev in enumerate(events):
        try:
            res = book.apply(ev)
        except RejectedEvent:
            rejected.append(i)
            continue
        _check_invariants(book)
        quads.append(tuple(book.quotes()))
        trades.extend(tuple(t) for t in res.trades)
        if res.update is not None:
            assert res.update.pre != res.update.post
            updates.append((ev.timestamp, tuple(res.update.pre), tuple(res.update.post)))
        if ev.action == CANCEL:
            cancelled += ev.size
        else:
            assert res.executed + res.remaining == ev.size
            assert res.executed == sum(t.size for t in res.trades)
            submitted += ev.size
            traded += res.executed
    # conservation: every share is resting, traded (twice: maker and taker) or cancelled
    rest_now = sum(v for side in (BUY, SELL) for _, v in book.depth(side))
    assert resting + submitted == rest_now + 2 * traded + cancelled
    n_quads, n_trades, n_updates, n_rejected = naive_replay(snap, events)
    assert quads == n_quads
    assert trades == n_trades
    assert updates == n_updates
    assert rejected == n_rejected


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_mirror_symmetry(seed):
    snap, events = random_stream(seed, 300)
    flow = OrderFlow(events, {1: snap})
    mirrored = mirror_flow(flow, 2000)
    _, t1, u1, r1 = replay(snap, events, 1)
    _, t2, u2, r2 = replay(mirrored.snapshots[1], mirrored.events, 1)
    assert [t.size for t in t1] == [t.size for t in t2]
    assert [r[0] for r in r1] == [r[0] for r in r2]
    assert len(u1) == len(u2)
    for a, b in zip(u1, u2):
        for qa, qb in ((a.pre, b.pre), (a.post, b.post)):
            assert (qa.bid_size, qa.ask_size) == (qb.ask_size, qb.bid_size)
            assert qa.bid == (None if qb.ask is None else 2000 - qb.ask)
            assert qa.ask == (None if qb.bid is None else 2000 - qb.bid)


def test_update_iff_quadruple_changes():
    snap, events = random_stream(11, 2000)
    book = OrderBook(1)
    book.load_snapshot(snap)
    prev = book.quotes()
    for ev in events:
        try:
            res = book.apply(ev)
        except RejectedEvent:
            continue
        now = book.quotes()
        assert (res.update is not None) == (now != prev)
        prev = now
