import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lobresil import (
    BUY, SELL, SUBMIT, OrderBook, OrderEvent, RejectedEvent, SnapshotEntry,
    TypeCountTable, classify, penetrability, spread_bucket, tabulate,
)
from lobresil.classify import mirror_type
from lobresil.errors import InvariantViolation
from lobresil.classify import order_type
from lobresil.book import Quotes
from lobresil.trajectory import replay_day

from helpers import random_stream


def book_with(bids=(), asks=()):
    b = OrderBook(day=1)
    b.load_snapshot([SnapshotEntry(BUY, p, v) for p, v in bids]
                    + [SnapshotEntry(SELL, p, v) for p, v in asks])
    return b


def run(book, ev):
    """Classify ``ev`` against a copy of ``book`` taken before applying it."""
    pre = book.snapshot()
    res = book.apply(ev)
    return classify(pre, ev, res.executed, res.remaining)


# -- penetrability ------------------------------------------------------------------


@pytest.mark.parametrize("executed,p", [(0, 0), (300, 1), (400, 1), (401, 2), (1000, 2)])
def test_penetrability_examples(executed, p):
    assert penetrability(book_with(asks=[(1001, 400), (1002, 600)]), BUY, executed) == p


def test_penetrability_too_much_volume():
    with pytest.raises(ValueError):
        penetrability(book_with(asks=[(1001, 400)]), BUY, 401)


def test_penetrability_sell_side_uses_bids():
    b = book_with(bids=[(1000, 100), (999, 100)], asks=[(1001, 5)])
    assert penetrability(b, SELL, 150) == 2


# -- classification examples ------------------------------------------------------------


EX_BOOK = dict(bids=[(1000, 500)], asks=[(1001, 400), (1002, 600)])
WIDE_BOOK = dict(bids=[(1000, 500)], asks=[(1003, 400)])


@pytest.mark.parametrize("book,price,size,expected", [
    (EX_BOOK, 1001, 300, (3, 1, 300, 0, 1)),
    (EX_BOOK, 1001, 700, (2, 1, 400, 300, 1)),
    (EX_BOOK, 1002, 700, (1, 2, 700, 0, 1)),
    (WIDE_BOOK, 1001, 100, (4, 0, 0, 100, 3)),
    (WIDE_BOOK, 1000, 100, (5, 0, 0, 100, 3)),
    (WIDE_BOOK, 999, 100, (6, 0, 0, 100, 3)),
])
def test_classify_examples(book, price, size, expected):
    c = run(book_with(**book), OrderEvent(1, 0, 1, BUY, price, size))
    assert (c.order_type, c.p, c.executed, c.remaining, c.spread_bucket) == expected


def test_tabulate_examples():
    assert tabulate([]).total == 0
    assert not tabulate([]).counts.any()
    cases = [(EX_BOOK, 1001, 300), (EX_BOOK, 1001, 700), (EX_BOOK, 1002, 700),
             (WIDE_BOOK, 1001, 100), (WIDE_BOOK, 1000, 100), (WIDE_BOOK, 999, 100)]
    cl = [run(book_with(**b), OrderEvent(1, 0, 1, BUY, p, s)) for b, p, s in cases]
    t = tabulate(cl)
    expected = np.zeros((12, 4), dtype=int)
    for k in (1, 2, 3):
        expected[k - 1, 0] = 1
    for k in (4, 5, 6):
        expected[k - 1, 2] = 1
    assert np.array_equal(t.counts, expected)
    assert t.total == 6


def test_marketable_order_on_empty_opposite_side_is_limit_type():
    c = run(book_with(bids=[(1000, 100)]), OrderEvent(1, 0, 1, BUY, 1005, 100))
    assert (c.order_type, c.p, c.spread_bucket) == (4, 0, None)
    c = run(book_with(bids=[(1000, 100)]), OrderEvent(1, 0, 1, SELL, 1005, 100))
    assert c.order_type == 10


def test_impossible_p0_buy_through_ask():
    with pytest.raises(InvariantViolation):
        order_type(BUY, 1003, 0, 100, Quotes(1000, 1, 1002, 1))


@pytest.mark.parametrize("spread,bucket", [(None, None), (0, None), (1, 1), (2, 2), (3, 3),
                                           (4, 4), (17, 4)])
def test_spread_bucket(spread, bucket):
    assert spread_bucket(spread) == bucket


def test_table_csv_round_trip(tmp_path):
    t = TypeCountTable()
    rng = np.random.default_rng(0)
    t.add_arrays(rng.integers(1, 13, 500), rng.integers(1, 5, 500))
    path = tmp_path / "t.csv"
    t.to_csv(path)
    back = TypeCountTable.from_csv(path)
    assert np.array_equal(back.counts, t.counts)
    lines = path.read_text().splitlines()
    assert lines[0] == "type,spread_1,spread_2,spread_3,spread_4plus"
    assert len(lines) == 13


def test_table_merge_and_add_agree():
    a, b, c = TypeCountTable(), TypeCountTable(), TypeCountTable()
    a.add(3, 1)
    b.add(4, None)
    b.add(9, 2)
    for k, bk in ((3, 1), (4, None), (9, 2)):
        c.add(k, bk)
    assert a.merge(b) == c
    assert c.row_totals().sum() == c.total == 3


# -- properties on random streams -----------------------------------------------------


def _classified_stream(seed, n=400):
    snap, events = random_stream(seed, n)
    book = OrderBook(1)
    book.load_snapshot(snap)
    out = []
    for ev in events:
        pre = book.snapshot() if ev.action == SUBMIT else None
        try:
            res = book.apply(ev)
        except RejectedEvent:
            continue
        if pre is not None:
            out.append((pre, classify(pre, ev, res.executed, res.remaining)))
    return out


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_partition_and_eq3_consistency(seed):
    for pre, c in _classified_stream(seed):
        ev = c.event
        assert 1 <= c.order_type <= 12
        assert (c.order_type <= 6) == (ev.side == BUY)
        assert (c.order_type in (1, 2, 3, 7, 8, 9)) == (c.p >= 1)
        assert c.executed + c.remaining == ev.size
        if c.p == 0:
            continue
        levels = pre.depth(SELL if ev.side == BUY else BUY)
        cum = np.cumsum([v for _, v in levels])
        prices = [px for px, _ in levels]
        through = (lambda a, b: a >= b) if ev.side == BUY else (lambda a, b: a <= b)
        lower = cum[c.p - 2] if c.p >= 2 else 0
        if c.remaining == 0:
            assert lower < ev.size <= cum[c.p - 1]
            assert through(ev.price, prices[c.p - 1])
        else:
            # partially filled: every share up to level p consumed, price at
            # or beyond a_p but short of a_{p+1}
            assert ev.size > cum[c.p - 1] and c.executed == cum[c.p - 1]
            assert through(ev.price, prices[c.p - 1])
            if c.p < len(prices):
                assert not through(ev.price, prices[c.p])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_type4_impossible_at_one_tick(seed):
    for _, c in _classified_stream(seed):
        if c.pre_spread == 1:
            assert c.order_type not in (4, 10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_penetrability_monotone(seed):
    snap, _ = random_stream(seed, 0)
    b = OrderBook(1)
    b.load_snapshot(snap)
    total = sum(v for _, v in b.depth(SELL))
    ps = [penetrability(b, BUY, w) for w in range(total + 1)]
    assert ps == sorted(ps) and ps[0] == 0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6))
def test_classification_mirror(seed):
    pairs = _classified_stream(seed)
    for pre, c in pairs:
        mirrored = OrderBook(1)
        mirrored.load_snapshot(
            [SnapshotEntry(SELL, 3000 - px, v) for px, v in pre.depth(BUY)]
            + [SnapshotEntry(BUY, 3000 - px, v) for px, v in pre.depth(SELL)]
        )
        ev = c.event._replace(side=SELL if c.event.side == BUY else BUY,
                              price=3000 - c.event.price, order_id=10**9)
        res = mirrored.snapshot().apply(ev)
        m = classify(mirrored, ev, res.executed, res.remaining)
        assert m.order_type == mirror_type(c.order_type)
        assert (m.p, m.executed, m.pre_spread) == (c.p, c.executed, c.pre_spread)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_replay_penetrability_matches_depth_walk(seed):
    """The replay derives p from distinct trade prices; the classifier walks depth."""
    snap, events = random_stream(seed, 400)
    r = replay_day(1, snap, events, keep_classified=True)
    direct = [c for _, c in _classified_stream(seed)]
    assert [c.order_type for c in direct] == r.order_type.tolist()
    assert [c.p for c in direct] == r.p.tolist()
    assert [c.order_type for c in r.classified] == r.order_type.tolist()
