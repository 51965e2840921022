"""Order-flow and snapshot CSV formats.

Order flow (one file per instrument)::

    day,timestamp_ms,order_id,side,price,size,action

``side`` is ``B``/``S``, ``action`` is ``S`` (submit) or ``C`` (cancel),
``price`` is in currency units with exactly two decimals. Opening snapshot::

    day,side,price,size

Snapshot rows become resting orders with ids -1, -2, ... per day, in file
order, so cancels may refer to them.
"""

from __future__ import annotations

import logging
from decimal import Decimal, InvalidOperation
from typing import NamedTuple

from .book import CANCEL, SUBMIT, OrderEvent, SnapshotEntry
from .errors import InputError
from .flow import OrderFlow
from .session import Session

log = logging.getLogger(__name__)

ORDERS_HEADER = "day,timestamp_ms,order_id,side,price,size,action"
SNAPSHOT_HEADER = "day,side,price,size"
MAX_BAD_FRACTION = 0.01


class RowError(NamedTuple):
    line: int
    message: str


class PriceCodec:
    """Converts between 2-decimal price strings and integer ticks."""

    def __init__(self, tick_size="0.01"):
        try:
            cents = Decimal(str(tick_size)) * 100
        except InvalidOperation:
            raise InputError(f"invalid tick size {tick_size!r}") from None
        if cents <= 0 or cents != cents.to_integral_value():
            raise InputError(f"tick size {tick_size} must be a positive multiple of 0.01")
        self.tick_cents = int(cents)

    def to_ticks(self, text: str) -> int:
        if len(text) < 4 or text[-3] != "." or not text[:-3].isdigit() or not text[-2:].isdigit():
            raise ValueError(f"price {text!r} must have exactly 2 decimals")
        cents = int(text[:-3]) * 100 + int(text[-2:])
        ticks, rem = divmod(cents, self.tick_cents)
        if rem:
            raise ValueError(f"price {text} is not a multiple of the tick size")
        if ticks <= 0:
            raise ValueError(f"price {text} must be positive")
        return ticks

    def to_text(self, ticks: int) -> str:
        cents = ticks * self.tick_cents
        return f"{cents // 100}.{cents % 100:02d}"


def _check_header(path, line, expected):
    if line.strip().lstrip("﻿") != expected:
        raise InputError(f"{path}: header must be {expected!r}, got {line.strip()!r}")


def read_orders(path, codec=None, session=Session()):
    """Parse and validate an order-flow file.

    Returns ``(events, row_errors)``; events are stably sorted by
    (day, timestamp). Raises :class:`InputError` if more than 1% of the rows
    are malformed.
    """
    codec = codec or PriceCodec()
    L = session.length_ms
    events, errors = [], []
    with open(path, newline="") as fh:
        _check_header(path, fh.readline(), ORDERS_HEADER)
        n = 0
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            n += 1
            parts = line.split(",")
            try:
                if len(parts) != 7:
                    raise ValueError(f"expected 7 fields, got {len(parts)}")
                day, ts, oid, side, price, size, action = parts
                ts = int(ts)
                size = int(size)
                if side not in ("B", "S"):
                    raise ValueError(f"unknown side {side!r}")
                if action not in (SUBMIT, CANCEL):
                    raise ValueError(f"unknown action code {action!r}")
                if size <= 0:
                    raise ValueError(f"size must be positive, got {size}")
                if not 0 <= ts < L:
                    raise ValueError(f"timestamp {ts} outside the session [0, {L})")
                events.append(OrderEvent(int(day), ts, int(oid), side,
                                         codec.to_ticks(price), size, action))
            except ValueError as exc:
                errors.append(RowError(lineno, str(exc)))
    if errors:
        for e in errors[:10]:
            log.warning("%s:%d: %s", path, e.line, e.message)
        if len(errors) > MAX_BAD_FRACTION * n:
            raise InputError(
                f"{path}: {len(errors)} of {n} rows malformed "
                f"(first at line {errors[0].line}: {errors[0].message})"
            )
    if any(b[:2] < a[:2] for a, b in zip(events, events[1:])):
        events.sort(key=lambda e: (e.day, e.timestamp))
    return events, errors


def read_snapshot(path, codec=None) -> dict:
    codec = codec or PriceCodec()
    snaps = {}
    with open(path, newline="") as fh:
        _check_header(path, fh.readline(), SNAPSHOT_HEADER)
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            try:
                day, side, price, size = line.split(",")
                if side not in ("B", "S"):
                    raise ValueError(f"unknown side {side!r}")
                size = int(size)
                if size <= 0:
                    raise ValueError(f"size must be positive, got {size}")
                snaps.setdefault(int(day), []).append(
                    SnapshotEntry(side, codec.to_ticks(price), size)
                )
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from None
    return snaps


def ingest(orders_path, snapshot_path=None, tick_size="0.01", session=Session()):
    """Load an order-flow file (and optional snapshot file) into an OrderFlow.

    Returns ``(flow, row_errors)``.
    """
    codec = PriceCodec(tick_size)
    events, errors = read_orders(orders_path, codec, session)
    snaps = read_snapshot(snapshot_path, codec) if snapshot_path else {}
    return OrderFlow(events, snaps), errors


def write_orders(flow: OrderFlow, path, tick_size="0.01") -> None:
    text = PriceCodec(tick_size).to_text
    with open(path, "w", newline="") as fh:
        fh.write(ORDERS_HEADER + "\n")
        fh.writelines(
            f"{e.day},{e.timestamp},{e.order_id},{e.side},{text(e.price)},{e.size},{e.action}\n"
            for e in flow.events
        )


def write_snapshot(flow: OrderFlow, path, tick_size="0.01") -> None:
    text = PriceCodec(tick_size).to_text
    with open(path, "w", newline="") as fh:
        fh.write(SNAPSHOT_HEADER + "\n")
        for day in sorted(flow.snapshots):
            for side, price, size in flow.snapshots[day]:
                fh.write(f"{day},{side},{text(price)},{size}\n")
