from __future__ import annotations

from dataclasses import dataclass, field
from itertools import groupby

from .book import BUY, SELL, OrderEvent, SnapshotEntry


@dataclass
class OrderFlow:
    """Order-flow events for one instrument plus an opening snapshot per day.

    ``events`` are ordered by (day, timestamp); ties keep file order.
    """

    events: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)

    @property
    def days(self) -> list:
        seen = {ev.day for ev in self.events}
        seen.update(self.snapshots)
        return sorted(seen)

    def iter_days(self):
        """Yield ``(day, snapshot_entries, events)`` in day order."""
        by_day = {d: list(g) for d, g in groupby(self.events, key=lambda e: e.day)}
        for day in self.days:
            yield day, self.snapshots.get(day, []), by_day.get(day, [])

    def __len__(self):
        return len(self.events)


def mirror_flow(flow: OrderFlow, pivot: int) -> OrderFlow:
    """Swap sides and reflect prices about ``pivot / 2``.

    Reflection (``price -> pivot - price``) plays the role of negating prices
    while keeping them positive; ``pivot`` must exceed every price.
    """
    swap = {BUY: SELL, SELL: BUY}
    events = [ev._replace(side=swap[ev.side], price=pivot - ev.price) for ev in flow.events]
    snaps = {
        d: [SnapshotEntry(swap[s], pivot - p, q) for s, p, q in rows]
        for d, rows in flow.snapshots.items()
    }
    for ev in events:
        if ev.price <= 0:
            raise ValueError("pivot too small: mirrored price is not positive")
    return OrderFlow(events, snaps)


__all__ = ["OrderEvent", "OrderFlow", "SnapshotEntry", "mirror_flow"]
