"""Event-study curves of spread, depth and limit-order intensity around
effective market orders (types 1-3 and 7-9).

Spread and depth are sampled on the best-limit-update clock: ``t = 0`` is the
book just before the anchor order and ``t = 1`` the state after the anchor's
own update. Intensity is counted on a 1-minute clock anchored at the anchor's
transaction time: interval ``[t] = +1`` is the minute right after it, ``-1``
the minute right before. Each observation is deseasonalized by the fitted
intraday factor of the minute it falls in.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .classify import INTENSITY_TYPES, MARKET_TYPES
from .errors import InvariantViolation
from .seasonality import (
    DEPTH_ASK, DEPTH_BID, METRICS, SPREAD, build_minute_series, fit_fff,
    intensity_metric,
)
from .session import MINUTE_MS, Session

log = logging.getLogger(__name__)

UPDATE_HALF_WIDTH = 20
MINUTE_HALF_WIDTH = 30
BY_TYPE = "type"
BY_SPREAD = "spread"


def minute_offsets(half_width=MINUTE_HALF_WIDTH) -> np.ndarray:
    return np.concatenate((np.arange(-half_width, 0), np.arange(1, half_width + 1)))


@dataclass
class EventWindow:
    """Samples around one anchor; NaN marks masked positions."""

    day: int
    order_id: int
    order_type: int
    timestamp: int
    pre_spread: float
    bucket: int
    spread: np.ndarray
    depth_bid: np.ndarray
    depth_ask: np.ndarray
    tau: np.ndarray
    counts: dict
    tau_lo: np.ndarray
    tau_hi: np.ndarray
    minute_valid: np.ndarray
    overlap: int


@dataclass
class Windows:
    """A batch of event windows stored column-wise.

    Per anchor ``i``: ``spread[i, j]`` etc. are the samples at update offset
    ``t_updates[j]`` (NaN where outside the day or undefined), ``tau[i, j]``
    the minute index used to deseasonalize them. ``counts[i, m, j]`` is the
    number of type ``intensity_types[m]`` submits in interval
    ``t_minutes[j]``, whose seasonal minutes are ``tau_lo``/``tau_hi``.
    """

    day: np.ndarray
    order_id: np.ndarray
    order_type: np.ndarray
    is_buy: np.ndarray
    timestamp: np.ndarray
    size: np.ndarray
    executed: np.ndarray
    remaining: np.ndarray
    pre_spread: np.ndarray
    bucket: np.ndarray
    overlap: np.ndarray
    t_updates: np.ndarray
    spread: np.ndarray
    depth_bid: np.ndarray
    depth_ask: np.ndarray
    tau: np.ndarray
    t_minutes: np.ndarray
    counts: np.ndarray
    tau_lo: np.ndarray
    tau_hi: np.ndarray
    minute_valid: np.ndarray
    intensity_types: tuple = INTENSITY_TYPES

    _per_anchor = (
        "day", "order_id", "order_type", "is_buy", "timestamp", "size", "executed",
        "remaining", "pre_spread", "bucket", "overlap", "spread", "depth_bid",
        "depth_ask", "tau", "counts", "tau_lo", "tau_hi", "minute_valid",
    )

    def __len__(self):
        return len(self.order_id)

    def select(self, mask) -> "Windows":
        kw = {name: getattr(self, name)[mask] for name in self._per_anchor}
        return Windows(t_updates=self.t_updates, t_minutes=self.t_minutes,
                       intensity_types=self.intensity_types, **kw)

    def __getitem__(self, i) -> EventWindow:
        return EventWindow(
            int(self.day[i]), int(self.order_id[i]), int(self.order_type[i]),
            int(self.timestamp[i]), float(self.pre_spread[i]), int(self.bucket[i]),
            self.spread[i], self.depth_bid[i], self.depth_ask[i], self.tau[i],
            {k: self.counts[i, m] for m, k in enumerate(self.intensity_types)},
            self.tau_lo[i], self.tau_hi[i], self.minute_valid[i], int(self.overlap[i]),
        )

    def offset_index(self, t: int) -> int:
        return int(np.searchsorted(self.t_updates, t))

    @classmethod
    def concat(cls, parts) -> "Windows":
        parts = list(parts)
        kw = {n: np.concatenate([getattr(p, n) for p in parts]) for n in cls._per_anchor}
        first = parts[0]
        return cls(t_updates=first.t_updates, t_minutes=first.t_minutes,
                   intensity_types=first.intensity_types, **kw)


def collect_windows(
    replays,
    session: Session = Session(),
    update_half_width: int = UPDATE_HALF_WIDTH,
    minute_half_width: int = MINUTE_HALF_WIDTH,
    anchor_types=MARKET_TYPES,
) -> Windows:
    """Gather the event window of every effective market order."""
    parts = [
        _day_windows(r, session, update_half_width, minute_half_width, anchor_types)
        for r in replays
    ]
    if not parts:
        parts = [_empty_windows(update_half_width, minute_half_width)]
    return Windows.concat(parts)


def _empty_windows(H, M):
    t_upd = np.arange(-H, H + 1)
    t_min = minute_offsets(M)
    i64 = lambda *shape: np.zeros(shape, dtype=np.int64)  # noqa: E731
    z = np.zeros((0, len(t_upd)))
    return Windows(
        day=i64(0), order_id=i64(0), order_type=i64(0), is_buy=np.zeros(0, bool),
        timestamp=i64(0), size=i64(0), executed=i64(0), remaining=i64(0),
        pre_spread=np.zeros(0), bucket=i64(0), overlap=i64(0), t_updates=t_upd,
        spread=z, depth_bid=z.copy(), depth_ask=z.copy(), tau=i64(0, len(t_upd)),
        t_minutes=t_min, counts=i64(0, len(INTENSITY_TYPES), len(t_min)),
        tau_lo=i64(0, len(t_min)), tau_hi=i64(0, len(t_min)),
        minute_valid=np.zeros((0, len(t_min)), dtype=bool),
    )


def _day_windows(r, session, H, M, anchor_types):
    if r is None:
        return _empty_windows(H, M)
    sel = np.flatnonzero(np.isin(r.order_type, anchor_types))
    n = len(sel)
    if n == 0:
        return _empty_windows(H, M)
    t_upd = np.arange(-H, H + 1)
    t_min = minute_offsets(M)
    kinds = INTENSITY_TYPES

    if np.any(r.executed[sel] <= 0):
        raise InvariantViolation(f"day {r.day}: anchor order without a transaction")
    U = r.n_updates
    u0 = r.pre_update[sel]
    # the anchor's own update must follow its 0- state
    if np.any(u0 >= U):
        raise InvariantViolation(f"day {r.day}: anchor order without a best-limit update")
    ts_a = r.order_ts[sel]

    # -- best-limit-update clock ------------------------------------------
    idx = u0[:, None] + t_upd[None, :]
    in_day = (idx >= 0) & (idx <= U)
    idxc = np.clip(idx, 0, U)
    q = r.quotes[idxc]
    q[~in_day] = np.nan
    spread = q[..., 2] - q[..., 0]
    state_ts = np.concatenate(([0], r.update_ts))
    tau = state_ts[idxc] // MINUTE_MS + 1
    tau[:, H] = ts_a // MINUTE_MS + 1
    tau = np.minimum(tau, session.minutes)
    tau[~in_day] = 0

    # overlap: other anchors whose own update falls inside this window
    u_sorted = np.sort(u0)
    lo = np.searchsorted(u_sorted, u0 - H, side="left")
    hi = np.searchsorted(u_sorted, u0 + H, side="right")
    overlap = hi - lo - 1

    # -- minute clock -------------------------------------------------------
    start = ts_a[:, None] + np.where(t_min > 0, t_min - 1, t_min)[None, :] * MINUTE_MS
    end = start + MINUTE_MS
    valid = (start >= 0) & (end <= session.length_ms)
    for b in session.breaks_ms:
        valid &= ~((start < b) & (end > b))
    counts = np.empty((n, len(kinds), len(t_min)), dtype=np.int64)
    for m, k in enumerate(kinds):
        times = r.order_ts[r.order_type == k]
        counts[:, m, :] = (np.searchsorted(times, end, side="left")
                           - np.searchsorted(times, start, side="left"))
    tau_lo = np.clip(start // MINUTE_MS + 1, 1, session.minutes)
    tau_hi = np.clip((end - 1) // MINUTE_MS + 1, 1, session.minutes)

    return Windows(
        day=np.full(n, r.day, dtype=np.int64), order_id=r.order_id[sel],
        order_type=r.order_type[sel], is_buy=r.is_buy[sel], timestamp=ts_a,
        size=r.size[sel], executed=r.executed[sel], remaining=r.remaining[sel],
        pre_spread=r.pre_spread[sel], bucket=r.bucket[sel], overlap=overlap,
        t_updates=t_upd, spread=spread, depth_bid=q[..., 1], depth_ask=q[..., 3],
        tau=tau, t_minutes=t_min, counts=counts, tau_lo=tau_lo, tau_hi=tau_hi,
        minute_valid=valid,
    )


# -- aggregation ---------------------------------------------------------------


class CurveAccumulator:
    """Per-position running sums of deseasonalized observations.

    ``add`` and ``merge`` form an associative, commutative reduction, so
    windows can be split across workers in any way.
    """

    def __init__(self, n_positions: int):
        self.sum = np.zeros(n_positions)
        self.count = np.zeros(n_positions, dtype=np.int64)
        self.floored = np.zeros(n_positions, dtype=np.int64)

    def add(self, ratios, floored=None) -> "CurveAccumulator":
        ok = ~np.isnan(ratios)
        # reduce along a contiguous axis so numpy uses pairwise summation
        self.sum += np.ascontiguousarray(np.where(ok, ratios, 0.0).T).sum(axis=1)
        self.count += ok.sum(axis=0)
        if floored is not None:
            self.floored += (floored & ok).sum(axis=0)
        return self

    def merge(self, other: "CurveAccumulator") -> "CurveAccumulator":
        out = CurveAccumulator(len(self.sum))
        out.sum = self.sum + other.sum
        out.count = self.count + other.count
        out.floored = self.floored + other.floored
        return out

    def mean(self) -> np.ndarray:
        out = np.full(len(self.sum), np.nan)
        np.divide(self.sum, self.count, out=out, where=self.count > 0)
        return out


def _state_ratios(samples, tau, model):
    """Observation / floored seasonal factor; NaN where masked."""
    ok = ~np.isnan(samples)
    div, hit = model.divisor(np.where(ok, tau, 1))
    return np.where(ok, samples / div, np.nan), hit


def accumulate_state(windows: Windows, metric: str, model) -> CurveAccumulator:
    samples = {SPREAD: windows.spread, DEPTH_BID: windows.depth_bid,
               DEPTH_ASK: windows.depth_ask}[metric]
    ratios, hit = _state_ratios(samples, windows.tau, model)
    return CurveAccumulator(len(windows.t_updates)).add(ratios, hit)


def intensity_ratios(windows: Windows, order_type: int, model):
    """Per-window contributions ``2 * count / (lambda(tau-) + lambda(tau+))``.

    Observations whose two seasonal factors are both at the floor are
    excluded; returns ``(ratios, floored)``.
    """
    m = windows.intensity_types.index(order_type)
    lo, hit_lo = model.divisor(windows.tau_lo)
    hi, hit_hi = model.divisor(windows.tau_hi)
    both = hit_lo & hit_hi
    ok = windows.minute_valid & ~both
    ratios = np.where(ok, 2.0 * windows.counts[:, m, :] / (lo + hi), np.nan)
    return ratios, both & windows.minute_valid


def accumulate_intensity(windows: Windows, order_type: int, model) -> CurveAccumulator:
    ratios, _ = intensity_ratios(windows, order_type, model)
    return CurveAccumulator(len(windows.t_minutes)).add(ratios)


def normalized(acc: CurveAccumulator, zero_index: int) -> np.ndarray:
    """100 * mean(t) / mean(0); exactly 100 at ``zero_index``."""
    m = acc.mean()
    return 100.0 * (m / m[zero_index])


@dataclass
class Curve:
    t: np.ndarray
    value: np.ndarray
    n: np.ndarray
    n_floored: np.ndarray

    def at(self, t):
        return self.value[int(np.searchsorted(self.t, t))]


def _state_curve(windows, metric, model):
    acc = accumulate_state(windows, metric, model)
    z = windows.offset_index(0)
    return Curve(windows.t_updates, normalized(acc, z), acc.count, acc.floored)


def adjusted_spread_curve(windows: Windows, model) -> Curve:
    """S(t): mean deseasonalized spread per update offset, 100 at t = 0."""
    return _state_curve(windows, SPREAD, model)


def adjusted_depth_curve(windows: Windows, model, side: str) -> Curve:
    """D(t) for the best bid (``side="bid"``) or best ask (``"ask"``)."""
    metric = {"bid": DEPTH_BID, "ask": DEPTH_ASK}[side]
    return _state_curve(windows, metric, model)


def adjusted_intensity_curve(windows: Windows, model, order_type: int) -> Curve:
    ratios, floored = intensity_ratios(windows, order_type, model)
    acc = CurveAccumulator(len(windows.t_minutes)).add(ratios)
    return Curve(windows.t_minutes, acc.mean(), acc.count, floored.sum(axis=0))


# -- studies -------------------------------------------------------------------


@dataclass
class EventStudyResult:
    group: str
    n_anchors: int
    spread: Curve
    depth_bid: Curve
    depth_ask: Curve
    intensity: dict = field(default_factory=dict)

    def curves(self):
        """``(metric, series, curve)`` in export order."""
        yield "spread", "all", self.spread
        yield "depth", "bid", self.depth_bid
        yield "depth", "ask", self.depth_ask
        for k in sorted(self.intensity):
            yield "intensity", f"type{k}", self.intensity[k]


class StudyAccumulator:
    """Streaming accumulation of all curves for one group."""

    def __init__(self, n_updates, n_minutes, kinds=INTENSITY_TYPES):
        self.n_anchors = 0
        self.state = {m: CurveAccumulator(n_updates) for m in (SPREAD, DEPTH_BID, DEPTH_ASK)}
        self.intensity = {k: CurveAccumulator(n_minutes) for k in kinds}

    def add(self, windows: Windows, models) -> "StudyAccumulator":
        self.n_anchors += len(windows)
        for metric, acc in self.state.items():
            samples = {SPREAD: windows.spread, DEPTH_BID: windows.depth_bid,
                       DEPTH_ASK: windows.depth_ask}[metric]
            acc.add(*_state_ratios(samples, windows.tau, models[metric]))
        for k, acc in self.intensity.items():
            acc.add(*intensity_ratios(windows, k, models[intensity_metric(k)]))
        return self

    def merge(self, other: "StudyAccumulator") -> "StudyAccumulator":
        out = StudyAccumulator(len(self.state[SPREAD].sum), 0, ())
        out.n_anchors = self.n_anchors + other.n_anchors
        out.state = {m: a.merge(other.state[m]) for m, a in self.state.items()}
        out.intensity = {k: a.merge(other.intensity[k]) for k, a in self.intensity.items()}
        return out

    def result(self, group, t_updates, t_minutes) -> EventStudyResult:
        z = int(np.searchsorted(t_updates, 0))
        curves = {
            m: Curve(t_updates, normalized(a, z), a.count, a.floored)
            for m, a in self.state.items()
        }
        inten = {
            k: Curve(t_minutes, a.mean(), a.count, a.floored)
            for k, a in self.intensity.items()
        }
        return EventStudyResult(group, self.n_anchors, curves[SPREAD],
                                curves[DEPTH_BID], curves[DEPTH_ASK], inten)


def bucket_label(bucket: int, edges) -> str:
    return f"{edges[bucket - 1]}plus" if bucket == len(edges) else str(edges[bucket - 1])


def group_keys(windows: Windows, grouping: str, edges=(1, 2, 3, 4)):
    """Ordered ``(key, mask)`` pairs for a grouping mode.

    ``windows=None`` yields the keys with ``None`` masks.
    """
    if grouping == BY_TYPE:
        for k in MARKET_TYPES:
            yield f"type{k}", None if windows is None else windows.order_type == k
    elif grouping == BY_SPREAD:
        for side, is_buy in (("buy", True), ("sell", False)):
            for b in range(1, len(edges) + 1):
                key = f"{side}_s{bucket_label(b, edges)}"
                if windows is None:
                    yield key, None
                else:
                    yield key, (windows.is_buy == is_buy) & (windows.bucket == b)
    else:
        raise ValueError(f"unknown grouping {grouping!r}")


def fit_models(replays, session=Session(), Q=2, P=6, metrics=METRICS) -> dict:
    return {m: fit_fff(build_minute_series(replays, m, session), Q, P) for m in metrics}


def run_study(
    replays,
    models=None,
    grouping: str = BY_TYPE,
    session: Session = Session(),
    update_half_width: int = UPDATE_HALF_WIDTH,
    minute_half_width: int = MINUTE_HALF_WIDTH,
    edges=(1, 2, 3, 4),
    Q: int = 2,
    P: int = 6,
) -> dict:
    """Event-study curves per group, accumulated day by day.

    ``models`` maps metric ids to fitted seasonality models; missing ones are
    fitted from ``replays``. Empty groups are omitted (with a log warning).
    """
    models = dict(models or {})
    missing = [m for m in METRICS if m not in models]
    if missing:
        models.update(fit_models(replays, session, Q, P, missing))
    t_upd = np.arange(-update_half_width, update_half_width + 1)
    t_min = minute_offsets(minute_half_width)
    accs = {}
    for r in replays:
        w = collect_windows([r], session, update_half_width, minute_half_width)
        for key, mask in group_keys(w, grouping, edges):
            if not mask.any():
                continue
            acc = accs.setdefault(key, StudyAccumulator(len(t_upd), len(t_min)))
            acc.add(w.select(mask), models)
    out = {}
    for key, _ in group_keys(None, grouping, edges):
        if key not in accs:
            log.warning("group %s has no anchors; omitted", key)
            continue
        out[key] = accs[key].result(key, t_upd, t_min)
    return out


def _fmt(x) -> str:
    return "" if np.isnan(x) else repr(float(x))


def write_study_csv(results: dict, path) -> int:
    """Long-format export: ``group,metric,series,t,value,n``. Returns row count."""
    rows = 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["group", "metric", "series", "t", "value", "n"])
        for key, res in results.items():
            for metric, series, curve in res.curves():
                for t, v, n in zip(curve.t, curve.value, curve.n):
                    w.writerow([key, metric, series, int(t), _fmt(v), int(n)])
                    rows += 1
    return rows


def read_study_csv(path) -> dict:
    """``{(group, metric, series): (t, value, n)}`` arrays from an export."""
    out = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for group, metric, series, t, v, n in reader:
            out.setdefault((group, metric, series), []).append(
                (int(t), float(v) if v else np.nan, int(n))
            )
    return {k: tuple(np.array(c) for c in zip(*rows)) for k, rows in out.items()}
