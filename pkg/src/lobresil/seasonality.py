"""Intraday seasonality via a Fourier Flexible Form (FFF) regression.

The periodic component of a per-minute metric is modelled as a low-order
polynomial in ``tau / T`` plus ``P`` cosine/sine harmonics::

    x(tau) = sum_q a_q (tau/T)**q
             + sum_p [b_cp cos(2 pi p tau / T) + b_sp sin(2 pi p tau / T)]

with ``tau = 1..T`` the 1-minute interval of the (concatenated) session.
Coefficients are pooled OLS estimates over all days.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InputError
from .session import MINUTE_MS, Session

SPREAD = "spread"
DEPTH_BID = "depth_bid"
DEPTH_ASK = "depth_ask"
METRICS = (
    SPREAD, DEPTH_BID, DEPTH_ASK,
    "intensity_type4", "intensity_type5", "intensity_type10", "intensity_type11",
)
FLOOR_FRACTION = 1e-6


class RankDeficientDesign(InputError):
    pass


def intensity_metric(order_type: int) -> str:
    return f"intensity_type{order_type}"


@dataclass
class MinuteSeries:
    """``values[i, tau - 1]`` is the metric on day ``days[i]`` at minute ``tau``.

    Missing observations are NaN.
    """

    metric: str
    days: np.ndarray
    values: np.ndarray

    @property
    def n_minutes(self) -> int:
        return self.values.shape[1]

    def pooled(self):
        """``(tau, x)`` for every non-missing observation."""
        tau = np.broadcast_to(np.arange(1, self.n_minutes + 1), self.values.shape)
        ok = ~np.isnan(self.values)
        return tau[ok], self.values[ok]

    def scaled(self, c: float) -> "MinuteSeries":
        return MinuteSeries(self.metric, self.days, self.values * c)


def time_weighted_minute_means(times, values, length_ms, minute_ms=MINUTE_MS):
    """Per-minute time-weighted mean of a piecewise-constant signal.

    ``values[i]`` holds from ``times[i]`` until ``times[i + 1]`` (or the end of
    the session). ``times[0]`` must be 0. NaN values count as undefined time;
    minutes with no defined time are NaN.
    """
    times = np.asarray(times, dtype=np.int64)
    values = np.asarray(values, dtype=float)
    if len(times) == 0 or times[0] != 0:
        raise ValueError("the signal must start at time 0")
    ends = np.append(times[1:], length_ms)
    dur = (np.minimum(ends, length_ms) - np.minimum(times, length_ms)).astype(float)
    defined = ~np.isnan(values)
    v = np.where(defined, values, 0.0)
    iv = np.concatenate(([0.0], np.cumsum(v * dur)))
    iw = np.concatenate(([0.0], np.cumsum(defined * dur)))
    edges = np.arange(length_ms // minute_ms + 1, dtype=np.int64) * minute_ms
    idx = np.searchsorted(times, edges, side="right") - 1
    into = (edges - times[idx]).astype(float)
    cv = iv[idx] + v[idx] * into
    cw = iw[idx] + defined[idx] * into
    num, den = np.diff(cv), np.diff(cw)
    out = np.full(len(num), np.nan)
    np.divide(num, den, out=out, where=den > 0)
    return out


def _state_values(replay, metric):
    q = replay.quotes
    if metric == SPREAD:
        return q[:, 2] - q[:, 0]
    if metric == DEPTH_BID:
        return q[:, 1]
    if metric == DEPTH_ASK:
        return q[:, 3]
    raise ValueError(f"not a book-state metric: {metric}")


def build_minute_series(replays, metric: str, session: Session = Session()) -> MinuteSeries:
    """Sample ``metric`` per minute for every replayed day.

    Spread and depths are time-weighted minute means of the book state;
    intensities are raw counts of the given order type per minute.
    """
    T = session.minutes
    days = np.array([r.day for r in replays], dtype=np.int64)
    values = np.empty((len(replays), T))
    if metric.startswith("intensity_type"):
        k = int(metric.removeprefix("intensity_type"))
        for i, r in enumerate(replays):
            tau = r.order_ts[r.order_type == k] // MINUTE_MS
            values[i] = np.bincount(np.minimum(tau, T - 1), minlength=T)
    else:
        for i, r in enumerate(replays):
            times = np.concatenate(([0], r.update_ts))
            values[i] = time_weighted_minute_means(
                times, _state_values(r, metric), session.length_ms
            )
    return MinuteSeries(metric, days, values)


def design_matrix(tau, T: int, Q: int = 2, P: int = 6) -> np.ndarray:
    """Regressor columns: (tau/T)**0..Q, then cos/sin pairs for harmonics 1..P."""
    x = np.asarray(tau, dtype=float) / T
    cols = [x**q for q in range(Q + 1)]
    for p in range(1, P + 1):
        cols.append(np.cos(2 * np.pi * p * x))
        cols.append(np.sin(2 * np.pi * p * x))
    return np.column_stack(cols)


def coefficient_names(Q: int, P: int) -> list:
    names = [f"alpha_{q}" for q in range(Q + 1)]
    for p in range(1, P + 1):
        names += [f"beta_cos_{p}", f"beta_sin_{p}"]
    return names


@dataclass(frozen=True, eq=False)
class SeasonalityModel:
    metric: str
    T: int
    Q: int
    P: int
    coef: np.ndarray  # ordered as ``coefficient_names(Q, P)``
    floor: float
    stderr: np.ndarray = field(default=None, compare=False)
    residual_var: float = float("nan")
    r2: float = float("nan")
    n_obs: int = 0

    @property
    def alpha(self) -> np.ndarray:
        return self.coef[: self.Q + 1]

    @property
    def beta_cos(self) -> np.ndarray:
        return self.coef[self.Q + 1 :: 2]

    @property
    def beta_sin(self) -> np.ndarray:
        return self.coef[self.Q + 2 :: 2]

    def names(self) -> list:
        return coefficient_names(self.Q, self.P)

    def __call__(self, tau):
        return eval_fff(self, tau)

    @cached_property
    def _table(self) -> np.ndarray:
        return design_matrix(np.arange(1, self.T + 1), self.T, self.Q, self.P) @ self.coef

    def curve(self) -> np.ndarray:
        """Seasonal factor at every minute 1..T."""
        return self._table.copy()

    def divisor(self, tau):
        """Seasonal factor floored at ``self.floor``; returns ``(values, floored)``."""
        x = eval_fff(self, tau)
        hit = x < self.floor
        return np.where(hit, self.floor, x), hit


def fit_fff(series: MinuteSeries, Q: int = 2, P: int = 6) -> SeasonalityModel:
    """Pooled OLS fit of the FFF regression; missing minutes are skipped."""
    tau, x = series.pooled()
    return fit_fff_observations(tau, x, series.n_minutes, Q, P, series.metric)


def fit_fff_observations(tau, x, T, Q=2, P=6, metric="") -> SeasonalityModel:
    tau = np.asarray(tau)
    x = np.asarray(x, dtype=float)
    k = Q + 1 + 2 * P
    if len(x) < k:
        raise RankDeficientDesign(
            f"{metric}: {len(x)} observations for {k} coefficients"
        )
    X = design_matrix(tau, T, Q, P)
    coef, _, rank, sv = np.linalg.lstsq(X, x, rcond=None)
    if rank < k:
        raise RankDeficientDesign(
            f"{metric}: design has rank {rank} < {k} coefficients "
            f"({len(np.unique(tau))} distinct minute indices observed)"
        )
    resid = x - X @ coef
    rss = float(resid @ resid)
    dof = len(x) - k
    resid_var = rss / dof if dof > 0 else float("nan")
    _, r = np.linalg.qr(X)
    r_inv = np.linalg.inv(r)
    stderr = np.sqrt(resid_var * np.sum(r_inv**2, axis=1))
    tss = float(((x - x.mean()) ** 2).sum())
    r2 = 1.0 - rss / tss if tss > 0 else 1.0
    floor = max(FLOOR_FRACTION * abs(float(x.mean())), np.finfo(float).tiny)
    return SeasonalityModel(metric, int(T), Q, P, coef, floor, stderr, resid_var, r2, len(x))


def eval_fff(model: SeasonalityModel, tau):
    """Evaluate the seasonal factor at minute(s) ``tau`` in ``1..T``."""
    t = np.asarray(tau)
    if np.any(t < 1) or np.any(t > model.T):
        raise ValueError(f"minute index out of range 1..{model.T}: {tau}")
    if not np.issubdtype(t.dtype, np.integer):
        if np.any(t != np.floor(t)):
            raise ValueError(f"minute index must be integral: {tau}")
        t = t.astype(np.int64)
    out = model._table[t - 1]
    return out if t.ndim else float(out)


def flat_model(metric: str, value: float, T: int = 240) -> SeasonalityModel:
    """A constant seasonal factor (no seasonality)."""
    return SeasonalityModel(metric, T, 0, 0, np.array([float(value)]),
                            max(FLOOR_FRACTION * abs(value), np.finfo(float).tiny))


def save_models(models, path) -> None:
    """Write ``metric,coefficient,value`` rows (plus ``T`` and ``floor``)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "coefficient", "value"])
        for metric in sorted(models):
            m = models[metric]
            w.writerow([metric, "T", m.T])
            w.writerow([metric, "floor", repr(m.floor)])
            for name, value in zip(m.names(), m.coef):
                w.writerow([metric, name, repr(float(value))])


def load_models(path) -> dict:
    rows = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["metric", "coefficient", "value"]:
            raise InputError(f"{path}: unexpected header {header}")
        for metric, name, value in reader:
            rows.setdefault(metric, {})[name] = value
    models = {}
    for metric, d in rows.items():
        Q = sum(1 for n in d if n.startswith("alpha_")) - 1
        P = sum(1 for n in d if n.startswith("beta_cos_"))
        coef = np.array([float(d[n]) for n in coefficient_names(Q, P)])
        models[metric] = SeasonalityModel(metric, int(d["T"]), Q, P, coef, float(d["floor"]))
    return models
