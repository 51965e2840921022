"""Limit-order-book resiliency toolkit.

Reconstructs a price-time priority book from order flow, classifies orders
by penetrability into 12 aggressiveness types, removes intraday seasonality
with a Fourier Flexible Form regression and builds event-study curves of
spread, best-quote depth and limit-order intensity around effective market
orders.
"""

from .book import (
    BUY, CANCEL, SELL, SUBMIT, BestLimitUpdate, OrderBook, OrderEvent, Quotes,
    SnapshotEntry, Trade, best_quotes, replay, spread,
)
from .classify import (
    ClassifiedOrder, TypeCountTable, classify, penetrability, spread_bucket, tabulate,
)
from .errors import InfeasibleShock, InputError, InvariantViolation, RejectedEvent
from .flow import OrderFlow, mirror_flow
from .resiliency import (
    EventStudyResult, Windows, adjusted_depth_curve, adjusted_intensity_curve,
    adjusted_spread_curve, collect_windows, run_study,
)
from .seasonality import (
    MinuteSeries, SeasonalityModel, build_minute_series, eval_fff, fit_fff,
)
from .session import Session
from .synthflow import FlowParams, ShockSpec, generate, inject_shock, inject_shocks
from .trajectory import DayReplay, replay_day, replay_flow

__version__ = "0.1.0"
