"""Run configuration: flat ``key = value`` files plus command-line overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

from .errors import InputError
from .session import Session
from .synthflow import FlowParams

GROUPINGS = ("type", "spread", "both")


@dataclass
class RunConfig:
    orders: Optional[str] = None
    snapshot: Optional[str] = None
    output_dir: str = "out"
    tick_size: str = "0.01"
    session: Session = field(default_factory=Session)
    spread_buckets: tuple = (1, 2, 3, 4)
    update_half_width: int = 20
    minute_half_width: int = 30
    fff_q: int = 2
    fff_p: int = 6
    grouping: str = "both"
    seasonality: Optional[str] = None
    seed: int = 0
    workers: int = 1
    synth: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.update_half_width <= 0 or self.minute_half_width <= 0:
            raise InputError("window half-widths must be positive")
        b = self.spread_buckets
        if not b or any(x <= 0 for x in b) or any(y <= x for x, y in zip(b, b[1:])):
            raise InputError(f"spread buckets must be positive and strictly increasing: {b}")
        if self.grouping not in GROUPINGS:
            raise InputError(f"grouping must be one of {GROUPINGS}")
        if self.fff_q < 0 or self.fff_p < 0:
            raise InputError("FFF orders must be non-negative")

    @property
    def groupings(self) -> tuple:
        return ("type", "spread") if self.grouping == "both" else (self.grouping,)

    def flow_params(self) -> FlowParams:
        kw = dict(self.synth)
        kw.setdefault("seed", self.seed)
        kw["session"] = self.session
        try:
            return FlowParams(**kw)
        except (TypeError, ValueError) as exc:
            raise InputError(f"invalid synthetic-flow parameters: {exc}") from None


_FLOW_FIELDS = {f.name: f for f in dataclasses.fields(FlowParams)}
_RUN_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _convert(name, raw: str):
    raw = raw.strip()
    if name == "session":
        return Session.parse(raw)
    if name == "spread_buckets":
        return tuple(int(x) for x in raw.split(","))
    if name in ("orders", "snapshot", "seasonality"):
        return raw or None
    if name in ("output_dir", "tick_size", "grouping"):
        return raw
    target = _RUN_FIELDS.get(name) or _FLOW_FIELDS.get(name)
    default = target.default if target is not None else None
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    raise InputError(f"unknown configuration key {name!r}")


def parse_pairs(pairs) -> dict:
    """Turn ``(key, raw_value)`` pairs into typed values (keys may use dashes)."""
    out = {}
    for key, raw in pairs:
        name = key.strip().replace("-", "_")
        if name not in _RUN_FIELDS and name not in _FLOW_FIELDS:
            raise InputError(f"unknown configuration key {key!r}")
        try:
            out[name] = _convert(name, raw)
        except ValueError as exc:
            raise InputError(f"bad value for {key}: {exc}") from None
    return out


def read_config_file(path) -> dict:
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            pairs.append((key, value))
    return parse_pairs(pairs)


def build_config(path=None, overrides=None) -> RunConfig:
    """Config file values, then ``overrides`` (already typed) on top."""
    values = read_config_file(path) if path else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    run = {k: v for k, v in values.items() if k in _RUN_FIELDS and k != "synth"}
    synth = {k: v for k, v in values.items() if k in _FLOW_FIELDS and k not in _RUN_FIELDS}
    return RunConfig(synth=synth, **run)
