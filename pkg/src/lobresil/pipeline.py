"""End-to-end driver: replay -> classification -> seasonality -> event study."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classify import TypeCountTable
from .config import RunConfig
from .resiliency import run_study, write_study_csv
from .seasonality import METRICS, build_minute_series, fit_fff, load_models, save_models
from .trajectory import replay_day

log = logging.getLogger(__name__)

TYPE_COUNTS = "type_counts.csv"
SEASONALITY = "seasonality.csv"
SUMMARY = "summary.csv"


def study_filename(grouping: str) -> str:
    return f"study_by_{grouping}.csv"


def _replay_args(args):
    return replay_day(*args)


def replay_all(flow, config: RunConfig):
    """Replay every day; days run in worker processes when ``config.workers > 1``."""
    jobs = [(day, snap, evs, config.spread_buckets) for day, snap, evs in flow.iter_days()]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            return list(pool.map(_replay_args, jobs))
    return [replay_day(*job) for job in jobs]


def type_count_table(replays, edges) -> TypeCountTable:
    table = TypeCountTable(edges)
    for r in replays:
        table.add_arrays(r.order_type, r.bucket)
    return table


def fit_seasonality(replays, config: RunConfig) -> dict:
    return {
        m: fit_fff(build_minute_series(replays, m, config.session), config.fff_q, config.fff_p)
        for m in METRICS
    }


@dataclass
class PipelineResult:
    replays: list
    table: TypeCountTable
    models: dict
    studies: dict = field(default_factory=dict)

    def summary(self) -> list:
        """``(key, value)`` bookkeeping rows for reconciliation."""
        rows = [
            ("days", len(self.replays)),
            ("events", sum(r.n_events for r in self.replays)),
            ("rejected_events", sum(len(r.rejected) for r in self.replays)),
            ("submits", sum(len(r.order_id) for r in self.replays)),
            ("best_limit_updates", sum(r.n_updates for r in self.replays)),
            ("classified_orders", self.table.total),
            ("unbucketed_orders", int(self.table.unbucketed.sum())),
        ]
        for grouping, results in self.studies.items():
            for key, res in results.items():
                rows.append((f"anchors.{grouping}.{key}", res.n_anchors))
        return rows


def run_pipeline(flow, config: RunConfig, steps=("classify", "seasonality", "study")):
    replays = replay_all(flow, config)
    table = type_count_table(replays, config.spread_buckets)
    models = {}
    if config.seasonality:
        models = load_models(config.seasonality)
    elif "seasonality" in steps or "study" in steps:
        models = fit_seasonality(replays, config)
    studies = {}
    if "study" in steps:
        for g in config.groupings:
            studies[g] = run_study(
                replays, models, g, config.session, config.update_half_width,
                config.minute_half_width, config.spread_buckets, config.fff_q, config.fff_p,
            )
    return PipelineResult(replays, table, models, studies)


def write_artifacts(result: PipelineResult, outdir, steps=("classify", "seasonality", "study")):
    """Write the requested artifacts; on any failure nothing new is left behind."""
    os.makedirs(outdir, exist_ok=True)
    writers = []
    if "classify" in steps:
        writers.append((TYPE_COUNTS, result.table.to_csv))
    if "seasonality" in steps:
        writers.append((SEASONALITY, lambda p: save_models(result.models, p)))
    if "study" in steps:
        for g, res in result.studies.items():
            writers.append((study_filename(g), lambda p, res=res: write_study_csv(res, p)))
    writers.append((SUMMARY, lambda p: _write_summary(result, p)))

    tmp_paths = []
    try:
        for name, write in writers:
            tmp = os.path.join(outdir, f".{name}.tmp")
            tmp_paths.append((tmp, os.path.join(outdir, name)))
            write(tmp)
    except BaseException:
        for tmp, _ in tmp_paths:
            if os.path.exists(tmp):
                os.remove(tmp)
        raise
    for tmp, final in tmp_paths:
        os.replace(tmp, final)
    return [final for _, final in tmp_paths]


def _write_summary(result, path):
    with open(path, "w") as fh:
        fh.write("key,value\n")
        for k, v in result.summary():
            fh.write(f"{k},{int(v) if isinstance(v, (int, np.integer)) else v}\n")
