"""Command-line entry point: ``lobresil <subcommand> [options]``.

Exit codes: 0 success, 1 input/configuration error, 2 internal error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import io
from .config import build_config, parse_pairs
from .errors import InputError
from .pipeline import run_pipeline, write_artifacts
from .synthflow import generate

log = logging.getLogger("lobresil")

_SHARED = [
    ("--orders", "order-flow CSV"),
    ("--snapshot", "opening snapshot CSV"),
    ("--output-dir", "directory for artifacts"),
    ("--tick-size", "tick size in currency units (default 0.01)"),
    ("--session", "trading segments, e.g. 09:30-11:30,13:00-15:00"),
    ("--spread-buckets", "bucket lower edges in ticks, e.g. 1,2,3,4"),
    ("--update-half-width", "best-limit updates on each side of an anchor"),
    ("--minute-half-width", "minutes on each side of an anchor"),
    ("--fff-q", "polynomial order of the seasonality regression"),
    ("--fff-p", "number of Fourier harmonics"),
    ("--grouping", "type, spread or both"),
    ("--seasonality", "seasonality CSV to use instead of fitting"),
    ("--seed", "random seed (synth)"),
    ("--workers", "processes for per-day replay"),
]


def _parser():
    p = argparse.ArgumentParser(prog="lobresil", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    helps = {
        "classify": "replay and tabulate order types by spread bucket",
        "fit-seasonality": "fit intraday seasonality models",
        "study": "event-study curves around effective market orders",
        "pipeline": "classify, fit seasonality and run the event studies",
        "synth": "generate a synthetic order-flow input",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", help="key = value configuration file")
        for flag, h in _SHARED:
            sp.add_argument(flag, help=h)
        if name == "synth":
            sp.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                            help="synthetic-flow parameter, e.g. days=5")
    return p


def _config(args):
    pairs = [(flag[2:], getattr(args, flag[2:].replace("-", "_")))
             for flag, _ in _SHARED]
    pairs = [(k, v) for k, v in pairs if v is not None]
    for item in getattr(args, "set", []):
        if "=" not in item:
            raise InputError(f"--set expects KEY=VALUE, got {item!r}")
        pairs.append(tuple(item.split("=", 1)))
    return build_config(args.config, parse_pairs(pairs))


def _load_flow(cfg):
    if not cfg.orders:
        raise InputError("no order-flow file given (--orders)")
    flow, errors = io.ingest(cfg.orders, cfg.snapshot, cfg.tick_size, cfg.session)
    if errors:
        log.warning("%d malformed rows skipped", len(errors))
    return flow


def cmd_synth(cfg):
    flow = generate(cfg.flow_params())
    os.makedirs(cfg.output_dir, exist_ok=True)
    io.write_orders(flow, os.path.join(cfg.output_dir, "orders.csv"), cfg.tick_size)
    io.write_snapshot(flow, os.path.join(cfg.output_dir, "snapshot.csv"), cfg.tick_size)
    log.info("wrote %d events over %d days", len(flow), len(flow.days))


def cmd_run(cfg, steps):
    flow = _load_flow(cfg)
    result = run_pipeline(flow, cfg, steps)
    paths = write_artifacts(result, cfg.output_dir, steps)
    for p in paths:
        log.info("wrote %s", p)


STEPS = {
    "classify": ("classify",),
    "fit-seasonality": ("seasonality",),
    "study": ("study",),
    "pipeline": ("classify", "seasonality", "study"),
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        if args.command == "synth":
            cmd_synth(cfg)
        else:
            cmd_run(cfg, STEPS[args.command])
    except (InputError, OSError) as exc:
        log.error("%s", exc)
        return 1
    except Exception as exc:  # noqa: BLE001
        log.error("internal error: %s: %s", type(exc).__name__, exc)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
