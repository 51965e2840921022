"""Replay a small synthetic flow and tabulate order aggressiveness.

Run: python3 demos/classify_quickstart.py
"""
import numpy as np

from lobresil import FlowParams, generate, replay_flow, tabulate

flow = generate(FlowParams(days=2, seed=1))
replays = replay_flow(flow, keep_classified=True)
table = tabulate([c for r in replays for c in r.classified])

print(f"{len(flow)} events over {len(flow.days)} days")
print("counts by type (rows) and spread bucket (columns, 1..4+ ticks):")
for k, row in enumerate(table.counts, start=1):
    print(f"  type {k:2d}: {row.tolist()}")

types = np.concatenate([r.order_type for r in replays])
share = np.isin(types, (1, 2, 3, 7, 8, 9)).mean()
print(f"effective market orders: {share:.1%} of submits")
