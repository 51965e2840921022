"""Inject effective market orders into a synthetic day and watch the book recover.

Run: python3 demos/shock_study.py
"""
import numpy as np

from lobresil import FlowParams, ShockSpec, generate, inject_shocks, replay_flow, run_study

MIN = 60_000
base = generate(FlowParams(days=3, seed=5))
rng = np.random.default_rng(5)
specs = [ShockSpec(1, int(t), day=d)
         for d in base.days
         for t in np.sort(rng.choice(np.arange(MIN, 239 * MIN), 80, replace=False))]
flow, injected = inject_shocks(base, specs, on_infeasible="skip")
print(f"injected {len(injected)} of {len(specs)} type-1 shocks")

results = run_study(replay_flow(flow), grouping="type")
res = results["type1"]
print(f"{res.n_anchors} type-1 anchors (injected plus organic)")
print(" t   spread  depth_bid  depth_ask")
for t in (-5, -1, 0, 1, 2, 5, 10, 20):
    print(f"{t:3d} {res.spread.at(t):8.1f} {res.depth_bid.at(t):10.1f} {res.depth_ask.at(t):10.1f}")
lam = res.intensity[4]
print("type-4 limit order intensity, minutes -3..5:",
      [round(float(lam.at(t)), 2) for t in range(-3, 6) if t != 0])
