"""Fit intraday patterns with the Fourier flexible form.

The synthetic generator is stationary, so the fitted spread pattern is close
to flat. A planted U-shape shows what a real intraday pattern looks like.

Run: python3 demos/seasonality_fit.py
"""
import numpy as np

from lobresil import FlowParams, build_minute_series, fit_fff, generate, replay_flow
from lobresil.seasonality import fit_fff_observations

replays = replay_flow(generate(FlowParams(days=5, seed=2)))
model = fit_fff(build_minute_series(replays, "spread"), 2, 6)
print(f"synthetic spread: R^2 = {model.r2:.3f} on {model.n_obs} minute observations")
print("  fitted at minutes 1, 120, 240:", np.round(model([1, 120, 240]), 3))

# wide at the open and close, narrow at midday
T, days = 240, 20
tau = np.tile(np.arange(1, T + 1), days)
x = tau / T
rng = np.random.default_rng(0)
obs = 2.0 + 3.0 * (x - 0.5) ** 2 * 4 + rng.normal(0, 0.3, tau.size)
u = fit_fff_observations(tau, obs, T)
print(f"planted U-shape: R^2 = {u.r2:.3f}")
for name, c, se in zip(u.names(), u.coef, u.stderr):
    print(f"  {name:11s} {c:8.4f}  (se {se:.4f})")
for m in (1, 60, 120, 180, 240):
    true = 2.0 + 12.0 * (m / T - 0.5) ** 2
    print(f"  minute {m:3d}: fitted {u([m])[0]:.3f}, true {true:.3f}")
