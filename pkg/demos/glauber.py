"""The profit-maximizing sign rule with logistic noise is Glauber dynamics."""

import math

import numpy as np

from isingmarket.market import MarketConfig, MarketState, agent_update, expected_pnl

n = 100_000
cfg = MarketConfig(n_agents=n)
rng = np.random.default_rng(1)

# all agents aligned, so everybody sees the same local field h = lam * (N-1)/N
print("   h    P(+1) sim   1/(1+e^-h)")
for h in (-3.0, -1.0, -0.25, 0.0, 0.25, 1.0, 3.0):
    s = np.full(n, 1.0 if h >= 0 else -1.0)
    lam = abs(h) * n / (n - 1)
    new = agent_update(MarketState(s, 100.0), cfg, lam, 0.0, rng)
    print(f"{h:5.2f}   {np.mean(new > 0):.4f}      {1 / (1 + math.exp(-h)):.4f}")

# one trader among five: expected P&L of buying and selling
small = MarketConfig(n_agents=5)
state = MarketState(np.array([1.0, 1.0, 1.0, -1.0, 1.0]), 100.0)
print("expected P&L for agent 3 at lambda=1:", expected_pnl(3, state, small, 1.0))
